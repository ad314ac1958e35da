//! Encoding matrices, local receiving codes and their distance guarantees.
//!
//! A scheme tolerates `delta` compromised clients iff every local receiving
//! matrix `E_j` generates a code of minimum distance at least `2 delta + 1`.
//! Distances are computed either by enumerating messages or by checking that
//! every `n - d + 1` columns of `E_j` have full row rank; the two routes are
//! independent and cross-checked in the test suite.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::{self, AnalysisError};
use crate::combinatorics::{binomial, for_each_subset};
use crate::field::{FieldError, Matrix, PrimeField};
use crate::model::CdeProblem;
use crate::par;

/// Default cap on weight evaluations (or rank checks) per distance computation.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error("matrix is {rows}x{cols}, problem needs {expected_rows}x{expected_cols}")]
    Shape {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error(
        "coefficient a[{},{}] = {value} but client {} does not hold packet {}",
        packet + 1, client + 1, client + 1, packet + 1
    )]
    SupportViolation { packet: usize, client: usize, value: u32 },
    #[error("client {} misses no packets; its local code is empty", client + 1)]
    EmptyCode { client: usize },
    #[error("computation needs {required} steps, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
    #[error("no verified encoding found after {attempts} attempts; try a larger field")]
    SearchExhausted { attempts: u64 },
    #[error("search strategy unavailable: {0}")]
    StrategyUnavailable(String),
}

/// A `k x n` coefficient matrix that respects the problem's support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingMatrix {
    problem: CdeProblem,
    matrix: Matrix,
}

impl EncodingMatrix {
    pub fn new(problem: &CdeProblem, matrix: Matrix) -> Result<Self, CodecError> {
        if matrix.rows() != problem.k() || matrix.cols() != problem.n() {
            return Err(CodecError::Shape {
                rows: matrix.rows(),
                cols: matrix.cols(),
                expected_rows: problem.k(),
                expected_cols: problem.n(),
            });
        }
        for i in 0..problem.k() {
            for j in 0..problem.n() {
                let value = matrix.get(i, j);
                if value != 0 && !problem.holds(j, i) {
                    return Err(CodecError::SupportViolation {
                        packet: i,
                        client: j,
                        value,
                    });
                }
            }
        }
        Ok(Self {
            problem: problem.clone(),
            matrix,
        })
    }

    pub fn problem(&self) -> &CdeProblem {
        &self.problem
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn field(&self) -> PrimeField {
        self.matrix.field()
    }

    /// Rows of `E` indexed by the packets `client` misses.
    pub fn local_receiving_matrix(&self, client: usize) -> LocalCode {
        let missing = self.problem.missing(client);
        LocalCode {
            client,
            generator: self.matrix.select_rows(&missing),
            missing,
            distance: OnceLock::new(),
        }
    }

    pub fn local_codes(&self) -> Vec<LocalCode> {
        (0..self.problem.n()).map(|j| self.local_receiving_matrix(j)).collect()
    }
}

/// The `[n, |missing|]` code one client decodes against.
#[derive(Debug, Clone)]
pub struct LocalCode {
    client: usize,
    missing: Vec<usize>,
    generator: Matrix,
    distance: OnceLock<usize>,
}

impl LocalCode {
    /// Wraps an arbitrary generator matrix, e.g. for tests of the distance routes.
    pub fn from_generator(client: usize, missing: Vec<usize>, generator: Matrix) -> Self {
        assert_eq!(missing.len(), generator.rows());
        Self {
            client,
            missing,
            generator,
            distance: OnceLock::new(),
        }
    }

    pub fn client(&self) -> usize {
        self.client
    }

    pub fn missing(&self) -> &[usize] {
        &self.missing
    }

    pub fn generator(&self) -> &Matrix {
        &self.generator
    }

    pub fn dimension(&self) -> usize {
        self.generator.rows()
    }

    pub fn length(&self) -> usize {
        self.generator.cols()
    }

    /// Messages visited by enumeration: one per line through the origin.
    pub fn enumeration_cost(&self) -> u128 {
        let q = self.generator.field().modulus() as u128;
        let m = self.dimension() as u32;
        match q.checked_pow(m) {
            Some(total) => (total - 1) / (q - 1),
            None => u128::MAX,
        }
    }

    /// Column subsets examined by the rank route in the worst case.
    pub fn rank_route_cost(&self) -> u128 {
        let n = self.length();
        (self.dimension()..=n)
            .map(|t| binomial(n, t))
            .fold(0u128, u128::saturating_add)
    }

    /// Minimum distance via whichever route is cheaper. Cached after the first
    /// successful computation.
    pub fn min_distance(&self, budget: u64) -> Result<usize, CodecError> {
        if let Some(&d) = self.distance.get() {
            return Ok(d);
        }
        let by_enum = self.enumeration_cost();
        let by_rank = self.rank_route_cost();
        let d = if by_enum <= by_rank && by_enum <= budget as u128 {
            self.min_distance_by_enumeration(budget)?
        } else if by_rank <= budget as u128 {
            self.min_distance_by_rank(budget)?
        } else {
            self.min_distance_by_enumeration(budget)?
        };
        Ok(*self.distance.get_or_init(|| d))
    }

    /// Minimum weight over all nonzero messages. Weight is invariant under
    /// scaling, so only messages whose leading nonzero entry is 1 are visited.
    pub fn min_distance_by_enumeration(&self, budget: u64) -> Result<usize, CodecError> {
        let m = self.dimension();
        if m == 0 {
            return Err(CodecError::EmptyCode { client: self.client });
        }
        let required = self.enumeration_cost();
        if required > budget as u128 {
            return Err(CodecError::BudgetExceeded { required, budget });
        }
        let g = &self.generator;
        let f = g.field();
        let q = f.modulus();
        let mut best = usize::MAX;
        let mut digits = vec![0u32; m];
        for lead in 0..m {
            digits.iter_mut().for_each(|d| *d = 0);
            digits[lead] = 1;
            let mut codeword = g.row(lead).to_vec();
            loop {
                let w = codeword.iter().filter(|&&v| v != 0).count();
                if w < best {
                    best = w;
                    if best == 0 {
                        return Ok(0);
                    }
                }
                // Odometer over the digits after `lead`, last digit fastest.
                // Bumping a digit by one (including the wrap q-1 -> 0) adds its row.
                let mut pos = m;
                loop {
                    if pos == lead + 1 {
                        pos = lead;
                        break;
                    }
                    pos -= 1;
                    for (c, &a) in codeword.iter_mut().zip(g.row(pos)) {
                        *c = f.add(*c, a);
                    }
                    digits[pos] += 1;
                    if digits[pos] < q {
                        break;
                    }
                    digits[pos] = 0;
                }
                if pos == lead {
                    break;
                }
            }
        }
        Ok(best)
    }

    /// Minimum distance as `n - t + 1` for the smallest `t` such that every
    /// `t` columns have full row rank; 0 when the generator is rank-deficient.
    pub fn min_distance_by_rank(&self, budget: u64) -> Result<usize, CodecError> {
        let m = self.dimension();
        if m == 0 {
            return Err(CodecError::EmptyCode { client: self.client });
        }
        let required = self.rank_route_cost();
        if required > budget as u128 {
            return Err(CodecError::BudgetExceeded { required, budget });
        }
        let n = self.length();
        Ok((m..=n)
            .find(|&t| self.all_subsets_full_rank(t))
            .map_or(0, |t| n - t + 1))
    }

    fn all_subsets_full_rank(&self, t: usize) -> bool {
        let m = self.dimension();
        let mut scratch = Vec::with_capacity(m * t);
        for_each_subset(self.length(), t, |cols| {
            self.generator.rank_of_columns(cols, &mut scratch) == m
        })
    }

    /// True iff every `n - d + 1` columns have full row rank, i.e. the minimum
    /// distance is at least `d`. Distances beyond the Singleton bound
    /// `n - dimension + 1` are rejected outright.
    pub fn rank_distance_check(&self, d: usize) -> bool {
        let m = self.dimension();
        let n = self.length();
        if m == 0 || d == 0 {
            return true;
        }
        if d > n || n - d + 1 < m {
            return false;
        }
        self.all_subsets_full_rank(n - d + 1)
    }
}

/// Outcome of checking every local code against `2 delta + 1`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub delta: usize,
    pub required_distance: usize,
    /// Per-client minimum distance; `None` for clients missing nothing.
    pub distances: Vec<Option<usize>>,
    pub passed: bool,
    /// The client with the smallest local distance.
    pub binding_client: Option<usize>,
}

pub fn verify_error_correction(
    encoding: &EncodingMatrix,
    delta: usize,
    budget: u64,
) -> Result<VerificationReport, CodecError> {
    let codes = encoding.local_codes();
    let distances = par::map_slice(&codes, |c| {
        if c.dimension() == 0 {
            Ok(None)
        } else {
            c.min_distance(budget).map(Some)
        }
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    let required_distance = 2 * delta + 1;
    let binding_client = distances
        .iter()
        .enumerate()
        .filter_map(|(j, d)| d.map(|d| (d, j)))
        .min()
        .map(|(_, j)| j);
    let passed = distances.iter().flatten().all(|&d| d >= required_distance);
    Ok(VerificationReport {
        delta,
        required_distance,
        distances,
        passed,
        binding_client,
    })
}

/// Draws every supported coefficient uniformly from all of GF(q), zero
/// included, in row-major order from a ChaCha stream seeded with `seed`.
pub fn random_encoding(problem: &CdeProblem, field: PrimeField, seed: u64) -> EncodingMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (k, n) = (problem.k(), problem.n());
    let mut data = vec![0u32; k * n];
    for i in 0..k {
        for j in 0..n {
            if problem.holds(j, i) {
                data[i * n + j] = rng.random_range(0..field.modulus());
            }
        }
    }
    EncodingMatrix {
        problem: problem.clone(),
        matrix: Matrix::new(field, k, n, data).expect("residues drawn below q"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStrategy {
    /// Verify `random_encoding` for consecutive seeds from `first_seed` and keep
    /// the first that passes.
    SeedSweep,
    /// Backtrack over all encodings up to column scaling. Tiny instances only.
    Exhaustive,
}

#[derive(Debug, Clone, Copy)]
pub struct ConstructOptions {
    pub strategy: SearchStrategy,
    /// First seed tried by the seed sweep.
    pub first_seed: u64,
    /// Seed-sweep attempts, or search nodes for the exhaustive strategy.
    pub max_attempts: u64,
    pub budget: u64,
    pub exhaustive_max_entries: usize,
    pub exhaustive_max_field: u32,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            strategy: SearchStrategy::SeedSweep,
            first_seed: 0,
            max_attempts: 100_000,
            budget: DEFAULT_BUDGET,
            exhaustive_max_entries: 24,
            exhaustive_max_field: 5,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Construction {
    pub encoding: EncodingMatrix,
    pub report: VerificationReport,
    /// Candidates (seed sweep) or search nodes (exhaustive) consumed.
    pub attempts: u64,
    /// Winning seed for the seed sweep.
    pub seed: Option<u64>,
}

/// Finds an encoding that corrects `floor((n - rho) / 2)` errors.
pub fn deterministic_encoding(
    problem: &CdeProblem,
    field: PrimeField,
    opts: &ConstructOptions,
) -> Result<Construction, CodecError> {
    let delta = analysis::capability(problem)?;
    match opts.strategy {
        SearchStrategy::SeedSweep => seed_sweep(problem, field, delta, opts),
        SearchStrategy::Exhaustive => exhaustive_search(problem, field, delta, opts),
    }
}

fn seed_sweep(
    problem: &CdeProblem,
    field: PrimeField,
    delta: usize,
    opts: &ConstructOptions,
) -> Result<Construction, CodecError> {
    let seeds = opts.first_seed..opts.first_seed.saturating_add(opts.max_attempts);
    let hit = par::find_first(seeds, |seed| {
        let candidate = random_encoding(problem, field, seed);
        match verify_error_correction(&candidate, delta, opts.budget) {
            Ok(report) if report.passed => Some(Ok((seed, candidate, report))),
            Ok(_) => None,
            Err(e) => Some(Err(e)),
        }
    });
    match hit {
        Some(Ok((seed, encoding, report))) => Ok(Construction {
            encoding,
            report,
            attempts: seed - opts.first_seed + 1,
            seed: Some(seed),
        }),
        Some(Err(e)) => Err(e),
        None => Err(CodecError::SearchExhausted {
            attempts: opts.max_attempts,
        }),
    }
}

/// Per-client state for the exhaustive search.
struct ClientTrack {
    missing: Vec<usize>,
    /// Projective messages (leading nonzero entry 1).
    messages: Vec<Vec<u32>>,
    /// `remaining[c]`: columns after `c` that can still add weight.
    remaining: Vec<usize>,
}

fn exhaustive_search(
    problem: &CdeProblem,
    field: PrimeField,
    delta: usize,
    opts: &ConstructOptions,
) -> Result<Construction, CodecError> {
    let q = field.modulus();
    if q > opts.exhaustive_max_field {
        return Err(CodecError::StrategyUnavailable(format!(
            "exhaustive search supports q <= {}, got {q}",
            opts.exhaustive_max_field
        )));
    }
    if problem.support_size() > opts.exhaustive_max_entries {
        return Err(CodecError::StrategyUnavailable(format!(
            "exhaustive search supports at most {} coefficients, problem has {}",
            opts.exhaustive_max_entries,
            problem.support_size()
        )));
    }
    let (k, n) = (problem.k(), problem.n());
    let target = 2 * delta + 1;

    // Column options up to scaling: zero, plus vectors whose first nonzero is 1.
    let options: Vec<Vec<Vec<u32>>> = (0..n)
        .map(|c| {
            let rows = problem.holdings(c);
            let mut out: Vec<Vec<u32>> = projective_points(q, rows.len())
                .into_iter()
                .map(|p| {
                    let mut col = vec![0u32; k];
                    for (&r, v) in rows.iter().zip(p) {
                        col[r] = v;
                    }
                    col
                })
                .collect();
            out.push(vec![0; k]);
            out
        })
        .collect();

    let tracks: Vec<ClientTrack> = (0..n)
        .filter_map(|j| {
            let missing = problem.missing(j);
            if missing.is_empty() {
                return None;
            }
            let touches = |c: usize| missing.iter().any(|&i| problem.holds(c, i));
            let remaining = (0..n).map(|c| (c + 1..n).filter(|&c2| touches(c2)).count()).collect();
            Some(ClientTrack {
                messages: projective_points(q, missing.len()),
                missing,
                remaining,
            })
        })
        .collect();

    let mut weights: Vec<Vec<usize>> = tracks.iter().map(|t| vec![0; t.messages.len()]).collect();
    let mut chosen = vec![0usize; n];
    let mut nodes = 0u64;
    let found = backtrack(
        0,
        field,
        target,
        &options,
        &tracks,
        &mut weights,
        &mut chosen,
        &mut nodes,
        opts.max_attempts,
    );
    if !found {
        return Err(CodecError::SearchExhausted { attempts: nodes });
    }
    let mut data = vec![0u32; k * n];
    for (c, &o) in chosen.iter().enumerate() {
        for (i, &v) in options[c][o].iter().enumerate() {
            data[i * n + c] = v;
        }
    }
    let encoding = EncodingMatrix::new(problem, Matrix::new(field, k, n, data)?)?;
    let report = verify_error_correction(&encoding, delta, opts.budget)?;
    debug_assert!(report.passed);
    Ok(Construction {
        encoding,
        report,
        attempts: nodes,
        seed: None,
    })
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    col: usize,
    field: PrimeField,
    target: usize,
    options: &[Vec<Vec<u32>>],
    tracks: &[ClientTrack],
    weights: &mut [Vec<usize>],
    chosen: &mut [usize],
    nodes: &mut u64,
    node_budget: u64,
) -> bool {
    if col == options.len() {
        return true;
    }
    for (o, vector) in options[col].iter().enumerate() {
        if *nodes >= node_budget {
            return false;
        }
        *nodes += 1;
        let mut feasible = true;
        for (t, track) in tracks.iter().enumerate() {
            let mut min_w = usize::MAX;
            for (mi, msg) in track.messages.iter().enumerate() {
                let s = msg
                    .iter()
                    .zip(&track.missing)
                    .fold(0, |acc, (&a, &r)| field.add(acc, field.mul(a, vector[r])));
                if s != 0 {
                    weights[t][mi] += 1;
                }
                min_w = min_w.min(weights[t][mi]);
            }
            if min_w + track.remaining[col] < target {
                feasible = false;
            }
        }
        if feasible {
            chosen[col] = o;
            if backtrack(col + 1, field, target, options, tracks, weights, chosen, nodes, node_budget) {
                return true;
            }
        }
        // Undo this column's contribution.
        for (t, track) in tracks.iter().enumerate() {
            for (mi, msg) in track.messages.iter().enumerate() {
                let s = msg
                    .iter()
                    .zip(&track.missing)
                    .fold(0, |acc, (&a, &r)| field.add(acc, field.mul(a, vector[r])));
                if s != 0 {
                    weights[t][mi] -= 1;
                }
            }
        }
    }
    false
}

/// Nonzero vectors of length `len` over GF(q) whose first nonzero entry is 1.
fn projective_points(q: u32, len: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    for lead in 0..len {
        let free = len - lead - 1;
        let total = (q as u64).pow(free as u32);
        for mut idx in 0..total {
            let mut v = vec![0u32; len];
            v[lead] = 1;
            for p in (lead + 1..len).rev() {
                v[p] = (idx % q as u64) as u32;
                idx /= q as u64;
            }
            out.push(v);
        }
    }
    out
}
