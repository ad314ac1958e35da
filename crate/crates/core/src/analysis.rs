//! Structural analysis of a CDE instance: per-client diameters, the global
//! diameter, the error-correction capability and the degree bound used by
//! the random-coding success floor.
//!
//! Every coefficient variable occurs in exactly one entry of the incidence
//! matrix, so a square symbolic submatrix is non-singular iff its support
//! admits a perfect matching. Generic rank is therefore a matching size, and
//! the diameter of a local incidence matrix follows from Hall's condition:
//!
//! ```text
//! rho_j = n - min over nonempty T of (|N(T)| - |T|)
//! ```
//!
//! where `T` ranges over the missing packets of client `j` and `N(T)` is the
//! set of clients holding at least one packet of `T`.

use num_bigint::BigUint;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::combinatorics::{binomial, for_each_subset};
use crate::matching::max_matching;
use crate::model::{CdeProblem, LocalSupport};
use crate::par;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnalysisError {
    #[error("client {} cannot recover its missing packets even without errors", client + 1)]
    Infeasible { client: usize },
    #[error("enumeration needs {required} steps, budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

/// Missing-row counts up to this size use direct subset enumeration of Hall's
/// condition; larger ones use the replicated-row matching test.
pub const HALL_ENUMERATION_LIMIT: usize = 20;

/// Default cap on column subsets examined by [`char_poly_degree_bound`].
pub const DEFAULT_DEGREE_BUDGET: u64 = 10_000_000;

/// Maximum rank of the local incidence matrix restricted to `columns`, over
/// all assignments of its variables.
pub fn generic_rank(support: &LocalSupport, columns: &[usize]) -> usize {
    let mut allowed = vec![false; support.n()];
    for &c in columns {
        allowed[c] = true;
    }
    max_matching(support.adjacency(), support.n(), Some(&allowed), None)
}

/// `min over nonempty T (|N(T)| - |T|)`, negative when Hall's condition fails.
/// `None` for a client that misses nothing.
pub fn hall_surplus(support: &LocalSupport) -> Option<i64> {
    if support.row_count() == 0 {
        None
    } else if support.row_count() <= HALL_ENUMERATION_LIMIT {
        Some(surplus_by_enumeration(support))
    } else {
        Some(surplus_by_matching(support))
    }
}

pub(crate) fn surplus_by_enumeration(support: &LocalSupport) -> i64 {
    let m = support.row_count();
    let words = support.n().div_ceil(64).max(1);
    let neighbors: Vec<Vec<u64>> = (0..m)
        .map(|t| {
            let mut bits = vec![0u64; words];
            for &c in support.row_columns(t) {
                bits[c / 64] |= 1 << (c % 64);
            }
            bits
        })
        .collect();
    // stack[d] holds N(T) for the subset chosen down to depth d.
    let mut stack = vec![0u64; (m + 1) * words];
    let mut best = i64::MAX;
    fn walk(
        start: usize,
        depth: usize,
        words: usize,
        neighbors: &[Vec<u64>],
        stack: &mut [u64],
        best: &mut i64,
    ) {
        for t in start..neighbors.len() {
            let (prev, next) = stack.split_at_mut((depth + 1) * words);
            let prev = &prev[depth * words..];
            let next = &mut next[..words];
            let mut reach = 0i64;
            for w in 0..words {
                next[w] = prev[w] | neighbors[t][w];
                reach += next[w].count_ones() as i64;
            }
            *best = (*best).min(reach - (depth as i64 + 1));
            walk(t + 1, depth + 1, words, neighbors, stack, best);
        }
    }
    walk(0, 0, words, &neighbors, &mut stack, &mut best);
    best
}

/// The surplus is at least `s >= 0` iff, for every row, giving that row `s + 1`
/// copies still leaves a matching that saturates all copies.
pub(crate) fn surplus_by_matching(support: &LocalSupport) -> i64 {
    let m = support.row_count();
    let n = support.n();
    let adj = support.adjacency();
    if max_matching(adj, n, None, None) < m {
        // Hall fails; the exact deficiency is not needed by callers.
        return -1;
    }
    let holds = |s: usize| {
        (0..m).all(|r| {
            let mut copies = vec![1; m];
            copies[r] = s + 1;
            max_matching(adj, n, None, Some(&copies)) == m + s
        })
    };
    let (mut lo, mut hi) = (0usize, n - m);
    while lo < hi {
        let mid = (lo + hi).div_ceil(2);
        if holds(mid) {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo as i64
}

/// Smallest `rho` such that every `rho` columns of the local incidence matrix
/// contain a non-singular square submatrix of full order. Zero when the client
/// misses nothing.
pub fn local_diameter(support: &LocalSupport) -> Result<usize, AnalysisError> {
    match hall_surplus(support) {
        None => Ok(0),
        Some(s) if s < 0 => Err(AnalysisError::Infeasible {
            client: support.client(),
        }),
        Some(s) => Ok(support.n() - s as usize),
    }
}

/// Per-client diameters, computed concurrently. The first infeasible client
/// (lowest index) is reported.
pub fn local_diameters(problem: &CdeProblem) -> Result<Vec<usize>, AnalysisError> {
    let clients: Vec<usize> = (0..problem.n()).collect();
    par::map_slice(&clients, |&j| local_diameter(&problem.local_support(j)))
        .into_iter()
        .collect()
}

/// Global diameter: the maximum local diameter.
pub fn diameter(problem: &CdeProblem) -> Result<usize, AnalysisError> {
    Ok(local_diameters(problem)?.into_iter().max().unwrap_or(0))
}

/// `floor((n - rho) / 2)`.
pub fn capability_for(n: usize, rho: usize) -> usize {
    n.saturating_sub(rho) / 2
}

pub fn capability(problem: &CdeProblem) -> Result<usize, AnalysisError> {
    Ok(capability_for(problem.n(), diameter(problem)?))
}

/// Number of full-order column subsets of the local incidence matrix whose
/// support admits a perfect matching.
pub fn nonsingular_minor_count(support: &LocalSupport) -> u128 {
    let m = support.row_count();
    if m == 0 {
        return 0;
    }
    let n = support.n();
    let mut allowed = vec![false; n];
    let mut count = 0u128;
    for_each_subset(n, m, |cols| {
        allowed.iter_mut().for_each(|a| *a = false);
        for &c in cols {
            allowed[c] = true;
        }
        if max_matching(support.adjacency(), n, Some(&allowed), None) == m {
            count += 1;
        }
        true
    });
    count
}

/// Upper bound on the degree of the character polynomial: each non-singular
/// full-order minor of client `j` contributes its order `|missing_j|`.
/// Minors shared between clients are counted once per client, so this can
/// only overestimate the true degree.
pub fn char_poly_degree_bound(problem: &CdeProblem, budget: u64) -> Result<BigUint, AnalysisError> {
    let required: u128 = (0..problem.n())
        .map(|j| binomial(problem.n(), problem.k() - problem.holdings(j).len()))
        .fold(0u128, u128::saturating_add);
    if required > budget as u128 {
        return Err(AnalysisError::BudgetExceeded { required, budget });
    }
    let clients: Vec<usize> = (0..problem.n()).collect();
    let terms = par::map_slice(&clients, |&j| {
        let s = problem.local_support(j);
        BigUint::from(nonsingular_minor_count(&s)) * BigUint::from(s.row_count())
    });
    Ok(terms.into_iter().sum())
}

fn display<S: Serializer, T: std::fmt::Display>(v: &T, s: S) -> Result<S::Ok, S::Error> {
    s.collect_str(v)
}

/// Structural summary of an instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CapabilityReport {
    pub rho_per_client: Vec<usize>,
    pub rho: usize,
    pub delta: usize,
    /// Upper bound on the character polynomial degree (multiset sum).
    #[serde(serialize_with = "display")]
    pub degree_bound: BigUint,
    /// Clients that miss nothing; their diameter is reported as 0 by convention.
    pub clients_missing_nothing: Vec<usize>,
}

pub fn analyze(problem: &CdeProblem, degree_budget: u64) -> Result<CapabilityReport, AnalysisError> {
    let rho_per_client = local_diameters(problem)?;
    let rho = rho_per_client.iter().copied().max().unwrap_or(0);
    let degree_bound = char_poly_degree_bound(problem, degree_budget)?;
    Ok(CapabilityReport {
        delta: capability_for(problem.n(), rho),
        rho,
        rho_per_client,
        degree_bound,
        clients_missing_nothing: (0..problem.n())
            .filter(|&j| problem.holdings(j).len() == problem.k())
            .collect(),
    })
}
