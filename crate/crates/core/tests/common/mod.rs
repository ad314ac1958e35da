//! Independent oracles and generators shared by the integration tests.
//!
//! The oracles deliberately avoid the library's own shortcuts: diameters come
//! from enumerating column subsets with a plain recursive matching search,
//! and distances from weighing every codeword.

#![allow(dead_code)]

use std::path::PathBuf;

use cde_core::codec::LocalCode;
use cde_core::{CdeProblem, LocalSupport, Matrix, PrimeField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn six_clients() -> CdeProblem {
    cde_core::format::read_problem(&fixture("six_clients.problem.toml")).unwrap().problem
}

/// Whether rows `0..rows` of `support` can be matched into distinct columns of `cols`.
fn has_perfect_matching(support: &LocalSupport, cols: &[usize]) -> bool {
    fn go(support: &LocalSupport, row: usize, cols: &[usize], used: &mut Vec<bool>) -> bool {
        if row == support.row_count() {
            return true;
        }
        for (slot, &c) in cols.iter().enumerate() {
            if !used[slot] && support.get(row, c) {
                used[slot] = true;
                if go(support, row + 1, cols, used) {
                    return true;
                }
                used[slot] = false;
            }
        }
        false
    }
    go(support, 0, cols, &mut vec![false; cols.len()])
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        if mask.count_ones() as usize == size {
            out.push((0..n).filter(|&i| mask >> i & 1 == 1).collect());
        }
    }
    out
}

/// Smallest `r` such that every `r` columns carry a perfect matching of the
/// missing rows. `None` when even all columns fail.
pub fn brute_force_diameter(problem: &CdeProblem, client: usize) -> Option<usize> {
    let support = problem.local_support(client);
    let n = problem.n();
    (0..=n).find(|&r| subsets(n, r).iter().all(|cols| has_perfect_matching(&support, cols)))
}

/// Generic rank by evaluation at random points of a large prime field; the
/// maximum over a few draws equals the symbolic rank with overwhelming probability.
pub fn random_evaluation_rank(support: &LocalSupport, cols: &[usize], rng: &mut ChaCha8Rng) -> usize {
    let f = PrimeField::new(2_147_483_647).unwrap();
    let rows = support.row_count();
    (0..3)
        .map(|_| {
            let mut data = Vec::with_capacity(rows * cols.len());
            for t in 0..rows {
                for &c in cols {
                    data.push(if support.get(t, c) { rng.random_range(1..f.modulus()) } else { 0 });
                }
            }
            Matrix::new(f, rows, cols.len(), data).unwrap().rank()
        })
        .max()
        .unwrap_or(0)
}

/// Random instance with every packet covered. Each client misses at most
/// `max_missing` packets when that is given.
pub fn random_problem(rng: &mut ChaCha8Rng, max_k: usize, max_n: usize, max_missing: Option<usize>) -> CdeProblem {
    let k = rng.random_range(1..=max_k);
    let n = rng.random_range(1..=max_n);
    let density: f64 = rng.random_range(0.2..0.9);
    let mut holdings: Vec<Vec<usize>> = (0..n)
        .map(|_| (0..k).filter(|_| rng.random_bool(density)).collect())
        .collect();
    if let Some(cap) = max_missing {
        for held in &mut holdings {
            while k - held.len() > cap {
                let missing: Vec<usize> = (0..k).filter(|i| !held.contains(i)).collect();
                held.push(missing[rng.random_range(0..missing.len())]);
            }
        }
    }
    for i in 0..k {
        if !holdings.iter().any(|h| h.contains(&i)) {
            let j = rng.random_range(0..n);
            holdings[j].push(i);
        }
    }
    CdeProblem::new(k, holdings).unwrap()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Encodes `message` (one value per generator row) into a codeword.
pub fn codeword(code: &LocalCode, message: &[u32]) -> Vec<u32> {
    code.generator().left_mul(message)
}

/// Minimum weight over every nonzero message, no symmetry reduction.
pub fn brute_force_distance(code: &LocalCode) -> usize {
    let g = code.generator();
    let q = g.field().modulus();
    let m = code.dimension();
    let mut best = usize::MAX;
    let mut msg = vec![0u32; m];
    loop {
        let mut pos = 0;
        while pos < m {
            msg[pos] += 1;
            if msg[pos] < q {
                break;
            }
            msg[pos] = 0;
            pos += 1;
        }
        if pos == m {
            return best;
        }
        let w = codeword(code, &msg).iter().filter(|&&v| v != 0).count();
        best = best.min(w);
    }
}

/// Largest `d` accepted by the rank test.
pub fn rank_route_distance(code: &LocalCode) -> usize {
    (0..=code.length()).rev().find(|&d| code.rank_distance_check(d)).unwrap()
}
