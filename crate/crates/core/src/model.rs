//! Cooperative data exchange instances and their incidence structure.
//!
//! Packet and client indices are 0-based throughout the library. The file
//! formats and the CLI speak 1-based indices and convert at the boundary.

use std::collections::BTreeSet;

use log::warn;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProblemError {
    #[error("a problem needs at least one packet and one client")]
    Empty,
    #[error("declared {declared} clients but {actual} holding sets were given")]
    ClientCountMismatch { declared: usize, actual: usize },
    #[error("client {} holds packet index {index}, outside 1..={k}", client + 1)]
    IndexOutOfRange { client: usize, index: i64, k: usize },
    #[error("no client holds packet(s) {}", one_based(.0))]
    UncoveredPackets(Vec<usize>),
}

fn one_based(v: &[usize]) -> String {
    v.iter().map(|i| (i + 1).to_string()).collect::<Vec<_>>().join(", ")
}

/// A validated CDE instance: `k` packets spread over `n` clients.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CdeProblem {
    k: usize,
    holdings: Vec<Vec<usize>>,
}

impl CdeProblem {
    /// Validates 0-based holding sets. Duplicates are dropped with a warning.
    pub fn new(k: usize, holdings: Vec<Vec<usize>>) -> Result<Self, ProblemError> {
        if k == 0 || holdings.is_empty() {
            return Err(ProblemError::Empty);
        }
        let mut normalized = Vec::with_capacity(holdings.len());
        let mut covered = vec![false; k];
        for (client, held) in holdings.into_iter().enumerate() {
            let before = held.len();
            let set: BTreeSet<usize> = held.into_iter().collect();
            if set.len() != before {
                warn!(
                    "client {} lists {} duplicate packet index(es); deduplicated",
                    client + 1,
                    before - set.len()
                );
            }
            if let Some(&bad) = set.iter().find(|&&i| i >= k) {
                return Err(ProblemError::IndexOutOfRange {
                    client,
                    index: bad as i64 + 1,
                    k,
                });
            }
            for &i in &set {
                covered[i] = true;
            }
            normalized.push(set.into_iter().collect());
        }
        let uncovered: Vec<usize> = (0..k).filter(|&i| !covered[i]).collect();
        if !uncovered.is_empty() {
            return Err(ProblemError::UncoveredPackets(uncovered));
        }
        Ok(Self {
            k,
            holdings: normalized,
        })
    }

    /// Builds a problem from 1-based packet numbers, as written in problem files.
    pub fn from_one_based(k: usize, n: usize, holdings: &[Vec<i64>]) -> Result<Self, ProblemError> {
        if holdings.len() != n {
            return Err(ProblemError::ClientCountMismatch {
                declared: n,
                actual: holdings.len(),
            });
        }
        let mut zero_based = Vec::with_capacity(n);
        for (client, held) in holdings.iter().enumerate() {
            let mut set = Vec::with_capacity(held.len());
            for &i in held {
                if i < 1 || i as u64 > k as u64 {
                    return Err(ProblemError::IndexOutOfRange { client, index: i, k });
                }
                set.push(i as usize - 1);
            }
            zero_based.push(set);
        }
        Self::new(k, zero_based)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.holdings.len()
    }

    /// Sorted packet indices held by `client`.
    pub fn holdings(&self, client: usize) -> &[usize] {
        &self.holdings[client]
    }

    pub fn holds(&self, client: usize, packet: usize) -> bool {
        self.holdings[client].binary_search(&packet).is_ok()
    }

    /// Sorted packet indices `client` is missing.
    pub fn missing(&self, client: usize) -> Vec<usize> {
        (0..self.k).filter(|&i| !self.holds(client, i)).collect()
    }

    /// Count of nonzero-eligible coefficients in any encoding matrix.
    pub fn support_size(&self) -> usize {
        self.holdings.iter().map(Vec::len).sum()
    }

    pub fn support_pattern(&self) -> SupportPattern {
        let n = self.n();
        let mut cells = vec![false; self.k * n];
        for (j, held) in self.holdings.iter().enumerate() {
            for &i in held {
                cells[i * n + j] = true;
            }
        }
        SupportPattern {
            k: self.k,
            n,
            cells,
        }
    }

    pub fn local_support(&self, client: usize) -> LocalSupport {
        assert!(client < self.n(), "client index out of range");
        let rows = self.missing(client);
        let adjacency = rows
            .iter()
            .map(|&i| (0..self.n()).filter(|&j| self.holds(j, i)).collect())
            .collect();
        LocalSupport {
            client,
            n: self.n(),
            rows,
            adjacency,
        }
    }
}

/// Boolean `k x n` pattern: entry `(i, j)` is set iff client `j` holds packet `i`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SupportPattern {
    k: usize,
    n: usize,
    cells: Vec<bool>,
}

impl SupportPattern {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, packet: usize, client: usize) -> bool {
        self.cells[packet * self.n + client]
    }

    pub fn count(&self) -> usize {
        self.cells.iter().filter(|&&b| b).count()
    }
}

/// Rows of the support pattern restricted to the packets one client misses.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalSupport {
    client: usize,
    n: usize,
    rows: Vec<usize>,
    adjacency: Vec<Vec<usize>>,
}

impl LocalSupport {
    pub fn client(&self) -> usize {
        self.client
    }

    /// Number of columns (clients).
    pub fn n(&self) -> usize {
        self.n
    }

    /// The missing packet indices, sorted.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }

    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    /// Columns holding a variable in local row `t`.
    pub fn row_columns(&self, t: usize) -> &[usize] {
        &self.adjacency[t]
    }

    pub fn adjacency(&self) -> &[Vec<usize>] {
        &self.adjacency
    }

    pub fn get(&self, t: usize, column: usize) -> bool {
        self.adjacency[t].binary_search(&column).is_ok()
    }
}
