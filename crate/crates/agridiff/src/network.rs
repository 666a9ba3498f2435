//! Watts-Strogatz small-world graph carrying peer influence between farms.
//!
//! The graph is undirected and simple, immutable after construction, and
//! shared read-only across runs; each run carries its own adoption vector.

use std::collections::{BTreeSet, VecDeque};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::Population;

/// Maximum seed-increment retries before giving up on a connected graph.
const CONNECTIVITY_RETRIES: u64 = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct SocialNetwork {
    n: usize,
    k: usize,
    p: f64,
    seed: u64,
    adjacency: Vec<Vec<u32>>,
    rewired_edges: usize,
}

impl SocialNetwork {
    /// Standard Watts-Strogatz construction: a ring lattice joining each node
    /// to its `k/2` nearest neighbours per side, then each lattice edge has
    /// its far endpoint rewired with probability `p` to a uniform target,
    /// redrawing on self-loops and duplicates. If the result is disconnected
    /// the whole graph is regenerated with `seed + 1`, up to a bounded number
    /// of retries.
    pub fn watts_strogatz(n: usize, k: usize, p: f64, seed: u64) -> Result<Self> {
        if k < 2 || !k.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "ring degree k must be even and >= 2, got {k}"
            )));
        }
        if n <= k {
            return Err(Error::InvalidParameter(format!(
                "node count n must exceed k, got n={n}, k={k}"
            )));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!(
                "rewiring probability must be in [0, 1], got {p}"
            )));
        }
        for attempt in 0..=CONNECTIVITY_RETRIES {
            let current_seed = seed.wrapping_add(attempt);
            let net = Self::generate_once(n, k, p, current_seed);
            if net.is_connected() {
                return Ok(net);
            }
        }
        Err(Error::Network(format!(
            "no connected graph within {CONNECTIVITY_RETRIES} retries from seed {seed} (n={n}, k={k}, p={p})"
        )))
    }

    fn generate_once(n: usize, k: usize, p: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
        for d in 1..=k / 2 {
            for i in 0..n {
                let j = (i + d) % n;
                adj[i].insert(j as u32);
                adj[j].insert(i as u32);
            }
        }
        let mut rewired = 0usize;
        for d in 1..=k / 2 {
            for i in 0..n {
                if rng.random::<f64>() >= p {
                    continue;
                }
                let j = (i + d) % n;
                if adj[i].len() >= n - 1 {
                    continue; // node already saturated, nothing to rewire to
                }
                let w = loop {
                    let candidate = rng.random_range(0..n);
                    if candidate != i && !adj[i].contains(&(candidate as u32)) {
                        break candidate;
                    }
                };
                adj[i].remove(&(j as u32));
                adj[j].remove(&(i as u32));
                adj[i].insert(w as u32);
                adj[w].insert(i as u32);
                rewired += 1;
            }
        }
        let adjacency = adj
            .into_iter()
            .map(|set| set.into_iter().collect())
            .collect();
        SocialNetwork {
            n,
            k,
            p,
            seed,
            adjacency,
            rewired_edges: rewired,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ring_degree(&self) -> usize {
        self.k
    }

    pub fn rewiring_probability(&self) -> f64 {
        self.p
    }

    /// Seed that actually produced the graph (may exceed the requested seed
    /// when connectivity retries kicked in).
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn neighbors(&self, i: usize) -> &[u32] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges rewired away from the ring lattice during construction.
    pub fn rewired_edge_count(&self) -> usize {
        self.rewired_edges
    }

    /// All edges as (i, j) pairs with i < j, sorted.
    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (i, neighbors) in self.adjacency.iter().enumerate() {
            for &j in neighbors {
                if (i as u32) < j {
                    out.push((i as u32, j));
                }
            }
        }
        out.sort_unstable();
        out
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut visited = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        visited[0] = true;
        let mut count = 1usize;
        while let Some(i) = queue.pop_front() {
            for &j in &self.adjacency[i] {
                let j = j as usize;
                if !visited[j] {
                    visited[j] = true;
                    count += 1;
                    queue.push_back(j);
                }
            }
        }
        count == self.n
    }

    /// Fraction of node `i`'s neighbours that have adopted; 0 for isolated
    /// nodes (cannot occur under this construction, but the operation is
    /// total).
    pub fn peer_signal(&self, i: usize, adopted: &[bool]) -> Result<f64> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange {
                index: i,
                len: self.n,
            });
        }
        Ok(self.peer_signal_unchecked(i, adopted))
    }

    pub(crate) fn peer_signal_unchecked(&self, i: usize, adopted: &[bool]) -> f64 {
        let neighbors = &self.adjacency[i];
        if neighbors.is_empty() {
            return 0.0;
        }
        let count = neighbors
            .iter()
            .filter(|&&j| adopted[j as usize])
            .count();
        count as f64 / neighbors.len() as f64
    }

    /// Two-column edge list (i < j per row) for external graph tooling.
    pub fn write_edge_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        writer.write_record(["i", "j"])?;
        for (i, j) in self.edges() {
            writer.write_record([i.to_string(), j.to_string()])?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// One row of a diffusion snapshot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotRow {
    pub node: u32,
    pub adopted: bool,
    pub degree: usize,
    pub size_norm: f64,
}

/// Node-state table captured at a single simulation year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub year: u32,
    pub rows: Vec<SnapshotRow>,
}

impl Snapshot {
    pub fn adoption_fraction(&self) -> f64 {
        if self.rows.is_empty() {
            return 0.0;
        }
        self.rows.iter().filter(|r| r.adopted).count() as f64 / self.rows.len() as f64
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut writer = csv::Writer::from_path(path)?;
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
        Ok(())
    }
}

/// Captures the per-node adoption state for the requested year.
pub fn snapshot(
    pop: &Population,
    net: &SocialNetwork,
    adopted: &[bool],
    year: u32,
) -> Snapshot {
    let rows = (0..net.n())
        .map(|i| SnapshotRow {
            node: i as u32,
            adopted: adopted.get(i).copied().unwrap_or(false),
            degree: net.degree(i),
            size_norm: pop.size_norm.get(i).copied().unwrap_or(0.0),
        })
        .collect();
    Snapshot { year, rows }
}
