//! Network graph construction and combination-weight matrices.
//!
//! A topology is an undirected connected graph over `N` nodes where each
//! neighborhood `N_k` includes `k` itself. Combination matrices hold the
//! non-negative weights used by the diffusion steps; they are normalized
//! per column so that the combine step at node `k`,
//! `w_k = sum_l a[l][k] * phi_l`, is an average over `N_k`.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Column sums of a combination matrix must equal 1 within this tolerance.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

const BUILD_ATTEMPTS: usize = 64;

/// Undirected connected graph with self-inclusive neighborhoods.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    /// Per-node neighbor sets, each containing the node itself.
    neighbors: Vec<BTreeSet<usize>>,
}

impl NetworkTopology {
    /// Build from per-node neighbor sets, validating self-inclusion,
    /// symmetry and connectivity. Sets may omit the node itself; it is
    /// added.
    pub fn new(mut neighbors: Vec<BTreeSet<usize>>) -> Result<Self> {
        let n = neighbors.len();
        if n == 0 {
            return Err(Error::invalid("topology must have at least one node"));
        }
        for (k, set) in neighbors.iter_mut().enumerate() {
            if set.iter().any(|&l| l >= n) {
                return Err(Error::invalid(format!(
                    "node {k} lists a neighbor out of range"
                )));
            }
            set.insert(k);
        }
        for k in 0..n {
            for &l in &neighbors[k] {
                if !neighbors[l].contains(&k) {
                    return Err(Error::invalid(format!(
                        "asymmetric adjacency: {l} in N_{k} but {k} not in N_{l}"
                    )));
                }
            }
        }
        let topo = Self { neighbors };
        if !topo.is_connected() {
            return Err(Error::invalid("topology must be connected"));
        }
        Ok(topo)
    }

    pub fn node_count(&self) -> usize {
        self.neighbors.len()
    }

    /// Neighborhood of `k`, including `k` itself.
    pub fn neighbors(&self, k: usize) -> &BTreeSet<usize> {
        &self.neighbors[k]
    }

    /// `|N_k|`, the self-inclusive neighborhood size.
    pub fn degree(&self, k: usize) -> usize {
        self.neighbors[k].len()
    }

    fn is_connected(&self) -> bool {
        let n = self.node_count();
        let mut seen = vec![false; n];
        let mut queue = vec![0usize];
        seen[0] = true;
        let mut reached = 1;
        while let Some(k) = queue.pop() {
            for &l in &self.neighbors[k] {
                if !seen[l] {
                    seen[l] = true;
                    reached += 1;
                    queue.push(l);
                }
            }
        }
        reached == n
    }

    /// Plain-text form: `nodes N` then one `edge l k` line per non-self
    /// edge with `l < k`.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes {}\n", self.node_count());
        for k in 0..self.node_count() {
            for &l in &self.neighbors[k] {
                if k < l {
                    out.push_str(&format!("edge {k} {l}\n"));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| Error::invalid("empty topology text"))?;
        let n: usize = head
            .strip_prefix("nodes ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::invalid(format!("bad topology header: {head:?}")))?;
        let mut neighbors = vec![BTreeSet::new(); n];
        for line in lines {
            let mut parts = line.split_whitespace();
            match (parts.next(), parts.next(), parts.next(), parts.next()) {
                (Some("edge"), Some(a), Some(b), None) => {
                    let a: usize = a
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad edge line: {line:?}")))?;
                    let b: usize = b
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad edge line: {line:?}")))?;
                    if a >= n || b >= n {
                        return Err(Error::invalid(format!("edge out of range: {line:?}")));
                    }
                    neighbors[a].insert(b);
                    neighbors[b].insert(a);
                }
                _ => return Err(Error::invalid(format!("bad topology line: {line:?}"))),
            }
        }
        Self::new(neighbors)
    }
}

/// Random connected graph on `n` nodes with non-self degrees within one of
/// `target_degree`. Deterministic given the rng state; retries the whole
/// construction until the degree bound holds.
pub fn random_connected_graph<R: Rng>(
    n: usize,
    target_degree: usize,
    rng: &mut R,
) -> Result<NetworkTopology> {
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 nodes, got {n}")));
    }
    if target_degree == 0 || target_degree >= n {
        return Err(Error::invalid(format!(
            "target_degree must be in 1..{n}, got {target_degree}"
        )));
    }

    for _ in 0..BUILD_ATTEMPTS {
        // a random Hamiltonian path guarantees connectivity
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut adj = vec![BTreeSet::<usize>::new(); n];
        for w in order.windows(2) {
            adj[w[0]].insert(w[1]);
            adj[w[1]].insert(w[0]);
        }

        // grow low-degree nodes toward the target, never past target + 1
        loop {
            let mut deficit: Vec<usize> =
                (0..n).filter(|&k| adj[k].len() < target_degree).collect();
            if deficit.is_empty() {
                break;
            }
            deficit.shuffle(rng);
            let mut added = false;
            'pairs: for i in 0..deficit.len() {
                for j in (i + 1)..deficit.len() {
                    let (u, v) = (deficit[i], deficit[j]);
                    if !adj[u].contains(&v) {
                        adj[u].insert(v);
                        adj[v].insert(u);
                        added = true;
                        break 'pairs;
                    }
                }
            }
            if !added {
                // leftover deficit nodes are pairwise adjacent; top up from
                // any node still below target + 1
                let u = deficit[0];
                let candidates: Vec<usize> = (0..n)
                    .filter(|&v| v != u && !adj[u].contains(&v) && adj[v].len() <= target_degree)
                    .collect();
                match candidates.as_slice().choose(rng) {
                    Some(&v) => {
                        adj[u].insert(v);
                        adj[v].insert(u);
                    }
                    None => break,
                }
            }
        }

        let lo = target_degree.saturating_sub(1);
        let hi = target_degree + 1;
        if (0..n).all(|k| (lo..=hi).contains(&adj[k].len())) {
            return NetworkTopology::new(adj);
        }
    }
    Err(Error::ConstructionFailure(format!(
        "no graph with degrees {target_degree}+-1 on {n} nodes within {BUILD_ATTEMPTS} attempts"
    )))
}

/// Non-negative weights for blending neighbor values, one column per node,
/// each column summing to 1 over `N_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationMatrix {
    n: usize,
    /// Row-major: `weights[l * n + k]` is the weight on node `l`'s value in
    /// node `k`'s blend.
    weights: Vec<f64>,
}

impl CombinationMatrix {
    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn get(&self, l: usize, k: usize) -> f64 {
        self.weights[l * self.n + k]
    }

    /// Nonzero entries of column `k` as `(l, weight)` pairs.
    pub fn in_weights(&self, k: usize) -> Vec<(usize, f64)> {
        (0..self.n)
            .filter_map(|l| {
                let w = self.get(l, k);
                (w != 0.0).then_some((l, w))
            })
            .collect()
    }

    /// Check all matrix invariants against a topology: entries non-negative,
    /// zero outside `N_k`, columns summing to 1 within [`WEIGHT_SUM_TOL`].
    pub fn validate_for(&self, topology: &NetworkTopology) -> Result<()> {
        if self.n != topology.node_count() {
            return Err(Error::DimensionMismatch {
                expected: topology.node_count(),
                actual: self.n,
            });
        }
        for k in 0..self.n {
            let mut sum = 0.0;
            for l in 0..self.n {
                let w = self.get(l, k);
                if w < 0.0 {
                    return Err(Error::invalid(format!(
                        "negative weight at ({l}, {k}): {w}"
                    )));
                }
                if w != 0.0 && !topology.neighbors(k).contains(&l) {
                    return Err(Error::invalid(format!(
                        "nonzero weight at ({l}, {k}) outside the neighborhood"
                    )));
                }
                sum += w;
            }
            if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(Error::invalid(format!("column {k} sums to {sum}, not 1")));
            }
        }
        Ok(())
    }

    /// Plain-text form: `nodes N` then one `weight l k value` line per
    /// nonzero entry.
    pub fn to_text(&self) -> String {
        let mut out = format!("nodes {}\n", self.n);
        for l in 0..self.n {
            for k in 0..self.n {
                let w = self.get(l, k);
                if w != 0.0 {
                    out.push_str(&format!("weight {l} {k} {w}\n"));
                }
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let head = lines
            .next()
            .ok_or_else(|| Error::invalid("empty weight text"))?;
        let n: usize = head
            .strip_prefix("nodes ")
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| Error::invalid(format!("bad weight header: {head:?}")))?;
        let mut weights = vec![0.0; n * n];
        for line in lines {
            let parts: Vec<&str> = line.split_whitespace().collect();
            match parts.as_slice() {
                ["weight", l, k, v] => {
                    let l: usize = l
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad weight line: {line:?}")))?;
                    let k: usize = k
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad weight line: {line:?}")))?;
                    let v: f64 = v
                        .parse()
                        .map_err(|_| Error::invalid(format!("bad weight line: {line:?}")))?;
                    if l >= n || k >= n {
                        return Err(Error::invalid(format!("weight out of range: {line:?}")));
                    }
                    weights[l * n + k] = v;
                }
                _ => return Err(Error::invalid(format!("bad weight line: {line:?}"))),
            }
        }
        Ok(Self { n, weights })
    }
}

/// `a[l][k] = 1 / |N_k|` for `l` in `N_k`, zero elsewhere.
pub fn uniform_weights(topology: &NetworkTopology) -> CombinationMatrix {
    let n = topology.node_count();
    let mut weights = vec![0.0; n * n];
    for k in 0..n {
        let w = 1.0 / topology.degree(k) as f64;
        for &l in topology.neighbors(k) {
            weights[l * n + k] = w;
        }
    }
    CombinationMatrix { n, weights }
}

/// Metropolis rule over self-inclusive neighborhood sizes:
/// `a[l][k] = 1 / max(|N_k|, |N_l|)` for `l != k` in `N_k`, with the
/// diagonal absorbing the remainder so columns sum to 1.
pub fn metropolis_weights(topology: &NetworkTopology) -> CombinationMatrix {
    let n = topology.node_count();
    let mut weights = vec![0.0; n * n];
    for k in 0..n {
        let mut off_sum = 0.0;
        for &l in topology.neighbors(k) {
            if l != k {
                let w = 1.0 / topology.degree(k).max(topology.degree(l)) as f64;
                weights[l * n + k] = w;
                off_sum += w;
            }
        }
        weights[k * n + k] = 1.0 - off_sum;
    }
    CombinationMatrix { n, weights }
}

/// Identity pattern: each node keeps only its own value. Used as the
/// default adaptation-weight matrix (each node adapts on its own data)
/// and for degenerate no-diffusion runs.
pub fn identity_weights(n: usize) -> CombinationMatrix {
    let mut weights = vec![0.0; n * n];
    for k in 0..n {
        weights[k * n + k] = 1.0;
    }
    CombinationMatrix { n, weights }
}
