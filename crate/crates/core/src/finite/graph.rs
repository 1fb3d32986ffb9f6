use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub length: f64,
}

impl Edge {
    pub fn other(&self, x: usize) -> usize {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// Undirected graph with positive edge lengths and per-vertex capacities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeightedGraph {
    n: usize,
    edges: Vec<Edge>,
    capacities: Vec<u32>,
}

impl WeightedGraph {
    /// Graph with unit capacities.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        Self::with_capacities(n, edges, vec![1; n])
    }

    pub fn with_capacities(n: usize, edges: Vec<Edge>, capacities: Vec<u32>) -> Result<Self> {
        if capacities.len() != n {
            return Err(Error::InvalidGraph(format!(
                "{} capacities for {n} vertices",
                capacities.len()
            )));
        }
        if capacities.contains(&0) {
            return Err(Error::InvalidGraph("capacities must be positive".into()));
        }
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            if e.u >= n || e.v >= n {
                return Err(Error::InvalidGraph(format!("edge ({}, {}) out of range", e.u, e.v)));
            }
            if e.u == e.v {
                return Err(Error::InvalidGraph(format!("self-loop at {}", e.u)));
            }
            if !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::InvalidGraph(format!("edge length {} is not positive", e.length)));
            }
            if !seen.insert((e.u.min(e.v), e.u.max(e.v))) {
                return Err(Error::InvalidGraph(format!("parallel edge ({}, {})", e.u, e.v)));
            }
        }
        Ok(Self { n, edges, capacities })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    pub fn unit_capacities(&self) -> bool {
        self.capacities.iter().all(|&c| c == 1)
    }

    /// Same graph with the capacity of `v` replaced.
    pub fn with_capacity(&self, v: usize, cap: u32) -> Result<Self> {
        let mut caps = self.capacities.clone();
        caps[v] = cap;
        Self::with_capacities(self.n, self.edges.clone(), caps)
    }

    /// Same graph with every capacity set to `cap`.
    pub fn with_uniform_capacity(&self, cap: u32) -> Result<Self> {
        Self::with_capacities(self.n, self.edges.clone(), vec![cap; self.n])
    }

    /// Induced subgraph on all vertices but `v`, relabelled in order.
    pub fn remove_vertex(&self, v: usize) -> Self {
        let map = |x: usize| if x > v { x - 1 } else { x };
        let edges = self
            .edges
            .iter()
            .filter(|e| e.u != v && e.v != v)
            .map(|e| Edge {
                u: map(e.u),
                v: map(e.v),
                length: e.length,
            })
            .collect();
        let mut capacities = self.capacities.clone();
        capacities.remove(v);
        Self {
            n: self.n - 1,
            edges,
            capacities,
        }
    }

    /// Drops the edges longer than `theta`.
    pub fn without_long_edges(&self, theta: f64) -> Self {
        Self {
            n: self.n,
            edges: self.edges.iter().copied().filter(|e| e.length <= theta).collect(),
            capacities: self.capacities.clone(),
        }
    }

    /// Incident `(edge index, neighbour)` pairs per vertex.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.n];
        for (i, e) in self.edges.iter().enumerate() {
            adj[e.u].push((i, e.v));
            adj[e.v].push((i, e.u));
        }
        for a in &mut adj {
            a.sort_by_key(|&(_, w)| w);
        }
        adj
    }

    pub fn is_tree(&self) -> bool {
        if self.n == 0 || self.edges.len() + 1 != self.n {
            return false;
        }
        let adj = self.adjacency();
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(x) = stack.pop() {
            for &(_, w) in &adj[x] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.n
    }
}

/// Random graph on `n` vertices: each pair is an edge with probability
/// `density`, lengths uniform on `(0, max_length)`.
pub fn random_graph<R: Rng>(n: usize, density: f64, max_length: f64, rng: &mut R) -> WeightedGraph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < density {
                let length = max_length * (1.0 - rng.random::<f64>());
                edges.push(Edge { u, v, length });
            }
        }
    }
    WeightedGraph::new(n, edges).expect("generated graph is valid")
}

/// Random recursive tree: vertex `i` attaches to a uniform earlier vertex.
pub fn random_tree<R: Rng>(n: usize, max_length: f64, capacity: u32, rng: &mut R) -> WeightedGraph {
    let edges = (1..n)
        .map(|v| Edge {
            u: rng.random_range(0..v),
            v,
            length: max_length * (1.0 - rng.random::<f64>()),
        })
        .collect();
    WeightedGraph::with_capacities(n, edges, vec![capacity; n]).expect("generated tree is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn e(u: usize, v: usize, length: f64) -> Edge {
        Edge { u, v, length }
    }

    #[test]
    fn validation() {
        assert!(WeightedGraph::new(2, vec![e(0, 0, 1.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![e(0, 1, 0.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![e(0, 1, 1.0), e(1, 0, 2.0)]).is_err());
        assert!(WeightedGraph::new(2, vec![e(0, 2, 1.0)]).is_err());
        assert!(WeightedGraph::with_capacities(2, vec![], vec![1, 0]).is_err());
    }

    #[test]
    fn remove_vertex_relabels() {
        let g = WeightedGraph::new(3, vec![e(0, 1, 1.0), e(1, 2, 2.0), e(0, 2, 3.0)]).unwrap();
        let h = g.remove_vertex(0);
        assert_eq!(h.n(), 2);
        assert_eq!(h.edges(), &[e(0, 1, 2.0)]);
    }

    #[test]
    fn trees() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for n in 1..20 {
            assert!(random_tree(n, 1.0, 2, &mut rng).is_tree());
        }
        let cycle = WeightedGraph::new(3, vec![e(0, 1, 1.0), e(1, 2, 2.0), e(0, 2, 3.0)]).unwrap();
        assert!(!cycle.is_tree());
    }
}
