//! Hypergraphs, matchings, and fractional matchings.
//!
//! Vertices are `0..vertex_count`, edges are non-empty vertex sets addressed
//! by their index in insertion order.  A *matching* is a set of pairwise
//! disjoint edges; a *fractional matching* assigns each edge a rational
//! `x(e) ∈ [0, 1]` with `Σ_{e ∋ v} x(e) ≤ 1` at every vertex.

use crate::rational::Rat;
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HypergraphError {
    #[error("edge {index} is empty")]
    EmptyEdge { index: usize },
    #[error("edge {second} duplicates edge {first}")]
    DuplicateEdge { first: usize, second: usize },
    #[error("edge {edge} contains vertex {vertex}, but the vertex count is {vertex_count}")]
    VertexOutOfRange {
        edge: usize,
        vertex: usize,
        vertex_count: usize,
    },
    #[error("edge index {index} out of range (edge count {edge_count})")]
    EdgeIndexOutOfRange { index: usize, edge_count: usize },
    #[error("got {weights} weights for {edges} edges")]
    WeightCountMismatch { weights: usize, edges: usize },
    #[error("negative weight on edge {edge}")]
    NegativeWeight { edge: usize },
    #[error("edges {first} and {second} share a vertex")]
    OverlappingEdges { first: usize, second: usize },
    #[error("value vector has {values} entries for {edges} edges")]
    ValueCountMismatch { values: usize, edges: usize },
}

/// A finite hypergraph with validated, canonicalized edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    vertex_count: usize,
    /// Each edge strictly increasing; edge order as given at build time.
    edges: Vec<Vec<usize>>,
    /// vertex -> indices of incident edges, increasing.
    incident: Vec<Vec<usize>>,
    /// edge -> indices of distinct intersecting edges (the neighborhood), increasing.
    neighbors: Vec<Vec<usize>>,
}

impl Hypergraph {
    /// Validates and canonicalizes the edge list: vertex lists are sorted and
    /// deduplicated, edge order is preserved.  Rejects empty edges, repeated
    /// edges, and out-of-range vertices.
    pub fn build(vertex_count: usize, edges: Vec<Vec<usize>>) -> Result<Self, HypergraphError> {
        let mut canon: Vec<Vec<usize>> = Vec::with_capacity(edges.len());
        let mut seen: HashMap<Vec<usize>, usize> = HashMap::new();
        for (i, mut e) in edges.into_iter().enumerate() {
            e.sort_unstable();
            e.dedup();
            if e.is_empty() {
                return Err(HypergraphError::EmptyEdge { index: i });
            }
            if let Some(&v) = e.iter().find(|&&v| v >= vertex_count) {
                return Err(HypergraphError::VertexOutOfRange {
                    edge: i,
                    vertex: v,
                    vertex_count,
                });
            }
            if let Some(&first) = seen.get(&e) {
                return Err(HypergraphError::DuplicateEdge { first, second: i });
            }
            seen.insert(e.clone(), i);
            canon.push(e);
        }

        let mut incident = vec![Vec::new(); vertex_count];
        for (i, e) in canon.iter().enumerate() {
            for &v in e {
                incident[v].push(i);
            }
        }
        let mut neighbors = Vec::with_capacity(canon.len());
        let mut stamp = vec![usize::MAX; canon.len()];
        for (i, e) in canon.iter().enumerate() {
            let mut nbrs = Vec::new();
            for &v in e {
                for &f in &incident[v] {
                    if f != i && stamp[f] != i {
                        stamp[f] = i;
                        nbrs.push(f);
                    }
                }
            }
            nbrs.sort_unstable();
            neighbors.push(nbrs);
        }
        Ok(Self {
            vertex_count,
            edges: canon,
            incident,
            neighbors,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Largest edge size, 0 for an edgeless hypergraph.
    pub fn rank(&self) -> usize {
        self.edges.iter().map(Vec::len).max().unwrap_or(0)
    }

    /// The vertices of edge `e`, strictly increasing.  Panics if out of range.
    pub fn edge(&self, e: usize) -> &[usize] {
        &self.edges[e]
    }

    pub fn edges(&self) -> impl Iterator<Item = &[usize]> {
        self.edges.iter().map(Vec::as_slice)
    }

    /// Indices of the edges containing vertex `v`, increasing.
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.incident[v]
    }

    fn check_edge_index(&self, e: usize) -> Result<(), HypergraphError> {
        if e < self.edges.len() {
            Ok(())
        } else {
            Err(HypergraphError::EdgeIndexOutOfRange {
                index: e,
                edge_count: self.edges.len(),
            })
        }
    }

    /// `N(e)`: indices of the other edges sharing at least one vertex with `e`.
    pub fn neighborhood(&self, e: usize) -> Result<&[usize], HypergraphError> {
        self.check_edge_index(e)?;
        Ok(&self.neighbors[e])
    }

    /// Unchecked neighborhood accessor for internal hot paths.
    pub(crate) fn nbrs(&self, e: usize) -> &[usize] {
        &self.neighbors[e]
    }

    /// `N_k(e)`: the neighbors of `e` of size exactly `k`.
    pub fn neighborhood_k(&self, e: usize, k: usize) -> Result<Vec<usize>, HypergraphError> {
        self.check_edge_index(e)?;
        Ok(self.neighbors[e]
            .iter()
            .copied()
            .filter(|&f| self.edges[f].len() == k)
            .collect())
    }

    pub fn edges_intersect(&self, e: usize, f: usize) -> Result<bool, HypergraphError> {
        self.check_edge_index(e)?;
        self.check_edge_index(f)?;
        if e == f {
            return Ok(true);
        }
        Ok(self.neighbors[e].binary_search(&f).is_ok())
    }

    /// True iff the given edge indices are pairwise disjoint.
    pub fn is_matching(&self, edges: &BTreeSet<usize>) -> Result<bool, HypergraphError> {
        let mut used = vec![false; self.vertex_count];
        for &e in edges {
            self.check_edge_index(e)?;
            for &v in &self.edges[e] {
                if used[v] {
                    return Ok(false);
                }
                used[v] = true;
            }
        }
        Ok(true)
    }

    /// True iff `x` satisfies `0 ≤ x(e) ≤ 1` and `Σ_{e ∋ v} x(e) ≤ 1` at every
    /// vertex.  A vector of the wrong length is not a fractional matching.
    pub fn is_fractional_matching(&self, x: &[Rat]) -> bool {
        if x.len() != self.edges.len() {
            return false;
        }
        let one = Rat::one();
        if x.iter().any(|v| v.is_negative() || *v > one) {
            return false;
        }
        self.vertex_sums_within_one(x)
    }

    fn vertex_sums_within_one(&self, x: &[Rat]) -> bool {
        let one = Rat::one();
        self.incident.iter().all(|edges_at_v| {
            let mut sum = Rat::zero();
            for &e in edges_at_v {
                if !x[e].is_zero() {
                    sum += &x[e];
                }
            }
            sum <= one
        })
    }

    /// Vertices whose constraint is met with equality: `Σ_{e ∋ v} x(e) = 1`.
    pub fn tight_vertices(&self, x: &[Rat]) -> Result<Vec<usize>, HypergraphError> {
        if x.len() != self.edges.len() {
            return Err(HypergraphError::ValueCountMismatch {
                values: x.len(),
                edges: self.edges.len(),
            });
        }
        let one = Rat::one();
        Ok((0..self.vertex_count)
            .filter(|&v| {
                let mut sum = Rat::zero();
                for &e in &self.incident[v] {
                    sum += &x[e];
                }
                sum == one
            })
            .collect())
    }

    /// True iff `x` is a fractional matching with every value strictly inside
    /// `(0, 1)`.
    pub fn is_reduced(&self, x: &[Rat]) -> bool {
        let one = Rat::one();
        self.is_fractional_matching(x) && x.iter().all(|v| v.is_positive() && *v < one)
    }

    /// The sub-hypergraph on the same vertex set keeping only the given edges
    /// (indices must be strictly increasing).  Edge `i` of the result is
    /// `keep[i]` of `self`.
    pub fn subgraph(&self, keep: &[usize]) -> Result<Hypergraph, HypergraphError> {
        debug_assert!(keep.windows(2).all(|w| w[0] < w[1]));
        let mut edges = Vec::with_capacity(keep.len());
        for &e in keep {
            self.check_edge_index(e)?;
            edges.push(self.edges[e].clone());
        }
        Hypergraph::build(self.vertex_count, edges)
    }
}

/// A set of pairwise disjoint edges, validated at construction.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    edges: BTreeSet<usize>,
}

impl Matching {
    pub fn new(
        h: &Hypergraph,
        edges: impl IntoIterator<Item = usize>,
    ) -> Result<Self, HypergraphError> {
        let edges: BTreeSet<usize> = edges.into_iter().collect();
        let mut owner = vec![usize::MAX; h.vertex_count()];
        for &e in &edges {
            h.check_edge_index(e)?;
            for &v in h.edge(e) {
                if owner[v] != usize::MAX {
                    return Err(HypergraphError::OverlappingEdges {
                        first: owner[v],
                        second: e,
                    });
                }
                owner[v] = e;
            }
        }
        Ok(Self { edges })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn edge_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().copied()
    }

    pub fn contains(&self, e: usize) -> bool {
        self.edges.contains(&e)
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    /// The 0/1 indicator vector of the matching, which is always a valid
    /// fractional matching.
    pub fn indicator(&self, h: &Hypergraph) -> Vec<Rat> {
        let mut x = vec![Rat::zero(); h.edge_count()];
        for &e in &self.edges {
            x[e] = Rat::one();
        }
        x
    }
}

/// A hypergraph together with a non-negative rational weight per edge.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedInstance {
    hypergraph: Hypergraph,
    weights: Vec<Rat>,
}

impl WeightedInstance {
    /// Input weights must be non-negative; intermediate peeled weights inside
    /// the rounding loop may go negative, but they never form an instance.
    pub fn new(hypergraph: Hypergraph, weights: Vec<Rat>) -> Result<Self, HypergraphError> {
        if weights.len() != hypergraph.edge_count() {
            return Err(HypergraphError::WeightCountMismatch {
                weights: weights.len(),
                edges: hypergraph.edge_count(),
            });
        }
        if let Some(e) = weights.iter().position(|w| w.is_negative()) {
            return Err(HypergraphError::NegativeWeight { edge: e });
        }
        Ok(Self {
            hypergraph,
            weights,
        })
    }

    /// All weights 1.
    pub fn unit(hypergraph: Hypergraph) -> Self {
        let weights = vec![Rat::one(); hypergraph.edge_count()];
        Self {
            hypergraph,
            weights,
        }
    }

    pub fn hypergraph(&self) -> &Hypergraph {
        &self.hypergraph
    }

    pub fn weights(&self) -> &[Rat] {
        &self.weights
    }

    pub fn weight(&self, e: usize) -> &Rat {
        &self.weights[e]
    }

    pub fn matching_weight(&self, m: &Matching) -> Rat {
        m.edge_indices().map(|e| self.weights[e].clone()).sum()
    }
}
