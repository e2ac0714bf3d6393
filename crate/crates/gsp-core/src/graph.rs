//! Weighted graphs and their degree bookkeeping.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{GspError, Result};

static NEXT_GRAPH_ID: AtomicU64 = AtomicU64::new(1);

/// A weighted graph, optionally directed, stored as a dense adjacency matrix.
///
/// Node ids are the indices 0..N-1. For undirected graphs the adjacency is
/// kept symmetric, so each stored edge contributes both A[i,j] and A[j,i].
#[derive(Debug, Clone)]
pub struct Graph {
    adj: Array2<f64>,
    directed: bool,
    id: u64,
}

/// Out- and in-strengths (weighted degrees) of every node.
#[derive(Debug, Clone)]
pub struct DegreeVector {
    /// d_out[i] = sum_j A[i,j]
    pub out_strengths: Array1<f64>,
    /// d_in[i] = sum_j A[j,i]
    pub in_strengths: Array1<f64>,
}

impl Graph {
    /// Build a graph from an edge list, inferring N as the largest node id + 1.
    ///
    /// Duplicate (src, dst) pairs sum their weights. Undirected input is
    /// symmetrized. Self-loops and negative weights are rejected.
    pub fn build(edges: &[(usize, usize, f64)], directed: bool) -> Result<Graph> {
        Self::build_opts(None, edges, directed, false)
    }

    /// Build a graph with an explicit node count, allowing isolated nodes
    /// beyond the ids mentioned in the edge list.
    pub fn build_with_n(n: usize, edges: &[(usize, usize, f64)], directed: bool) -> Result<Graph> {
        Self::build_opts(Some(n), edges, directed, false)
    }

    /// Full-control builder: explicit size and self-loop policy.
    pub fn build_opts(
        n: Option<usize>,
        edges: &[(usize, usize, f64)],
        directed: bool,
        allow_self_loops: bool,
    ) -> Result<Graph> {
        // Deduplicate first so validation sees the summed weights.
        let mut acc: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        let mut max_id = 0usize;
        for &(src, dst, w) in edges {
            if !w.is_finite() || w < 0.0 {
                return Err(GspError::InvalidWeight { src, dst, weight: w });
            }
            if src == dst && !allow_self_loops {
                return Err(GspError::SelfLoop { node: src });
            }
            max_id = max_id.max(src).max(dst);
            *acc.entry((src, dst)).or_insert(0.0) += w;
        }
        let n = match n {
            Some(n) => {
                if !edges.is_empty() && max_id >= n {
                    return Err(GspError::DimensionMismatch { expected: n, got: max_id + 1 });
                }
                n
            }
            None => {
                if edges.is_empty() {
                    return Err(GspError::EmptyGraph);
                }
                max_id + 1
            }
        };
        if n == 0 {
            return Err(GspError::EmptyGraph);
        }

        // For undirected graphs each stored orientation feeds both slots, so
        // a list mentioning (i,j) and (j,i) still sums to one shared weight.
        let mut adj = Array2::<f64>::zeros((n, n));
        for (&(src, dst), &w) in &acc {
            adj[(src, dst)] += w;
            if !directed && src != dst {
                adj[(dst, src)] += w;
            }
        }

        Ok(Graph {
            adj,
            directed,
            id: NEXT_GRAPH_ID.fetch_add(1, Ordering::Relaxed),
        })
    }

    /// Build directly from an adjacency matrix; validates sign, finiteness,
    /// the self-loop policy and (for undirected graphs) symmetry.
    pub fn from_adjacency(adj: Array2<f64>, directed: bool) -> Result<Graph> {
        let n = adj.nrows();
        if n == 0 {
            return Err(GspError::EmptyGraph);
        }
        if adj.ncols() != n {
            return Err(GspError::DimensionMismatch { expected: n, got: adj.ncols() });
        }
        for ((i, j), &w) in adj.indexed_iter() {
            if !w.is_finite() || w < 0.0 {
                return Err(GspError::InvalidWeight { src: i, dst: j, weight: w });
            }
            if i == j && w != 0.0 {
                return Err(GspError::SelfLoop { node: i });
            }
            if !directed && adj[(j, i)] != w {
                return Err(GspError::Unsupported(format!(
                    "undirected graph with asymmetric adjacency at ({i}, {j})"
                )));
            }
        }
        Ok(Graph { adj, directed, id: NEXT_GRAPH_ID.fetch_add(1, Ordering::Relaxed) })
    }

    pub fn n(&self) -> usize {
        self.adj.nrows()
    }

    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Provenance handle: unique per constructed graph within a process.
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn adjacency(&self) -> ArrayView2<'_, f64> {
        self.adj.view()
    }

    /// Out- and in-strengths of every node.
    pub fn strengths(&self) -> DegreeVector {
        let out_strengths = self.adj.sum_axis(ndarray::Axis(1));
        let in_strengths = self.adj.sum_axis(ndarray::Axis(0));
        DegreeVector { out_strengths, in_strengths }
    }

    /// vol(G) = sum of out-strengths.
    pub fn volume(&self) -> f64 {
        self.adj.sum()
    }

    /// Edges with positive weight, one per stored direction. For undirected
    /// graphs only the i < j orientation is yielded.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if self.adj[(i, j)] > 0.0 && (self.directed || i < j) {
                    out.push((i, j, self.adj[(i, j)]));
                }
            }
        }
        out
    }

    /// Connectivity of the underlying undirected support (edges in either
    /// direction count).
    pub fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if !seen[j] && (self.adj[(i, j)] > 0.0 || self.adj[(j, i)] > 0.0) {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }

    /// Strong connectivity: every node reachable from node 0 along forward
    /// edges and along reversed edges.
    pub fn is_strongly_connected(&self) -> bool {
        self.reaches_all(false) && self.reaches_all(true)
    }

    fn reaches_all(&self, reversed: bool) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                let w = if reversed { self.adj[(j, i)] } else { self.adj[(i, j)] };
                if !seen[j] && w > 0.0 {
                    seen[j] = true;
                    count += 1;
                    stack.push(j);
                }
            }
        }
        count == n
    }
}
