//! Weighted undirected graph in compressed adjacency form.
//!
//! Every undirected edge `{u, v}` has a stable id; ids follow the
//! lexicographic order of `(min(u, v), max(u, v))`. Per-edge data such as
//! ratings or algebraic distances are plain `Vec<f64>` indexed by that id.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    xadj: Vec<usize>,
    adjncy: Vec<usize>,
    adj_edge: Vec<usize>,
    endpoints: Vec<(usize, usize)>,
    edge_weight: Vec<f64>,
    node_weight: Vec<f64>,
}

impl Graph {
    /// Builds a graph from an undirected edge list.
    ///
    /// Rejects self-loops, parallel edges, non-positive edge weights and
    /// negative node weights.
    pub fn from_edges(node_weight: Vec<f64>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let n = node_weight.len();
        for (v, &c) in node_weight.iter().enumerate() {
            if !(c.is_finite() && c >= 0.0) {
                return Err(Error::InvalidGraph(format!("node {v} has weight {c}")));
            }
        }
        let mut list = Vec::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {n} nodes"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at node {u}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) has non-positive weight {w}"
                )));
            }
            list.push((u.min(v), u.max(v), w));
        }
        list.sort_by_key(|a| (a.0, a.1));
        if let Some(w) = list.windows(2).find(|w| (w[0].0, w[0].1) == (w[1].0, w[1].1)) {
            return Err(Error::InvalidGraph(format!(
                "parallel edge ({}, {})",
                w[0].0, w[0].1
            )));
        }
        Ok(Self::from_sorted(node_weight, list))
    }

    /// Unit node and edge weights.
    pub fn unweighted(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let list: Vec<_> = edges.iter().map(|&(u, v)| (u, v, 1.0)).collect();
        Self::from_edges(vec![1.0; n], &list)
    }

    /// Builds a graph, summing parallel edges and dropping self-loops.
    /// Used by contraction, where both arise naturally.
    pub(crate) fn from_merged(node_weight: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Self {
        Self::from_merged_above(node_weight, edges, 0.0)
    }

    /// As [`Graph::from_merged`], also dropping merged edges lighter than
    /// `min_weight`.
    pub(crate) fn from_merged_above(
        node_weight: Vec<f64>,
        mut edges: Vec<(usize, usize, f64)>,
        min_weight: f64,
    ) -> Self {
        edges.retain(|e| e.0 != e.1);
        for e in edges.iter_mut() {
            if e.0 > e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
        }
        // stable: equal keys keep insertion order, so sums are reproducible
        edges.sort_by_key(|a| (a.0, a.1));
        let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(edges.len());
        for (u, v, w) in edges {
            match merged.last_mut() {
                Some(last) if last.0 == u && last.1 == v => last.2 += w,
                _ => merged.push((u, v, w)),
            }
        }
        merged.retain(|e| e.2 > 0.0 && e.2 >= min_weight);
        Self::from_sorted(node_weight, merged)
    }

    fn from_sorted(node_weight: Vec<f64>, edges: Vec<(usize, usize, f64)>) -> Self {
        let n = node_weight.len();
        let mut degree = vec![0usize; n];
        for &(u, v, _) in &edges {
            degree[u] += 1;
            degree[v] += 1;
        }
        let mut xadj = Vec::with_capacity(n + 1);
        xadj.push(0);
        for d in &degree {
            xadj.push(xadj.last().unwrap() + d);
        }
        let total = *xadj.last().unwrap();
        let mut adjncy = vec![0; total];
        let mut adj_edge = vec![0; total];
        let mut fill = xadj[..n].to_vec();
        let mut endpoints = Vec::with_capacity(edges.len());
        let mut edge_weight = Vec::with_capacity(edges.len());
        // edges are sorted by (u, v), so every adjacency list comes out sorted
        for (e, &(u, v, w)) in edges.iter().enumerate() {
            adjncy[fill[u]] = v;
            adj_edge[fill[u]] = e;
            fill[u] += 1;
            adjncy[fill[v]] = u;
            adj_edge[fill[v]] = e;
            fill[v] += 1;
            endpoints.push((u, v));
            edge_weight.push(w);
        }
        Graph {
            xadj,
            adjncy,
            adj_edge,
            endpoints,
            edge_weight,
            node_weight,
        }
    }

    pub fn n(&self) -> usize {
        self.node_weight.len()
    }

    pub fn m(&self) -> usize {
        self.endpoints.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.xadj[v + 1] - self.xadj[v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjncy[self.xadj[v]..self.xadj[v + 1]]
    }

    /// Edge ids incident to `v`, aligned with [`Graph::neighbors`].
    pub fn incident_edges(&self, v: usize) -> &[usize] {
        &self.adj_edge[self.xadj[v]..self.xadj[v + 1]]
    }

    /// `(neighbor, edge id, weight)` triples around `v`.
    pub fn adjacent(&self, v: usize) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.neighbors(v)
            .iter()
            .zip(self.incident_edges(v))
            .map(move |(&u, &e)| (u, e, self.edge_weight[e]))
    }

    /// Endpoints `(u, v)` with `u < v`.
    pub fn endpoints(&self, e: usize) -> (usize, usize) {
        self.endpoints[e]
    }

    pub fn edge_weight(&self, e: usize) -> f64 {
        self.edge_weight[e]
    }

    pub fn edge_weights(&self) -> &[f64] {
        &self.edge_weight
    }

    pub fn node_weight(&self, v: usize) -> f64 {
        self.node_weight[v]
    }

    pub fn node_weights(&self) -> &[f64] {
        &self.node_weight
    }

    pub fn total_node_weight(&self) -> f64 {
        self.node_weight.iter().sum()
    }

    pub fn max_node_weight(&self) -> f64 {
        self.node_weight.iter().copied().fold(0.0, f64::max)
    }

    /// Iterates `(u, v, weight)` over undirected edges in id order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        self.endpoints
            .iter()
            .zip(&self.edge_weight)
            .map(|(&(u, v), &w)| (u, v, w))
    }

    /// Id of edge `{u, v}`, if present.
    pub fn find_edge(&self, u: usize, v: usize) -> Option<usize> {
        let nb = self.neighbors(u);
        nb.binary_search(&v).ok().map(|i| self.incident_edges(u)[i])
    }

    /// Weighted degree `Out(v)`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.incident_edges(v).iter().map(|&e| self.edge_weight[e]).sum()
    }

    pub fn with_edge_weights(&self, weights: Vec<f64>) -> Graph {
        assert_eq!(weights.len(), self.m());
        Graph {
            edge_weight: weights,
            ..self.clone()
        }
    }

    /// Number of connected components.
    pub fn component_count(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut stack = Vec::new();
        let mut count = 0;
        for s in 0..n {
            if seen[s] {
                continue;
            }
            count += 1;
            seen[s] = true;
            stack.push(s);
            while let Some(v) = stack.pop() {
                for &u in self.neighbors(v) {
                    if !seen[u] {
                        seen[u] = true;
                        stack.push(u);
                    }
                }
            }
        }
        count
    }
}
