//! Block assignments, the balance bound and the edge-cut objective.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Relative slack used when comparing floating block weights against `L_max`.
const BALANCE_SLACK: f64 = 1e-9;

/// Upper bound on block weight: `(1 + epsilon) * total / k + max_node_weight`.
pub fn compute_l_max(total_weight: f64, k: usize, epsilon: f64, max_node_weight: f64) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if epsilon < 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidArgument(format!("epsilon must be >= 0, got {epsilon}")));
    }
    Ok((1.0 + epsilon) * total_weight / k as f64 + max_node_weight)
}

/// Whether a block of weight `weight` respects `l_max`, up to rounding.
pub fn fits(weight: f64, l_max: f64) -> bool {
    weight <= l_max + BALANCE_SLACK * l_max.abs().max(1.0)
}

/// Total weight of edges whose endpoints lie in different blocks.
pub fn cut(g: &Graph, assignment: &[usize]) -> f64 {
    g.edges()
        .filter(|&(u, v, _)| assignment[u] != assignment[v])
        .map(|(_, _, w)| w)
        .sum()
}

/// Nodes with at least one neighbor in another block, ascending.
pub fn boundary_nodes(g: &Graph, assignment: &[usize]) -> Vec<usize> {
    (0..g.n())
        .filter(|&v| g.neighbors(v).iter().any(|&u| assignment[u] != assignment[v]))
        .collect()
}

pub fn block_weights(g: &Graph, assignment: &[usize], k: usize) -> Vec<f64> {
    let mut w = vec![0.0; k];
    for (v, &b) in assignment.iter().enumerate() {
        w[b] += g.node_weight(v);
    }
    w
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    k: usize,
    assignment: Vec<usize>,
    block_weight: Vec<f64>,
    epsilon: f64,
    l_max: f64,
    cut: f64,
}

impl Partition {
    /// Partition with `L_max` derived from `g` itself.
    pub fn new(g: &Graph, k: usize, epsilon: f64, assignment: Vec<usize>) -> Result<Self> {
        let l_max = compute_l_max(g.total_node_weight(), k, epsilon, g.max_node_weight())?;
        Self::with_l_max(g, k, epsilon, l_max, assignment)
    }

    /// Partition with an externally fixed `L_max` (coarse levels inherit the
    /// bound of the input graph).
    pub fn with_l_max(
        g: &Graph,
        k: usize,
        epsilon: f64,
        l_max: f64,
        assignment: Vec<usize>,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        if assignment.len() != g.n() {
            return Err(Error::InvalidArgument(format!(
                "assignment covers {} nodes, graph has {}",
                assignment.len(),
                g.n()
            )));
        }
        if let Some((v, &b)) = assignment.iter().enumerate().find(|(_, &b)| b >= k) {
            return Err(Error::InvalidArgument(format!(
                "node {v} assigned to block {b}, but k = {k}"
            )));
        }
        let block_weight = block_weights(g, &assignment, k);
        let cut = cut(g, &assignment);
        Ok(Partition {
            k,
            assignment,
            block_weight,
            epsilon,
            l_max,
            cut,
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn into_assignment(self) -> Vec<usize> {
        self.assignment
    }

    pub fn block(&self, v: usize) -> usize {
        self.assignment[v]
    }

    pub fn block_weights(&self) -> &[f64] {
        &self.block_weight
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn l_max(&self) -> f64 {
        self.l_max
    }

    pub fn cut(&self) -> f64 {
        self.cut
    }

    /// Sum of block weight in excess of `L_max`.
    pub fn overload(&self) -> f64 {
        overload(&self.block_weight, self.l_max)
    }

    pub fn is_balanced(&self) -> bool {
        self.block_weight.iter().all(|&w| fits(w, self.l_max))
    }

    /// Same assignment rebuilt against another graph (after projection).
    pub fn rebuild(&self, g: &Graph, assignment: Vec<usize>) -> Result<Self> {
        Self::with_l_max(g, self.k, self.epsilon, self.l_max, assignment)
    }
}

pub(crate) fn overload(block_weight: &[f64], l_max: f64) -> f64 {
    block_weight
        .iter()
        .filter(|&&w| !fits(w, l_max))
        .map(|&w| w - l_max)
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triangle() -> Graph {
        Graph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap()
    }

    #[test]
    fn l_max_formula() {
        assert!((compute_l_max(100.0, 4, 0.03, 1.0).unwrap() - 26.75).abs() < 1e-12);
        assert_eq!(compute_l_max(100.0, 1, 0.0, 3.0).unwrap(), 103.0);
        assert!(matches!(compute_l_max(100.0, 0, 0.03, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn cut_examples() {
        let g = triangle();
        assert_eq!(cut(&g, &[0, 1, 1]), 2.0);
        assert_eq!(cut(&g, &[0, 0, 0]), 0.0);
        let c4 = Graph::unweighted(4, &[(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        assert_eq!(cut(&c4, &[0, 1, 0, 1]), 4.0);
    }

    #[test]
    fn boundary_examples() {
        assert_eq!(boundary_nodes(&triangle(), &[0, 1, 1]), vec![0, 1, 2]);
        assert!(boundary_nodes(&triangle(), &[0, 0, 0]).is_empty());
        let path = Graph::unweighted(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        assert_eq!(boundary_nodes(&path, &[0, 0, 1, 1]), vec![1, 2]);
    }

    #[test]
    fn partition_bookkeeping() {
        let g = triangle();
        let p = Partition::new(&g, 2, 0.0, vec![0, 1, 1]).unwrap();
        assert_eq!(p.block_weights(), &[1.0, 2.0]);
        assert_eq!(p.cut(), 2.0);
        assert_eq!(p.l_max(), 2.5);
        assert!(p.is_balanced());
        assert!(Partition::new(&g, 2, 0.0, vec![0, 2, 1]).is_err());
    }
}
