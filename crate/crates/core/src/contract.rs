//! Matching contraction.

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Fine/coarse correspondence produced by contracting a matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchingMap {
    fine_to_coarse: Vec<usize>,
    coarse_to_fine: Vec<(usize, Option<usize>)>,
}

impl MatchingMap {
    pub fn coarse_of(&self, fine: usize) -> usize {
        self.fine_to_coarse[fine]
    }

    pub fn fine_to_coarse(&self) -> &[usize] {
        &self.fine_to_coarse
    }

    /// One or two fine nodes merged into `coarse`.
    pub fn fine_of(&self, coarse: usize) -> (usize, Option<usize>) {
        self.coarse_to_fine[coarse]
    }

    pub fn fine_len(&self) -> usize {
        self.fine_to_coarse.len()
    }

    pub fn coarse_len(&self) -> usize {
        self.coarse_to_fine.len()
    }
}

/// Checks that no two matching edges share an endpoint and every pair is an
/// edge of `g`.
pub fn validate_matching(g: &Graph, matching: &[(usize, usize)]) -> Result<()> {
    let mut used = vec![false; g.n()];
    for &(u, v) in matching {
        if u >= g.n() || v >= g.n() || g.find_edge(u, v).is_none() {
            return Err(Error::InvalidMatching(format!("({u}, {v}) is not an edge")));
        }
        for x in [u, v] {
            if used[x] {
                return Err(Error::InvalidMatching(format!("node {x} matched twice")));
            }
            used[x] = true;
        }
    }
    Ok(())
}

/// Contracts every matched pair into one coarse node.
///
/// Coarse ids follow the smallest fine id of each group. Node weights add,
/// parallel edges merge by weight addition, edges inside a pair vanish.
pub fn contract_matching(g: &Graph, matching: &[(usize, usize)]) -> Result<(Graph, MatchingMap)> {
    validate_matching(g, matching)?;
    let n = g.n();
    let mut mate: Vec<Option<usize>> = vec![None; n];
    for &(u, v) in matching {
        mate[u] = Some(v);
        mate[v] = Some(u);
    }
    let mut fine_to_coarse = vec![usize::MAX; n];
    let mut coarse_to_fine = Vec::with_capacity(n - matching.len());
    for v in 0..n {
        if fine_to_coarse[v] != usize::MAX {
            continue;
        }
        let c = coarse_to_fine.len();
        fine_to_coarse[v] = c;
        if let Some(u) = mate[v] {
            fine_to_coarse[u] = c;
        }
        coarse_to_fine.push((v, mate[v]));
    }
    let node_weight = coarse_to_fine
        .iter()
        .map(|&(a, b)| g.node_weight(a) + b.map_or(0.0, |b| g.node_weight(b)))
        .collect();
    let edges = g
        .edges()
        .map(|(u, v, w)| (fine_to_coarse[u], fine_to_coarse[v], w))
        .collect();
    let coarse = Graph::from_merged(node_weight, edges);
    Ok((
        coarse,
        MatchingMap {
            fine_to_coarse,
            coarse_to_fine,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn path_contraction() {
        let g = Graph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        let (c, map) = contract_matching(&g, &[(0, 1)]).unwrap();
        assert_eq!(c.n(), 2);
        assert_eq!(c.node_weights(), &[2.0, 1.0]);
        assert_eq!(c.m(), 1);
        assert_eq!(c.edge_weight(0), 1.0);
        assert_eq!(map.fine_of(0), (0, Some(1)));
        assert_eq!(map.fine_of(1), (2, None));
    }

    #[test]
    fn triangle_merges_parallel_edges() {
        let g = Graph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let (c, _) = contract_matching(&g, &[(0, 1)]).unwrap();
        assert_eq!(c.m(), 1);
        assert_eq!(c.edge_weight(0), 2.0);
        assert_eq!(c.total_node_weight(), 3.0);
    }

    #[test]
    fn rejects_overlapping_edges() {
        let g = Graph::unweighted(3, &[(0, 1), (1, 2)]).unwrap();
        assert!(matches!(
            contract_matching(&g, &[(0, 1), (1, 2)]),
            Err(Error::InvalidMatching(_))
        ));
        assert!(contract_matching(&g, &[(0, 2)]).is_err());
    }
}
