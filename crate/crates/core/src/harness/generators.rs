//! Synthetic graph families with unit weights.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::graph::Graph;
use crate::rng::rng;

/// `rows x cols` 4-neighbor grid; node `(r, c)` has id `r * cols + c`.
pub fn grid2d(rows: usize, cols: usize) -> Graph {
    let mut edges = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                edges.push((v, v + 1));
            }
            if r + 1 < rows {
                edges.push((v, v + cols));
            }
        }
    }
    Graph::unweighted(rows * cols, &edges).expect("grid edges are simple")
}

/// Two `size`-cliques joined by the single edge `(size - 1, size)`.
pub fn two_cliques(size: usize) -> Graph {
    let mut edges = Vec::new();
    for offset in [0, size] {
        for u in 0..size {
            for v in u + 1..size {
                edges.push((offset + u, offset + v));
            }
        }
    }
    if size > 0 {
        edges.push((size - 1, size));
    }
    Graph::unweighted(2 * size, &edges).expect("clique edges are simple")
}

/// Barabási–Albert style growth: starts from a clique on `attach + 1` nodes,
/// then every new node links to `attach` distinct existing nodes chosen with
/// probability proportional to degree. Has
/// `attach (attach + 1) / 2 + (n - attach - 1) attach` edges.
pub fn preferential_attachment(n: usize, attach: usize, seed: u64) -> Graph {
    assert!(attach >= 1 && n > attach, "need n > attach >= 1");
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    // every edge endpoint once: sampling from it is degree-proportional
    let mut ends = Vec::new();
    for u in 0..=attach {
        for v in u + 1..=attach {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    let mut chosen = Vec::with_capacity(attach);
    for v in attach + 1..n {
        chosen.clear();
        while chosen.len() < attach {
            let u = ends[rng.gen_range(0..ends.len())];
            if !chosen.contains(&u) {
                chosen.push(u);
            }
        }
        for &u in &chosen {
            edges.push((u, v));
            ends.extend([u, v]);
        }
    }
    Graph::unweighted(n, &edges).expect("attachment edges are simple")
}

/// Erdős–Rényi `G(n, p)`.
pub fn random_graph(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::unweighted(n, &edges).expect("random edges are simple")
}

/// Random spanning tree plus `extra` further random edges (fewer if the
/// graph becomes complete). Always connected.
pub fn random_connected(n: usize, extra: usize, seed: u64) -> Graph {
    let mut rng = rng(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut present = std::collections::HashSet::new();
    let mut edges = Vec::new();
    for i in 1..n {
        let u = order[rng.gen_range(0..i)];
        let v = order[i];
        present.insert((u.min(v), u.max(v)));
        edges.push((u, v));
    }
    let max_edges = n * n.saturating_sub(1) / 2;
    let target = (edges.len() + extra).min(max_edges);
    while edges.len() < target {
        let u = rng.gen_range(0..n);
        let v = rng.gen_range(0..n);
        if u != v && present.insert((u.min(v), u.max(v))) {
            edges.push((u, v));
        }
    }
    Graph::unweighted(n, &edges).expect("random edges are simple")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_counts() {
        let g = grid2d(32, 32);
        assert_eq!((g.n(), g.m()), (1024, 2 * 32 * 31));
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn cliques_counts() {
        let g = two_cliques(3);
        assert_eq!((g.n(), g.m()), (6, 7));
        assert!(g.find_edge(2, 3).is_some());
    }

    #[test]
    fn attachment_counts() {
        let g = preferential_attachment(1000, 2, 7);
        assert_eq!(g.m(), 3 + 997 * 2);
        assert_eq!(g.component_count(), 1);
        assert_eq!(g, preferential_attachment(1000, 2, 7));
    }

    #[test]
    fn random_connected_is_connected() {
        for seed in 0..10 {
            let g = random_connected(12, 6, seed);
            assert_eq!(g.component_count(), 1);
            assert_eq!(g.m(), 17);
        }
    }
}
