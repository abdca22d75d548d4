//! Coarsest-level partitioning and integer export.

use std::collections::BinaryHeap;

use rand::Rng as _;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::partition::Partition;
use crate::refine::{fm_refine, rebalance, DEFAULT_MAX_STALL};
use crate::rng::{derive_seed, rng, Rng};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoarsestPolicy {
    /// Coarsening stops once `n <= max(stop_threshold * k, 60)`.
    pub stop_threshold: usize,
    /// Number of seeded growing trials on the coarsest graph.
    pub attempts: usize,
}

impl Default for CoarsestPolicy {
    fn default() -> Self {
        CoarsestPolicy {
            stop_threshold: 30,
            attempts: 8,
        }
    }
}

impl CoarsestPolicy {
    pub fn stop_size(&self, k: usize) -> usize {
        (self.stop_threshold * k).max(60)
    }
}

/// Randomized rounding of `w >= 0`: `ceil(w)` with probability `w - floor(w)`,
/// otherwise `floor(w)`.
pub fn round_weight(w: f64, rng: &mut Rng) -> f64 {
    let floor = w.floor();
    let frac = w - floor;
    if frac > 0.0 && rng.gen::<f64>() < frac {
        floor + 1.0
    } else {
        floor
    }
}

/// Divides all edge weights by the smallest one, then rounds each randomly to
/// an integer. Every output weight is at least 1. Node weights are kept.
pub fn normalize_and_round(g: &Graph, seed: u64) -> Graph {
    let Some(min) = g.edge_weights().iter().copied().reduce(f64::min) else {
        return g.clone();
    };
    let mut rng = rng(seed);
    let weights = g
        .edge_weights()
        .iter()
        .map(|&w| {
            let x = w / min;
            // values that are integral up to division noise stay put
            let nearest = x.round();
            if (x - nearest).abs() <= 1e-9 * x {
                nearest
            } else {
                round_weight(x, &mut rng)
            }
            .max(1.0)
        })
        .collect();
    g.with_edge_weights(weights)
}

#[derive(PartialEq)]
struct Candidate {
    priority: f64,
    tie: u64,
    node: usize,
}

impl Eq for Candidate {}

impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.priority
            .total_cmp(&other.priority)
            .then(self.tie.cmp(&other.tie))
    }
}

/// Grows blocks `0..k-1` one after another from random seeds, always adding
/// the unassigned node with the largest `2 conn(block) - Out(v)`; the last
/// block takes what is left.
fn grow(g: &Graph, k: usize, l_max: f64, rng: &mut Rng) -> Vec<usize> {
    const NONE: usize = usize::MAX;
    let n = g.n();
    let target = g.total_node_weight() / k as f64;
    let out: Vec<f64> = (0..n).map(|v| g.weighted_degree(v)).collect();
    let mut assignment = vec![NONE; n];
    let mut unassigned: Vec<usize> = (0..n).collect();
    let mut conn = vec![0.0; n];
    let mut touched = Vec::new();
    let mut remaining = n;

    for b in 0..k - 1 {
        let mut heap = BinaryHeap::new();
        let mut weight = 0.0;
        let reserve = k - 1 - b;
        while weight < target && remaining > reserve {
            let next = loop {
                match heap.pop() {
                    Some(Candidate { priority, node, .. }) => {
                        if assignment[node] != NONE || priority != 2.0 * conn[node] - out[node] {
                            continue;
                        }
                        if weight > 0.0 && weight + g.node_weight(node) > l_max {
                            continue;
                        }
                        break Some(node);
                    }
                    None => {
                        // disconnected remainder or exhausted frontier
                        unassigned.retain(|&v| assignment[v] == NONE);
                        if unassigned.is_empty() {
                            break None;
                        }
                        let v = unassigned[rng.gen_range(0..unassigned.len())];
                        if weight > 0.0 && weight + g.node_weight(v) > l_max {
                            break None;
                        }
                        break Some(v);
                    }
                }
            };
            let Some(v) = next else { break };
            assignment[v] = b;
            weight += g.node_weight(v);
            remaining -= 1;
            for (u, _, w) in g.adjacent(v) {
                if assignment[u] == NONE {
                    if conn[u] == 0.0 {
                        touched.push(u);
                    }
                    conn[u] += w;
                    heap.push(Candidate {
                        priority: 2.0 * conn[u] - out[u],
                        tie: rng.gen(),
                        node: u,
                    });
                }
            }
        }
        for &u in &touched {
            conn[u] = 0.0;
        }
        touched.clear();
    }
    for a in assignment.iter_mut() {
        if *a == NONE {
            *a = k - 1;
        }
    }
    assignment
}

/// Best of `attempts` grow + rebalance + FM trials, by (balanced, cut).
/// The result may be unbalanced when no trial achieved balance.
pub fn initial_partition(
    g: &Graph,
    k: usize,
    epsilon: f64,
    l_max: f64,
    attempts: usize,
    seed: u64,
) -> Result<Partition> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if k > g.n() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} nodes into {k} nonempty blocks",
            g.n()
        )));
    }
    if k == 1 {
        return Partition::with_l_max(g, 1, epsilon, l_max, vec![0; g.n()]);
    }
    let mut best: Option<Partition> = None;
    for attempt in 0..attempts.max(1) as u64 {
        let mut rng = rng(derive_seed(seed, 1, attempt));
        let assignment = grow(g, k, l_max, &mut rng);
        let p = Partition::with_l_max(g, k, epsilon, l_max, assignment)?;
        let p = rebalance(g, &p);
        let p = fm_refine(g, &p, DEFAULT_MAX_STALL, derive_seed(seed, 2, attempt));
        let better = match &best {
            None => true,
            Some(b) => (!p.is_balanced(), p.cut()) < (!b.is_balanced(), b.cut()),
        };
        if better {
            best = Some(p);
        }
    }
    Ok(best.expect("at least one attempt"))
}
