//! AMG-style weighted aggregation.
//!
//! A level is built in four steps: order nodes by future volume, pick seed
//! (C) nodes by coupling strength `1/rho`, split each remaining (F) node
//! between at most two neighboring aggregates while respecting a volume cap,
//! and assemble the coarse graph through the Galerkin product `P^T W P`.
//!
//! "Algebraically strongest" always means smallest `rho`. Couplings are only
//! defined on edges, so non-adjacent pairs contribute nothing to any sum.

use crate::algdist::AlgebraicDistances;
use crate::graph::Graph;

/// Coarse edges lighter than this are not materialized.
pub const MIN_COARSE_EDGE_WEIGHT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmgParams {
    /// Coupling threshold for leaving a node in F.
    pub theta: f64,
    /// Number of strongest C-connections considered per F-node.
    pub kappa: usize,
    /// Cap on aggregate volume; the driver sets it to the instance's `L_max`.
    pub max_aggregate_volume: f64,
}

impl Default for AmgParams {
    fn default() -> Self {
        AmgParams {
            theta: 0.5,
            kappa: 10,
            max_aggregate_volume: f64::INFINITY,
        }
    }
}

/// Sparse fine-to-coarse interpolation `P`, stored row by row.
#[derive(Clone, Debug, PartialEq)]
pub struct InterpolationOperator {
    row_ptr: Vec<usize>,
    entries: Vec<(usize, f64)>,
    coarse_len: usize,
    volumes: Vec<f64>,
}

impl InterpolationOperator {
    /// Builds `P` from explicit rows; aggregate volumes are `sum_j c(j) P_jp`.
    pub fn from_rows(node_weight: &[f64], rows: &[Vec<(usize, f64)>], coarse_len: usize) -> Self {
        assert_eq!(node_weight.len(), rows.len());
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut entries = Vec::new();
        let mut volumes = vec![0.0; coarse_len];
        for (i, row) in rows.iter().enumerate() {
            for &(p, w) in row {
                assert!(p < coarse_len, "aggregate {p} out of range");
                volumes[p] += node_weight[i] * w;
                entries.push((p, w));
            }
            row_ptr.push(entries.len());
        }
        InterpolationOperator {
            row_ptr,
            entries,
            coarse_len,
            volumes,
        }
    }

    pub fn identity(g: &Graph) -> Self {
        let rows: Vec<Vec<(usize, f64)>> = (0..g.n()).map(|i| vec![(i, 1.0)]).collect();
        Self::from_rows(g.node_weights(), &rows, g.n())
    }

    pub fn fine_len(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn coarse_len(&self) -> usize {
        self.coarse_len
    }

    /// `(aggregate, weight)` entries of row `i`.
    pub fn row(&self, i: usize) -> &[(usize, f64)] {
        &self.entries[self.row_ptr[i]..self.row_ptr[i + 1]]
    }

    /// Interpolation order of fine node `i`.
    pub fn order(&self, i: usize) -> usize {
        self.row_ptr[i + 1] - self.row_ptr[i]
    }

    pub fn volumes(&self) -> &[f64] {
        &self.volumes
    }

    /// Nonzeros per column.
    pub fn column_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.coarse_len];
        for &(p, _) in &self.entries {
            counts[p] += 1;
        }
        counts
    }
}

fn same_block(blocks: Option<&[usize]>, u: usize, v: usize) -> bool {
    blocks.is_none_or(|b| b[u] == b[v])
}

/// `1/rho` on eligible edges, 0 on edges crossing blocks.
fn strengths(g: &Graph, rho: &AlgebraicDistances, blocks: Option<&[usize]>) -> Vec<f64> {
    (0..g.m())
        .map(|e| {
            let (u, v) = g.endpoints(e);
            if same_block(blocks, u, v) {
                rho.strength(e)
            } else {
                0.0
            }
        })
        .collect()
}

fn order_by_future_volume(g: &Graph, strength: &[f64]) -> Vec<usize> {
    let total: Vec<f64> = (0..g.n())
        .map(|j| g.incident_edges(j).iter().map(|&e| strength[e]).sum())
        .collect();
    let nu: Vec<f64> = (0..g.n())
        .map(|i| {
            g.node_weight(i)
                + g.adjacent(i)
                    .filter(|&(_, e, _)| strength[e] > 0.0)
                    .map(|(j, e, _)| g.node_weight(j) * strength[e] / total[j])
                    .sum::<f64>()
        })
        .collect();
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.sort_by(|&a, &b| nu[b].total_cmp(&nu[a]).then(a.cmp(&b)));
    order
}

/// Nodes by descending future volume
/// `c(i) + sum_j c(j) * s_ij / sum_{u in N(j)} s_ju`, ties by id.
pub fn future_volume_order(g: &Graph, rho: &AlgebraicDistances) -> Vec<usize> {
    order_by_future_volume(g, &strengths(g, rho, None))
}

fn seeds_with_strength(g: &Graph, strength: &[f64], order: &[usize], theta: f64) -> Vec<bool> {
    let mut is_c = vec![false; g.n()];
    for &i in order {
        let mut to_c = 0.0;
        let mut all = 0.0;
        for (j, e, _) in g.adjacent(i) {
            all += strength[e];
            if is_c[j] {
                to_c += strength[e];
            }
        }
        // empty neighborhoods fail the test
        if all <= 0.0 || to_c < theta * all {
            is_c[i] = true;
        }
    }
    is_c
}

/// Marks seed nodes. Visiting nodes in `order`, a node stays in F when its
/// strength towards the current C reaches `theta` times its total strength.
pub fn select_seeds(g: &Graph, rho: &AlgebraicDistances, order: &[usize], theta: f64) -> Vec<bool> {
    seeds_with_strength(g, &strengths(g, rho, None), order, theta)
}

fn interpolate(
    g: &Graph,
    rho: &AlgebraicDistances,
    strength: &[f64],
    is_c: &[bool],
    order: &[usize],
    params: &AmgParams,
) -> InterpolationOperator {
    const NONE: usize = usize::MAX;
    let n = g.n();
    let cap = params.max_aggregate_volume;
    let mut aggregate = vec![NONE; n];
    let mut volume = Vec::new();
    for v in (0..n).filter(|&v| is_c[v]) {
        aggregate[v] = volume.len();
        volume.push(g.node_weight(v));
    }
    let mut rows: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|v| {
            if is_c[v] {
                vec![(aggregate[v], 1.0)]
            } else {
                Vec::new()
            }
        })
        .collect();

    let mut candidates: Vec<(f64, usize)> = Vec::new();
    for &i in order {
        if is_c[i] {
            continue;
        }
        let ci = g.node_weight(i);
        candidates.clear();
        candidates.extend(
            g.adjacent(i)
                .filter(|&(j, e, _)| aggregate[j] != NONE && strength[e] > 0.0)
                .map(|(j, e, _)| (rho.floored(e), j)),
        );
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        candidates.truncate(params.kappa);

        // strongest admissible pair by rho sum
        let mut best_pair: Option<(f64, usize, usize, f64)> = None;
        for a in 0..candidates.len() {
            for b in a + 1..candidates.len() {
                let (ra, ja) = candidates[a];
                let (rb, jb) = candidates[b];
                let sum = ra + rb;
                if best_pair.is_some_and(|bp| sum >= bp.0) {
                    continue;
                }
                let wa = 1.0 / (ra * (1.0 / ra + 1.0 / rb));
                let wb = 1.0 - wa;
                if volume[aggregate[ja]] + ci * wa <= cap && volume[aggregate[jb]] + ci * wb <= cap {
                    best_pair = Some((sum, ja, jb, wa));
                }
            }
        }
        if let Some((_, ja, jb, wa)) = best_pair {
            let (pa, pb) = (aggregate[ja], aggregate[jb]);
            volume[pa] += ci * wa;
            volume[pb] += ci * (1.0 - wa);
            rows[i] = vec![(pa, wa), (pb, 1.0 - wa)];
            continue;
        }
        let single = candidates
            .iter()
            .map(|&(_, j)| aggregate[j])
            .find(|&p| volume[p] + ci <= cap);
        match single {
            Some(p) => {
                volume[p] += ci;
                rows[i] = vec![(p, 1.0)];
            }
            None => {
                // promote i to C as a new singleton aggregate
                let p = volume.len();
                aggregate[i] = p;
                volume.push(ci);
                rows[i] = vec![(p, 1.0)];
            }
        }
    }
    InterpolationOperator::from_rows(g.node_weights(), &rows, volume.len())
}

/// Builds `P`: C-nodes map to their own aggregate with weight 1; each F-node
/// is split over the strongest admissible pair of C-neighbors, else joins the
/// strongest admissible single one, else becomes a new seed. Admissible means
/// the neighbor's aggregate stays within `max_aggregate_volume` after taking
/// its share of the node's volume.
pub fn build_interpolation(
    g: &Graph,
    rho: &AlgebraicDistances,
    is_c: &[bool],
    order: &[usize],
    params: &AmgParams,
) -> InterpolationOperator {
    interpolate(g, rho, &strengths(g, rho, None), is_c, order, params)
}

/// Coarse graph with `w_pq = sum_{k != l} P_kp w_kl P_lq` and node weights
/// equal to aggregate volumes.
pub fn galerkin_coarsen(g: &Graph, p: &InterpolationOperator) -> Graph {
    assert_eq!(p.fine_len(), g.n());
    let mut acc = Vec::with_capacity(g.m() * 2);
    for (k, l, w) in g.edges() {
        for &(a, pa) in p.row(k) {
            for &(b, pb) in p.row(l) {
                if a != b {
                    acc.push((a, b, pa * w * pb));
                }
            }
        }
    }
    Graph::from_merged_above(p.volumes().to_vec(), acc, MIN_COARSE_EDGE_WEIGHT)
}

/// One complete AMG level. With `blocks`, aggregation never crosses block
/// boundaries, so the block assignment carries over to the coarse graph.
pub fn amg_level(
    g: &Graph,
    rho: &AlgebraicDistances,
    params: &AmgParams,
    blocks: Option<&[usize]>,
) -> (Graph, InterpolationOperator) {
    let strength = strengths(g, rho, blocks);
    let order = order_by_future_volume(g, &strength);
    let is_c = seeds_with_strength(g, &strength, &order, params.theta);
    let p = interpolate(g, rho, &strength, &is_c, &order, params);
    (galerkin_coarsen(g, &p), p)
}
