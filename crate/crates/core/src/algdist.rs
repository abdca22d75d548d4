//! Algebraic distances between adjacent nodes.
//!
//! Random test vectors are smoothed by a lazy random walk on the
//! volume-normalized graph, `H = (1 - alpha) I + alpha D^-1 W`, where
//! `W_ij = w_ij / sqrt(c(i) c(j))` and `D` holds the row sums of `W`. After
//! `iterations` sweeps, the coupling of an edge `{i, j}` is the Euclidean
//! distance between the endpoints across all vectors. Endpoints that the walk
//! drags together are strongly connected; a large value marks a weak edge.

use rand::Rng as _;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::rng;

/// Lower bound applied to a coupling before taking its reciprocal.
pub const RHO_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RelaxationParams {
    pub alpha: f64,
    pub num_vectors: usize,
    pub iterations: usize,
    pub seed: u64,
}

impl Default for RelaxationParams {
    fn default() -> Self {
        RelaxationParams {
            alpha: 0.5,
            num_vectors: 5,
            iterations: 20,
            seed: 0,
        }
    }
}

/// One coupling value per undirected edge, indexed by edge id.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraicDistances {
    rho: Vec<f64>,
}

impl AlgebraicDistances {
    pub fn from_values(rho: Vec<f64>) -> Self {
        AlgebraicDistances { rho }
    }

    pub fn rho(&self, e: usize) -> f64 {
        self.rho[e]
    }

    pub fn values(&self) -> &[f64] {
        &self.rho
    }

    /// `rho` clamped to [`RHO_FLOOR`].
    pub fn floored(&self, e: usize) -> f64 {
        self.rho[e].max(RHO_FLOOR)
    }

    /// Connection strength `1 / rho`; non-adjacent pairs have none.
    pub fn strength(&self, e: usize) -> f64 {
        1.0 / self.floored(e)
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }
}

/// `w_ij / sqrt(c(i) c(j))` per edge.
pub fn volume_normalized_weights(g: &Graph) -> Result<Vec<f64>> {
    g.edges()
        .map(|(u, v, w)| {
            for x in [u, v] {
                if g.node_weight(x) <= 0.0 {
                    return Err(Error::DegenerateVolume(x));
                }
            }
            Ok(w / (g.node_weight(u) * g.node_weight(v)).sqrt())
        })
        .collect()
}

struct Walk<'a> {
    g: &'a Graph,
    weight: &'a [f64],
    diag: Vec<f64>,
    alpha: f64,
}

impl<'a> Walk<'a> {
    fn new(g: &'a Graph, weight: &'a [f64], alpha: f64) -> Self {
        let diag = (0..g.n())
            .map(|v| g.incident_edges(v).iter().map(|&e| weight[e]).sum())
            .collect();
        Walk {
            g,
            weight,
            diag,
            alpha,
        }
    }

    fn sweep_into(&self, chi: &[f64], out: &mut [f64]) {
        for v in 0..self.g.n() {
            let d = self.diag[v];
            if d <= 0.0 {
                out[v] = chi[v];
                continue;
            }
            let pull: f64 = self
                .g
                .neighbors(v)
                .iter()
                .zip(self.g.incident_edges(v))
                .map(|(&u, &e)| self.weight[e] * chi[u])
                .sum();
            out[v] = (1.0 - self.alpha) * chi[v] + self.alpha * (pull / d);
        }
    }

    fn relax(&self, mut chi: Vec<f64>, iterations: usize) -> Vec<f64> {
        let mut next = vec![0.0; chi.len()];
        for _ in 0..iterations {
            self.sweep_into(&chi, &mut next);
            std::mem::swap(&mut chi, &mut next);
        }
        chi
    }
}

/// One application of the lazy random-walk operator. Isolated nodes keep
/// their value.
pub fn jor_sweep(g: &Graph, omega_tilde: &[f64], chi: &[f64], alpha: f64) -> Vec<f64> {
    assert_eq!(omega_tilde.len(), g.m());
    assert_eq!(chi.len(), g.n());
    let walk = Walk::new(g, omega_tilde, alpha);
    let mut out = vec![0.0; g.n()];
    walk.sweep_into(chi, &mut out);
    out
}

/// The initial test vector for stream `r`: uniform on `[-1/2, 1/2]`.
pub fn test_vector(n: usize, seed: u64, r: usize) -> Vec<f64> {
    let mut rng = rng(seed.wrapping_add(r as u64));
    (0..n).map(|_| rng.gen_range(-0.5..=0.5)).collect()
}

pub fn algebraic_distances(g: &Graph, params: &RelaxationParams) -> Result<AlgebraicDistances> {
    if !(0.0..=1.0).contains(&params.alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in [0, 1], got {}",
            params.alpha
        )));
    }
    if params.num_vectors == 0 {
        return Err(Error::InvalidArgument("at least one test vector required".into()));
    }
    let omega_tilde = volume_normalized_weights(g)?;
    let walk = Walk::new(g, &omega_tilde, params.alpha);
    let vectors: Vec<Vec<f64>> = (0..params.num_vectors)
        .into_par_iter()
        .map(|r| walk.relax(test_vector(g.n(), params.seed, r), params.iterations))
        .collect();
    let rho = g
        .edges()
        .map(|(u, v, _)| {
            vectors
                .iter()
                .map(|x| (x[u] - x[v]).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    Ok(AlgebraicDistances { rho })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization_examples() {
        let g = Graph::from_edges(vec![4.0, 4.0], &[(0, 1, 4.0)]).unwrap();
        assert_eq!(volume_normalized_weights(&g).unwrap(), vec![1.0]);
        let g = Graph::from_edges(vec![1.0, 4.0], &[(0, 1, 1.0)]).unwrap();
        assert_eq!(volume_normalized_weights(&g).unwrap(), vec![0.5]);
        let g = Graph::from_edges(vec![1.0, 1.0, 1.0], &[(0, 1, 3.0), (1, 2, 0.25)]).unwrap();
        assert_eq!(volume_normalized_weights(&g).unwrap(), vec![3.0, 0.25]);
    }

    #[test]
    fn zero_volume_is_rejected() {
        let g = Graph::from_edges(vec![0.0, 1.0], &[(0, 1, 1.0)]).unwrap();
        assert!(matches!(volume_normalized_weights(&g), Err(Error::DegenerateVolume(0))));
        assert!(algebraic_distances(&g, &RelaxationParams::default()).is_err());
    }

    #[test]
    fn sweep_examples() {
        let g = Graph::unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(jor_sweep(&g, &[1.0], &[-0.5, 0.5], 0.5), vec![0.0, 0.0]);
        let chi = [0.3, -0.1];
        assert_eq!(jor_sweep(&g, &[1.0], &chi, 0.0), chi.to_vec());
        let tri = Graph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let out = jor_sweep(&tri, &[1.0, 2.0, 0.5], &[0.25; 3], 0.7);
        assert!(out.iter().all(|&x| (x - 0.25).abs() < 1e-15));
    }

    #[test]
    fn isolated_node_keeps_value() {
        let g = Graph::unweighted(3, &[(0, 1)]).unwrap();
        let out = jor_sweep(&g, &[1.0], &[0.1, 0.3, 0.4], 0.5);
        assert_eq!(out[2], 0.4);
    }

    #[test]
    fn single_edge_is_equalized() {
        let g = Graph::unweighted(2, &[(0, 1)]).unwrap();
        for iterations in 1..4 {
            let params = RelaxationParams {
                iterations,
                seed: 7,
                ..Default::default()
            };
            assert_eq!(algebraic_distances(&g, &params).unwrap().rho(0), 0.0);
        }
    }

    #[test]
    fn zero_iterations_is_raw_vector_distance() {
        let g = Graph::unweighted(2, &[(0, 1)]).unwrap();
        let params = RelaxationParams {
            iterations: 0,
            seed: 11,
            ..Default::default()
        };
        let rho = algebraic_distances(&g, &params).unwrap().rho(0);
        let expected: f64 = (0..5)
            .map(|r| {
                let x = test_vector(2, 11, r);
                (x[0] - x[1]).powi(2)
            })
            .sum::<f64>()
            .sqrt();
        assert_eq!(rho, expected);
        assert!(rho > 0.0 && rho <= 5f64.sqrt());
    }

    #[test]
    fn rejects_bad_params() {
        let g = Graph::unweighted(2, &[(0, 1)]).unwrap();
        let bad_alpha = RelaxationParams {
            alpha: 1.5,
            ..Default::default()
        };
        assert!(algebraic_distances(&g, &bad_alpha).is_err());
        let no_vectors = RelaxationParams {
            num_vectors: 0,
            ..Default::default()
        };
        assert!(algebraic_distances(&g, &no_vectors).is_err());
    }
}
