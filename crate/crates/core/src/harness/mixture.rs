//! Star-like mixtures of dissimilar graphs, weakly tied to a center graph.

use std::path::{Path, PathBuf};

use rand::seq::index::sample;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::io::read_graph;
use crate::rng::{derive_seed, rng};

/// Largest admissible fraction of a component's edges that may become
/// inter-edges (the bound itself is exclusive per component).
pub const MAX_FRACTION: f64 = 0.03;
const CONNECT_RETRIES: u64 = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct MixtureParams {
    /// Inter-edges from component `i` stay strictly below `fraction * m(S_i)`.
    pub fraction: f64,
    /// Inter-edges per sampled node, at least 2.
    pub edges_per_node: usize,
    /// Sampled nodes per component; defaults to as many as the budget allows.
    pub boundary_nodes: Option<usize>,
    pub seed: u64,
}

impl Default for MixtureParams {
    fn default() -> Self {
        MixtureParams {
            fraction: MAX_FRACTION,
            edges_per_node: 2,
            boundary_nodes: None,
            seed: 0,
        }
    }
}

/// Largest integer strictly below `fraction * m`. Products that land within
/// rounding noise of an integer (`0.03 * 100`) count as that integer.
pub fn inter_edge_budget(fraction: f64, m: usize) -> usize {
    let bound = fraction * m as f64;
    let mut budget = bound.ceil() as usize;
    while budget > 0 && budget as f64 >= bound - 1e-9 * bound.max(1.0) {
        budget -= 1;
    }
    budget
}

/// Joins `parts[1..]` to the center `parts[0]`. Nodes keep their order, with
/// each part's ids offset by the sizes of the parts before it. Every sampled
/// node of component `i` gets `edges_per_node` unit edges to distinct random
/// center nodes. Sampling is repeated until the result is connected.
pub fn generate_hard_mixture(parts: &[Graph], params: &MixtureParams) -> Result<Graph> {
    let Some(center) = parts.first() else {
        return Err(Error::InvalidArgument("mixture needs at least one component".into()));
    };
    if !(params.fraction > 0.0 && params.fraction <= MAX_FRACTION) {
        return Err(Error::InvalidArgument(format!(
            "fraction {} outside (0, {MAX_FRACTION}]",
            params.fraction
        )));
    }
    if params.edges_per_node < 2 {
        return Err(Error::InvalidArgument("edges_per_node must be at least 2".into()));
    }
    if parts.len() == 1 {
        return Ok(center.clone());
    }
    if center.n() < params.edges_per_node {
        return Err(Error::Generation {
            component: 0,
            message: format!(
                "center has {} nodes, fewer than {} edges per node",
                center.n(),
                params.edges_per_node
            ),
        });
    }
    let mut plan = Vec::with_capacity(parts.len());
    for (i, part) in parts.iter().enumerate().skip(1) {
        let budget = inter_edge_budget(params.fraction, part.m());
        let max_nodes = budget / params.edges_per_node;
        let nodes = params.boundary_nodes.unwrap_or(max_nodes);
        if nodes == 0 || nodes > max_nodes {
            return Err(Error::Generation {
                component: i,
                message: format!(
                    "budget of {budget} inter-edges cannot give {} nodes {} edges each",
                    nodes.max(1),
                    params.edges_per_node
                ),
            });
        }
        if nodes > part.n() {
            return Err(Error::Generation {
                component: i,
                message: format!("{nodes} boundary nodes requested but only {} nodes", part.n()),
            });
        }
        plan.push((i, nodes));
    }

    let mut offsets = Vec::with_capacity(parts.len());
    let mut node_weight = Vec::new();
    let mut base = Vec::new();
    for part in parts {
        let offset = node_weight.len();
        offsets.push(offset);
        node_weight.extend_from_slice(part.node_weights());
        base.extend(part.edges().map(|(u, v, w)| (u + offset, v + offset, w)));
    }

    for attempt in 0..CONNECT_RETRIES {
        let mut edges = base.clone();
        for &(i, nodes) in &plan {
            let mut rng = rng(derive_seed(params.seed, attempt, i as u64));
            for v in sample(&mut rng, parts[i].n(), nodes).into_vec() {
                for c in sample(&mut rng, center.n(), params.edges_per_node).into_vec() {
                    edges.push((v + offsets[i], c, 1.0));
                }
            }
        }
        let g = Graph::from_edges(node_weight.clone(), &edges)?;
        if g.component_count() == 1 {
            return Ok(g);
        }
    }
    let component = parts
        .iter()
        .position(|p| p.component_count() > 1)
        .unwrap_or(0);
    Err(Error::Generation {
        component,
        message: format!("union still disconnected after {CONNECT_RETRIES} attempts"),
    })
}

/// Counts inter-edges between component `i` and the center of a mixture
/// built from parts of sizes `sizes`.
pub fn inter_edges(g: &Graph, sizes: &[usize], i: usize) -> usize {
    let start: usize = sizes[..i].iter().sum();
    let range = start..start + sizes[i];
    let center = 0..sizes[0];
    g.edges()
        .filter(|&(u, v, _)| {
            (range.contains(&u) && center.contains(&v)) || (range.contains(&v) && center.contains(&u))
        })
        .count()
}

/// Mixture description read from TOML. Component paths are relative to the
/// spec file; the first component is the center.
#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct MixtureSpec {
    pub components: Vec<PathBuf>,
    #[serde(default = "default_fraction")]
    pub fraction: f64,
    #[serde(default = "default_edges_per_node")]
    pub edges_per_node: usize,
    #[serde(default)]
    pub boundary_nodes: Option<usize>,
    #[serde(default)]
    pub seed: u64,
}

fn default_fraction() -> f64 {
    MAX_FRACTION
}

fn default_edges_per_node() -> usize {
    2
}

impl MixtureSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidArgument(format!("mixture spec: {e}")))
    }

    pub fn params(&self) -> MixtureParams {
        MixtureParams {
            fraction: self.fraction,
            edges_per_node: self.edges_per_node,
            boundary_nodes: self.boundary_nodes,
            seed: self.seed,
        }
    }

    /// Reads the spec and its component graphs and builds the mixture.
    pub fn generate_from_file(path: &Path) -> Result<Graph> {
        let spec = Self::parse(&std::fs::read_to_string(path)?)?;
        let dir = path.parent().unwrap_or(Path::new("."));
        let parts = spec
            .components
            .iter()
            .map(|c| read_graph(dir.join(c)))
            .collect::<Result<Vec<_>>>()?;
        generate_hard_mixture(&parts, &spec.params())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generators::{grid2d, preferential_attachment};

    #[test]
    fn budget_is_strict() {
        assert_eq!(inter_edge_budget(0.03, 1000), 29);
        assert_eq!(inter_edge_budget(0.03, 1001), 30);
        assert_eq!(inter_edge_budget(0.03, 30), 0);
        assert_eq!(inter_edge_budget(0.03, 100), 2);
        assert_eq!(inter_edge_budget(0.03, 0), 0);
    }

    #[test]
    fn single_component_is_unchanged() {
        let g = grid2d(4, 5);
        assert_eq!(generate_hard_mixture(std::slice::from_ref(&g), &MixtureParams::default()).unwrap(), g);
    }

    #[test]
    fn tiny_component_is_rejected_by_index() {
        let parts = [grid2d(10, 10), grid2d(2, 2)];
        match generate_hard_mixture(&parts, &MixtureParams::default()) {
            Err(Error::Generation { component, .. }) => assert_eq!(component, 1),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mixture_respects_budget() {
        let parts = [grid2d(20, 25), preferential_attachment(500, 2, 1)];
        let params = MixtureParams {
            seed: 9,
            ..Default::default()
        };
        let g = generate_hard_mixture(&parts, &params).unwrap();
        let sizes = [500, 500];
        let count = inter_edges(&g, &sizes, 1);
        assert!((count as f64) < 0.03 * parts[1].m() as f64);
        assert_eq!(g.m(), parts[0].m() + parts[1].m() + count);
        assert_eq!(g.component_count(), 1);
    }

    #[test]
    fn spec_parses() {
        let spec = MixtureSpec::parse("components = [\"a.graph\", \"b.graph\"]\nfraction = 0.02\nseed = 4\n").unwrap();
        assert_eq!(spec.components.len(), 2);
        assert_eq!(spec.edges_per_node, 2);
        assert!(MixtureSpec::parse("components = []\nbogus = 1\n").is_err());
    }
}
