//! Edge ratings and the matching algorithms used for contraction-based
//! coarsening: random matching, the Global Paths Algorithm (GPA) and the
//! level schedule that mixes them.
//!
//! Every matcher accepts an optional block assignment. When present, only
//! edges inside a block are eligible, so a carried partition survives
//! contraction unchanged.

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::algdist::AlgebraicDistances;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::rng::rng;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum EdgeRating {
    /// `w(u,v)^2 / (c(u) c(v))`
    ExpansionSquared,
    /// `w(u,v) / (Out(u) + Out(v) - 2 w(u,v))`
    InnerOuter,
    /// expansion*² divided by the edge's algebraic distance
    ExAlg,
}

impl EdgeRating {
    pub fn needs_algebraic_distance(self) -> bool {
        matches!(self, EdgeRating::ExAlg)
    }
}

fn expansion_squared(g: &Graph, e: usize) -> f64 {
    let (u, v) = g.endpoints(e);
    let w = g.edge_weight(e);
    let denom = g.node_weight(u) * g.node_weight(v);
    if denom > 0.0 {
        w * w / denom
    } else {
        f64::INFINITY
    }
}

fn inner_outer(g: &Graph, e: usize, out: impl Fn(usize) -> f64) -> f64 {
    let (u, v) = g.endpoints(e);
    let w = g.edge_weight(e);
    let (ou, ov) = (out(u), out(v));
    let denom = (ou - w) + (ov - w);
    // an edge that carries all weight of both endpoints: always contract
    if denom <= 1e-12 * (ou + ov) {
        f64::INFINITY
    } else {
        w / denom
    }
}

fn require_rho(kind: EdgeRating, rho: Option<&AlgebraicDistances>) -> Result<Option<&AlgebraicDistances>> {
    if kind.needs_algebraic_distance() && rho.is_none() {
        return Err(Error::InvalidArgument(
            "ex_alg rating requires algebraic distances".into(),
        ));
    }
    Ok(rho)
}

pub fn rate_edge(
    g: &Graph,
    e: usize,
    kind: EdgeRating,
    rho: Option<&AlgebraicDistances>,
) -> Result<f64> {
    let rho = require_rho(kind, rho)?;
    Ok(match kind {
        EdgeRating::ExpansionSquared => expansion_squared(g, e),
        EdgeRating::InnerOuter => inner_outer(g, e, |v| g.weighted_degree(v)),
        EdgeRating::ExAlg => expansion_squared(g, e) / rho.unwrap().floored(e),
    })
}

/// Ratings for every edge, indexed by edge id.
pub fn rate_edges(g: &Graph, kind: EdgeRating, rho: Option<&AlgebraicDistances>) -> Result<Vec<f64>> {
    let rho = require_rho(kind, rho)?;
    if let Some(r) = rho {
        if r.len() != g.m() {
            return Err(Error::InvalidArgument(format!(
                "{} algebraic distances for {} edges",
                r.len(),
                g.m()
            )));
        }
    }
    Ok(match kind {
        EdgeRating::ExpansionSquared => (0..g.m()).map(|e| expansion_squared(g, e)).collect(),
        EdgeRating::InnerOuter => {
            let out: Vec<f64> = (0..g.n()).map(|v| g.weighted_degree(v)).collect();
            (0..g.m()).map(|e| inner_outer(g, e, |v| out[v])).collect()
        }
        EdgeRating::ExAlg => {
            let rho = rho.unwrap();
            (0..g.m()).map(|e| expansion_squared(g, e) / rho.floored(e)).collect()
        }
    })
}

fn eligible(blocks: Option<&[usize]>, u: usize, v: usize) -> bool {
    blocks.is_none_or(|b| b[u] == b[v])
}

pub fn random_matching(g: &Graph, seed: u64) -> Vec<(usize, usize)> {
    random_matching_within(g, None, seed)
}

/// Visits nodes in random order; an unmatched node picks a uniformly random
/// unmatched neighbor.
pub fn random_matching_within(g: &Graph, blocks: Option<&[usize]>, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = rng(seed);
    let mut order: Vec<usize> = (0..g.n()).collect();
    order.shuffle(&mut rng);
    let mut matched = vec![false; g.n()];
    let mut out = Vec::new();
    let mut candidates = Vec::new();
    for u in order {
        if matched[u] {
            continue;
        }
        candidates.clear();
        candidates.extend(
            g.neighbors(u)
                .iter()
                .copied()
                .filter(|&v| !matched[v] && eligible(blocks, u, v)),
        );
        if candidates.is_empty() {
            continue;
        }
        let v = candidates[rng.gen_range(0..candidates.len())];
        matched[u] = true;
        matched[v] = true;
        out.push((u.min(v), u.max(v)));
    }
    out
}

/// Paths and even cycles grown by GPA. Each entry lists edge ids in walk order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PathSet {
    pub paths: Vec<Vec<usize>>,
    pub cycles: Vec<Vec<usize>>,
}

const NO_EDGE: usize = usize::MAX;

/// Scans edges by decreasing rating (ties: ascending edge id) and keeps each
/// applicable edge: one joining endpoints of two different paths, or closing
/// an odd-length path into an even cycle.
pub fn grow_paths(g: &Graph, ratings: &[f64], blocks: Option<&[usize]>) -> PathSet {
    assert_eq!(ratings.len(), g.m());
    let n = g.n();
    let mut order: Vec<usize> = (0..g.m())
        .filter(|&e| ratings[e] > 0.0)
        .filter(|&e| {
            let (u, v) = g.endpoints(e);
            eligible(blocks, u, v)
        })
        .collect();
    order.sort_by(|&a, &b| ratings[b].total_cmp(&ratings[a]).then(a.cmp(&b)));

    let mut links = vec![[NO_EDGE; 2]; n];
    let mut degree = vec![0u8; n];
    // valid only while a node is a path endpoint
    let mut other_end: Vec<usize> = (0..n).collect();
    let mut length = vec![0usize; n];

    let add = |links: &mut Vec<[usize; 2]>, degree: &mut Vec<u8>, x: usize, e: usize| {
        links[x][degree[x] as usize] = e;
        degree[x] += 1;
    };

    for e in order {
        let (u, v) = g.endpoints(e);
        if degree[u] >= 2 || degree[v] >= 2 {
            continue;
        }
        if other_end[u] == v {
            if length[u] % 2 == 1 {
                add(&mut links, &mut degree, u, e);
                add(&mut links, &mut degree, v, e);
            }
            continue;
        }
        let (a, b) = (other_end[u], other_end[v]);
        let joined = length[u] + length[v] + 1;
        add(&mut links, &mut degree, u, e);
        add(&mut links, &mut degree, v, e);
        other_end[a] = b;
        other_end[b] = a;
        length[a] = joined;
        length[b] = joined;
    }

    let mut visited = vec![false; n];
    let walk = |start: usize, visited: &mut Vec<bool>| {
        let mut edges = Vec::new();
        let mut cur = start;
        let mut prev = NO_EDGE;
        visited[start] = true;
        loop {
            let next = links[cur]
                .iter()
                .copied()
                .take(degree[cur] as usize)
                .find(|&e| e != prev);
            let Some(e) = next else { break };
            let (a, b) = g.endpoints(e);
            let to = if a == cur { b } else { a };
            edges.push(e);
            prev = e;
            cur = to;
            if visited[cur] {
                break;
            }
            visited[cur] = true;
        }
        edges
    };

    let mut set = PathSet::default();
    for s in 0..n {
        if degree[s] == 1 && !visited[s] {
            set.paths.push(walk(s, &mut visited));
        }
    }
    for s in 0..n {
        if degree[s] == 2 && !visited[s] {
            set.cycles.push(walk(s, &mut visited));
        }
    }
    set
}

/// DP score: `+inf` ratings are counted separately so several of them still
/// compare sensibly.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Score {
    infinite: u32,
    finite: f64,
}

impl Score {
    const ZERO: Score = Score {
        infinite: 0,
        finite: 0.0,
    };

    fn plus(self, r: f64) -> Score {
        if r == f64::INFINITY {
            Score {
                infinite: self.infinite + 1,
                ..self
            }
        } else {
            Score {
                finite: self.finite + r,
                ..self
            }
        }
    }

    fn at_least(self, other: Score) -> bool {
        (self.infinite, self.finite) >= (other.infinite, other.finite)
    }
}

fn path_dp(ratings: &[f64]) -> (Score, Vec<usize>) {
    let l = ratings.len();
    let mut best = vec![Score::ZERO; l + 1];
    let mut take = vec![false; l + 1];
    for i in 1..=l {
        let skip = best[i - 1];
        let with = if i >= 2 { best[i - 2] } else { Score::ZERO }.plus(ratings[i - 1]);
        if with.at_least(skip) {
            best[i] = with;
            take[i] = true;
        } else {
            best[i] = skip;
        }
    }
    let mut chosen = Vec::new();
    let mut i = l;
    while i > 0 {
        if take[i] {
            chosen.push(i - 1);
            i = i.saturating_sub(2);
        } else {
            i -= 1;
        }
    }
    chosen.reverse();
    (best[l], chosen)
}

/// Maximum-rating matching on a path (consecutive edges adjacent) or a
/// cycle (additionally first and last adjacent). Returns chosen positions.
pub fn max_weight_path_matching(ratings: &[f64], cycle: bool) -> Vec<usize> {
    if !cycle || ratings.len() < 3 {
        return path_dp(ratings).1;
    }
    let l = ratings.len();
    let (without_first, a) = path_dp(&ratings[1..]);
    let (without_last, b) = path_dp(&ratings[..l - 1]);
    if without_first.at_least(without_last) {
        a.into_iter().map(|i| i + 1).collect()
    } else {
        b
    }
}

pub fn gpa_matching(g: &Graph, ratings: &[f64]) -> Vec<(usize, usize)> {
    gpa_matching_within(g, ratings, None)
}

pub fn gpa_matching_within(g: &Graph, ratings: &[f64], blocks: Option<&[usize]>) -> Vec<(usize, usize)> {
    let set = grow_paths(g, ratings, blocks);
    let mut out = Vec::new();
    let mut pick = |edges: &[usize], cycle: bool| {
        let r: Vec<f64> = edges.iter().map(|&e| ratings[e]).collect();
        for i in max_weight_path_matching(&r, cycle) {
            out.push(g.endpoints(edges[i]));
        }
    };
    for p in &set.paths {
        pick(p, false);
    }
    for c in &set.cycles {
        pick(c, true);
    }
    out.sort_unstable();
    out
}

/// How matchings are chosen across the levels of a hierarchy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchingSchedule {
    /// Random matching for the first `max(2, 7 - log2 k)` levels, then GPA.
    RandomGpa(EdgeRating),
    /// GPA on every level, with a separate rating for level 0.
    Gpa { first: EdgeRating, rest: EdgeRating },
    /// Random matching on every level.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatchingAlgorithm {
    Random,
    Gpa(EdgeRating),
}

/// `max(2, 7 - floor(log2 k))`.
pub fn random_levels(k: usize) -> usize {
    let log = if k == 0 { 0 } else { k.ilog2() as i64 };
    (7 - log).max(2) as usize
}

pub fn choose_matching_algorithm(level: usize, k: usize, schedule: MatchingSchedule) -> MatchingAlgorithm {
    match schedule {
        MatchingSchedule::RandomGpa(rating) => {
            if level < random_levels(k) {
                MatchingAlgorithm::Random
            } else {
                MatchingAlgorithm::Gpa(rating)
            }
        }
        MatchingSchedule::Gpa { first, rest } => {
            MatchingAlgorithm::Gpa(if level == 0 { first } else { rest })
        }
        MatchingSchedule::Random => MatchingAlgorithm::Random,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contract::validate_matching;

    fn path(n: usize) -> Graph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
        Graph::unweighted(n, &edges).unwrap()
    }

    #[test]
    fn rating_examples() {
        let g = Graph::from_edges(vec![1.0, 2.0], &[(0, 1, 2.0)]).unwrap();
        assert_eq!(rate_edge(&g, 0, EdgeRating::ExpansionSquared, None).unwrap(), 2.0);
        let tri = Graph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(rate_edge(&tri, 0, EdgeRating::InnerOuter, None).unwrap(), 0.5);
        let rho = AlgebraicDistances::from_values(vec![0.5]);
        assert_eq!(rate_edge(&g, 0, EdgeRating::ExAlg, Some(&rho)).unwrap(), 4.0);
        assert!(rate_edge(&g, 0, EdgeRating::ExAlg, None).is_err());
    }

    #[test]
    fn isolated_edge_inner_outer_is_infinite() {
        let g = Graph::unweighted(2, &[(0, 1)]).unwrap();
        assert_eq!(
            rate_edge(&g, 0, EdgeRating::InnerOuter, None).unwrap(),
            f64::INFINITY
        );
    }

    #[test]
    fn bulk_ratings_match_single() {
        let g = Graph::from_edges(
            vec![1.0, 2.0, 3.0, 1.5],
            &[(0, 1, 1.0), (1, 2, 2.5), (2, 3, 0.5), (0, 3, 4.0), (0, 2, 1.0)],
        )
        .unwrap();
        let rho = AlgebraicDistances::from_values(vec![0.1, 0.2, 0.3, 0.4, 0.5]);
        for kind in [EdgeRating::ExpansionSquared, EdgeRating::InnerOuter, EdgeRating::ExAlg] {
            let bulk = rate_edges(&g, kind, Some(&rho)).unwrap();
            for e in 0..g.m() {
                let single = rate_edge(&g, e, kind, Some(&rho)).unwrap();
                assert!((bulk[e] - single).abs() <= 1e-12 * single.abs());
            }
        }
    }

    #[test]
    fn random_matching_examples() {
        let g = Graph::unweighted(6, &[(0, 1), (2, 3), (4, 5)]).unwrap();
        for seed in 0..5 {
            assert_eq!(random_matching(&g, seed).len(), 3);
        }
        let empty = Graph::unweighted(4, &[]).unwrap();
        assert!(random_matching(&empty, 3).is_empty());
        let grid = crate::harness::generators::grid2d(6, 7);
        assert_eq!(random_matching(&grid, 9), random_matching(&grid, 9));
    }

    #[test]
    fn random_matching_is_maximal() {
        let grid = crate::harness::generators::grid2d(9, 9);
        let m = random_matching(&grid, 4);
        validate_matching(&grid, &m).unwrap();
        let mut matched = vec![false; grid.n()];
        for &(u, v) in &m {
            matched[u] = true;
            matched[v] = true;
        }
        for (u, v, _) in grid.edges() {
            assert!(matched[u] || matched[v]);
        }
    }

    #[test]
    fn gpa_path_examples() {
        let g = path(4);
        assert_eq!(gpa_matching(&g, &[1.0, 5.0, 1.0]), vec![(1, 2)]);
        assert_eq!(gpa_matching(&g, &[3.0, 5.0, 3.0]), vec![(0, 1), (2, 3)]);
    }

    #[test]
    fn gpa_four_cycle_is_perfect() {
        let g = Graph::unweighted(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        let set = grow_paths(&g, &[1.0; 4], None);
        assert_eq!(set.cycles.len(), 1);
        let m = gpa_matching(&g, &[1.0; 4]);
        assert_eq!(m.len(), 2);
        validate_matching(&g, &m).unwrap();
    }

    #[test]
    fn odd_cycle_is_not_closed() {
        let g = Graph::unweighted(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        let set = grow_paths(&g, &[1.0; 3], None);
        assert!(set.cycles.is_empty());
        assert_eq!(set.paths, vec![vec![0, 1]]);
    }

    #[test]
    fn path_set_degree_bound() {
        let g = crate::harness::generators::grid2d(8, 8);
        let ratings = rate_edges(&g, EdgeRating::InnerOuter, None).unwrap();
        let set = grow_paths(&g, &ratings, None);
        let mut deg = vec![0; g.n()];
        for e in set.paths.iter().chain(&set.cycles).flatten() {
            let (u, v) = g.endpoints(*e);
            deg[u] += 1;
            deg[v] += 1;
        }
        assert!(deg.iter().all(|&d| d <= 2));
        assert!(set.cycles.iter().all(|c| c.len() % 2 == 0));
    }

    #[test]
    fn dp_with_infinite_ratings() {
        let r = [f64::INFINITY, 10.0, f64::INFINITY];
        assert_eq!(max_weight_path_matching(&r, false), vec![0, 2]);
    }

    #[test]
    fn blocked_edges_are_never_matched() {
        let g = path(4);
        let blocks = [0, 0, 1, 1];
        let m = gpa_matching_within(&g, &[1.0, 5.0, 1.0], Some(&blocks));
        assert_eq!(m, vec![(0, 1), (2, 3)]);
        for seed in 0..10 {
            for (u, v) in random_matching_within(&g, Some(&blocks), seed) {
                assert_eq!(blocks[u], blocks[v]);
            }
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(random_levels(2), 6);
        assert_eq!(random_levels(128), 2);
        assert_eq!(random_levels(8), 4);
        let eco = MatchingSchedule::RandomGpa(EdgeRating::ExpansionSquared);
        assert_eq!(choose_matching_algorithm(3, 8, eco), MatchingAlgorithm::Random);
        assert_eq!(
            choose_matching_algorithm(4, 8, eco),
            MatchingAlgorithm::Gpa(EdgeRating::ExpansionSquared)
        );
        let strong = MatchingSchedule::Gpa {
            first: EdgeRating::InnerOuter,
            rest: EdgeRating::ExpansionSquared,
        };
        assert_eq!(
            choose_matching_algorithm(0, 2, strong),
            MatchingAlgorithm::Gpa(EdgeRating::InnerOuter)
        );
        assert_eq!(
            choose_matching_algorithm(1, 2, strong),
            MatchingAlgorithm::Gpa(EdgeRating::ExpansionSquared)
        );
    }
}
