//! Multilevel driver: presets, hierarchy construction and the V-, iterated
//! V- and F-cycle schemes.
//!
//! A cycle that starts from an existing partition coarsens without merging
//! nodes of different blocks, uses the projected partition at the coarsest
//! level instead of a fresh one, and keeps the previous partition if the new
//! one is not better.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::algdist::{algebraic_distances, RelaxationParams};
use crate::amg::{amg_level, AmgParams, InterpolationOperator};
use crate::contract::{contract_matching, MatchingMap};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::initial::{initial_partition, CoarsestPolicy};
use crate::matching::{
    choose_matching_algorithm, gpa_matching_within, random_matching_within, rate_edges, EdgeRating,
    MatchingAlgorithm, MatchingSchedule,
};
use crate::partition::{compute_l_max, Partition};
use crate::refine::{fm_refine, multi_try_fm, project_amg, project_matching, rebalance, PenaltyForm, DEFAULT_MAX_STALL};
use crate::rng::derive_seed;

/// A level that keeps more than this fraction of its nodes ends coarsening.
pub const STALL_RATIO: f64 = 0.95;

const TAG_COARSEN: u64 = 11;
const TAG_REFINE: u64 = 12;
const TAG_INITIAL: u64 = 13;
const TAG_SUBCYCLE: u64 = 14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Preset {
    Eco,
    EcoAlg,
    FCycle,
    Strong,
    AmgEco,
    Amg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coarsening {
    Matching(MatchingSchedule),
    Amg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CycleKind {
    V,
    F,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Eco,
        Preset::EcoAlg,
        Preset::FCycle,
        Preset::Strong,
        Preset::AmgEco,
        Preset::Amg,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Eco => "ECO",
            Preset::EcoAlg => "ECO-ALG",
            Preset::FCycle => "F-CYCLE",
            Preset::Strong => "STRONG",
            Preset::AmgEco => "AMG-ECO",
            Preset::Amg => "AMG",
        }
    }

    pub fn coarsening(self) -> Coarsening {
        match self {
            Preset::Eco => Coarsening::Matching(MatchingSchedule::RandomGpa(EdgeRating::ExpansionSquared)),
            Preset::EcoAlg => Coarsening::Matching(MatchingSchedule::Gpa {
                first: EdgeRating::ExAlg,
                rest: EdgeRating::ExAlg,
            }),
            Preset::Strong | Preset::FCycle => Coarsening::Matching(MatchingSchedule::Gpa {
                first: EdgeRating::InnerOuter,
                rest: EdgeRating::ExpansionSquared,
            }),
            Preset::AmgEco | Preset::Amg => Coarsening::Amg,
        }
    }

    /// FM followed by multi-try FM on every level (flow refinement is not
    /// part of this implementation).
    pub fn strong_refinement(self) -> bool {
        matches!(self, Preset::Strong | Preset::FCycle | Preset::Amg)
    }

    pub fn cycle(self) -> CycleKind {
        if self == Preset::FCycle {
            CycleKind::F
        } else {
            CycleKind::V
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('_', "-");
        Preset::ALL
            .into_iter()
            .find(|p| p.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown preset '{s}'")))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub k: usize,
    pub epsilon: f64,
    pub preset: Preset,
    pub seed: u64,
    /// `seed` is replaced per level.
    pub relaxation: RelaxationParams,
    pub theta: f64,
    pub kappa: usize,
    /// Defaults to the instance's `L_max`.
    pub max_aggregate_volume: Option<f64>,
    pub coarsest: CoarsestPolicy,
    pub max_stall: usize,
    pub multi_try_rounds: usize,
    pub penalty: PenaltyForm,
    /// Replaces the preset's matching schedule (matching presets only).
    pub matching_override: Option<MatchingSchedule>,
    /// Extra sub-cycles per level in an F-cycle.
    pub f_cycle_depth: usize,
}

impl Config {
    pub fn new(k: usize, preset: Preset) -> Self {
        let amg = AmgParams::default();
        Config {
            k,
            epsilon: 0.03,
            preset,
            seed: 0,
            relaxation: RelaxationParams::default(),
            theta: amg.theta,
            kappa: amg.kappa,
            max_aggregate_volume: None,
            coarsest: CoarsestPolicy::default(),
            max_stall: DEFAULT_MAX_STALL,
            multi_try_rounds: 2,
            penalty: PenaltyForm::default(),
            matching_override: None,
            f_cycle_depth: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    pub fn l_max(&self, g: &Graph) -> Result<f64> {
        compute_l_max(g.total_node_weight(), self.k, self.epsilon, g.max_node_weight())
    }

    fn coarsening(&self) -> Coarsening {
        match (self.preset.coarsening(), self.matching_override) {
            (Coarsening::Matching(_), Some(schedule)) => Coarsening::Matching(schedule),
            (c, _) => c,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Projection {
    Matching(MatchingMap),
    Interpolation(InterpolationOperator),
}

#[derive(Clone, Debug)]
pub struct Level {
    /// The coarse graph produced from the previous level.
    pub graph: Graph,
    /// Maps the previous level onto `graph`.
    pub projection: Projection,
    pub used_algebraic_distance: bool,
}

/// `graph(0)` is the graph coarsening started from; `graph(i)` for `i >= 1`
/// is produced from `graph(i - 1)` by `levels[i - 1]`.
#[derive(Clone, Debug)]
pub struct Hierarchy<'g> {
    finest: &'g Graph,
    start_level: usize,
    levels: Vec<Level>,
    coarsest_blocks: Option<Vec<usize>>,
}

impl<'g> Hierarchy<'g> {
    /// Number of graphs, including the finest.
    pub fn len(&self) -> usize {
        self.levels.len() + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn graph(&self, i: usize) -> &Graph {
        if i == 0 {
            self.finest
        } else {
            &self.levels[i - 1].graph
        }
    }

    pub fn coarsest(&self) -> &Graph {
        self.graph(self.len() - 1)
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    /// Absolute level index of `graph(0)` within the outermost hierarchy.
    pub fn start_level(&self) -> usize {
        self.start_level
    }

    /// Carried block assignment restricted to the coarsest graph.
    pub fn coarsest_blocks(&self) -> Option<&[usize]> {
        self.coarsest_blocks.as_deref()
    }
}

fn coarse_blocks(projection: &Projection, fine_blocks: &[usize]) -> Vec<usize> {
    match projection {
        Projection::Matching(map) => (0..map.coarse_len()).map(|c| fine_blocks[map.fine_of(c).0]).collect(),
        Projection::Interpolation(p) => {
            let mut out = vec![0; p.coarse_len()];
            for (i, &b) in fine_blocks.iter().enumerate() {
                for &(a, _) in p.row(i) {
                    out[a] = b;
                }
            }
            out
        }
    }
}

fn coarsen_once(
    g: &Graph,
    level: usize,
    config: &Config,
    l_max: f64,
    blocks: Option<&[usize]>,
    seed: u64,
) -> Result<(Graph, Projection, bool)> {
    let level_seed = derive_seed(seed, TAG_COARSEN, level as u64);
    let relaxation = RelaxationParams {
        seed: level_seed,
        ..config.relaxation
    };
    match config.coarsening() {
        Coarsening::Matching(schedule) => {
            let (matching, used_rho) = match choose_matching_algorithm(level, config.k, schedule) {
                MatchingAlgorithm::Random => (random_matching_within(g, blocks, level_seed), false),
                MatchingAlgorithm::Gpa(rating) => {
                    let rho = if rating.needs_algebraic_distance() {
                        Some(algebraic_distances(g, &relaxation)?)
                    } else {
                        None
                    };
                    let ratings = rate_edges(g, rating, rho.as_ref())?;
                    (gpa_matching_within(g, &ratings, blocks), rho.is_some())
                }
            };
            let (coarse, map) = contract_matching(g, &matching)?;
            Ok((coarse, Projection::Matching(map), used_rho))
        }
        Coarsening::Amg => {
            let rho = algebraic_distances(g, &relaxation)?;
            let params = AmgParams {
                theta: config.theta,
                kappa: config.kappa,
                max_aggregate_volume: config.max_aggregate_volume.unwrap_or(l_max),
            };
            let (coarse, p) = amg_level(g, &rho, &params, blocks);
            Ok((coarse, Projection::Interpolation(p), true))
        }
    }
}

fn build_hierarchy<'g>(
    g: &'g Graph,
    start_level: usize,
    config: &Config,
    l_max: f64,
    blocks: Option<&[usize]>,
    seed: u64,
) -> Result<Hierarchy<'g>> {
    let stop = config.coarsest.stop_size(config.k);
    let mut levels: Vec<Level> = Vec::new();
    let mut carried = blocks.map(<[usize]>::to_vec);
    loop {
        let current = levels.last().map_or(g, |l| &l.graph);
        if current.n() <= stop {
            break;
        }
        let level = start_level + levels.len();
        let (coarse, projection, used) = coarsen_once(current, level, config, l_max, carried.as_deref(), seed)?;
        if (coarse.n() as f64) > STALL_RATIO * current.n() as f64 || coarse.n() < config.k {
            break;
        }
        if let Some(b) = carried.as_deref() {
            carried = Some(coarse_blocks(&projection, b));
        }
        levels.push(Level {
            graph: coarse,
            projection,
            used_algebraic_distance: used,
        });
    }
    Ok(Hierarchy {
        finest: g,
        start_level,
        levels,
        coarsest_blocks: carried,
    })
}

/// Coarsens `g` until it is small enough for the initial partitioner or a
/// level stops shrinking.
pub fn coarsen<'g>(g: &'g Graph, config: &Config) -> Result<Hierarchy<'g>> {
    let l_max = config.l_max(g)?;
    build_hierarchy(g, 0, config, l_max, None, config.seed)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CycleStats {
    /// Graphs in the first hierarchy, including the input.
    pub levels: usize,
    /// Cut on the input graph just before its final refinement.
    pub cut_before_final_refinement: f64,
    pub uncoarsen_time: Duration,
    pub total_time: Duration,
    /// Extra sub-cycles run by an F-cycle.
    pub sub_cycles: usize,
    /// Cut after each completed cycle.
    pub cycle_cuts: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub partition: Partition,
    pub stats: CycleStats,
}

/// Strictly better: balanced before unbalanced, then lower cut.
fn improves(candidate: &Partition, incumbent: &Partition) -> bool {
    let key = |p: &Partition| (!p.is_balanced(), p.cut());
    key(candidate) < key(incumbent)
}

struct Driver<'c> {
    config: &'c Config,
    l_max: f64,
    stats: CycleStats,
}

impl Driver<'_> {
    fn refine(&self, g: &Graph, p: &Partition, seed: u64) -> Partition {
        let p = fm_refine(g, p, self.config.max_stall, seed);
        if self.config.preset.strong_refinement() {
            multi_try_fm(g, &p, self.config.multi_try_rounds, derive_seed(seed, 1, 0))
        } else {
            p
        }
    }

    fn project(&self, fine: &Graph, level: &Level, coarse_p: &Partition) -> Partition {
        match &level.projection {
            Projection::Matching(map) => project_matching(fine, coarse_p, map),
            Projection::Interpolation(p) => {
                let projected = project_amg(fine, coarse_p, p, self.config.penalty);
                if projected.is_balanced() {
                    projected
                } else {
                    rebalance(fine, &projected)
                }
            }
        }
    }

    fn refine_seed(seed: u64, level: usize) -> u64 {
        derive_seed(seed, TAG_REFINE, level as u64)
    }

    fn coarsest_partition(&self, h: &Hierarchy, seed: u64) -> Result<Partition> {
        let g = h.coarsest();
        let level = h.start_level() + h.len() - 1;
        let p = match h.coarsest_blocks() {
            Some(blocks) => Partition::with_l_max(g, self.config.k, self.config.epsilon, self.l_max, blocks.to_vec())?,
            None => initial_partition(
                g,
                self.config.k,
                self.config.epsilon,
                self.l_max,
                self.config.coarsest.attempts,
                derive_seed(seed, TAG_INITIAL, level as u64),
            )?,
        };
        Ok(self.refine(g, &p, Self::refine_seed(seed, level)))
    }

    /// One V-cycle rooted at `g` (absolute level `start_level`).
    fn v_cycle(&mut self, g: &Graph, start_level: usize, carried: Option<&Partition>, seed: u64, top: bool) -> Result<Partition> {
        let h = build_hierarchy(g, start_level, self.config, self.l_max, carried.map(Partition::assignment), seed)?;
        if top && self.stats.levels == 0 {
            self.stats.levels = h.len();
        }
        let mut p = self.coarsest_partition(&h, seed)?;
        let started = Instant::now();
        for i in (0..h.len() - 1).rev() {
            let fine = h.graph(i);
            p = self.project(fine, &h.levels()[i], &p);
            debug_assert_eq!(p.cut(), crate::partition::cut(fine, p.assignment()));
            if top && i == 0 {
                self.stats.cut_before_final_refinement = p.cut();
            }
            p = self.refine(fine, &p, Self::refine_seed(seed, start_level + i));
        }
        if top {
            self.stats.uncoarsen_time += started.elapsed();
            if h.len() == 1 {
                self.stats.cut_before_final_refinement = p.cut();
            }
        }
        Ok(match carried {
            Some(c) if !improves(&p, c) => c.clone(),
            _ => p,
        })
    }

    /// F-cycle: uncoarsens the plain V-cycle path alongside, and after each
    /// projection below the finest level runs extra sub-cycles rooted there.
    fn f_cycle(&mut self, g: &Graph, seed: u64) -> Result<Partition> {
        let h = build_hierarchy(g, 0, self.config, self.l_max, None, seed)?;
        self.stats.levels = h.len();
        let coarsest = h.len() - 1;
        let mut v_path = self.coarsest_partition(&h, seed)?;
        let mut f_path = v_path.clone();
        if coarsest >= 1 {
            for d in 0..self.config.f_cycle_depth {
                let sub_seed = derive_seed(seed, TAG_SUBCYCLE, (coarsest * 1000 + d) as u64);
                let fresh = self.coarsest_partition(&h, sub_seed)?;
                self.stats.sub_cycles += 1;
                if improves(&fresh, &f_path) {
                    f_path = fresh;
                }
            }
        }
        let started = Instant::now();
        for i in (0..coarsest).rev() {
            let fine = h.graph(i);
            let level = &h.levels()[i];
            let same = f_path.assignment() == v_path.assignment();
            v_path = self.project(fine, level, &v_path);
            if i == 0 {
                self.stats.cut_before_final_refinement = v_path.cut();
            }
            v_path = self.refine(fine, &v_path, Self::refine_seed(seed, i));
            f_path = if same {
                v_path.clone()
            } else {
                let projected = self.project(fine, level, &f_path);
                self.refine(fine, &projected, Self::refine_seed(seed, i))
            };
            if i >= 1 {
                for d in 0..self.config.f_cycle_depth {
                    let sub_seed = derive_seed(seed, TAG_SUBCYCLE, (i * 1000 + d) as u64);
                    f_path = self.v_cycle(fine, i, Some(&f_path), sub_seed, false)?;
                    self.stats.sub_cycles += 1;
                }
            }
            if improves(&v_path, &f_path) {
                f_path = v_path.clone();
            }
        }
        self.stats.uncoarsen_time += started.elapsed();
        if coarsest == 0 {
            self.stats.cut_before_final_refinement = f_path.cut();
        }
        Ok(f_path)
    }
}

fn check(g: &Graph, config: &Config) -> Result<f64> {
    if config.k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    if config.k > g.n() {
        return Err(Error::InvalidArgument(format!(
            "cannot split {} nodes into {} nonempty blocks",
            g.n(),
            config.k
        )));
    }
    config.l_max(g)
}

fn trivial(g: &Graph, config: &Config, l_max: f64) -> Result<Outcome> {
    let partition = Partition::with_l_max(g, 1, config.epsilon, l_max, vec![0; g.n()])?;
    Ok(Outcome {
        stats: CycleStats {
            levels: 1,
            cycle_cuts: vec![0.0],
            ..Default::default()
        },
        partition,
    })
}

fn run(g: &Graph, config: &Config, iterations: usize, kind: CycleKind) -> Result<Outcome> {
    let started = Instant::now();
    let l_max = check(g, config)?;
    if config.k == 1 {
        return trivial(g, config, l_max);
    }
    let mut driver = Driver {
        config,
        l_max,
        stats: CycleStats::default(),
    };
    let mut p = match kind {
        CycleKind::V => driver.v_cycle(g, 0, None, config.seed, true)?,
        CycleKind::F => driver.f_cycle(g, config.seed)?,
    };
    driver.stats.cycle_cuts.push(p.cut());
    for t in 1..iterations.max(1) {
        p = driver.v_cycle(g, 0, Some(&p), config.seed.wrapping_add(t as u64), true)?;
        driver.stats.cycle_cuts.push(p.cut());
    }
    driver.stats.total_time = started.elapsed();
    Ok(Outcome {
        partition: p,
        stats: driver.stats,
    })
}

/// Coarsen, solve the coarsest graph, then project and refine level by level.
pub fn v_cycle(g: &Graph, config: &Config) -> Result<Outcome> {
    run(g, config, 1, CycleKind::V)
}

/// Repeats V-cycles with seeds `seed + t`, each starting from the previous
/// partition. The cut sequence is non-increasing.
pub fn iterated_v_cycles(g: &Graph, config: &Config, iterations: usize) -> Result<Outcome> {
    if iterations == 0 {
        return Err(Error::InvalidArgument("iterations must be at least 1".into()));
    }
    run(g, config, iterations, CycleKind::V)
}

pub fn f_cycle(g: &Graph, config: &Config) -> Result<Outcome> {
    run(g, config, 1, CycleKind::F)
}

/// Runs the cycle scheme of `config.preset`; further iterations are
/// V-cycles seeded with the previous result.
pub fn partition_graph(g: &Graph, config: &Config, iterations: usize) -> Result<Outcome> {
    run(g, config, iterations.max(1), config.preset.cycle())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::generators::{grid2d, two_cliques};

    #[test]
    fn preset_names_round_trip() {
        for p in Preset::ALL {
            assert_eq!(p.name().parse::<Preset>().unwrap(), p);
        }
        assert_eq!("amg-eco".parse::<Preset>().unwrap(), Preset::AmgEco);
        assert!("nope".parse::<Preset>().is_err());
    }

    #[test]
    fn small_graph_is_single_level() {
        let g = grid2d(5, 5);
        let h = coarsen(&g, &Config::new(2, Preset::Eco)).unwrap();
        assert_eq!(h.len(), 1);
    }

    #[test]
    fn hierarchy_shrinks_and_conserves_weight() {
        let g = grid2d(32, 32);
        for preset in Preset::ALL {
            let h = coarsen(&g, &Config::new(2, preset).with_seed(3)).unwrap();
            assert!(h.len() > 1, "{preset}");
            assert!(h.coarsest().n() <= 60 || h.len() > 1);
            for i in 1..h.len() {
                assert!(h.graph(i).n() < h.graph(i - 1).n());
                assert!((h.graph(i).total_node_weight() - 1024.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn k_one_is_trivial() {
        let g = grid2d(4, 4);
        let out = v_cycle(&g, &Config::new(1, Preset::Eco)).unwrap();
        assert_eq!(out.partition.cut(), 0.0);
    }

    #[test]
    fn cliques_with_bridge() {
        let g = two_cliques(8);
        for preset in Preset::ALL {
            let out = v_cycle(&g, &Config::new(2, preset).with_seed(1)).unwrap();
            assert_eq!(out.partition.cut(), 1.0, "{preset}");
        }
    }
}
