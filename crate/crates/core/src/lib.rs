//! Multilevel k-way graph partitioning with matching-based and
//! aggregation-based coarsening.
//!
//! ```
//! use mlpart_core::{v_cycle, Config, Preset};
//! use mlpart_core::harness::generators::grid2d;
//!
//! let g = grid2d(16, 16);
//! let out = v_cycle(&g, &Config::new(2, Preset::Eco).with_seed(1)).unwrap();
//! assert!(out.partition.is_balanced());
//! ```

pub mod algdist;
pub mod amg;
pub mod contract;
pub mod error;
pub mod graph;
pub mod harness;
pub mod initial;
pub mod io;
pub mod matching;
pub mod multilevel;
pub mod partition;
pub mod refine;
pub mod rng;

pub use algdist::{algebraic_distances, AlgebraicDistances, RelaxationParams};
pub use amg::{AmgParams, InterpolationOperator};
pub use contract::{contract_matching, MatchingMap};
pub use error::{Error, Result};
pub use graph::Graph;
pub use initial::{normalize_and_round, CoarsestPolicy};
pub use io::{parse_graph, read_graph, write_graph, write_graph_string, write_partition_string};
pub use matching::{EdgeRating, MatchingSchedule};
pub use multilevel::{
    coarsen, f_cycle, iterated_v_cycles, partition_graph, v_cycle, Config, CycleKind, CycleStats, Hierarchy,
    Outcome, Preset,
};
pub use partition::{compute_l_max, cut, Partition};
pub use refine::PenaltyForm;
