//! Benchmark fixtures shared by the criterion targets.

use mlpart_core::harness::generators::{grid2d, preferential_attachment};
use mlpart_core::harness::{generate_hard_mixture, MixtureParams};
use mlpart_core::Graph;

pub fn fixtures() -> Vec<(&'static str, Graph)> {
    let grid = grid2d(64, 64);
    let pa = preferential_attachment(2000, 2, 1);
    let mixture = generate_hard_mixture(
        &[grid2d(32, 32), preferential_attachment(1000, 2, 2)],
        &MixtureParams {
            seed: 3,
            ..Default::default()
        },
    )
    .expect("fixture mixture");
    vec![("grid64", grid), ("pa2000", pa), ("mixture", mixture)]
}
