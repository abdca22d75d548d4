use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use mlpart_core::harness::generators::{grid2d, preferential_attachment, two_cliques};
use mlpart_core::{cut, read_graph, write_graph};

fn mlpart(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mlpart"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn blocks(text: &str) -> Vec<usize> {
    text.lines().map(|l| l.parse().unwrap()).collect()
}

#[test]
fn partition_writes_one_block_per_line() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("grid.graph");
    let part = dir.path().join("grid.part");
    write_graph(&grid2d(12, 12), &graph).unwrap();
    for preset in ["eco", "eco-alg", "amg-eco", "strong", "amg", "f-cycle"] {
        let out = mlpart(&[
            "partition", path(&graph), "--k", "4", "--preset", preset, "--seed", "3", "--iterations", "2",
            "--output", path(&part),
        ]);
        assert!(out.status.success(), "{preset}: {}", String::from_utf8_lossy(&out.stderr));
        let assignment = blocks(&fs::read_to_string(&part).unwrap());
        assert_eq!(assignment.len(), 144);
        assert!((0..4).all(|b| assignment.contains(&b)));
        assert!(assignment.iter().all(|&b| b < 4));
    }
}

#[test]
fn partition_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("pa.graph");
    write_graph(&preferential_attachment(400, 2, 5), &graph).unwrap();
    let run = |preset: &str| mlpart(&["partition", path(&graph), "--k", "3", "--preset", preset, "--seed", "8"]).stdout;
    for preset in ["eco", "amg-eco", "f-cycle"] {
        assert_eq!(run(preset), run(preset), "{preset}");
    }
}

#[test]
fn weighted_graph_is_balanced_with_zero_epsilon() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("heavy.graph");
    fs::write(&graph, "4 3 11\n10 2 1\n1 1 1 3 4\n1 2 4 4 2\n1 3 2\n").unwrap();
    let out = mlpart(&["partition", path(&graph), "--k", "2", "--epsilon", "0"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let assignment = blocks(&String::from_utf8(out.stdout).unwrap());
    // the heavy node sits alone and the cheapest edge is cut
    assert_eq!(assignment.iter().filter(|&&b| b == assignment[0]).count(), 1);
}

#[test]
fn malformed_graph_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("bad.graph");
    fs::write(&graph, "2 1 0\n2\n3\n").unwrap();
    let out = mlpart(&["partition", path(&graph), "--k", "2"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

#[test]
fn rho_lists_every_edge_once() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("cliques.graph");
    write_graph(&two_cliques(4), &graph).unwrap();
    let out = mlpart(&["rho", path(&graph), "--seed", "2"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<(usize, usize, f64)> = text
        .lines()
        .map(|l| {
            let f: Vec<&str> = l.split(' ').collect();
            (f[0].parse().unwrap(), f[1].parse().unwrap(), f[2].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 13);
    assert!(rows.iter().all(|&(u, v, r)| 1 <= u && u < v && v <= 8 && r >= 0.0));
    let bridge = rows.iter().find(|r| (r.0, r.1) == (4, 5)).unwrap().2;
    assert!(rows.iter().filter(|r| r.0 != 4 || r.1 != 5).any(|r| r.2 < bridge));
}

#[test]
fn export_coarsest_has_integer_edge_weights() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("grid.graph");
    let coarse = dir.path().join("coarse.graph");
    write_graph(&grid2d(30, 30), &graph).unwrap();
    let out = mlpart(&["export-coarsest", path(&graph), "--k", "2", "--preset", "amg-eco", "--output", path(&coarse)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let g = read_graph(&coarse).unwrap();
    assert!(g.n() < 900);
    assert!(g.edge_weights().iter().all(|&w| w >= 1.0 && w.fract() == 0.0));
}

#[test]
fn matching_overrides_are_validated() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("grid.graph");
    write_graph(&grid2d(20, 20), &graph).unwrap();
    let ok = mlpart(&["partition", path(&graph), "--matching", "gpa", "--rating", "exalg", "--penalty-form", "printed"]);
    assert!(ok.status.success());
    let bad = mlpart(&["partition", path(&graph), "--preset", "amg", "--matching", "random"]);
    assert!(!bad.status.success());
    let bad = mlpart(&["partition", path(&graph), "--preset", "bogus"]);
    assert!(!bad.status.success());
}

#[test]
fn gen_hard_and_bench_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let center = dir.path().join("grid.graph");
    let other = dir.path().join("pa.graph");
    write_graph(&grid2d(20, 20), &center).unwrap();
    let out = mlpart(&["gen-graph", "pa", "--n", "400", "--attach", "2", "--seed", "4", "--out", path(&other)]);
    assert!(out.status.success());
    let spec = dir.path().join("mix.toml");
    fs::write(&spec, "components = [\"grid.graph\", \"pa.graph\"]\nfraction = 0.03\nedges_per_node = 2\nseed = 11\n").unwrap();
    let mix = dir.path().join("mix.graph");
    let out = mlpart(&["gen-hard", "--spec", path(&spec), "--out", path(&mix)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let g = read_graph(&mix).unwrap();
    let pa = read_graph(&other).unwrap();
    let inter = g.m() - 760 - pa.m();
    assert!((inter as f64) < 0.03 * pa.m() as f64);

    let report = |name: &str| {
        let csv = dir.path().join(name);
        let out = mlpart(&[
            "bench", "--graphs", path(&mix), path(&center), "--presets", "eco,amg-eco", "--ks", "2,4", "--seeds",
            "1..3", "--no-timings", "--out", path(&csv),
        ]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        (
            fs::read_to_string(&csv).unwrap(),
            fs::read_to_string(csv.with_extension("ratios.csv")).unwrap(),
        )
    };
    let (a, ra) = report("a.csv");
    let (b, rb) = report("b.csv");
    assert_eq!(a, b);
    assert_eq!(ra, rb);
    assert!(a.starts_with("graph,preset,k,seed,cut,cut_pre_final,status\n"));
    assert_eq!(a.lines().count(), 1 + 2 * 2 * 2 * 3);
    assert_eq!(ra.lines().count(), 1 + 2 * 2 * 2);

    // stored cuts match the graph
    let part = dir.path().join("mix.part");
    let out = mlpart(&["partition", path(&mix), "--k", "2", "--seed", "1", "--output", path(&part)]);
    assert!(out.status.success());
    let assignment = blocks(&fs::read_to_string(&part).unwrap());
    let row = a.lines().find(|l| l.starts_with("mix,ECO,2,1,")).unwrap();
    let reported: f64 = row.split(',').nth(4).unwrap().parse().unwrap();
    assert_eq!(reported, cut(&g, &assignment));
}
