//! Reader and writer for the Metis/Chaco adjacency format.
//!
//! Header `n m [fmt [ncon]]`, then one line per node listing its 1-indexed
//! neighbors. `fmt` is `0`, `1` (edge weights follow each neighbor), `10`
//! (node weight leads the line) or `11` (both). Lines starting with `%` are
//! comments. An empty node line is an isolated node.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Format {
    node_weights: bool,
    edge_weights: bool,
}

fn parse_format(token: &str, line: usize) -> Result<Format> {
    let code: u32 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid fmt field '{token}'")))?;
    match code {
        0 | 1 | 10 | 11 => Ok(Format {
            node_weights: code >= 10,
            edge_weights: code % 10 == 1,
        }),
        _ => Err(Error::parse(
            line,
            format!("unsupported fmt {token} (expected 0, 1, 10 or 11)"),
        )),
    }
}

fn parse_weight(token: &str, line: usize, what: &str) -> Result<f64> {
    let w: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid {what} '{token}'")))?;
    if !w.is_finite() {
        return Err(Error::parse(line, format!("non-finite {what} '{token}'")));
    }
    Ok(w)
}

fn is_comment(line: &str) -> bool {
    line.trim_start().starts_with('%')
}

pub fn parse_graph(text: &str) -> Result<Graph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !is_comment(l));

    let (header_line, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty())
        .ok_or_else(|| Error::parse(1, "missing header"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 2 || fields.len() > 4 {
        return Err(Error::parse(header_line, "header must be 'n m [fmt [ncon]]'"));
    }
    let n: usize = fields[0]
        .parse()
        .map_err(|_| Error::parse(header_line, format!("invalid node count '{}'", fields[0])))?;
    let m: usize = fields[1]
        .parse()
        .map_err(|_| Error::parse(header_line, format!("invalid edge count '{}'", fields[1])))?;
    let format = match fields.get(2) {
        Some(tok) => parse_format(tok, header_line)?,
        None => Format {
            node_weights: false,
            edge_weights: false,
        },
    };
    if let Some(ncon) = fields.get(3) {
        if *ncon != "1" {
            return Err(Error::parse(
                header_line,
                format!("only one node constraint supported, got ncon={ncon}"),
            ));
        }
    }

    let mut node_weight = vec![1.0; n];
    // (u, v, w, line) for every adjacency entry
    let mut entries: Vec<(usize, usize, f64, usize)> = Vec::with_capacity(2 * m);
    let mut last_line = header_line;
    for u in 0..n {
        let (line_no, line) = lines.next().ok_or_else(|| {
            Error::parse(
                last_line + 1,
                format!("expected {n} node lines, found {u}"),
            )
        })?;
        last_line = line_no;
        let mut tokens = line.split_whitespace();
        if format.node_weights {
            let tok = tokens
                .next()
                .ok_or_else(|| Error::parse(line_no, "missing node weight"))?;
            let c = parse_weight(tok, line_no, "node weight")?;
            if c < 0.0 {
                return Err(Error::parse(line_no, format!("negative node weight {c}")));
            }
            node_weight[u] = c;
        }
        while let Some(tok) = tokens.next() {
            let idx: usize = tok
                .parse()
                .map_err(|_| Error::parse(line_no, format!("invalid neighbor index '{tok}'")))?;
            if idx == 0 || idx > n {
                return Err(Error::parse(
                    line_no,
                    format!("neighbor index {idx} out of range 1..={n}"),
                ));
            }
            let v = idx - 1;
            if v == u {
                return Err(Error::parse(line_no, format!("self-loop at node {idx}")));
            }
            let w = if format.edge_weights {
                let wt = tokens
                    .next()
                    .ok_or_else(|| Error::parse(line_no, format!("missing weight after neighbor {idx}")))?;
                parse_weight(wt, line_no, "edge weight")?
            } else {
                1.0
            };
            if w <= 0.0 {
                return Err(Error::parse(line_no, format!("non-positive edge weight {w}")));
            }
            entries.push((u, v, w, line_no));
        }
    }
    if let Some((line_no, _)) = lines.find(|(_, l)| !l.trim().is_empty()) {
        return Err(Error::parse(line_no, format!("data after the {n} node lines")));
    }

    entries.sort_by_key(|e| (e.0, e.1));
    for pair in entries.windows(2) {
        if (pair[0].0, pair[0].1) == (pair[1].0, pair[1].1) {
            return Err(Error::parse(
                pair[1].3,
                format!("duplicate neighbor {} of node {}", pair[1].1 + 1, pair[1].0 + 1),
            ));
        }
    }
    let mut edges = Vec::with_capacity(entries.len() / 2);
    for &(u, v, w, line_no) in &entries {
        let reverse = entries.binary_search_by_key(&(v, u), |e| (e.0, e.1));
        match reverse {
            Err(_) => {
                return Err(Error::parse(
                    line_no,
                    format!(
                        "asymmetric adjacency: node {} lists {} but not vice versa",
                        u + 1,
                        v + 1
                    ),
                ))
            }
            Ok(i) if entries[i].2 != w => {
                return Err(Error::parse(
                    line_no,
                    format!(
                        "asymmetric weight on edge ({}, {}): {} vs {}",
                        u + 1,
                        v + 1,
                        w,
                        entries[i].2
                    ),
                ))
            }
            Ok(_) => {}
        }
        if u < v {
            edges.push((u, v, w));
        }
    }
    if edges.len() != m {
        return Err(Error::parse(
            header_line,
            format!("header declares {m} edges but adjacency lists contain {}", edges.len()),
        ));
    }
    Graph::from_edges(node_weight, &edges)
}

pub fn read_graph(path: impl AsRef<Path>) -> Result<Graph> {
    let text = std::fs::read_to_string(path)?;
    parse_graph(&text)
}

/// Serializes `g`, emitting weight columns only when some weight differs from 1.
pub fn write_graph_string(g: &Graph) -> String {
    let edge_weights = g.edge_weights().iter().any(|&w| w != 1.0);
    let node_weights = g.node_weights().iter().any(|&c| c != 1.0);
    let fmt = match (node_weights, edge_weights) {
        (false, false) => "0",
        (false, true) => "1",
        (true, false) => "10",
        (true, true) => "11",
    };
    let mut out = String::new();
    let _ = writeln!(out, "{} {} {}", g.n(), g.m(), fmt);
    for v in 0..g.n() {
        let mut first = true;
        let mut sep = |out: &mut String| {
            if !first {
                out.push(' ');
            }
            first = false;
        };
        if node_weights {
            sep(&mut out);
            let _ = write!(out, "{}", g.node_weight(v));
        }
        for (u, _, w) in g.adjacent(v) {
            sep(&mut out);
            let _ = write!(out, "{}", u + 1);
            if edge_weights {
                let _ = write!(out, " {w}");
            }
        }
        out.push('\n');
    }
    out
}

pub fn write_graph(g: &Graph, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, write_graph_string(g))?;
    Ok(())
}

/// One block id per line, in node order.
pub fn write_partition_string(assignment: &[usize]) -> String {
    let mut out = String::with_capacity(assignment.len() * 3);
    for b in assignment {
        let _ = writeln!(out, "{b}");
    }
    out
}
