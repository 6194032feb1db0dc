//! Adjacency-list text format.
//!
//! ```text
//! 0: 1 2 3
//! 1: 0 1
//! 2: 0
//! 3: 0
//! #behavior 1 loop-relay
//! #hidden 1 1
//! ```
//!
//! One line per vertex lists its neighbors; a vertex listing itself has a
//! loop. `#behavior <id> <kind> [phi]` overrides the default Grover
//! scattering (`kind` is one of `grover`, `transmissive`, `loop-relay`,
//! `dummy-loop`), and `#hidden <j> <k>` marks an edge as unmeasurable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexBehavior, VertexId};

fn parse_err(line: usize, reason: impl Into<String>) -> Error {
    Error::Parse { line, reason: reason.into() }
}

fn parse_vertex(tok: &str, line: usize) -> Result<VertexId> {
    tok.parse::<u32>()
        .map(VertexId)
        .map_err(|_| parse_err(line, format!("`{tok}` is not a vertex id")))
}

pub fn parse_adjacency_list(text: &str) -> Result<Graph> {
    // vertex -> (line number, neighbors)
    let mut lists: BTreeMap<VertexId, (usize, BTreeSet<VertexId>)> = BTreeMap::new();
    let mut behaviors = BTreeMap::new();
    let mut hidden = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        if let Some(directive) = body.strip_prefix('#') {
            let mut toks = directive.split_whitespace();
            match toks.next() {
                Some("behavior") => {
                    let v = parse_vertex(toks.next().ok_or_else(|| parse_err(line, "missing vertex"))?, line)?;
                    let kind = toks.next().ok_or_else(|| parse_err(line, "missing behavior kind"))?;
                    let b = match kind {
                        "grover" => VertexBehavior::GroverScatter,
                        "transmissive" => VertexBehavior::Transmissive,
                        "loop-relay" => VertexBehavior::LoopRelay,
                        "dummy-loop" => {
                            let tok = toks.next().ok_or_else(|| parse_err(line, "dummy-loop needs a phase"))?;
                            let phi = tok
                                .parse::<f64>()
                                .map_err(|_| parse_err(line, format!("`{tok}` is not a phase")))?;
                            VertexBehavior::DummyLoop { phi }
                        }
                        other => return Err(parse_err(line, format!("unknown behavior `{other}`"))),
                    };
                    if behaviors.insert(v, b).is_some() {
                        return Err(parse_err(line, format!("second behavior for vertex {v}")));
                    }
                }
                Some("hidden") => {
                    let a = parse_vertex(toks.next().ok_or_else(|| parse_err(line, "missing endpoint"))?, line)?;
                    let b = parse_vertex(toks.next().ok_or_else(|| parse_err(line, "missing endpoint"))?, line)?;
                    hidden.push(Edge::new(a, b));
                }
                Some(other) => return Err(parse_err(line, format!("unknown annotation `#{other}`"))),
                None => return Err(parse_err(line, "empty annotation")),
            }
            if toks.next().is_some() {
                return Err(parse_err(line, "trailing tokens after annotation"));
            }
            continue;
        }

        let (head, rest) = body
            .split_once(':')
            .ok_or_else(|| parse_err(line, "expected `id: neighbors...`"))?;
        let v = parse_vertex(head.trim(), line)?;
        let mut nbrs = BTreeSet::new();
        for tok in rest.split_whitespace() {
            let u = parse_vertex(tok, line)?;
            if !nbrs.insert(u) {
                return Err(parse_err(line, format!("vertex {v} lists {u} twice")));
            }
        }
        if lists.insert(v, (line, nbrs)).is_some() {
            return Err(parse_err(line, format!("vertex {v} listed twice")));
        }
    }

    let mut edges = BTreeSet::new();
    for (&v, (line, nbrs)) in &lists {
        for &u in nbrs {
            let back = lists.get(&u).is_some_and(|(_, other)| other.contains(&v));
            if !back {
                return Err(parse_err(*line, format!("{v} lists {u} but {u} does not list {v}")));
            }
            edges.insert(Edge::new(u, v));
        }
    }

    Graph::new(lists.keys().copied(), edges, behaviors, hidden)
}

/// Canonical form: vertices ascending, neighbors ascending, then the
/// non-default behaviors, then hidden edges.
pub fn write_adjacency_list(g: &Graph) -> String {
    let mut out = String::new();
    for v in g.vertices() {
        let _ = write!(out, "{v}:");
        for u in g.neighbors(v) {
            let _ = write!(out, " {u}");
        }
        out.push('\n');
    }
    for (v, b) in g.behaviors() {
        match b {
            VertexBehavior::GroverScatter => {}
            VertexBehavior::DummyLoop { phi } => {
                let _ = writeln!(out, "#behavior {v} dummy-loop {phi:?}");
            }
            other => {
                let _ = writeln!(out, "#behavior {v} {}", other.tag());
            }
        }
    }
    for e in g.hidden_edges() {
        let (a, b) = e.endpoints();
        let _ = writeln!(out, "#hidden {a} {b}");
    }
    out
}
