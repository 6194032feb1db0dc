//! Builders for the graph families studied here.
//!
//! All builders label vertices with contiguous integers. Star-type graphs put
//! the center at vertex 0; bipartite graphs use `1..=n1` for the first set and
//! `n1+1..=n1+n2` for the second.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexBehavior, VertexId};

fn vid(v: usize) -> VertexId {
    VertexId(v as u32)
}

fn require(cond: bool, field: &'static str, reason: impl Into<String>) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { field, reason: reason.into() })
    }
}

/// Spoke edges `{0, j}` for `j = 1..=n`.
fn spokes(n: usize) -> impl Iterator<Item = Edge> {
    (1..=n).map(|j| Edge::new(vid(0), vid(j)))
}

pub(crate) fn check_star(n: usize) -> Result<()> {
    require(n >= 3, "n", format!("star needs n >= 3, got {n}"))
}

pub(crate) fn check_dummy(n: usize, phi: f64) -> Result<()> {
    check_star(n)?;
    require(phi.is_finite(), "phi", "phase must be finite")
}

pub(crate) fn check_clique(n: usize, m: usize) -> Result<()> {
    require(m >= 2, "m", format!("clique needs m >= 2, got {m}"))?;
    require(m < n, "m", format!("clique size must be below n = {n}, got {m}"))
}

pub(crate) fn check_two_stars(n: usize) -> Result<()> {
    require(n >= 3, "n", format!("two stars need n >= 3, got {n}"))
}

/// Star with `n` spokes and one hidden loop at vertex 1.
pub fn build_star_loop(n: usize) -> Result<Graph> {
    check_star(n)?;
    let looped = Edge::new(vid(1), vid(1));
    let behaviors = BTreeMap::from([(vid(1), VertexBehavior::LoopRelay)]);
    Graph::new((0..=n).map(vid), spokes(n).chain([looped]), behaviors, [looped])
}

/// Star with a loop on every external vertex; the loop at vertex 1 is the
/// dummy that reflects with phase `e^{i phi}`. All loops are accessible.
pub fn build_star_dummy_loops(n: usize, phi: f64) -> Result<Graph> {
    check_dummy(n, phi)?;
    let loops = (1..=n).map(|j| Edge::new(vid(j), vid(j)));
    let mut behaviors: BTreeMap<VertexId, VertexBehavior> =
        (2..=n).map(|j| (vid(j), VertexBehavior::LoopRelay)).collect();
    behaviors.insert(vid(1), VertexBehavior::DummyLoop { phi });
    Graph::new((0..=n).map(vid), spokes(n).chain(loops), behaviors, [])
}

/// Star with `n` spokes whose externals `1..=m` form a clique. Clique edges
/// are hidden.
pub fn build_star_clique(n: usize, m: usize) -> Result<Graph> {
    check_clique(n, m)?;
    let clique: Vec<Edge> = (1..=m)
        .flat_map(|j| (j + 1..=m).map(move |k| Edge::new(vid(j), vid(k))))
        .collect();
    Graph::new((0..=n).map(vid), spokes(n).chain(clique.clone()), BTreeMap::new(), clique)
}

/// Center of the first star in [`build_two_stars`].
pub const TWO_STARS_CENTER_A: VertexId = VertexId(0);

/// Center of the second star in [`build_two_stars`].
pub fn two_stars_center_b(n: usize) -> VertexId {
    vid(2 * n)
}

/// Two stars with `n` spokes each sharing external vertex 1. Center A is
/// vertex 0 with externals `1..=n`; center B is vertex `2n` with externals
/// `1` and `n+1..=2n-1`.
pub fn build_two_stars(n: usize) -> Result<Graph> {
    check_two_stars(n)?;
    let a = TWO_STARS_CENTER_A;
    let b = two_stars_center_b(n);
    let edges = (1..=n)
        .map(|j| Edge::new(a, vid(j)))
        .chain(std::iter::once(Edge::new(b, vid(1))))
        .chain((n + 1..2 * n).map(|j| Edge::new(b, vid(j))));
    let behaviors = BTreeMap::from([(vid(1), VertexBehavior::Transmissive)]);
    Graph::new((0..=2 * n).map(vid), edges, behaviors, [])
}

fn bipartite_edges(n1: usize, n2: usize) -> impl Iterator<Item = Edge> {
    (1..=n1).flat_map(move |k| (n1 + 1..=n1 + n2).map(move |j| Edge::new(vid(k), vid(j))))
}

pub(crate) fn check_bipartite(n1: usize, n2: usize) -> Result<()> {
    require(n1 >= 3, "n1", format!("first set needs n1 >= 3, got {n1}"))?;
    require(n2 >= 2, "n2", format!("second set needs n2 >= 2, got {n2}"))
}

/// Complete bipartite graph K(n1, n2) without any extra edge.
pub fn build_complete_bipartite(n1: usize, n2: usize) -> Result<Graph> {
    check_bipartite(n1, n2)?;
    Graph::new((1..=n1 + n2).map(vid), bipartite_edges(n1, n2), BTreeMap::new(), [])
}

/// K(n1, n2) plus the hidden edge `{1, 2}` inside the first set.
pub fn build_bipartite_extra(n1: usize, n2: usize) -> Result<Graph> {
    check_bipartite(n1, n2)?;
    let extra = Edge::new(vid(1), vid(2));
    Graph::new(
        (1..=n1 + n2).map(vid),
        bipartite_edges(n1, n2).chain([extra]),
        BTreeMap::new(),
        [extra],
    )
}
