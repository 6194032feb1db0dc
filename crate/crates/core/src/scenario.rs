//! Scenario parameters tying a graph family to its search procedure.

use std::fmt;

use serde::Serialize;

use crate::builders;
use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexId};
use crate::walk::InitialStateKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    StarLoop,
    #[serde(rename = "dummy-loops")]
    StarDummyLoops,
    StarClique,
    TwoStars,
    #[serde(rename = "bipartite")]
    BipartiteExtraEdge,
    /// Complete bipartite graph that may or may not carry the extra edge.
    BipartiteDetect,
}

impl Scenario {
    pub const ALL: [Scenario; 6] = [
        Scenario::StarLoop,
        Scenario::StarDummyLoops,
        Scenario::StarClique,
        Scenario::TwoStars,
        Scenario::BipartiteExtraEdge,
        Scenario::BipartiteDetect,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scenario::StarLoop => "star-loop",
            Scenario::StarDummyLoops => "dummy-loops",
            Scenario::StarClique => "star-clique",
            Scenario::TwoStars => "two-stars",
            Scenario::BipartiteExtraEdge => "bipartite",
            Scenario::BipartiteDetect => "bipartite-detect",
        }
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum ScenarioParams {
    StarLoop { n: usize },
    #[serde(rename = "dummy-loops")]
    StarDummyLoops { n: usize, phi: f64 },
    StarClique { n: usize, m: usize },
    TwoStars { n: usize },
    #[serde(rename = "bipartite")]
    BipartiteExtraEdge { n1: usize, n2: usize },
    BipartiteDetect { n1: usize, n2: usize },
}

impl ScenarioParams {
    pub fn scenario(&self) -> Scenario {
        match self {
            ScenarioParams::StarLoop { .. } => Scenario::StarLoop,
            ScenarioParams::StarDummyLoops { .. } => Scenario::StarDummyLoops,
            ScenarioParams::StarClique { .. } => Scenario::StarClique,
            ScenarioParams::TwoStars { .. } => Scenario::TwoStars,
            ScenarioParams::BipartiteExtraEdge { .. } => Scenario::BipartiteExtraEdge,
            ScenarioParams::BipartiteDetect { .. } => Scenario::BipartiteDetect,
        }
    }

    /// Builds the scenario graph (validating the parameters on the way).
    /// For [`Scenario::BipartiteDetect`] this is the plain complete bipartite
    /// graph, i.e. the "no anomaly" instance.
    pub fn build(&self) -> Result<Graph> {
        match *self {
            ScenarioParams::StarLoop { n } => builders::build_star_loop(n),
            ScenarioParams::StarDummyLoops { n, phi } => builders::build_star_dummy_loops(n, phi),
            ScenarioParams::StarClique { n, m } => builders::build_star_clique(n, m),
            ScenarioParams::TwoStars { n } => builders::build_two_stars(n),
            ScenarioParams::BipartiteExtraEdge { n1, n2 } => builders::build_bipartite_extra(n1, n2),
            ScenarioParams::BipartiteDetect { n1, n2 } => builders::build_complete_bipartite(n1, n2),
        }
    }

    /// Checks the parameters without building the graph.
    pub fn validate(&self) -> Result<()> {
        match *self {
            ScenarioParams::StarLoop { n } => builders::check_star(n),
            ScenarioParams::StarDummyLoops { n, phi } => builders::check_dummy(n, phi),
            ScenarioParams::StarClique { n, m } => builders::check_clique(n, m),
            ScenarioParams::TwoStars { n } => builders::check_two_stars(n),
            ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
                builders::check_bipartite(n1, n2)
            }
        }
    }

    /// The size parameter that controls the asymptotics: `n` for stars,
    /// `n1` for bipartite graphs.
    pub fn n_scale(&self) -> usize {
        match *self {
            ScenarioParams::StarLoop { n }
            | ScenarioParams::StarDummyLoops { n, .. }
            | ScenarioParams::StarClique { n, .. }
            | ScenarioParams::TwoStars { n } => n,
            ScenarioParams::BipartiteExtraEdge { n1, .. } | ScenarioParams::BipartiteDetect { n1, .. } => n1,
        }
    }

    /// Checks that `g` has exactly the edges and behaviors of this scenario.
    /// Hidden sets are not compared since they may be overridden. The
    /// detection variant accepts K(n1, n2) with or without the extra edge.
    pub fn check_graph(&self, g: &Graph) -> Result<()> {
        let candidates = match *self {
            ScenarioParams::BipartiteDetect { n1, n2 } => {
                vec![builders::build_complete_bipartite(n1, n2)?, builders::build_bipartite_extra(n1, n2)?]
            }
            _ => vec![self.build()?],
        };
        let same = |h: &Graph| {
            g.vertices().eq(h.vertices())
                && g.edges().eq(h.edges())
                && g.behaviors().eq(h.behaviors())
        };
        if candidates.iter().any(same) {
            Ok(())
        } else {
            Err(Error::ScenarioMismatch(format!(
                "graph ({} vertices, {} edges) is not a {} instance for {:?}",
                g.vertex_count(),
                g.edge_count(),
                self.scenario(),
                self
            )))
        }
    }

    /// The initial state the search for this scenario starts from.
    pub fn initial_state_kind(&self) -> InitialStateKind {
        match self {
            ScenarioParams::StarDummyLoops { .. } => InitialStateKind::UniformAllWithLoops,
            ScenarioParams::TwoStars { .. } => InitialStateKind::TwoStarSigned,
            _ => InitialStateKind::AntisymmetricUniform,
        }
    }

    /// Edges whose measurement identifies the anomaly.
    pub fn target_edges(&self) -> Vec<Edge> {
        let v = |x: usize| VertexId(x as u32);
        match *self {
            ScenarioParams::StarLoop { .. } | ScenarioParams::StarDummyLoops { .. } => {
                vec![Edge::new(v(0), v(1))]
            }
            ScenarioParams::StarClique { m, .. } => (1..=m).map(|j| Edge::new(v(0), v(j))).collect(),
            ScenarioParams::TwoStars { n } => vec![
                Edge::new(builders::TWO_STARS_CENTER_A, v(1)),
                Edge::new(builders::two_stars_center_b(n), v(1)),
            ],
            ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
                (1..=2)
                    .flat_map(|k| (n1 + 1..=n1 + n2).map(move |j| Edge::new(v(k), v(j))))
                    .collect()
            }
        }
    }
}
