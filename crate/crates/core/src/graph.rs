//! Graph data model for scattering walks.
//!
//! A [`Graph`] is an undirected simple graph that may carry at most one loop
//! per vertex. Every vertex has a [`VertexBehavior`] that decides how the walk
//! scatters there, and some edges can be marked hidden: a particle found on a
//! hidden edge reads as "not found".

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(transparent)]
pub struct VertexId(pub u32);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

/// Unordered vertex pair. `Edge::new(j, j)` is the loop at `j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Edge(VertexId, VertexId);

impl Edge {
    pub fn new(a: impl Into<VertexId>, b: impl Into<VertexId>) -> Self {
        let (a, b) = (a.into(), b.into());
        if a <= b {
            Edge(a, b)
        } else {
            Edge(b, a)
        }
    }

    pub fn endpoints(&self) -> (VertexId, VertexId) {
        (self.0, self.1)
    }

    pub fn is_loop(&self) -> bool {
        self.0 == self.1
    }

    pub fn touches(&self, v: VertexId) -> bool {
        self.0 == v || self.1 == v
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

/// Local scattering rule of a vertex.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VertexBehavior {
    /// `U|k,j> = -r|j,k> + t sum_{l != k} |j,l>` with `r = (n-2)/n`, `t = 2/n`.
    /// A degree-1 vertex reflects with coefficient +1.
    GroverScatter,
    /// Degree-2 vertex that passes the particle straight through.
    Transmissive,
    /// Spoke-plus-loop vertex: the incoming spoke feeds the loop, the loop
    /// feeds the outgoing spoke.
    LoopRelay,
    /// Spoke-plus-loop vertex that reflects the spoke with phase `e^{i phi}`
    /// and leaves the loop state fixed.
    DummyLoop { phi: f64 },
}

impl VertexBehavior {
    pub fn tag(&self) -> &'static str {
        match self {
            VertexBehavior::GroverScatter => "grover",
            VertexBehavior::Transmissive => "transmissive",
            VertexBehavior::LoopRelay => "loop-relay",
            VertexBehavior::DummyLoop { .. } => "dummy-loop",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Graph {
    vertices: BTreeSet<VertexId>,
    edges: BTreeSet<Edge>,
    behaviors: BTreeMap<VertexId, VertexBehavior>,
    hidden: BTreeSet<Edge>,
    adjacency: BTreeMap<VertexId, Vec<VertexId>>,
}

impl Graph {
    /// Validates and assembles a graph. Vertices without an explicit behavior
    /// default to [`VertexBehavior::GroverScatter`].
    pub fn new(
        vertices: impl IntoIterator<Item = VertexId>,
        edges: impl IntoIterator<Item = Edge>,
        behaviors: BTreeMap<VertexId, VertexBehavior>,
        hidden: impl IntoIterator<Item = Edge>,
    ) -> Result<Self> {
        let vertices: BTreeSet<VertexId> = vertices.into_iter().collect();
        if vertices.is_empty() {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }

        let mut edge_set = BTreeSet::new();
        for e in edges {
            let (a, b) = e.endpoints();
            for v in [a, b] {
                if !vertices.contains(&v) {
                    return Err(Error::InvalidGraph(format!("edge {e} uses unknown vertex {v}")));
                }
            }
            if !edge_set.insert(e) {
                let what = if e.is_loop() { "second loop" } else { "parallel edge" };
                return Err(Error::InvalidGraph(format!("{what} {e}")));
            }
        }

        let mut adjacency: BTreeMap<VertexId, Vec<VertexId>> =
            vertices.iter().map(|&v| (v, Vec::new())).collect();
        for e in &edge_set {
            let (a, b) = e.endpoints();
            adjacency.get_mut(&a).unwrap().push(b);
            if !e.is_loop() {
                adjacency.get_mut(&b).unwrap().push(a);
            }
        }
        for nbrs in adjacency.values_mut() {
            nbrs.sort_unstable();
        }

        let mut full_behaviors = BTreeMap::new();
        for &v in &vertices {
            full_behaviors.insert(v, VertexBehavior::GroverScatter);
        }
        for (v, b) in behaviors {
            if !vertices.contains(&v) {
                return Err(Error::InvalidGraph(format!("behavior given for unknown vertex {v}")));
            }
            full_behaviors.insert(v, b);
        }

        let hidden: BTreeSet<Edge> = hidden.into_iter().collect();
        if let Some(e) = hidden.iter().find(|e| !edge_set.contains(e)) {
            return Err(Error::InvalidGraph(format!("hidden edge {e} is not an edge")));
        }

        let g = Graph { vertices, edges: edge_set, behaviors: full_behaviors, hidden, adjacency };
        g.check_connected()?;
        for (&v, b) in &g.behaviors {
            g.check_behavior(v, b)?;
        }
        Ok(g)
    }

    fn check_connected(&self) -> Result<()> {
        let start = *self.vertices.iter().next().unwrap();
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &u in &self.adjacency[&v] {
                if seen.insert(u) {
                    queue.push_back(u);
                }
            }
        }
        if seen.len() != self.vertices.len() {
            let missing = self.vertices.iter().find(|v| !seen.contains(v)).unwrap();
            return Err(Error::InvalidGraph(format!(
                "graph is not connected (vertex {missing} unreachable from {start})"
            )));
        }
        Ok(())
    }

    fn check_behavior(&self, v: VertexId, b: &VertexBehavior) -> Result<()> {
        let has_loop = self.has_loop(v);
        let spokes = self.adjacency[&v].iter().filter(|&&u| u != v).count();
        let fail = |reason: &str| Err(Error::BehaviorMismatch { vertex: v.0, reason: reason.into() });
        match b {
            VertexBehavior::GroverScatter => Ok(()),
            VertexBehavior::Transmissive if has_loop || spokes != 2 => {
                fail("transmissive needs exactly two non-loop edges and no loop")
            }
            VertexBehavior::LoopRelay if !has_loop || spokes != 1 => {
                fail("loop relay needs exactly one non-loop edge and one loop")
            }
            VertexBehavior::DummyLoop { .. } if !has_loop || spokes != 1 => {
                fail("dummy loop needs exactly one non-loop edge and one loop")
            }
            VertexBehavior::DummyLoop { phi } if !phi.is_finite() => fail("dummy loop phase must be finite"),
            _ => Ok(()),
        }
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn loop_count(&self) -> usize {
        self.edges.iter().filter(|e| e.is_loop()).count()
    }

    pub fn has_edge(&self, e: Edge) -> bool {
        self.edges.contains(&e)
    }

    pub fn has_loop(&self, v: VertexId) -> bool {
        self.edges.contains(&Edge::new(v, v))
    }

    /// Sorted neighbors of `v`; a loop contributes `v` itself once.
    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        self.adjacency.get(&v).map(Vec::as_slice).unwrap_or(&[])
    }

    /// Number of scattering ports at `v` (a loop is one port).
    pub fn port_count(&self, v: VertexId) -> usize {
        self.neighbors(v).len()
    }

    /// Graph-theoretic degree; a loop counts twice.
    pub fn degree(&self, v: VertexId) -> usize {
        self.port_count(v) + usize::from(self.has_loop(v))
    }

    pub fn behavior(&self, v: VertexId) -> VertexBehavior {
        self.behaviors.get(&v).copied().unwrap_or(VertexBehavior::GroverScatter)
    }

    pub fn behaviors(&self) -> impl Iterator<Item = (VertexId, VertexBehavior)> + '_ {
        self.behaviors.iter().map(|(&v, &b)| (v, b))
    }

    pub fn hidden_edges(&self) -> impl Iterator<Item = Edge> + '_ {
        self.hidden.iter().copied()
    }

    pub fn is_hidden(&self, e: Edge) -> bool {
        self.hidden.contains(&e)
    }

    fn explicit_behaviors(&self) -> BTreeMap<VertexId, VertexBehavior> {
        self.behaviors.clone()
    }

    /// Same graph with a different hidden-edge set.
    pub fn with_hidden(&self, hidden: impl IntoIterator<Item = Edge>) -> Result<Graph> {
        Graph::new(self.vertices(), self.edges(), self.explicit_behaviors(), hidden)
    }

    /// Same graph plus one more edge. Used to build negative controls.
    pub fn with_extra_edge(&self, e: Edge) -> Result<Graph> {
        Graph::new(
            self.vertices(),
            self.edges().chain(std::iter::once(e)),
            self.explicit_behaviors(),
            self.hidden_edges(),
        )
    }
}
