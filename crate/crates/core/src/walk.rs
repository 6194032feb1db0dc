//! Directed-edge Hilbert space, the one-step unitary and measurement.
//!
//! The basis is the set of directed edge states `|tail, head>` sorted by
//! `(tail, head)`; a loop at `j` contributes the single state `|j, j>`.
//!
//! The step operator is stored column-major as one scattering block per
//! vertex: the block maps the states entering the vertex onto the states
//! leaving it. Grover blocks are kept in factored form (`out_l = t * S - a_l`
//! where `S` is the summed incoming amplitude), so one application costs
//! `O(dim)` no matter how large the vertex degrees are.

use std::collections::{BTreeMap, HashMap};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{Edge, Graph, VertexBehavior, VertexId};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DirectedEdgeState {
    pub tail: VertexId,
    pub head: VertexId,
}

impl DirectedEdgeState {
    pub fn new(tail: impl Into<VertexId>, head: impl Into<VertexId>) -> Self {
        DirectedEdgeState { tail: tail.into(), head: head.into() }
    }

    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn edge(&self) -> Edge {
        Edge::new(self.tail, self.head)
    }
}

/// Canonical ordered basis: both orientations of each edge, one state per loop.
pub fn enumerate_states(g: &Graph) -> Vec<DirectedEdgeState> {
    let mut states = Vec::with_capacity(2 * g.edge_count());
    for e in g.edges() {
        let (a, b) = e.endpoints();
        states.push(DirectedEdgeState::new(a, b));
        if !e.is_loop() {
            states.push(DirectedEdgeState::new(b, a));
        }
    }
    states.sort_unstable();
    states
}

#[derive(Clone, Debug)]
pub struct StateSpace {
    states: Vec<DirectedEdgeState>,
    index: HashMap<DirectedEdgeState, usize>,
}

impl StateSpace {
    pub fn new(g: &Graph) -> Self {
        let states = enumerate_states(g);
        let index = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        StateSpace { states, index }
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[DirectedEdgeState] {
        &self.states
    }

    pub fn state(&self, i: usize) -> DirectedEdgeState {
        self.states[i]
    }

    pub fn index_of(&self, tail: impl Into<VertexId>, head: impl Into<VertexId>) -> Option<usize> {
        self.index.get(&DirectedEdgeState::new(tail, head)).copied()
    }

    /// `index_of` that reports a missing state as a scenario mismatch.
    pub fn require(&self, tail: impl Into<VertexId>, head: impl Into<VertexId>) -> Result<usize> {
        let s = DirectedEdgeState::new(tail, head);
        self.index
            .get(&s)
            .copied()
            .ok_or_else(|| Error::ScenarioMismatch(format!("graph has no state |{},{}>", s.tail, s.head)))
    }
}

/// Complex amplitudes over a [`StateSpace`], in its canonical order.
///
/// Walk states are unit-norm; the same type also carries unnormalized
/// vectors (projections, differences) where that is convenient.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<C64>,
}

impl StateVector {
    pub fn from_amplitudes(amplitudes: Vec<C64>) -> Self {
        StateVector { amplitudes }
    }

    pub fn zeros(dim: usize) -> Self {
        StateVector { amplitudes: vec![ZERO; dim] }
    }

    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.amplitudes[i] = ONE;
        v
    }

    /// Rescales to unit norm; fails on the zero vector.
    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if norm < 1e-300 {
            return Err(Error::IncompatibleInitialState("vector has zero norm".into()));
        }
        for a in &mut self.amplitudes {
            *a /= norm;
        }
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [C64] {
        &mut self.amplitudes
    }

    pub fn amplitude(&self, i: usize) -> C64 {
        self.amplitudes[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(C64::norm_sqr).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// `self += c * other`
    pub fn add_scaled(&mut self, c: C64, other: &StateVector) {
        for (a, b) in self.amplitudes.iter_mut().zip(&other.amplitudes) {
            *a += c * b;
        }
    }

    pub fn max_abs_diff(&self, other: &StateVector) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
enum LocalRule {
    /// `out_l = t * sum(in) - in_l`; reflection `-r = 1 - t`, transmission `t`.
    Grover { t: f64 },
    Relay { spoke: usize, looped: usize },
    Dummy { spoke: usize, looped: usize, phase: C64 },
}

#[derive(Clone, Debug)]
struct VertexScatter {
    vertex: VertexId,
    /// `inputs[p]` is the state `|nbr_p, v>`, `outputs[p]` the state `|v, nbr_p>`.
    inputs: Vec<usize>,
    outputs: Vec<usize>,
    rule: LocalRule,
}

impl VertexScatter {
    fn apply(&self, input: &[C64], out: &mut [C64]) {
        match self.rule {
            LocalRule::Grover { t } => {
                let total: C64 = self.inputs.iter().map(|&i| input[i]).sum();
                let scaled = total * t;
                for (&i, &o) in self.inputs.iter().zip(&self.outputs) {
                    out[o] = scaled - input[i];
                }
            }
            LocalRule::Relay { spoke, looped } => {
                out[self.outputs[looped]] = input[self.inputs[spoke]];
                out[self.outputs[spoke]] = input[self.inputs[looped]];
            }
            LocalRule::Dummy { spoke, looped, phase } => {
                out[self.outputs[spoke]] = phase * input[self.inputs[spoke]];
                out[self.outputs[looped]] = input[self.inputs[looped]];
            }
        }
    }

    /// Column of the block for input port `p`, as `(output state, coefficient)`.
    fn column(&self, p: usize) -> Vec<(usize, C64)> {
        match self.rule {
            LocalRule::Grover { t } => self
                .outputs
                .iter()
                .enumerate()
                .map(|(q, &o)| (o, C64::from(if q == p { t - 1.0 } else { t })))
                .collect(),
            LocalRule::Relay { spoke, looped } => {
                let to = if p == spoke { looped } else { spoke };
                vec![(self.outputs[to], ONE)]
            }
            LocalRule::Dummy { spoke, phase, .. } => {
                let c = if p == spoke { phase } else { ONE };
                vec![(self.outputs[p], c)]
            }
        }
    }

    /// Closed-form deviation of the block from unitarity.
    fn local_deviation(&self) -> f64 {
        match self.rule {
            // (tJ - I)^2 = (n t^2 - 2t) J + I
            LocalRule::Grover { t } => (self.inputs.len() as f64 * t * t - 2.0 * t).abs(),
            LocalRule::Relay { .. } => 0.0,
            LocalRule::Dummy { phase, .. } => (phase.norm() - 1.0).abs(),
        }
    }
}

/// The one-step unitary `U` of the scattering walk on a graph.
#[derive(Clone, Debug)]
pub struct StepOperator {
    space: StateSpace,
    blocks: Vec<VertexScatter>,
    /// For each input state: (block index, port position).
    input_port: Vec<(usize, usize)>,
}

pub fn build_step_operator(g: &Graph) -> Result<StepOperator> {
    let space = StateSpace::new(g);
    if space.dim() == 0 {
        return Err(Error::InvalidGraph("graph has no edges".into()));
    }
    let mut blocks = Vec::with_capacity(g.vertex_count());
    let mut input_port = vec![(usize::MAX, usize::MAX); space.dim()];
    let mut output_seen = vec![false; space.dim()];

    for v in g.vertices() {
        let nbrs = g.neighbors(v);
        let inputs: Vec<usize> = nbrs.iter().map(|&u| space.index_of(u, v).unwrap()).collect();
        let outputs: Vec<usize> = nbrs.iter().map(|&u| space.index_of(v, u).unwrap()).collect();
        let loop_port = nbrs.iter().position(|&u| u == v);
        let mismatch = |reason: &str| Error::BehaviorMismatch { vertex: v.0, reason: reason.into() };

        let rule = match g.behavior(v) {
            VertexBehavior::GroverScatter => LocalRule::Grover { t: 2.0 / nbrs.len() as f64 },
            VertexBehavior::Transmissive => {
                if nbrs.len() != 2 || loop_port.is_some() {
                    return Err(mismatch("transmissive vertex must have two non-loop edges"));
                }
                LocalRule::Grover { t: 1.0 }
            }
            VertexBehavior::LoopRelay | VertexBehavior::DummyLoop { .. } => {
                let looped = loop_port.ok_or_else(|| mismatch("loop behavior on a vertex without a loop"))?;
                if nbrs.len() != 2 {
                    return Err(mismatch("loop behavior needs exactly one spoke"));
                }
                let spoke = 1 - looped;
                match g.behavior(v) {
                    VertexBehavior::DummyLoop { phi } => {
                        LocalRule::Dummy { spoke, looped, phase: C64::from_polar(1.0, phi) }
                    }
                    _ => LocalRule::Relay { spoke, looped },
                }
            }
        };

        let block_idx = blocks.len();
        for (p, &i) in inputs.iter().enumerate() {
            input_port[i] = (block_idx, p);
        }
        for &o in &outputs {
            output_seen[o] = true;
        }
        blocks.push(VertexScatter { vertex: v, inputs, outputs, rule });
    }

    debug_assert!(input_port.iter().all(|&(b, _)| b != usize::MAX));
    debug_assert!(output_seen.iter().all(|&s| s));

    let op = StepOperator { space, blocks, input_port };
    let local = op.blocks.iter().map(VertexScatter::local_deviation).fold(0.0, f64::max);
    if local > 1e-12 {
        return Err(Error::InvalidGraph(format!("local scattering rule is not unitary ({local:.3e})")));
    }
    Ok(op)
}

impl StepOperator {
    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Sparse column `U|state_i>`.
    pub fn column(&self, i: usize) -> Vec<(usize, C64)> {
        let (b, p) = self.input_port[i];
        self.blocks[b].column(p)
    }

    /// Vertex that scatters input state `i` (its head).
    pub fn scattering_vertex(&self, i: usize) -> VertexId {
        self.blocks[self.input_port[i].0].vertex
    }

    pub fn apply_into(&self, input: &[C64], out: &mut [C64]) {
        for block in &self.blocks {
            block.apply(input, out);
        }
    }

    pub fn apply(&self, s: &StateVector) -> Result<StateVector> {
        self.check_dim(s)?;
        let mut out = StateVector::zeros(self.dim());
        self.apply_into(s.amplitudes(), out.amplitudes_mut());
        Ok(out)
    }

    fn check_dim(&self, s: &StateVector) -> Result<()> {
        if s.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: s.dim() });
        }
        Ok(())
    }

    /// `max |U^dagger U - I|` computed from the explicit columns.
    ///
    /// Columns of states entering different vertices have disjoint supports
    /// (every state leaves exactly one vertex), so only the per-vertex Gram
    /// blocks can differ from the identity. Cost is `sum_v deg(v)^3`.
    pub fn unitarity_deviation(&self) -> f64 {
        let mut owner = vec![usize::MAX; self.dim()];
        for (b, block) in self.blocks.iter().enumerate() {
            for &o in &block.outputs {
                if owner[o] != usize::MAX {
                    return f64::INFINITY;
                }
                owner[o] = b;
            }
        }
        let mut worst = 0.0f64;
        for block in &self.blocks {
            let cols: Vec<Vec<(usize, C64)>> = (0..block.inputs.len()).map(|p| block.column(p)).collect();
            let dense: Vec<HashMap<usize, C64>> = cols.iter().map(|c| c.iter().copied().collect()).collect();
            for (i, ci) in cols.iter().enumerate() {
                for (j, cj) in dense.iter().enumerate() {
                    let g: C64 = ci.iter().map(|(k, a)| a.conj() * cj.get(k).copied().unwrap_or(ZERO)).sum();
                    let target = if i == j { ONE } else { ZERO };
                    worst = worst.max((g - target).norm());
                }
            }
        }
        worst
    }

    /// Dense matrix of `U`. Meant for small test oracles.
    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for i in 0..self.dim() {
            for (o, c) in self.column(i) {
                m[(o, i)] = c;
            }
        }
        m
    }
}

/// `U^n s` by repeated sparse application.
pub fn evolve(op: &StepOperator, s: &StateVector, n: u64) -> Result<StateVector> {
    op.check_dim(s)?;
    let mut cur = s.amplitudes().to_vec();
    let mut next = vec![ZERO; cur.len()];
    for _ in 0..n {
        op.apply_into(&cur, &mut next);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(StateVector::from_amplitudes(cur))
}

#[derive(Clone, Debug, PartialEq)]
pub enum InitialStateKind {
    /// `sum (|u,v> - |v,u>)` over accessible non-loop edges, where `u` is the
    /// endpoint with more ports (ties: the larger vertex id).
    AntisymmetricUniform,
    /// Equal superposition of every directed edge state, loops included.
    UniformAllWithLoops,
    /// Two-stars only: all states of star A minus all states of star B.
    TwoStarSigned,
    /// Two-stars only: states leaving center A minus states leaving center B.
    TwoStarOutgoingSigned,
    /// Arbitrary amplitudes, normalized on construction.
    Custom(Vec<(DirectedEdgeState, C64)>),
}

/// The two centers `(A, B)` of a two-stars graph, `A` the smaller id.
pub fn two_star_centers(g: &Graph) -> Result<(VertexId, VertexId)> {
    let hubs: Vec<VertexId> = g.vertices().filter(|&v| g.port_count(v) >= 3).collect();
    let bad = |why: &str| Error::IncompatibleInitialState(format!("not a two-stars graph: {why}"));
    if hubs.len() != 2 {
        return Err(bad("need exactly two centers"));
    }
    let (a, b) = (hubs[0], hubs[1]);
    let shared = g
        .vertices()
        .filter(|&v| g.neighbors(v) == [a, b] || g.neighbors(v) == [b, a])
        .count();
    if shared != 1 || g.has_edge(Edge::new(a, b)) {
        return Err(bad("centers must share exactly one external vertex"));
    }
    Ok((a, b))
}

pub fn make_initial_state(g: &Graph, space: &StateSpace, kind: &InitialStateKind) -> Result<StateVector> {
    let mut v = StateVector::zeros(space.dim());
    match kind {
        InitialStateKind::AntisymmetricUniform => {
            for e in g.edges().filter(|e| !e.is_loop() && !g.is_hidden(*e)) {
                let (a, b) = e.endpoints();
                let a_emits = (g.port_count(a), a) > (g.port_count(b), b);
                let (from, to) = if a_emits { (a, b) } else { (b, a) };
                v.amplitudes_mut()[space.require(from, to)?] = ONE;
                v.amplitudes_mut()[space.require(to, from)?] = -ONE;
            }
        }
        InitialStateKind::UniformAllWithLoops => {
            v.amplitudes_mut().fill(ONE);
        }
        InitialStateKind::TwoStarSigned => {
            let (a, b) = two_star_centers(g)?;
            for (i, s) in space.states().iter().enumerate() {
                let touches_a = s.tail == a || s.head == a;
                let touches_b = s.tail == b || s.head == b;
                v.amplitudes_mut()[i] = match (touches_a, touches_b) {
                    (true, false) => ONE,
                    (false, true) => -ONE,
                    _ => return Err(Error::IncompatibleInitialState(format!("state |{},{}> is in neither star", s.tail, s.head))),
                };
            }
        }
        InitialStateKind::TwoStarOutgoingSigned => {
            let (a, b) = two_star_centers(g)?;
            for (i, s) in space.states().iter().enumerate() {
                if s.tail == a {
                    v.amplitudes_mut()[i] = ONE;
                } else if s.tail == b {
                    v.amplitudes_mut()[i] = -ONE;
                }
            }
        }
        InitialStateKind::Custom(entries) => {
            for (s, c) in entries {
                let i = space
                    .index_of(s.tail, s.head)
                    .ok_or_else(|| Error::IncompatibleInitialState(format!("no state |{},{}>", s.tail, s.head)))?;
                v.amplitudes_mut()[i] += c;
            }
        }
    }
    v.normalized()
}

/// Probability of finding the particle on each undirected edge.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EdgeDistribution {
    pub probabilities: BTreeMap<Edge, f64>,
    /// Total mass on hidden edges.
    pub not_found: f64,
}

impl EdgeDistribution {
    pub fn mass_on(&self, edges: &[Edge]) -> f64 {
        edges.iter().filter_map(|e| self.probabilities.get(e)).sum()
    }

    pub fn total(&self) -> f64 {
        self.probabilities.values().sum()
    }
}

pub fn edge_probabilities(g: &Graph, space: &StateSpace, s: &StateVector) -> EdgeDistribution {
    let mut probabilities: BTreeMap<Edge, f64> = g.edges().map(|e| (e, 0.0)).collect();
    for (st, a) in space.states().iter().zip(s.amplitudes()) {
        *probabilities.get_mut(&st.edge()).unwrap() += a.norm_sqr();
    }
    let not_found = g.hidden_edges().map(|e| probabilities[&e]).sum();
    EdgeDistribution { probabilities, not_found }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Edge(Edge),
    NotFound,
}

/// Samples edge-position measurements from a fixed distribution.
#[derive(Clone, Debug)]
pub struct MeasurementSampler {
    cumulative: Vec<(f64, Outcome)>,
}

impl MeasurementSampler {
    pub fn new(g: &Graph, dist: &EdgeDistribution) -> Self {
        let mut acc = 0.0;
        let mut cumulative = Vec::new();
        for (&e, &p) in &dist.probabilities {
            if !g.is_hidden(e) && p > 0.0 {
                acc += p;
                cumulative.push((acc, Outcome::Edge(e)));
            }
        }
        if dist.not_found > 0.0 {
            acc += dist.not_found;
            cumulative.push((acc, Outcome::NotFound));
        }
        MeasurementSampler { cumulative }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Outcome {
        let total = self.cumulative.last().map_or(0.0, |c| c.0);
        let u = rng.random::<f64>() * total;
        self.cumulative
            .iter()
            .find(|(c, _)| u < *c)
            .or(self.cumulative.last())
            .map_or(Outcome::NotFound, |c| c.1)
    }
}

/// RNG for trial `trial` of a run seeded with `seed`; streams are independent.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

pub fn sample_measurement(g: &Graph, space: &StateSpace, s: &StateVector, seed: u64) -> Outcome {
    let dist = edge_probabilities(g, space, s);
    MeasurementSampler::new(g, &dist).sample(&mut trial_rng(seed, 0))
}

#[cfg(test)]
mod tests;
