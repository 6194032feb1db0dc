//! Invariant collective bases and the reduced step matrices `U_S`.
//!
//! Each scenario has a small subspace spanned by uniform superpositions over
//! symmetry classes of edge states. The walk started inside it never leaves,
//! so `U` restricted to it is a 4- or 5-dimensional matrix with a closed form.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::builders::{two_stars_center_b, TWO_STARS_CENTER_A};
use crate::error::{Error, Result};
use crate::graph::{Graph, VertexId};
use crate::scenario::ScenarioParams;
use crate::walk::{StateSpace, StateVector, StepOperator};

/// Residual above which a basis is not considered invariant.
pub const INVARIANCE_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct CollectiveBasis {
    pub vectors: Vec<StateVector>,
    pub labels: Vec<String>,
}

impl CollectiveBasis {
    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    /// Full-space dimension of the basis vectors.
    pub fn ambient_dim(&self) -> usize {
        self.vectors.first().map_or(0, StateVector::dim)
    }

    /// `max |<b_a|b_b> - delta_ab|`.
    pub fn gram_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for (a, va) in self.vectors.iter().enumerate() {
            for (b, vb) in self.vectors.iter().enumerate() {
                let want = if a == b { 1.0 } else { 0.0 };
                dev = dev.max((va.inner(vb) - C64::new(want, 0.0)).norm());
            }
        }
        dev
    }

    /// Drops the vector at `i`; used for negative controls.
    pub fn without(&self, i: usize) -> CollectiveBasis {
        let mut out = self.clone();
        out.vectors.remove(i);
        out.labels.remove(i);
        out
    }

    /// `sum_a coords_a b_a` as a full-space vector.
    pub fn lift(&self, coords: &DVector<C64>) -> Result<StateVector> {
        if coords.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: coords.len() });
        }
        let mut v = StateVector::zeros(self.ambient_dim());
        for (c, b) in coords.iter().zip(&self.vectors) {
            v.add_scaled(*c, b);
        }
        Ok(v)
    }
}

/// Accumulates a normalized uniform superposition of edge states.
struct Collective<'a> {
    space: &'a StateSpace,
    vectors: Vec<StateVector>,
    labels: Vec<String>,
}

impl<'a> Collective<'a> {
    fn new(space: &'a StateSpace) -> Self {
        Collective { space, vectors: Vec::new(), labels: Vec::new() }
    }

    fn push(&mut self, label: &str, states: impl IntoIterator<Item = (VertexId, VertexId)>) -> Result<()> {
        let mut v = StateVector::zeros(self.space.dim());
        for (tail, head) in states {
            v.amplitudes_mut()[self.space.require(tail, head)?] += C64::new(1.0, 0.0);
        }
        self.vectors.push(v.normalized()?);
        self.labels.push(label.to_string());
        Ok(())
    }

    fn finish(self) -> CollectiveBasis {
        CollectiveBasis { vectors: self.vectors, labels: self.labels }
    }
}

fn vid(x: usize) -> VertexId {
    VertexId(x as u32)
}

fn out_of(center: usize, range: impl IntoIterator<Item = usize>) -> Vec<(VertexId, VertexId)> {
    range.into_iter().map(|j| (vid(center), vid(j))).collect()
}

fn into(center: usize, range: impl IntoIterator<Item = usize>) -> Vec<(VertexId, VertexId)> {
    range.into_iter().map(|j| (vid(j), vid(center))).collect()
}

/// The scenario's invariant basis in its canonical order:
///
/// * star with loop: `|0,1>, |l_1>, |1,0>, psi_1, psi_2`
/// * dummy loops: `|0,1>, |1,0>, psi_L, psi_1, psi_2`
/// * star with clique: `psi_1 .. psi_5`
/// * two stars: `w_1 .. w_4` (see [`two_star_psi_basis`] for the 8-dim basis)
/// * bipartite with extra edge: `psi_1 .. psi_5`
pub fn collective_basis(g: &Graph, space: &StateSpace, p: &ScenarioParams) -> Result<CollectiveBasis> {
    p.check_graph(g)?;
    collective_basis_unchecked(space, p)
}

/// [`collective_basis`] without comparing the graph to the scenario; only
/// requires the basis states to exist. Used to test perturbed graphs.
pub fn collective_basis_unchecked(space: &StateSpace, p: &ScenarioParams) -> Result<CollectiveBasis> {
    p.validate()?;
    let mut b = Collective::new(space);
    match *p {
        ScenarioParams::StarLoop { n } => {
            b.push("|0,1>", [(vid(0), vid(1))])?;
            b.push("|l1>", [(vid(1), vid(1))])?;
            b.push("|1,0>", [(vid(1), vid(0))])?;
            b.push("psi1", out_of(0, 2..=n))?;
            b.push("psi2", into(0, 2..=n))?;
        }
        ScenarioParams::StarDummyLoops { n, .. } => {
            b.push("|0,1>", [(vid(0), vid(1))])?;
            b.push("|1,0>", [(vid(1), vid(0))])?;
            b.push("psiL", (2..=n).map(|j| (vid(j), vid(j))))?;
            b.push("psi1", out_of(0, 2..=n))?;
            b.push("psi2", into(0, 2..=n))?;
        }
        ScenarioParams::StarClique { n, m } => {
            b.push("psi1", out_of(0, 1..=m))?;
            b.push("psi2", into(0, 1..=m))?;
            b.push(
                "psi3",
                (1..=m).flat_map(|j| (1..=m).filter(move |&k| k != j).map(move |k| (vid(j), vid(k)))),
            )?;
            b.push("psi4", out_of(0, m + 1..=n))?;
            b.push("psi5", into(0, m + 1..=n))?;
        }
        ScenarioParams::TwoStars { n } => return two_star_w_basis(space, n),
        ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
            let set2 = n1 + 1..=n1 + n2;
            b.push("psi1", [(vid(1), vid(2)), (vid(2), vid(1))])?;
            b.push("psi2", set2.clone().flat_map(|j| [(vid(j), vid(1)), (vid(j), vid(2))]))?;
            b.push("psi3", set2.clone().flat_map(|j| [(vid(1), vid(j)), (vid(2), vid(j))]))?;
            b.push("psi4", (3..=n1).flat_map(|k| set2.clone().map(move |j| (vid(j), vid(k)))))?;
            b.push("psi5", (3..=n1).flat_map(|k| set2.clone().map(move |j| (vid(k), vid(j)))))?;
        }
    }
    Ok(b.finish())
}

/// The 8-dim two-stars basis `psi_1 .. psi_8`.
pub fn two_star_psi_basis(space: &StateSpace, n: usize) -> Result<CollectiveBasis> {
    let (a, bc) = (TWO_STARS_CENTER_A.0 as usize, two_stars_center_b(n).0 as usize);
    let mut b = Collective::new(space);
    b.push("psi1", out_of(a, [1]))?;
    b.push("psi2", into(a, [1]))?;
    b.push("psi3", out_of(bc, [1]))?;
    b.push("psi4", into(bc, [1]))?;
    b.push("psi5", out_of(a, 2..=n))?;
    b.push("psi6", into(a, 2..=n))?;
    b.push("psi7", out_of(bc, n + 1..2 * n))?;
    b.push("psi8", into(bc, n + 1..2 * n))?;
    Ok(b.finish())
}

/// `w_1 .. w_4`, antisymmetric combinations of the two stars' collective states.
fn two_star_w_basis(space: &StateSpace, n: usize) -> Result<CollectiveBasis> {
    let psi = two_star_psi_basis(space, n)?;
    let h = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let pairs = [(0, 2), (4, 6), (1, 3), (5, 7)];
    let vectors = pairs
        .iter()
        .map(|&(x, y)| {
            let mut v = StateVector::zeros(space.dim());
            v.add_scaled(h, &psi.vectors[x]);
            v.add_scaled(-h, &psi.vectors[y]);
            v
        })
        .collect();
    let labels = (1..=4).map(|i| format!("w{i}")).collect();
    Ok(CollectiveBasis { vectors, labels })
}

/// `max_b ||U b - P_S U b||` for an orthonormal basis.
pub fn verify_invariance(op: &StepOperator, basis: &CollectiveBasis) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for b in &basis.vectors {
        let ub = op.apply(b)?;
        let mut rest = ub.clone();
        for other in &basis.vectors {
            rest.add_scaled(-other.inner(&ub), other);
        }
        worst = worst.max(rest.norm());
    }
    Ok(worst)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReducedOperator {
    #[serde(serialize_with = "crate::serde_util::matrix")]
    pub matrix: DMatrix<C64>,
    pub labels: Vec<String>,
}

impl ReducedOperator {
    fn new(matrix: DMatrix<C64>, labels: &[&str]) -> Self {
        ReducedOperator { matrix, labels: labels.iter().map(|s| s.to_string()).collect() }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |U_S^dagger U_S - I|`.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim();
        max_abs(&(self.matrix.adjoint() * &self.matrix - DMatrix::identity(d, d)))
    }

    /// `max |self - other|` over entries; infinite on shape mismatch.
    pub fn max_entry_diff(&self, other: &ReducedOperator) -> f64 {
        if self.matrix.shape() != other.matrix.shape() {
            return f64::INFINITY;
        }
        max_abs(&(&self.matrix - &other.matrix))
    }

    /// `U_S^n x` by repeated multiplication.
    pub fn apply_power(&self, x: &DVector<C64>, n: u64) -> DVector<C64> {
        let mut v = x.clone();
        for _ in 0..n {
            v = &self.matrix * v;
        }
        v
    }
}

pub(crate) fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// `(U_S)_ab = <b_a|U|b_b>`, after checking that the basis is invariant.
pub fn reduce_operator(op: &StepOperator, basis: &CollectiveBasis) -> Result<ReducedOperator> {
    let residual = verify_invariance(op, basis)?;
    if residual > INVARIANCE_TOL {
        return Err(Error::NotInvariant { residual });
    }
    let d = basis.dim();
    let images: Vec<StateVector> = basis.vectors.iter().map(|b| op.apply(b)).collect::<Result<_>>()?;
    let matrix = DMatrix::from_fn(d, d, |a, b| basis.vectors[a].inner(&images[b]));
    Ok(ReducedOperator { matrix, labels: basis.labels.clone() })
}

fn real_matrix(d: usize, entries: &[(usize, usize, f64)]) -> DMatrix<C64> {
    let mut m = DMatrix::zeros(d, d);
    for &(i, j, x) in entries {
        m[(i, j)] = C64::new(x, 0.0);
    }
    m
}

fn grover(n: usize) -> (f64, f64) {
    let n = n as f64;
    ((n - 2.0) / n, 2.0 / n)
}

/// Closed-form `U_S` in the order of [`collective_basis`]. For two stars this
/// is the 4-dim single-step action on `w_1 .. w_4`.
pub fn reduced_matrix_closed_form(p: &ScenarioParams) -> Result<ReducedOperator> {
    p.validate()?;
    Ok(match *p {
        ScenarioParams::StarLoop { n } => {
            let (r, t) = grover(n);
            let ts = t * ((n - 1) as f64).sqrt();
            let m = real_matrix(5, &[(1, 0, 1.0), (2, 1, 1.0), (0, 2, -r), (3, 2, ts), (4, 3, 1.0), (0, 4, ts), (3, 4, r)]);
            ReducedOperator::new(m, &["|0,1>", "|l1>", "|1,0>", "psi1", "psi2"])
        }
        ScenarioParams::StarDummyLoops { n, phi } => {
            let (r, t) = grover(n);
            let ts = t * ((n - 1) as f64).sqrt();
            let mut m = real_matrix(5, &[(0, 1, -r), (3, 1, ts), (4, 2, 1.0), (2, 3, 1.0), (0, 4, ts), (3, 4, r)]);
            m[(1, 0)] = C64::from_polar(1.0, phi);
            ReducedOperator::new(m, &["|0,1>", "|1,0>", "psiL", "psi1", "psi2"])
        }
        ScenarioParams::StarClique { n, m: k } => {
            let (_, t) = grover(n);
            let (rc, tc) = grover(k);
            let a = t * ((k * (n - k)) as f64).sqrt();
            let b = tc * ((k - 1) as f64).sqrt();
            let tm = t * k as f64;
            let m = real_matrix(
                5,
                &[
                    (0, 1, tm - 1.0),
                    (0, 4, a),
                    (1, 0, -rc),
                    (1, 2, b),
                    (2, 0, b),
                    (2, 2, rc),
                    (3, 1, a),
                    (3, 4, 1.0 - tm),
                    (4, 3, 1.0),
                ],
            );
            ReducedOperator::new(m, &["psi1", "psi2", "psi3", "psi4", "psi5"])
        }
        ScenarioParams::TwoStars { n } => {
            let (r, t) = grover(n);
            let ts = t * ((n - 1) as f64).sqrt();
            let m = real_matrix(4, &[(2, 0, -1.0), (3, 1, 1.0), (0, 2, -r), (1, 2, ts), (0, 3, ts), (1, 3, r)]);
            ReducedOperator::new(m, &["w1", "w2", "w3", "w4"])
        }
        ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
            let (r2, t2) = grover(n1);
            let (rt, tt) = grover(n2 + 1);
            let a = tt * (n2 as f64).sqrt();
            let c = 2.0 * (t2 * r2).sqrt();
            let m = real_matrix(
                5,
                &[
                    (0, 0, -rt),
                    (0, 1, a),
                    (1, 2, -(r2 - t2)),
                    (1, 4, c),
                    (2, 0, a),
                    (2, 1, rt),
                    (3, 2, c),
                    (3, 4, r2 - t2),
                    (4, 3, 1.0),
                ],
            );
            ReducedOperator::new(m, &["psi1", "psi2", "psi3", "psi4", "psi5"])
        }
    })
}

/// Closed-form single-step action on the 8-dim two-stars basis.
pub fn two_star_psi_closed_form(n: usize) -> Result<ReducedOperator> {
    ScenarioParams::TwoStars { n }.validate()?;
    let (r, t) = grover(n);
    let ts = t * ((n - 1) as f64).sqrt();
    let m = real_matrix(
        8,
        &[
            (3, 0, 1.0),
            (1, 2, 1.0),
            (0, 1, -r),
            (4, 1, ts),
            (2, 3, -r),
            (6, 3, ts),
            (5, 4, 1.0),
            (4, 5, r),
            (0, 5, ts),
            (7, 6, 1.0),
            (6, 7, r),
            (2, 7, ts),
        ],
    );
    Ok(ReducedOperator::new(m, &["psi1", "psi2", "psi3", "psi4", "psi5", "psi6", "psi7", "psi8"]))
}

/// The two 2x2 blocks of `U^2` on `{w_1, w_2}` and `{w_3, w_4}`.
pub fn two_star_square_blocks(n: usize) -> Result<(ReducedOperator, ReducedOperator)> {
    ScenarioParams::TwoStars { n }.validate()?;
    let (r, t) = grover(n);
    let ts = t * ((n - 1) as f64).sqrt();
    let first = real_matrix(2, &[(0, 0, r), (0, 1, ts), (1, 0, -ts), (1, 1, r)]);
    let second = real_matrix(2, &[(0, 0, r), (0, 1, -ts), (1, 0, ts), (1, 1, r)]);
    Ok((ReducedOperator::new(first, &["w1", "w2"]), ReducedOperator::new(second, &["w3", "w4"])))
}

/// Coordinates `<b_a|s>` and the norm of the part of `s` outside the span.
pub fn project_initial(s: &StateVector, basis: &CollectiveBasis) -> Result<(DVector<C64>, f64)> {
    if basis.dim() > 0 && s.dim() != basis.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: basis.ambient_dim(), got: s.dim() });
    }
    let coords = DVector::from_iterator(basis.dim(), basis.vectors.iter().map(|b| b.inner(s)));
    let mut rest = s.clone();
    for (c, b) in coords.iter().zip(&basis.vectors) {
        rest.add_scaled(-*c, b);
    }
    Ok((coords, rest.norm()))
}
