//! Characteristic polynomials, eigensystems of the reduced matrices and the
//! first-order predictions for the degenerate eigenvalue pair.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scenario::ScenarioParams;
use crate::subspace::{reduced_matrix_closed_form, two_star_square_blocks, ReducedOperator};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Monic polynomial, coefficients from the highest power down.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharPoly {
    pub coefficients: Vec<C64>,
}

impl CharPoly {
    pub fn from_real(coefficients: &[f64]) -> Self {
        CharPoly { coefficients: coefficients.iter().map(|&x| C64::new(x, 0.0)).collect() }
    }

    /// `det(lambda I - A)` by the Faddeev-LeVerrier recursion.
    pub fn from_matrix(a: &DMatrix<C64>) -> Self {
        let n = a.nrows();
        let mut coefficients = vec![ONE];
        let mut m = DMatrix::<C64>::zeros(n, n);
        let id = DMatrix::<C64>::identity(n, n);
        for k in 1..=n {
            m = a * &m + &id * coefficients[k - 1];
            let am = a * &m;
            coefficients.push(-am.trace() / k as f64);
        }
        CharPoly { coefficients }
    }

    pub fn degree(&self) -> usize {
        self.coefficients.len() - 1
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coefficients.iter().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn mul(&self, other: &CharPoly) -> CharPoly {
        let mut out = vec![ZERO; self.coefficients.len() + other.coefficients.len() - 1];
        for (i, a) in self.coefficients.iter().enumerate() {
            for (j, b) in other.coefficients.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        CharPoly { coefficients: out }
    }

    /// `max |a_k - b_k|`; infinite when the degrees differ.
    pub fn max_coeff_diff(&self, other: &CharPoly) -> f64 {
        if self.degree() != other.degree() {
            return f64::INFINITY;
        }
        self.coefficients.iter().zip(&other.coefficients).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Roots as eigenvalues of the companion matrix.
    pub fn roots(&self) -> Result<Vec<C64>> {
        let d = self.degree();
        if d == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coefficients[0];
        let mut comp = DMatrix::<C64>::zeros(d, d);
        for j in 0..d {
            comp[(0, j)] = -self.coefficients[j + 1] / lead;
        }
        for i in 1..d {
            comp[(i, i - 1)] = ONE;
        }
        let schur = nalgebra::linalg::Schur::try_new(comp, 1e-15, 10_000).ok_or(Error::Convergence { dim: d })?;
        let vals = schur.eigenvalues().ok_or(Error::Convergence { dim: d })?;
        Ok(vals.iter().copied().collect())
    }
}

pub fn characteristic_poly(us: &ReducedOperator) -> CharPoly {
    CharPoly::from_matrix(&us.matrix)
}

fn grover(n: usize) -> (f64, f64) {
    let n = n as f64;
    ((n - 2.0) / n, 2.0 / n)
}

/// Closed-form characteristic polynomial of [`reduced_matrix_closed_form`].
pub fn closed_form_char_poly(p: &ScenarioParams) -> Result<CharPoly> {
    p.validate()?;
    Ok(match *p {
        ScenarioParams::StarLoop { n } => {
            let (r, _) = grover(n);
            CharPoly::from_real(&[1.0, 0.0, -r, r, 0.0, -1.0])
        }
        ScenarioParams::StarDummyLoops { n, phi } => {
            let (r, _) = grover(n);
            let e = C64::from_polar(1.0, phi);
            CharPoly { coefficients: vec![ONE, ZERO, e * r, C64::new(-r, 0.0), ZERO, -e] }
        }
        ScenarioParams::StarClique { n, m } => clique_poly(grover(n).1, m),
        ScenarioParams::TwoStars { n } => {
            let (r, _) = grover(n);
            CharPoly::from_real(&[1.0, 0.0, -2.0 * r, 0.0, 1.0])
        }
        ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
            let (r2, t2) = grover(n1);
            let (rt, tt) = grover(n2 + 1);
            let quartic = CharPoly::from_real(&[1.0, rt + 1.0, rt + 1.0 - tt * (r2 - t2), rt + 1.0, 1.0]);
            CharPoly::from_real(&[1.0, -1.0]).mul(&quartic)
        }
    })
}

fn clique_poly(t: f64, m: usize) -> CharPoly {
    let (_, tc) = grover(m);
    let b = 2.0 * (m as f64 - 1.0) * t + tc - 2.0;
    CharPoly::from_real(&[1.0, tc - 1.0, b, -b, -(tc - 1.0), -1.0])
}

/// The star-with-clique polynomial with `t = 2/N` sent to zero.
pub fn clique_limit_char_poly(m: usize) -> CharPoly {
    clique_poly(0.0, m)
}

/// `(lambda^3 - 1)(lambda^2 + e^{i phi})`, the dummy-loop polynomial as `N -> inf`.
pub fn dummy_limit_char_poly(phi: f64) -> CharPoly {
    let cubic = CharPoly::from_real(&[1.0, 0.0, 0.0, -1.0]);
    let quad = CharPoly { coefficients: vec![ONE, ZERO, C64::from_polar(1.0, phi)] };
    cubic.mul(&quad)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EigenPair {
    pub value: C64,
    #[serde(serialize_with = "crate::serde_util::vector")]
    pub vector: DVector<C64>,
}

/// Rescales `v` to unit norm with its first nonzero coordinate real positive.
pub fn normalize_phase(v: &DVector<C64>) -> DVector<C64> {
    let norm = v.norm();
    if norm == 0.0 {
        return v.clone();
    }
    let cutoff = 1e-10 * v.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let pivot = v.iter().find(|z| z.norm() > cutoff).copied().unwrap_or(ONE);
    let phase = pivot.conj() / pivot.norm();
    v * (phase / norm)
}

/// All eigenpairs of a small matrix, sorted by argument in `(-pi, pi]`.
pub fn eigensystem(us: &ReducedOperator) -> Result<Vec<EigenPair>> {
    eigensystem_matrix(&us.matrix)
}

pub fn eigensystem_matrix(a: &DMatrix<C64>) -> Result<Vec<EigenPair>> {
    let d = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), 1e-15, 10_000).ok_or(Error::Convergence { dim: d })?;
    let (q, t) = schur.unpack();
    let mut pairs = Vec::with_capacity(d);
    for i in 0..d {
        let value = t[(i, i)];
        // Schur vectors are eigenvectors for normal matrices; refine otherwise.
        let mut v = q.column(i).into_owned();
        if (a * &v - &v * value).norm() > 1e-12 {
            v = inverse_iteration(a, value, v)?;
        }
        pairs.push(EigenPair { value, vector: normalize_phase(&v) });
    }
    pairs.sort_by(|x, y| x.value.arg().total_cmp(&y.value.arg()));
    Ok(pairs)
}

fn inverse_iteration(a: &DMatrix<C64>, lambda: C64, start: DVector<C64>) -> Result<DVector<C64>> {
    let d = a.nrows();
    let shift = lambda + C64::new(1e-13, 1e-13) * lambda.norm().max(1.0);
    let lu = (a - DMatrix::<C64>::identity(d, d) * shift).lu();
    let mut v = start;
    for _ in 0..3 {
        v = lu.solve(&v).ok_or(Error::Convergence { dim: d })?;
        v /= C64::new(v.norm(), 0.0);
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PerturbativePrediction {
    /// Zeroth-order double root.
    pub lambda0: C64,
    /// First-order correction carried by the `+` eigenvalue.
    pub delta: C64,
    /// Rotation angle: the peak sits at `n theta = pi/2`.
    pub theta: f64,
    pub lambda_plus: C64,
    pub lambda_minus: C64,
    #[serde(serialize_with = "crate::serde_util::opt_vector")]
    pub eigvec_plus: Option<DVector<C64>>,
    #[serde(serialize_with = "crate::serde_util::opt_vector")]
    pub eigvec_minus: Option<DVector<C64>>,
    /// Two stars only: the large-N estimate `2 / sqrt(N)` of `theta`.
    pub theta_approx: Option<f64>,
}

/// Maps `phi` into `(-pi, pi]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w - 2.0 * PI
    } else {
        w
    }
}

const PHASE_MATCH: f64 = 1e-9;

fn cvec(entries: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(entries)
}

fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

fn im(x: f64) -> C64 {
    C64::new(0.0, x)
}

/// Degenerate pair `lambda0 +- i theta` on the real axis with eigenvectors.
fn real_axis_pair(lambda0: f64, theta: f64, plus: DVector<C64>, minus: DVector<C64>) -> PerturbativePrediction {
    PerturbativePrediction {
        lambda0: re(lambda0),
        delta: im(theta),
        theta,
        lambda_plus: C64::new(lambda0, theta),
        lambda_minus: C64::new(lambda0, -theta),
        eigvec_plus: Some(plus),
        eigvec_minus: Some(minus),
        theta_approx: None,
    }
}

pub fn perturbative_prediction(p: &ScenarioParams) -> Result<PerturbativePrediction> {
    p.validate()?;
    Ok(match *p {
        ScenarioParams::StarLoop { n } => {
            let theta = (grover(n).1 / 3.0).sqrt();
            let s = (1.5f64).sqrt();
            let k = 1.0 / 6f64.sqrt();
            let v = |sign: f64| cvec(&[re(k), re(-k), re(k), im(-sign * s * k), im(sign * s * k)]);
            real_axis_pair(-1.0, theta, v(1.0), v(-1.0))
        }
        ScenarioParams::StarDummyLoops { n, phi } => {
            let theta = (grover(n).1 / 3.0).sqrt();
            let w = wrap_phase(phi);
            if (w - PI).abs() < PHASE_MATCH || (w + PI).abs() < PHASE_MATCH {
                let s = (2.0f64 / 3.0).sqrt() / 2.0;
                let v = |sign: f64| cvec(&[re(0.5), re(-0.5), im(sign * s), im(sign * s), im(sign * s)]);
                real_axis_pair(1.0, theta, v(1.0), v(-1.0))
            } else if (w.abs() - PI / 3.0).abs() < PHASE_MATCH {
                let lambda0 = C64::from_polar(1.0, w.signum() * 2.0 * PI / 3.0);
                let delta = im(theta) * lambda0;
                PerturbativePrediction {
                    lambda0,
                    delta,
                    theta,
                    lambda_plus: lambda0 + delta,
                    lambda_minus: lambda0 - delta,
                    eigvec_plus: None,
                    eigvec_minus: None,
                    theta_approx: None,
                }
            } else {
                return Err(Error::NoDegeneratePair { phi });
            }
        }
        ScenarioParams::StarClique { n, m } => {
            let (mf, nf) = (m as f64, n as f64);
            let theta = (2.0 * mf * (mf - 1.0) / ((2.0 * mf - 1.0) * nf)).sqrt();
            let k = ((mf - 1.0) / (2.0 * (2.0 * mf - 1.0))).sqrt();
            let s = ((2.0 * mf - 1.0) / (2.0 * mf - 2.0)).sqrt();
            let v = |sign: f64| {
                cvec(&[re(k), re(k), re(-k / (mf - 1.0).sqrt()), im(-sign * k * s), im(sign * k * s)])
            };
            real_axis_pair(-1.0, theta, v(1.0), v(-1.0))
        }
        ScenarioParams::TwoStars { n } => {
            let (r, _) = grover(n);
            let theta = r.acos();
            let h = std::f64::consts::FRAC_1_SQRT_2;
            PerturbativePrediction {
                lambda0: ONE,
                delta: C64::from_polar(1.0, theta) - ONE,
                theta,
                lambda_plus: C64::from_polar(1.0, theta),
                lambda_minus: C64::from_polar(1.0, -theta),
                eigvec_plus: Some(cvec(&[re(h), im(h)])),
                eigvec_minus: Some(cvec(&[re(h), im(-h)])),
                theta_approx: Some(2.0 / (n as f64).sqrt()),
            }
        }
        ScenarioParams::BipartiteExtraEdge { n1, n2 } | ScenarioParams::BipartiteDetect { n1, n2 } => {
            let f2 = n2 as f64;
            let theta = (2.0 * grover(n1).1 / (f2 + 2.0)).sqrt();
            let k = 1.0 / (2.0 * (f2 + 2.0)).sqrt();
            let s = ((f2 + 2.0) / 2.0).sqrt();
            let v = |sign: f64| cvec(&[re(-k * f2.sqrt()), re(k), re(k), im(-sign * k * s), im(sign * k * s)]);
            real_axis_pair(-1.0, theta, v(1.0), v(-1.0))
        }
    })
}

/// The matrix the prediction refers to: `U_S`, or for two stars the `U^2`
/// block on `{w_1, w_2}`.
pub fn prediction_operator(p: &ScenarioParams) -> Result<ReducedOperator> {
    match *p {
        ScenarioParams::TwoStars { n } => Ok(two_star_square_blocks(n)?.0),
        _ => reduced_matrix_closed_form(p),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PredictionReport {
    pub lambda_plus_exact: C64,
    pub lambda_minus_exact: C64,
    /// `max` over the pair of `|lambda_exact - lambda_predicted|`.
    pub eigenvalue_error: f64,
    /// `1 - |<v_pred|v_exact>|^2`, when the prediction has eigenvectors.
    pub overlap_defect_plus: Option<f64>,
    pub overlap_defect_minus: Option<f64>,
}

fn arc_distance(a: C64, b: C64) -> f64 {
    (a * b.conj()).arg().abs()
}

/// Matches the predicted pair to the two exact eigenvalues closest to
/// `lambda0` and reports the errors.
pub fn verify_prediction(us: &ReducedOperator, pred: &PerturbativePrediction) -> Result<PredictionReport> {
    let mut pairs = eigensystem(us)?;
    if pairs.len() < 2 {
        return Err(Error::PredictionMismatch { predicted: format!("{}", pred.lambda_plus), window: pred.theta / 2.0 });
    }
    pairs.sort_by(|x, y| {
        let dx = arc_distance(x.value, pred.lambda0);
        let dy = arc_distance(y.value, pred.lambda0);
        dx.total_cmp(&dy).then(y.value.im.total_cmp(&x.value.im))
    });
    let (mut plus, mut minus) = (&pairs[0], &pairs[1]);
    if (plus.value - pred.lambda_plus).norm() > (minus.value - pred.lambda_plus).norm() {
        std::mem::swap(&mut plus, &mut minus);
    }
    let window = pred.theta / 2.0;
    for (exact, predicted) in [(plus.value, pred.lambda_plus), (minus.value, pred.lambda_minus)] {
        if (exact - predicted).norm() > window {
            return Err(Error::PredictionMismatch { predicted: format!("{predicted}"), window });
        }
    }
    let defect = |v: &Option<DVector<C64>>, exact: &DVector<C64>| {
        v.as_ref().map(|v| 1.0 - (v.dotc(exact) / (v.norm() * exact.norm())).norm_sqr())
    };
    Ok(PredictionReport {
        lambda_plus_exact: plus.value,
        lambda_minus_exact: minus.value,
        eigenvalue_error: (plus.value - pred.lambda_plus).norm().max((minus.value - pred.lambda_minus).norm()),
        overlap_defect_plus: defect(&pred.eigvec_plus, &plus.vector),
        overlap_defect_minus: defect(&pred.eigvec_minus, &minus.vector),
    })
}

/// Smallest distance between two roots of the limiting dummy-loop
/// polynomial. The cube roots of unity are pairwise `sqrt 3` apart and the
/// two square roots of `-e^{i phi}` are 2 apart, so this vanishes exactly
/// when the factors share a root.
pub fn degeneracy_gap(phi: f64) -> Result<f64> {
    let roots = dummy_limit_char_poly(phi).roots()?;
    let mut gap = f64::INFINITY;
    for (i, a) in roots.iter().enumerate() {
        for b in &roots[i + 1..] {
            gap = gap.min((a - b).norm());
        }
    }
    Ok(gap)
}

/// Phases in `(-pi, pi]` where the limiting dummy-loop polynomial has a double
/// root: grid search over `grid` points, then golden-section refinement.
pub fn degenerate_phases(grid: usize) -> Result<Vec<f64>> {
    let step = 2.0 * PI / grid as f64;
    let phis: Vec<f64> = (0..=grid + 1).map(|i| -PI + (i as f64 - 0.5) * step).collect();
    let gaps: Vec<f64> = phis.iter().map(|&p| degeneracy_gap(p)).collect::<Result<_>>()?;
    let mut found: Vec<f64> = Vec::new();
    for i in 1..gaps.len() - 1 {
        if gaps[i] <= gaps[i - 1] && gaps[i] < gaps[i + 1] {
            let phi = golden_min(|p| degeneracy_gap(p).unwrap_or(f64::INFINITY), phis[i - 1], phis[i + 1]);
            if degeneracy_gap(phi)? < 1e-6 {
                let w = wrap_phase(phi);
                let w = if (w + PI).abs() < 1e-6 { PI } else { w };
                if !found.iter().any(|&f| (f - w).abs() < 1e-6) {
                    found.push(w);
                }
            }
        }
    }
    found.sort_by(f64::total_cmp);
    Ok(found)
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    while (b - a).abs() > 1e-12 {
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    (a + b) / 2.0
}
