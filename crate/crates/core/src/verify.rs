//! One-shot consistency report: unitarity, invariance of the scenario basis,
//! closed-form reduced matrix, characteristic polynomial, eigensystem and the
//! degenerate-pair prediction.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::scenario::ScenarioParams;
use crate::spectral::{
    characteristic_poly, closed_form_char_poly, eigensystem, perturbative_prediction, prediction_operator,
    verify_prediction,
};
use crate::subspace::{
    collective_basis_unchecked, max_abs, reduced_matrix_closed_form, two_star_psi_basis, two_star_square_blocks,
    verify_invariance, ReducedOperator,
};
use crate::walk::build_step_operator;

pub const REPORT_SCHEMA: &str = "qwalk.verify/1";

/// Default tolerance for the exact checks.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
    pub passed: bool,
    pub detail: Option<String>,
}

impl Check {
    fn bounded(name: &'static str, value: f64, tolerance: f64) -> Self {
        Check { name, value: Some(value), tolerance: Some(tolerance), passed: value <= tolerance, detail: None }
    }

    fn failed(name: &'static str, err: &Error) -> Self {
        Check { name, value: None, tolerance: None, passed: false, detail: Some(err.to_string()) }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyReport {
    pub schema: &'static str,
    pub params: ScenarioParams,
    pub tolerance: f64,
    pub checks: Vec<Check>,
    pub passed: bool,
}

impl VerifyReport {
    pub fn failing(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Runs every check on `g` against the scenario `p`. Structural errors (missing
/// basis states, invalid parameters) are returned as errors; numerical
/// disagreements are reported as failed checks.
pub fn verify(g: &Graph, p: &ScenarioParams, tol: f64) -> Result<VerifyReport> {
    let op = build_step_operator(g)?;
    let basis = collective_basis_unchecked(op.space(), p)?;
    let mut checks = vec![
        Check::bounded("unitarity", op.unitarity_deviation(), tol),
        Check::bounded("basis_orthonormality", basis.gram_deviation(), tol),
    ];
    let residual = verify_invariance(&op, &basis)?;
    checks.push(Check::bounded("invariance", residual, tol));

    let closed = reduced_matrix_closed_form(p)?;
    let images: Vec<_> = basis.vectors.iter().map(|b| op.apply(b)).collect::<Result<_>>()?;
    let d = basis.dim();
    let reduced = ReducedOperator {
        matrix: nalgebra::DMatrix::from_fn(d, d, |a, b| basis.vectors[a].inner(&images[b])),
        labels: basis.labels.clone(),
    };
    let mut cf = Check::bounded("closed_form", reduced.max_entry_diff(&closed), tol);
    if residual > tol {
        cf.passed = false;
        cf.detail = Some("basis is not invariant, so the reduced matrix is not a restriction of U".into());
    }
    checks.push(cf);
    checks.push(Check::bounded("reduced_unitarity", closed.unitarity_deviation(), tol));

    if let ScenarioParams::TwoStars { n } = *p {
        let psi = two_star_psi_basis(op.space(), n)?;
        checks.push(Check::bounded("psi_invariance", verify_invariance(&op, &psi)?, tol));
        let sq = &closed.matrix * &closed.matrix;
        let (b1, b2) = two_star_square_blocks(n)?;
        let dev = max_abs(&(sq.view((0, 0), (2, 2)) - &b1.matrix))
            .max(max_abs(&(sq.view((2, 2), (2, 2)) - &b2.matrix)))
            .max(max_abs(&sq.view((0, 2), (2, 2)).into_owned()))
            .max(max_abs(&sq.view((2, 0), (2, 2)).into_owned()));
        checks.push(Check::bounded("square_blocks", dev, tol));
    }

    let poly = characteristic_poly(&closed);
    checks.push(Check::bounded("char_poly", poly.max_coeff_diff(&closed_form_char_poly(p)?), tol));

    match eigensystem(&closed) {
        Ok(pairs) => {
            let mut res: f64 = 0.0;
            let mut circle: f64 = 0.0;
            for pr in &pairs {
                res = res.max((&closed.matrix * &pr.vector - &pr.vector * pr.value).norm());
                circle = circle.max((pr.value.norm() - 1.0).abs());
            }
            checks.push(Check::bounded("eigen_residual", res, tol));
            checks.push(Check::bounded("unit_circle", circle, tol));
        }
        Err(e) => checks.push(Check::failed("eigen_residual", &e)),
    }

    match perturbative_prediction(p) {
        Ok(pred) => {
            checks.push(Check { name: "degeneracy", value: None, tolerance: None, passed: true, detail: None });
            let target = prediction_operator(p)?;
            match verify_prediction(&target, &pred) {
                Ok(rep) => checks.push(Check {
                    name: "prediction",
                    value: Some(rep.eigenvalue_error),
                    tolerance: Some(pred.theta / 2.0),
                    passed: true,
                    detail: rep.overlap_defect_plus.map(|o| format!("eigenvector overlap defect {o:.3e}")),
                }),
                Err(e) => checks.push(Check::failed("prediction", &e)),
            }
        }
        Err(e @ Error::NoDegeneratePair { .. }) => checks.push(Check::failed("degeneracy", &e)),
        Err(e) => return Err(e),
    }

    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport { schema: REPORT_SCHEMA, params: *p, tolerance: tol, checks, passed })
}
