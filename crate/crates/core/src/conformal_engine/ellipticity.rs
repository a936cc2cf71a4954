//! Ellipticity of the k-Yamabe operator `u ↦ σ_k(A(u))`, `A(u) = S̃(u)/c`.
//!
//! Its linearization in a direction `φ` is `σ_1(T_{k−1}(A) · dA)` with
//! `dA = −(φ_{αβ̄} + φ_{β̄α} + 2 Re⟨dφ, du⟩ h_{αβ̄}) / c`, so the operator is
//! elliptic wherever the Newton transform `T_{k−1}` is positive definite.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{check_k, schouten_lower, ConformalStructure};
use crate::error::{Error, Result};
use crate::field_calculus::{FieldExpr, HPoint};
use crate::heisenberg_geometry::{frame_derivatives, CovariantJet, ModelConvention};
use crate::symmetric_functions::{newton_transform, sigma_k, sigmas, HermitianMatrix};

/// Finite-difference step for the linearization check.
pub const LINEARIZATION_STEP: f64 = 1e-5;
/// Relative agreement required between the linearization and its finite difference.
pub const LINEARIZATION_TOL: f64 = 1e-4;

/// `σ_1(T_{k−1}(A) · dA)` for the direction with frame derivatives `phi`.
pub fn linearized_sigma_k(u: &CovariantJet, phi: &CovariantJet, conv: &ModelConvention, k: usize) -> Result<f64> {
    let n = u.n;
    let c = conv.levi_scale;
    let a = schouten_lower(u, conv).scaled(1.0 / c);
    let newton = if k == 1 { HermitianMatrix::identity(n) } else { newton_transform(&a, k - 1)? };
    let cross: f64 = (0..n).map(|g| (phi.u_alpha[g] * u.u_alpha[g].conj()).re).sum::<f64>() * 4.0 / c;
    let mut da = -(&phi.u_albe_bar + &phi.u_bebar_al);
    for i in 0..n {
        da[(i, i)] -= Complex64::new(cross * c, 0.0);
    }
    da /= Complex64::new(c, 0.0);
    Ok((newton.as_matrix() * da).trace().re)
}

/// One comparison of the linearization with a central difference.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LinearizationCheck {
    pub sample: usize,
    pub direction: String,
    pub predicted: f64,
    pub finite_difference: f64,
    pub relative_gap: f64,
}

/// Ellipticity verdict over a sample set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EllipticityReport {
    pub k: usize,
    /// `min` over samples of the smallest eigenvalue of `T_{k−1}(S̃_α{}^γ)`.
    pub min_eigenvalue: f64,
    pub argmin_sample: usize,
    pub elliptic: bool,
    pub checks: Vec<LinearizationCheck>,
    pub max_linearization_gap: f64,
    pub linearization_tolerance: f64,
    pub linearization_passed: bool,
}

struct SampleOutcome {
    min_eigenvalue: f64,
    checks: Vec<LinearizationCheck>,
}

fn sample_outcome(
    cs: &ConformalStructure,
    k: usize,
    index: usize,
    point: &HPoint,
    directions: &[FieldExpr],
) -> Result<SampleOutcome> {
    let conv = &cs.conv;
    let u_jet = cs.log_jet(point, 2)?;
    let cj = frame_derivatives(&u_jet, point, conv)?;
    let a = schouten_lower(&cj, conv).scaled(1.0 / conv.levi_scale);
    let sig = sigmas(&a);
    if !(sig[k] > 0.0) {
        return Err(Error::precondition(format!(
            "σ_{k} of the deformed Schouten tensor is {} ≤ 0 at sample {index} {point:?}",
            sig[k]
        )));
    }
    let mixed = a.scaled((-2.0 * cj.value).exp());
    let newton = if k == 1 { HermitianMatrix::identity(conv.n) } else { newton_transform(&mixed, k - 1)? };
    let mut checks = Vec::with_capacity(directions.len());
    for phi in directions {
        let phi_jet = phi.eval_jet(point, 2)?;
        let predicted = linearized_sigma_k(&cj, &frame_derivatives(&phi_jet, point, conv)?, conv, k)?;
        let sigma_at = |s: f64| -> Result<f64> {
            let shifted = frame_derivatives(&u_jet.axpy(s, &phi_jet), point, conv)?;
            sigma_k(&schouten_lower(&shifted, conv).scaled(1.0 / conv.levi_scale), k)
        };
        let h = LINEARIZATION_STEP;
        let finite_difference = (sigma_at(h)? - sigma_at(-h)?) / (2.0 * h);
        let floor = 1e-8 * (1.0 + sig[k].abs());
        let relative_gap = (predicted - finite_difference).abs() / predicted.abs().max(finite_difference.abs()).max(floor);
        checks.push(LinearizationCheck { sample: index, direction: phi.to_string(), predicted, finite_difference, relative_gap });
    }
    Ok(SampleOutcome { min_eigenvalue: newton.min_eigenvalue(), checks })
}

/// Smallest eigenvalue of `T_{k−1}(S̃_α{}^γ)` over the samples, with the
/// linearization checked against central differences along `directions`.
pub fn ellipticity_certificate(
    cs: &ConformalStructure,
    k: usize,
    points: &[HPoint],
    directions: &[FieldExpr],
) -> Result<EllipticityReport> {
    check_k(k, cs.conv.n)?;
    if points.is_empty() {
        return Err(Error::validation("ellipticity certificate needs at least one sample point"));
    }
    for phi in directions {
        phi.check_dimension(cs.conv.n)?;
    }
    let outcomes = points
        .par_iter()
        .enumerate()
        .map(|(i, p)| sample_outcome(cs, k, i, p, directions))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let (argmin_sample, min_eigenvalue) = outcomes
        .iter()
        .map(|o| o.min_eigenvalue)
        .enumerate()
        .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
    let checks: Vec<LinearizationCheck> = outcomes.into_iter().flat_map(|o| o.checks).collect();
    let max_linearization_gap = checks.iter().map(|c| c.relative_gap).fold(0.0, f64::max);
    Ok(EllipticityReport {
        k,
        min_eigenvalue,
        argmin_sample,
        elliptic: min_eigenvalue > 0.0,
        linearization_passed: max_linearization_gap <= LINEARIZATION_TOL,
        checks,
        max_linearization_gap,
        linearization_tolerance: LINEARIZATION_TOL,
    })
}
