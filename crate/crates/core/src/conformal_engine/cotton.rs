//! Cotton tensors of a deformed structure.
//!
//! Two tensors are provided. [`cotton`] evaluates the torsion-free reduction
//! `C̃_{αβ̄;σ} = −2(u_α u_{β̄σ} − u_σ u_{β̄α})`, whose vanishing defines
//! Cotton-admissibility. [`cotton_tensor`] evaluates the Codazzi defect
//! `∇̃_σ Ŝ_{αβ̄} − ∇̃_α Ŝ_{σβ̄}` of the deformed Schouten tensor with respect to
//! the Tanaka–Webster connection of `θ̃`, written in the frame
//! `Z̃_α = e^{−u} T_α`. On the sphere structure the latter vanishes for every
//! `n` while the reduction does not once `n ≥ 2`.
//!
//! In that frame `Ŝ = e^{−2u} S̃` and
//! `e^{u} C_{αβ̄σ} = T_σ Ŝ_{αβ̄} − T_α Ŝ_{σβ̄} − 2u_α Ŝ_{σβ̄} + 2u_σ Ŝ_{αβ̄}
//!   + 2 δ_{σβ} Σ_γ u_γ Ŝ_{αγ̄} − 2 δ_{αβ} Σ_γ u_γ Ŝ_{σγ̄}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::{schouten_lower, ConformalStructure};
use crate::error::{Error, Result};
use crate::field_calculus::{FieldExpr, HPoint};
use crate::heisenberg_geometry::{frame_derivatives, CovariantJet, ModelConvention};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// A tensor `C_{αβ̄σ}` with `n³` complex components.
#[derive(Debug, Clone, PartialEq)]
pub struct CottonAtPoint {
    n: usize,
    entries: Vec<Complex64>,
}

impl CottonAtPoint {
    fn from_fn(n: usize, f: impl Fn(usize, usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(n * n * n);
        for a in 0..n {
            for b in 0..n {
                for s in 0..n {
                    entries.push(f(a, b, s));
                }
            }
        }
        Self { n, entries }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C_{αβ̄σ}`.
    pub fn get(&self, alpha: usize, beta: usize, sigma: usize) -> Complex64 {
        self.entries[(alpha * self.n + beta) * self.n + sigma]
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// `−2(u_α u_{β̄σ} − u_σ u_{β̄α})` from frame derivatives of `u`.
pub(crate) fn reduced_from_jet(cj: &CovariantJet) -> CottonAtPoint {
    CottonAtPoint::from_fn(cj.n, |a, b, s| {
        -2.0 * (cj.u_alpha[a] * cj.u_bar_then(b, s) - cj.u_alpha[s] * cj.u_bar_then(b, a))
    })
}

/// The Codazzi defect of the deformed Schouten tensor; `cj` must carry
/// third-order frame derivatives.
pub(crate) fn codazzi_from_jet(cj: &CovariantJet, conv: &ModelConvention) -> Result<CottonAtPoint> {
    if !cj.has_third() {
        return Err(Error::validation("the Cotton tensor needs third-order frame derivatives"));
    }
    let n = cj.n;
    let c = conv.levi_scale;
    let s_tilde = schouten_lower(cj, conv).into_matrix();
    let damp = (-2.0 * cj.value).exp();
    let s_hat = &s_tilde * Complex64::new(damp, 0.0);
    let grad_norm_derivative: Vec<Complex64> = (0..n)
        .map(|s| {
            (0..n)
                .map(|g| cj.u_alpha_beta[(g, s)] * cj.u_alpha[g].conj() + cj.u_alpha[g] * cj.u_bar_then(g, s))
                .sum::<Complex64>()
                * (2.0 / c)
        })
        .collect();
    let derivative_hat: Vec<DMatrix<Complex64>> = (0..n)
        .map(|s| {
            let ts = DMatrix::from_fn(n, n, |a, b| {
                let mut v = -2.0 * cj.third(a, b, s).expect("third-order jet");
                if a == b {
                    v += (I * cj.u0_alpha[s] - grad_norm_derivative[s]) * c;
                }
                v
            });
            (ts - &s_tilde * (2.0 * cj.u_alpha[s])) * Complex64::new(damp, 0.0)
        })
        .collect();
    let contracted: Vec<Complex64> = (0..n).map(|a| (0..n).map(|g| cj.u_alpha[g] * s_hat[(a, g)]).sum()).collect();
    let scale = (-cj.value).exp();
    Ok(CottonAtPoint::from_fn(n, |a, b, s| {
        let mut v = derivative_hat[s][(a, b)] - derivative_hat[a][(s, b)] - 2.0 * cj.u_alpha[a] * s_hat[(s, b)]
            + 2.0 * cj.u_alpha[s] * s_hat[(a, b)];
        if s == b {
            v += 2.0 * contracted[a];
        }
        if a == b {
            v -= 2.0 * contracted[s];
        }
        v * scale
    }))
}

/// The torsion-free Cotton reduction `−2(u_α u_{β̄σ} − u_σ u_{β̄α})`.
pub fn cotton(cs: &ConformalStructure, point: &HPoint) -> Result<CottonAtPoint> {
    Ok(reduced_from_jet(&cs.covariant_jet(point, 2)?))
}

/// The Codazzi defect of the deformed Schouten tensor (see the module docs).
pub fn cotton_tensor(cs: &ConformalStructure, point: &HPoint) -> Result<CottonAtPoint> {
    codazzi_from_jet(&cs.covariant_jet(point, 3)?, &cs.conv)
}

/// Outcome of a Cotton-admissibility scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub admissible: bool,
    /// `max |u_α u_{β̄σ} − u_σ u_{β̄α}|` over the samples and components.
    pub max_violation: f64,
    /// Index of the sample attaining the maximum.
    pub worst_sample: Option<usize>,
    pub tolerance: f64,
}

/// Whether `u_α u_{β̄σ} − u_σ u_{β̄α}` vanishes within `tol` at every sample.
pub fn cotton_admissible(u: &FieldExpr, conv: &ModelConvention, points: &[HPoint], tol: f64) -> Result<AdmissibilityReport> {
    if points.is_empty() {
        return Err(Error::validation("Cotton-admissibility needs at least one sample point"));
    }
    u.check_dimension(conv.n)?;
    let violations = points
        .par_iter()
        .map(|p| {
            let cj = frame_derivatives(&u.eval_jet(p, 2)?, p, conv)?;
            Ok(0.5 * reduced_from_jet(&cj).max_abs())
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .collect::<Result<Vec<f64>>>()?;
    let (worst, max_violation) = violations
        .iter()
        .copied()
        .enumerate()
        .fold((0, 0.0f64), |best, (i, v)| if v > best.1 { (i, v) } else { best });
    Ok(AdmissibilityReport {
        admissible: max_violation <= tol,
        max_violation,
        worst_sample: Some(worst),
        tolerance: tol,
    })
}
