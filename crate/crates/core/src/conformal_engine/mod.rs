//! Conformal deformations `θ̃ = e^{2u} Θ₀` of the flat model.
//!
//! The deformed Schouten tensor in the holomorphic frame of the base is
//! `S̃_{αβ̄} = −2u_{αβ̄} + (i u₀ − ‖du‖²) h_{αβ̄} = −(u_{αβ̄} + u_{β̄α}) − ‖du‖² h_{αβ̄}`,
//! and the k-curvature is `σ_k(θ̃) = σ_k(S̃_α{}^γ)` with the index raised by
//! `h̃ = e^{2u} h`, i.e. `σ_k(θ̃) = e^{−2ku} σ_k(S̃ / c)`.
//!
//! In the power form `θ̃ = v^{p−2} Θ₀` with `p = 2 + 2/n` the same tensor is
//! `S̃ = (2/n) V[v] / v` where
//! `V_{αβ̄} = −½(v_{αβ̄} + v_{β̄α}) + v_α v_β̄ / v − ‖dv‖²/(2nv) h_{αβ̄}`.

mod cotton;
mod ellipticity;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field_calculus::{FieldExpr, Func, HPoint, Jet3};
use crate::heisenberg_geometry::{frame_derivatives, grad_norm_sq, CovariantJet, ModelConvention};
use crate::symmetric_functions::{cone_membership, sigma_k, ConeReport, HermitianMatrix};

pub(crate) use cotton::codazzi_from_jet as cotton_codazzi_from_jet;
pub use cotton::{cotton, cotton_admissible, cotton_tensor, AdmissibilityReport, CottonAtPoint};
pub use ellipticity::{ellipticity_certificate, linearized_sigma_k, EllipticityReport, LinearizationCheck};

/// Relative agreement required between the u-form and v-form Schouten tensors.
pub const FORM_AGREEMENT_TOL: f64 = 1e-8;

/// How the factor field parametrizes the deformed contact form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FactorForm {
    /// `θ̃ = e^{2u} Θ₀`.
    Log,
    /// `θ̃ = v^{p−2} Θ₀` with `v > 0`.
    Power,
}

/// The flat model together with a conformal factor.
#[derive(Debug, Clone, PartialEq)]
pub struct ConformalStructure {
    pub conv: ModelConvention,
    pub form: FactorForm,
    pub factor: FieldExpr,
}

impl ConformalStructure {
    pub fn log_form(conv: ModelConvention, u: FieldExpr) -> Result<Self> {
        u.check_dimension(conv.n)?;
        Ok(Self { conv, form: FactorForm::Log, factor: u })
    }

    pub fn power_form(conv: ModelConvention, v: FieldExpr) -> Result<Self> {
        v.check_dimension(conv.n)?;
        Ok(Self { conv, form: FactorForm::Power, factor: v })
    }

    /// The same structure with `u = (1/n) log v`.
    pub fn to_log_form(&self) -> Self {
        match self.form {
            FactorForm::Log => self.clone(),
            FactorForm::Power => {
                let u = FieldExpr::mul(
                    FieldExpr::constant(1.0 / self.conv.n as f64),
                    FieldExpr::func(Func::Log, self.factor.clone()),
                );
                Self { conv: self.conv.clone(), form: FactorForm::Log, factor: u }
            }
        }
    }

    /// The same structure with `v = e^{n u}`.
    pub fn to_power_form(&self) -> Self {
        match self.form {
            FactorForm::Power => self.clone(),
            FactorForm::Log => {
                let v = FieldExpr::func(
                    Func::Exp,
                    FieldExpr::mul(FieldExpr::constant(self.conv.n as f64), self.factor.clone()),
                );
                Self { conv: self.conv.clone(), form: FactorForm::Power, factor: v }
            }
        }
    }

    /// Jet of the power-form factor `v`, checked positive.
    pub fn power_jet(&self, point: &HPoint, order: usize) -> Result<Jet3> {
        self.power_jet_coords(&point.coords(), order)
    }

    pub(crate) fn power_jet_coords(&self, coords: &[f64], order: usize) -> Result<Jet3> {
        let jet = match self.form {
            FactorForm::Power => self.factor.eval_jet_coords(coords, order)?,
            FactorForm::Log => self.factor.eval_jet_coords(coords, order)?.scale(self.conv.n as f64).exp(),
        };
        if !(jet.value() > 0.0) {
            return Err(Error::domain(format!("power-form factor v = {} is not positive at {coords:?}", jet.value())));
        }
        Ok(jet)
    }

    /// Jet of the log-form factor `u`.
    pub fn log_jet(&self, point: &HPoint, order: usize) -> Result<Jet3> {
        self.log_jet_coords(&point.coords(), order)
    }

    pub(crate) fn log_jet_coords(&self, coords: &[f64], order: usize) -> Result<Jet3> {
        match self.form {
            FactorForm::Log => self.factor.eval_jet_coords(coords, order),
            FactorForm::Power => Ok(self.power_jet_coords(coords, order)?.ln().scale(1.0 / self.conv.n as f64)),
        }
    }

    /// Frame derivatives of `u` at `point`.
    pub fn covariant_jet(&self, point: &HPoint, order: usize) -> Result<CovariantJet> {
        frame_derivatives(&self.log_jet(point, order)?, point, &self.conv)
    }
}

/// The deformed Schouten tensor at one point in both index positions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchoutenAtPoint {
    /// `S̃_{αβ̄}` in the holomorphic frame of the base.
    #[serde(skip)]
    pub s_lower: HermitianMatrix,
    /// `S̃_α{}^γ`, raised by `h̃ = e^{2u} h`.
    #[serde(skip)]
    pub s_mixed: HermitianMatrix,
    /// `u` at the point.
    pub u: f64,
    /// Relative gap between the u-form and v-form tensors, when the
    /// structure is in power form.
    pub form_gap: Option<f64>,
}

/// `S̃_{αβ̄} = −(u_{αβ̄} + u_{β̄α}) − ‖du‖² h_{αβ̄}` from the frame derivatives of `u`.
pub fn schouten_lower(cj: &CovariantJet, conv: &ModelConvention) -> HermitianMatrix {
    let g = grad_norm_sq(cj, conv);
    let mut m = -(&cj.u_albe_bar + &cj.u_bebar_al);
    for a in 0..cj.n {
        m[(a, a)] -= Complex64::new(g * conv.levi_scale, 0.0);
    }
    HermitianMatrix::hermitize(m)
}

/// `V[v]_{αβ̄}` from the frame derivatives of `v`; see the module docs.
pub fn v_tensor_from_jet(vj: &CovariantJet, conv: &ModelConvention) -> HermitianMatrix {
    let n = vj.n;
    let v = vj.value;
    let g = grad_norm_sq(vj, conv);
    let mut m = (&vj.u_albe_bar + &vj.u_bebar_al) * Complex64::new(-0.5, 0.0);
    for a in 0..n {
        for b in 0..n {
            m[(a, b)] += vj.u_alpha[a] * vj.u_alpha[b].conj() / v;
        }
        m[(a, a)] -= Complex64::new(g / (2.0 * n as f64 * v) * conv.levi_scale, 0.0);
    }
    HermitianMatrix::hermitize(m)
}

/// Entrywise magnitude scale of the terms entering `(2/n) V / v`, used to
/// make the form-agreement check relative.
fn v_form_scale(vj: &CovariantJet, conv: &ModelConvention) -> f64 {
    let v = vj.value;
    let n = vj.n as f64;
    let second = vj.u_albe_bar.iter().chain(vj.u_bebar_al.iter()).map(|z| z.norm()).fold(0.0, f64::max);
    let first = vj.u_alpha.iter().map(|z| z.norm_sqr()).fold(0.0, f64::max) / v;
    let grad = grad_norm_sq(vj, conv) * conv.levi_scale / (2.0 * n * v);
    2.0 / (n * v) * (second + first + grad)
}

/// The deformed Schouten tensor of `cs` at `point`.
pub fn schouten(cs: &ConformalStructure, point: &HPoint) -> Result<SchoutenAtPoint> {
    let conv = &cs.conv;
    let cj = cs.covariant_jet(point, 2)?;
    let s_lower = schouten_lower(&cj, conv);
    let s_mixed = s_lower.scaled((-2.0 * cj.value).exp() / conv.levi_scale);
    let form_gap = match cs.form {
        FactorForm::Log => None,
        FactorForm::Power => {
            let vj = frame_derivatives(&cs.power_jet(point, 2)?, point, conv)?;
            let from_v = v_tensor_from_jet(&vj, conv).scaled(2.0 / (conv.n as f64 * vj.value));
            let diff = (s_lower.as_matrix() - from_v.as_matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            let scale = v_form_scale(&vj, conv).max(s_lower.max_abs_entry()).max(f64::MIN_POSITIVE);
            let gap = diff / scale;
            if gap > FORM_AGREEMENT_TOL {
                return Err(Error::Evaluation {
                    subexpression: cs.factor.to_string(),
                    reason: format!("u-form and v-form Schouten tensors differ by {gap:e} (relative) at {point:?}"),
                });
            }
            Some(gap)
        }
    };
    Ok(SchoutenAtPoint { s_lower, s_mixed, u: cj.value, form_gap })
}

/// `V[v]` of a power-form structure; log-form structures are converted with `v = e^{nu}`.
pub fn v_tensor(cs: &ConformalStructure, point: &HPoint) -> Result<HermitianMatrix> {
    let vj = frame_derivatives(&cs.power_jet(point, 2)?, point, &cs.conv)?;
    Ok(v_tensor_from_jet(&vj, &cs.conv))
}

fn check_k(k: usize, n: usize) -> Result<()> {
    if k == 0 || k > n {
        return Err(Error::domain(format!("k must lie in 1..={n}, got {k}")));
    }
    Ok(())
}

/// Pseudohermitian k-curvature `σ_k(θ̃)` at `point`.
pub fn sigma_k_curvature(cs: &ConformalStructure, point: &HPoint, k: usize) -> Result<f64> {
    check_k(k, cs.conv.n)?;
    sigma_k(&schouten(cs, point)?.s_mixed, k)
}

/// Residuals of the k-Yamabe equation in both forms at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualAtPoint {
    /// `σ_k(S̃/c) − λ e^{2ku}`.
    pub u_form: f64,
    /// `v^{(1−k)(p−1)} σ_k(V/c) − λ̂ v^{p−1}`.
    pub v_form: f64,
    /// `λ̂ = (n/2)^k λ`, the constant for which both residuals vanish together.
    pub lambda_hat: f64,
    /// `(n/2)^k k λ`, the alternative relation between the two constants.
    pub lambda_hat_literal: f64,
}

/// `(n/2)^k λ`.
pub fn lambda_hat(n: usize, k: usize, lambda: f64) -> f64 {
    (0.5 * n as f64).powi(k as i32) * lambda
}

/// Residuals of `σ_k(θ̃) = λ` in the u-form and v-form.
pub fn yamabe_residual(cs: &ConformalStructure, k: usize, lambda: f64, point: &HPoint) -> Result<ResidualAtPoint> {
    let conv = &cs.conv;
    check_k(k, conv.n)?;
    let cj = cs.covariant_jet(point, 2)?;
    let a = schouten_lower(&cj, conv).scaled(1.0 / conv.levi_scale);
    let u_form = sigma_k(&a, k)? - lambda * (2.0 * k as f64 * cj.value).exp();
    let hat = lambda_hat(conv.n, k, lambda);
    let v_form = yamabe_residual_v(cs, k, hat, point)?;
    Ok(ResidualAtPoint { u_form, v_form, lambda_hat: hat, lambda_hat_literal: hat * k as f64 })
}

/// `v^{(1−k)(p−1)} σ_k(V/c) − λ̂ v^{p−1}`.
pub fn yamabe_residual_v(cs: &ConformalStructure, k: usize, lambda_hat: f64, point: &HPoint) -> Result<f64> {
    let (lhs, weight) = v_form_terms(cs, k, point)?;
    Ok(lhs - lambda_hat * weight)
}

/// `λ̂` for which the v-form residual vanishes at `point`.
pub fn v_form_quotient(cs: &ConformalStructure, k: usize, point: &HPoint) -> Result<f64> {
    let (lhs, weight) = v_form_terms(cs, k, point)?;
    Ok(lhs / weight)
}

fn v_form_terms(cs: &ConformalStructure, k: usize, point: &HPoint) -> Result<(f64, f64)> {
    let conv = &cs.conv;
    check_k(k, conv.n)?;
    let vj = frame_derivatives(&cs.power_jet(point, 2)?, point, conv)?;
    let sv = sigma_k(&v_tensor_from_jet(&vj, conv).scaled(1.0 / conv.levi_scale), k)?;
    let q = conv.power_exponent() - 1.0;
    Ok((vj.value.powf((1.0 - k as f64) * q) * sv, vj.value.powf(q)))
}

/// Per-point `Γ_j⁺` membership of `S̃_α{}^γ` for `j ≤ k`.
pub fn k_positive(cs: &ConformalStructure, points: &[HPoint], k: usize) -> Result<Vec<ConeReport>> {
    check_k(k, cs.conv.n)?;
    points
        .par_iter()
        .map(|p| cone_membership(&schouten(cs, p)?.s_mixed, k))
        .collect::<Vec<_>>()
        .into_iter()
        .collect()
}
