//! The flat model `(Hⁿ, Θ₀)`.
//!
//! With frame sign `s` and Levi scale `c` the model uses the contact form
//! `Θ₀ = (c/2)(s dt + i Σ (z^α dz̄^α − z̄^α dz^α))`, the holomorphic frame
//! `T_α = ∂/∂z^α + s i z̄^α ∂/∂t`, and the characteristic field
//! `T = (2s/c) ∂/∂t`. Then `dΘ₀ = i h_{αβ̄} dz^α ∧ dz̄^β` with `h_{αβ̄} = c δ_{αβ}`,
//! the Tanaka–Webster connection is flat in this frame, and the volume form
//! `Θ₀ ∧ (dΘ₀)ⁿ` is `κ_n dx dy dt` with `κ_n = (c/2)(2c)ⁿ n!`.
//!
//! Frame derivatives follow the convention that the first index is
//! differentiated first: `u_{αβ̄} = T_β̄ T_α u`, `u_{β̄α} = T_α T_β̄ u`.

mod frame;
mod quadrature;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::symmetric_functions::HermitianMatrix;

pub use frame::{frame_derivatives, CovariantJet};
pub use quadrature::{integrate, GridKind, GridSpec, GridSums, Integral, QuadratureGrid, TAIL_TOLERANCE};

/// Normalizations of the flat model shared by every computation of a run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModelConvention {
    /// CR dimension `n`; the group has real dimension `2n + 1`.
    pub n: usize,
    /// `c` in `h_{αβ̄} = c δ_{αβ}`.
    pub levi_scale: f64,
    /// `s` in `T_α = ∂/∂z^α + s i z̄^α ∂/∂t`.
    pub frame_sign: i8,
    /// `κ_n` in `dV_{Θ₀} = κ_n dx dy dt`.
    pub volume_const: f64,
}

impl ModelConvention {
    /// `s = +1`, `c = 2` (so `Θ₀ = dt + i Σ(z dz̄ − z̄ dz)`), `κ_n = 4ⁿ n!`.
    pub fn standard(n: usize) -> Self {
        Self::new(n, 2.0, 1).expect("standard convention is valid")
    }

    /// Convention with the contact volume `Θ₀ ∧ (dΘ₀)ⁿ`.
    pub fn new(n: usize, levi_scale: f64, frame_sign: i8) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::validation(format!("CR dimension must lie in 1..=16, got {n}")));
        }
        if !(levi_scale > 0.0 && levi_scale.is_finite()) {
            return Err(Error::validation(format!("Levi scale must be positive, got {levi_scale}")));
        }
        if frame_sign != 1 && frame_sign != -1 {
            return Err(Error::validation(format!("frame sign must be +1 or -1, got {frame_sign}")));
        }
        Ok(Self { n, levi_scale, frame_sign, volume_const: Self::contact_volume_const(n, levi_scale) })
    }

    /// Replaces `κ_n`, e.g. by a calibrated value.
    pub fn with_volume_const(mut self, volume_const: f64) -> Result<Self> {
        if !(volume_const > 0.0 && volume_const.is_finite()) {
            return Err(Error::validation(format!("volume constant must be positive, got {volume_const}")));
        }
        self.volume_const = volume_const;
        Ok(self)
    }

    /// `κ_n = (c/2)(2c)ⁿ n!`, the density of `Θ₀ ∧ (dΘ₀)ⁿ` against `dx dy dt`.
    pub fn contact_volume_const(n: usize, levi_scale: f64) -> f64 {
        let factorial: f64 = (1..=n).map(|i| i as f64).product();
        0.5 * levi_scale * (2.0 * levi_scale).powi(n as i32) * factorial
    }

    /// Real dimension `2n + 1`.
    pub fn real_dim(&self) -> usize {
        2 * self.n + 1
    }

    /// The Levi form `h = c I_n`.
    pub fn levi_form(&self) -> HermitianMatrix {
        HermitianMatrix::scalar(self.n, self.levi_scale)
    }

    /// `2s/c`, so that `T = (2s/c) ∂/∂t`.
    pub fn reeb_scale(&self) -> f64 {
        2.0 * f64::from(self.frame_sign) / self.levi_scale
    }

    /// Exponent `p = 2 + 2/n` of the power form.
    pub fn power_exponent(&self) -> f64 {
        2.0 + 2.0 / self.n as f64
    }
}

/// `Δ_b u = −(u_α{}^α + u_ᾱ{}^ᾱ)` before discarding the imaginary roundoff.
pub fn sublaplacian_complex(cj: &CovariantJet, conv: &ModelConvention) -> num_complex::Complex64 {
    let mut trace = num_complex::Complex64::new(0.0, 0.0);
    for a in 0..cj.n {
        trace += cj.u_albe_bar[(a, a)] + cj.u_bebar_al[(a, a)];
    }
    -trace / conv.levi_scale
}

/// Sublaplacian `Δ_b u = −(u_α{}^α + u_ᾱ{}^ᾱ)` with indices raised by `δ/c`.
pub fn sublaplacian(cj: &CovariantJet, conv: &ModelConvention) -> f64 {
    sublaplacian_complex(cj, conv).re
}

/// `‖du‖²_θ = 2 u_α u_β̄ h^{αβ̄} = 2 Σ |u_α|² / c`.
pub fn grad_norm_sq(cj: &CovariantJet, conv: &ModelConvention) -> f64 {
    2.0 * cj.u_alpha.iter().map(|z| z.norm_sqr()).sum::<f64>() / conv.levi_scale
}
