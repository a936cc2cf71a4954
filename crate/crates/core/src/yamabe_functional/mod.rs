//! The CR k-Yamabe functional on the flat model.
//!
//! For a power-form factor `v > 0` with `p = 2 + 2/n`:
//!
//! * `N(v) = ∫ v^{p(1−k)+k} σ_k(V[v]/c) dV_{Θ₀}` and `D(v) = ∫ v^p dV_{Θ₀}`;
//! * `J_k(v) = N / D^{1−2k/(np)}`, invariant under `v ↦ λv`;
//! * `Y_k = ∫ σ_k(θ̃) dV_θ̃ = (2/n)^k N`, and the k-Yamabe quotient
//!   `(2/n)^k J_k = Y_k / vol(θ̃)^{1−2k/(np)}`.
//!
//! At the Cayley factor `v₀` the quotient is `λ_k(S^{2n+1}) = C(n,k) πᵏ`.

mod variation;

use serde::Serialize;

use crate::conformal_engine::{v_tensor_from_jet, ConformalStructure};
use crate::error::{Error, Result};
use crate::field_calculus::{catalog_field, CatalogParams, HPoint};
use crate::heisenberg_geometry::{frame_derivatives, GridKind, GridSpec, ModelConvention, QuadratureGrid, TAIL_TOLERANCE};
use crate::symmetric_functions::{binomial, sigma_k};

pub use variation::{
    criticality_check, variational_derivative, CriticalityReport, Direction, VariationOptions, VariationReport,
};

/// Evaluated functional together with its quadrature provenance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FunctionalReport {
    pub n: usize,
    pub k: usize,
    /// `∫ σ_k(θ̃) dV_θ̃`.
    pub y_k: f64,
    /// `∫ v^p dV_{Θ₀}`, the volume of `θ̃`.
    pub volume: f64,
    /// `∫ v^{p(1−k)+k} σ_k(V/c) dV_{Θ₀}`.
    pub numerator: f64,
    /// `N / D^{1−2k/(np)}`.
    pub j_k: f64,
    /// `(2/n)^k J_k`.
    pub lambda_estimate: f64,
    /// `|λ − λ_coarse|` against the grid with half the points per axis.
    pub error_estimate: f64,
    /// Largest outer-shell fraction of the two integrands.
    pub tail_fraction: f64,
    pub nodes: usize,
    pub grid: GridSpec,
    pub convention: ModelConvention,
}

/// `1 − 2k/(np)`, the power of the volume in the normalization.
pub fn volume_exponent(n: usize, k: usize) -> f64 {
    1.0 - 2.0 * k as f64 / (n as f64 * (2.0 + 2.0 / n as f64))
}

/// Validates `1 ≤ k ≤ n` and rejects the degenerate normalization `k = np/2`.
pub fn check_nk(n: usize, k: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::validation("n must be at least 1"));
    }
    if k == 0 || k > n {
        return Err(Error::validation(format!("k must lie in 1..={n}, got {k}")));
    }
    if volume_exponent(n, k).abs() < 1e-12 {
        return Err(Error::validation(format!("k = np/2 makes the normalization degenerate (n = {n}, k = {k})")));
    }
    Ok(())
}

/// Raw sums `[N, D]` over one grid, without the volume constant.
fn functional_sums(cs: &ConformalStructure, k: usize, spec: &GridSpec) -> Result<([f64; 2], f64, usize)> {
    let conv = &cs.conv;
    let p = conv.power_exponent();
    let weight_power = p * (1.0 - k as f64) + k as f64;
    let c = conv.levi_scale;
    let grid = QuadratureGrid::new(spec, conv)?;
    let sums = grid.reduce(|coords| {
        let jet = cs.power_jet_coords(coords, 2)?;
        let point = HPoint::from_coords(coords);
        let vj = frame_derivatives(&jet, &point, conv)?;
        let v = vj.value;
        let sv = sigma_k(&v_tensor_from_jet(&vj, conv).scaled(1.0 / c), k)?;
        Ok([v.powf(weight_power) * sv, v.powf(p)])
    })?;
    let tail = sums.tail_fraction(0).max(sums.tail_fraction(1));
    Ok((sums.sums, tail, sums.nodes))
}

/// Evaluates `J_k` and its companions for a structure in power form (a
/// log-form structure is converted with `v = e^{nu}`).
pub fn evaluate_jk(cs: &ConformalStructure, k: usize, spec: &GridSpec) -> Result<FunctionalReport> {
    let n = cs.conv.n;
    check_nk(n, k)?;
    let cs = cs.to_power_form();
    let kappa = cs.conv.volume_const;
    let exponent = volume_exponent(n, k);
    let scale = (2.0 / n as f64).powi(k as i32);
    let ([num, vol], tail, nodes) = functional_sums(&cs, k, spec)?;
    if tail > TAIL_TOLERANCE {
        return Err(Error::integration(format!(
            "integrand does not decay on the grid: outer shell carries {tail:.3e} of its mass (limit {TAIL_TOLERANCE:e})"
        )));
    }
    let ([num_c, vol_c], _, _) = functional_sums(&cs, k, &spec.coarsened())?;
    let (numerator, volume) = (kappa * num, kappa * vol);
    if !(volume > 0.0) {
        return Err(Error::integration(format!("volume integral is not positive: {volume}")));
    }
    let j_k = numerator / volume.powf(exponent);
    let j_coarse = kappa * num_c / (kappa * vol_c).powf(exponent);
    Ok(FunctionalReport {
        n,
        k,
        y_k: scale * numerator,
        volume,
        numerator,
        j_k,
        lambda_estimate: scale * j_k,
        error_estimate: scale * (j_k - j_coarse).abs(),
        tail_fraction: tail,
        nodes,
        grid: spec.clone(),
        convention: cs.conv.clone(),
    })
}

/// The Cayley factor `v₀ = |w + i|^{−n}` as a power-form structure.
pub fn sphere_structure(conv: &ModelConvention) -> Result<ConformalStructure> {
    let params = CatalogParams::from([("n".to_string(), conv.n as f64)]);
    ConformalStructure::power_form(conv.clone(), catalog_field("v0", &params)?)
}

/// Sphere constant estimate against its target `C(n,k) πᵏ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereLambda {
    pub estimate: f64,
    pub target: f64,
    /// `|estimate − target| / target`.
    pub deviation: f64,
    pub report: FunctionalReport,
}

/// Default grid for sphere integrals: the integrands are `U(n)`-invariant.
pub fn default_sphere_grid(points: usize) -> GridSpec {
    GridSpec::new(GridKind::Radial, points)
}

/// `(2/n)^k J_k(v₀)` with the target `C(n,k) πᵏ`.
pub fn sphere_lambda(conv: &ModelConvention, k: usize, spec: &GridSpec) -> Result<SphereLambda> {
    let report = evaluate_jk(&sphere_structure(conv)?, k, spec)?;
    let target = binomial(conv.n, k) * std::f64::consts::PI.powi(k as i32);
    let estimate = report.lambda_estimate;
    Ok(SphereLambda { estimate, target, deviation: (estimate - target).abs() / target, report })
}

/// `κ_1` for which `λ_1(S³) = π`, obtained by rescaling the volume constant
/// of `conv` (with `n = 1`); `λ_1` is proportional to `√κ_1`.
pub fn calibrated_volume_const(conv: &ModelConvention, spec: &GridSpec) -> Result<f64> {
    if conv.n != 1 {
        return Err(Error::validation("calibration is defined by the n = 1 sphere constant"));
    }
    let lambda = sphere_lambda(conv, 1, spec)?.estimate;
    Ok(conv.volume_const * (std::f64::consts::PI / lambda).powi(2))
}

/// `σ_k = C(n,k) (R / (2n(n+1)))ᵏ` for a pseudo-Einstein structure with
/// constant Webster curvature `R`.
pub fn pseudo_einstein_sigma(n: usize, k: usize, webster_curvature: f64) -> Result<f64> {
    if n == 0 || k == 0 || k > n {
        return Err(Error::domain(format!("pseudo-Einstein σ_k needs 1 ≤ k ≤ n, got n = {n}, k = {k}")));
    }
    let nf = n as f64;
    Ok(binomial(n, k) * (webster_curvature / (2.0 * nf * (nf + 1.0))).powi(k as i32))
}
