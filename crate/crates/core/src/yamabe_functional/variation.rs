//! First variations of the total k-curvature and of `J_k`.
//!
//! For `F_k(u) = ∫ σ_k(θ̃) dV_θ̃ = ∫ e^{2(n+1−k)u} σ_k(A(u)) dV_{Θ₀}` and a compactly
//! supported direction `φ`, the derivative `d/ds F_k(u + sφ)` at `s = 0` is
//! estimated by central differences whose integrands are subtracted node by
//! node, so only the support of `φ` contributes. It is compared with
//! `c ∫ φ σ_k(θ̃) dV_θ̃` for two coefficients: the stated `c = −2(n+k+1)` and
//! `c = 2(n+1−k)`, which follows from integrating the divergence terms by parts
//! when the Cotton tensor of `θ̃` vanishes.

use rayon::prelude::*;
use serde::Serialize;

use super::{check_nk, sphere_structure, volume_exponent, FunctionalReport};
use crate::conformal_engine::{cotton_codazzi_from_jet, schouten_lower, v_tensor_from_jet, ConformalStructure};
use crate::error::{Error, Result};
use crate::field_calculus::{catalog_field, CatalogParams, FieldExpr, HPoint, Jet3};
use crate::heisenberg_geometry::{frame_derivatives, GridKind, GridSpec, ModelConvention, QuadratureGrid};
use crate::symmetric_functions::sigma_k;

/// A prediction smaller than this fraction of the integrand's absolute mass
/// counts as zero; the gap is then measured against that mass.
const ZERO_PREDICTION: f64 = 1e-12;
/// Per-node bound on the Cotton tensor relative to `max(1, |Ŝ|)`.
pub const COTTON_TOL: f64 = 1e-8;

/// A perturbation direction with the grid covering its support.
#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    pub field: FieldExpr,
    pub grid: GridSpec,
}

impl Direction {
    pub fn new(field: FieldExpr, grid: GridSpec) -> Self {
        Self { field, grid }
    }

    /// Unit-amplitude bump of the given radius with a ball grid on its support.
    pub fn bump(n: usize, center: &[f64], radius: f64, radial_points: usize, angular_points: usize) -> Result<Self> {
        if center.len() != 2 * n + 1 {
            return Err(Error::validation(format!("bump center needs {} coordinates", 2 * n + 1)));
        }
        let mut params = CatalogParams::from([("n".to_string(), n as f64), ("radius".to_string(), radius)]);
        for i in 0..n {
            params.insert(format!("cx{}", i + 1), center[i]);
            params.insert(format!("cy{}", i + 1), center[n + i]);
        }
        params.insert("ct".to_string(), center[2 * n]);
        let field = catalog_field("bump", &params)?;
        let grid = GridSpec::new(GridKind::Ball { center: center.to_vec(), radius, angular_points }, radial_points);
        Ok(Self { field, grid })
    }
}

/// Tuning of [`variational_derivative`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VariationOptions {
    /// Central-difference step `s`; a second difference at `s/2` feeds the
    /// Richardson extrapolation.
    pub step: f64,
    /// Fail with a precondition error when the Cotton tensor does not vanish
    /// on the support of the direction.
    pub enforce_cotton: bool,
    /// Number of support nodes at which the Cotton tensor is evaluated.
    pub cotton_samples: usize,
}

impl Default for VariationOptions {
    fn default() -> Self {
        Self { step: 1e-4, enforce_cotton: true, cotton_samples: 200 }
    }
}

/// Finite-difference derivative of `F_k` against the two predictions.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariationReport {
    pub n: usize,
    pub k: usize,
    pub direction: String,
    pub step: f64,
    /// Richardson extrapolation of the central differences at `s` and `s/2`.
    pub fd_derivative: f64,
    pub fd_step: f64,
    pub fd_half_step: f64,
    /// `|fd_derivative − fd on the coarser grid|`.
    pub quadrature_error: f64,
    /// `∫ |F_k-density(u + sφ) − F_k-density(u − sφ)| / (2s)`, the scale
    /// against which a vanishing prediction is compared.
    pub integrand_scale: f64,
    /// `∫ φ σ_k(θ̃) dV_θ̃`.
    pub weighted_integral: f64,
    /// `−2(n+k+1) ∫ φ σ_k dV_θ̃`.
    pub predicted_stated: f64,
    /// `2(n+1−k) ∫ φ σ_k dV_θ̃`.
    pub predicted_consistent: f64,
    pub gap_stated: f64,
    pub gap_consistent: f64,
    /// Largest `|C| / max(1, |Ŝ|)` over sampled support nodes.
    pub cotton_max_violation: f64,
    pub cotton_samples: usize,
    pub cotton_hypothesis_holds: bool,
}

/// `|fd − predicted|` relative to the larger of the two, or to the integrand
/// mass `scale` when the prediction vanishes.
fn relative_gap(fd: f64, predicted: f64, scale: f64) -> f64 {
    let diff = (fd - predicted).abs();
    if predicted.abs() > ZERO_PREDICTION * scale {
        diff / fd.abs().max(predicted.abs())
    } else if scale > 0.0 {
        diff / scale
    } else {
        diff
    }
}

/// `e^{2(n+1−k)w} σ_k(A(w))` from the jet of `w`.
fn total_curvature_density(w: &Jet3, point: &HPoint, conv: &ModelConvention, k: usize) -> Result<f64> {
    let cj = frame_derivatives(w, point, conv)?;
    let a = schouten_lower(&cj, conv).scaled(1.0 / conv.levi_scale);
    let n = conv.n as f64;
    Ok((2.0 * (n + 1.0 - k as f64) * w.value()).exp() * sigma_k(&a, k)?)
}

fn variation_sums(
    cs: &ConformalStructure,
    phi: &FieldExpr,
    k: usize,
    spec: &GridSpec,
    step: f64,
) -> Result<([f64; 3], f64)> {
    let conv = &cs.conv;
    let grid = QuadratureGrid::new(spec, conv)?;
    let sums = grid.reduce(|coords| {
        let phi_jet = phi.eval_jet_coords(coords, 2)?;
        if phi_jet.max_abs_of_order(0) == 0.0 && phi_jet.max_abs_of_order(1) == 0.0 && phi_jet.max_abs_of_order(2) == 0.0 {
            return Ok([0.0; 3]);
        }
        let u_jet = cs.log_jet_coords(coords, 2)?;
        let point = HPoint::from_coords(coords);
        let density = |s: f64| total_curvature_density(&u_jet.axpy(s, &phi_jet), &point, conv, k);
        let full = density(step)? - density(-step)?;
        let half = density(0.5 * step)? - density(-0.5 * step)?;
        Ok([full, half, phi_jet.value() * density(0.0)?])
    })?;
    Ok((sums.sums, sums.abs_sums[0]))
}

/// Largest `|C| / max(1, |Ŝ|)` over up to `samples` grid nodes inside the support of `φ`.
fn cotton_on_support(cs: &ConformalStructure, phi: &FieldExpr, spec: &GridSpec, samples: usize) -> Result<(f64, usize)> {
    let conv = &cs.conv;
    let grid = QuadratureGrid::new(spec, conv)?;
    let d = conv.real_dim();
    let stride = (grid.len() / samples.max(1) / 4).max(1);
    let mut nodes = Vec::new();
    let mut coords = vec![0.0; d];
    let mut index = 0;
    while index < grid.len() && nodes.len() < samples {
        grid.node(index, &mut coords);
        if phi.eval_coords(&coords)? != 0.0 {
            nodes.push(coords.clone());
        }
        index += stride;
    }
    let worst = nodes
        .par_iter()
        .map(|c| {
            let point = HPoint::from_coords(c);
            let cj = frame_derivatives(&cs.log_jet_coords(c, 3)?, &point, conv)?;
            let s_hat = schouten_lower(&cj, conv).max_abs_entry() * (-2.0 * cj.value).exp();
            Ok(cotton_codazzi_from_jet(&cj, conv)?.max_abs() / s_hat.max(1.0))
        })
        .collect::<Vec<Result<f64>>>()
        .into_iter()
        .try_fold(0.0f64, |acc, v| v.map(|v| acc.max(v)))?;
    Ok((worst, nodes.len()))
}

fn check_support(phi: &FieldExpr, spec: &GridSpec) -> Result<()> {
    if let GridKind::Ball { center, radius, .. } = &spec.kind {
        let d = center.len();
        for axis in 0..d {
            for sign in [-1.0, 1.0] {
                let mut p = center.clone();
                p[axis] += sign * radius;
                if phi.eval_coords(&p)? != 0.0 {
                    return Err(Error::validation(format!(
                        "direction {phi} does not vanish on the boundary of its grid at {p:?}"
                    )));
                }
            }
        }
    }
    Ok(())
}

/// Compares `d/ds F_k(u + sφ)` with `c ∫ φ σ_k dV_θ̃` for the stated and the
/// divergence-consistent coefficient.
pub fn variational_derivative(
    cs: &ConformalStructure,
    direction: &Direction,
    k: usize,
    options: &VariationOptions,
) -> Result<VariationReport> {
    let conv = &cs.conv;
    let n = conv.n;
    check_nk(n, k)?;
    if !(options.step > 0.0 && options.step.is_finite()) {
        return Err(Error::validation(format!("finite-difference step must be positive, got {}", options.step)));
    }
    let phi = &direction.field;
    phi.check_dimension(n)?;
    check_support(phi, &direction.grid)?;
    let (cotton_max_violation, cotton_samples) = cotton_on_support(cs, phi, &direction.grid, options.cotton_samples)?;
    let cotton_hypothesis_holds = cotton_max_violation <= COTTON_TOL;
    if options.enforce_cotton && !cotton_hypothesis_holds {
        return Err(Error::precondition(format!(
            "Cotton tensor does not vanish on the support of the direction: max violation {cotton_max_violation:e}"
        )));
    }
    let s = options.step;
    let kappa = conv.volume_const;
    let derivative = |sums: [f64; 3]| {
        let full = kappa * sums[0] / (2.0 * s);
        let half = kappa * sums[1] / s;
        (full, half, (4.0 * half - full) / 3.0)
    };
    let (fine, abs_full) = variation_sums(cs, phi, k, &direction.grid, s)?;
    let (coarse, _) = variation_sums(cs, phi, k, &direction.grid.coarsened(), s)?;
    let integrand_scale = kappa * abs_full / (2.0 * s);
    let (fd_step, fd_half_step, fd_derivative) = derivative(fine);
    let quadrature_error = (fd_derivative - derivative(coarse).2).abs();
    let weighted_integral = kappa * fine[2];
    let (nf, kf) = (n as f64, k as f64);
    let predicted_stated = -2.0 * (nf + kf + 1.0) * weighted_integral;
    let predicted_consistent = 2.0 * (nf + 1.0 - kf) * weighted_integral;
    Ok(VariationReport {
        n,
        k,
        direction: phi.to_string(),
        step: s,
        fd_derivative,
        fd_step,
        fd_half_step,
        quadrature_error,
        integrand_scale,
        weighted_integral,
        predicted_stated,
        predicted_consistent,
        gap_stated: relative_gap(fd_derivative, predicted_stated, integrand_scale),
        gap_consistent: relative_gap(fd_derivative, predicted_consistent, integrand_scale),
        cotton_max_violation,
        cotton_samples,
        cotton_hypothesis_holds,
    })
}

/// Directional derivatives of `log J_k` at `v₀` along `v₀(1 + sφ)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriticalityReport {
    pub n: usize,
    pub k: usize,
    pub sphere: FunctionalReport,
    pub directions: Vec<String>,
    /// `d/ds log J_k(v₀(1 + sφ))` at `s = 0`, one per direction.
    pub derivatives: Vec<f64>,
    pub max_abs: f64,
}

/// Directional derivatives of the normalized functional at the Cayley factor.
/// Directions should have unit sup norm so the derivatives are comparable.
pub fn criticality_check(
    conv: &ModelConvention,
    k: usize,
    sphere_grid: &GridSpec,
    directions: &[Direction],
    step: f64,
) -> Result<CriticalityReport> {
    let n = conv.n;
    check_nk(n, k)?;
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::validation(format!("finite-difference step must be positive, got {step}")));
    }
    let cs = sphere_structure(conv)?;
    let sphere = super::evaluate_jk(&cs, k, sphere_grid)?;
    let (num0, vol0) = (sphere.numerator, sphere.volume);
    let exponent = volume_exponent(n, k);
    let p = conv.power_exponent();
    let weight_power = p * (1.0 - k as f64) + k as f64;
    let c = conv.levi_scale;
    let mut derivatives = Vec::with_capacity(directions.len());
    for dir in directions {
        dir.field.check_dimension(n)?;
        let grid = QuadratureGrid::new(&dir.grid, conv)?;
        let sums = grid.reduce(|coords| {
            let phi = dir.field.eval_jet_coords(coords, 2)?;
            if phi.max_abs_of_order(0) == 0.0 && phi.max_abs_of_order(1) == 0.0 && phi.max_abs_of_order(2) == 0.0 {
                return Ok([0.0; 2]);
            }
            let v0 = cs.power_jet_coords(coords, 2)?;
            let point = HPoint::from_coords(coords);
            let terms = |s: f64| -> Result<[f64; 2]> {
                let one = Jet3::constant(v0.dim(), 2, 1.0);
                let v = v0.mul(&one.axpy(s, &phi));
                let vj = frame_derivatives(&v, &point, conv)?;
                let value = vj.value;
                if !(value > 0.0) {
                    return Err(Error::domain(format!("perturbed factor is not positive at {coords:?}")));
                }
                let sv = sigma_k(&v_tensor_from_jet(&vj, conv).scaled(1.0 / c), k)?;
                Ok([value.powf(weight_power) * sv, value.powf(p)])
            };
            let (plus, minus) = (terms(step)?, terms(-step)?);
            Ok([plus[0] - minus[0], plus[1] - minus[1]])
        })?;
        let kappa = conv.volume_const;
        let d_num = kappa * sums.sums[0] / (2.0 * step);
        let d_vol = kappa * sums.sums[1] / (2.0 * step);
        derivatives.push(d_num / num0 - exponent * d_vol / vol0);
    }
    let max_abs = derivatives.iter().map(|d| d.abs()).fold(0.0, f64::max);
    Ok(CriticalityReport {
        n,
        k,
        sphere,
        directions: directions.iter().map(|d| d.field.to_string()).collect(),
        derivatives,
        max_abs,
    })
}
