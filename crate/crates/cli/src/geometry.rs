//! Residual, sphere-constant and variation commands.

use cryamabe::conformal_engine::{
    cotton, cotton_tensor, ellipticity_certificate, schouten, sigma_k_curvature, v_form_quotient, yamabe_residual,
    ConformalStructure, LinearizationCheck,
};
use cryamabe::field_calculus::{catalog_field, parse_field, CatalogParams, FieldExpr, HPoint};
use cryamabe::heisenberg_geometry::{GridKind, GridSpec, ModelConvention};
use cryamabe::sampling::{random_point, seeded};
use cryamabe::symmetric_functions::{binomial, cone_membership};
use cryamabe::yamabe_functional::{
    criticality_check, default_sphere_grid, pseudo_einstein_sigma, sphere_lambda, sphere_structure,
    variational_derivative, Direction, SphereLambda, VariationOptions, VariationReport,
};
use cryamabe::{Error, Result};
use rand::Rng;
use serde::Serialize;
use serde_json::json;

use crate::config::{Coefficient, Form, LambdaSpec, RunConfig};
use crate::report::{Check, Comparison, Outcome, Table};

/// Coordinates of residual samples lie in `[−R, R]`.
pub const SAMPLE_RADIUS: f64 = 1.0;
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Linearization gap accepted by the ellipticity certificate.
pub const LINEARIZATION_TOL: f64 = 1e-4;
/// Relative spread of `σ_k` over samples of the sphere structure.
pub const SPREAD_TOL: f64 = 1e-6;
pub const PSEUDO_EINSTEIN_TOL: f64 = 1e-7;
pub const VARIATION_TOL: f64 = 1e-3;
/// Bound on the criticality derivatives of `log J_k` at the sphere.
pub const CRITICALITY_TOL: f64 = 5e-3;
/// Radius of the bump directions.
pub const BUMP_RADIUS: f64 = 0.6;
/// Bump centers are drawn from `[−C, C]` in every coordinate.
pub const BUMP_CENTER_RANGE: f64 = 0.5;
/// Largest CR dimension accepted by verify-sphere without `allow_large_n`.
pub const SPHERE_MAX_N: usize = 3;

/// Test fields along which the linearization is compared with central differences.
const LINEARIZATION_DIRECTIONS: [&str; 2] = ["x1^2 - t", "exp(-(x1^2 + y1^2 + t^2))"];

/// Default relative tolerance of the sphere constant.
pub fn sphere_tolerance(n: usize) -> f64 {
    if n <= 2 {
        1e-3
    } else {
        1e-2
    }
}

/// Points per axis of the radial sphere grid at a refinement level.
pub fn sphere_points(level: u32) -> usize {
    32 << level
}

/// `(radial, angular)` points of the ball grid under a bump at a refinement level.
pub fn ball_points(level: u32) -> (usize, usize) {
    let level = level as usize;
    (20 * (level + 1), 4 + 2 * level)
}

/// Base structure selected by a field expression or a catalog entry (`v0` by default).
pub fn base_structure(cfg: &RunConfig, conv: &ModelConvention) -> Result<ConformalStructure> {
    let (expr, default_form) = match (&cfg.field, &cfg.catalog) {
        (Some(text), _) => (parse_field(text, cfg.n)?, Form::Log),
        (None, catalog) => {
            let name = catalog.as_deref().unwrap_or("v0");
            let mut params: CatalogParams = cfg.params.clone();
            params.insert("n".to_string(), cfg.n as f64);
            let form = if name == "v0" { Form::Power } else { Form::Log };
            (catalog_field(name, &params)?, form)
        }
    };
    match cfg.form.unwrap_or(default_form) {
        Form::Log => ConformalStructure::log_form(conv.clone(), expr),
        Form::Power => ConformalStructure::power_form(conv.clone(), expr),
    }
}

/// Seeded sample points in the cube of half-width `radius`.
pub fn sample_points(n: usize, count: usize, seed: u64, radius: f64) -> Vec<HPoint> {
    let mut rng = seeded(seed);
    (0..count).map(|_| random_point(&mut rng, n, radius)).collect()
}

fn at_point(error: Error, point: &HPoint) -> Error {
    let location = format!("{:?}", point.coords());
    match error {
        Error::Domain(msg) => Error::Domain(format!("{msg} at point {location}")),
        Error::Evaluation { subexpression, reason } => {
            Error::Evaluation { subexpression, reason: format!("{reason} at point {location}") }
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ResidualRow {
    coords: Vec<f64>,
    sigma_k: f64,
    u_form: f64,
    v_form: f64,
    in_gamma_k: bool,
    cotton_reduced: f64,
    cotton_genuine: f64,
}

/// `λ` of the u-form equation and `λ̂ = (n/2)^k λ` of the v-form.
fn resolve_lambda(cfg: &RunConfig, cs: &ConformalStructure, first: &HPoint) -> Result<(f64, f64)> {
    let scale = (0.5 * cfg.n as f64).powi(cfg.k as i32);
    match cfg.lambda {
        LambdaSpec::Value(lambda) => Ok((lambda, scale * lambda)),
        LambdaSpec::Auto => {
            let hat = v_form_quotient(cs, cfg.k, first).map_err(|e| at_point(e, first))?;
            Ok((hat / scale, hat))
        }
    }
}

fn residual_row(cs: &ConformalStructure, k: usize, lambda: f64, point: &HPoint) -> Result<ResidualRow> {
    let residual = yamabe_residual(cs, k, lambda, point)?;
    let s_mixed = schouten(cs, point)?.s_mixed;
    Ok(ResidualRow {
        coords: point.coords(),
        sigma_k: sigma_k_curvature(cs, point, k)?,
        u_form: residual.u_form,
        v_form: residual.v_form,
        in_gamma_k: cone_membership(&s_mixed, k)?.in_gamma_k(),
        cotton_reduced: cotton(cs, point)?.max_abs(),
        cotton_genuine: cotton_tensor(cs, point)?.max_abs(),
    })
}

/// Residuals, cone verdicts, Cotton norms and the ellipticity certificate over a seeded sample.
pub fn run_residual(cfg: &RunConfig, conv: &ModelConvention) -> Result<Outcome> {
    if cfg.samples == 0 {
        return Err(Error::Validation("residual needs at least one sample".into()));
    }
    let cs = base_structure(cfg, conv)?;
    let points = sample_points(cfg.n, cfg.samples, cfg.seed, SAMPLE_RADIUS);
    let (lambda, lambda_hat) = resolve_lambda(cfg, &cs, &points[0])?;
    let rows = points
        .iter()
        .map(|p| residual_row(&cs, cfg.k, lambda, p).map_err(|e| at_point(e, p)))
        .collect::<Result<Vec<_>>>()?;
    let max_of = |f: fn(&ResidualRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let max_u = max_of(|r| r.u_form.abs());
    let max_v = max_of(|r| r.v_form.abs());
    let tol = cfg.tol.unwrap_or(RESIDUAL_TOL);
    let mut checks = vec![
        Check::new("max_abs_u_form_residual", Comparison::Absolute, max_u, 0.0, tol),
        Check::new("max_abs_v_form_residual", Comparison::Absolute, max_v, 0.0, tol),
    ];
    let ellipticity = if rows.iter().all(|r| r.sigma_k > 0.0) {
        let directions = LINEARIZATION_DIRECTIONS
            .iter()
            .map(|text| parse_field(text, cfg.n))
            .collect::<Result<Vec<FieldExpr>>>()?;
        let report = ellipticity_certificate(&cs, cfg.k, &points, &directions)?;
        checks.push(Check::new("ellipticity_min_eigenvalue", Comparison::Exceeds, report.min_eigenvalue, 0.0, 0.0));
        checks.push(Check::new(
            "max_linearization_gap",
            Comparison::AtMost,
            report.max_linearization_gap,
            0.0,
            LINEARIZATION_TOL,
        ));
        let worst: Option<&LinearizationCheck> =
            report.checks.iter().max_by(|a, b| a.relative_gap.total_cmp(&b.relative_gap));
        json!({
            "min_eigenvalue": report.min_eigenvalue,
            "argmin_sample": report.argmin_sample,
            "elliptic": report.elliptic,
            "max_linearization_gap": report.max_linearization_gap,
            "linearization_passed": report.linearization_passed,
            "worst_linearization_check": worst,
        })
    } else {
        json!({ "skipped": format!("sigma_{} is not positive at every sample", cfg.k) })
    };
    let table = Table {
        header: ["sample", "coords", "sigma_k", "u_form", "v_form", "in_gamma_k", "cotton_reduced", "cotton_genuine"]
            .map(String::from)
            .to_vec(),
        rows: rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let coords: Vec<String> = r.coords.iter().map(|x| format!("{x:e}")).collect();
                vec![
                    i.to_string(),
                    coords.join(" "),
                    format!("{:e}", r.sigma_k),
                    format!("{:e}", r.u_form),
                    format!("{:e}", r.v_form),
                    r.in_gamma_k.to_string(),
                    format!("{:e}", r.cotton_reduced),
                    format!("{:e}", r.cotton_genuine),
                ]
            })
            .collect(),
    };
    Ok(Outcome {
        checks,
        results: json!({
            "structure": cs.factor.to_string(),
            "lambda": lambda,
            "lambda_hat": lambda_hat,
            "lambda_hat_literal": lambda_hat * cfg.k as f64,
            "summary": {
                "max_abs_u_form": max_u,
                "max_abs_v_form": max_v,
                "in_gamma_k": rows.iter().filter(|r| r.in_gamma_k).count(),
                "samples": rows.len(),
                "max_cotton_reduced": max_of(|r| r.cotton_reduced),
                "max_cotton_genuine": max_of(|r| r.cotton_genuine),
            },
            "ellipticity": ellipticity,
            "points": rows,
        }),
        table: Some(table),
    })
}

/// Pointwise constancy of `σ_k` on the sphere structure and the pseudo-Einstein cross-check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SphereConstancy {
    pub samples: usize,
    pub sigma_k_min: f64,
    pub sigma_k_max: f64,
    /// `(max − min) / max |σ_k|`.
    pub relative_spread: f64,
    /// Webster curvature `R = 2(n+1) σ_1`.
    pub webster_curvature: f64,
    pub pseudo_einstein_sigma_k: f64,
    /// Largest `|σ_k − σ_k^{PE}(R)| / |σ_k^{PE}(R)|` over the samples.
    pub pseudo_einstein_gap: f64,
}

/// Samples `σ_k` and `σ_1` of the Cayley structure at seeded points.
pub fn sphere_constancy(conv: &ModelConvention, k: usize, samples: usize, seed: u64) -> Result<SphereConstancy> {
    if samples == 0 {
        return Err(Error::Validation("sphere constancy needs at least one sample".into()));
    }
    let n = conv.n;
    let cs = sphere_structure(conv)?;
    let points = sample_points(n, samples, seed, SAMPLE_RADIUS);
    let mut sigma_k = Vec::with_capacity(samples);
    let mut gap = 0.0_f64;
    let mut first_curvature = None;
    for p in &points {
        let s_k = sigma_k_curvature(&cs, p, k).map_err(|e| at_point(e, p))?;
        let webster = 2.0 * (n as f64 + 1.0) * sigma_k_curvature(&cs, p, 1).map_err(|e| at_point(e, p))?;
        let predicted = pseudo_einstein_sigma(n, k, webster)?;
        gap = gap.max((s_k - predicted).abs() / predicted.abs());
        first_curvature.get_or_insert((webster, predicted));
        sigma_k.push(s_k);
    }
    let lo = sigma_k.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = sigma_k.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (webster_curvature, pseudo_einstein_sigma_k) = first_curvature.unwrap_or_default();
    Ok(SphereConstancy {
        samples,
        sigma_k_min: lo,
        sigma_k_max: hi,
        relative_spread: (hi - lo) / lo.abs().max(hi.abs()),
        webster_curvature,
        pseudo_einstein_sigma_k,
        pseudo_einstein_gap: gap,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
struct ConvergenceRow {
    level: u32,
    points: usize,
    nodes: usize,
    estimate: f64,
    deviation: f64,
    error_estimate: f64,
    tail_fraction: f64,
}

/// The sphere constant across refinement levels `0..=grid_level`.
pub fn sphere_convergence(conv: &ModelConvention, k: usize, grid_level: u32) -> Result<(Vec<SphereLambda>, Vec<u32>)> {
    let levels: Vec<u32> = (0..=grid_level).collect();
    let runs = levels
        .iter()
        .map(|&level| sphere_lambda(conv, k, &default_sphere_grid(sphere_points(level))))
        .collect::<Result<Vec<_>>>()?;
    Ok((runs, levels))
}

/// The sphere constant with its convergence table and the pointwise cross-check.
pub fn run_verify_sphere(cfg: &RunConfig, conv: &ModelConvention) -> Result<Outcome> {
    if cfg.n > SPHERE_MAX_N && !cfg.allow_large_n {
        return Err(Error::Validation(format!(
            "verify-sphere is limited to n <= {SPHERE_MAX_N}; pass --allow-large-n to run n = {}",
            cfg.n
        )));
    }
    let tol = cfg.tol.unwrap_or_else(|| sphere_tolerance(cfg.n));
    let (runs, levels) = sphere_convergence(conv, cfg.k, cfg.grid_level)?;
    let table: Vec<ConvergenceRow> = runs
        .iter()
        .zip(&levels)
        .map(|(run, &level)| ConvergenceRow {
            level,
            points: run.report.grid.points,
            nodes: run.report.nodes,
            estimate: run.estimate,
            deviation: run.deviation,
            error_estimate: run.report.error_estimate,
            tail_fraction: run.report.tail_fraction,
        })
        .collect();
    let last = runs.last().ok_or_else(|| Error::Integration("no refinement level was run".into()))?;
    if !(last.report.error_estimate <= tol * last.target) {
        let history: Vec<String> =
            table.iter().map(|r| format!("{} points: {} (error {:e})", r.points, r.estimate, r.error_estimate)).collect();
        return Err(Error::Integration(format!(
            "sphere constant did not converge to relative tolerance {tol:e}; refinement history: {}",
            history.join("; ")
        )));
    }
    let constancy = sphere_constancy(conv, cfg.k, cfg.samples, cfg.seed)?;
    let checks = vec![
        Check::new("sphere_constant", Comparison::Relative, last.estimate, last.target, tol),
        Check::new("sigma_k_relative_spread", Comparison::AtMost, constancy.relative_spread, 0.0, SPREAD_TOL),
        Check::new("pseudo_einstein_gap", Comparison::AtMost, constancy.pseudo_einstein_gap, 0.0, PSEUDO_EINSTEIN_TOL),
    ];
    Ok(Outcome {
        checks,
        results: json!({
            "estimate": last.estimate,
            "target": last.target,
            "binomial": binomial(cfg.n, cfg.k),
            "deviation": last.deviation,
            "functional": last.report,
            "convergence": table,
            "constancy": constancy,
        }),
        table: None,
    })
}

/// Seeded unit bumps of radius [`BUMP_RADIUS`] with ball grids at a refinement level.
pub fn bump_directions(n: usize, count: usize, seed: u64, grid_level: u32) -> Result<Vec<Direction>> {
    let mut rng = seeded(seed);
    let (radial, angular) = ball_points(grid_level);
    (0..count)
        .map(|_| {
            let center: Vec<f64> =
                (0..2 * n + 1).map(|_| rng.gen_range(-BUMP_CENTER_RANGE..=BUMP_CENTER_RANGE)).collect();
            Direction::bump(n, &center, BUMP_RADIUS, radial, angular)
        })
        .collect()
}

fn is_sphere_base(cfg: &RunConfig) -> bool {
    cfg.field.is_none() && cfg.catalog.as_deref().unwrap_or("v0") == "v0" && cfg.form != Some(Form::Log)
}

fn gated_gap(report: &VariationReport, coefficient: Coefficient) -> f64 {
    match coefficient {
        Coefficient::Consistent => report.gap_consistent,
        Coefficient::Stated => report.gap_stated,
    }
}

/// Finite-difference variation of `F_k` along seeded bumps, and criticality at the sphere.
pub fn run_variation(cfg: &RunConfig, conv: &ModelConvention) -> Result<Outcome> {
    if cfg.directions == 0 {
        return Err(Error::Validation("variation needs at least one direction".into()));
    }
    let cs = base_structure(cfg, conv)?;
    let directions = bump_directions(cfg.n, cfg.directions, cfg.seed, cfg.grid_level)?;
    let options = VariationOptions { enforce_cotton: cfg.strict, ..VariationOptions::default() };
    let tol = cfg.tol.unwrap_or(VARIATION_TOL);
    let reports = directions
        .iter()
        .map(|d| variational_derivative(&cs, d, cfg.k, &options))
        .collect::<Result<Vec<_>>>()?;
    let mut checks: Vec<Check> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| Check::new(format!("variation_gap_{i}"), Comparison::AtMost, gated_gap(r, cfg.coefficient), 0.0, tol))
        .collect();
    let criticality = if is_sphere_base(cfg) {
        let grid = default_sphere_grid(sphere_points(cfg.grid_level));
        let report = criticality_check(conv, cfg.k, &grid, &directions, options.step)?;
        checks.push(Check::new("criticality_max_abs", Comparison::AtMost, report.max_abs, 0.0, CRITICALITY_TOL));
        serde_json::to_value(&report).map_err(|e| Error::Validation(e.to_string()))?
    } else {
        json!({ "skipped": "criticality is checked at the sphere structure only" })
    };
    let grids: Vec<&GridSpec> = directions.iter().map(|d| &d.grid).collect();
    let ball = grids.first().and_then(|g| match &g.kind {
        GridKind::Ball { angular_points, .. } => Some((g.points, *angular_points)),
        _ => None,
    });
    Ok(Outcome {
        checks,
        results: json!({
            "base": cs.factor.to_string(),
            "coefficient": cfg.coefficient,
            "ball_grid": ball,
            "max_gap_consistent": reports.iter().map(|r| r.gap_consistent).fold(0.0, f64::max),
            "max_gap_stated": reports.iter().map(|r| r.gap_stated).fold(0.0, f64::max),
            "cotton_hypothesis_holds": reports.iter().all(|r| r.cotton_hypothesis_holds),
            "variations": reports,
            "criticality": criticality,
        }),
        table: None,
    })
}
