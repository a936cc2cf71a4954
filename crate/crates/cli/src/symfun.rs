//! Symmetric-function checks on a single matrix or a seeded batch.

use std::path::Path;

use cryamabe::sampling::{gamma_k_matrix, random_hermitian, seeded, with_spectrum};
use cryamabe::symmetric_functions::reference::{newton_transform_kronecker, sigma_k_kronecker};
use cryamabe::symmetric_functions::{
    binomial, concavity_check, cone_membership, inequality_suite, newton_transform, sigmas, ConeReport,
    HermitianMatrix, InequalityReport,
};
use cryamabe::{Complex64, Error, Result};
use rand::Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::report::{Check, Comparison, Outcome};

/// Relative tolerance of the algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-9;
/// Lower bound on inequality slacks and concavity gaps.
pub const SLACK_TOL: f64 = 1e-10;
/// Largest order for which the factorial-cost Kronecker expansion is run.
pub const KRONECKER_MAX_DIM: usize = 8;
/// Interior points of each concavity segment.
const CONCAVITY_SAMPLES: usize = 11;
/// Every tenth inequality sample is a positive multiple of the identity.
const SCALAR_EVERY: usize = 10;

/// Worst relative defects of the Newton-transformation identities of one matrix.
///
/// A defect in a quantity of degree `j` is measured against
/// `C(n,j) ρ^j`, with `ρ` the spectral radius, which bounds `|σ_j|`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityDefects {
    pub n: usize,
    pub sigmas: Vec<f64>,
    /// `σ_1(T_j) = (n−j) σ_j`.
    pub trace: f64,
    /// `σ_1(T_j A) = (j+1) σ_{j+1}`.
    pub product: f64,
    /// Recurrence `T_j` against the Kronecker-symbol expansion.
    pub newton_kronecker: f64,
    /// Spectral `σ_j` against the Kronecker-symbol expansion.
    pub sigma_kronecker: f64,
}

impl IdentityDefects {
    pub fn worst(&self) -> f64 {
        self.trace.max(self.product).max(self.newton_kronecker).max(self.sigma_kronecker)
    }
}

fn degree_scale(n: usize, j: usize, radius: f64) -> f64 {
    (binomial(n, j) * radius.powi(j as i32)).max(f64::MIN_POSITIVE)
}

/// Checks every identity of the Newton transformations on `a`.
pub fn identity_defects(a: &HermitianMatrix) -> Result<IdentityDefects> {
    let n = a.dim();
    let sig = sigmas(a);
    let radius = a.eigenvalues().iter().fold(0.0_f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let mut defects = IdentityDefects {
        n,
        sigmas: sig.clone(),
        trace: 0.0,
        product: 0.0,
        newton_kronecker: 0.0,
        sigma_kronecker: 0.0,
    };
    for j in 0..n {
        let t = newton_transform(a, j)?;
        let trace = t.trace();
        let product = (t.as_matrix() * a.as_matrix()).trace().re;
        let expected_trace = (n - j) as f64 * sig[j];
        let expected_product = (j + 1) as f64 * sig[j + 1];
        defects.trace = defects.trace.max((trace - expected_trace).abs() / degree_scale(n, j, radius));
        defects.product = defects.product.max((product - expected_product).abs() / degree_scale(n, j + 1, radius));
        if n <= KRONECKER_MAX_DIM {
            let gap = (t.as_matrix() - newton_transform_kronecker(a, j)).iter().map(|z| z.norm()).fold(0.0, f64::max);
            defects.newton_kronecker = defects.newton_kronecker.max(gap / degree_scale(n, j, radius));
        }
    }
    if n <= KRONECKER_MAX_DIM {
        for (j, &s) in sig.iter().enumerate() {
            let gap = (s - sigma_k_kronecker(a, j)).abs() / degree_scale(n, j, radius);
            defects.sigma_kronecker = defects.sigma_kronecker.max(gap);
        }
    }
    Ok(defects)
}

/// Outcome of the Γ_k⁺ inequality suite on one sample.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalitySample {
    pub inequalities: InequalityReport,
    pub concavity_gap: f64,
    /// Smallest eigenvalue of `T_{k−1}(A)`.
    pub newton_min_eigenvalue: f64,
    pub is_scalar_input: bool,
}

/// Aggregate of the inequality suite over a batch.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalitySummary {
    pub n: usize,
    pub k: usize,
    pub samples: usize,
    pub scalar_inputs: usize,
    pub min_newton_slack: f64,
    pub min_maclaurin_slack: f64,
    pub min_concavity_gap: f64,
    pub min_newton_eigenvalue: f64,
    /// Equality flagged on an input that is not a multiple of the identity.
    pub false_equalities: usize,
    /// A multiple of the identity without the equality flag (only when `k < n`).
    pub missed_equalities: usize,
}

/// Runs the inequality suite on `samples` seeded members of `Γ_k⁺`.
pub fn inequality_batch(n: usize, k: usize, samples: usize, seed: u64) -> Result<InequalitySummary> {
    if k == 0 || k > n {
        return Err(Error::Validation(format!("k must lie in 1..={n}, got {k}")));
    }
    let mut rng = seeded(seed);
    let mut summary = InequalitySummary {
        n,
        k,
        samples,
        scalar_inputs: 0,
        min_newton_slack: f64::INFINITY,
        min_maclaurin_slack: f64::INFINITY,
        min_concavity_gap: f64::INFINITY,
        min_newton_eigenvalue: f64::INFINITY,
        false_equalities: 0,
        missed_equalities: 0,
    };
    for index in 0..samples {
        let is_scalar_input = index % SCALAR_EVERY == 0;
        let a = if is_scalar_input {
            let lambda = rng.gen_range(0.5..2.0);
            with_spectrum(&mut rng, &vec![lambda; n])
        } else {
            gamma_k_matrix(&mut rng, n, k)
        };
        let b = gamma_k_matrix(&mut rng, n, k);
        let sample = inequality_sample(&a, &b, k, is_scalar_input)?;
        summary.scalar_inputs += usize::from(is_scalar_input);
        summary.min_newton_slack = summary.min_newton_slack.min(sample.inequalities.newton_slack);
        summary.min_maclaurin_slack = summary.min_maclaurin_slack.min(sample.inequalities.maclaurin_slack);
        summary.min_concavity_gap = summary.min_concavity_gap.min(sample.concavity_gap);
        summary.min_newton_eigenvalue = summary.min_newton_eigenvalue.min(sample.newton_min_eigenvalue);
        if sample.inequalities.equality && !is_scalar_input {
            summary.false_equalities += 1;
        }
        if is_scalar_input && sample.inequalities.newton_applicable && !sample.inequalities.equality {
            summary.missed_equalities += 1;
        }
    }
    Ok(summary)
}

fn inequality_sample(a: &HermitianMatrix, b: &HermitianMatrix, k: usize, is_scalar_input: bool) -> Result<InequalitySample> {
    Ok(InequalitySample {
        inequalities: inequality_suite(a, k)?,
        concavity_gap: concavity_check(a, b, k, CONCAVITY_SAMPLES)?,
        newton_min_eigenvalue: newton_transform(a, k - 1)?.min_eigenvalue(),
        is_scalar_input,
    })
}

/// Worst identity defects over `samples` seeded hermitian matrices of order `n`.
pub fn identity_batch(n: usize, samples: usize, seed: u64) -> Result<IdentityDefects> {
    let mut rng = seeded(seed);
    let mut worst: Option<IdentityDefects> = None;
    for _ in 0..samples {
        let defects = identity_defects(&random_hermitian(&mut rng, n, 1.0))?;
        worst = Some(match worst {
            Some(w) if w.worst() >= defects.worst() => w,
            _ => defects,
        });
    }
    worst.ok_or_else(|| Error::Validation("identity batch needs at least one sample".into()))
}

fn identity_checks(defects: &IdentityDefects) -> Vec<Check> {
    let mut checks = vec![
        Check::new("trace_identity_defect", Comparison::AtMost, defects.trace, 0.0, IDENTITY_TOL),
        Check::new("product_identity_defect", Comparison::AtMost, defects.product, 0.0, IDENTITY_TOL),
    ];
    if defects.n <= KRONECKER_MAX_DIM {
        checks.push(Check::new("sigma_kronecker_defect", Comparison::AtMost, defects.sigma_kronecker, 0.0, IDENTITY_TOL));
        checks.push(Check::new("newton_kronecker_defect", Comparison::AtMost, defects.newton_kronecker, 0.0, IDENTITY_TOL));
    }
    checks
}

fn inequality_checks(summary: &InequalitySummary) -> Vec<Check> {
    vec![
        Check::new("min_newton_slack", Comparison::AtLeast, summary.min_newton_slack, 0.0, SLACK_TOL),
        Check::new("min_maclaurin_slack", Comparison::AtLeast, summary.min_maclaurin_slack, 0.0, SLACK_TOL),
        Check::new("min_concavity_gap", Comparison::AtLeast, summary.min_concavity_gap, 0.0, SLACK_TOL),
        Check::new("min_newton_eigenvalue", Comparison::Exceeds, summary.min_newton_eigenvalue, 0.0, 0.0),
        Check::new(
            "equality_misclassifications",
            Comparison::AtMost,
            (summary.false_equalities + summary.missed_equalities) as f64,
            0.0,
            0.0,
        ),
    ]
}

fn matrix_entry(value: &Value) -> Option<Complex64> {
    match value {
        Value::Number(x) => x.as_f64().map(|re| Complex64::new(re, 0.0)),
        Value::Array(pair) if pair.len() == 2 => Some(Complex64::new(pair[0].as_f64()?, pair[1].as_f64()?)),
        Value::Object(map) => Some(Complex64::new(
            map.get("re").and_then(Value::as_f64).unwrap_or(0.0),
            map.get("im").and_then(Value::as_f64).unwrap_or(0.0),
        )),
        _ => None,
    }
}

/// Reads a matrix given inline as JSON rows or as a path to a JSON file.
pub fn read_matrix(source: &str) -> Result<HermitianMatrix> {
    let text = if source.trim_start().starts_with('[') {
        source.to_string()
    } else {
        std::fs::read_to_string(Path::new(source))
            .map_err(|e| Error::Validation(format!("cannot read matrix file {source}: {e}")))?
    };
    let value: Value =
        serde_json::from_str(&text).map_err(|e| Error::Validation(format!("matrix is not valid JSON: {e}")))?;
    let rows = value.as_array().ok_or_else(|| Error::Validation("matrix must be a JSON array of rows".into()))?;
    let rows = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            row.as_array()
                .ok_or_else(|| Error::Validation(format!("matrix row {i} is not an array")))?
                .iter()
                .enumerate()
                .map(|(j, entry)| {
                    matrix_entry(entry).ok_or_else(|| {
                        Error::Validation(format!("matrix entry ({i}, {j}) must be a number or a [re, im] pair"))
                    })
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    HermitianMatrix::from_rows(&rows)
}

/// Single-matrix mode when a matrix is configured, batch mode otherwise.
pub fn run_symfun(cfg: &RunConfig) -> Result<Outcome> {
    match &cfg.matrix {
        Some(source) => {
            let a = read_matrix(source)?;
            if a.dim() != cfg.n {
                return Err(Error::Validation(format!("matrix has order {} but n = {}", a.dim(), cfg.n)));
            }
            single_matrix(&a, cfg.k)
        }
        None => batch(cfg),
    }
}

/// Batch mode only.
pub fn run_inequalities(cfg: &RunConfig) -> Result<Outcome> {
    if cfg.matrix.is_some() {
        return Err(Error::Validation("inequalities runs on a seeded batch; use symfun for a single matrix".into()));
    }
    batch(cfg)
}

fn batch(cfg: &RunConfig) -> Result<Outcome> {
    let identities = identity_batch(cfg.n, cfg.samples, cfg.seed)?;
    let inequalities = inequality_batch(cfg.n, cfg.k, cfg.samples, cfg.seed.wrapping_add(1))?;
    let mut checks = identity_checks(&identities);
    checks.extend(inequality_checks(&inequalities));
    Ok(Outcome {
        checks,
        results: json!({ "worst_identity_sample": identities, "inequalities": inequalities }),
        table: None,
    })
}

fn single_matrix(a: &HermitianMatrix, k: usize) -> Result<Outcome> {
    let n = a.dim();
    let defects = identity_defects(a)?;
    let cone: ConeReport = cone_membership(a, k)?;
    let mut checks = identity_checks(&defects);
    let inequalities = if cone.in_gamma_k() {
        let report = inequality_suite(a, k)?;
        let newton_min_eigenvalue = newton_transform(a, k - 1)?.min_eigenvalue();
        checks.push(Check::new("newton_slack", Comparison::AtLeast, report.newton_slack, 0.0, SLACK_TOL));
        checks.push(Check::new("maclaurin_slack", Comparison::AtLeast, report.maclaurin_slack, 0.0, SLACK_TOL));
        checks.push(Check::new("newton_min_eigenvalue", Comparison::Exceeds, newton_min_eigenvalue, 0.0, 0.0));
        json!({ "report": report, "newton_min_eigenvalue": newton_min_eigenvalue })
    } else {
        json!({ "skipped": format!("matrix is not in Gamma_{k}^+") })
    };
    Ok(Outcome {
        checks,
        results: json!({
            "n": n,
            "k": k,
            "eigenvalues": a.eigenvalues(),
            "sigmas": defects.sigmas,
            "sigma_k": defects.sigmas[k],
            "identity_defects": defects,
            "cone": cone,
            "inequalities": inequalities,
        }),
        table: None,
    })
}
