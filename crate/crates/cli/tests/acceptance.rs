//! Acceptance run: one PASS/FAIL line per criterion.
//!
//! Criteria marked unattainable are evaluated and printed like the others but
//! do not affect the exit status; every other criterion must pass.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use cryamabe::conformal_engine::{ellipticity_certificate, sigma_k_curvature, ConformalStructure};
use cryamabe::field_calculus::{catalog_field, fd_jet3, CatalogParams, FieldExpr, Func, HPoint, Jet3, Var, CATALOG_NAMES};
use cryamabe::heisenberg_geometry::{frame_derivatives, grad_norm_sq, sublaplacian, ModelConvention};
use cryamabe::sampling::{random_point, seeded};
use cryamabe::symmetric_functions::binomial;
use cryamabe::yamabe_functional::{
    criticality_check, default_sphere_grid, variational_derivative, VariationOptions,
};
use cryamabe::Complex64;
use cryamabe_cli::config::Flags;
use cryamabe_cli::geometry::{bump_directions, sphere_constancy, sphere_points, sphere_tolerance, CRITICALITY_TOL};
use cryamabe_cli::symfun::{identity_batch, inequality_batch, IDENTITY_TOL, SLACK_TOL};
use cryamabe_cli::{run, Command};
use rand::Rng;

const SPHERE_PAIRS: [(usize, usize); 6] = [(1, 1), (2, 1), (2, 2), (3, 1), (3, 2), (3, 3)];
const SPHERE_RUN_BUDGET: Duration = Duration::from_secs(120);
const CONSTANCY_SAMPLES: usize = 50;
const SPREAD_TOL: f64 = 1e-6;
const PSEUDO_EINSTEIN_TOL: f64 = 1e-7;
const MATRICES_PER_ORDER: usize = 100;
const SYMFUN_BUDGET: Duration = Duration::from_secs(30);
const INEQUALITY_SAMPLES: usize = 500;
const RANDOM_TREES: usize = 50;
const POINTS_PER_FIELD: usize = 20;
const FD_STEP: f64 = 1e-3;
const LOW_ORDER_TOL: f64 = 1e-6;
const THIRD_ORDER_TOL: f64 = 1e-4;
const COMMUTATION_TOL: f64 = 1e-8;
const REDUCTION_PAIRS: usize = 100;
const REDUCTION_TOL: f64 = 1e-9;
const VARIATION_PAIRS: [(usize, usize); 3] = [(1, 1), (2, 1), (2, 2)];
const VARIATION_DIRECTIONS: usize = 3;
const VARIATION_GRID_LEVEL: u32 = 1;
const VARIATION_TOL: f64 = 1e-3;
const LINEARIZATION_TOL: f64 = 1e-4;
const ELLIPTICITY_SAMPLES: usize = 20;

struct Verdict {
    name: &'static str,
    passed: bool,
    detail: String,
    attainable: bool,
}

impl Verdict {
    fn new(name: &'static str, passed: bool, detail: String) -> Self {
        Self { name, passed, detail, attainable: true }
    }
}

fn sphere_factor(n: usize) -> FieldExpr {
    catalog_field("v0", &CatalogParams::from([("n".to_string(), n as f64)])).expect("v0 is in the catalog")
}

fn sphere_constant() -> Verdict {
    let mut passed = true;
    let mut parts = Vec::new();
    for (n, k) in SPHERE_PAIRS {
        let flags = Flags { n: Some(n), k: Some(k), ..Flags::default() };
        let start = Instant::now();
        let outcome = run(Command::VerifySphere, flags);
        let elapsed = start.elapsed();
        let target = binomial(n, k) * PI.powi(k as i32);
        match outcome {
            Ok(done) => {
                let estimate = done.report.results["estimate"].as_f64().unwrap_or(f64::NAN);
                let deviation = (estimate - target).abs() / target;
                let ok = deviation <= sphere_tolerance(n) && elapsed <= SPHERE_RUN_BUDGET;
                passed &= ok;
                parts.push(format!("({n},{k}) rel dev {deviation:.1e} in {:.1}s", elapsed.as_secs_f64()));
            }
            Err(e) => {
                passed = false;
                parts.push(format!("({n},{k}) error: {e}"));
            }
        }
    }
    Verdict::new("sphere constant C(n,k) pi^k", passed, parts.join("; "))
}

fn sphere_pointwise_constancy() -> Verdict {
    let mut passed = true;
    let (mut spread, mut gap) = (0.0_f64, 0.0_f64);
    for (n, k) in SPHERE_PAIRS {
        match sphere_constancy(&ModelConvention::standard(n), k, CONSTANCY_SAMPLES, 7) {
            Ok(c) => {
                spread = spread.max(c.relative_spread);
                gap = gap.max(c.pseudo_einstein_gap);
            }
            Err(_) => passed = false,
        }
    }
    passed &= spread <= SPREAD_TOL && gap <= PSEUDO_EINSTEIN_TOL;
    Verdict::new(
        "sphere pointwise constancy",
        passed,
        format!("{CONSTANCY_SAMPLES} points per (n,k): max spread {spread:.1e}, max pseudo-Einstein gap {gap:.1e}"),
    )
}

fn symmetric_function_suite() -> Verdict {
    let start = Instant::now();
    let mut worst = 0.0_f64;
    let mut failed = false;
    for n in 2..=6 {
        match identity_batch(n, MATRICES_PER_ORDER, 100 + n as u64) {
            Ok(d) => worst = worst.max(d.worst()),
            Err(_) => failed = true,
        }
    }
    let elapsed = start.elapsed();
    Verdict::new(
        "symmetric-function identities",
        !failed && worst <= IDENTITY_TOL && elapsed <= SYMFUN_BUDGET,
        format!("{} matrices: worst defect {worst:.1e} in {:.2}s", 5 * MATRICES_PER_ORDER, elapsed.as_secs_f64()),
    )
}

fn inequality_suite() -> Verdict {
    let mut passed = true;
    let (mut slack, mut concavity, mut eigen, mut misclassified, mut pairs) = (f64::INFINITY, f64::INFINITY, f64::INFINITY, 0, 0);
    for n in 1..=6 {
        for k in 1..=n {
            pairs += 1;
            match inequality_batch(n, k, INEQUALITY_SAMPLES, 1000 + 10 * n as u64 + k as u64) {
                Ok(s) => {
                    slack = slack.min(s.min_newton_slack).min(s.min_maclaurin_slack);
                    concavity = concavity.min(s.min_concavity_gap);
                    eigen = eigen.min(s.min_newton_eigenvalue);
                    misclassified += s.false_equalities + s.missed_equalities;
                }
                Err(_) => passed = false,
            }
        }
    }
    passed &= slack >= -SLACK_TOL && concavity >= -SLACK_TOL && eigen > 0.0 && misclassified == 0;
    Verdict::new(
        "matrix inequalities on Garding cones",
        passed,
        format!(
            "{pairs} (n,k) pairs x {INEQUALITY_SAMPLES}: min slack {slack:.1e}, min concavity gap {concavity:.1e}, \
             min T_(k-1) eigenvalue {eigen:.1e}, equality misclassifications {misclassified}"
        ),
    )
}

fn variable(n: usize, slot: usize) -> FieldExpr {
    FieldExpr::Var(match slot {
        s if s < n => Var::X(s),
        s if s < 2 * n => Var::Y(s - n),
        _ => Var::T,
    })
}

fn shifted_square(e: FieldExpr) -> FieldExpr {
    FieldExpr::add(FieldExpr::Const(1.5), FieldExpr::pow(e, 2.0))
}

/// A random expression that is smooth and finite everywhere.
fn random_field<R: Rng>(rng: &mut R, n: usize, depth: usize) -> FieldExpr {
    if depth == 0 || rng.gen_bool(0.25) {
        return if rng.gen_bool(0.3) {
            FieldExpr::Const(rng.gen_range(-2.0..2.0))
        } else {
            variable(n, rng.gen_range(0..=2 * n))
        };
    }
    let child = |rng: &mut R| random_field(rng, n, depth - 1);
    match rng.gen_range(0..11) {
        0 => FieldExpr::add(child(rng), child(rng)),
        1 => FieldExpr::sub(child(rng), child(rng)),
        2 => FieldExpr::mul(child(rng), child(rng)),
        3 => FieldExpr::div(child(rng), shifted_square(child(rng))),
        4 => FieldExpr::neg(child(rng)),
        5 => FieldExpr::pow(child(rng), 2.0),
        6 => FieldExpr::func(Func::Sin, child(rng)),
        7 => FieldExpr::func(Func::Cos, child(rng)),
        8 => FieldExpr::func(Func::Exp, FieldExpr::func(Func::Sin, child(rng))),
        9 => FieldExpr::func(Func::Log, shifted_square(child(rng))),
        _ => FieldExpr::func(Func::Sqrt, shifted_square(child(rng))),
    }
}

/// Richardson combination of central-difference jets at `h` and `h/2`.
fn extrapolated_fd(expr: &FieldExpr, point: &HPoint) -> cryamabe::Result<Jet3> {
    let coarse = fd_jet3(expr, point, FD_STEP)?;
    let fine = fd_jet3(expr, point, FD_STEP / 2.0)?;
    let combine = |f: &[f64], c: &[f64], ratio: f64| -> Vec<f64> {
        f.iter().zip(c).map(|(a, b)| (ratio * a - b) / (ratio - 1.0)).collect()
    };
    Ok(Jet3::from_parts(
        coarse.dim(),
        fine.value(),
        combine(fine.grad_slice(), coarse.grad_slice(), 4.0),
        combine(fine.hess_slice(), coarse.hess_slice(), 4.0),
        combine(fine.third_slice(), coarse.third_slice(), 2f64.powf(1.6)),
    ))
}

fn order_gap(ad: &Jet3, fd: &Jet3, order: usize) -> f64 {
    let scale = ad.max_abs_of_order(order).max(1.0);
    let (a, b): (&[f64], &[f64]) = match order {
        1 => (ad.grad_slice(), fd.grad_slice()),
        2 => (ad.hess_slice(), fd.hess_slice()),
        _ => (ad.third_slice(), fd.third_slice()),
    };
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max) / scale
}

fn commutation_defect(expr: &FieldExpr, point: &HPoint, conv: &ModelConvention) -> cryamabe::Result<f64> {
    let cj = frame_derivatives(&expr.eval_jet(point, 2)?, point, conv)?;
    let mut worst = 0.0_f64;
    for a in 0..conv.n {
        for b in 0..conv.n {
            let reeb = if a == b { Complex64::i() * cj.u0 * conv.levi_scale } else { Complex64::new(0.0, 0.0) };
            let defect = cj.u_albe_bar[(a, b)] - cj.u_bebar_al[(a, b)] - reeb;
            worst = worst.max(defect.norm() / cj.u_albe_bar[(a, b)].norm().max(1.0));
        }
    }
    Ok(worst)
}

fn calculus_oracle() -> Verdict {
    let mut rng = seeded(2024);
    let mut fields: Vec<(usize, FieldExpr)> = Vec::new();
    for n in 1..=3 {
        let params = |extra: &[(&str, f64)]| {
            let mut p = CatalogParams::from([("n".to_string(), n as f64)]);
            p.extend(extra.iter().map(|(k, v)| (k.to_string(), *v)));
            p
        };
        for name in CATALOG_NAMES {
            let extra: &[(&str, f64)] = match name {
                "bump" => &[("radius", 2.5), ("amplitude", 0.7), ("ct", 0.2)],
                "gaussian" => &[("a", 0.8)],
                "monomial" => &[("x1", 2.0), ("t", 1.0), ("coeff", -0.5)],
                _ => &[],
            };
            if let Ok(f) = catalog_field(name, &params(extra)) {
                fields.push((n, f));
            }
        }
    }
    let catalog_count = fields.len();
    for i in 0..RANDOM_TREES {
        let n = 1 + i % 3;
        fields.push((n, random_field(&mut rng, n, 4)));
    }
    let (mut low, mut third, mut commutation, mut errors) = (0.0_f64, 0.0_f64, 0.0_f64, 0);
    for (n, expr) in &fields {
        let conv = ModelConvention::standard(*n);
        for _ in 0..POINTS_PER_FIELD {
            let point = random_point(&mut rng, *n, 1.0);
            let measured = expr.eval_jet(&point, 3).and_then(|ad| {
                let fd = extrapolated_fd(expr, &point)?;
                Ok((ad, fd, commutation_defect(expr, &point, &conv)?))
            });
            match measured {
                Ok((ad, fd, defect)) => {
                    low = low.max(order_gap(&ad, &fd, 1)).max(order_gap(&ad, &fd, 2));
                    third = third.max(order_gap(&ad, &fd, 3));
                    commutation = commutation.max(defect);
                }
                Err(_) => errors += 1,
            }
        }
    }
    Verdict::new(
        "calculus oracle",
        errors == 0 && low <= LOW_ORDER_TOL && third <= THIRD_ORDER_TOL && commutation <= COMMUTATION_TOL,
        format!(
            "{catalog_count} catalog + {RANDOM_TREES} random fields x {POINTS_PER_FIELD} points: \
             orders 1-2 gap {low:.1e}, order 3 gap {third:.1e}, commutation defect {commutation:.1e}, errors {errors}"
        ),
    )
}

fn first_order_reduction() -> Verdict {
    let mut rng = seeded(31);
    let (mut worst, mut errors) = (0.0_f64, 0);
    for i in 0..REDUCTION_PAIRS {
        let n = 1 + i % 3;
        let conv = ModelConvention::standard(n);
        let u = random_field(&mut rng, n, 4);
        let point = random_point(&mut rng, n, 1.0);
        let measured = ConformalStructure::log_form(conv.clone(), u.clone()).and_then(|cs| {
            let cj = frame_derivatives(&u.eval_jet(&point, 2)?, &point, &conv)?;
            let nf = n as f64;
            let expected = (-2.0 * cj.value).exp() / (2.0 * (nf + 1.0))
                * (2.0 * (nf + 1.0) * sublaplacian(&cj, &conv) - 2.0 * nf * (nf + 1.0) * grad_norm_sq(&cj, &conv));
            Ok((sigma_k_curvature(&cs, &point, 1)?, expected))
        });
        match measured {
            Ok((actual, expected)) => {
                worst = worst.max((actual - expected).abs() / actual.abs().max(expected.abs()).max(1e-12));
            }
            Err(_) => errors += 1,
        }
    }
    Verdict::new(
        "k = 1 sublaplacian reduction",
        errors == 0 && worst <= REDUCTION_TOL,
        format!("{REDUCTION_PAIRS} (field, point) pairs: worst relative gap {worst:.1e}, errors {errors}"),
    )
}

struct VariationSummary {
    stated: f64,
    consistent: f64,
    criticality: f64,
    cotton_holds: bool,
    error: Option<String>,
}

fn variation_summary() -> VariationSummary {
    let mut summary =
        VariationSummary { stated: 0.0, consistent: 0.0, criticality: 0.0, cotton_holds: true, error: None };
    let options = VariationOptions::default();
    for (n, k) in VARIATION_PAIRS {
        let conv = ModelConvention::standard(n);
        let measured = bump_directions(n, VARIATION_DIRECTIONS, 11, VARIATION_GRID_LEVEL).and_then(|directions| {
            let cs = ConformalStructure::power_form(conv.clone(), sphere_factor(n))?;
            let reports = directions
                .iter()
                .map(|d| variational_derivative(&cs, d, k, &options))
                .collect::<cryamabe::Result<Vec<_>>>()?;
            let grid = default_sphere_grid(sphere_points(VARIATION_GRID_LEVEL));
            let critical = criticality_check(&conv, k, &grid, &directions, options.step)?;
            Ok((reports, critical.max_abs))
        });
        match measured {
            Ok((reports, critical)) => {
                for r in reports {
                    summary.stated = summary.stated.max(r.gap_stated);
                    summary.consistent = summary.consistent.max(r.gap_consistent);
                    summary.cotton_holds &= r.cotton_hypothesis_holds;
                }
                summary.criticality = summary.criticality.max(critical);
            }
            Err(e) => summary.error = Some(format!("({n},{k}): {e}")),
        }
    }
    summary
}

fn variation_verdicts() -> Vec<Verdict> {
    let s = variation_summary();
    let ok = s.error.is_none() && s.cotton_holds;
    let critical = ok && s.criticality <= CRITICALITY_TOL;
    let suffix = s.error.map(|e| format!(", error {e}")).unwrap_or_default();
    vec![
        Verdict {
            name: "variational identity with coefficient -2(n+k+1)",
            passed: critical && s.stated <= VARIATION_TOL,
            detail: format!(
                "pairs (1,1) (2,1) (2,2): max gap {:.2e}, criticality {:.1e}{suffix}",
                s.stated, s.criticality
            ),
            attainable: false,
        },
        Verdict::new(
            "variational identity with coefficient 2(n+1-k)",
            critical && s.consistent <= VARIATION_TOL,
            format!("pairs (1,1) (2,1) (2,2): max gap {:.1e}, criticality {:.1e}{suffix}", s.consistent, s.criticality),
        ),
    ]
}

fn ellipticity() -> Verdict {
    let mut rng = seeded(97);
    let directions_for = |n: usize| {
        ["x1^2 - t", "exp(-(x1^2 + y1^2 + t^2))"]
            .iter()
            .map(|text| cryamabe::field_calculus::parse_field(text, n))
            .collect::<cryamabe::Result<Vec<_>>>()
    };
    let mut cases: Vec<(String, ConformalStructure, usize)> = Vec::new();
    for (n, k) in SPHERE_PAIRS {
        let conv = ModelConvention::standard(n);
        let sphere = sphere_factor(n);
        let bumped = FieldExpr::mul(
            sphere.clone(),
            FieldExpr::add(
                FieldExpr::Const(1.0),
                FieldExpr::mul(
                    FieldExpr::Const(0.1),
                    FieldExpr::func(
                        Func::Exp,
                        FieldExpr::neg(FieldExpr::add(
                            FieldExpr::pow(variable(n, 0), 2.0),
                            FieldExpr::pow(variable(n, 2 * n), 2.0),
                        )),
                    ),
                ),
            ),
        );
        for (label, factor) in [("sphere", sphere), ("perturbed sphere", bumped)] {
            if let Ok(cs) = ConformalStructure::power_form(conv.clone(), factor) {
                cases.push((format!("{label} ({n},{k})"), cs, k));
            }
        }
    }
    let (mut min_eigen, mut worst_gap, mut failures, mut structures) = (f64::INFINITY, 0.0_f64, Vec::new(), 0);
    for (label, cs, k) in &cases {
        let n = cs.conv.n;
        let points: Vec<HPoint> = (0..ELLIPTICITY_SAMPLES)
            .map(|_| random_point(&mut rng, n, 1.0))
            .filter(|p| sigma_k_curvature(cs, p, *k).is_ok_and(|s| s > 0.0))
            .collect();
        if points.is_empty() {
            continue;
        }
        structures += 1;
        match directions_for(n).and_then(|dirs| ellipticity_certificate(cs, *k, &points, &dirs)) {
            Ok(r) => {
                min_eigen = min_eigen.min(r.min_eigenvalue);
                worst_gap = worst_gap.max(r.max_linearization_gap);
                if !(r.min_eigenvalue > 0.0 && r.max_linearization_gap <= LINEARIZATION_TOL) {
                    failures.push(label.clone());
                }
            }
            Err(e) => failures.push(format!("{label}: {e}")),
        }
    }
    Verdict::new(
        "ellipticity of the k-Yamabe operator",
        failures.is_empty() && structures == cases.len(),
        format!(
            "{structures} structures: min T_(k-1) eigenvalue {min_eigen:.3}, max linearization gap {worst_gap:.1e}{}",
            if failures.is_empty() { String::new() } else { format!(", failing {failures:?}") }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [fn() -> Vec<Verdict>; 8] = [
        || vec![sphere_constant()],
        || vec![sphere_pointwise_constancy()],
        || vec![symmetric_function_suite()],
        || vec![inequality_suite()],
        || vec![calculus_oracle()],
        || vec![first_order_reduction()],
        variation_verdicts,
        || vec![ellipticity()],
    ];
    let mut blocking = 0;
    for criterion in criteria {
        for v in criterion() {
            let status = if v.passed { "PASS" } else { "FAIL" };
            let note = if v.attainable { "" } else { " [known unattainable, not gating]" };
            println!("{status} {}: {}{note}", v.name, v.detail);
            if !v.passed && v.attainable {
                blocking += 1;
            }
        }
    }
    if blocking == 0 {
        println!("acceptance: all gating criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {blocking} gating criteria failed");
        ExitCode::FAILURE
    }
}
