mod common;

use common::{close, smooth_field};
use cryamabe::conformal_engine::{
    cotton, cotton_admissible, cotton_tensor, ellipticity_certificate, k_positive, schouten, sigma_k_curvature,
    v_tensor, yamabe_residual, ConformalStructure,
};
use cryamabe::field_calculus::{catalog_field, parse_field, CatalogParams, FieldExpr, Func, HPoint};
use cryamabe::heisenberg_geometry::{frame_derivatives, grad_norm_sq, sublaplacian, ModelConvention};
use cryamabe::sampling::{random_point, seeded};
use cryamabe::symmetric_functions::{binomial, cone_membership, HermitianMatrix};
use cryamabe::yamabe_functional::pseudo_einstein_sigma;
use cryamabe::{Complex64, Error};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn sphere(conv: &ModelConvention) -> ConformalStructure {
    let params = CatalogParams::from([("n".to_string(), conv.n as f64)]);
    ConformalStructure::power_form(conv.clone(), catalog_field("v0", &params).unwrap()).unwrap()
}

fn log_structure(n: usize, text: &str) -> ConformalStructure {
    ConformalStructure::log_form(ModelConvention::standard(n), parse_field(text, n).unwrap()).unwrap()
}

fn max_entry(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Positive factor `v = exp(e / 2)` built from a random tree.
fn positive_factor(e: FieldExpr) -> FieldExpr {
    FieldExpr::func(Func::Exp, FieldExpr::mul(FieldExpr::Const(0.5), e))
}

/// A dimension `n ≤ 3`, a smooth field in that dimension and a point seed.
fn field_in_dimension() -> impl Strategy<Value = (usize, FieldExpr, u64)> {
    (1usize..=3).prop_flat_map(|n| (Just(n), smooth_field(n), any::<u64>()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn power_and_log_forms_give_the_same_schouten_tensor((n, e, seed) in field_in_dimension()) {
        let conv = ModelConvention::standard(n);
        let v = positive_factor(e);
        let cs = ConformalStructure::power_form(conv.clone(), v.clone()).unwrap();
        let point = random_point(&mut seeded(seed), n, 1.0);
        let from_log = schouten(&cs.to_log_form(), &point).unwrap().s_lower;
        let vv = v.eval(&point).unwrap();
        let from_v = v_tensor(&cs, &point).unwrap().scaled(2.0 / (n as f64 * vv));
        let scale = max_entry(from_log.as_matrix()).max(1.0);
        prop_assert!(max_entry(&(from_log.as_matrix() - from_v.as_matrix())) <= 1e-9 * scale);
    }

    #[test]
    fn u_and_v_residuals_vanish_together((n, e, seed) in field_in_dimension(), k_pick in 0usize..3) {
        let k = 1 + k_pick % n;
        let v = positive_factor(e);
        let cs = ConformalStructure::power_form(ModelConvention::standard(n), v.clone()).unwrap();
        let point = random_point(&mut seeded(seed), n, 1.0);
        let u = v.eval(&point).unwrap().ln() / n as f64;
        let lambda = sigma_k_curvature(&cs, &point, k).unwrap();
        let residual = yamabe_residual(&cs, k, lambda, &point).unwrap();
        prop_assert!(residual.u_form.abs() <= 1e-9 * (lambda * (2.0 * k as f64 * u).exp()).abs().max(1e-12));
        let weight = v.eval(&point).unwrap().powf(cs.conv.power_exponent() - 1.0);
        prop_assert!(residual.v_form.abs() <= 1e-8 * (residual.lambda_hat * weight).abs().max(1e-12));
        prop_assert!(close(residual.lambda_hat, (n as f64 / 2.0).powi(k as i32) * lambda, 1e-14, 1e-300));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn first_curvature_reduces_to_the_sublaplacian_expression((n, u, seed) in field_in_dimension()) {
        let conv = ModelConvention::standard(n);
        let cs = ConformalStructure::log_form(conv.clone(), u.clone()).unwrap();
        let point = random_point(&mut seeded(seed), n, 1.0);
        let cj = frame_derivatives(&u.eval_jet(&point, 2).unwrap(), &point, &conv).unwrap();
        let nf = n as f64;
        let webster = 0.0;
        let expected = (-2.0 * cj.value).exp() / (2.0 * (nf + 1.0))
            * (webster + 2.0 * (nf + 1.0) * sublaplacian(&cj, &conv) - 2.0 * nf * (nf + 1.0) * grad_norm_sq(&cj, &conv));
        let actual = sigma_k_curvature(&cs, &point, 1).unwrap();
        prop_assert!(close(actual, expected, 1e-9, 1e-12), "{actual} vs {expected}");
    }
}

#[test]
fn sphere_structure_is_pseudo_einstein() {
    let mut rng = seeded(17);
    for n in 1..=3 {
        let conv = ModelConvention::standard(n);
        let cs = sphere(&conv);
        for k in 1..=n {
            let mut values = Vec::new();
            for _ in 0..50 {
                let point = random_point(&mut rng, n, 1.5);
                let s1 = sigma_k_curvature(&cs, &point, 1).unwrap();
                let sk = sigma_k_curvature(&cs, &point, k).unwrap();
                let predicted = pseudo_einstein_sigma(n, k, 2.0 * (n as f64 + 1.0) * s1).unwrap();
                assert!(close(sk, predicted, 1e-7, 1e-300), "n={n} k={k}: {sk} vs {predicted}");
                assert!(close(sk, binomial(n, k) * (s1 / n as f64).powi(k as i32), 1e-9, 1e-300));
                values.push(sk);
            }
            let (lo, hi) = values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)));
            assert!((hi - lo) <= 1e-6 * hi.abs(), "n={n} k={k}: spread {lo}..{hi}");
        }
    }
}

#[test]
fn sphere_schouten_is_scalar() {
    let conv = ModelConvention::standard(2);
    let cs = sphere(&conv);
    let point = random_point(&mut seeded(9), 2, 1.0);
    let s = schouten(&cs, &point).unwrap();
    let lambda = s.s_mixed.get(0, 0).re;
    let scalar = HermitianMatrix::scalar(2, lambda);
    assert!(max_entry(&(s.s_mixed.as_matrix() - scalar.as_matrix())) < 1e-12);
    assert!(s.form_gap.is_some_and(|gap| gap < 1e-10));
}

/// `u_{β̄σ}` of `u = t x₁` with `s = 1`, worked out by hand.
fn hand_mixed(z: &[Complex64], x1: f64, beta: usize, sigma: usize) -> Complex64 {
    let i = Complex64::i();
    let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    -i * (d(sigma, beta) * x1 + z[beta] * 0.5 * d(sigma, 0)) + i * z[sigma].conj() * 0.5 * d(beta, 0)
}

#[test]
fn reduced_cotton_of_t_times_x1_matches_hand_computation() {
    let n = 2;
    let cs = log_structure(n, "t * x1");
    let mut rng = seeded(31);
    for _ in 0..20 {
        let point = random_point(&mut rng, n, 1.0);
        let (z, t, x1) = (&point.z, point.t, point.z[0].re);
        let d0 = |a: usize| if a == 0 { 1.0 } else { 0.0 };
        let u_alpha = |a: usize| Complex64::new(t / 2.0 * d0(a), 0.0) + Complex64::i() * z[a].conj() * x1;
        let c = cotton(&cs, &point).unwrap();
        for a in 0..n {
            for b in 0..n {
                for s in 0..n {
                    let expected = -2.0 * (u_alpha(a) * hand_mixed(z, x1, b, s) - u_alpha(s) * hand_mixed(z, x1, b, a));
                    assert!((c.get(a, b, s) - expected).norm() < 1e-12, "({a},{b},{s})");
                }
            }
        }
    }
}

/// `T_σ F = ∂_σ F + s i z̄^σ ∂_t F` by central differences, `∂_σ = (∂_x − i∂_y)/2`.
fn frame_difference<F>(f: F, point: &HPoint, sigma: usize, sign: f64, h: f64) -> DMatrix<Complex64>
where
    F: Fn(&HPoint) -> DMatrix<Complex64>,
{
    let n = point.n();
    let shifted = |slot: usize, d: f64| {
        let mut coords = point.coords();
        coords[slot] += d;
        f(&HPoint::from_coords(&coords))
    };
    let diff = |slot: usize| (shifted(slot, h) - shifted(slot, -h)) / Complex64::new(2.0 * h, 0.0);
    let (dx, dy, dt) = (diff(sigma), diff(n + sigma), diff(2 * n));
    (dx - dy * Complex64::i()) * Complex64::new(0.5, 0.0) + dt * (Complex64::i() * point.z[sigma].conj() * sign)
}

#[test]
fn genuine_cotton_matches_finite_differences_of_the_deformed_schouten_tensor() {
    let n = 2;
    for text in ["0.3*t*x1 + 0.2*y2^2 - 0.1*x1*x2*t", "0.5*sin(t + x2) * y1", "0.2*(x1^2 + y1^2) * t"] {
        let cs = log_structure(n, text);
        let conv = cs.conv.clone();
        let c_scale = conv.levi_scale;
        let s_hat = |p: &HPoint| schouten(&cs, p).unwrap().s_mixed.as_matrix() * Complex64::new(c_scale, 0.0);
        let mut rng = seeded(41);
        for _ in 0..10 {
            let point = random_point(&mut rng, n, 0.8);
            let cj = frame_derivatives(&cs.factor.eval_jet(&point, 2).unwrap(), &point, &conv).unwrap();
            let s = s_hat(&point);
            let ds: Vec<DMatrix<Complex64>> =
                (0..n).map(|sigma| frame_difference(s_hat, &point, sigma, conv.frame_sign as f64, 1e-5)).collect();
            let ua = &cj.u_alpha;
            let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
            let genuine = cotton_tensor(&cs, &point).unwrap();
            let scale = genuine.max_abs().max(1e-3);
            for a in 0..n {
                for b in 0..n {
                    for sg in 0..n {
                        let trace_a: Complex64 = (0..n).map(|g| ua[g] * s[(a, g)]).sum();
                        let trace_s: Complex64 = (0..n).map(|g| ua[g] * s[(sg, g)]).sum();
                        let expected = (ds[sg][(a, b)] - ds[a][(sg, b)] - ua[a] * s[(sg, b)] * 2.0
                            + ua[sg] * s[(a, b)] * 2.0
                            + trace_a * (2.0 * delta(sg, b))
                            - trace_s * (2.0 * delta(a, b)))
                            * (-cj.value).exp();
                        let gap = (genuine.get(a, b, sg) - expected).norm();
                        assert!(gap <= 1e-6 * scale, "{text} ({a},{b},{sg}): gap {gap:e}, scale {scale:e}");
                    }
                }
            }
        }
    }
}

#[test]
fn genuine_cotton_vanishes_on_the_sphere() {
    let mut rng = seeded(43);
    for n in 1..=3 {
        let cs = sphere(&ModelConvention::standard(n));
        for _ in 0..10 {
            let point = random_point(&mut rng, n, 1.0);
            assert!(cotton_tensor(&cs, &point).unwrap().max_abs() < 1e-10);
        }
    }
}

#[test]
fn admissibility_of_pluriharmonic_examples() {
    let points: Vec<HPoint> = {
        let mut rng = seeded(47);
        (0..30).map(|_| random_point(&mut rng, 2, 1.0)).collect()
    };
    let conv = ModelConvention::standard(2);
    for text in ["x1", "x1*x2 - y1*y2", "x1^2 - y1^2 + 3*y2"] {
        let report = cotton_admissible(&parse_field(text, 2).unwrap(), &conv, &points, 1e-10).unwrap();
        assert!(report.admissible, "{text}: {}", report.max_violation);
    }
    let report = cotton_admissible(&parse_field("(x1^2 + y1^2 + x2^2 + y2^2) * t", 2).unwrap(), &conv, &points, 1e-10).unwrap();
    assert!(!report.admissible);
    let flat_points: Vec<HPoint> = {
        let mut rng = seeded(48);
        (0..30).map(|_| random_point(&mut rng, 1, 1.0)).collect()
    };
    let report =
        cotton_admissible(&parse_field("t", 1).unwrap(), &ModelConvention::standard(1), &flat_points, 1e-10).unwrap();
    assert!(report.admissible);
}

#[test]
fn cone_verdicts_of_a_bump_agree_with_pointwise_membership() {
    let n = 2;
    let params = CatalogParams::from([
        ("n".to_string(), 2.0),
        ("radius".to_string(), 1.0),
        ("amplitude".to_string(), 2.0),
    ]);
    let cs = ConformalStructure::log_form(ModelConvention::standard(n), catalog_field("bump", &params).unwrap()).unwrap();
    let mut rng = seeded(51);
    let points: Vec<HPoint> = (0..60).map(|_| random_point(&mut rng, n, 0.9)).collect();
    for k in 1..=n {
        let reports = k_positive(&cs, &points, k).unwrap();
        for (report, point) in reports.iter().zip(&points) {
            let direct = cone_membership(&schouten(&cs, point).unwrap().s_mixed, k).unwrap();
            assert_eq!(report, &direct);
        }
        assert!(reports.iter().any(|r| r.in_gamma_k()), "k={k}: no admissible sample");
        assert!(reports.iter().any(|r| !r.in_gamma_k()), "k={k}: no inadmissible sample");
    }
}

#[test]
fn sphere_is_elliptic_and_linearization_matches() {
    let mut rng = seeded(53);
    for (n, k) in [(1, 1), (2, 1), (2, 2), (3, 2), (3, 3)] {
        let cs = sphere(&ModelConvention::standard(n));
        let points: Vec<HPoint> = (0..20).map(|_| random_point(&mut rng, n, 1.0)).collect();
        let directions = vec![
            parse_field("x1^2 - t", n).unwrap(),
            parse_field("exp(-(x1^2 + y1^2 + t^2))", n).unwrap(),
        ];
        let report = ellipticity_certificate(&cs, k, &points, &directions).unwrap();
        assert!(report.elliptic && report.min_eigenvalue > 0.0, "n={n} k={k}");
        assert!(report.linearization_passed, "n={n} k={k}: gap {}", report.max_linearization_gap);
        assert!(report.max_linearization_gap <= 1e-4);
        if k == 1 {
            assert!((report.min_eigenvalue - 1.0).abs() < 1e-15);
        }
    }
}

#[test]
fn ellipticity_requires_positive_curvature() {
    let cs = log_structure(2, "0");
    let points = vec![HPoint::origin(2)];
    assert!(matches!(ellipticity_certificate(&cs, 2, &points, &[]), Err(Error::Precondition(_))));
}

#[test]
fn power_form_rejects_nonpositive_factors() {
    let cs = ConformalStructure::power_form(ModelConvention::standard(1), parse_field("x1", 1).unwrap()).unwrap();
    let result = schouten(&cs, &HPoint::from_coords(&[-0.5, 0.0, 0.0]));
    assert!(matches!(result, Err(Error::Domain(_)) | Err(Error::Evaluation { .. })));
}
