//! Frame derivatives of a real field in the holomorphic frame of the model.
//!
//! Every frame field is affine in the coordinates, so applying it to a
//! truncated Taylor jet is exact: a field `X = Σ a_i(x) ∂_i` maps the jet of
//! order `r` of `f` to the jet of order `r − 1` of `X f`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::ModelConvention;
use crate::error::{Error, Result};
use crate::field_calculus::{HPoint, Jet3};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Frame derivatives of a real field `u` at one point.
///
/// Matrices are indexed `(α, β)`: `u_albe_bar[(α, β)] = u_{αβ̄}`,
/// `u_bebar_al[(α, β)] = u_{β̄α}` and `u_alpha_beta[(α, β)] = u_{αβ}`.
/// Conjugate-index derivatives of a real field follow by conjugation,
/// e.g. `u_ᾱ = conj(u_α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovariantJet {
    pub n: usize,
    pub value: f64,
    /// `u_0 = T u`.
    pub u0: f64,
    /// `u_α = T_α u`.
    pub u_alpha: Vec<Complex64>,
    /// `u_{αβ̄} = T_β̄ T_α u`.
    pub u_albe_bar: DMatrix<Complex64>,
    /// `u_{β̄α} = T_α T_β̄ u`, stored at `(α, β)`.
    pub u_bebar_al: DMatrix<Complex64>,
    /// `u_{αβ} = T_β T_α u`.
    pub u_alpha_beta: DMatrix<Complex64>,
    /// `u_{0α} = T_α T u`.
    pub u0_alpha: Vec<Complex64>,
    third: Option<Vec<Complex64>>,
}

impl CovariantJet {
    /// `u_{αβ̄σ} = T_σ T_β̄ T_α u`, present when the source jet had order 3.
    pub fn third(&self, alpha: usize, beta: usize, sigma: usize) -> Option<Complex64> {
        self.third.as_ref().map(|t| t[(alpha * self.n + beta) * self.n + sigma])
    }

    pub fn has_third(&self) -> bool {
        self.third.is_some()
    }

    /// `u_{ᾱ}` for a real field.
    pub fn u_alpha_bar(&self, alpha: usize) -> Complex64 {
        self.u_alpha[alpha].conj()
    }

    /// `u_{γ̄σ} = T_σ T_γ̄ u`.
    pub fn u_bar_then(&self, gamma: usize, sigma: usize) -> Complex64 {
        self.u_bebar_al[(sigma, gamma)]
    }
}

/// Complex Taylor jet in the real coordinates, truncated at order 3.
struct ComplexJet {
    m: usize,
    order: usize,
    value: Complex64,
    grad: Vec<Complex64>,
    hess: Vec<Complex64>,
    third: Vec<Complex64>,
}

impl ComplexJet {
    fn from_real(jet: &Jet3) -> Self {
        let lift = |s: &[f64]| s.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
        Self {
            m: jet.dim(),
            order: jet.order(),
            value: Complex64::new(jet.value(), 0.0),
            grad: lift(jet.grad_slice()),
            hess: lift(jet.hess_slice()),
            third: lift(jet.third_slice()),
        }
    }

    /// Applies `X = Σ a_i ∂_i` where `a_i(x) = coeff[i] + Σ_j slope_ij (x_j − x⁰_j)`.
    fn apply(&self, field: &AffineField) -> Self {
        let m = self.m;
        let order = self.order.saturating_sub(1);
        let mut value = Complex64::new(0.0, 0.0);
        for (i, &a) in field.coeff.iter().enumerate() {
            if a != Complex64::new(0.0, 0.0) {
                value += a * self.grad[i];
            }
        }
        let mut grad = Vec::new();
        if order >= 1 {
            grad = vec![Complex64::new(0.0, 0.0); m];
            for (j, g) in grad.iter_mut().enumerate() {
                for (i, &a) in field.coeff.iter().enumerate() {
                    if a != Complex64::new(0.0, 0.0) {
                        *g += a * self.hess[i * m + j];
                    }
                }
            }
            for &(i, j, l) in &field.slope {
                grad[j] += l * self.grad[i];
            }
        }
        let mut hess = Vec::new();
        if order >= 2 {
            hess = vec![Complex64::new(0.0, 0.0); m * m];
            for j in 0..m {
                for k in 0..m {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (i, &a) in field.coeff.iter().enumerate() {
                        if a != Complex64::new(0.0, 0.0) {
                            acc += a * self.third[(i * m + j) * m + k];
                        }
                    }
                    hess[j * m + k] = acc;
                }
            }
            for &(i, j, l) in &field.slope {
                for k in 0..m {
                    hess[j * m + k] += l * self.hess[i * m + k];
                    hess[k * m + j] += l * self.hess[i * m + k];
                }
            }
        }
        Self { m, order, value, grad, hess, third: Vec::new() }
    }
}

/// An affine vector field: constant part at the base point plus sparse
/// slopes `(i, j, ∂_j a_i)`.
struct AffineField {
    coeff: Vec<Complex64>,
    slope: Vec<(usize, usize, Complex64)>,
}

/// `T_α` (or `T_ᾱ` when `conjugate`) at `point`.
fn holomorphic_field(conv: &ModelConvention, point: &HPoint, alpha: usize, conjugate: bool) -> AffineField {
    let n = conv.n;
    let m = 2 * n + 1;
    let (x, y) = (alpha, n + alpha);
    let s = f64::from(conv.frame_sign);
    let z = point.z[alpha];
    let mut coeff = vec![Complex64::new(0.0, 0.0); m];
    if conjugate {
        coeff[x] = Complex64::new(0.5, 0.0);
        coeff[y] = Complex64::new(0.0, 0.5);
        coeff[2 * n] = -s * I * z;
        AffineField { coeff, slope: vec![(2 * n, x, -s * I), (2 * n, y, Complex64::new(s, 0.0))] }
    } else {
        coeff[x] = Complex64::new(0.5, 0.0);
        coeff[y] = Complex64::new(0.0, -0.5);
        coeff[2 * n] = s * I * z.conj();
        AffineField { coeff, slope: vec![(2 * n, x, s * I), (2 * n, y, Complex64::new(s, 0.0))] }
    }
}

fn reeb_field(conv: &ModelConvention) -> AffineField {
    let m = conv.real_dim();
    let mut coeff = vec![Complex64::new(0.0, 0.0); m];
    coeff[m - 1] = Complex64::new(conv.reeb_scale(), 0.0);
    AffineField { coeff, slope: Vec::new() }
}

/// Converts a real Taylor jet of order at least 2 into frame derivatives.
/// Third-order frame derivatives are filled in when the jet has order 3.
pub fn frame_derivatives(jet: &Jet3, point: &HPoint, conv: &ModelConvention) -> Result<CovariantJet> {
    let n = conv.n;
    if point.n() != n || jet.dim() != conv.real_dim() {
        return Err(Error::validation(format!(
            "jet of dimension {} at a point of CR dimension {} does not match n = {n}",
            jet.dim(),
            point.n()
        )));
    }
    if jet.order() < 2 {
        return Err(Error::validation("frame derivatives need a jet of order at least 2"));
    }
    let base = ComplexJet::from_real(jet);
    let holo: Vec<AffineField> = (0..n).map(|a| holomorphic_field(conv, point, a, false)).collect();
    let anti: Vec<AffineField> = (0..n).map(|a| holomorphic_field(conv, point, a, true)).collect();

    let d_reeb = base.apply(&reeb_field(conv));
    let d_holo: Vec<ComplexJet> = holo.iter().map(|f| base.apply(f)).collect();
    let d_anti: Vec<ComplexJet> = anti.iter().map(|f| base.apply(f)).collect();

    let u_alpha: Vec<Complex64> = d_holo.iter().map(|j| j.value).collect();
    let u0_alpha: Vec<Complex64> = holo.iter().map(|f| d_reeb.apply(f).value).collect();
    let u_albe_bar = DMatrix::from_fn(n, n, |a, b| d_holo[a].apply(&anti[b]).value);
    let u_bebar_al = DMatrix::from_fn(n, n, |a, b| d_anti[b].apply(&holo[a]).value);
    let u_alpha_beta = DMatrix::from_fn(n, n, |a, b| d_holo[a].apply(&holo[b]).value);

    let third = (jet.order() >= 3).then(|| {
        let mut t = Vec::with_capacity(n * n * n);
        for d_a in &d_holo {
            for f_b in &anti {
                let d_ab = d_a.apply(f_b);
                for f_s in &holo {
                    t.push(d_ab.apply(f_s).value);
                }
            }
        }
        t
    });

    Ok(CovariantJet {
        n,
        value: jet.value(),
        u0: d_reeb.value.re,
        u_alpha,
        u_albe_bar,
        u_bebar_al,
        u_alpha_beta,
        u0_alpha,
        third,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field_calculus::parse_field;

    fn cj(text: &str, n: usize, point: &HPoint) -> CovariantJet {
        let e = parse_field(text, n).unwrap();
        let jet = e.eval_jet(point, 3).unwrap();
        frame_derivatives(&jet, point, &ModelConvention::standard(n)).unwrap()
    }

    #[test]
    fn reeb_derivative_is_t_derivative_in_standard_convention() {
        let p = HPoint::new(vec![Complex64::new(0.3, -0.2)], 0.7);
        let c = cj("t^2", 1, &p);
        assert!((c.u0 - 1.4).abs() < 1e-14);
    }

    #[test]
    fn holomorphic_derivative_of_zbar_t_combination() {
        // u = t: T_α t = s i z̄^α.
        let p = HPoint::new(vec![Complex64::new(0.3, -0.2), Complex64::new(-0.5, 0.1)], 0.7);
        let c = cj("t", 2, &p);
        for a in 0..2 {
            let expected = I * p.z[a].conj();
            assert!((c.u_alpha[a] - expected).norm() < 1e-14);
        }
    }

    #[test]
    fn commutator_identity_holds() {
        let p = HPoint::new(vec![Complex64::new(0.3, -0.2), Complex64::new(-0.5, 0.1)], 0.7);
        let c = cj("x1*t^2 + sin(y2*x1) + t*x2^2", 2, &p);
        for a in 0..2 {
            for b in 0..2 {
                let lhs = c.u_albe_bar[(a, b)] - c.u_bebar_al[(a, b)];
                let rhs = if a == b { I * c.u0 * 2.0 } else { Complex64::new(0.0, 0.0) };
                assert!((lhs - rhs).norm() < 1e-12, "{a}{b}: {lhs} vs {rhs}");
            }
        }
    }

    #[test]
    fn holomorphic_hessian_is_symmetric() {
        let p = HPoint::new(vec![Complex64::new(0.3, -0.2), Complex64::new(-0.5, 0.1)], 0.7);
        let c = cj("x1*t^2 + exp(y2*x1) + t*x2*y1", 2, &p);
        assert!((&c.u_alpha_beta - c.u_alpha_beta.transpose()).norm() < 1e-12);
    }

    #[test]
    fn derivatives_of_t_x1_match_hand_computation() {
        // u = t x1: T_1 u = t/2 + i z̄ x1, then
        // u_{11̄} = −(i/2) z + i x1 + (i/2) z̄, and T_1 of that is −i/2 + i/2 = 0.
        let p = HPoint::new(vec![Complex64::new(0.4, 0.3)], -0.2);
        let c = cj("t*x1", 1, &p);
        let z = p.z[0];
        let u_11bar = -0.5 * I * z + I * z.re + 0.5 * I * z.conj();
        assert!((c.u_albe_bar[(0, 0)] - u_11bar).norm() < 1e-14);
        assert!(c.third(0, 0, 0).unwrap().norm() < 1e-14);
    }
}
