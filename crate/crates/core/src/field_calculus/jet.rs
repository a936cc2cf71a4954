/// Value and all real partial derivatives up to a fixed order (at most 3) of
/// a scalar field at a point of `ℝ^m`.
///
/// Derivatives are stored as full symmetric arrays, row-major:
/// `hess[i*m + j] = ∂_i∂_j f` and `third[(i*m + j)*m + l] = ∂_i∂_j∂_l f`.
/// Entries above the jet's order are not stored; the arithmetic below only
/// propagates the orders that are present, which keeps second-order
/// evaluation cheap on large quadrature grids.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet3 {
    dim: usize,
    order: usize,
    value: f64,
    grad: Vec<f64>,
    hess: Vec<f64>,
    third: Vec<f64>,
}

impl Jet3 {
    /// The constant `c` as a jet.
    pub fn constant(dim: usize, order: usize, c: f64) -> Self {
        assert!(order <= 3, "jets are truncated at order 3");
        Self {
            dim,
            order,
            value: c,
            grad: vec![0.0; if order >= 1 { dim } else { 0 }],
            hess: vec![0.0; if order >= 2 { dim * dim } else { 0 }],
            third: vec![0.0; if order >= 3 { dim * dim * dim } else { 0 }],
        }
    }

    /// The coordinate function `x_index` at a point where it equals `x`.
    pub fn variable(dim: usize, order: usize, index: usize, x: f64) -> Self {
        let mut j = Self::constant(dim, order, x);
        if order >= 1 {
            j.grad[index] = 1.0;
        }
        j
    }

    /// Builds a jet from explicit arrays; `hess` and `third` may be empty when
    /// the order does not reach them.
    pub fn from_parts(dim: usize, value: f64, grad: Vec<f64>, hess: Vec<f64>, third: Vec<f64>) -> Self {
        let order = if !third.is_empty() {
            3
        } else if !hess.is_empty() {
            2
        } else if !grad.is_empty() {
            1
        } else {
            0
        };
        assert!(grad.is_empty() || grad.len() == dim);
        assert!(hess.is_empty() || hess.len() == dim * dim);
        assert!(third.is_empty() || third.len() == dim * dim * dim);
        Self { dim, order, value, grad, hess, third }
    }

    /// Number of real variables.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Highest derivative order carried.
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    /// `∂_i f`.
    pub fn grad(&self, i: usize) -> f64 {
        self.grad[i]
    }

    /// `∂_i∂_j f`.
    pub fn hess(&self, i: usize, j: usize) -> f64 {
        self.hess[i * self.dim + j]
    }

    /// `∂_i∂_j∂_l f`.
    pub fn third(&self, i: usize, j: usize, l: usize) -> f64 {
        self.third[(i * self.dim + j) * self.dim + l]
    }

    pub fn grad_slice(&self) -> &[f64] {
        &self.grad
    }

    pub fn hess_slice(&self) -> &[f64] {
        &self.hess
    }

    pub fn third_slice(&self) -> &[f64] {
        &self.third
    }

    /// Drops derivatives above `order`.
    pub fn truncated(&self, order: usize) -> Self {
        let order = order.min(self.order);
        let mut out = self.clone();
        out.order = order;
        if order < 3 {
            out.third.clear();
        }
        if order < 2 {
            out.hess.clear();
        }
        if order < 1 {
            out.grad.clear();
        }
        out
    }

    /// Largest absolute entry among derivatives of exactly `order`.
    pub fn max_abs_of_order(&self, order: usize) -> f64 {
        let slice: &[f64] = match order {
            0 => std::slice::from_ref(&self.value),
            1 => &self.grad,
            2 => &self.hess,
            3 => &self.third,
            _ => &[],
        };
        slice.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
            && self.grad.iter().chain(&self.hess).chain(&self.third).all(|x| x.is_finite())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let order = self.order.min(other.order);
        let a = self.truncated(order);
        let b = other.truncated(order);
        Self {
            dim: self.dim,
            order,
            value: f(a.value, b.value),
            grad: a.grad.iter().zip(&b.grad).map(|(x, y)| f(*x, *y)).collect(),
            hess: a.hess.iter().zip(&b.hess).map(|(x, y)| f(*x, *y)).collect(),
            third: a.third.iter().zip(&b.third).map(|(x, y)| f(*x, *y)).collect(),
        }
    }

    /// `f + g`.
    pub fn add(&self, other: &Self) -> Self {
        self.zip_with(other, |x, y| x + y)
    }

    /// `f − g`.
    pub fn sub(&self, other: &Self) -> Self {
        self.zip_with(other, |x, y| x - y)
    }

    /// `s · f`.
    pub fn scale(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            order: self.order,
            value: s * self.value,
            grad: self.grad.iter().map(|x| s * x).collect(),
            hess: self.hess.iter().map(|x| s * x).collect(),
            third: self.third.iter().map(|x| s * x).collect(),
        }
    }

    /// `f + s · g`.
    pub fn axpy(&self, s: f64, other: &Self) -> Self {
        self.zip_with(other, |x, y| x + s * y)
    }

    /// `f · g` by the Leibniz rule.
    pub fn mul(&self, other: &Self) -> Self {
        let m = self.dim;
        let order = self.order.min(other.order);
        let (f, g) = (self, other);
        let mut out = Self::constant(m, order, f.value * g.value);
        if order >= 1 {
            for i in 0..m {
                out.grad[i] = f.value * g.grad[i] + f.grad[i] * g.value;
            }
        }
        if order >= 2 {
            for i in 0..m {
                for j in i..m {
                    let v = f.value * g.hess[i * m + j]
                        + f.grad[i] * g.grad[j]
                        + f.grad[j] * g.grad[i]
                        + f.hess[i * m + j] * g.value;
                    out.hess[i * m + j] = v;
                    out.hess[j * m + i] = v;
                }
            }
        }
        if order >= 3 {
            for i in 0..m {
                for j in i..m {
                    for l in j..m {
                        let v = f.value * g.third[(i * m + j) * m + l]
                            + f.third[(i * m + j) * m + l] * g.value
                            + f.grad[i] * g.hess[j * m + l]
                            + f.grad[j] * g.hess[i * m + l]
                            + f.grad[l] * g.hess[i * m + j]
                            + f.hess[i * m + j] * g.grad[l]
                            + f.hess[i * m + l] * g.grad[j]
                            + f.hess[j * m + l] * g.grad[i];
                        out.set_third_symmetric(i, j, l, v);
                    }
                }
            }
        }
        out
    }

    fn set_third_symmetric(&mut self, i: usize, j: usize, l: usize, v: f64) {
        let m = self.dim;
        for (a, b, c) in [(i, j, l), (i, l, j), (j, i, l), (j, l, i), (l, i, j), (l, j, i)] {
            self.third[(a * m + b) * m + c] = v;
        }
    }

    /// `φ ∘ f` given `φ(f₀), φ'(f₀), φ''(f₀), φ'''(f₀)` (Faà di Bruno).
    pub fn compose(&self, d0: f64, d1: f64, d2: f64, d3: f64) -> Self {
        let m = self.dim;
        let f = self;
        let mut out = Self::constant(m, self.order, d0);
        if self.order >= 1 {
            for i in 0..m {
                out.grad[i] = d1 * f.grad[i];
            }
        }
        if self.order >= 2 {
            for i in 0..m {
                for j in i..m {
                    let v = d1 * f.hess[i * m + j] + d2 * f.grad[i] * f.grad[j];
                    out.hess[i * m + j] = v;
                    out.hess[j * m + i] = v;
                }
            }
        }
        if self.order >= 3 {
            for i in 0..m {
                for j in i..m {
                    for l in j..m {
                        let v = d1 * f.third[(i * m + j) * m + l]
                            + d2 * (f.hess[i * m + j] * f.grad[l]
                                + f.hess[i * m + l] * f.grad[j]
                                + f.hess[j * m + l] * f.grad[i])
                            + d3 * f.grad[i] * f.grad[j] * f.grad[l];
                        out.set_third_symmetric(i, j, l, v);
                    }
                }
            }
        }
        out
    }

    /// `exp(f)`.
    pub fn exp(&self) -> Self {
        let e = self.value.exp();
        self.compose(e, e, e, e)
    }

    /// `ln(f)`; the caller guarantees `f > 0`.
    pub fn ln(&self) -> Self {
        let x = self.value;
        self.compose(x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }

    /// `1 / f`; the caller guarantees `f ≠ 0`.
    pub fn recip(&self) -> Self {
        let x = self.value;
        let r = 1.0 / x;
        self.compose(r, -r * r, 2.0 * r * r * r, -6.0 * r * r * r * r)
    }

    /// `f^a` for real `a`; the caller guarantees `f > 0` unless `a` is an integer.
    pub fn powf(&self, a: f64) -> Self {
        let x = self.value;
        let term = |c: f64, e: f64| if c == 0.0 { 0.0 } else { c * x.powf(e) };
        if a.fract() == 0.0 && a.abs() < i32::MAX as f64 {
            let ai = a as i32;
            let termi = |c: f64, e: i32| if c == 0.0 { 0.0 } else { c * x.powi(e) };
            return self.compose(
                x.powi(ai),
                termi(a, ai - 1),
                termi(a * (a - 1.0), ai - 2),
                termi(a * (a - 1.0) * (a - 2.0), ai - 3),
            );
        }
        self.compose(
            x.powf(a),
            term(a, a - 1.0),
            term(a * (a - 1.0), a - 2.0),
            term(a * (a - 1.0) * (a - 2.0), a - 3.0),
        )
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(s, c, -s, -c)
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.value.sin_cos();
        self.compose(c, -s, -c, s)
    }

    /// `√f`; the caller guarantees `f > 0`.
    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    /// `bump(f)`: `exp(−1/(1−f))` for `f < 1` and `0` otherwise.
    pub fn bump(&self) -> Self {
        let [d0, d1, d2, d3] = bump_derivatives(self.value);
        self.compose(d0, d1, d2, d3)
    }
}

/// Value and first three derivatives of `b(x) = exp(−1/(1−x))` on `x < 1`,
/// continued by zero on `x ≥ 1`.
pub(crate) fn bump_derivatives(x: f64) -> [f64; 4] {
    if x >= 1.0 {
        return [0.0; 4];
    }
    let q = 1.0 - x;
    let b = (-1.0 / q).exp();
    if b == 0.0 {
        return [0.0; 4];
    }
    let g1 = -1.0 / (q * q);
    let g2 = -2.0 / (q * q * q);
    let g3 = -6.0 / (q * q * q * q);
    [b, b * g1, b * (g2 + g1 * g1), b * (g3 + 3.0 * g1 * g2 + g1 * g1 * g1)]
}
