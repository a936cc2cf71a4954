//! Scalar fields on `Hⁿ = ℂⁿ × ℝ` and their exact derivative jets.
//!
//! Fields are written in a small infix language over the real coordinates
//! `x1..xn, y1..yn, t` (with `z^α = x_α + i y_α`). Precedence, from tightest:
//! `^` (right operand must be a numeric literal), unary `−`, `* /`, `+ −`.
//! Functions: `exp log sin cos sqrt`, plus `bump(s) = exp(−1/(1−s))` for
//! `s < 1` and `0` otherwise, the smooth cutoff behind compactly supported
//! catalog fields.
//!
//! Evaluation propagates truncated Taylor jets ([`Jet3`]) through the tree, so
//! all partial derivatives up to order three are exact to roundoff.
//! [`fd_jet3`] supplies the independent central-difference oracle.

mod catalog;
mod fd;
mod jet;
mod parser;

use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use catalog::{catalog_field, CatalogParams, CATALOG_NAMES};
pub use fd::fd_jet3;
pub use jet::Jet3;
pub use parser::parse_field;

/// A real coordinate of `Hⁿ`; indices are zero-based internally and
/// one-based in text.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X(usize),
    Y(usize),
    T,
}

impl Var {
    /// Position in the coordinate vector `(x_1..x_n, y_1..y_n, t)`.
    pub fn slot(self, n: usize) -> usize {
        match self {
            Var::X(i) => i,
            Var::Y(i) => n + i,
            Var::T => 2 * n,
        }
    }
}

/// Elementary functions of the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    Bump,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
            Func::Bump => "bump",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            "bump" => Func::Bump,
            _ => return None,
        })
    }
}

/// Expression tree of a scalar field.
#[derive(Debug, Clone, PartialEq)]
pub enum FieldExpr {
    Const(f64),
    Var(Var),
    Neg(Box<FieldExpr>),
    Add(Box<FieldExpr>, Box<FieldExpr>),
    Sub(Box<FieldExpr>, Box<FieldExpr>),
    Mul(Box<FieldExpr>, Box<FieldExpr>),
    Div(Box<FieldExpr>, Box<FieldExpr>),
    /// Power with a literal exponent.
    Pow(Box<FieldExpr>, f64),
    Func(Func, Box<FieldExpr>),
}

/// A point `(z, t)` of the Heisenberg group.
#[derive(Debug, Clone, PartialEq)]
pub struct HPoint {
    pub z: Vec<Complex64>,
    pub t: f64,
}

impl HPoint {
    pub fn new(z: Vec<Complex64>, t: f64) -> Self {
        Self { z, t }
    }

    /// The origin of `Hⁿ`.
    pub fn origin(n: usize) -> Self {
        Self { z: vec![Complex64::new(0.0, 0.0); n], t: 0.0 }
    }

    /// From real coordinates `(x_1..x_n, y_1..y_n, t)`.
    pub fn from_coords(coords: &[f64]) -> Self {
        assert!(coords.len() % 2 == 1, "coordinate vectors have odd length 2n+1");
        let n = coords.len() / 2;
        Self {
            z: (0..n).map(|i| Complex64::new(coords[i], coords[n + i])).collect(),
            t: coords[2 * n],
        }
    }

    /// CR dimension `n`.
    pub fn n(&self) -> usize {
        self.z.len()
    }

    /// Real coordinates `(x_1..x_n, y_1..y_n, t)`.
    pub fn coords(&self) -> Vec<f64> {
        let mut c: Vec<f64> = self.z.iter().map(|z| z.re).collect();
        c.extend(self.z.iter().map(|z| z.im));
        c.push(self.t);
        c
    }

    /// `|z|²`.
    pub fn z_norm_sq(&self) -> f64 {
        self.z.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.z.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl fmt::Display for FieldExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldExpr::Const(c) => {
                if *c < 0.0 || (*c == 0.0 && c.is_sign_negative()) {
                    write!(f, "(-{:?})", -c)
                } else {
                    write!(f, "{c:?}")
                }
            }
            FieldExpr::Var(Var::X(i)) => write!(f, "x{}", i + 1),
            FieldExpr::Var(Var::Y(i)) => write!(f, "y{}", i + 1),
            FieldExpr::Var(Var::T) => write!(f, "t"),
            FieldExpr::Neg(a) => write!(f, "(-({a}))"),
            FieldExpr::Add(a, b) => write!(f, "({a} + {b})"),
            FieldExpr::Sub(a, b) => write!(f, "({a} - {b})"),
            FieldExpr::Mul(a, b) => write!(f, "({a} * {b})"),
            FieldExpr::Div(a, b) => write!(f, "({a} / {b})"),
            FieldExpr::Pow(a, e) => {
                if *e < 0.0 {
                    write!(f, "(({a})^(-{:?}))", -e)
                } else {
                    write!(f, "(({a})^{e:?})")
                }
            }
            FieldExpr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

fn eval_error(expr: &FieldExpr, reason: impl Into<String>) -> Error {
    Error::Evaluation { subexpression: expr.to_string(), reason: reason.into() }
}

impl FieldExpr {
    pub fn constant(c: f64) -> Self {
        FieldExpr::Const(c)
    }

    pub fn var(v: Var) -> Self {
        FieldExpr::Var(v)
    }

    pub fn add(a: Self, b: Self) -> Self {
        FieldExpr::Add(Box::new(a), Box::new(b))
    }

    pub fn sub(a: Self, b: Self) -> Self {
        FieldExpr::Sub(Box::new(a), Box::new(b))
    }

    pub fn mul(a: Self, b: Self) -> Self {
        FieldExpr::Mul(Box::new(a), Box::new(b))
    }

    pub fn div(a: Self, b: Self) -> Self {
        FieldExpr::Div(Box::new(a), Box::new(b))
    }

    pub fn pow(a: Self, e: f64) -> Self {
        FieldExpr::Pow(Box::new(a), e)
    }

    pub fn neg(a: Self) -> Self {
        FieldExpr::Neg(Box::new(a))
    }

    pub fn func(f: Func, a: Self) -> Self {
        FieldExpr::Func(f, Box::new(a))
    }

    /// Sum of a nonempty list of terms.
    pub fn sum(terms: Vec<Self>) -> Self {
        let mut it = terms.into_iter();
        let first = it.next().expect("sum of an empty list");
        it.fold(first, Self::add)
    }

    /// Largest coordinate index referenced, as a CR dimension lower bound.
    pub fn min_dimension(&self) -> usize {
        match self {
            FieldExpr::Const(_) | FieldExpr::Var(Var::T) => 0,
            FieldExpr::Var(Var::X(i)) | FieldExpr::Var(Var::Y(i)) => i + 1,
            FieldExpr::Neg(a) | FieldExpr::Pow(a, _) | FieldExpr::Func(_, a) => a.min_dimension(),
            FieldExpr::Add(a, b) | FieldExpr::Sub(a, b) | FieldExpr::Mul(a, b) | FieldExpr::Div(a, b) => {
                a.min_dimension().max(b.min_dimension())
            }
        }
    }

    /// Number of nodes in the tree.
    pub fn node_count(&self) -> usize {
        match self {
            FieldExpr::Const(_) | FieldExpr::Var(_) => 1,
            FieldExpr::Neg(a) | FieldExpr::Pow(a, _) | FieldExpr::Func(_, a) => 1 + a.node_count(),
            FieldExpr::Add(a, b) | FieldExpr::Sub(a, b) | FieldExpr::Mul(a, b) | FieldExpr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
        }
    }

    /// Depth of the tree (a leaf has depth 1).
    pub fn depth(&self) -> usize {
        match self {
            FieldExpr::Const(_) | FieldExpr::Var(_) => 1,
            FieldExpr::Neg(a) | FieldExpr::Pow(a, _) | FieldExpr::Func(_, a) => 1 + a.depth(),
            FieldExpr::Add(a, b) | FieldExpr::Sub(a, b) | FieldExpr::Mul(a, b) | FieldExpr::Div(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Rejects fields that reference coordinates beyond CR dimension `n`.
    pub fn check_dimension(&self, n: usize) -> Result<()> {
        let need = self.min_dimension();
        if need > n {
            return Err(Error::validation(format!(
                "field references coordinate index {need} but the point has n = {n}"
            )));
        }
        Ok(())
    }

    /// Plain floating-point evaluation at real coordinates.
    pub fn eval_coords(&self, coords: &[f64]) -> Result<f64> {
        let n = coords.len() / 2;
        let v = match self {
            FieldExpr::Const(c) => *c,
            FieldExpr::Var(v) => coords[v.slot(n)],
            FieldExpr::Neg(a) => -a.eval_coords(coords)?,
            FieldExpr::Add(a, b) => a.eval_coords(coords)? + b.eval_coords(coords)?,
            FieldExpr::Sub(a, b) => a.eval_coords(coords)? - b.eval_coords(coords)?,
            FieldExpr::Mul(a, b) => a.eval_coords(coords)? * b.eval_coords(coords)?,
            FieldExpr::Div(a, b) => {
                let d = b.eval_coords(coords)?;
                if d == 0.0 {
                    return Err(eval_error(b, "division by zero"));
                }
                a.eval_coords(coords)? / d
            }
            FieldExpr::Pow(a, e) => {
                let x = a.eval_coords(coords)?;
                if e.fract() == 0.0 {
                    if x == 0.0 && *e < 0.0 {
                        return Err(eval_error(a, "zero raised to a negative power"));
                    }
                    x.powi(*e as i32)
                } else {
                    if x < 0.0 || (x == 0.0 && *e < 0.0) {
                        return Err(eval_error(a, format!("non-integer power of nonpositive value {x}")));
                    }
                    x.powf(*e)
                }
            }
            FieldExpr::Func(func, a) => {
                let x = a.eval_coords(coords)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x <= 0.0 {
                            return Err(eval_error(a, format!("log of nonpositive value {x}")));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => {
                        if x < 0.0 {
                            return Err(eval_error(a, format!("sqrt of negative value {x}")));
                        }
                        x.sqrt()
                    }
                    Func::Bump => jet::bump_derivatives(x)[0],
                }
            }
        };
        if !v.is_finite() {
            return Err(eval_error(self, "non-finite value"));
        }
        Ok(v)
    }

    /// Plain floating-point evaluation at a point.
    pub fn eval(&self, point: &HPoint) -> Result<f64> {
        self.check_dimension(point.n())?;
        self.eval_coords(&point.coords())
    }

    /// Jet of the given order (at most 3) at real coordinates.
    pub fn eval_jet_coords(&self, coords: &[f64], order: usize) -> Result<Jet3> {
        let m = coords.len();
        let n = m / 2;
        let j = match self {
            FieldExpr::Const(c) => Jet3::constant(m, order, *c),
            FieldExpr::Var(v) => {
                let s = v.slot(n);
                Jet3::variable(m, order, s, coords[s])
            }
            FieldExpr::Neg(a) => a.eval_jet_coords(coords, order)?.scale(-1.0),
            FieldExpr::Add(a, b) => a.eval_jet_coords(coords, order)?.add(&b.eval_jet_coords(coords, order)?),
            FieldExpr::Sub(a, b) => a.eval_jet_coords(coords, order)?.sub(&b.eval_jet_coords(coords, order)?),
            FieldExpr::Mul(a, b) => a.eval_jet_coords(coords, order)?.mul(&b.eval_jet_coords(coords, order)?),
            FieldExpr::Div(a, b) => {
                let d = b.eval_jet_coords(coords, order)?;
                if d.value() == 0.0 {
                    return Err(eval_error(b, "division by zero"));
                }
                a.eval_jet_coords(coords, order)?.mul(&d.recip())
            }
            FieldExpr::Pow(a, e) => {
                let x = a.eval_jet_coords(coords, order)?;
                if e.fract() == 0.0 {
                    if x.value() == 0.0 && *e < 0.0 {
                        return Err(eval_error(a, "zero raised to a negative power"));
                    }
                } else if x.value() <= 0.0 {
                    return Err(eval_error(
                        a,
                        format!("non-integer power needs a positive base, got {}", x.value()),
                    ));
                }
                x.powf(*e)
            }
            FieldExpr::Func(func, a) => {
                let x = a.eval_jet_coords(coords, order)?;
                match func {
                    Func::Exp => x.exp(),
                    Func::Log => {
                        if x.value() <= 0.0 {
                            return Err(eval_error(a, format!("log of nonpositive value {}", x.value())));
                        }
                        x.ln()
                    }
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sqrt => {
                        if x.value() <= 0.0 {
                            return Err(eval_error(
                                a,
                                format!("sqrt is not differentiable at nonpositive value {}", x.value()),
                            ));
                        }
                        x.sqrt()
                    }
                    Func::Bump => x.bump(),
                }
            }
        };
        if !j.is_finite() {
            return Err(eval_error(self, "non-finite jet entry"));
        }
        Ok(j)
    }

    /// Jet of the given order (at most 3) at a point.
    pub fn eval_jet(&self, point: &HPoint, order: usize) -> Result<Jet3> {
        self.check_dimension(point.n())?;
        self.eval_jet_coords(&point.coords(), order)
    }
}

/// Third-order jet of `expr` at `point` by truncated Taylor arithmetic.
pub fn eval_jet3(expr: &FieldExpr, point: &HPoint) -> Result<Jet3> {
    expr.eval_jet(point, 3)
}
