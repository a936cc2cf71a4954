#![allow(dead_code)]

use cryamabe::field_calculus::{FieldExpr, Func, Var};
use proptest::prelude::*;

/// `|a − b| ≤ tol · max(|a|, |b|, floor)`.
pub fn close(a: f64, b: f64, tol: f64, floor: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(floor)
}

fn var(n: usize, slot: usize) -> FieldExpr {
    FieldExpr::Var(match slot {
        s if s < n => Var::X(s),
        s if s < 2 * n => Var::Y(s - n),
        _ => Var::T,
    })
}

fn shifted_square(e: FieldExpr) -> FieldExpr {
    FieldExpr::add(FieldExpr::Const(1.5), FieldExpr::pow(e, 2.0))
}

/// Random expression trees in `n` complex dimensions that are smooth and
/// finite everywhere: logs, roots and quotients only see `1.5 + e²`.
pub fn smooth_field(n: usize) -> impl Strategy<Value = FieldExpr> {
    let leaf = prop_oneof![
        (-2.0..2.0f64).prop_map(FieldExpr::Const),
        (0..2 * n + 1).prop_map(move |slot| var(n, slot)),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FieldExpr::add(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FieldExpr::sub(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FieldExpr::mul(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| FieldExpr::div(a, shifted_square(b))),
            inner.clone().prop_map(FieldExpr::neg),
            inner.clone().prop_map(|e| FieldExpr::pow(e, 2.0)),
            inner.clone().prop_map(|e| FieldExpr::func(Func::Sin, e)),
            inner.clone().prop_map(|e| FieldExpr::func(Func::Cos, e)),
            inner.clone().prop_map(|e| FieldExpr::func(Func::Exp, FieldExpr::func(Func::Sin, e))),
            inner.clone().prop_map(|e| FieldExpr::func(Func::Log, shifted_square(e))),
            inner.prop_map(|e| FieldExpr::func(Func::Sqrt, shifted_square(e))),
        ]
    })
}

/// Coordinates in `[−1, 1]^{2n+1}`.
pub fn coords(n: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-1.0..1.0f64, 2 * n + 1)
}
