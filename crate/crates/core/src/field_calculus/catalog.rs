use std::collections::BTreeMap;

use super::{FieldExpr, Func, Var};
use crate::error::{Error, Result};

/// Named numeric parameters of a catalog field.
pub type CatalogParams = BTreeMap<String, f64>;

/// Names accepted by [`catalog_field`].
pub const CATALOG_NAMES: [&str; 4] = ["v0", "bump", "gaussian", "monomial"];

fn dimension(params: &CatalogParams, name: &str) -> Result<usize> {
    let n = *params
        .get("n")
        .ok_or_else(|| Error::validation(format!("catalog field `{name}`: missing parameter n")))?;
    if n < 1.0 || n.fract() != 0.0 || n > 16.0 {
        return Err(Error::validation(format!("catalog field `{name}`: n must be an integer in 1..=16, got {n}")));
    }
    Ok(n as usize)
}

fn param(params: &CatalogParams, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

fn square(e: FieldExpr) -> FieldExpr {
    FieldExpr::pow(e, 2.0)
}

/// `|z|² = Σ x_α² + y_α²` on `Hⁿ`.
fn z_norm_sq(n: usize) -> FieldExpr {
    FieldExpr::sum(
        (0..n)
            .flat_map(|i| [square(FieldExpr::Var(Var::X(i))), square(FieldExpr::Var(Var::Y(i)))])
            .collect(),
    )
}

/// Builds a named field.
///
/// * `v0` (`n`): `(t² + (1 + |z|²)²)^{−n/2} = |w + i|^{−n}` with `w = t + i|z|²`,
///   the Cayley-transform conformal factor of the standard sphere.
/// * `bump` (`n`, optional `radius` = 1, `amplitude` = 1, center `cx1..cxn`,
///   `cy1..cyn`, `ct`, all 0): `amplitude · bump(ρ²/radius²)` with
///   `ρ² = |z − c|² + (t − c_t)²`; smooth, supported in the closed ball.
/// * `gaussian` (`n`, optional `a` = 1): `exp(−a(|z|² + t²))`.
/// * `monomial` (`n`, optional `coeff` = 1 and integer exponents keyed by
///   coordinate name, e.g. `x1`, `y2`, `t`): `coeff · Π coordinate^exponent`.
pub fn catalog_field(name: &str, params: &CatalogParams) -> Result<FieldExpr> {
    match name {
        "v0" => {
            let n = dimension(params, name)?;
            let one_plus = FieldExpr::add(FieldExpr::Const(1.0), z_norm_sq(n));
            let base = FieldExpr::add(square(FieldExpr::Var(Var::T)), square(one_plus));
            Ok(FieldExpr::pow(base, -(n as f64) / 2.0))
        }
        "bump" => {
            let n = dimension(params, name)?;
            let radius = param(params, "radius", 1.0);
            if radius <= 0.0 || !radius.is_finite() {
                return Err(Error::validation(format!("bump radius must be positive, got {radius}")));
            }
            let shifted = |v: Var, key: String| {
                let c = param(params, &key, 0.0);
                if c == 0.0 {
                    square(FieldExpr::Var(v))
                } else {
                    square(FieldExpr::sub(FieldExpr::Var(v), FieldExpr::Const(c)))
                }
            };
            let mut terms: Vec<FieldExpr> = Vec::new();
            for i in 0..n {
                terms.push(shifted(Var::X(i), format!("cx{}", i + 1)));
                terms.push(shifted(Var::Y(i), format!("cy{}", i + 1)));
            }
            terms.push(shifted(Var::T, "ct".to_string()));
            let scaled = FieldExpr::div(FieldExpr::sum(terms), FieldExpr::Const(radius * radius));
            let b = FieldExpr::func(Func::Bump, scaled);
            let amplitude = param(params, "amplitude", 1.0);
            Ok(if amplitude == 1.0 { b } else { FieldExpr::mul(FieldExpr::Const(amplitude), b) })
        }
        "gaussian" => {
            let n = dimension(params, name)?;
            let a = param(params, "a", 1.0);
            let r2 = FieldExpr::add(z_norm_sq(n), square(FieldExpr::Var(Var::T)));
            Ok(FieldExpr::func(Func::Exp, FieldExpr::mul(FieldExpr::Const(-a), r2)))
        }
        "monomial" => {
            let n = dimension(params, name)?;
            let mut factors = vec![FieldExpr::Const(param(params, "coeff", 1.0))];
            let mut vars: Vec<(String, Var)> = Vec::new();
            for i in 0..n {
                vars.push((format!("x{}", i + 1), Var::X(i)));
                vars.push((format!("y{}", i + 1), Var::Y(i)));
            }
            vars.push(("t".to_string(), Var::T));
            for key in params.keys() {
                let known = matches!(key.as_str(), "n" | "coeff") || vars.iter().any(|(k, _)| k == key);
                if !known {
                    return Err(Error::validation(format!("monomial: unknown parameter `{key}`")));
                }
            }
            for (key, v) in vars {
                if let Some(&e) = params.get(&key) {
                    if e < 0.0 || e.fract() != 0.0 {
                        return Err(Error::validation(format!(
                            "monomial: exponent of {key} must be a nonnegative integer, got {e}"
                        )));
                    }
                    if e > 0.0 {
                        factors.push(if e == 1.0 { FieldExpr::Var(v) } else { FieldExpr::pow(FieldExpr::Var(v), e) });
                    }
                }
            }
            let mut it = factors.into_iter();
            let first = it.next().expect("coefficient factor");
            Ok(it.fold(first, FieldExpr::mul))
        }
        other => Err(Error::validation(format!(
            "unknown catalog field `{other}` (expected one of {})",
            CATALOG_NAMES.join(", ")
        ))),
    }
}
