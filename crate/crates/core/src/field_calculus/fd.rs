use super::{FieldExpr, HPoint, Jet3};
use crate::error::Result;

/// Central-difference jet of `expr` at `point`.
///
/// First and second derivatives use the standard three- and four-point
/// stencils with step `h`. Third derivatives use the five-point
/// `(f₊₂ − 2f₊₁ + 2f₋₁ − f₋₂)/(2h₃³)`, the mixed `∂_j` of the second
/// difference, and the eight-point `(±,±,±)` stencil, with step
/// `h₃ = h^{4/5}` so that roundoff (`~ε/h₃³`) does not swamp the result at
/// small `h`. Every entry has truncation error `O(h²)` (`O(h₃²)` at order 3).
pub fn fd_jet3(expr: &FieldExpr, point: &HPoint, h: f64) -> Result<Jet3> {
    assert!(h > 0.0, "finite-difference step must be positive");
    let x0 = point.coords();
    let m = x0.len();
    let f = |shifts: &[(usize, f64)]| -> Result<f64> {
        let mut x = x0.clone();
        for &(i, d) in shifts {
            x[i] += d;
        }
        expr.eval_coords(&x)
    };
    let f0 = f(&[])?;
    let mut grad = vec![0.0; m];
    let mut hess = vec![0.0; m * m];
    let mut third = vec![0.0; m * m * m];
    for i in 0..m {
        let fp = f(&[(i, h)])?;
        let fm = f(&[(i, -h)])?;
        grad[i] = (fp - fm) / (2.0 * h);
        hess[i * m + i] = (fp - 2.0 * f0 + fm) / (h * h);
        for j in i + 1..m {
            let v = (f(&[(i, h), (j, h)])? - f(&[(i, h), (j, -h)])? - f(&[(i, -h), (j, h)])?
                + f(&[(i, -h), (j, -h)])?)
                / (4.0 * h * h);
            hess[i * m + j] = v;
            hess[j * m + i] = v;
        }
    }
    let h3 = h.powf(0.8);
    let mut set = |i: usize, j: usize, l: usize, v: f64| {
        for (a, b, c) in [(i, j, l), (i, l, j), (j, i, l), (j, l, i), (l, i, j), (l, j, i)] {
            third[(a * m + b) * m + c] = v;
        }
    };
    for i in 0..m {
        let v = (f(&[(i, 2.0 * h3)])? - 2.0 * f(&[(i, h3)])? + 2.0 * f(&[(i, -h3)])? - f(&[(i, -2.0 * h3)])?)
            / (2.0 * h3 * h3 * h3);
        set(i, i, i, v);
        for j in 0..m {
            if j == i {
                continue;
            }
            // ∂_i∂_i∂_j: central difference in j of the second difference in i.
            let second = |dj: f64| -> Result<f64> {
                Ok(f(&[(i, h3), (j, dj)])? - 2.0 * f(&[(j, dj)])? + f(&[(i, -h3), (j, dj)])?)
            };
            let v = (second(h3)? - second(-h3)?) / (2.0 * h3 * h3 * h3);
            set(i, i, j, v);
        }
        for j in i + 1..m {
            for l in j + 1..m {
                let mut acc = 0.0;
                for si in [1.0, -1.0] {
                    for sj in [1.0, -1.0] {
                        for sl in [1.0, -1.0] {
                            acc += si * sj * sl * f(&[(i, si * h3), (j, sj * h3), (l, sl * h3)])?;
                        }
                    }
                }
                set(i, j, l, acc / (8.0 * h3 * h3 * h3));
            }
        }
    }
    Ok(Jet3::from_parts(m, f0, grad, hess, third))
}
