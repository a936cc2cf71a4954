//! Spectrum-free reference formulas, used as independent oracles.
//!
//! These follow the generalized Kronecker-symbol expansions
//! `σ_k(A) = (1/k!) δ^{i_1…i_k}_{j_1…j_k} A_{i_1}^{j_1} ⋯ A_{i_k}^{j_k}` and
//! `T_k(A)^i_j = (1/k!) δ^{i i_1…i_k}_{j j_1…j_k} A_{i_1}^{j_1} ⋯ A_{i_k}^{j_k}`.
//! The symmetry of the contraction under simultaneous reordering of the upper
//! and lower index blocks is used to sum over increasing upper tuples only,
//! which removes the `1/k!`. Cost is still factorial in `k`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::HermitianMatrix;

/// All permutations of `0..m` paired with their signs (Heap's algorithm).
fn signed_permutations(m: usize) -> Vec<(Vec<usize>, f64)> {
    let mut out = Vec::new();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut c = vec![0usize; m];
    let mut sign = 1.0;
    out.push((perm.clone(), sign));
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            sign = -sign;
            out.push((perm.clone(), sign));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

/// Increasing `k`-tuples drawn from `0..n`, excluding `skip`.
fn increasing_tuples(n: usize, k: usize, skip: Option<usize>) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, skip: Option<usize>, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if Some(i) == skip {
                continue;
            }
            cur.push(i);
            rec(i + 1, n, k, skip, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, k, skip, &mut Vec::new(), &mut out);
    out
}

/// `σ_k(A)` through the Kronecker-symbol contraction; `σ_0 = 1`.
///
/// # Panics
/// If `k > n`.
pub fn sigma_k_kronecker(a: &HermitianMatrix, k: usize) -> f64 {
    let n = a.dim();
    assert!(k <= n, "k must not exceed the matrix order");
    let m = a.as_matrix();
    let perms = signed_permutations(k);
    let mut total = Complex64::new(0.0, 0.0);
    for upper in increasing_tuples(n, k, None) {
        for (perm, sign) in &perms {
            let mut term = Complex64::new(*sign, 0.0);
            for (slot, &i) in upper.iter().enumerate() {
                term *= m[(i, upper[perm[slot]])];
            }
            total += term;
        }
    }
    total.re
}

/// `T_k(A)` through the Kronecker-symbol contraction, as a plain matrix.
///
/// With `A_i^j` read as entry `(i, j)` the contraction yields the transpose of
/// the matrix product convention, so the result is stored transposed.
///
/// # Panics
/// If `k >= n`.
pub fn newton_transform_kronecker(a: &HermitianMatrix, k: usize) -> DMatrix<Complex64> {
    let n = a.dim();
    assert!(k < n, "k must be below the matrix order");
    let m = a.as_matrix();
    let perms = signed_permutations(k + 1);
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    for row in 0..n {
        for rest in increasing_tuples(n, k, Some(row)) {
            // Upper block (row, rest…); the lower block is a permutation of it.
            let mut upper = Vec::with_capacity(k + 1);
            upper.push(row);
            upper.extend_from_slice(&rest);
            for (perm, sign) in &perms {
                let col = upper[perm[0]];
                let mut term = Complex64::new(*sign, 0.0);
                for slot in 1..=k {
                    term *= m[(upper[slot], upper[perm[slot]])];
                }
                t[(col, row)] += term;
            }
        }
    }
    t
}

/// `T_k(A) = Σ_{j=0}^{k} (−1)^j σ_{k−j}(A) A^j` with `σ_j` from the
/// Kronecker-symbol contraction.
pub fn newton_transform_polynomial(a: &HermitianMatrix, k: usize) -> DMatrix<Complex64> {
    let n = a.dim();
    let m = a.as_matrix();
    let mut power = DMatrix::<Complex64>::identity(n, n);
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    for j in 0..=k {
        let coeff = if j % 2 == 0 { 1.0 } else { -1.0 } * sigma_k_kronecker(a, k - j);
        t += power.map(|z| z * coeff);
        power = &power * m;
    }
    t
}
