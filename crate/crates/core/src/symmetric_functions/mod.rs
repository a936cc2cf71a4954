//! Elementary symmetric functions of hermitian spectra.
//!
//! `σ_k(A)` is the k-th elementary symmetric polynomial of the eigenvalues of
//! a hermitian matrix `A`. It is evaluated from the characteristic-polynomial
//! coefficients of the spectrum; [`reference`] holds the factorial-cost
//! Kronecker-symbol expansion used as an independent oracle.
//!
//! The module also provides the Newton transformations
//! `T_k(A) = σ_k(A) I − T_{k−1}(A) A`, Gårding-cone membership, the matrix
//! inequalities of the k-Yamabe theory, and index raising with a positive
//! definite Levi form.

mod hermitian;
pub mod reference;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use hermitian::{HermitianMatrix, HERMITIAN_TOL, MAX_DIM};

/// Binomial coefficient `C(n, k)` as a float; zero when `k > n`.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// All elementary symmetric polynomials `e_0, …, e_m` of `values`.
pub fn elementary_symmetric(values: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; values.len() + 1];
    e[0] = 1.0;
    for (count, &x) in values.iter().enumerate() {
        for j in (1..=count + 1).rev() {
            e[j] += x * e[j - 1];
        }
    }
    e
}

/// `σ_0(A), …, σ_n(A)` from the spectrum of `A`.
pub fn sigmas(a: &HermitianMatrix) -> Vec<f64> {
    elementary_symmetric(&a.eigenvalues())
}

/// `σ_k(A)` with the convention `σ_0 = 1`.
pub fn sigma_k(a: &HermitianMatrix, k: usize) -> Result<f64> {
    let n = a.dim();
    if k > n {
        return Err(Error::domain(format!("sigma_k needs 0 <= k <= n = {n}, got k = {k}")));
    }
    Ok(sigmas(a)[k])
}

/// Newton transformation `T_k(A) = Σ_{j=0}^{k} (−1)^j σ_{k−j}(A) A^j`.
///
/// Computed by the recurrence `T_k = σ_k I − T_{k−1} A` from `T_0 = I`.
pub fn newton_transform(a: &HermitianMatrix, k: usize) -> Result<HermitianMatrix> {
    let n = a.dim();
    if k >= n {
        return Err(Error::domain(format!(
            "newton_transform needs 0 <= k <= n - 1 = {}, got k = {k}",
            n - 1
        )));
    }
    Ok(newton_chain(a, &sigmas(a), k))
}

/// `T_k(A)` from precomputed `σ_j(A)`; valid for any `k <= n`.
pub(crate) fn newton_chain(a: &HermitianMatrix, sig: &[f64], k: usize) -> HermitianMatrix {
    let n = a.dim();
    let mut t = DMatrix::<Complex64>::identity(n, n);
    for &s in sig.iter().take(k + 1).skip(1) {
        t = DMatrix::from_diagonal_element(n, n, Complex64::new(s, 0.0)) - &t * a.as_matrix();
    }
    HermitianMatrix::hermitize(t)
}

/// Gårding-cone report for a hermitian matrix.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConeReport {
    pub k: usize,
    /// `σ_1, …, σ_k`.
    pub sigmas: Vec<f64>,
    /// `positive[j-1]` is `σ_j > 0`.
    pub positive: Vec<bool>,
    /// `in_cone[j-1]` is membership in `Γ_j^+`, i.e. `σ_1, …, σ_j` all positive.
    pub in_cone: Vec<bool>,
}

impl ConeReport {
    fn from_sigmas(k: usize, sig: &[f64]) -> Self {
        let sigmas: Vec<f64> = sig[1..=k].to_vec();
        let positive: Vec<bool> = sigmas.iter().map(|&s| s > 0.0).collect();
        let in_cone = positive
            .iter()
            .scan(true, |all, &p| {
                *all = *all && p;
                Some(*all)
            })
            .collect();
        Self { k, sigmas, positive, in_cone }
    }

    /// Membership in `Γ_k^+`.
    pub fn in_gamma_k(&self) -> bool {
        self.in_cone.last().copied().unwrap_or(false)
    }
}

/// Membership of `A` in the Gårding cones `Γ_1^+ ⊇ … ⊇ Γ_k^+`.
pub fn cone_membership(a: &HermitianMatrix, k: usize) -> Result<ConeReport> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::domain(format!("cone_membership needs 1 <= k <= n = {n}, got k = {k}")));
    }
    Ok(ConeReport::from_sigmas(k, &sigmas(a)))
}

/// Slack values of the two matrix inequalities on `Γ_k^+`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityReport {
    pub n: usize,
    pub k: usize,
    pub sigma_1: f64,
    pub sigma_k: f64,
    /// `(n−k)/(n(k+1)) σ_k σ_1 − σ_{k+1}`.
    pub newton_slack: f64,
    /// `σ_{k−1} − k/(n−k+1) · C(n,k)^{1/k} · σ_k^{(k−1)/k}`.
    pub maclaurin_slack: f64,
    /// `1e-10 · max(1, |σ_k σ_1|)`.
    pub tolerance: f64,
    /// `false` when `k = n`, where the first inequality degenerates to `0 ≤ 0`.
    pub newton_applicable: bool,
    /// Equality in the first inequality (only meaningful when applicable).
    pub equality: bool,
    /// `Some(λ)` when `A ≈ λ I_n`.
    pub scalar_value: Option<f64>,
}

/// Relative threshold for recognising `A ≈ λ I`.
pub const SCALAR_TOL: f64 = 1e-8;

/// Evaluates both inequalities at `A ∈ Γ_k^+`.
pub fn inequality_suite(a: &HermitianMatrix, k: usize) -> Result<InequalityReport> {
    let n = a.dim();
    if k == 0 || k > n {
        return Err(Error::domain(format!("inequality_suite needs 1 <= k <= n = {n}, got k = {k}")));
    }
    let eig = a.eigenvalues();
    let sig = elementary_symmetric(&eig);
    let cone = ConeReport::from_sigmas(k, &sig);
    if !cone.in_gamma_k() {
        return Err(Error::precondition(format!(
            "matrix is not in the Garding cone Gamma_{k}^+ (sigma_1..sigma_k = {:?})",
            cone.sigmas
        )));
    }
    let (nf, kf) = (n as f64, k as f64);
    let sigma_1 = sig[1];
    let sigma_k = sig[k];
    let sigma_next = if k < n { sig[k + 1] } else { 0.0 };
    let newton_slack = (nf - kf) / (nf * (kf + 1.0)) * sigma_k * sigma_1 - sigma_next;
    let maclaurin_slack = sig[k - 1]
        - kf / (nf - kf + 1.0) * binomial(n, k).powf(1.0 / kf) * sigma_k.powf((kf - 1.0) / kf);
    let tolerance = 1e-10 * (sigma_k * sigma_1).abs().max(1.0);
    let newton_applicable = k < n;
    let scale = eig.iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let spread = eig[n - 1] - eig[0];
    let scalar_value = (spread <= SCALAR_TOL * scale && a.max_abs_off_diagonal() <= SCALAR_TOL * scale)
        .then(|| eig.iter().sum::<f64>() / nf);
    Ok(InequalityReport {
        n,
        k,
        sigma_1,
        sigma_k,
        newton_slack,
        maclaurin_slack,
        tolerance,
        newton_applicable,
        equality: newton_applicable && newton_slack.abs() <= tolerance,
        scalar_value,
    })
}

/// Minimum over `t_samples` equispaced `t ∈ [0, 1]` of the concavity gap
/// `σ_k((1−t)A + tB)^{1/k} − (1−t)σ_k(A)^{1/k} − tσ_k(B)^{1/k}`.
pub fn concavity_check(
    a: &HermitianMatrix,
    b: &HermitianMatrix,
    k: usize,
    t_samples: usize,
) -> Result<f64> {
    let n = a.dim();
    if b.dim() != n {
        return Err(Error::validation("concavity_check needs matrices of equal order"));
    }
    if t_samples < 3 {
        return Err(Error::validation(format!("concavity_check needs t_samples >= 3, got {t_samples}")));
    }
    let root = |m: &HermitianMatrix, label: &str| -> Result<f64> {
        let cone = cone_membership(m, k)?;
        if !cone.in_gamma_k() {
            return Err(Error::precondition(format!(
                "{label} is not in Gamma_{k}^+ (sigma_1..sigma_k = {:?})",
                cone.sigmas
            )));
        }
        Ok(cone.sigmas[k - 1].powf(1.0 / k as f64))
    };
    let ra = root(a, "first endpoint")?;
    let rb = root(b, "second endpoint")?;
    let mut min_gap = f64::INFINITY;
    for i in 0..t_samples {
        let t = i as f64 / (t_samples - 1) as f64;
        let mid = root(&a.lerp(b, t), &format!("segment point t = {t}"))?;
        min_gap = min_gap.min(mid - (1.0 - t) * ra - t * rb);
    }
    Ok(min_gap)
}

/// The mixed-index block `S_α^γ = S_{αβ̄} h^{γβ̄}` in an `h`-unitary frame.
///
/// `S h^{-1}` is similar to the hermitian matrix `h^{-1/2} S h^{-1/2}`, which is
/// returned; it has the same spectrum and equals `S / c` when `h = c I`.
pub fn raise_index(s_lower: &HermitianMatrix, h: &HermitianMatrix) -> Result<HermitianMatrix> {
    let n = s_lower.dim();
    if h.dim() != n {
        return Err(Error::validation("raise_index needs matrices of equal order"));
    }
    let diag = h.as_matrix().diagonal();
    let c = diag[0].re;
    if h.max_abs_off_diagonal() == 0.0 && diag.iter().all(|z| z.im == 0.0 && z.re == c) {
        if c <= 0.0 {
            return Err(Error::validation(format!("Levi form is not positive definite (scale {c})")));
        }
        return Ok(s_lower.scaled(1.0 / c));
    }
    let eig = h.as_matrix().clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(Error::validation(format!(
            "Levi form is not positive definite (eigenvalues {:?})",
            eig.eigenvalues.as_slice()
        )));
    }
    let inv_sqrt = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::new(1.0 / l.sqrt(), 0.0)));
    let root = &eig.eigenvectors * inv_sqrt * eig.eigenvectors.adjoint();
    Ok(HermitianMatrix::hermitize(&root * s_lower.as_matrix() * &root))
}
