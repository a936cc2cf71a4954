//! Seeded random inputs for property checks and command-line experiments.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::field_calculus::HPoint;
use crate::symmetric_functions::{elementary_symmetric, HermitianMatrix};

/// The generator used throughout; a seed fixes every derived sample.
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn complex_uniform<R: Rng>(rng: &mut R, scale: f64) -> Complex64 {
    Complex64::new(rng.gen_range(-scale..=scale), rng.gen_range(-scale..=scale))
}

/// Hermitian matrix with entries of magnitude at most `scale`.
pub fn random_hermitian<R: Rng>(rng: &mut R, n: usize, scale: f64) -> HermitianMatrix {
    let raw = DMatrix::from_fn(n, n, |_, _| complex_uniform(rng, scale));
    HermitianMatrix::hermitize(raw)
}

/// Unitary matrix from the QR factorization of a random complex matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> DMatrix<Complex64> {
    loop {
        let raw = DMatrix::from_fn(n, n, |_, _| complex_uniform(rng, 1.0));
        let qr = raw.qr();
        if qr.r().diagonal().iter().all(|d| d.norm() > 1e-3) {
            return qr.q();
        }
    }
}

/// `U diag(spectrum) U*` for a random unitary `U`.
pub fn with_spectrum<R: Rng>(rng: &mut R, spectrum: &[f64]) -> HermitianMatrix {
    let u = random_unitary(rng, spectrum.len());
    let d = DMatrix::from_fn(spectrum.len(), spectrum.len(), |i, j| {
        if i == j {
            Complex64::new(spectrum[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    HermitianMatrix::hermitize(&u * d * u.adjoint())
}

/// Spectrum in the open cone `Γ_k⁺` with entries of order one, including
/// negative entries whenever `k < n` allows them.
pub fn gamma_k_spectrum<R: Rng>(rng: &mut R, n: usize, k: usize) -> Vec<f64> {
    loop {
        let spectrum: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..2.0)).collect();
        let sig = elementary_symmetric(&spectrum);
        if sig[1..=k].iter().all(|&s| s > 1e-3) {
            return spectrum;
        }
    }
}

/// Hermitian matrix with a spectrum drawn by [`gamma_k_spectrum`].
pub fn gamma_k_matrix<R: Rng>(rng: &mut R, n: usize, k: usize) -> HermitianMatrix {
    let spectrum = gamma_k_spectrum(rng, n, k);
    with_spectrum(rng, &spectrum)
}

/// Point with `|z^α|, |t|` bounded by `radius` in every coordinate.
pub fn random_point<R: Rng>(rng: &mut R, n: usize, radius: f64) -> HPoint {
    let z = (0..n).map(|_| complex_uniform(rng, radius)).collect();
    HPoint::new(z, rng.gen_range(-radius..=radius))
}
