//! Deterministic quadrature over `Hⁿ ≅ ℝ^{2n+1}`.
//!
//! Every grid is a product of one-dimensional Gauss–Legendre rules placed
//! into `ℝ^{2n+1}` by a kind-specific map. Unbounded axes use
//! `x = L tan(πξ/2)` (or its half-line analogue), so the integrand must decay
//! faster than `|x|^{-1}` along them. Nodes are visited in fixed-size chunks
//! whose partial sums are combined pairwise in index order, which makes the
//! result independent of the number of worker threads.

use std::f64::consts::PI;
use std::num::NonZeroUsize;

use gauss_quad::{FiniteAboveNegOneF64, GaussJacobi, GaussLegendre};
use rayon::prelude::*;
use serde::Serialize;

use super::ModelConvention;
use crate::error::{Error, Result};
use crate::field_calculus::{FieldExpr, HPoint};

/// Largest admissible fraction of `∫|f|` carried by nodes beyond the outer
/// shell of an unbounded axis before an integrand is declared non-decaying.
/// Integrable power-law decay such as `|w|^{−2n−2}` leaves a few percent in
/// the shell; a non-decaying integrand leaves most of its mass there.
pub const TAIL_TOLERANCE: f64 = 0.2;

/// Mapped coordinates beyond `L tan(0.45π) ≈ 6.3 L` form the outer shell.
const OUTER_SHELL: f64 = 6.313_751_514_675_043;
const CHUNK: usize = 4096;
const MAX_NODES: usize = 400_000_000;

/// Placement of the product rule in `ℝ^{2n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridKind {
    /// Full tensor product, every axis mapped onto the real line.
    Tensor,
    /// Polar coordinates in each `z^α` with the phases integrated exactly.
    /// Exact only for integrands invariant under `z^α ↦ e^{iφ_α} z^α`.
    Torus,
    /// Polar coordinates in `ℂⁿ` with the sphere integrated exactly.
    /// Exact only for integrands depending on `(|z|, t)` alone.
    Radial,
    /// Gauss–Legendre cube `center ± half_width` in every coordinate.
    Box { center: Vec<f64>, half_width: f64 },
    /// Gauss radial rule times a hyperspherical product rule on the ball
    /// `|x − center| ≤ radius`, for integrands supported in that ball.
    Ball { center: Vec<f64>, radius: f64, angular_points: usize },
}

/// A quadrature request: kind, points per axis, and the length scale `L` of
/// the unbounded-axis map.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSpec {
    pub kind: GridKind,
    pub points: usize,
    pub scale: f64,
}

impl GridSpec {
    pub fn new(kind: GridKind, points: usize) -> Self {
        Self { kind, points, scale: 1.0 }
    }

    pub fn with_scale(mut self, scale: f64) -> Self {
        self.scale = scale;
        self
    }

    /// The same grid with roughly half the points per axis; the difference
    /// between the two rules is the reported error estimate.
    pub fn coarsened(&self) -> Self {
        let mut coarse = self.clone();
        coarse.points = (self.points / 2).max(2);
        if let GridKind::Ball { angular_points, .. } = &mut coarse.kind {
            *angular_points = (*angular_points / 2).max(2);
        }
        coarse
    }
}

#[derive(Debug, Clone, Copy)]
struct AxisNode {
    x: f64,
    w: f64,
    outer: bool,
}

#[derive(Debug, Clone)]
enum Placement {
    Cartesian,
    Torus,
    Radial,
    Ball { center: Vec<f64> },
}

/// Nodes and weights of a product rule, generated on demand from the axes.
#[derive(Debug, Clone)]
pub struct QuadratureGrid {
    spec: GridSpec,
    n: usize,
    axes: Vec<Vec<AxisNode>>,
    placement: Placement,
    len: usize,
}

fn gauss_legendre(points: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let deg = NonZeroUsize::new(points).ok_or_else(|| Error::validation("a rule needs at least one point"))?;
    let rule = GaussLegendre::new(deg);
    Ok((rule.nodes().copied().collect(), rule.weights().copied().collect()))
}

/// Rule on `[0, π]` for the density `sin^power θ`, exact for polynomials in
/// `cos θ` via Gauss–Jacobi nodes in `u = cos θ`.
fn polar_angle_axis(points: usize, power: i32) -> Result<Vec<AxisNode>> {
    let deg = NonZeroUsize::new(points).ok_or_else(|| Error::validation("a rule needs at least one point"))?;
    let exponent = FiniteAboveNegOneF64::new(0.5 * f64::from(power - 1))
        .ok_or_else(|| Error::validation(format!("no Jacobi rule for sin^{power}")))?;
    let rule = GaussJacobi::new(deg, exponent, exponent);
    Ok(rule
        .nodes()
        .zip(rule.weights())
        .map(|(&u, &w)| AxisNode { x: u.acos(), w, outer: false })
        .collect())
}

/// Rule on `[a, b]` for the density `density(x)`.
fn interval_axis(points: usize, a: f64, b: f64, density: impl Fn(f64) -> f64) -> Result<Vec<AxisNode>> {
    let (xs, ws) = gauss_legendre(points)?;
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    Ok(xs
        .iter()
        .zip(&ws)
        .map(|(&xi, &w)| {
            let x = mid + half * xi;
            AxisNode { x, w: w * half * density(x), outer: false }
        })
        .collect())
}

/// Rule on `ℝ` via `x = L tan(πξ/2)`.
fn line_axis(points: usize, scale: f64) -> Result<Vec<AxisNode>> {
    let (xs, ws) = gauss_legendre(points)?;
    Ok(xs
        .iter()
        .zip(&ws)
        .map(|(&xi, &w)| {
            let angle = 0.5 * PI * xi;
            let x = scale * angle.tan();
            let jac = scale * 0.5 * PI / angle.cos().powi(2);
            AxisNode { x, w: w * jac, outer: x.abs() > OUTER_SHELL * scale }
        })
        .collect())
}

/// Rule on `[0, ∞)` for the density `density(r)` via `r = L tan(π(ξ+1)/4)`.
fn half_line_axis(points: usize, scale: f64, density: impl Fn(f64) -> f64) -> Result<Vec<AxisNode>> {
    let (xs, ws) = gauss_legendre(points)?;
    Ok(xs
        .iter()
        .zip(&ws)
        .map(|(&xi, &w)| {
            let angle = 0.25 * PI * (xi + 1.0);
            let r = scale * angle.tan();
            let jac = scale * 0.25 * PI / angle.cos().powi(2);
            AxisNode { x: r, w: w * jac * density(r), outer: r > OUTER_SHELL * scale }
        })
        .collect())
}

/// Equally weighted trapezoid rule on the circle, exact for trigonometric
/// polynomials of degree below `points`.
fn circle_axis(points: usize) -> Vec<AxisNode> {
    let step = 2.0 * PI / points as f64;
    (0..points).map(|j| AxisNode { x: step * j as f64, w: step, outer: false }).collect()
}

impl QuadratureGrid {
    pub fn new(spec: &GridSpec, conv: &ModelConvention) -> Result<Self> {
        let n = conv.n;
        let d = conv.real_dim();
        let points = spec.points;
        if points < 2 {
            return Err(Error::validation(format!("grid needs at least 2 points per axis, got {points}")));
        }
        if !(spec.scale > 0.0 && spec.scale.is_finite()) {
            return Err(Error::validation(format!("grid scale must be positive, got {}", spec.scale)));
        }
        let l = spec.scale;
        let (axes, placement) = match &spec.kind {
            GridKind::Tensor => ((0..d).map(|_| line_axis(points, l)).collect::<Result<Vec<_>>>()?, Placement::Cartesian),
            GridKind::Torus => {
                let mut axes = (0..n)
                    .map(|_| half_line_axis(points, l, |r| 2.0 * PI * r))
                    .collect::<Result<Vec<_>>>()?;
                axes.push(line_axis(points, l)?);
                (axes, Placement::Torus)
            }
            GridKind::Radial => {
                let factorial: f64 = (1..n).map(|i| i as f64).product();
                let sphere = 2.0 * PI.powi(n as i32) / factorial;
                let radial = half_line_axis(points, l, |r| sphere * r.powi(2 * n as i32 - 1))?;
                (vec![radial, line_axis(points, l)?], Placement::Radial)
            }
            GridKind::Box { center, half_width } => {
                check_center(center, d)?;
                if !(*half_width > 0.0 && half_width.is_finite()) {
                    return Err(Error::validation(format!("box half width must be positive, got {half_width}")));
                }
                let axes = center
                    .iter()
                    .map(|&c| interval_axis(points, c - half_width, c + half_width, |_| 1.0))
                    .collect::<Result<Vec<_>>>()?;
                (axes, Placement::Cartesian)
            }
            GridKind::Ball { center, radius, angular_points } => {
                check_center(center, d)?;
                if !(*radius > 0.0 && radius.is_finite()) {
                    return Err(Error::validation(format!("ball radius must be positive, got {radius}")));
                }
                if *angular_points < 2 {
                    return Err(Error::validation("ball grid needs at least 2 angular points"));
                }
                let mut axes = vec![interval_axis(points, 0.0, *radius, |rho| rho.powi(d as i32 - 1))?];
                for j in 1..d - 1 {
                    let power = (d - 1 - j) as i32;
                    axes.push(polar_angle_axis(*angular_points, power)?);
                }
                axes.push(circle_axis(2 * angular_points));
                (axes, Placement::Ball { center: center.clone() })
            }
        };
        let len = axes.iter().try_fold(1usize, |acc, a| acc.checked_mul(a.len())).filter(|&len| len <= MAX_NODES);
        let len = len.ok_or_else(|| Error::validation(format!("grid exceeds {MAX_NODES} nodes; use fewer points or a reduced kind")))?;
        Ok(Self { spec: spec.clone(), n, axes, placement, len })
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Writes the coordinates of node `index` into `coords` and returns its
    /// weight and whether it lies in the outer shell.
    pub fn node(&self, index: usize, coords: &mut [f64]) -> (f64, bool) {
        let mut rest = index;
        let mut weight = 1.0;
        let mut outer = false;
        let mut picked = [0.0f64; 40];
        for (slot, axis) in self.axes.iter().enumerate().rev() {
            let node = axis[rest % axis.len()];
            rest /= axis.len();
            weight *= node.w;
            outer |= node.outer;
            picked[slot] = node.x;
        }
        let picked = &picked[..self.axes.len()];
        coords.iter_mut().for_each(|c| *c = 0.0);
        let n = self.n;
        match &self.placement {
            Placement::Cartesian => coords.copy_from_slice(picked),
            Placement::Torus => {
                coords[..n].copy_from_slice(&picked[..n]);
                coords[2 * n] = picked[n];
            }
            Placement::Radial => {
                coords[0] = picked[0];
                coords[2 * n] = picked[1];
            }
            Placement::Ball { center } => {
                let d = coords.len();
                let rho = picked[0];
                let mut prefix = rho;
                for j in 0..d - 2 {
                    let th = picked[1 + j];
                    coords[j] = center[j] + prefix * th.cos();
                    prefix *= th.sin();
                }
                let phi = picked[d - 1];
                coords[d - 2] = center[d - 2] + prefix * phi.cos();
                coords[d - 1] = center[d - 1] + prefix * phi.sin();
            }
        }
        (weight, outer)
    }

    /// Weighted sums of a vector-valued integrand against `dx dy dt`.
    pub fn reduce<const N: usize, F>(&self, integrand: F) -> Result<GridSums<N>>
    where
        F: Fn(&[f64]) -> Result<[f64; N]> + Sync,
    {
        let d = 2 * self.n + 1;
        let chunks = self.len.div_ceil(CHUNK);
        let partials: Vec<Result<GridSums<N>>> = (0..chunks)
            .into_par_iter()
            .map(|c| {
                let mut coords = vec![0.0; d];
                let mut acc = GridSums::<N>::zero();
                for index in c * CHUNK..((c + 1) * CHUNK).min(self.len) {
                    let (w, outer) = self.node(index, &mut coords);
                    if w == 0.0 {
                        continue;
                    }
                    let values = integrand(&coords)?;
                    for (i, v) in values.iter().enumerate() {
                        if !v.is_finite() {
                            return Err(Error::integration(format!("non-finite integrand value {v} at node {coords:?}")));
                        }
                        let wv = w * v;
                        acc.sums[i] += wv;
                        acc.abs_sums[i] += wv.abs();
                        if outer {
                            acc.tail_abs[i] += wv.abs();
                        }
                    }
                }
                acc.nodes = ((c + 1) * CHUNK).min(self.len) - c * CHUNK;
                Ok(acc)
            })
            .collect();
        let partials = partials.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(pairwise(&partials))
    }
}

fn check_center(center: &[f64], d: usize) -> Result<()> {
    if center.len() != d || center.iter().any(|c| !c.is_finite()) {
        return Err(Error::validation(format!("grid center must have {d} finite coordinates")));
    }
    Ok(())
}

fn pairwise<const N: usize>(parts: &[GridSums<N>]) -> GridSums<N> {
    match parts.len() {
        0 => GridSums::zero(),
        1 => parts[0],
        len => {
            let (a, b) = parts.split_at(len / 2);
            pairwise(a).combine(&pairwise(b))
        }
    }
}

/// Raw weighted sums of an `N`-component integrand.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSums<const N: usize> {
    pub sums: [f64; N],
    pub abs_sums: [f64; N],
    pub tail_abs: [f64; N],
    pub nodes: usize,
}

impl<const N: usize> GridSums<N> {
    fn zero() -> Self {
        Self { sums: [0.0; N], abs_sums: [0.0; N], tail_abs: [0.0; N], nodes: 0 }
    }

    fn combine(&self, other: &Self) -> Self {
        let mut out = *self;
        for i in 0..N {
            out.sums[i] += other.sums[i];
            out.abs_sums[i] += other.abs_sums[i];
            out.tail_abs[i] += other.tail_abs[i];
        }
        out.nodes += other.nodes;
        out
    }

    /// Fraction of `∫|f_i|` carried by the outer shell.
    pub fn tail_fraction(&self, i: usize) -> f64 {
        if self.abs_sums[i] > 0.0 {
            self.tail_abs[i] / self.abs_sums[i]
        } else {
            0.0
        }
    }
}

/// An integral against `dV_{Θ₀}` with its refinement error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Integral {
    pub value: f64,
    /// `|I_fine − I_coarse|` against the grid with half the points per axis.
    pub error_estimate: f64,
    pub nodes: usize,
    /// Fraction of `∫|f|` carried by the outer shell of unbounded axes.
    pub tail_fraction: f64,
}

/// `∫ f dV_{Θ₀}`, multiplied by `e^{2(n+1)u}` when a conformal factor `u` is
/// given so that the result is `∫ f dV_θ` for `θ = e^{2u} Θ₀`.
pub fn integrate<F>(spec: &GridSpec, conv: &ModelConvention, integrand: F, conformal_factor: Option<&FieldExpr>) -> Result<Integral>
where
    F: Fn(&HPoint) -> Result<f64> + Sync,
{
    let weight = 2.0 * (conv.n as f64 + 1.0);
    let f = |coords: &[f64]| -> Result<[f64; 1]> {
        let point = HPoint::from_coords(coords);
        let mut value = integrand(&point)?;
        if let Some(u) = conformal_factor {
            value *= (weight * u.eval_coords(coords)?).exp();
        }
        Ok([value])
    };
    let fine = QuadratureGrid::new(spec, conv)?.reduce(f)?;
    let coarse = QuadratureGrid::new(&spec.coarsened(), conv)?.reduce(f)?;
    let kappa = conv.volume_const;
    Ok(Integral {
        value: kappa * fine.sums[0],
        error_estimate: kappa * (fine.sums[0] - coarse.sums[0]).abs(),
        nodes: fine.nodes,
        tail_fraction: fine.tail_fraction(0),
    })
}
