//! Normal, mean, Gaussian and total normal curvature of height fields.
//!
//! Pointwise quantities take a gradient `[v_x, v_y]` and a [`Hessian`].
//! Field maps use central first differences and the central second
//! differences of [`discrete_hessian`].

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{central_gradient_at, discrete_hessian, Hessian, ScalarField};

/// Uniformly spaced tangent directions on `[0, 2π)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSet {
    angles: Vec<f64>,
    tangents: Vec<[f64; 2]>,
    rows: Vec<[f64; 4]>,
}

impl DirectionSet {
    pub const DEFAULT_COUNT: usize = 8;

    /// `count` directions `θ_ℓ = 2π ℓ / count`, `ℓ = 0..count`.
    pub fn new(count: usize) -> Result<Self> {
        if count == 0 {
            return Err(Error::InvalidParameter {
                name: "n_dirs",
                value: 0.0,
                reason: "at least one direction is required",
            });
        }
        let angles = (0..count)
            .map(|l| 2.0 * PI * l as f64 / count as f64)
            .collect();
        Ok(Self::from_angles(angles))
    }

    fn from_angles(angles: Vec<f64>) -> Self {
        let tangents: Vec<[f64; 2]> = angles.iter().map(|&t: &f64| [t.cos(), t.sin()]).collect();
        let rows = tangents
            .iter()
            .map(|&[c, s]| [c * c, c * s, c * s, s * s])
            .collect();
        Self {
            angles,
            tangents,
            rows,
        }
    }

    /// The first half of an even direction set. Because the curvature
    /// integrand is π-periodic, each kept angle stands for itself and its
    /// opposite.
    pub fn half_turn(&self) -> Result<Self> {
        let n = self.len();
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "n_dirs",
                value: n as f64,
                reason: "the π-periodic reduction needs an even direction count",
            });
        }
        Ok(Self::from_angles(self.angles[..n / 2].to_vec()))
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    /// Unit tangents `(cos θ, sin θ)`.
    pub fn tangents(&self) -> &[[f64; 2]] {
        &self.tangents
    }

    /// Vectorized rows `[cos²θ, cosθ sinθ, cosθ sinθ, sin²θ]`, so that
    /// `tᵀ G t = row · vec(G)` with `vec(G) = [G11, G12, G21, G22]`.
    pub fn rows(&self) -> &[[f64; 4]] {
        &self.rows
    }

    /// Rectangle-rule weight `2π / count`.
    pub fn weight(&self) -> f64 {
        2.0 * PI / self.len() as f64
    }
}

impl Default for DirectionSet {
    fn default() -> Self {
        Self::new(Self::DEFAULT_COUNT).expect("non-zero count")
    }
}

/// Coefficients of the first (`e, f, g`) and second (`l, m, n`)
/// fundamental forms of the graph `z = v(x, y)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FundamentalForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
}

impl FundamentalForms {
    pub fn new(grad: [f64; 2], hess: Hessian) -> Self {
        let [vx, vy] = grad;
        let w = (1.0 + vx * vx + vy * vy).sqrt();
        Self {
            e: 1.0 + vx * vx,
            f: vx * vy,
            g: 1.0 + vy * vy,
            l: hess.xx / w,
            m: hess.xy / w,
            n: hess.yy / w,
        }
    }

    pub fn first(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.e * c * c + 2.0 * self.f * c * s + self.g * s * s
    }

    pub fn second(&self, theta: f64) -> f64 {
        let (s, c) = theta.sin_cos();
        self.l * c * c + 2.0 * self.m * c * s + self.n * s * s
    }
}

#[inline]
fn directional_second(hess: &Hessian, t: [f64; 2]) -> f64 {
    hess.xx * t[0] * t[0] + 2.0 * hess.xy * t[0] * t[1] + hess.yy * t[1] * t[1]
}

#[inline]
fn normal_curvature_along(grad: [f64; 2], hess: &Hessian, t: [f64; 2], area: f64) -> f64 {
    let slope = grad[0] * t[0] + grad[1] * t[1];
    directional_second(hess, t) / (area * (1.0 + slope * slope))
}

/// Normal curvature along `t = (cos θ, sin θ)`.
pub fn normal_curvature(grad: [f64; 2], hess: Hessian, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    let area = (1.0 + grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
    normal_curvature_along(grad, &hess, [c, s], area)
}

pub fn mean_curvature(grad: [f64; 2], hess: Hessian) -> f64 {
    let [vx, vy] = grad;
    let q = 1.0 + vx * vx + vy * vy;
    ((1.0 + vx * vx) * hess.yy - 2.0 * vx * vy * hess.xy + (1.0 + vy * vy) * hess.xx)
        / (2.0 * q * q.sqrt())
}

pub fn gaussian_curvature(grad: [f64; 2], hess: Hessian) -> f64 {
    let q = 1.0 + grad[0] * grad[0] + grad[1] * grad[1];
    hess.det() / (q * q)
}

/// Rectangle-rule quadrature of `|κ_n|` over the direction set.
pub fn total_normal_curvature(grad: [f64; 2], hess: Hessian, dirs: &DirectionSet) -> f64 {
    let area = (1.0 + grad[0] * grad[0] + grad[1] * grad[1]).sqrt();
    let sum: f64 = dirs
        .tangents()
        .iter()
        .map(|&t| normal_curvature_along(grad, &hess, t, area).abs())
        .sum();
    dirs.weight() * sum
}

fn pointwise_map(v: &ScalarField, f: impl Fn([f64; 2], Hessian) -> f64) -> ScalarField {
    ScalarField::from_fn(v.spec(), |i, j| {
        f(central_gradient_at(v, i, j), discrete_hessian(v, i, j))
    })
}

pub fn mean_curvature_map(v: &ScalarField) -> ScalarField {
    pointwise_map(v, mean_curvature)
}

pub fn gaussian_curvature_map(v: &ScalarField) -> ScalarField {
    pointwise_map(v, gaussian_curvature)
}

pub fn normal_curvature_map(v: &ScalarField, theta: f64) -> ScalarField {
    pointwise_map(v, |g, h| normal_curvature(g, h, theta))
}

pub fn tnc_map(v: &ScalarField, dirs: &DirectionSet) -> ScalarField {
    pointwise_map(v, |g, h| total_normal_curvature(g, h, dirs))
}

/// Affine map of `[min, max]` onto `[0, 1]`; a flat field maps to zero.
pub fn display_normalize(v: &ScalarField) -> ScalarField {
    let (lo, hi) = v.min_max();
    let span = hi - lo;
    if span > 0.0 {
        v.map(|x| (x - lo) / span)
    } else {
        ScalarField::zeros(v.spec())
    }
}
