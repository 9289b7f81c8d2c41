//! Image quality measures and convergence diagnostics.

use crate::error::{ensure_positive, Error, Result};
use crate::grid::ScalarField;

/// `10 log10(peak² / MSE)`; `+∞` for identical images.
pub fn psnr(u: &ScalarField, reference: &ScalarField, peak: f64) -> Result<f64> {
    ensure_positive("peak", peak)?;
    let mse = mean_squared_error(u, reference)?;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

pub fn mean_squared_error(u: &ScalarField, reference: &ScalarField) -> Result<f64> {
    let d = u.zip_map(reference, |a, b| a - b)?;
    Ok(d.values().iter().map(|x| x * x).sum::<f64>() / d.spec().len() as f64)
}

/// Unnormalized `Σ |u - reference|`.
pub fn l1_error(u: &ScalarField, reference: &ScalarField) -> Result<f64> {
    let d = u.zip_map(reference, |a, b| (a - b).abs())?;
    Ok(d.sum())
}

pub fn linf_error(u: &ScalarField, reference: &ScalarField) -> Result<f64> {
    let d = u.zip_map(reference, |a, b| a - b)?;
    Ok(d.max_abs())
}

/// `‖next - prev‖₂ / ‖next‖₂`. Errors when `next` is identically zero.
pub fn relative_change(next: &ScalarField, prev: &ScalarField) -> Result<f64> {
    let d = next.zip_map(prev, |a, b| a - b)?;
    let denom = next.norm_l2();
    if denom == 0.0 {
        return Err(Error::DegenerateIterate("relative change of a zero iterate"));
    }
    Ok(d.norm_l2() / denom)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SsimParams {
    /// Odd window side length.
    pub window: usize,
    pub sigma: f64,
    pub k1: f64,
    pub k2: f64,
    /// Dynamic range.
    pub range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        Self {
            window: 11,
            sigma: 1.5,
            k1: 0.01,
            k2: 0.03,
            range: 1.0,
        }
    }
}

fn gaussian_kernel(window: usize, sigma: f64) -> Vec<f64> {
    let r = (window / 2) as f64;
    let mut k: Vec<f64> = (0..window)
        .map(|i| {
            let x = i as f64 - r;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    k
}

/// Separable Gaussian blur with periodic wrap.
fn blur(v: &ScalarField, kernel: &[f64]) -> ScalarField {
    let r = (kernel.len() / 2) as isize;
    let tmp = ScalarField::from_fn(v.spec(), |i, j| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, w)| w * v.at(i as isize, j as isize + k as isize - r))
            .sum()
    });
    ScalarField::from_fn(v.spec(), |i, j| {
        kernel
            .iter()
            .enumerate()
            .map(|(k, w)| w * tmp.at(i as isize + k as isize - r, j as isize))
            .sum()
    })
}

/// Mean structural similarity with a Gaussian window. The window wraps
/// around the borders, matching the periodic setting of the solver.
pub fn ssim(u: &ScalarField, reference: &ScalarField, params: &SsimParams) -> Result<f64> {
    u.spec().check_same(&reference.spec())?;
    if params.window == 0 || params.window.is_multiple_of(2) {
        return Err(Error::InvalidParameter {
            name: "window",
            value: params.window as f64,
            reason: "must be odd",
        });
    }
    ensure_positive("sigma", params.sigma)?;
    ensure_positive("range", params.range)?;
    let kernel = gaussian_kernel(params.window, params.sigma);
    let c1 = (params.k1 * params.range).powi(2);
    let c2 = (params.k2 * params.range).powi(2);

    let mu_x = blur(u, &kernel);
    let mu_y = blur(reference, &kernel);
    let xx = blur(&u.map(|a| a * a), &kernel);
    let yy = blur(&reference.map(|a| a * a), &kernel);
    let xy = blur(&u.zip_map(reference, |a, b| a * b)?, &kernel);

    let mut total = 0.0;
    for i in 0..u.spec().rows() {
        for j in 0..u.spec().cols() {
            let (mx, my) = (mu_x.get(i, j), mu_y.get(i, j));
            let sx = xx.get(i, j) - mx * mx;
            let sy = yy.get(i, j) - my * my;
            let sxy = xy.get(i, j) - mx * my;
            total += ((2.0 * mx * my + c1) * (2.0 * sxy + c2))
                / ((mx * mx + my * my + c1) * (sx + sy + c2));
        }
    }
    Ok(total / u.spec().len() as f64)
}
