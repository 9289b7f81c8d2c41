//! Operator-splitting minimizer for the TNC + TV + fidelity energy.
//!
//! One outer iteration maps `(pⁿ, Hⁿ)` to `(pⁿ⁺¹, Hⁿ⁺¹)` through four
//! fractional steps:
//!
//! 1. curvature step: a relaxed fixed-point solve for `p` followed by a
//!    per-pixel ADMM solve for `H`;
//! 2. TV step: vector soft-thresholding of `p`;
//! 3. consistency step: a periodic elliptic solve pulling `(p, H)` back
//!    towards `H = ∇⁻p`;
//! 4. fidelity step: a periodic elliptic solve for `u` with `p = ∇⁺u`.
//!
//! All loops are sequential and run in a fixed order, so a given input and
//! configuration always produce bitwise-identical output.

use std::time::Instant;

use nalgebra::{Matrix4, Vector4};
use serde::{Deserialize, Serialize};

use crate::curvature::DirectionSet;
use crate::error::{ensure_nonnegative, ensure_positive, Error, Result};
use crate::grid::{
    discrete_hessian, div, grad, grad_vec, GridSpec, ScalarField, Scheme, TensorField, VectorField,
};
use crate::metrics::relative_change;
use crate::spectral::{build_symbol_a, build_symbol_b, build_symbol_c, PeriodicSolver, SpectralSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InitMode {
    /// `p₀ = ∇⁺f`, `H₀ = ∇⁻p₀`.
    Direct,
    /// Same, with `f` replaced by the solution of `u - ε Δu = f`.
    Smoothed,
}

impl std::str::FromStr for InitMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "direct" => Ok(Self::Direct),
            "smoothed" => Ok(Self::Smoothed),
            other => Err(format!("unknown init mode `{other}` (expected direct|smoothed)")),
        }
    }
}

/// Model and algorithm parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Curvature weight.
    pub alpha: f64,
    /// TV weight.
    pub beta: f64,
    /// Fidelity weight.
    pub gamma: f64,
    /// Evolution speed of `p`.
    pub eta: f64,
    /// Time step.
    pub tau: f64,
    /// Fixed-point relaxation, in `(0, 1]`.
    pub rho1: f64,
    /// ADMM penalty.
    pub rho2: f64,
    pub fp_tol: f64,
    pub fp_max_iter: usize,
    pub admm_tol: f64,
    /// ADMM iterations per outer step.
    pub i_max: usize,
    /// Quadrature directions; must be even for the solver.
    pub n_dirs: usize,
    /// Outer stopping tolerance on the relative change of `u`.
    pub stop_eps: f64,
    pub max_outer: usize,
    pub init_mode: InitMode,
    pub init_epsilon: f64,
    /// Evaluate the energy every `energy_stride` iterations (and always on
    /// the last one). Skipped entries are recorded as NaN.
    pub energy_stride: usize,
    /// Divergence applied to the rows of `H` on the right-hand side of the
    /// `p^{n+3/4}` solve. `Forward` is the adjoint of the backward
    /// gradient used for `H^{n+3/4}`.
    pub hessian_divergence: Scheme,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            alpha: 0.1,
            beta: 0.4,
            gamma: 10.0,
            eta: 1.0,
            tau: 0.01,
            rho1: 0.8,
            rho2: 0.5,
            fp_tol: 1e-5,
            fp_max_iter: 500,
            admm_tol: 1e-5,
            i_max: 1,
            n_dirs: 8,
            stop_eps: 1e-5,
            max_outer: 2000,
            init_mode: InitMode::Direct,
            init_epsilon: 0.1,
            energy_stride: 1,
            hessian_divergence: Scheme::Forward,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        ensure_nonnegative("alpha", self.alpha)?;
        ensure_nonnegative("beta", self.beta)?;
        ensure_positive("gamma", self.gamma)?;
        ensure_positive("eta", self.eta)?;
        ensure_positive("tau", self.tau)?;
        ensure_positive("rho1", self.rho1)?;
        if self.rho1 > 1.0 {
            return Err(Error::InvalidParameter {
                name: "rho1",
                value: self.rho1,
                reason: "must lie in (0, 1]",
            });
        }
        ensure_positive("rho2", self.rho2)?;
        ensure_positive("fp_tol", self.fp_tol)?;
        ensure_positive("admm_tol", self.admm_tol)?;
        ensure_positive("stop_eps", self.stop_eps)?;
        ensure_positive("init_epsilon", self.init_epsilon)?;
        let counts = [
            ("fp_max_iter", self.fp_max_iter),
            ("i_max", self.i_max),
            ("max_outer", self.max_outer),
            ("energy_stride", self.energy_stride),
            ("n_dirs", self.n_dirs),
        ];
        for (name, value) in counts {
            if value == 0 {
                return Err(Error::InvalidParameter {
                    name,
                    value: 0.0,
                    reason: "must be at least 1",
                });
            }
        }
        if !self.n_dirs.is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "n_dirs",
                value: self.n_dirs as f64,
                reason: "must be even",
            });
        }
        Ok(())
    }
}

/// Per-pixel ADMM multipliers, one per reduced direction.
#[derive(Clone, Debug, PartialEq)]
pub struct Multipliers {
    spec: GridSpec,
    per_pixel: usize,
    values: Vec<f64>,
}

impl Multipliers {
    pub fn zeros(spec: GridSpec, per_pixel: usize) -> Self {
        Self {
            spec,
            per_pixel,
            values: vec![0.0; spec.len() * per_pixel],
        }
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn per_pixel(&self) -> usize {
        self.per_pixel
    }

    pub fn get(&self, i: usize, j: usize) -> &[f64] {
        let k = (i * self.spec.cols() + j) * self.per_pixel;
        &self.values[k..k + self.per_pixel]
    }

    fn get_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let k = (i * self.spec.cols() + j) * self.per_pixel;
        &mut self.values[k..k + self.per_pixel]
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Evolving iterates of the splitting loop.
#[derive(Clone, Debug)]
pub struct SolverState {
    pub u: ScalarField,
    pub p: VectorField,
    pub h: TensorField,
    pub lambda: Multipliers,
    pub iter: usize,
    /// Energy of the starting image `u⁰ = f`.
    pub initial_energy: f64,
    pub energy_history: Vec<f64>,
    pub relerr_history: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub iter: usize,
    /// NaN when skipped by `energy_stride`.
    pub energy: f64,
    pub relative_change: f64,
    /// Largest per-pixel fixed-point iteration count.
    pub fp_iters: usize,
    /// Pixels whose fixed-point iteration hit the cap; their last iterate
    /// was kept.
    pub fp_unconverged: usize,
    /// Seconds since the start of the run.
    pub wall_time: f64,
}

#[derive(Clone, Debug)]
pub struct SolverOutput {
    pub u: ScalarField,
    pub reports: Vec<IterationReport>,
    pub state: SolverState,
    pub converged: bool,
}

/// Outcome of the fixed-point iteration at one pixel.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointPixel {
    pub q: [f64; 2],
    pub iters: usize,
    /// `‖q^{k+1} - q^k‖∞` of the last update.
    pub last_step: f64,
    pub converged: bool,
}

impl FixedPointPixel {
    pub fn into_result(self) -> Result<[f64; 2]> {
        if self.converged {
            Ok(self.q)
        } else {
            Err(Error::FixedPointStalled {
                iters: self.iters,
                last_step: self.last_step,
            })
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedPointParams {
    /// `τ α / η`.
    pub step: f64,
    pub rho1: f64,
    pub tol: f64,
    pub max_iter: usize,
}

/// Relaxed fixed-point solve of
/// `η (q - pⁿ) - τα ∫ |tᵀHt| (q·t) t / (1 + (q·t)²)² dθ = 0`
/// with the rectangle rule over `dirs`. `hess` is `[H11, H12, H21, H22]`.
pub fn fixed_point_pixel(
    p_n: [f64; 2],
    hess: [f64; 4],
    dirs: &DirectionSet,
    params: &FixedPointParams,
) -> FixedPointPixel {
    // |tᵀ H t| does not depend on q.
    let mut bend = [0.0; 64];
    let bend: &mut [f64] = if dirs.len() <= bend.len() {
        &mut bend[..dirs.len()]
    } else {
        return fixed_point_pixel_alloc(p_n, hess, dirs, params);
    };
    for (b, a) in bend.iter_mut().zip(dirs.rows()) {
        *b = (a[0] * hess[0] + a[1] * hess[1] + a[2] * hess[2] + a[3] * hess[3]).abs();
    }
    fixed_point_core(p_n, bend, dirs, params)
}

fn fixed_point_pixel_alloc(
    p_n: [f64; 2],
    hess: [f64; 4],
    dirs: &DirectionSet,
    params: &FixedPointParams,
) -> FixedPointPixel {
    let bend: Vec<f64> = dirs
        .rows()
        .iter()
        .map(|a| (a[0] * hess[0] + a[1] * hess[1] + a[2] * hess[2] + a[3] * hess[3]).abs())
        .collect();
    fixed_point_core(p_n, &bend, dirs, params)
}

fn fixed_point_core(
    p_n: [f64; 2],
    bend: &[f64],
    dirs: &DirectionSet,
    params: &FixedPointParams,
) -> FixedPointPixel {
    let scale = params.step * dirs.weight();
    let rho = params.rho1;
    let mut q = p_n;
    let mut last_step = f64::INFINITY;
    for k in 1..=params.max_iter {
        let mut force = [0.0, 0.0];
        for (&b, t) in bend.iter().zip(dirs.tangents()) {
            let s = q[0] * t[0] + q[1] * t[1];
            let d = 1.0 + s * s;
            let c = b * s / (d * d);
            force[0] += c * t[0];
            force[1] += c * t[1];
        }
        let target = [p_n[0] + scale * force[0], p_n[1] + scale * force[1]];
        let next = [
            (1.0 - rho) * q[0] + rho * target[0],
            (1.0 - rho) * q[1] + rho * target[1],
        ];
        last_step = (next[0] - q[0]).abs().max((next[1] - q[1]).abs());
        q = next;
        if last_step <= params.tol {
            return FixedPointPixel {
                q,
                iters: k,
                last_step,
                converged: true,
            };
        }
    }
    FixedPointPixel {
        q,
        iters: params.max_iter,
        last_step,
        converged: false,
    }
}

/// Soft-thresholding of a vector's magnitude: `max(0, 1 - t/|p|) p`.
#[inline]
pub fn shrink_vector(p: [f64; 2], threshold: f64) -> [f64; 2] {
    let norm = (p[0] * p[0] + p[1] * p[1]).sqrt();
    if norm <= threshold || norm == 0.0 {
        [0.0, 0.0]
    } else {
        let s = 1.0 - threshold / norm;
        [s * p[0], s * p[1]]
    }
}

/// Scalar soft-thresholding `max(|a| - b, 0) sign(a)`.
#[inline]
pub fn shrink_scalar(a: f64, b: f64) -> f64 {
    if a > b {
        a - b
    } else if a < -b {
        a + b
    } else {
        0.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AdmmPixel {
    /// `vec(H^{n+1/4}) = [H11, H12, H21, H22]`.
    pub w: [f64; 4],
    pub iters: usize,
    pub primal: f64,
    pub dual: f64,
}

/// ADMM for `min_w ½‖w - b‖² + Σ_ℓ c_ℓ |a_ℓ·w|` with the splitting
/// `u = A w`. The `(I + ρ AᵀA)⁻¹` factor is pixel independent and formed
/// once.
#[derive(Clone, Debug)]
pub struct AdmmKernel {
    rows: Vec<[f64; 4]>,
    w_solve: Matrix4<f64>,
    rho: f64,
    tol: f64,
    max_iter: usize,
}

impl AdmmKernel {
    pub fn new(dirs: &DirectionSet, rho: f64, tol: f64, max_iter: usize) -> Result<Self> {
        ensure_positive("rho2", rho)?;
        ensure_positive("admm_tol", tol)?;
        let rows = dirs.rows().to_vec();
        let mut normal = Matrix4::<f64>::identity();
        for a in &rows {
            let a = Vector4::from(*a);
            normal += rho * a * a.transpose();
        }
        let w_solve = normal
            .try_inverse()
            .expect("I + ρAᵀA is symmetric positive definite");
        Ok(Self {
            rows,
            w_solve,
            rho,
            tol,
            max_iter,
        })
    }

    pub fn directions(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    fn apply_a(&self, w: &Vector4<f64>, out: &mut [f64]) {
        for (o, a) in out.iter_mut().zip(&self.rows) {
            *o = a[0] * w[0] + a[1] * w[1] + a[2] * w[2] + a[3] * w[3];
        }
    }

    #[inline]
    fn apply_at(&self, v: &[f64]) -> Vector4<f64> {
        let mut out = Vector4::zeros();
        for (&x, a) in v.iter().zip(&self.rows) {
            out += Vector4::from(*a) * x;
        }
        out
    }

    /// Runs up to `max_iter` iterations from `w = b`, `u = A b` and the
    /// given multipliers, which are updated in place. `thresholds[ℓ]` is
    /// `c_ℓ` (the shrinkage uses `c_ℓ / ρ`).
    pub fn solve(&self, b: [f64; 4], thresholds: &[f64], lambda: &mut [f64]) -> AdmmPixel {
        let n = self.rows.len();
        assert_eq!(thresholds.len(), n, "one threshold per direction");
        assert_eq!(lambda.len(), n, "one multiplier per direction");
        let mut aw = [0.0; 64];
        let mut u = [0.0; 64];
        let mut u_next = [0.0; 64];
        let (aw, u, u_next) = (&mut aw[..n], &mut u[..n], &mut u_next[..n]);

        let bv = Vector4::from(b);
        let mut w = bv;
        self.apply_a(&w, u);
        let (mut primal, mut dual) = (f64::INFINITY, f64::INFINITY);
        let mut iters = 0;
        let mut rhs_u = [0.0; 64];
        for k in 1..=self.max_iter {
            iters = k;
            for l in 0..n {
                rhs_u[l] = self.rho * u[l] - lambda[l];
            }
            w = self.w_solve * (bv + self.apply_at(&rhs_u[..n]));
            self.apply_a(&w, aw);
            for l in 0..n {
                u_next[l] = shrink_scalar(aw[l] + lambda[l] / self.rho, thresholds[l] / self.rho);
            }
            let mut r2 = 0.0;
            for l in 0..n {
                let r = aw[l] - u_next[l];
                lambda[l] += self.rho * r;
                r2 += r * r;
                rhs_u[l] = u_next[l] - u[l];
            }
            primal = r2.sqrt();
            dual = (self.rho * self.apply_at(&rhs_u[..n])).norm();
            u.copy_from_slice(u_next);
            if primal <= self.tol && dual <= self.tol {
                break;
            }
        }
        AdmmPixel {
            w: [w[0], w[1], w[2], w[3]],
            iters,
            primal,
            dual,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FixedPointStats {
    pub max_iters: usize,
    pub unconverged: usize,
}

/// `p₀ = ∇⁺f`, `H₀ = ∇⁻p₀`.
pub fn initialize_direct(f: &ScalarField) -> (VectorField, TensorField) {
    let p0 = grad(f, Scheme::Forward);
    let h0 = grad_vec(&p0, Scheme::Backward);
    (p0, h0)
}

/// Solves `u₀ - ε Δ_h u₀ = f` spectrally, then initializes from `u₀`.
pub fn initialize_smoothed(
    f: &ScalarField,
    epsilon: f64,
) -> Result<(ScalarField, VectorField, TensorField)> {
    let c = build_symbol_c(f.spec(), epsilon)?;
    // The symbol carries an h² factor on both sides.
    let h2 = f.spec().h() * f.spec().h();
    let rhs = f.map(|x| x * h2);
    let u0 = PeriodicSolver::new(f.spec()).solve(&rhs, &c)?;
    let (p0, h0) = initialize_direct(&u0);
    Ok((u0, p0, h0))
}

/// Discrete energy: `(α/2) Σ (2π/N) Σ_ℓ |tᵀHt| / (1 + (∇⁺u·t)²)
/// + β Σ |∇⁺u| + (γ/2) Σ (f - u)²`, each pixel weighted by `h²`, with `H`
/// the central-difference Hessian of `u`.
pub fn energy(u: &ScalarField, f: &ScalarField, cfg: &SolverConfig, dirs: &DirectionSet) -> f64 {
    let spec = u.spec();
    let h2 = spec.h() * spec.h();
    let g = grad(u, Scheme::Forward);
    let wq = dirs.weight();
    let mut total = 0.0;
    for i in 0..spec.rows() {
        for j in 0..spec.cols() {
            let [gx, gy] = g.get(i, j);
            let mut curv = 0.0;
            if cfg.alpha != 0.0 {
                let hs = discrete_hessian(u, i, j);
                for t in dirs.tangents() {
                    let bend = hs.xx * t[0] * t[0] + 2.0 * hs.xy * t[0] * t[1] + hs.yy * t[1] * t[1];
                    let s = gx * t[0] + gy * t[1];
                    curv += bend.abs() / (1.0 + s * s);
                }
            }
            let d = f.get(i, j) - u.get(i, j);
            total += 0.5 * cfg.alpha * wq * curv
                + cfg.beta * (gx * gx + gy * gy).sqrt()
                + 0.5 * cfg.gamma * d * d;
        }
    }
    total * h2
}

/// The splitting solver for one grid and configuration.
#[derive(Clone, Debug)]
pub struct TncSolver {
    spec: GridSpec,
    cfg: SolverConfig,
    dirs: DirectionSet,
    admm: AdmmKernel,
    symbol_a: SpectralSymbol,
    symbol_b: SpectralSymbol,
    fft: PeriodicSolver,
}

impl TncSolver {
    pub fn new(spec: GridSpec, cfg: SolverConfig) -> Result<Self> {
        cfg.validate()?;
        let dirs = DirectionSet::new(cfg.n_dirs)?;
        let admm = AdmmKernel::new(&dirs.half_turn()?, cfg.rho2, cfg.admm_tol, cfg.i_max)?;
        Ok(Self {
            spec,
            symbol_a: build_symbol_a(spec, cfg.eta)?,
            symbol_b: build_symbol_b(spec, cfg.eta, cfg.gamma, cfg.tau)?,
            fft: PeriodicSolver::new(spec),
            cfg,
            dirs,
            admm,
        })
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn directions(&self) -> &DirectionSet {
        &self.dirs
    }

    pub fn symbol_a(&self) -> &SpectralSymbol {
        &self.symbol_a
    }

    pub fn symbol_b(&self) -> &SpectralSymbol {
        &self.symbol_b
    }

    /// `C = (2π/N) τ α`, i.e. `(π/4) τ α` for eight directions.
    pub fn admm_weight(&self) -> f64 {
        self.dirs.weight() * self.cfg.tau * self.cfg.alpha
    }

    pub fn fixed_point_params(&self) -> FixedPointParams {
        FixedPointParams {
            step: self.cfg.tau * self.cfg.alpha / self.cfg.eta,
            rho1: self.cfg.rho1,
            tol: self.cfg.fp_tol,
            max_iter: self.cfg.fp_max_iter,
        }
    }

    /// Fixed-point half of the curvature step. Pixels that hit the
    /// iteration cap keep their last iterate and are counted in the stats.
    pub fn step1_fixed_point(
        &self,
        p_n: &VectorField,
        h_n: &TensorField,
    ) -> Result<(VectorField, FixedPointStats)> {
        self.spec.check_same(&p_n.spec())?;
        self.spec.check_same(&h_n.spec())?;
        let params = self.fixed_point_params();
        let mut stats = FixedPointStats::default();
        let p = VectorField::from_fn(self.spec, |i, j| {
            let out = fixed_point_pixel(p_n.get(i, j), h_n.get(i, j), &self.dirs, &params);
            stats.max_iters = stats.max_iters.max(out.iters);
            if !out.converged {
                stats.unconverged += 1;
            }
            out.q
        });
        Ok((p, stats))
    }

    /// ADMM half of the curvature step.
    pub fn step1_admm(
        &self,
        h_n: &TensorField,
        p_quarter: &VectorField,
        lambda: &Multipliers,
    ) -> Result<(TensorField, Multipliers)> {
        self.spec.check_same(&h_n.spec())?;
        self.spec.check_same(&p_quarter.spec())?;
        self.spec.check_same(&lambda.spec())?;
        let n = self.admm.directions();
        if lambda.per_pixel() != n {
            return Err(Error::GridMismatch {
                left: format!("{n} multipliers per pixel"),
                right: format!("{} multipliers per pixel", lambda.per_pixel()),
            });
        }
        let c = self.admm_weight();
        let tangents = &self.dirs.tangents()[..n];
        let mut lambda = lambda.clone();
        let mut thresholds = vec![0.0; n];
        let h = TensorField::from_fn(self.spec, |i, j| {
            let [p1, p2] = p_quarter.get(i, j);
            for (th, t) in thresholds.iter_mut().zip(tangents) {
                let s = p1 * t[0] + p2 * t[1];
                *th = c / (1.0 + s * s);
            }
            self.admm
                .solve(h_n.get(i, j), &thresholds, lambda.get_mut(i, j))
                .w
        });
        Ok((h, lambda))
    }

    /// TV step: `p ← max(0, 1 - (τβ/η)/|p|) p`. `H` passes through unchanged.
    pub fn step2_shrink(&self, p_quarter: &VectorField) -> VectorField {
        let threshold = self.cfg.tau * self.cfg.beta / self.cfg.eta;
        if threshold == 0.0 {
            return p_quarter.clone();
        }
        VectorField::from_fn(p_quarter.spec(), |i, j| {
            shrink_vector(p_quarter.get(i, j), threshold)
        })
    }

    /// Solves `[η h² I - h² Δ_h] p_k = η h² p_k - h² div(H_k)` for each
    /// component, then sets `H = ∇⁻p`.
    pub fn step3_elliptic(
        &self,
        p_half: &VectorField,
        h_half: &TensorField,
    ) -> Result<(VectorField, TensorField)> {
        self.spec.check_same(&p_half.spec())?;
        self.spec.check_same(&h_half.spec())?;
        let h2 = self.spec.h() * self.spec.h();
        let eta = self.cfg.eta;
        let mut comps = Vec::with_capacity(2);
        for k in 0..2 {
            let div_row = div(&h_half.row(k), self.cfg.hessian_divergence);
            let g = p_half
                .component(k)
                .zip_map(&div_row, |p, d| eta * h2 * p - h2 * d)?;
            comps.push(self.fft.solve(&g, &self.symbol_a)?);
        }
        let second = comps.pop().expect("two components");
        let first = comps.pop().expect("two components");
        let p = VectorField::new(first, second)?;
        let h = grad_vec(&p, Scheme::Backward);
        Ok((p, h))
    }

    /// Solves `[γτ h² I - η h² Δ_h] u = γτ h² f - η h² div⁻p`, then sets
    /// `p = ∇⁺u`.
    pub fn step4_reconstruct(
        &self,
        p_tq: &VectorField,
        f: &ScalarField,
    ) -> Result<(ScalarField, VectorField)> {
        self.spec.check_same(&p_tq.spec())?;
        self.spec.check_same(&f.spec())?;
        let h2 = self.spec.h() * self.spec.h();
        let (gt, eta) = (self.cfg.gamma * self.cfg.tau, self.cfg.eta);
        let d = div(p_tq, Scheme::Backward);
        let g = f.zip_map(&d, |fv, dv| gt * h2 * fv - eta * h2 * dv)?;
        let u = self.fft.solve(&g, &self.symbol_b)?;
        let p = grad(&u, Scheme::Forward);
        Ok((u, p))
    }

    pub fn energy(&self, u: &ScalarField, f: &ScalarField) -> f64 {
        energy(u, f, &self.cfg, &self.dirs)
    }

    /// `u⁰ = f`, `(p⁰, H⁰)` from the configured initialization, zero
    /// multipliers.
    pub fn initial_state(&self, f: &ScalarField) -> Result<SolverState> {
        self.spec.check_same(&f.spec())?;
        if !f.is_finite() {
            return Err(Error::NonFinite("input image".into()));
        }
        let (p, h) = match self.cfg.init_mode {
            InitMode::Direct => initialize_direct(f),
            InitMode::Smoothed => {
                let (_, p, h) = initialize_smoothed(f, self.cfg.init_epsilon)?;
                (p, h)
            }
        };
        Ok(SolverState {
            u: f.clone(),
            p,
            h,
            lambda: Multipliers::zeros(self.spec, self.admm.directions()),
            iter: 0,
            initial_energy: self.energy(f, f),
            energy_history: Vec::new(),
            relerr_history: Vec::new(),
        })
    }

    /// One outer iteration. Returns the new iterate, the relative change
    /// and fixed-point stats; the state's `p`, `H` and multipliers are
    /// updated, `u` and the histories are left to the caller.
    fn advance(
        &self,
        state: &mut SolverState,
        f: &ScalarField,
    ) -> Result<(ScalarField, f64, FixedPointStats)> {
        let iter = state.iter + 1;
        let check = |ok: bool, step: &'static str| {
            if ok {
                Ok(())
            } else {
                Err(Error::SolverDiverged { step, iter })
            }
        };

        let mut stats = FixedPointStats::default();
        let (p, h) = if self.cfg.alpha > 0.0 {
            let (p, s) = self.step1_fixed_point(&state.p, &state.h)?;
            check(p.is_finite(), "fixed-point step")?;
            stats = s;
            let (h, lambda) = self.step1_admm(&state.h, &p, &state.lambda)?;
            check(h.is_finite() && lambda.is_finite(), "ADMM step")?;
            state.lambda = lambda;
            (p, h)
        } else {
            (state.p.clone(), state.h.clone())
        };

        let p = if self.cfg.beta > 0.0 {
            self.step2_shrink(&p)
        } else {
            p
        };

        let (p, h) = self.step3_elliptic(&p, &h)?;
        check(p.is_finite() && h.is_finite(), "elliptic step")?;

        let (u, p) = self.step4_reconstruct(&p, f)?;
        check(u.is_finite(), "reconstruction step")?;

        let change = match relative_change(&u, &state.u) {
            Ok(c) => c,
            Err(_) if state.u.max_abs() == 0.0 => 0.0,
            Err(e) => return Err(e),
        };
        state.p = p;
        state.h = h;
        Ok((u, change, stats))
    }

    /// Runs outer iterations until the relative change of `u` drops to
    /// `stop_eps` or `max_outer` is reached.
    pub fn run(&self, f: &ScalarField) -> Result<SolverOutput> {
        let start = Instant::now();
        let mut state = self.initial_state(f)?;
        let mut reports = Vec::new();
        let mut converged = false;
        while state.iter < self.cfg.max_outer {
            let (u, change, stats) = self.advance(&mut state, f)?;
            state.iter += 1;
            converged = change <= self.cfg.stop_eps;
            let last = converged || state.iter == self.cfg.max_outer;
            let energy = if last || state.iter % self.cfg.energy_stride == 0 {
                self.energy(&u, f)
            } else {
                f64::NAN
            };
            state.u = u;
            state.energy_history.push(energy);
            state.relerr_history.push(change);
            reports.push(IterationReport {
                iter: state.iter,
                energy,
                relative_change: change,
                fp_iters: stats.max_iters,
                fp_unconverged: stats.unconverged,
                wall_time: start.elapsed().as_secs_f64(),
            });
            if converged {
                break;
            }
        }
        Ok(SolverOutput {
            u: state.u.clone(),
            reports,
            state,
            converged,
        })
    }
}

/// Convenience wrapper: build a solver for `f`'s grid and run it.
pub fn run(f: &ScalarField, cfg: &SolverConfig) -> Result<SolverOutput> {
    TncSolver::new(f.spec(), cfg.clone())?.run(f)
}
