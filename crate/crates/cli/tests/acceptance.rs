//! Acceptance checks. Each criterion prints one PASS/FAIL line; the
//! process exits nonzero if any fails.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tnc_core::curvature::{
    gaussian_curvature, mean_curvature, normal_curvature, total_normal_curvature, DirectionSet,
};
use tnc_core::grid::{discrete_hessian, div, grad, GridSpec, Hessian, ScalarField, Scheme, VectorField};
use tnc_core::metrics::{linf_error, psnr, relative_change};
use tnc_core::solver::{fixed_point_pixel, initialize_direct, AdmmKernel, FixedPointParams, Multipliers};
use tnc_core::spectral::{build_symbol_a, build_symbol_b, build_symbol_c, PeriodicSolver};
use tnc_core::synth::{add_gaussian_noise, make_pattern};
use tnc_core::{PatternKind, PatternSpec, SolverConfig, TncSolver};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn random_field(spec: GridSpec, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> ScalarField {
    ScalarField::from_fn(spec, |_, _| rng.random_range(lo..hi))
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let spec = GridSpec::unit(16, 16).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let v = random_field(spec, &mut rng, -1.0, 1.0);
        let q = VectorField::new(random_field(spec, &mut rng, -1.0, 1.0), random_field(spec, &mut rng, -1.0, 1.0))
            .unwrap();
        let g = grad(&v, Scheme::Forward);
        let lhs = g.first().dot(q.first()).unwrap() + g.second().dot(q.second()).unwrap();
        let rhs = -v.dot(&div(&q, Scheme::Backward)).unwrap();
        worst = worst.max((lhs - rhs).abs());
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-12, || format!("max |<grad v, q> + <v, div q>| = {worst:e}"))?;
    ensure(secs < 1.0, || format!("took {secs:.2} s"))?;
    Ok(format!("max error {worst:.1e} over 50 instances, {secs:.3} s"))
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    let mut worst = 0.0f64;
    for n in [8, 16, 60] {
        let spec = GridSpec::unit(n, n).unwrap();
        let solver = PeriodicSolver::new(spec);
        let cfg = SolverConfig::default();
        let symbols = [
            build_symbol_a(spec, cfg.eta).unwrap(),
            build_symbol_b(spec, cfg.eta, cfg.gamma, cfg.tau).unwrap(),
            build_symbol_c(spec, cfg.init_epsilon).unwrap(),
        ];
        for symbol in &symbols {
            for _ in 0..20 {
                let rhs = random_field(spec, &mut rng, -1.0, 1.0);
                let u = solver.solve(&rhs, symbol).unwrap();
                let back = symbol.apply_operator(&u).unwrap();
                let r = back.zip_map(&rhs, |a, b| a - b).unwrap().norm_l2() / rhs.norm_l2();
                worst = worst.max(r);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(worst <= 1e-10, || format!("relative residual {worst:e}"))?;
    ensure(secs < 5.0, || format!("took {secs:.2} s"))?;
    Ok(format!("max relative residual {worst:.1e} over 180 solves, {secs:.3} s"))
}

/// `rows` as displayed: the first index runs along a displayed row.
fn displayed(rows: [[f64; 3]; 3]) -> ScalarField {
    ScalarField::from_fn(GridSpec::unit(3, 3).unwrap(), |i, j| rows[j][i])
}

fn criterion_3() -> Outcome {
    let a = discrete_hessian(&displayed([[0.0, 1.0, 1.0]; 3]), 1, 1);
    ensure((a.xx, a.yy, a.xy, a.det()) == (-1.0, 0.0, 0.0, 0.0), || format!("pattern (a): {a:?}"))?;
    let c = discrete_hessian(&displayed([[0.0, 0.0, 0.5], [0.0, 0.5, 1.0], [0.5, 1.0, 1.0]]), 1, 1);
    ensure((c.xx, c.yy, c.xy, c.det()) == (0.0, 0.0, 0.0, 0.0), || format!("pattern (c): {c:?}"))?;
    let b = discrete_hessian(&displayed([[0.0, 0.0, 1.0], [0.0, 1.0, 1.0], [1.0, 1.0, 1.0]]), 1, 1);
    ensure((b.xx, b.yy, b.xy) == (-1.0, -1.0, -0.25), || format!("pattern (b): {b:?}"))?;
    ensure((b.xx, b.yy, b.det()) != (0.0, 0.0, -1.0 / 16.0), || "pattern (b) matches the printed table".into())?;
    Ok(format!(
        "(a), (c) exact; (b) gives vxx = vyy = -1, vxy = -1/4, det = {} (table prints 0, 0, -1/4, -1/16)",
        b.det()
    ))
}

fn criterion_4() -> Outcome {
    let dirs = DirectionSet::new(8).unwrap();
    let zero = Hessian { xx: 0.0, yy: 0.0, xy: 0.0 };
    let mut rng = ChaCha8Rng::seed_from_u64(104);
    for _ in 0..20 {
        let g = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let th = rng.random_range(0.0..2.0 * PI);
        let vals = [
            normal_curvature(g, zero, th),
            mean_curvature(g, zero),
            gaussian_curvature(g, zero),
            total_normal_curvature(g, zero, &dirs),
        ];
        ensure(vals.iter().all(|v| *v == 0.0), || format!("plane with gradient {g:?}: {vals:?}"))?;
    }
    let unit = Hessian { xx: 1.0, yy: 1.0, xy: 0.0 };
    for k in 0..64 {
        let th = k as f64 * 2.0 * PI / 64.0;
        let kn = normal_curvature([0.0, 0.0], unit, th);
        ensure((kn - 1.0).abs() <= 1e-12, || format!("unit Hessian kappa_n({th}) = {kn}"))?;
    }
    let km = mean_curvature([0.0, 0.0], unit);
    let kg = gaussian_curvature([0.0, 0.0], unit);
    let kt = total_normal_curvature([0.0, 0.0], unit, &dirs);
    ensure((km - 1.0).abs() <= 1e-12 && (kg - 1.0).abs() <= 1e-12, || format!("mean {km}, gaussian {kg}"))?;
    ensure((kt - 2.0 * PI).abs() <= 1e-12, || format!("total normal curvature {kt}"))?;
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let g = [rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0)];
        let h = Hessian {
            xx: rng.random_range(-5.0..5.0),
            yy: rng.random_range(-5.0..5.0),
            xy: rng.random_range(-5.0..5.0),
        };
        let th = rng.random_range(0.0..2.0 * PI);
        worst = worst.max((normal_curvature(g, h, th) - normal_curvature(g, h, th + PI)).abs());
    }
    ensure(worst <= 1e-12, || format!("periodicity error {worst:e}"))?;
    Ok(format!("identities exact, periodicity error {worst:.1e} on 100 inputs"))
}

/// `η(q - p) - τα Σ_ℓ (2π/N) |tᵀHt| (q·t) t / (1 + (q·t)²)²`, infinity norm.
fn pixel_residual(q: [f64; 2], p: [f64; 2], h: [f64; 4], eta: f64, tau_alpha: f64, n: usize) -> f64 {
    let mut r = [eta * (q[0] - p[0]), eta * (q[1] - p[1])];
    for l in 0..n {
        let th = 2.0 * PI * l as f64 / n as f64;
        let t = [th.cos(), th.sin()];
        let tht = t[0] * (h[0] * t[0] + h[1] * t[1]) + t[1] * (h[2] * t[0] + h[3] * t[1]);
        let qt = q[0] * t[0] + q[1] * t[1];
        let w = 2.0 * PI / n as f64 * tau_alpha * tht.abs() * qt / (1.0 + qt * qt).powi(2);
        r[0] -= w * t[0];
        r[1] -= w * t[1];
    }
    r[0].abs().max(r[1].abs())
}

fn criterion_5() -> Outcome {
    let dirs = DirectionSet::new(8).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let (mut worst, mut most_iters) = (0.0f64, 0usize);
    for _ in 0..1000 {
        let eta: f64 = rng.random_range(0.5..2.0);
        let ratio: f64 = rng.random_range(0.0..=0.05);
        let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let h: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let params = FixedPointParams { step: ratio, rho1: 0.8, tol: 1e-12, max_iter: 500 };
        let out = fixed_point_pixel(p, h, &dirs, &params);
        ensure(out.converged, || format!("no convergence for p {p:?}, H {h:?}, ratio {ratio}"))?;
        let r = pixel_residual(out.q, p, h, eta, ratio * eta, 8);
        worst = worst.max(r);
        most_iters = most_iters.max(out.iters);
    }
    ensure(worst <= 1e-6, || format!("residual {worst:e}"))?;
    Ok(format!("1000 instances, at most {most_iters} iterations, max residual {worst:.1e}"))
}

/// Minimizes `½‖w - b‖² + Σ c_ℓ |a_ℓ·w|` through its box-constrained dual
/// `min ½‖Aᵀλ - b‖², |λ_ℓ| ≤ c_ℓ`, by accelerated projected gradient.
fn prox_oracle(b: [f64; 4], rows: &[[f64; 4]], c: &[f64]) -> [f64; 4] {
    let n = rows.len();
    let at = |lam: &[f64]| {
        let mut v = [0.0; 4];
        for (a, l) in rows.iter().zip(lam) {
            for k in 0..4 {
                v[k] += a[k] * l;
            }
        }
        v
    };
    let step = 1.0 / n as f64;
    let mut lam = vec![0.0; n];
    let mut y = lam.clone();
    let mut t = 1.0f64;
    for _ in 0..200_000 {
        let atl = at(&y);
        let r: Vec<f64> = (0..4).map(|k| atl[k] - b[k]).collect();
        let next: Vec<f64> = (0..n)
            .map(|l| {
                let g: f64 = (0..4).map(|k| rows[l][k] * r[k]).sum();
                (y[l] - step * g).clamp(-c[l], c[l])
            })
            .collect();
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = (0..n).map(|l| next[l] + (t - 1.0) / t_next * (next[l] - lam[l])).collect();
        lam = next;
        t = t_next;
    }
    let atl = at(&lam);
    std::array::from_fn(|k| b[k] - atl[k])
}

fn criterion_6() -> Outcome {
    let half = DirectionSet::new(8).unwrap().half_turn().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rho: f64 = rng.random_range(0.25..2.0);
        let c = rho * rng.random_range(0.0..=0.5);
        let kernel = AdmmKernel::new(&half, rho, 1e-10, 500).unwrap();
        let b: [f64; 4] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let p = [rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)];
        let thresholds: Vec<f64> = half
            .tangents()
            .iter()
            .map(|t| {
                let s: f64 = p[0] * t[0] + p[1] * t[1];
                c / (1.0 + s * s)
            })
            .collect();
        let mut lambda = vec![0.0; thresholds.len()];
        let w = kernel.solve(b, &thresholds, &mut lambda).w;
        let oracle = prox_oracle(b, half.rows(), &thresholds);
        for k in 0..4 {
            worst = worst.max((w[k] - oracle[k]).abs());
        }
    }
    ensure(worst <= 1e-4, || format!("max coordinate difference {worst:e}"))?;
    Ok(format!("100 instances, max coordinate difference {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let clean = make_pattern(&PatternSpec::new(PatternKind::Square, 60, 60)).unwrap();
    let noisy = add_gaussian_noise(&clean, 10.0 / 255.0, 7).unwrap();
    let cfg = SolverConfig {
        alpha: 0.1,
        beta: 0.4,
        gamma: 10.0,
        tau: 0.01,
        eta: 1.0,
        rho1: 0.8,
        rho2: 0.5,
        i_max: 1,
        stop_eps: 1e-5,
        ..Default::default()
    };
    let start = Instant::now();
    let out = TncSolver::new(noisy.spec(), cfg).unwrap().run(&noisy).map_err(|e| e.to_string())?;
    let secs = start.elapsed().as_secs_f64();
    let iters = out.reports.len();
    let e0 = out.state.initial_energy;
    let e1 = *out.state.energy_history.last().unwrap();
    let (p_in, p_out) = (psnr(&noisy, &clean, 1.0).unwrap(), psnr(&out.u, &clean, 1.0).unwrap());
    let (l_in, l_out) = (linf_error(&noisy, &clean).unwrap(), linf_error(&out.u, &clean).unwrap());
    ensure(out.converged && iters <= 2000, || format!("{iters} iterations, converged {}", out.converged))?;
    ensure(e1 < e0, || format!("energy {e0} -> {e1}"))?;
    ensure(p_out >= p_in + 5.0, || format!("psnr {p_in:.2} -> {p_out:.2} dB"))?;
    ensure(l_out < l_in, || format!("linf {l_in:.4} -> {l_out:.4}"))?;
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "{iters} iterations, energy {e0:.2} -> {e1:.2}, psnr {p_in:.2} -> {p_out:.2} dB, linf {l_in:.3} -> {l_out:.3}, {secs:.2} s"
    ))
}

fn surfaces() -> Vec<(&'static str, ScalarField)> {
    let spec = GridSpec::unit(64, 64).unwrap();
    let sine = ScalarField::from_fn(spec, |i, j| {
        0.5 + 0.25 * (2.0 * PI * i as f64 / 64.0).sin() * (2.0 * PI * j as f64 / 64.0).cos()
    });
    let bump = ScalarField::from_fn(spec, |i, j| {
        let (x, y) = (i as f64 - 31.5, j as f64 - 31.5);
        let s = 64.0 / 6.0;
        0.2 + 0.6 * (-(x * x + y * y) / (2.0 * s * s)).exp()
    });
    vec![("sine", sine), ("bump", bump)]
}

fn criterion_8() -> Outcome {
    let cfg = SolverConfig { alpha: 0.1, beta: 0.4, gamma: 8.0, tau: 0.01, ..Default::default() };
    let mut lines = Vec::new();
    let mut failures = Vec::new();
    for (seed, (name, clean)) in surfaces().into_iter().enumerate() {
        let f = add_gaussian_noise(&clean, 1e-3, 800 + seed as u64).unwrap();
        let out = TncSolver::new(f.spec(), cfg.clone()).unwrap().run(&f).map_err(|e| e.to_string())?;
        let e = &out.state.energy_history;
        let r = &out.state.relerr_history;
        let from = e.len() / 2;
        let rise = e[from..].windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        let r_rise = r[from..].windows(2).map(|w| w[1] - w[0]).fold(f64::NEG_INFINITY, f64::max);
        lines.push(format!("{name}: {} iterations, max energy rise {rise:.1e}, max relerr rise {r_rise:.1e}", e.len()));
        if rise > 1e-8 {
            failures.push(format!("{name} energy rises by {rise:e} in its trailing half"));
        }
        if r_rise > 0.0 {
            failures.push(format!("{name} relative change rises by {r_rise:e} in its trailing half"));
        }
    }
    if failures.is_empty() {
        Ok(lines.join("; "))
    } else {
        Err(format!("{} ({})", failures.join("; "), lines.join("; ")))
    }
}

/// Outer loop assembled from the individual steps.
fn manual_run(f: &ScalarField, cfg: &SolverConfig, skip_curvature: bool, skip_tv: bool) -> ScalarField {
    let solver = TncSolver::new(f.spec(), cfg.clone()).unwrap();
    let (mut p, mut h) = initialize_direct(f);
    let mut lambda = Multipliers::zeros(f.spec(), 4);
    let mut u = f.clone();
    for _ in 0..cfg.max_outer {
        if !skip_curvature {
            let (q, _) = solver.step1_fixed_point(&p, &h).unwrap();
            let (hn, ln) = solver.step1_admm(&h, &q, &lambda).unwrap();
            p = q;
            h = hn;
            lambda = ln;
        }
        if !skip_tv {
            p = solver.step2_shrink(&p);
        }
        (p, h) = solver.step3_elliptic(&p, &h).unwrap();
        (u, p) = solver.step4_reconstruct(&p, f).unwrap();
    }
    u
}

fn criterion_9() -> Outcome {
    let clean = make_pattern(&PatternSpec::new(PatternKind::Rings, 32, 32)).unwrap();
    let f = add_gaussian_noise(&clean, 0.05, 9).unwrap();
    let base = SolverConfig { max_outer: 20, stop_eps: 1e-300, ..Default::default() };

    let no_curv = SolverConfig { alpha: 0.0, ..base.clone() };
    let run = TncSolver::new(f.spec(), no_curv.clone()).unwrap().run(&f).unwrap();
    ensure(run.u == manual_run(&f, &no_curv, true, false), || "alpha = 0 differs from TV splitting".into())?;

    let no_tv = SolverConfig { beta: 0.0, ..base.clone() };
    let run = TncSolver::new(f.spec(), no_tv.clone()).unwrap().run(&f).unwrap();
    ensure(run.u == manual_run(&f, &no_tv, false, true), || "beta = 0 differs from curvature splitting".into())?;

    let stiff = SolverConfig { gamma: 1e8, tau: 0.01, ..base };
    let run = TncSolver::new(f.spec(), stiff).unwrap().run(&f).unwrap();
    let rel = relative_change(&run.u, &f).unwrap();
    let rel = rel * run.u.norm_l2() / f.norm_l2();
    ensure(rel <= 1e-4, || format!("gamma tau = 1e6 gives |u - f| / |f| = {rel:e}"))?;
    Ok(format!("alpha = 0 and beta = 0 bitwise over 20 iterations; gamma tau = 1e6 gives {rel:.1e}"))
}

fn tnc(args: &[&str]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_tnc")).args(args).output().map_err(|e| e.to_string())?;
    if out.status.success() {
        Ok(())
    } else {
        Err(format!("{args:?}: {}", String::from_utf8_lossy(&out.stderr)))
    }
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let s = |p: &Path| p.to_str().unwrap().to_string();
    let first = dir.path().join("first");
    tnc(&[
        "denoise", "--pattern", "square", "--sigma", "0.0392", "--seed", "10", "--raw", "-q", "--out-dir",
        &s(&first),
    ])?;
    let manifest = first.join("manifest.json");
    let mut compared = 0;
    for k in 0..2 {
        let again = dir.path().join(format!("replay{k}"));
        tnc(&["denoise", "--manifest", &s(&manifest), "-q", "--out-dir", &s(&again)])?;
        for name in ["denoised.png", "denoised.raw"] {
            let a = std::fs::read(first.join(name)).map_err(|e| e.to_string())?;
            let b = std::fs::read(again.join(name)).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("replay {k}: {name} differs"))?;
            compared += 1;
        }
    }
    Ok(format!("{compared} replayed artifacts identical"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("operator adjointness", criterion_1),
        ("spectral solvers", criterion_2),
        ("second-derivative table", criterion_3),
        ("curvature identities", criterion_4),
        ("fixed-point certificate", criterion_5),
        ("ADMM oracle", criterion_6),
        ("square denoise", criterion_7),
        ("convergence shape", criterion_8),
        ("degenerate weights", criterion_9),
        ("manifest replay", criterion_10),
    ];
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for (n, (name, check)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {} {name}: PASS ({detail})", n + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({detail})", n + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
