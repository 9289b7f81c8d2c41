use proptest::prelude::*;
use tnc_core::curvature::{
    gaussian_curvature, mean_curvature, normal_curvature, total_normal_curvature, DirectionSet,
};
use tnc_core::grid::{
    div, grad, grad_vec, hessian_field, laplacian, Axis, GridSpec, Hessian, ScalarField, Scheme,
    VectorField,
};
use tnc_core::metrics::{l1_error, linf_error, psnr, ssim, SsimParams};
use tnc_core::solver::{fixed_point_pixel, shrink_vector, FixedPointParams};
use tnc_core::spectral::{PeriodicSolver, SpectralSymbol};
use tnc_core::synth::add_gaussian_noise;

fn field_strategy() -> impl Strategy<Value = ScalarField> {
    (3usize..10, 3usize..10, prop_oneof![Just(1.0), Just(0.5), Just(0.25)]).prop_flat_map(
        |(m, n, h)| {
            prop::collection::vec(-1.0f64..1.0, m * n).prop_map(move |v| {
                ScalarField::from_vec(GridSpec::new(m, n, h).unwrap(), v).unwrap()
            })
        },
    )
}

fn like(f: &ScalarField, offset: usize) -> ScalarField {
    ScalarField::from_fn(f.spec(), |i, j| {
        (((i * 31 + j * 17 + offset) as f64) * 0.618).sin()
    })
}

fn like_vec(f: &ScalarField, offset: usize) -> VectorField {
    VectorField::new(like(f, offset), like(f, offset + 101)).unwrap()
}

fn close(a: &ScalarField, b: &ScalarField, tol: f64) -> bool {
    a.zip_map(b, |x, y| x - y).unwrap().max_abs() <= tol
}

fn hessian_strategy() -> impl Strategy<Value = ([f64; 2], Hessian)> {
    (
        -3.0f64..3.0,
        -3.0f64..3.0,
        -5.0f64..5.0,
        -5.0f64..5.0,
        -5.0f64..5.0,
    )
        .prop_map(|(vx, vy, xx, yy, xy)| ([vx, vy], Hessian { xx, yy, xy }))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gradient_and_divergence_are_negative_adjoints(v in field_strategy()) {
        let q = like_vec(&v, 3);
        let scale = v.spec().len() as f64 / v.spec().h();
        for (g, d) in [(Scheme::Forward, Scheme::Backward), (Scheme::Backward, Scheme::Forward)] {
            let lhs = grad(&v, g).dot(&q).unwrap();
            let rhs = -v.dot(&div(&q, d)).unwrap();
            prop_assert!((lhs - rhs).abs() <= 1e-12 * scale, "{lhs} vs {rhs}");
        }
    }

    #[test]
    fn operators_are_linear(v in field_strategy(), a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let w = like(&v, 7);
        let combo = v.zip_map(&w, |x, y| a * x + b * y).unwrap();
        let tol = 1e-12 / (v.spec().h() * v.spec().h());
        for scheme in [Scheme::Forward, Scheme::Backward] {
            for axis in [Axis::First, Axis::Second] {
                let lhs = tnc_core::grid::diff(&combo, axis, scheme);
                let rhs = tnc_core::grid::diff(&v, axis, scheme)
                    .zip_map(&tnc_core::grid::diff(&w, axis, scheme), |x, y| a * x + b * y)
                    .unwrap();
                prop_assert!(close(&lhs, &rhs, tol));
            }
        }
        let lhs = laplacian(&combo);
        let rhs = laplacian(&v).zip_map(&laplacian(&w), |x, y| a * x + b * y).unwrap();
        prop_assert!(close(&lhs, &rhs, tol * 4.0));
        let hl = hessian_field(&combo);
        let (hv, hw) = (hessian_field(&v), hessian_field(&w));
        for r in 0..2 {
            for c in 0..2 {
                let rhs = hv.entry(r, c).zip_map(hw.entry(r, c), |x, y| a * x + b * y).unwrap();
                prop_assert!(close(hl.entry(r, c), &rhs, tol * 4.0));
            }
        }
    }

    #[test]
    fn operators_commute_with_cyclic_shifts(v in field_strategy(), di in -4isize..4, dj in -4isize..4) {
        let s = v.shifted(di, dj);
        for scheme in [Scheme::Forward, Scheme::Backward] {
            let g = grad(&s, scheme);
            let g0 = grad(&v, scheme);
            prop_assert_eq!(g.first(), &g0.first().shifted(di, dj));
            prop_assert_eq!(g.second(), &g0.second().shifted(di, dj));
        }
        prop_assert_eq!(laplacian(&s), laplacian(&v).shifted(di, dj));
        let h = hessian_field(&s);
        prop_assert_eq!(h.entry(0, 1), &hessian_field(&v).entry(0, 1).shifted(di, dj));
    }

    #[test]
    fn divergence_of_gradient_is_laplacian(v in field_strategy()) {
        let tol = 1e-12 / (v.spec().h() * v.spec().h());
        prop_assert!(close(&div(&grad(&v, Scheme::Forward), Scheme::Backward), &laplacian(&v), tol * 8.0));
        prop_assert!(close(&div(&grad(&v, Scheme::Backward), Scheme::Forward), &laplacian(&v), tol * 8.0));
    }

    #[test]
    fn grad_vec_rows_are_component_gradients(v in field_strategy()) {
        let q = VectorField::new(v.clone(), like(&v, 5)).unwrap();
        let t = grad_vec(&q, Scheme::Backward);
        prop_assert_eq!(t.row(0), grad(&v, Scheme::Backward));
        prop_assert_eq!(t.row(1), grad(q.second(), Scheme::Backward));
    }

    #[test]
    fn spectral_solve_inverts_stencil(
        v in field_strategy(),
        k0 in 1e-3f64..10.0,
        k1 in 0.0f64..5.0,
    ) {
        let symbol = SpectralSymbol::new(v.spec(), k0, k1).unwrap();
        let x = PeriodicSolver::new(v.spec()).solve(&v, &symbol).unwrap();
        let back = symbol.apply_operator(&x).unwrap();
        let rel = back.zip_map(&v, |a, b| a - b).unwrap().max_abs() / v.max_abs().max(1e-300);
        prop_assert!(rel <= 1e-10, "relative residual {rel}");
    }

    #[test]
    fn spectral_solve_is_linear(v in field_strategy(), a in -3.0f64..3.0) {
        let symbol = SpectralSymbol::new(v.spec(), 0.2, 1.0).unwrap();
        let solver = PeriodicSolver::new(v.spec());
        let lhs = solver.solve(&v.map(|x| a * x), &symbol).unwrap();
        let rhs = solver.solve(&v, &symbol).unwrap().map(|x| a * x);
        prop_assert!(close(&lhs, &rhs, 1e-11 * (1.0 + a.abs()) * 10.0));
    }

    #[test]
    fn normal_curvature_is_pi_periodic((g, h) in hessian_strategy(), theta in 0.0f64..6.3) {
        let a = normal_curvature(g, h, theta);
        let b = normal_curvature(g, h, theta + std::f64::consts::PI);
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a.abs()));
    }

    #[test]
    fn mean_and_gaussian_are_bracketed_by_normal_extremes((g, h) in hessian_strategy()) {
        let n = 7200;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..n {
            let t = std::f64::consts::PI * k as f64 / n as f64;
            let kn = normal_curvature(g, h, t);
            lo = lo.min(kn);
            hi = hi.max(kn);
        }
        let km = mean_curvature(g, h);
        let kg = gaussian_curvature(g, h);
        let scale = 1.0 + lo.abs().max(hi.abs());
        prop_assert!(km >= lo - 1e-9 * scale && km <= hi + 1e-9 * scale);
        prop_assert!((km - 0.5 * (lo + hi)).abs() <= 1e-4 * scale, "{km} vs {}", 0.5 * (lo + hi));
        prop_assert!((kg - lo * hi).abs() <= 1e-4 * scale * scale, "{kg} vs {}", lo * hi);
    }

    #[test]
    fn total_normal_curvature_is_even_and_nonnegative((g, h) in hessian_strategy()) {
        let dirs = DirectionSet::default();
        let t = total_normal_curvature(g, h, &dirs);
        let neg = Hessian { xx: -h.xx, yy: -h.yy, xy: -h.xy };
        prop_assert!(t >= 0.0);
        prop_assert!((t - total_normal_curvature([-g[0], -g[1]], neg, &dirs)).abs() <= 1e-12 * (1.0 + t));
    }

    #[test]
    fn shrinkage_is_nonexpansive(
        p in prop::array::uniform2(-5.0f64..5.0),
        q in prop::array::uniform2(-5.0f64..5.0),
        t in 0.0f64..3.0,
    ) {
        let (sp, sq) = (shrink_vector(p, t), shrink_vector(q, t));
        prop_assert!(sp[0].hypot(sp[1]) <= p[0].hypot(p[1]) + 1e-15);
        let d_out = (sp[0] - sq[0]).hypot(sp[1] - sq[1]);
        let d_in = (p[0] - q[0]).hypot(p[1] - q[1]);
        prop_assert!(d_out <= d_in + 1e-12);
    }

    #[test]
    fn fixed_point_output_solves_the_pixel_equation(
        p in prop::array::uniform2(-1.5f64..1.5),
        hxx in -2.0f64..2.0, hxy in -2.0f64..2.0, hyy in -2.0f64..2.0,
        step in 0.0f64..0.05,
    ) {
        let dirs = DirectionSet::default();
        let params = FixedPointParams { step, rho1: 0.8, tol: 1e-12, max_iter: 500 };
        let hess = [hxx, hxy, hxy, hyy];
        let out = fixed_point_pixel(p, hess, &dirs, &params);
        prop_assert!(out.converged);
        let q = out.q;
        let mut r = [q[0] - p[0], q[1] - p[1]];
        for k in 0..8 {
            let th = std::f64::consts::PI * k as f64 / 4.0;
            let (c, s) = (th.cos(), th.sin());
            let bend = (hxx * c * c + 2.0 * hxy * c * s + hyy * s * s).abs();
            let qt = q[0] * c + q[1] * s;
            let f = bend * qt / (1.0 + qt * qt).powi(2);
            r[0] -= step * std::f64::consts::FRAC_PI_4 * f * c;
            r[1] -= step * std::f64::consts::FRAC_PI_4 * f * s;
        }
        prop_assert!(r[0].abs().max(r[1].abs()) <= 1e-10);
    }

    #[test]
    fn metrics_are_invariant_under_joint_shifts(v in field_strategy(), di in -3isize..3, dj in -3isize..3) {
        let w = like(&v, 11).map(|x| 0.5 * x);
        let (vs, ws) = (v.shifted(di, dj), w.shifted(di, dj));
        let params = SsimParams { window: 3, sigma: 0.8, ..Default::default() };
        prop_assert!((psnr(&v, &w, 1.0).unwrap() - psnr(&vs, &ws, 1.0).unwrap()).abs() <= 1e-9);
        prop_assert!((l1_error(&v, &w).unwrap() - l1_error(&vs, &ws).unwrap()).abs() <= 1e-9);
        prop_assert_eq!(linf_error(&v, &w).unwrap(), linf_error(&vs, &ws).unwrap());
        prop_assert!((ssim(&v, &w, &params).unwrap() - ssim(&vs, &ws, &params).unwrap()).abs() <= 1e-9);
    }

    #[test]
    fn metrics_are_symmetric(v in field_strategy()) {
        let w = like(&v, 13);
        let params = SsimParams { window: 3, sigma: 0.8, ..Default::default() };
        prop_assert_eq!(psnr(&v, &w, 1.0).unwrap(), psnr(&w, &v, 1.0).unwrap());
        prop_assert!((ssim(&v, &w, &params).unwrap() - ssim(&w, &v, &params).unwrap()).abs() <= 1e-12);
        let s = ssim(&v, &w, &params).unwrap();
        prop_assert!(s <= 1.0 + 1e-12);
    }

    #[test]
    fn noise_is_reproducible(v in field_strategy(), seed in any::<u64>(), sigma in 0.0f64..0.5) {
        let a = add_gaussian_noise(&v, sigma, seed).unwrap();
        let b = add_gaussian_noise(&v, sigma, seed).unwrap();
        prop_assert_eq!(a, b);
    }
}

#[test]
fn trace_of_second_gradient_is_laplacian() {
    let spec = GridSpec::unit(6, 5).unwrap();
    let v = ScalarField::from_fn(spec, |i, j| ((i * 3 + j * 7) as f64 * 0.37).cos());
    let t = grad_vec(&grad(&v, Scheme::Forward), Scheme::Backward);
    let expected = laplacian(&v);
    let trace = t.entry(0, 0).zip_map(t.entry(1, 1), |a, b| a + b).unwrap();
    assert!(close(&trace, &expected, 1e-12));
}
