use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::identities::hamilton_monitor;
use soliton_lab::riccati::blowup_time;
use soliton_lab::{
    integrate, reconstruct, reduce, rhs, soliton_residual, solve_riccati, CoefficientConvention,
    FlatSolitonState, IntegrateOptions, Termination,
};

const CORRECTED: CoefficientConvention = CoefficientConvention::Corrected;
const AS_PRINTED: CoefficientConvention = CoefficientConvention::AsPrinted;

fn uniform(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

fn with_grid(grid: Vec<f64>) -> IntegrateOptions {
    IntegrateOptions {
        t_eval: Some(grid),
        ..Default::default()
    }
}

#[test]
fn time_reversal_returns_to_start() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let n = rng.gen_range(3..6);
        let lambda = [-1.0, 0.0, 1.0][rng.gen_range(0..3)];
        let u: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-0.3..0.3)).collect();
        let s = FlatSolitonState::new(0.0, rng.gen_range(-0.3..0.3), u);
        let opts = IntegrateOptions::default();
        let fwd = integrate(&s, lambda, n, CORRECTED, 1.0, &opts).unwrap();
        assert_eq!(fwd.termination(), Termination::ReachedEnd);
        let back = integrate(&fwd.last_state(), lambda, n, CORRECTED, 0.0, &opts).unwrap();
        let end = back.last_state();
        assert_eq!(end.t, 0.0);
        let tol = opts.tolerances.rel.max(opts.tolerances.abs);
        assert!((end.u0 - s.u0).abs() < 10.0 * tol, "{} vs {}", end.u0, s.u0);
        for (a, b) in end.u.iter().zip(&s.u) {
            assert!((a - b).abs() < 10.0 * tol, "{a} vs {b}");
        }
    }
}

#[test]
fn fixed_points_stay_put() {
    // Steady: u = 0 with any constant u₀.
    let s = FlatSolitonState::new(0.0, 2.5, vec![0.0; 3]);
    let tr = integrate(&s, 0.0, 4, CORRECTED, 1e3, &IntegrateOptions::default()).unwrap();
    assert_eq!(tr.termination(), Termination::ReachedEnd);
    assert!(tr.states().iter().all(|x| x.u0 == 2.5 && x.u.iter().all(|&v| v == 0.0)));

    // Hyperbolic space: uⱼ = 1, u₀ = 0 with λ = −(n−1).
    for n in 3..7 {
        let lambda = -((n - 1) as f64);
        let s = FlatSolitonState::new(0.0, 0.0, vec![1.0; n - 1]);
        let d = rhs(&s, lambda, n, CORRECTED).unwrap();
        assert!(d.u0.abs() < 1e-15 && d.u.iter().all(|v| v.abs() < 1e-15));
        let span = 100.0;
        let opts = IntegrateOptions::default();
        let tr = integrate(&s, lambda, n, CORRECTED, span, &opts).unwrap();
        let drift = tr
            .states()
            .iter()
            .map(|x| x.u.iter().map(|v| (v - 1.0).abs()).fold(x.u0.abs(), f64::max))
            .fold(0.0, f64::max);
        assert!(drift < opts.tolerances.abs * span, "n={n} drift={drift:e}");
    }
}

#[test]
fn conventions_coincide_without_lambda() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let n = rng.gen_range(3..7);
        let u: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = FlatSolitonState::new(0.0, rng.gen_range(-1.0..1.0), u);
        assert_eq!(rhs(&s, 0.0, n, CORRECTED).unwrap(), rhs(&s, 0.0, n, AS_PRINTED).unwrap());
        let opts = IntegrateOptions::default();
        let a = integrate(&s, 0.0, n, CORRECTED, 0.5, &opts).unwrap();
        let b = integrate(&s, 0.0, n, AS_PRINTED, 0.5, &opts).unwrap();
        assert_eq!(a.result, b.result);
    }
}

#[test]
fn conventions_differ_with_lambda() {
    let s = FlatSolitonState::new(0.0, 0.2, vec![0.1, -0.3]);
    let a = rhs(&s, 1.0, 3, CORRECTED).unwrap();
    let b = rhs(&s, 1.0, 3, AS_PRINTED).unwrap();
    assert_eq!(a.u, b.u);
    assert!((a.u0 - b.u0 - 1.0).abs() < 1e-15);
}

#[test]
fn coth_pole_matches_closed_form() {
    let s = FlatSolitonState::new(0.0, 0.0, vec![1.0, 1.0]);
    let sol = solve_riccati(&reduce(&s), 0.0).unwrap();
    let opts = IntegrateOptions::default();

    let back = integrate(&s, 0.0, 3, CORRECTED, -5.0, &opts).unwrap();
    assert_eq!(back.termination(), Termination::BlowUpDetected);
    let pole = blowup_time(&sol, -1).unwrap();
    let d = 2.0_f64.sqrt();
    let acoth = |x: f64| 0.5 * ((x + 1.0) / (x - 1.0)).ln();
    assert!((pole + acoth(d) / d).abs() < 1e-14);
    assert!((back.blowup_estimate().unwrap() - pole).abs() < 1e-6);

    // Forward, l climbs towards −D and the flow exists for all time.
    assert_eq!(blowup_time(&sol, 1), None);
    let fwd = integrate(&s, 0.0, 3, CORRECTED, 20.0, &opts).unwrap();
    assert_eq!(fwd.termination(), Termination::ReachedEnd);
}

#[test]
fn tangent_data_blows_up_both_ways() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut tested = 0;
    while tested < 20 {
        let n = rng.gen_range(3..6);
        let u: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = FlatSolitonState::new(0.0, rng.gen_range(-1.0..1.0), u);
        let red = reduce(&s);
        if red.c() <= 0.0 {
            continue;
        }
        tested += 1;
        let sol = solve_riccati(&red, 0.0).unwrap();
        let (lo, hi) = sol.domain;
        let opts = IntegrateOptions::default();
        let fwd = integrate(&s, 0.0, n, CORRECTED, hi + 1.0, &opts).unwrap();
        let back = integrate(&s, 0.0, n, CORRECTED, lo - 1.0, &opts).unwrap();
        for (tr, pole) in [(fwd, hi), (back, lo)] {
            assert_eq!(tr.termination(), Termination::BlowUpDetected);
            let est = tr.blowup_estimate().unwrap();
            assert!(lo <= est && est <= hi);
            assert!((est - pole).abs() < 1e-6, "{est} vs {pole}");
        }
    }
}

#[test]
fn reciprocal_case_matches_one_over_t() {
    // u = (1, 0): a = (1, 0), b = 1. u₀ = 2 gives l₀ = 1 and C = 0, so
    // l = −1/(t − 1) and u₁ = h = 1/(1 − t), with a forward pole at 1.
    let s = FlatSolitonState::new(0.0, 2.0, vec![1.0, 0.0]);
    let red = reduce(&s);
    assert_eq!(red.c(), 0.0);
    let grid = uniform(0.0, 0.9, 91);
    let tr = integrate(&s, 0.0, 3, CORRECTED, 0.9, &with_grid(grid)).unwrap();
    for x in tr.states() {
        let exact = 1.0 / (1.0 - x.t);
        assert!((x.u[0] - exact).abs() < 1e-9 * exact, "t={}", x.t);
        assert_eq!(x.u[1], 0.0);
        assert!((x.u0 - 2.0 * exact).abs() < 1e-9 * exact);
    }
    let tr = integrate(&s, 0.0, 3, CORRECTED, 2.0, &IntegrateOptions::default()).unwrap();
    assert!((tr.blowup_estimate().unwrap() - 1.0).abs() < 1e-6);

    // u₀ = 0: l₀ = −1, h = 1/(1 + t) and u₀ ≡ 0 on [0, ∞).
    let s = FlatSolitonState::new(0.0, 0.0, vec![1.0, 0.0]);
    let tr = integrate(&s, 0.0, 3, CORRECTED, 5.0, &with_grid(uniform(0.0, 5.0, 51))).unwrap();
    for x in tr.states() {
        assert!((x.u[0] - 1.0 / (1.0 + x.t)).abs() < 1e-10);
        assert!(x.u0.abs() < 1e-10);
    }
}

#[test]
fn reconstructed_metric_derivative_by_differences() {
    let s = FlatSolitonState::new(0.0, 0.4, vec![0.3, -0.5, 0.2]);
    let error = |dt: f64| {
        let count = (1.0 / dt).round() as usize + 1;
        let tr = integrate(&s, 1.0, 4, CORRECTED, 1.0, &with_grid(uniform(0.0, 1.0, count))).unwrap();
        let p = reconstruct(&tr, &[1.0, 2.0, 0.5], 0.0).unwrap();
        let mut e: f64 = 0.0;
        // Common interior times 0.2, 0.4, 0.6, 0.8.
        for j in 1..5 {
            let k = j * (count - 1) / 5;
            for i in 0..3 {
                let fd = (p.h[k + 1][i] - p.h[k - 1][i]) / (p.grid[k + 1] - p.grid[k - 1]);
                e = e.max((fd - p.h_prime[k][i]).abs());
            }
        }
        e
    };
    let (coarse, fine) = (error(0.02), error(0.01));
    assert!(coarse < 1e-2, "coarse {coarse:e}");
    let order = (coarse / fine).log2();
    assert!(order > 1.9, "order {order} ({coarse:e}, {fine:e})");
}

#[test]
fn reconstructed_profile_solves_soliton_equations() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..10 {
        let n = rng.gen_range(3..7);
        let lambda = [-1.0, 0.0, 1.0][rng.gen_range(0..3)];
        let u: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-0.5..0.5)).collect();
        let s = FlatSolitonState::new(0.0, rng.gen_range(-0.5..0.5), u);
        let opts = IntegrateOptions::default();
        let tr = integrate(&s, lambda, n, CORRECTED, 0.5, &opts).unwrap();
        let p = reconstruct(&tr, &vec![1.0; n - 1], 0.0).unwrap();
        let res = soliton_residual(&p).unwrap();
        assert!(res.max_abs < 10.0 * opts.tolerances.rel, "{res:?}");

        if lambda != 0.0 {
            // The as-printed system misses the normal equation by exactly λ.
            let tr = integrate(&s, lambda, n, AS_PRINTED, 0.5, &opts).unwrap();
            let res = soliton_residual(&reconstruct(&tr, &vec![1.0; n - 1], 0.0).unwrap()).unwrap();
            assert!((res.normal_eq - lambda.abs()).abs() < 1e-10);
        }
    }
}

#[test]
fn static_flat_profile_with_linear_potential() {
    let s = FlatSolitonState::new(0.0, 0.7, vec![0.0, 0.0]);
    let tr = integrate(&s, 0.0, 3, CORRECTED, 3.0, &IntegrateOptions::default()).unwrap();
    let res = soliton_residual(&reconstruct(&tr, &[1.0, 1.0], 0.0).unwrap()).unwrap();
    assert_eq!(res.max_abs, 0.0);
}

#[test]
fn tangent_closed_form_profile_residual() {
    let s = FlatSolitonState::new(0.0, 0.0, vec![1.0, -1.0]);
    let sol = solve_riccati(&reduce(&s), 0.0).unwrap();
    let (lo, hi) = sol.domain;
    let p = sol.profile(uniform(0.95 * lo, 0.95 * hi, 1000), &[1.0, 1.0], 0.0).unwrap();
    assert!(soliton_residual(&p).unwrap().max_abs <= 1e-10);
}

#[test]
fn hamilton_drift_separates_conventions() {
    let s = FlatSolitonState::new(0.0, 0.3, vec![0.4, -0.1]);
    let opts = IntegrateOptions::default();
    let corrected = integrate(&s, 1.0, 3, CORRECTED, 1.0, &opts).unwrap();
    let drift = hamilton_monitor(&reconstruct(&corrected, &[1.0, 1.0], 0.0).unwrap())
        .unwrap()
        .hamilton_drift
        .unwrap();
    assert!(drift < 1e-8, "corrected drift {drift:e}");

    let printed = integrate(&s, 1.0, 3, AS_PRINTED, 1.0, &opts).unwrap();
    let drift = hamilton_monitor(&reconstruct(&printed, &[1.0, 1.0], 0.0).unwrap())
        .unwrap()
        .hamilton_drift
        .unwrap();
    let states = printed.states();
    let integral: f64 = states
        .windows(2)
        .map(|w| {
            let g = |x: &FlatSolitonState| (x.u0 - x.mean_curvature()).abs();
            0.5 * (g(&w[0]) + g(&w[1])) * (w[1].t - w[0].t)
        })
        .sum();
    assert!(drift >= integral / 2.0, "drift {drift} vs {integral}");
}

#[test]
fn steady_quadratic_integral_is_conserved() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for _ in 0..20 {
        let n = rng.gen_range(3..7);
        let u: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = FlatSolitonState::new(0.0, rng.gen_range(-1.0..1.0), u);
        let q0 = s.quadratic_integral();
        assert!((q0 + reduce(&s).c()).abs() <= 1e-14);
        let opts = IntegrateOptions {
            blowup_threshold: 1e3,
            ..Default::default()
        };
        let tr = integrate(&s, 0.0, n, CORRECTED, 5.0, &opts).unwrap();
        for x in tr.states() {
            let q = x.quadratic_integral();
            assert!((q - q0).abs() <= 1e-8 * q0.abs().max(1.0), "{q} vs {q0}");
        }
    }
}

#[test]
fn steady_zero_components_stay_zero() {
    let s = FlatSolitonState::new(0.0, 0.5, vec![0.0, 0.8, -0.3]);
    let tr = integrate(&s, 0.0, 4, CORRECTED, 2.0, &IntegrateOptions::default()).unwrap();
    assert!(tr.states().iter().all(|x| x.u[0] == 0.0));
}

#[test]
fn steady_numeric_u0_matches_closed_form() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..30 {
        let n = rng.gen_range(3..6);
        let u: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = FlatSolitonState::new(0.0, rng.gen_range(-1.0..1.0), u);
        let sol = solve_riccati(&reduce(&s), 0.0).unwrap();
        let (lo, hi) = sol.domain;
        let (lo, hi) = (lo.max(-10.0), hi.min(10.0));
        let (a, b) = (0.95 * lo, 0.95 * hi);
        for (end, grid) in [(b, uniform(0.0, b, 200)), (a, uniform(0.0, a, 200))] {
            let tr = integrate(&s, 0.0, n, CORRECTED, end, &with_grid(grid)).unwrap();
            assert_eq!(tr.termination(), Termination::ReachedEnd);
            for x in tr.states() {
                let exact = sol.u0(x.t);
                assert!((x.u0 - exact).abs() < 1e-6, "t={} {} vs {exact}", x.t, x.u0);
            }
        }
    }
}
