use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use soliton_lab::riccati::{solve_riccati_literal_case3, RiccatiBranch};
use soliton_lab::{
    blowup_time, integrate, reduce, residual_closed_form, solve_riccati, CaseTag,
    CoefficientConvention, FlatSolitonState, IntegrateOptions,
};

fn uniform(a: f64, b: f64, count: usize) -> Vec<f64> {
    (0..count)
        .map(|i| a + (b - a) * i as f64 / (count - 1) as f64)
        .collect()
}

/// Interior window of the domain, capped at ±`cap` around `t0`.
fn window(domain: (f64, f64), t0: f64, frac: f64, cap: f64) -> (f64, f64) {
    let lo = t0 + frac * (domain.0 - t0).max(-cap);
    let hi = t0 + frac * (domain.1 - t0).min(cap);
    (lo, hi)
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn fitted_branches_solve_the_riccati_equation(
        l0 in -3.0f64..3.0,
        c in -4.0f64..4.0,
        t0 in -2.0f64..2.0,
    ) {
        let br = RiccatiBranch::fit(l0, c, t0).unwrap();
        prop_assert!((br.l(t0) - l0).abs() <= 1e-12 * l0.abs().max(1.0));
        let (lo, hi) = window(br.domain(t0), t0, 0.9, 5.0);
        for t in uniform(lo, hi, 200) {
            let l = br.l(t);
            let scale = (l * l).max(c.abs()).max(1.0);
            prop_assert!((br.l_prime(t) - l * l - c).abs() <= 1e-12 * scale, "t={} l={}", t, l);
        }
    }

    #[test]
    fn reduction_invariants(u0 in -2.0f64..2.0, u in prop::collection::vec(-2.0f64..2.0, 2..6)) {
        let red = reduce(&FlatSolitonState::new(0.0, u0, u.clone()));
        prop_assert!(red.b() >= 0.0);
        prop_assert_eq!(red.c(), red.b() * red.h0() * red.h0() - red.l0() * red.l0());
        prop_assert_eq!(red.b() == 0.0, u.iter().all(|&x| x == 0.0));
        prop_assert_eq!(red.case_tag(), CaseTag::of(red.c()));
    }

    #[test]
    fn closed_forms_pass_the_residual_oracle(
        u0 in -2.0f64..2.0,
        u in prop::collection::vec(-2.0f64..2.0, 2..6),
    ) {
        let s = FlatSolitonState::new(0.0, u0, u);
        let red = reduce(&s);
        let sol = solve_riccati(&red, 0.0).unwrap();
        let (lo, hi) = window(sol.domain, 0.0, 0.9, 5.0);
        let grid = uniform(lo, hi, 1000);
        let peak = grid.iter().map(|&t| sol.l(t).powi(2).max(red.b() * sol.h(t).powi(2))).fold(1.0, f64::max);
        let r = residual_closed_form(&sol, &red, &grid).unwrap();
        prop_assert!(r.max() <= 1e-12 * peak, "{:?} peak {}", r, peak);
        // The closed form reproduces the initial state.
        let back = sol.state(0.0);
        prop_assert!((back.u0 - s.u0).abs() <= 1e-13 * s.max_abs().max(1.0));
    }
}

#[test]
fn reciprocal_closed_form_matches_one_over_t() {
    // b is a perfect square so C = 0 exactly.
    for (u, sign) in [(vec![3.0, 4.0], 1.0), (vec![3.0, 4.0], -1.0), (vec![1.0, 2.0, 2.0], 1.0)] {
        let a: f64 = u.iter().sum();
        let b: f64 = u.iter().map(|x: &f64| x * x).sum();
        let s = FlatSolitonState::new(0.0, a + sign * b.sqrt(), u);
        let red = reduce(&s);
        assert_eq!(red.case_tag(), CaseTag::CZero);
        let sol = solve_riccati(&red, 0.0).unwrap();
        let RiccatiBranch::Reciprocal { c1 } = sol.branch else {
            panic!("expected the reciprocal branch, got {:?}", sol.branch);
        };
        let (lo, hi) = window(sol.domain, 0.0, 0.9, 10.0);
        for t in uniform(lo, hi, 101) {
            let expect_h = -sign / (b.sqrt() * (t + c1));
            assert!((sol.h(t) - expect_h).abs() <= 1e-14 * expect_h.abs().max(1.0));
            assert!((sol.l(t) + 1.0 / (t + c1)).abs() <= 1e-14 * sol.l(t).abs().max(1.0));
        }
    }
}

#[test]
fn tangent_poles() {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let sol = solve_riccati(&reduce(&FlatSolitonState::new(0.0, 0.0, vec![r, -r])), 0.0).unwrap();
    assert_eq!(sol.branch, RiccatiBranch::Tangent { d: 1.0, d1: 0.0 });
    let half_pi = std::f64::consts::FRAC_PI_2;
    assert!((blowup_time(&sol, 1).unwrap() - half_pi).abs() < 1e-15);
    assert!((blowup_time(&sol, -1).unwrap() + half_pi).abs() < 1e-15);
}

#[test]
fn literal_negative_c_form_fails_the_oracle() {
    let s = FlatSolitonState::new(0.0, 0.0, vec![1.0, 1.0]);
    let red = reduce(&s);
    let literal = solve_riccati_literal_case3(&red, 0.0).unwrap();
    let (lo, hi) = window(literal.domain, 0.0, 0.9, 3.0);
    let r = residual_closed_form(&literal, &red, &uniform(lo, hi, 1000)).unwrap();
    assert!(r.max() > 0.1, "{r:?}");
    let fitted = solve_riccati(&red, 0.0).unwrap();
    let (lo, hi) = window(fitted.domain, 0.0, 0.9, 3.0);
    let r = residual_closed_form(&fitted, &red, &uniform(lo, hi, 1000)).unwrap();
    assert!(r.max() <= 1e-12, "{r:?}");
}

#[test]
fn negative_c_branch_selection() {
    // Only the coth and constant branches are reachable from real states.
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..200 {
        let u: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let s = FlatSolitonState::new(0.0, rng.gen_range(-3.0..3.0), u);
        let red = reduce(&s);
        if red.c() < 0.0 {
            let sol = solve_riccati(&red, 0.0).unwrap();
            assert!(matches!(sol.branch, RiccatiBranch::Coth { .. }), "{:?}", sol.branch);
            assert!(red.l0().abs() > (-red.c()).sqrt());
        }
    }
}

#[test]
fn degenerate_b_zero_is_constant() {
    let s = FlatSolitonState::new(0.0, 1.5, vec![0.0, 0.0]);
    let red = reduce(&s);
    assert_eq!(red.b(), 0.0);
    let sol = solve_riccati(&red, 0.0).unwrap();
    assert_eq!(sol.branch, RiccatiBranch::Constant { value: 1.5 });
    assert_eq!(sol.domain, (f64::NEG_INFINITY, f64::INFINITY));
    assert_eq!(blowup_time(&sol, 1), None);
    assert_eq!(sol.u0(7.0), 1.5);
    let p = sol.profile(uniform(-1.0, 1.0, 11), &[1.0, 1.0], 0.0).unwrap();
    assert!((p.f[10] - 1.5).abs() < 1e-15);
}

fn steady_trajectories(seed: u64, count: usize) -> Vec<(FlatSolitonState, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(3..7);
            let u: Vec<f64> = (0..n - 1).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (FlatSolitonState::new(0.0, rng.gen_range(-1.0..1.0), u), n)
        })
        .collect()
}

#[test]
fn algebraic_constraint_and_sign_along_numeric_trajectories() {
    for (s, n) in steady_trajectories(31, 40) {
        let red = reduce(&s);
        let j = (0..n - 1)
            .max_by(|&x, &y| s.u[x].abs().total_cmp(&s.u[y].abs()))
            .unwrap();
        let opts = IntegrateOptions {
            blowup_threshold: 1e3,
            ..Default::default()
        };
        for end in [5.0, -5.0] {
            let tr = integrate(&s, 0.0, n, CoefficientConvention::Corrected, end, &opts).unwrap();
            for x in tr.states() {
                let h = x.u[j] / red.a()[j];
                let l = x.u0 - red.a_sum() * h;
                let scale = (l * l).max(1.0);
                assert!((red.b() * h * h - l * l - red.c()).abs() <= 1e-8 * scale);
                assert!(h > 0.0, "h changed sign at t={}", x.t);
            }
        }
    }
}

#[test]
fn numeric_poles_match_analytic() {
    for (s, n) in steady_trajectories(41, 40) {
        let sol = solve_riccati(&reduce(&s), 0.0).unwrap();
        for dir in [1, -1] {
            let Some(pole) = blowup_time(&sol, dir) else {
                continue;
            };
            let tr = integrate(
                &s,
                0.0,
                n,
                CoefficientConvention::Corrected,
                pole + dir as f64,
                &IntegrateOptions::default(),
            )
            .unwrap();
            let est = tr.blowup_estimate().expect("blow-up expected");
            assert!((est - pole).abs() < 1e-6, "{est} vs {pole}");
        }
    }
}
