use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ussl_core::kernel::{
    approx_relative_error, big_f, big_f0, denoiser_f, gauss_expect, psi, psi_series, Epsilon, QuadratureRule,
};
use ussl_core::overlap::{
    qu_from_qv, residual, sensitivity_ratio, solve_approx, solve_certainty, solve_overlaps, EpsilonMixture,
    ProblemParams, SolverOptions,
};
use ussl_core::risk::{bayes_risk, labeled_needed, usefulness};

fn eps(v: f64) -> Epsilon {
    Epsilon::new(v).unwrap()
}

/// Plain Monte Carlo mean and standard error of `g(q + √q Z)`.
fn mc_mean<G: Fn(f64) -> f64>(g: G, q: f64, samples: usize, seed: u64) -> (f64, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut s, mut s2) = (0.0, 0.0);
    for _ in 0..samples {
        let z: f64 = rng.sample(StandardNormal);
        let v = g(q + q.sqrt() * z);
        s += v;
        s2 += v * v;
    }
    let n = samples as f64;
    let mean = s / n;
    (mean, ((s2 / n - mean * mean) / n).sqrt())
}

proptest! {
    #[test]
    fn psi_ignores_the_sign_of_eps(e in -1.0f64..=1.0, t in -15.0f64..15.0) {
        prop_assert_eq!(psi(eps(e), t), psi(eps(-e), t));
    }

    #[test]
    fn psi_range_on_positive_axis(e in -1.0f64..=1.0, t in 0.0f64..30.0) {
        let v = psi(eps(e), t);
        prop_assert!(v >= e * e - 1e-15 && v <= 1.0 + 1e-15, "psi = {}", v);
    }

    #[test]
    fn denoiser_symmetry_and_range(e in -1.0f64..=1.0, t in -20.0f64..20.0) {
        let f = denoiser_f(eps(e), t);
        prop_assert!((-1.0..=1.0).contains(&f));
        prop_assert!((denoiser_f(eps(e), -t) + denoiser_f(eps(-e), t)).abs() < 1e-14);
    }

    #[test]
    fn denoiser_is_nondecreasing(e in -1.0f64..=1.0, t in -20.0f64..20.0, dt in 0.0f64..5.0) {
        prop_assert!(denoiser_f(eps(e), t + dt) >= denoiser_f(eps(e), t) - 1e-15);
    }

    #[test]
    fn qu_map_contracts_relative_changes(
        lambda in 0.01f64..10.0, c in 0.05f64..20.0, q_v in 0.01f64..1.0, frac in -0.9f64..0.9,
    ) {
        let moved = (q_v * (1.0 + frac)).min(1.0);
        let delta = moved - q_v;
        let (ru, rv) = sensitivity_ratio(lambda, c, q_v, delta).unwrap();
        prop_assert!(ru <= rv * (1.0 + 1e-12) + 1e-15, "ru = {} rv = {}", ru, rv);
    }

    #[test]
    fn labeled_needed_scales_linearly(eta in 0.01f64..0.5, kappa in 0.86f64..1.0, n in 1u64..100_000) {
        let one = labeled_needed(eta, kappa, n).unwrap();
        let twice = labeled_needed(eta, kappa, 2 * n).unwrap();
        prop_assert!((twice - 2.0 * one).abs() <= 1e-9 * twice);
        let half_eta = labeled_needed(eta / 2.0, kappa, n).unwrap();
        prop_assert!((one - 2.0 * half_eta).abs() <= 1e-9 * one);
        prop_assert!(one <= n as f64 * (1.0 + 1e-12));
        if kappa < 0.995 {
            prop_assert!(labeled_needed(eta, kappa + 0.005, n).unwrap() < one);
        }
    }
}

#[test]
fn psi_series_matches_closed_form_on_grid() {
    for e in [0.0, 0.3, -0.3, 0.7, -0.7, 0.95, -0.95] {
        let e2: f64 = e * e;
        // smallest k with (ε²)^k < 1e-12
        let k_max = if e2 == 0.0 { 1 } else { ((1e-12f64).ln() / e2.ln()).ceil() as u32 + 1 };
        for i in 0..=200 {
            let t = -10.0 + 0.1 * i as f64;
            let series = psi_series(eps(e), t, k_max).unwrap();
            assert!((series - psi(eps(e), t)).abs() < 1e-10, "e={e} t={t}");
        }
    }
}

#[test]
fn gauss_expect_tanh_matches_monte_carlo() {
    let q = 0.7;
    let quad = gauss_expect(f64::tanh, q, QuadratureRule::standard()).unwrap();
    let (mean, se) = mc_mean(f64::tanh, q, 10_000_000, 17);
    assert!((quad - mean).abs() < 3.0 * se, "quad {quad} mc {mean} se {se}");
}

#[test]
fn big_f_quadrature_matches_monte_carlo_grid() {
    let mut seed = 100;
    for e in [0.0, 0.3, 0.6, 0.85, 0.99] {
        for q in [0.1, 0.5, 1.5, 4.0, 10.0] {
            let (mean, se) = mc_mean(|t| psi(eps(e), t), q, 1_000_000, seed);
            seed += 1;
            let quad = big_f(eps(e), q);
            assert!((quad - mean).abs() < 3.0 * se, "e={e} q={q}: quad {quad} mc {mean} se {se}");
        }
    }
}

#[test]
fn big_f_saturates_like_monte_carlo() {
    let (mean, se) = mc_mean(f64::tanh, 100.0, 200_000, 5);
    assert!((big_f0(100.0) - mean).abs() < 3.0 * se + 1e-12);
    assert!(1.0 - big_f0(100.0) < 1e-3);
}

#[test]
fn big_f_nondecreasing_in_q() {
    for e in [0.0, 0.2, 0.5, 0.8, 0.97] {
        let mut prev = big_f(eps(e), 0.0);
        for i in 1..=400 {
            let cur = big_f(eps(e), 0.05 * i as f64);
            assert!(cur >= prev - 1e-12, "e={e} at step {i}");
            prev = cur;
        }
    }
}

#[test]
fn unlabeled_overlap_stays_below_its_snr() {
    // F(q) < q for q > 0 is what makes λ²c <= 1 subcritical without labels
    for i in 1..=2000 {
        let q = 0.005 * i as f64;
        let (mc, se) = if i % 400 == 0 { mc_mean(f64::tanh, q, 200_000, i) } else { (big_f0(q), 0.0) };
        assert!(mc < q - 3.0 * se, "q = {q}: F = {mc}");
    }
}

#[test]
fn approximation_error_bound_and_shape() {
    let mut worst: f64 = 0.0;
    for ie in 0..=100 {
        let e = ie as f64 / 100.0;
        let mut row = Vec::with_capacity(100);
        for iq in 1..=100 {
            let q = iq as f64 / 10.0;
            let r = approx_relative_error(eps(e), q);
            worst = worst.max(r);
            row.push(r);
        }
        if ie == 0 || ie == 100 {
            assert!(row.iter().all(|&r| r == 0.0), "nonzero error at |eps| = {e}");
        } else {
            // the error dies off toward the large-q edge of the grid
            let peak = row.iter().cloned().fold(0.0, f64::max);
            assert!(row[99] < 0.5 * peak + 1e-12, "e={e} tail {} peak {peak}", row[99]);
        }
    }
    assert!(worst <= 0.08, "worst = {worst}");
    assert!(worst > 0.07, "worst = {worst}");
}

#[test]
fn converged_solutions_resubstitute() {
    let opts = SolverOptions::default();
    let mixtures = [
        EpsilonMixture::certainty(0.1).unwrap(),
        EpsilonMixture::single(eps(0.6)),
        EpsilonMixture::new(vec![(eps(0.9), 0.2), (eps(-0.4), 0.3), (Epsilon::ZERO, 0.5)]).unwrap(),
    ];
    for lambda in [0.25, 1.0, 3.0] {
        for c in [0.5, 2.0, 10.0] {
            for m in &mixtures {
                let p = ProblemParams::new(lambda, c, m.clone()).unwrap();
                let s = solve_overlaps(&p, &opts).unwrap();
                assert!(s.converged);
                assert!(residual(&p, s.q_u, s.q_v) < opts.tol);
                assert!(s.q_v >= m.mean_squared() - 1e-12);
                assert!(s.q_u >= 0.0 && s.q_u <= lambda);
            }
        }
    }
}

/// Direct iteration of `q_v = η + (1 - η) F(q_u)` without the mixture path.
fn certainty_direct(lambda: f64, c: f64, eta: f64) -> (f64, f64) {
    let mut q_v = 1.0;
    for _ in 0..100_000 {
        let q_u = qu_from_qv(lambda, c, q_v);
        let next = eta + (1.0 - eta) * big_f0(q_u);
        if (next - q_v).abs() < 1e-13 {
            q_v = next;
            break;
        }
        q_v = 0.5 * (q_v + next);
    }
    (qu_from_qv(lambda, c, q_v), q_v)
}

#[test]
fn mixture_solver_contains_certainty_system() {
    let opts = SolverOptions::default();
    for lambda in [0.25, 1.0, 2.0, 4.0] {
        for c in [0.5, 1.0, 5.0] {
            for eta in [0.2, 0.5, 1.0] {
                let s = solve_certainty(lambda, c, eta, &opts).unwrap();
                let (qu, qv) = certainty_direct(lambda, c, eta);
                assert!((s.q_u - qu).abs() < 1e-9 && (s.q_v - qv).abs() < 1e-9);
            }
        }
    }
    let two_atoms = ProblemParams::new(2.0, 1.0, EpsilonMixture::certainty(0.2).unwrap()).unwrap();
    let a = solve_overlaps(&two_atoms, &opts).unwrap();
    let b = solve_certainty(2.0, 1.0, 0.2, &opts).unwrap();
    assert!((a.q_u - b.q_u).abs() < 1e-9 && (a.q_v - b.q_v).abs() < 1e-9);
}

#[test]
fn overlap_grows_with_resources() {
    let opts = SolverOptions::default();
    let grid_l = [0.25, 0.5, 1.0, 2.0];
    let grid_c = [0.5, 1.0, 2.0, 5.0];
    let grid_e = [0.05, 0.2, 0.5, 0.9];
    let solve = |l, c, e| solve_certainty(l, c, e, &opts).unwrap().q_u;
    for (i, &l) in grid_l.iter().enumerate() {
        for (j, &c) in grid_c.iter().enumerate() {
            for (k, &e) in grid_e.iter().enumerate() {
                let base = solve(l, c, e);
                if i + 1 < grid_l.len() {
                    assert!(solve(grid_l[i + 1], c, e) >= base - 1e-12);
                }
                if j + 1 < grid_c.len() {
                    assert!(solve(l, grid_c[j + 1], e) >= base - 1e-12);
                }
                if k + 1 < grid_e.len() {
                    assert!(solve(l, c, grid_e[k + 1]) >= base - 1e-12);
                }
            }
        }
    }
}

#[test]
fn settings_with_equal_mean_square_confidence_agree() {
    let opts = SolverOptions::default();
    let mixtures = [
        EpsilonMixture::certainty(0.2).unwrap(),
        EpsilonMixture::single(eps(0.2f64.sqrt())),
        EpsilonMixture::new(vec![(eps(0.5), 0.8), (Epsilon::ZERO, 0.2)]).unwrap(),
        EpsilonMixture::new(vec![(eps(-0.8), 0.3125), (Epsilon::ZERO, 0.6875)]).unwrap(),
    ];
    for lambda in [0.5, 1.0, 2.0, 4.0] {
        for c in [0.5, 1.0, 2.0, 5.0] {
            let approx: Vec<f64> = mixtures
                .iter()
                .map(|m| {
                    let p = ProblemParams::new(lambda, c, m.clone()).unwrap();
                    bayes_risk(solve_approx(&p, &opts).unwrap().q_u).unwrap()
                })
                .collect();
            let exact: Vec<f64> = mixtures
                .iter()
                .map(|m| {
                    let p = ProblemParams::new(lambda, c, m.clone()).unwrap();
                    bayes_risk(solve_overlaps(&p, &opts).unwrap().q_u).unwrap()
                })
                .collect();
            for a in &approx {
                assert!((a - approx[0]).abs() < 1e-9);
            }
            let spread =
                exact.iter().cloned().fold(f64::MIN, f64::max) - exact.iter().cloned().fold(f64::MAX, f64::min);
            assert!(spread <= 0.02, "lambda={lambda} c={c} spread={spread}");
        }
    }
}

#[test]
fn usefulness_falls_as_risk_rises() {
    let mut points: Vec<(f64, f64)> = (0..=200)
        .map(|i| {
            let q = 25.0 * (i as f64 / 200.0).powi(2);
            (bayes_risk(q).unwrap(), usefulness(q).unwrap())
        })
        .collect();
    points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    for w in points.windows(2) {
        assert!(w[1].1 <= w[0].1 + 1e-12);
    }
    assert_eq!(points.last().unwrap(), &(0.5, 0.0));
}
