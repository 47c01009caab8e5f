use constrained_erasure::asymptotics::{capacity_taylor, theta_max_taylor};
use constrained_erasure::capacity_opt::{
    maximize_theta, mutual_information, stochastic_approximation, GradientEstimator, SaConfig,
};
use constrained_erasure::constraint::ForbiddenWordSet;
use constrained_erasure::erasure::ErasureProcess;
use constrained_erasure::feedback::feedback_capacity;
use constrained_erasure::markov::{MarkovInput, RllThetaChain};
use constrained_erasure::mi_rate::{
    brute_force_h_y, h_y_given_past_exact, mi_rate_finite_n, series_first_order, series_mth_order,
};
use proptest::prelude::*;

/// Second-order chain on {1, 2} with every transition allowed.
fn order_two_chain(p: [f64; 4]) -> MarkovInput {
    let states = vec![vec![1, 1], vec![1, 2], vec![2, 1], vec![2, 2]];
    let kernel = p.iter().map(|&q| vec![q, 1.0 - q]).collect();
    MarkovInput::new(2, 2, states, kernel).unwrap()
}

fn erasure(markov: bool, eps: f64, mix: f64) -> ErasureProcess {
    if markov {
        ErasureProcess::markov_from_stay(1.0 - mix * eps, mix * (1.0 - eps)).unwrap()
    } else {
        ErasureProcess::iid(eps).unwrap()
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_entropy_matches_enumeration_for_order_two(
        p in prop::array::uniform4(0.1f64..0.9),
        eps in 0.05f64..0.95,
        mix in 0.2f64..1.0,
        markov in any::<bool>(),
        n in 0usize..=6,
    ) {
        let chain = order_two_chain(p);
        let e = erasure(markov, eps, mix);
        let a = h_y_given_past_exact(&chain, &e, n).unwrap();
        let b = brute_force_h_y(&chain, &e, n).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} vs {b}");
    }

    #[test]
    fn finite_window_decreases_to_series(
        p in prop::array::uniform4(0.1f64..0.9),
        eps in 0.05f64..0.6,
    ) {
        let chain = order_two_chain(p);
        let e = ErasureProcess::iid(eps).unwrap();
        let mut prev = f64::INFINITY;
        for n in [2, 6, 10, 12] {
            let r = mi_rate_finite_n(&chain, &e, n).unwrap();
            prop_assert!(r.value <= prev + 1e-12);
            prev = r.value;
        }
        let s = series_mth_order(&chain, &e, 12).unwrap();
        let w = mi_rate_finite_n(&chain, &e, 12).unwrap();
        prop_assert!((prev - s.value).abs() <= s.tail_bound + w.tail_bound + 1e-9);
    }

    #[test]
    fn information_rate_is_bounded(theta in 0.0f64..=1.0, eps in 0.0f64..0.99) {
        let i = mutual_information(theta, eps, 1e-12).unwrap();
        let c = RllThetaChain::new(theta).unwrap();
        prop_assert!(i >= (1.0 - eps) * c.step_conditional_entropy() - 1e-12);
        prop_assert!(i <= (1.0 - eps) * c.marginal_entropy() + 1e-12);
    }

    #[test]
    fn capacity_decreases_in_eps(a in 0.0f64..0.98, b in 0.0f64..0.98) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assume!(hi - lo > 1e-6);
        let c_lo = maximize_theta(lo, 1e-10).unwrap().capacity;
        let c_hi = maximize_theta(hi, 1e-10).unwrap().capacity;
        prop_assert!(c_hi < c_lo);
    }

    #[test]
    fn feedback_dominates_first_order(eps in 0.0f64..0.98) {
        let fb = feedback_capacity(eps).unwrap().c_fb;
        let c1 = maximize_theta(eps, 1e-10).unwrap().capacity;
        prop_assert!(fb >= c1 - 1e-12);
    }

    #[test]
    fn constraint_files_round_trip(
        k in 2usize..=4,
        words in prop::collection::vec(prop::collection::vec(1u8..=4, 2..=3), 1..4),
    ) {
        let words: Vec<Vec<u8>> = words
            .into_iter()
            .map(|w| w.into_iter().map(|a| (a - 1) % k as u8 + 1).collect())
            .collect();
        let set = ForbiddenWordSet::new(k, words).unwrap();
        let back = ForbiddenWordSet::from_file(&set.to_file()).unwrap();
        prop_assert_eq!(back.words(), set.words());
        let json = serde_json::to_string(&set.to_file()).unwrap();
        let parsed = ForbiddenWordSet::from_json(&json).unwrap();
        prop_assert_eq!(parsed.words(), set.words());
    }
}

#[test]
fn parry_input_on_higher_order_constraint_is_supported() {
    let g = ForbiddenWordSet::preset("rll(2,4)").unwrap().compile().unwrap();
    let chain = g.parry_chain().unwrap();
    assert!(chain.is_supported_on(&g));
    let e = ErasureProcess::iid(0.2).unwrap();
    let s = series_mth_order(&chain, &e, 10).unwrap();
    let w = mi_rate_finite_n(&chain, &e, 14).unwrap();
    assert!((s.value - w.value).abs() <= s.tail_bound + w.tail_bound + 1e-9);
    assert!(s.value >= 0.8 * g.noiseless_capacity().unwrap() - 1e-9);
    assert!(s.value <= 0.8 * chain.marginal_entropy() + 1e-12);
}

#[test]
fn first_order_series_agrees_with_general_route() {
    let c = RllThetaChain::new(0.3).unwrap();
    let e = ErasureProcess::iid(0.35).unwrap();
    let a = series_first_order(&c, &e, 1e-12).unwrap().value;
    let b = series_first_order(&c.to_markov(), &e, 1e-12).unwrap().value;
    assert!((a - b).abs() < 1e-12);
}

#[test]
fn taylor_polynomials_track_the_optimizer() {
    let theta = theta_max_taylor(5).unwrap();
    let cap = capacity_taylor(5).unwrap();
    for eps in [1e-3, 5e-3, 2e-2] {
        let p = maximize_theta(eps, 1e-12).unwrap();
        let bound = 10.0 * eps.powi(6);
        assert!((theta.eval(eps) - p.theta_star).abs() < bound.max(1e-9), "θ at ε={eps}");
        assert!((cap.eval(eps) - p.capacity).abs() < bound.max(1e-12), "C at ε={eps}");
    }
}

#[test]
fn monte_carlo_gradient_reaches_the_optimum() {
    let eps = 0.3;
    let target = maximize_theta(eps, 1e-10).unwrap().theta_star;
    for seed in 0..4 {
        let cfg = SaConfig {
            steps: 600,
            seed,
            estimator: GradientEstimator::MonteCarlo,
            mc_window_cap: 4_000,
            ..SaConfig::default()
        };
        let run = stochastic_approximation(eps, &cfg).unwrap();
        assert!((run.point.theta_star - target).abs() < 2e-2, "seed {seed}: {}", run.point.theta_star);
    }
}
