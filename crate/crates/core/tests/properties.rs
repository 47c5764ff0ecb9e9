use proptest::prelude::*;
use semiexp::numeric::{log_sum_exp, LogMeanAccumulator};
use semiexp::rate::{inf_convolution, RateGrid};
use semiexp::simulate::{largest_term_combine, max_jump_from_log_tail};
use semiexp::verify::{bound_medium, bound_small, BoundParams};
use semiexp::{RateParams, WeibullLikeSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn inverse_survival_round_trip(q in 0.1f64..5.0, eps in 0.05f64..0.9, u in 1e-12f64..1.0) {
        let law = WeibullLikeSpec::new(q, eps).unwrap();
        let x = law.sample_raw(u).unwrap();
        let back = law.log_survival_raw(x).unwrap();
        prop_assert!((back - u.ln()).abs() <= 1e-9 * (1.0 + u.ln().abs()));
    }

    #[test]
    fn conditional_samples_stay_above(q in 0.1f64..5.0, eps in 0.05f64..0.9, a in 0.0f64..50.0, u in 1e-12f64..1.0) {
        let law = WeibullLikeSpec::new(q, eps).unwrap();
        prop_assert!(law.sample_conditional(a, u).unwrap() >= a * (1.0 - 1e-12));
    }

    #[test]
    fn transition_rate_between_gaussian_and_jump(eps in 0.05f64..0.9, q in 0.1f64..5.0, s2 in 0.1f64..20.0, c in 0.01f64..100.0) {
        let p = RateParams::new(eps, q, s2).unwrap();
        let j = p.rate_transition(c).unwrap().j;
        prop_assert!(j <= p.gaussian_rate() * (1.0 + 1e-12));
        prop_assert!(j <= q / c.powf(1.0 + eps) * (1.0 + 1e-12));
        prop_assert!(j > 0.0);
    }

    #[test]
    fn transition_rate_nonincreasing_in_c(eps in 0.05f64..0.9, c in 0.01f64..100.0, f in 1.0f64..3.0) {
        let p = RateParams::new(eps, 1.0, 1.0).unwrap();
        let a = p.rate_transition(c).unwrap().j;
        let b = p.rate_transition(c * f).unwrap().j;
        prop_assert!(b <= a * (1.0 + 1e-12));
    }

    #[test]
    fn inf_convolution_nondecreasing(c in 0.5f64..10.0, t1 in 0.0f64..1.0, dt in 0.0f64..0.5) {
        let first = RateGrid::jump_rate(0.5, 1.0, c, 2001).unwrap();
        let second = RateGrid::gaussian_rate(1.0, -1.0, 2.0, 3001).unwrap();
        let a = inf_convolution(&first, &second, t1);
        let b = inf_convolution(&first, &second, t1 + dt);
        prop_assert!(b >= a - 1e-12);
    }

    #[test]
    fn largest_term_shift_moves_value_not_label(vals in prop::collection::vec(-100f64..100.0, 1..20), shift in -50f64..50.0) {
        let terms: Vec<(usize, f64)> = vals.iter().copied().enumerate().collect();
        let shifted: Vec<(usize, f64)> = terms.iter().map(|&(i, v)| (i, v + shift)).collect();
        let (l0, v0) = largest_term_combine(&terms).unwrap();
        let (l1, v1) = largest_term_combine(&shifted).unwrap();
        prop_assert_eq!(l0, l1);
        prop_assert!((v1 - v0 - shift).abs() < 1e-9);
    }

    #[test]
    fn bonferroni_sandwich(n in 1u64..10_000_000, log_s in -700f64..-1e-3) {
        let r = max_jump_from_log_tail(n, log_s);
        let ns = r.n_tail;
        prop_assert!(r.p_max <= ns * (1.0 + 1e-12));
        prop_assert!(r.p_max >= (ns - ns * ns / 2.0) * (1.0 - 1e-12));
        prop_assert!(r.p_max <= 1.0);
    }

    #[test]
    fn log_sum_exp_shift_invariance(vals in prop::collection::vec(-300f64..300.0, 1..30), shift in -100f64..100.0) {
        let shifted: Vec<f64> = vals.iter().map(|v| v + shift).collect();
        prop_assert!((log_sum_exp(&shifted) - log_sum_exp(&vals) - shift).abs() < 1e-9);
    }

    #[test]
    fn accumulator_merge_matches_single_pass(vals in prop::collection::vec(prop_oneof![Just(f64::NEG_INFINITY), -50f64..5.0], 2..60), split in 0usize..60) {
        let split = split.min(vals.len());
        let mut whole = LogMeanAccumulator::new();
        vals.iter().for_each(|&v| whole.push(v));
        let (mut a, mut b) = (LogMeanAccumulator::new(), LogMeanAccumulator::new());
        vals[..split].iter().for_each(|&v| a.push(v));
        vals[split..].iter().for_each(|&v| b.push(v));
        a.merge(&b);
        prop_assert_eq!(a.count(), whole.count());
        prop_assert_eq!(a.all_zero(), whole.all_zero());
        if !whole.all_zero() {
            prop_assert!((a.log_mean() - whole.log_mean()).abs() < 1e-9);
            prop_assert!((a.std_err_log() - whole.std_err_log()).abs() < 1e-7 * (1.0 + whole.std_err_log()));
        }
    }

    #[test]
    fn bounds_monotone(delta in 0.0f64..0.99, u in 0.0f64..100.0, du in 0.0f64..50.0, m in 2u64..20) {
        let p = BoundParams::new(delta, 1).unwrap();
        let xn = 200.0;
        prop_assert!(bound_small(&p, 100, u + du, 1.0).unwrap() <= bound_small(&p, 100, u, 1.0).unwrap());
        let a = bound_medium(&p, 1.0, 0.5, m, u, xn).unwrap();
        prop_assert!(bound_medium(&p, 1.0, 0.5, m, (u + du).min(xn), xn).unwrap() <= a);
        prop_assert!(bound_medium(&p, 1.0, 0.5, m + 1, u, xn).unwrap() <= a);
    }
}
