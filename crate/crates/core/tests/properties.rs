use fracdelta::bel::Payoff;
use fracdelta::fbm::{GridSpec, JointPath, PathSeed, VolterraWeights};
use fracdelta::frac::{
    big_c_h, c_h, cov_rh, frac_int_left, kh_inverse_ac, strong_threshold, FracOrder, HurstParam, SampledFunction,
};
use fracdelta::girsanov::girsanov_xi;
use fracdelta::report::{render_csv, ResultRow};
use fracdelta::sde::{euler_solve, flow_derivative, mollify, DriftSpec};
use fracdelta::special::gamma;
use proptest::prelude::*;

fn hurst() -> impl Strategy<Value = HurstParam> {
    (0.02f64..0.48).prop_map(|h| HurstParam::new(h).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn covariance_is_symmetric_and_self_similar(h in hurst(), t in 0.0f64..5.0, s in 0.0f64..5.0, c in 0.1f64..10.0) {
        let a = cov_rh(h, t, s).unwrap();
        prop_assert_eq!(a, cov_rh(h, s, t).unwrap());
        let scaled = cov_rh(h, c * t, c * s).unwrap();
        prop_assert!((scaled - c.powf(2.0 * h.value()) * a).abs() <= 1e-12 * (1.0 + scaled.abs()));
    }

    #[test]
    fn constants_are_consistent(h in hurst()) {
        let v = h.value();
        let prod = big_c_h(h) * c_h(h) * gamma(0.5 + v) * gamma(0.5 - v);
        prop_assert!((prod - 1.0).abs() < 1e-12);
        prop_assert!(c_h(h).is_finite() && big_c_h(h) > 0.0);
    }

    #[test]
    fn validity_flags_follow_thresholds(h in hurst(), d in 1usize..6) {
        prop_assert_eq!(h.strong_solution_valid(d), h.value() < strong_threshold(d));
        prop_assert!(!h.continuous_version_valid(d) || h.strong_solution_valid(d));
    }

    #[test]
    fn fractional_integral_is_linear(alpha in 0.05f64..1.0, a in -3.0f64..3.0, b in -3.0f64..3.0) {
        let order = FracOrder::new(alpha).unwrap();
        let f = SampledFunction::from_fn(1.0, 64, |t| t.sin()).unwrap();
        let g = SampledFunction::from_fn(1.0, 64, |t| t * t - 0.3).unwrap();
        let comb = SampledFunction::from_fn(1.0, 64, |t| a * t.sin() + b * (t * t - 0.3)).unwrap();
        let lhs = frac_int_left(order, &comb, 0.0).unwrap();
        let (fi, gi) = (frac_int_left(order, &f, 0.0).unwrap(), frac_int_left(order, &g, 0.0).unwrap());
        for i in 0..lhs.len() {
            let rhs = a * fi.values()[i] + b * gi.values()[i];
            prop_assert!((lhs.values()[i] - rhs).abs() < 1e-12 * (1.0 + rhs.abs()));
        }
    }

    #[test]
    fn inverse_kernel_of_zero_derivative_is_zero(h in hurst(), n in 2usize..50) {
        let z = SampledFunction::from_fn(1.0, n, |_| 0.0).unwrap();
        prop_assert!(kh_inverse_ac(h, &z).unwrap().values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn density_is_positive_and_finite(seed in 0u64..1000, b1 in -2.0f64..2.0, b2 in -2.0f64..2.0) {
        let h = HurstParam::new(0.1).unwrap();
        let grid = GridSpec::new(1.0, 32).unwrap();
        let p = VolterraWeights::new(grid, h).sample(1, PathSeed::new(seed, 0)).unwrap();
        let w = girsanov_xi(h, &DriftSpec::RegimeSwitch { b1, b2, threshold: 0.0 }, &p, 0.0).unwrap();
        prop_assert!(w.xi > 0.0 && w.log_xi.is_finite());
        prop_assert!((w.xi - w.log_xi.exp()).abs() <= 1e-15 * w.xi);
    }

    #[test]
    fn flow_matches_bumped_paths(seed in 0u64..500, eps in 0.05f64..0.5) {
        let grid = GridSpec::new(1.0, 64).unwrap();
        let drift = mollify(DriftSpec::RegimeSwitch { b1: 1.0, b2: -1.0, threshold: 0.0 }, eps).unwrap();
        let jp = VolterraWeights::new(grid, HurstParam::new(0.1).unwrap()).sample(1, PathSeed::new(seed, 1)).unwrap();
        let x0 = 0.05;
        let flow = flow_derivative(&drift, &euler_solve(&drift, &[x0], &jp).unwrap()).unwrap();
        let d = 1e-6;
        let up = euler_solve(&drift, &[x0 + d], &jp).unwrap().terminal()[0];
        let dn = euler_solve(&drift, &[x0 - d], &jp).unwrap().terminal()[0];
        let fd = (up - dn) / (2.0 * d);
        let j = flow.entry(64, 0, 0);
        prop_assert!((fd - j).abs() < 1e-5 * (1.0 + j.abs()), "{} vs {}", fd, j);
    }

    #[test]
    fn put_call_parity_holds_pointwise(z in -10.0f64..10.0, k in -5.0f64..5.0) {
        let c = Payoff::Call { strike: k }.eval_scalar(z);
        let p = Payoff::Put { strike: k }.eval_scalar(z);
        prop_assert!((c - p - (z - k)).abs() < 1e-12);
    }

    #[test]
    fn csv_round_trips_floats(x in proptest::num::f64::NORMAL, se in 0.0f64..1e6) {
        let csv = render_csv(&[ResultRow::new("delta", 1, x, se, 10)]);
        let line = csv.lines().nth(1).unwrap();
        let fields: Vec<&str> = line.split(',').collect();
        prop_assert_eq!(fields[2].parse::<f64>().unwrap(), x);
        prop_assert_eq!(fields[3].parse::<f64>().unwrap(), se);
    }
}

#[test]
fn zero_path_has_zero_increments() {
    let grid = GridSpec::new(2.0, 5).unwrap();
    let p = JointPath::zero(grid, 2);
    assert!(p.dw_all().iter().chain(p.bh_all()).all(|&v| v == 0.0));
}
