//! Cross-module checks of the estimators at reduced path counts.

use fracdelta::bel::{delta_samples, estimate_delta, BelProblem, Payoff, WeightFn};
use fracdelta::fbm::{covariance_report, sample_joint_path, write_paths_csv, GridSpec, PathSeed, VolterraWeights};
use fracdelta::fd::{fd_delta, gaussian_digital_delta, SdeRunner};
use fracdelta::frac::{HurstParam, SampledFunction};
use fracdelta::girsanov::Girsanov;
use fracdelta::rough_vol::{simulate_rv_with_streams, RvConfig, RvModel, VolMap};
use fracdelta::sde::{mollify, DriftSpec};
use fracdelta::stats::{map_paths, paired_difference, Estimate};

fn h10() -> HurstParam {
    HurstParam::new(0.1).unwrap()
}

#[test]
fn volterra_paths_have_fbm_covariance() {
    let grid = GridSpec::new(1.0, 16).unwrap();
    let w = VolterraWeights::new(grid, h10());
    let paths: Vec<Vec<f64>> =
        map_paths(20_000, |i| Ok(w.sample(1, PathSeed::new(12, i))?.bh_component(0)[1..].to_vec())).unwrap();
    let rep = covariance_report(&paths, &grid.times()[1..], h10()).unwrap();
    assert!(rep.max_deviation_se < 5.0, "{}", rep.max_deviation_se);
}

#[test]
fn path_dump_layout() {
    let grid = GridSpec::new(1.0, 3).unwrap();
    let p = sample_joint_path(grid, h10(), 2, PathSeed::new(1, 4)).unwrap();
    let mut buf = Vec::new();
    write_paths_csv(&mut buf, &[(4, p)]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0].split(',').count(), 7);
    assert!(lines[4].starts_with("4,3,1"));
    assert!(lines[4].contains(",,"));
}

#[test]
fn digital_finite_difference_matches_closed_form() {
    let grid = GridSpec::new(1.0, 32).unwrap();
    let runner = SdeRunner {
        drift: mollify(DriftSpec::Zero, 0.1).unwrap(),
        sampler: VolterraWeights::new(grid, h10()),
        payoff: Payoff::Digital { strike: 0.5 },
    };
    let fd = fd_delta(|x, s| runner.run(x, s), &[0.0], 0.05, 40_000, 3).unwrap();
    let exact = gaussian_digital_delta(0.0, 0.5, 1.0, h10()).unwrap();
    // bump bias of the central difference on a Gaussian density is O(bump^2)
    assert!((fd.value[0] - exact).abs() < 3.0 * fd.stderr[0] + 2e-3, "{} vs {exact}", fd.value[0]);
    assert!(!fd.below_noise_floor[0]);
}

#[test]
fn common_seeds_reduce_variance() {
    let grid = GridSpec::new(1.0, 32).unwrap();
    let runner = SdeRunner {
        drift: mollify(DriftSpec::RegimeSwitch { b1: 1.0, b2: -1.0, threshold: 0.0 }, 0.1).unwrap(),
        sampler: VolterraWeights::new(grid, h10()),
        payoff: Payoff::Call { strike: 0.0 },
    };
    let paired = fd_delta(|x, s| runner.run(x, s), &[0.0], 0.01, 2000, 5).unwrap();
    let up: Vec<f64> = (0..2000).map(|i| runner.run(&[0.01], PathSeed::new(5, i)).unwrap()).collect();
    let dn: Vec<f64> = (0..2000).map(|i| runner.run(&[-0.01], PathSeed::new(6, i)).unwrap()).collect();
    let unpaired = (Estimate::from_samples(&up).unwrap().stderr.powi(2) + Estimate::from_samples(&dn).unwrap().stderr.powi(2)).sqrt() / 0.02;
    assert!(paired.stderr[0] <= unpaired);
}

#[test]
fn finite_difference_is_stable_in_the_bump() {
    let grid = GridSpec::new(1.0, 32).unwrap();
    let runner = SdeRunner {
        drift: mollify(DriftSpec::RegimeSwitch { b1: 1.0, b2: -1.0, threshold: 0.0 }, 0.1).unwrap(),
        sampler: VolterraWeights::new(grid, h10()),
        payoff: Payoff::Call { strike: 0.0 },
    };
    let a = fd_delta(|x, s| runner.run(x, s), &[0.0], 0.02, 5000, 8).unwrap();
    let b = fd_delta(|x, s| runner.run(x, s), &[0.0], 0.01, 5000, 8).unwrap();
    let d = paired_difference(&a.samples[0], &b.samples[0]).unwrap();
    assert!(d.mean.abs() <= 3.0 * d.stderr.max(1e-12), "{d:?}");
}

#[test]
fn weight_second_moment_is_stable_in_the_grid() {
    let mut second = Vec::new();
    for n in [128, 256, 512] {
        let grid = GridSpec::new(1.0, n).unwrap();
        let p = BelProblem::new(mollify(DriftSpec::Zero, 0.1).unwrap(), vec![0.0], h10(), WeightFn::uniform(1.0).unwrap(), grid)
            .unwrap();
        let out = p.simulate(3000, 21).unwrap();
        let sq: Vec<f64> = out.iter().map(|o| o.pi[0] * o.pi[0]).collect();
        second.push(Estimate::from_samples(&sq).unwrap().mean);
    }
    assert!(second.iter().all(|v| v.is_finite() && *v > 0.0));
    let (lo, hi) = second.iter().fold((f64::MAX, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
    assert!(hi / lo < 1.5, "{second:?}");
}

#[test]
fn identity_delta_in_two_dimensions() {
    let grid = GridSpec::new(1.0, 32).unwrap();
    let e = estimate_delta(
        &mollify(DriftSpec::Zero, 0.1).unwrap(),
        &[0.0, 0.5],
        Payoff::Identity,
        h10(),
        &WeightFn::uniform(1.0).unwrap(),
        grid,
        20_000,
        9,
    )
    .unwrap();
    // payoff is the component mean, so each partial derivative is 1/2
    for c in 0..2 {
        assert!((e.mean[c] - 0.5).abs() < 3.0 * e.stderr[c], "{e:?}");
    }
    assert_eq!(e.config_digest.len(), 64);
}

#[test]
fn delta_does_not_depend_on_the_weighting() {
    let grid = GridSpec::new(1.0, 32).unwrap();
    let ramp = SampledFunction::from_fn(1.0, 32, |t| 2.0 * t).unwrap();
    let drift = mollify(DriftSpec::Zero, 0.1).unwrap();
    let run = |a: WeightFn| {
        let p = BelProblem::new(drift.clone(), vec![0.0], h10(), a, grid).unwrap();
        delta_samples(&p.simulate(20_000, 31).unwrap(), &Payoff::Identity).unwrap().remove(0)
    };
    let u = run(WeightFn::uniform(1.0).unwrap());
    let r = run(WeightFn::custom(ramp).unwrap());
    let d = paired_difference(&u, &r).unwrap();
    assert!(d.mean.abs() < 3.0 * d.stderr, "{d:?}");
}

#[test]
fn girsanov_mean_is_one_on_coarse_and_fine_grids() {
    let drift = DriftSpec::RegimeSwitch { b1: 0.5, b2: -0.5, threshold: 0.0 };
    for n in [32, 64] {
        let grid = GridSpec::new(1.0, n).unwrap();
        let s = VolterraWeights::new(grid, h10());
        let g = Girsanov::new(grid, h10());
        let xi: Vec<f64> = map_paths(20_000, |i| Ok(g.weight(&drift, &s.sample(1, PathSeed::new(41, i))?, 0.0)?.xi)).unwrap();
        let e = Estimate::from_samples(&xi).unwrap();
        assert!(e.z_score(1.0).abs() < 3.0, "n={n}: {e:?}");
    }
}

fn rv(gamma: f64) -> RvConfig {
    RvConfig::new(
        0.05,
        VolMap::new(0.2, gamma).unwrap(),
        mollify(DriftSpec::RegimeSwitch { b1: -0.5, b2: 0.5, threshold: 0.0 }, 0.1).unwrap(),
        1.0,
        0.0,
        h10(),
    )
    .unwrap()
}

#[test]
fn stock_weight_has_mean_zero_and_unbiased_stock_delta() {
    let grid = GridSpec::new(1.0, 32).unwrap();
    let m = RvModel::new(rv(0.3), grid).unwrap();
    let a = WeightFn::uniform(1.0).unwrap();
    let one = m.delta_samples(&|_, _| 1.0, &a, 20_000, 51).unwrap();
    let w1 = Estimate::from_samples(&one[0]).unwrap();
    assert!(w1.z_score(0.0).abs() < 3.0, "{w1:?}");
    let ramp = WeightFn::custom(SampledFunction::from_fn(1.0, 32, |t| 2.0 * t).unwrap()).unwrap();
    let u = m.delta_samples(&|s, _| s, &a, 20_000, 52).unwrap();
    let r = m.delta_samples(&|s, _| s, &ramp, 20_000, 52).unwrap();
    let d = paired_difference(&u[0], &r[0]).unwrap();
    assert!(d.mean.abs() < 3.0 * d.stderr, "{d:?}");
    let e = Estimate::from_samples(&u[0]).unwrap();
    assert!(e.z_score(0.05f64.exp()).abs() < 3.0, "{e:?}");
}

#[test]
fn stock_seed_only_moves_the_stock() {
    let grid = GridSpec::new(1.0, 16).unwrap();
    let a = simulate_rv_with_streams(&rv(0.3), grid, PathSeed::new(1, 2), PathSeed::new(3, 2)).unwrap();
    let b = simulate_rv_with_streams(&rv(0.3), grid, PathSeed::new(9, 2), PathSeed::new(3, 2)).unwrap();
    assert_eq!(a.sigma, b.sigma);
    assert_eq!(a.dsigma_dx2, b.dsigma_dx2);
    assert_ne!(a.s, b.s);
}

#[test]
fn rough_vol_estimates_are_deterministic() {
    let grid = GridSpec::new(1.0, 16).unwrap();
    let a = WeightFn::uniform(1.0).unwrap();
    let f = |s: f64, _: f64| (s - 1.0).max(0.0);
    let x = fracdelta::rough_vol::sbel_delta(&rv(0.3), &f, &a, grid, 500, 4).unwrap();
    let y = fracdelta::rough_vol::sbel_delta(&rv(0.3), &f, &a, grid, 500, 4).unwrap();
    assert_eq!(x, y);
}
