use std::sync::OnceLock;

use hcn_comp::config::{NetworkConfig, SchedulingMode, TierParams};
use hcn_comp::coverage::{conditional_log_laplace, weighted_signal_moments, CoverageModel};
use hcn_comp::fading::FadingDist;
use hcn_comp::interference::{fit_gamma, interference_moments};
use hcn_comp::metrics::rate_cdf;
use hcn_comp::scenario::Preset;
use hcn_comp::sim::{
    auto_window, estimate_interference_moments, SimConfig, SimRun, TrialResult, Window,
};
use hcn_comp::Error;

const SEED: u64 = 20_240_601;

fn table1_run() -> &'static SimRun {
    static RUN: OnceLock<SimRun> = OnceLock::new();
    RUN.get_or_init(|| SimRun::execute(SimConfig::new(Preset::Table1.config(), 20_000, SEED)).unwrap())
}

fn two_tier_run() -> &'static SimRun {
    static RUN: OnceLock<SimRun> = OnceLock::new();
    RUN.get_or_init(|| {
        SimRun::execute(SimConfig::new(Preset::TwoTierFig3.config(), 20_000, SEED + 1)).unwrap()
    })
}

#[test]
fn cluster_sizes_and_fading_mean() {
    let run = table1_run();
    for (k, tier) in run.config.network.tiers().iter().enumerate() {
        let e = run.cluster_size(k);
        let want = tier.expected_cluster_size();
        assert!((e.mean - want).abs() <= 3.0 * e.std_error, "tier {k}: {e:?} vs {want}");
    }
    let g = run.mean_fading();
    assert!((g.mean - 1.0).abs() <= 3.0 * g.std_error, "{g:?}");
}

#[test]
fn active_members_never_exceed_cluster() {
    for t in &table1_run().trials {
        for (a, c) in t.active_counts.iter().zip(&t.cluster_counts) {
            assert!(a <= c);
        }
    }
}

#[test]
fn interference_moments_agree_with_campbell() {
    let run = table1_run();
    let (mean, var) = run.interference_moments();
    let a = interference_moments(&run.config.network).unwrap();
    assert!(((mean.mean - a.mean) / a.mean).abs() < 0.03, "{mean:?} vs {}", a.mean);
    assert!(((var.mean - a.variance) / a.variance).abs() < 0.05, "{var:?} vs {}", a.variance);
}

#[test]
fn mean_rate_agrees_with_analytic() {
    let run = table1_run();
    let mc = run.mean_rate(run.config.network.modes()).mean;
    let analytic = CoverageModel::new(run.config.network.clone())
        .unwrap()
        .spectral_efficiency()
        .unwrap();
    assert!(((analytic - mc) / mc).abs() < 0.04, "{analytic} vs {mc}");
}

#[test]
fn first_weighted_moment_ratio_agrees() {
    let run = table1_run();
    let config = &run.config.network;
    let tb = fit_gamma(config).unwrap().theta;
    let m = weighted_signal_moments(config, tb, 1).unwrap();
    let analytic = m[1] / m[0];
    // Ratio estimator with a delta-method standard error.
    let u = 1.0 / tb;
    let p: Vec<f64> = run.trials.iter().map(TrialResult::signal_power).collect();
    let w0: Vec<f64> = p.iter().map(|x| (-u * x).exp()).collect();
    let w1: Vec<f64> = p.iter().zip(&w0).map(|(x, w)| x * w).collect();
    let n = p.len() as f64;
    let (a, b) = (w1.iter().sum::<f64>() / n, w0.iter().sum::<f64>() / n);
    let r = a / b;
    let resid: Vec<f64> = w1.iter().zip(&w0).map(|(x, y)| (x - r * y) / b).collect();
    let se = (resid.iter().map(|v| v * v).sum::<f64>() / (n - 1.0) / n).sqrt();
    assert!((r - analytic).abs() <= 3.0 * se, "{r} vs {analytic} (se {se})");
}

#[test]
fn conditional_transform_agrees() {
    let run = table1_run();
    let config = &run.config.network;
    let u = 1.0 / fit_gamma(config).unwrap().theta;
    for count in [2, 4, 6] {
        let e = run.conditional_laplace(1, count, u).unwrap();
        let analytic = conditional_log_laplace(config.tier(1), count, u).unwrap().exp();
        assert!((e.mean - analytic).abs() <= 3.0 * e.std_error, "C = {count}: {e:?} vs {analytic}");
    }
    assert_eq!(run.conditional_laplace(1, 4, 0.0).unwrap().mean, 1.0);
    match run.conditional_laplace(1, 40, u) {
        Err(Error::InsufficientSamples { count, required }) => {
            assert!(count < required);
        }
        other => panic!("expected insufficient samples, got {other:?}"),
    }
}

#[test]
fn rate_distribution_agrees_on_two_tiers() {
    let run = two_tier_run();
    let model = CoverageModel::new(run.config.network.clone()).unwrap();
    let taus: Vec<f64> = (0..=48).map(|i| i as f64 * 0.25).collect();
    let analytic = rate_cdf(&model, &taus).unwrap();
    let mc = run.rate_cdf(&taus, run.config.network.modes());
    let sup = analytic
        .iter()
        .zip(&mc)
        .map(|(a, e)| (a - e.mean).abs())
        .fold(0.0, f64::max);
    assert!(sup < 0.02, "sup-norm {sup}");
}

#[test]
fn muting_dominates_reuse_per_trial() {
    let run = two_tier_run();
    let cs = [SchedulingMode::Fr, SchedulingMode::Cs];
    let fr = [SchedulingMode::Fr, SchedulingMode::Fr];
    for t in &run.trials {
        assert!(t.sir(&cs) >= t.sir(&fr));
    }
}

#[test]
fn window_doubling_barely_moves_moments() {
    let config = Preset::Table1.config();
    let r = auto_window(&config).unwrap();
    let base = SimConfig::new(config, 3_000, SEED + 2);
    let (m1, v1) = estimate_interference_moments(&base).unwrap();
    let (m2, v2) =
        estimate_interference_moments(&base.with_window(Window::Radius(2.0 * r))).unwrap();
    assert!(((m2.mean - m1.mean) / m1.mean).abs() < 0.005, "{} {}", m1.mean, m2.mean);
    assert!(((v2.mean - v1.mean) / v1.mean).abs() < 0.01, "{} {}", v1.mean, v2.mean);
}

fn dense_tier(size: f64, density: f64) -> TierParams {
    let t = TierParams::new(density, 1.0, 4.0, 1e-8, 0.0, FadingDist::rayleigh()).unwrap();
    t.with_cluster_thresh(t.cluster_thresh_for_size(size).unwrap()).unwrap()
}

#[test]
fn vanishing_density_gives_no_interference() {
    let config = NetworkConfig::uniform(vec![dense_tier(1e-9, 1e-12)], SchedulingMode::Fr).unwrap();
    let (m, v) = estimate_interference_moments(&SimConfig::new(config, 200, 1)).unwrap();
    assert_eq!((m.mean, v.mean), (0.0, 0.0));
}

#[test]
fn tiny_threshold_is_always_covered() {
    let config = NetworkConfig::uniform(vec![dense_tier(50.0, 1e-4)], SchedulingMode::Fr).unwrap();
    let run = SimRun::execute(SimConfig::new(config, 500, 3)).unwrap();
    assert_eq!(run.coverage(&[1e-9])[0].mean, 1.0);
}

#[test]
fn constant_sir_gives_step_distribution() {
    let config = Preset::TwoTierFig3.config();
    let trial = TrialResult {
        tier_signal: vec![3.0, 0.0],
        tier_intra: vec![0.0, 0.0],
        tier_outer: vec![1.0, 0.0],
        cluster_counts: vec![1, 0],
        active_counts: vec![1, 0],
        gain_sum: 0.0,
        gain_sq_sum: 0.0,
        gain_count: 0,
    };
    let run = SimRun {
        config: SimConfig::new(config.clone(), 10, 0),
        trials: vec![trial; 10],
    };
    // SIR = 3, so the rate is exactly 2 bit/s/Hz.
    let cdf = run.rate_cdf(&[1.5, 1.999, 2.0, 3.0], config.modes());
    let values: Vec<f64> = cdf.iter().map(|e| e.mean).collect();
    assert_eq!(values, vec![0.0, 0.0, 1.0, 1.0]);
}

#[test]
fn worker_count_does_not_change_results() {
    let sim = SimConfig::new(Preset::TwoTierFig3.config(), 400, 77).with_betas(vec![0.1, 1.0, 10.0]);
    let one = SimRun::execute(sim.clone().with_workers(1)).unwrap();
    let four = SimRun::execute(sim.with_workers(4)).unwrap();
    assert_eq!(one.trials, four.trials);
    let a = one.coverage(&[0.1, 1.0, 10.0]);
    let b = four.coverage(&[0.1, 1.0, 10.0]);
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.mean.to_bits(), y.mean.to_bits());
    }
}
