//! Monte Carlo realizations of the clustered multi-tier network.
//!
//! Each trial draws every tier's BSs inside a disk around the typical user,
//! classifies them as active cluster members, silent cluster members or
//! outsiders, and records the per-tier power sums. Points are generated in
//! order of increasing distance (cumulative exponential spacings in `πλr²`),
//! which is a Poisson process on the disk; since the user sits at the center
//! only distances matter, and enlarging the window appends points without
//! disturbing the ones already drawn.
//!
//! Randomness for trial `i`, tier `k` comes from a ChaCha8 stream keyed on the
//! master seed with stream id `i << 8 | k`, so a trial's outcome depends only
//! on `(seed, i)`, never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;

use crate::config::{NetworkConfig, SchedulingMode, TierParams};
use crate::error::{Error, Result};
use crate::interference::{interference_moments, tail_mean_beyond};

/// Share of the mean interference the AUTO window may leave out.
pub const TAIL_FRACTION: f64 = 1e-3;
/// Minimum AUTO window, in multiples of the largest cluster radius.
pub const AUTO_FLOOR: f64 = 4.0;
/// Minimum explicit window, in multiples of the largest cluster radius.
pub const MIN_MARGIN: f64 = 2.0;
/// Trials needed before a conditional average is reported.
pub const MIN_CONDITIONED: usize = 500;

const MAX_TIERS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Auto,
    /// Meters.
    Radius(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub network: NetworkConfig,
    pub trials: usize,
    pub master_seed: u64,
    pub window: Window,
    /// Linear SIR thresholds.
    pub beta_grid: Vec<f64>,
    /// Worker count; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
}

impl SimConfig {
    pub fn new(network: NetworkConfig, trials: usize, master_seed: u64) -> Self {
        SimConfig {
            network,
            trials,
            master_seed,
            window: Window::Auto,
            beta_grid: Vec::new(),
            workers: None,
        }
    }

    pub fn with_window(mut self, window: Window) -> Self {
        self.window = window;
        self
    }

    pub fn with_betas(mut self, betas: Vec<f64>) -> Self {
        self.beta_grid = betas;
        self
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = Some(workers);
        self
    }

    /// Window radius in meters after applying the AUTO rule or validating an
    /// explicit radius.
    pub fn window_radius(&self) -> Result<f64> {
        match self.window {
            Window::Auto => auto_window(&self.network),
            Window::Radius(r) => {
                let required = MIN_MARGIN * self.network.max_cluster_radius();
                if !(r >= required) || !r.is_finite() {
                    return Err(Error::WindowTooSmall {
                        radius: r,
                        required,
                    });
                }
                Ok(r)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("trials", "must be at least 1"));
        }
        if self.network.num_tiers() > MAX_TIERS {
            return Err(Error::invalid(
                "tiers",
                format!("at most {MAX_TIERS} tiers are supported"),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "must be at least 1"));
        }
        Ok(())
    }
}

/// Smallest radius whose truncated interference tail is below
/// [`TAIL_FRACTION`] of the total mean, floored at [`AUTO_FLOOR`] cluster radii.
pub fn auto_window(config: &NetworkConfig) -> Result<f64> {
    let budget = TAIL_FRACTION * interference_moments(config)?.mean;
    let tail = |r: f64| -> f64 { config.tiers().iter().map(|t| tail_mean_beyond(t, r)).sum() };
    let floor = AUTO_FLOOR * config.max_cluster_radius();
    if tail(floor) <= budget {
        return Ok(floor);
    }
    let (mut lo, mut hi) = (floor, floor * 2.0);
    while tail(hi) > budget {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if tail(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 * hi {
            break;
        }
    }
    Ok(hi)
}

/// Role of one BS with respect to the typical user.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BsRole {
    /// Cluster member that joins the joint transmission.
    Active,
    /// Cluster member that does not transmit to the typical user.
    Silent,
    Outside,
}

/// Classifies a BS at `distance` meters with power gain `gain`.
pub fn classify(tier: &TierParams, distance: f64, gain: f64) -> BsRole {
    let mean_rss = tier.power() * distance.powf(-tier.pathloss_exp());
    classify_rss(tier, mean_rss, gain)
}

#[inline]
fn classify_rss(tier: &TierParams, mean_rss: f64, gain: f64) -> BsRole {
    if mean_rss < tier.cluster_thresh() {
        BsRole::Outside
    } else if gain * mean_rss >= tier.activation_thresh() {
        BsRole::Active
    } else {
        BsRole::Silent
    }
}

/// One realization, split by tier.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialResult {
    /// Received power from active cluster members, per tier (mW).
    pub tier_signal: Vec<f64>,
    /// Received power from silent cluster members, per tier (mW).
    pub tier_intra: Vec<f64>,
    /// Received power from BSs outside the cluster, per tier (mW).
    pub tier_outer: Vec<f64>,
    pub cluster_counts: Vec<u32>,
    pub active_counts: Vec<u32>,
    /// Sum, sum of squares and count of every fading gain drawn.
    pub gain_sum: f64,
    pub gain_sq_sum: f64,
    pub gain_count: u64,
}

impl TrialResult {
    pub fn signal_power(&self) -> f64 {
        self.tier_signal.iter().sum()
    }

    pub fn intra_interf(&self) -> f64 {
        self.tier_intra.iter().sum()
    }

    pub fn outer_interf(&self) -> f64 {
        self.tier_outer.iter().sum()
    }

    /// Interference seen by the user: all outsiders plus the silent members
    /// of frequency-reuse tiers.
    pub fn interference(&self, modes: &[SchedulingMode]) -> f64 {
        let intra: f64 = self
            .tier_intra
            .iter()
            .zip(modes)
            .filter(|(_, m)| **m == SchedulingMode::Fr)
            .map(|(j, _)| j)
            .sum();
        self.outer_interf() + intra
    }

    /// SIR under the given per-tier modes; zero when no BS is active.
    pub fn sir(&self, modes: &[SchedulingMode]) -> f64 {
        let p = self.signal_power();
        if p == 0.0 {
            return 0.0;
        }
        p / self.interference(modes)
    }
}

fn trial_rng(seed: u64, trial: usize, tier: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((trial as u64) << 8) | tier as u64);
    rng
}

/// Draws trial `trial_index` of `sim`.
pub fn sample_trial(sim: &SimConfig, trial_index: usize) -> Result<TrialResult> {
    sim.validate()?;
    let radius = sim.window_radius()?;
    Ok(sample_in_window(sim, radius, trial_index))
}

fn sample_in_window(sim: &SimConfig, radius: f64, trial: usize) -> TrialResult {
    let k = sim.network.num_tiers();
    let mut out = TrialResult {
        tier_signal: vec![0.0; k],
        tier_intra: vec![0.0; k],
        tier_outer: vec![0.0; k],
        cluster_counts: vec![0; k],
        active_counts: vec![0; k],
        gain_sum: 0.0,
        gain_sq_sum: 0.0,
        gain_count: 0,
    };
    for (idx, tier) in sim.network.tiers().iter().enumerate() {
        let mut rng = trial_rng(sim.master_seed, trial, idx);
        let fading = tier.fading().sampler();
        // Points are spaced by Exp(1) in the mapped coordinate πλr².
        let scale = 1.0 / (std::f64::consts::PI * tier.density());
        let limit = radius * radius;
        let half_alpha = 0.5 * tier.pathloss_exp();
        let power = tier.power();
        let mut mapped = 0.0;
        loop {
            let step: f64 = Exp1.sample(&mut rng);
            mapped += step;
            let r2 = mapped * scale;
            if r2 > limit {
                break;
            }
            let gain = fading.sample(&mut rng);
            out.gain_sum += gain;
            out.gain_sq_sum += gain * gain;
            out.gain_count += 1;
            let mean_rss = power * r2.powf(-half_alpha);
            let rx = gain * mean_rss;
            match classify_rss(tier, mean_rss, gain) {
                BsRole::Active => {
                    out.cluster_counts[idx] += 1;
                    out.active_counts[idx] += 1;
                    out.tier_signal[idx] += rx;
                }
                BsRole::Silent => {
                    out.cluster_counts[idx] += 1;
                    out.tier_intra[idx] += rx;
                }
                BsRole::Outside => out.tier_outer[idx] += rx,
            }
        }
    }
    out
}

/// Runs every trial; results are in trial order whatever the worker count.
pub fn run_trials(sim: &SimConfig) -> Result<Vec<TrialResult>> {
    sim.validate()?;
    let radius = sim.window_radius()?;
    log::info!(
        "simulating {} trials in a {:.0} m window",
        sim.trials,
        radius
    );
    let job = || -> Vec<TrialResult> {
        (0..sim.trials)
            .into_par_iter()
            .map(|i| sample_in_window(sim, radius, i))
            .collect()
    };
    match sim.workers {
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::invalid("workers", e.to_string()))?;
            Ok(pool.install(job))
        }
        None => Ok(job()),
    }
}

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

fn compensated<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let mut s = CompensatedSum::default();
    for x in xs {
        s.add(x);
    }
    s.value()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub n: usize,
}

impl Estimate {
    pub fn new(mean: f64, std_error: f64, n: usize) -> Self {
        Estimate {
            mean,
            std_error,
            ci95_low: mean - 1.96 * std_error,
            ci95_high: mean + 1.96 * std_error,
            n,
        }
    }

    /// Sample mean with the standard error of the mean.
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        let mean = compensated(xs.iter().copied()) / n as f64;
        let var = if n > 1 {
            compensated(xs.iter().map(|x| (x - mean) * (x - mean))) / (n - 1) as f64
        } else {
            0.0
        };
        Estimate::new(mean, (var / n as f64).sqrt(), n)
    }

    /// Fraction of `hits` out of `n` with the binomial standard error.
    pub fn from_proportion(hits: usize, n: usize) -> Self {
        let p = hits as f64 / n as f64;
        Estimate::new(p, (p * (1.0 - p) / n as f64).sqrt(), n)
    }

    /// Unbiased sample variance with its large-sample standard error.
    pub fn sample_variance(xs: &[f64]) -> Self {
        let n = xs.len();
        if n < 2 {
            return Estimate::new(0.0, 0.0, n);
        }
        let mean = compensated(xs.iter().copied()) / n as f64;
        let m2 = compensated(xs.iter().map(|x| (x - mean).powi(2))) / n as f64;
        let m4 = compensated(xs.iter().map(|x| (x - mean).powi(4))) / n as f64;
        let var = m2 * n as f64 / (n - 1) as f64;
        Estimate::new(var, ((m4 - m2 * m2).max(0.0) / n as f64).sqrt(), n)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci95_low <= x && x <= self.ci95_high
    }
}

/// A finished batch of trials with the configuration that produced it.
#[derive(Debug, Clone)]
pub struct SimRun {
    pub config: SimConfig,
    pub trials: Vec<TrialResult>,
}

impl SimRun {
    pub fn execute(config: SimConfig) -> Result<Self> {
        let trials = run_trials(&config)?;
        Ok(SimRun { config, trials })
    }

    fn modes(&self) -> &[SchedulingMode] {
        self.config.network.modes()
    }

    pub fn sirs(&self) -> Vec<f64> {
        self.sirs_with_modes(self.modes())
    }

    pub fn sirs_with_modes(&self, modes: &[SchedulingMode]) -> Vec<f64> {
        self.trials.iter().map(|t| t.sir(modes)).collect()
    }

    /// `P(SIR ≥ β)` at each of `betas`.
    pub fn coverage(&self, betas: &[f64]) -> Vec<Estimate> {
        let sirs = self.sirs();
        betas
            .iter()
            .map(|&b| Estimate::from_proportion(sirs.iter().filter(|&&s| s >= b).count(), sirs.len()))
            .collect()
    }

    /// Mean and variance of the interference under the configured modes.
    pub fn interference_moments(&self) -> (Estimate, Estimate) {
        let modes = self.modes();
        let xs: Vec<f64> = self.trials.iter().map(|t| t.interference(modes)).collect();
        (Estimate::from_samples(&xs), Estimate::sample_variance(&xs))
    }

    /// `P(log2(1 + SIR) ≤ τ)` at each of `taus`, under the given modes.
    pub fn rate_cdf(&self, taus: &[f64], modes: &[SchedulingMode]) -> Vec<Estimate> {
        let rates: Vec<f64> = self
            .sirs_with_modes(modes)
            .iter()
            .map(|s| s.ln_1p() / std::f64::consts::LN_2)
            .collect();
        taus.iter()
            .map(|&t| Estimate::from_proportion(rates.iter().filter(|&&r| r <= t).count(), rates.len()))
            .collect()
    }

    /// `E[log2(1 + SIR)]` under the given modes.
    pub fn mean_rate(&self, modes: &[SchedulingMode]) -> Estimate {
        let rates: Vec<f64> = self
            .sirs_with_modes(modes)
            .iter()
            .map(|s| s.ln_1p() / std::f64::consts::LN_2)
            .collect();
        Estimate::from_samples(&rates)
    }

    pub fn cluster_size(&self, tier: usize) -> Estimate {
        let xs: Vec<f64> = self.trials.iter().map(|t| t.cluster_counts[tier] as f64).collect();
        Estimate::from_samples(&xs)
    }

    /// Mean of every fading gain drawn across all trials and tiers.
    pub fn mean_fading(&self) -> Estimate {
        let n: u64 = self.trials.iter().map(|t| t.gain_count).sum();
        let s = compensated(self.trials.iter().map(|t| t.gain_sum));
        let s2 = compensated(self.trials.iter().map(|t| t.gain_sq_sum));
        let mean = s / n as f64;
        let var = (s2 / n as f64 - mean * mean) * n as f64 / (n as f64 - 1.0);
        Estimate::new(mean, (var / n as f64).sqrt(), n as usize)
    }

    /// `E[e^{-u P_k}]` over all trials.
    pub fn laplace(&self, tier: usize, u: f64) -> Estimate {
        let xs: Vec<f64> = self.trials.iter().map(|t| (-u * t.tier_signal[tier]).exp()).collect();
        Estimate::from_samples(&xs)
    }

    /// `E[P e^{-uP}]` and `E[e^{-uP}]` for the total signal power.
    pub fn weighted_signal(&self, u: f64) -> (Estimate, Estimate) {
        let p: Vec<f64> = self.trials.iter().map(|t| t.signal_power()).collect();
        let w0: Vec<f64> = p.iter().map(|x| (-u * x).exp()).collect();
        let w1: Vec<f64> = p.iter().map(|x| x * (-u * x).exp()).collect();
        (Estimate::from_samples(&w1), Estimate::from_samples(&w0))
    }

    /// `E[e^{-u P_k} | C_k = count]`.
    pub fn conditional_laplace(&self, tier: usize, count: u32, u: f64) -> Result<Estimate> {
        let xs: Vec<f64> = self
            .trials
            .iter()
            .filter(|t| t.cluster_counts[tier] == count)
            .map(|t| (-u * t.tier_signal[tier]).exp())
            .collect();
        if xs.len() < MIN_CONDITIONED {
            return Err(Error::InsufficientSamples {
                count: xs.len(),
                required: MIN_CONDITIONED,
            });
        }
        Ok(Estimate::from_samples(&xs))
    }
}

pub fn estimate_coverage(sim: &SimConfig) -> Result<Vec<Estimate>> {
    let run = SimRun::execute(sim.clone())?;
    Ok(run.coverage(&sim.beta_grid))
}

pub fn estimate_interference_moments(sim: &SimConfig) -> Result<(Estimate, Estimate)> {
    Ok(SimRun::execute(sim.clone())?.interference_moments())
}

pub fn estimate_rate_cdf(sim: &SimConfig, taus: &[f64]) -> Result<Vec<Estimate>> {
    let run = SimRun::execute(sim.clone())?;
    Ok(run.rate_cdf(taus, sim.network.modes()))
}

pub fn estimate_conditional_laplace(
    sim: &SimConfig,
    tier: usize,
    count: u32,
    u: f64,
) -> Result<Estimate> {
    SimRun::execute(sim.clone())?.conditional_laplace(tier, count, u)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fading::FadingDist;

    fn one_tier(density: f64) -> NetworkConfig {
        let t = TierParams::new(density, 1000.0, 3.8, 1e-6, 2e-6, FadingDist::nakagami(2.3).unwrap())
            .unwrap();
        NetworkConfig::uniform(vec![t], SchedulingMode::Fr).unwrap()
    }

    #[test]
    fn boundary_bs_is_in_cluster() {
        let t = TierParams::new(1e-5, 2.0, 4.0, 2.0, 0.0, FadingDist::Deterministic).unwrap();
        assert_eq!(classify(&t, 1.0, 1.0), BsRole::Active);
        assert_eq!(classify(&t, 1.0 + 1e-9, 1.0), BsRole::Outside);
        let t = t.with_activation_thresh(3.0).unwrap();
        assert_eq!(classify(&t, 1.0, 1.0), BsRole::Silent);
    }

    #[test]
    fn empty_realization_has_zero_sir() {
        let sim = SimConfig::new(one_tier(1e-14), 20, 3);
        for i in 0..20 {
            let tr = sample_trial(&sim, i).unwrap();
            assert_eq!(tr.signal_power(), 0.0);
            assert_eq!(tr.sir(sim.network.modes()), 0.0);
            assert_eq!(tr.cluster_counts, vec![0]);
        }
    }

    #[test]
    fn window_validation() {
        let cfg = one_tier(1e-5);
        let r = cfg.max_cluster_radius();
        let sim = SimConfig::new(cfg, 10, 1).with_window(Window::Radius(1.5 * r));
        assert!(matches!(sim.window_radius(), Err(Error::WindowTooSmall { .. })));
        let auto = auto_window(&sim.network).unwrap();
        assert!(auto >= AUTO_FLOOR * r);
    }

    #[test]
    fn trial_depends_only_on_seed_and_index() {
        let sim = SimConfig::new(one_tier(1e-5), 50, 9);
        let all = run_trials(&sim.clone().with_workers(3)).unwrap();
        assert_eq!(all[17], sample_trial(&sim, 17).unwrap());
        assert_eq!(all, run_trials(&sim.with_workers(1)).unwrap());
    }

    #[test]
    fn larger_window_extends_realization() {
        let cfg = one_tier(1e-5);
        let r = 3.0 * cfg.max_cluster_radius();
        let small = SimConfig::new(cfg.clone(), 1, 4).with_window(Window::Radius(r));
        let large = SimConfig::new(cfg, 1, 4).with_window(Window::Radius(2.0 * r));
        let a = sample_trial(&small, 0).unwrap();
        let b = sample_trial(&large, 0).unwrap();
        assert_eq!(a.tier_signal, b.tier_signal);
        assert_eq!(a.cluster_counts, b.cluster_counts);
        assert!(b.tier_outer[0] > a.tier_outer[0]);
    }

    #[test]
    fn estimate_arithmetic() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0]);
        assert_eq!(e.mean, 2.0);
        assert!((e.std_error - (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((e.ci95_high - e.mean - 1.96 * e.std_error).abs() < 1e-15);
        let p = Estimate::from_proportion(25, 100);
        assert!((p.std_error - (0.25f64 * 0.75 / 100.0).sqrt()).abs() < 1e-15);
    }
}
