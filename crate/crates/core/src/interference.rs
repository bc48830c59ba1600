//! Aggregate interference moments and the second-order Gamma surrogate.
//!
//! A tier-k BS at mean received power t = ρ r^{-α} with fading g interferes
//! unless it is an active cluster member, i.e. unless t ≥ max{Δ, T̃/g}. Under
//! coordinated scheduling the silent cluster members drop out as well, which
//! is the same as evaluating with T̃ = 0. Campbell's theorem over the
//! interferer set gives per tier
//!
//! ```text
//! E[J]   = 2π λ ρ^{2/α} E[g   max{Δ, T̃/g}^{1-2/α}] / (α - 2)
//! Var[J] =  π λ ρ^{2/α} E[g^2 max{Δ, T̃/g}^{2-2/α}] / (α - 1)
//! ```

use std::f64::consts::PI;

use crate::config::{NetworkConfig, SchedulingMode, TierParams};
use crate::error::{Error, Result};
use crate::numerics::special::gamma_cdf;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceMoments {
    /// mW
    pub mean: f64,
    /// mW²
    pub variance: f64,
}

/// Gamma law matched to the interference mean and variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaApprox {
    pub nu: f64,
    /// mW
    pub theta: f64,
    pub mean: f64,
    pub variance: f64,
}

impl GammaApprox {
    pub fn from_moments(mean: f64, variance: f64) -> Result<Self> {
        if !(mean > 0.0) || !(variance > 0.0) || !mean.is_finite() || !variance.is_finite() {
            return Err(Error::DegenerateInterference);
        }
        Ok(GammaApprox {
            nu: mean * mean / variance,
            theta: variance / mean,
            mean,
            variance,
        })
    }

    /// P(J̃ ≤ z).
    pub fn cdf(&self, z: f64) -> Result<f64> {
        gamma_cdf(self.nu, self.theta, z)
    }
}

/// Activation threshold that shapes the interferer set under `mode`.
pub fn effective_activation(tier: &TierParams, mode: SchedulingMode) -> f64 {
    match mode {
        SchedulingMode::Fr => tier.activation_thresh(),
        SchedulingMode::Cs => 0.0,
    }
}

/// Interference mean and variance contributed by one tier.
pub fn tier_interference_moments(
    tier: &TierParams,
    mode: SchedulingMode,
) -> Result<InterferenceMoments> {
    let alpha = tier.pathloss_exp();
    let delta = tier.cluster_thresh();
    let t_eff = effective_activation(tier, mode);
    let floor = |g: f64| {
        if t_eff == 0.0 {
            delta
        } else {
            delta.max(t_eff / g)
        }
    };
    let kinks: Vec<f64> = (t_eff > 0.0).then(|| t_eff / delta).into_iter().collect();
    let fading = tier.fading();
    let d = tier.area_exponent();
    let first = fading.expect(|g| g * floor(g).powf(1.0 - d), &kinks)?;
    let second = fading.expect(|g| g * g * floor(g).powf(2.0 - d), &kinks)?;
    let scale = tier.campbell_scale();
    Ok(InterferenceMoments {
        mean: 2.0 * PI * scale * first / (alpha - 2.0),
        variance: PI * scale * second / (alpha - 1.0),
    })
}

/// Moments of the total interference `J_{C̄a} + J_{C̄}` seen by the typical user.
pub fn interference_moments(config: &NetworkConfig) -> Result<InterferenceMoments> {
    let mut total = InterferenceMoments {
        mean: 0.0,
        variance: 0.0,
    };
    for (tier, mode) in config.iter() {
        let m = tier_interference_moments(tier, mode)?;
        total.mean += m.mean;
        total.variance += m.variance;
    }
    Ok(total)
}

pub fn fit_gamma(config: &NetworkConfig) -> Result<GammaApprox> {
    let m = interference_moments(config)?;
    GammaApprox::from_moments(m.mean, m.variance)
}

/// Mean interference from tier-k BSs farther than `radius`, assuming `radius`
/// exceeds the cluster radius so every such BS interferes.
pub fn tail_mean_beyond(tier: &TierParams, radius: f64) -> f64 {
    let alpha = tier.pathloss_exp();
    2.0 * PI * tier.density() * tier.power() * radius.powf(2.0 - alpha) / (alpha - 2.0)
}
