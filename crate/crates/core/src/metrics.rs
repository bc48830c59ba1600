//! Load-balancing and intra-cluster scheduling metrics.

use crate::config::{NetworkConfig, SchedulingMode, TierParams};
use crate::coverage::CoverageModel;
use crate::error::{Error, Result};

/// An operating point `(Δ, T)` of a tier compared against a baseline `(Δ', T')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LoadQuery {
    pub tier: TierParams,
    /// Δ' in mW.
    pub baseline_delta: f64,
    /// T' in mW.
    pub baseline_t: f64,
}

impl LoadQuery {
    pub fn new(tier: TierParams, baseline_delta: f64, baseline_t: f64) -> Result<Self> {
        for (field, v) in [
            ("baseline_delta", baseline_delta),
            ("baseline_t", baseline_t),
            ("activation_thresh", tier.activation_thresh()),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::invalid(field, format!("must be positive, got {v}")));
            }
        }
        Ok(LoadQuery {
            tier,
            baseline_delta,
            baseline_t,
        })
    }
}

/// E[min{Δ, T/g}^{-2/α}], proportional to the mean number of cooperation
/// requests a BS receives.
fn request_weight(tier: &TierParams, delta: f64, t: f64) -> Result<f64> {
    let d = tier.area_exponent();
    tier.fading()
        .expect(|g| delta.min(t / g).powf(-d), &[t / delta])
}

/// Relative load increase of the query's operating point over its baseline.
pub fn load_increase(query: &LoadQuery) -> Result<f64> {
    let tier = &query.tier;
    let current = request_weight(tier, tier.cluster_thresh(), tier.activation_thresh())?;
    let baseline = request_weight(tier, query.baseline_delta, query.baseline_t)?;
    Ok(current / baseline - 1.0)
}

/// Fraction of cluster members freed when inactive members reuse the
/// joint-transmission resources instead of staying silent. Depends only on
/// `T/Δ`, the path-loss exponent and the fading law.
pub fn resource_saving(tier: &TierParams) -> Result<f64> {
    let t = tier.activation_thresh();
    if t == 0.0 {
        return Ok(0.0);
    }
    let ratio = tier.cluster_thresh() / t;
    let d = tier.area_exponent();
    let kept = tier
        .fading()
        .expect(|g| (g * ratio).powf(d).min(1.0), &[1.0 / ratio])?;
    Ok(1.0 - kept)
}

/// `P(log2(1 + SIR) ≤ τ)` from the linear coverage approximation.
pub fn rate_cdf(model: &CoverageModel, taus: &[f64]) -> Result<Vec<f64>> {
    taus.iter()
        .map(|&tau| {
            if !(tau >= 0.0) || !tau.is_finite() {
                return Err(Error::domain("rate_cdf", format!("τ must be ≥ 0, got {tau}")));
            }
            Ok(1.0 - model.linear_coverage(tau.exp2() - 1.0)?)
        })
        .collect()
}

/// Mean spectral efficiency under coordinated scheduling and frequency reuse
/// in `tier`, all other tiers keeping their configured mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateComparison {
    pub mean_rate_cs: f64,
    pub mean_rate_fr: f64,
}

impl RateComparison {
    /// `(E[R]_CS - E[R]_FR) / E[R]_CS`.
    pub fn loss(&self) -> f64 {
        (self.mean_rate_cs - self.mean_rate_fr) / self.mean_rate_cs
    }
}

pub fn rate_loss(config: &NetworkConfig, tier: usize) -> Result<RateComparison> {
    if tier >= config.num_tiers() {
        return Err(Error::invalid(
            "tier",
            format!("index {tier} out of range for {} tiers", config.num_tiers()),
        ));
    }
    let rate = |mode| CoverageModel::new(config.with_mode(tier, mode))?.spectral_efficiency();
    Ok(RateComparison {
        mean_rate_cs: rate(SchedulingMode::Cs)?,
        mean_rate_fr: rate(SchedulingMode::Fr)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::db_to_linear;
    use crate::fading::FadingDist;

    fn small_cell(delta: f64, t: f64) -> TierParams {
        TierParams::new(16e-6, 1.0, 3.8, delta, t, FadingDist::nakagami(2.3).unwrap()).unwrap()
    }

    #[test]
    fn baseline_point_has_no_increase() {
        let t = small_cell(1e-6, 2e-6);
        let q = LoadQuery::new(t, 1e-6, 2e-6).unwrap();
        assert_eq!(load_increase(&q).unwrap(), 0.0);
    }

    #[test]
    fn deterministic_closed_form() {
        let t = TierParams::new(1e-5, 1.0, 4.0, 1e-6, 1e-6, FadingDist::Deterministic).unwrap();
        let q = LoadQuery::new(t, 4e-6, 4e-6).unwrap();
        assert!((load_increase(&q).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn saving_anchors() {
        let delta = 1e-6;
        for (offset, want) in [(-3.0, 0.054), (3.0, 0.352), (6.0, 0.543)] {
            let g = resource_saving(&small_cell(delta, delta * db_to_linear(offset))).unwrap();
            assert!((g - want).abs() < 0.005, "offset {offset}: {g}");
        }
        assert_eq!(resource_saving(&small_cell(delta, 0.0)).unwrap(), 0.0);
        let t = TierParams::new(1e-5, 1.0, 4.0, 1.0, 4.0, FadingDist::Deterministic).unwrap();
        assert!((resource_saving(&t).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn missing_activation_threshold_is_rejected() {
        assert!(LoadQuery::new(small_cell(1e-6, 0.0), 1e-6, 1e-6).is_err());
    }
}
