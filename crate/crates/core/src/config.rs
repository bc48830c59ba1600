//! Tier parameters and the K-tier network bundle.
//!
//! Everything is stored in SI-style units: densities per square meter, powers
//! in milliwatts, and the path-loss reference distance is 1 m, so `Δ` reads as
//! "received power in mW at 1 m". Decibel handling only happens in the
//! constructors and in the scenario parser.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fading::FadingDist;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    db_to_linear(dbm)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    linear_to_db(mw)
}

const PER_KM2_TO_PER_M2: f64 = 1e-6;

/// How cluster members that are not serving the typical user behave on the
/// joint-transmission resources.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchedulingMode {
    /// Coordinated scheduling: inactive cluster members stay silent.
    #[serde(rename = "CS")]
    Cs,
    /// Frequency reuse: inactive cluster members serve other users and interfere.
    #[serde(rename = "FR")]
    Fr,
}

impl std::fmt::Display for SchedulingMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SchedulingMode::Cs => f.write_str("CS"),
            SchedulingMode::Fr => f.write_str("FR"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TierParams {
    density: f64,
    power: f64,
    pathloss_exp: f64,
    cluster_thresh: f64,
    activation_thresh: f64,
    fading: FadingDist,
}

fn require_finite(field: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be finite, got {v}")))
    }
}

fn require_positive(field: &'static str, v: f64) -> Result<()> {
    require_finite(field, v)?;
    if v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

impl TierParams {
    /// Builds a tier from SI values. An activation threshold of zero means
    /// every cluster member is always active.
    pub fn new(
        density: f64,
        power: f64,
        pathloss_exp: f64,
        cluster_thresh: f64,
        activation_thresh: f64,
        fading: FadingDist,
    ) -> Result<Self> {
        require_positive("density", density)?;
        require_positive("power", power)?;
        require_finite("pathloss_exp", pathloss_exp)?;
        if pathloss_exp <= 2.0 {
            return Err(Error::invalid(
                "pathloss_exp",
                format!("must exceed 2, got {pathloss_exp}"),
            ));
        }
        require_positive("cluster_thresh", cluster_thresh)?;
        require_finite("activation_thresh", activation_thresh)?;
        if activation_thresh < 0.0 {
            return Err(Error::invalid(
                "activation_thresh",
                format!("must be nonnegative, got {activation_thresh}"),
            ));
        }
        Ok(TierParams {
            density,
            power,
            pathloss_exp,
            cluster_thresh,
            activation_thresh,
            fading,
        })
    }

    /// Builds a tier from the units used in deployment tables: BS/km², dBm.
    /// `t_dbm = None` encodes an activation threshold of zero.
    pub fn from_db(
        density_per_km2: f64,
        power_dbm: f64,
        alpha: f64,
        delta_dbm: f64,
        t_dbm: Option<f64>,
        fading: FadingDist,
    ) -> Result<Self> {
        require_finite("density_per_km2", density_per_km2)?;
        require_finite("power_dbm", power_dbm)?;
        require_finite("delta_dbm", delta_dbm)?;
        let activation = match t_dbm {
            Some(t) => {
                require_finite("t_dbm", t)?;
                dbm_to_mw(t)
            }
            None => 0.0,
        };
        Self::new(
            density_per_km2 * PER_KM2_TO_PER_M2,
            dbm_to_mw(power_dbm),
            alpha,
            dbm_to_mw(delta_dbm),
            activation,
            fading,
        )
    }

    /// BS density λ in BS/m².
    pub fn density(&self) -> f64 {
        self.density
    }

    /// Transmit power ρ in mW.
    pub fn power(&self) -> f64 {
        self.power
    }

    pub fn pathloss_exp(&self) -> f64 {
        self.pathloss_exp
    }

    /// Clustering threshold Δ in mW at the 1 m reference.
    pub fn cluster_thresh(&self) -> f64 {
        self.cluster_thresh
    }

    /// Activation threshold T in mW.
    pub fn activation_thresh(&self) -> f64 {
        self.activation_thresh
    }

    pub fn fading(&self) -> FadingDist {
        self.fading
    }

    /// 2/α, the exponent that maps received power thresholds to areas.
    pub fn area_exponent(&self) -> f64 {
        2.0 / self.pathloss_exp
    }

    /// Radius of the clustering disk: a BS at distance ≤ this is a cluster member.
    pub fn cluster_radius(&self) -> f64 {
        (self.cluster_thresh / self.power).powf(-1.0 / self.pathloss_exp)
    }

    /// Mean number of cluster members, λ π r_c².
    pub fn expected_cluster_size(&self) -> f64 {
        let r = self.cluster_radius();
        self.density * PI * r * r
    }

    /// Mean-RSS threshold a BS with fading `g` must clear to be an active
    /// cluster member: max{Δ, T/g}. Equals Δ when T is zero.
    pub fn signal_floor(&self, g: f64) -> f64 {
        if self.activation_thresh == 0.0 {
            self.cluster_thresh
        } else {
            self.cluster_thresh.max(self.activation_thresh / g)
        }
    }

    /// Fading value where `signal_floor` switches regime (g = T/Δ), if any.
    pub fn activation_kink(&self) -> Option<f64> {
        (self.activation_thresh > 0.0).then(|| self.activation_thresh / self.cluster_thresh)
    }

    /// ρ^{2/α} λ, the common prefactor of every Campbell integral over this tier.
    pub(crate) fn campbell_scale(&self) -> f64 {
        self.density * self.power.powf(self.area_exponent())
    }

    pub fn with_density(self, density: f64) -> Result<Self> {
        Self::new(
            density,
            self.power,
            self.pathloss_exp,
            self.cluster_thresh,
            self.activation_thresh,
            self.fading,
        )
    }

    pub fn with_power(self, power: f64) -> Result<Self> {
        Self::new(
            self.density,
            power,
            self.pathloss_exp,
            self.cluster_thresh,
            self.activation_thresh,
            self.fading,
        )
    }

    pub fn with_cluster_thresh(self, cluster_thresh: f64) -> Result<Self> {
        Self::new(
            self.density,
            self.power,
            self.pathloss_exp,
            cluster_thresh,
            self.activation_thresh,
            self.fading,
        )
    }

    pub fn with_activation_thresh(self, activation_thresh: f64) -> Result<Self> {
        Self::new(
            self.density,
            self.power,
            self.pathloss_exp,
            self.cluster_thresh,
            activation_thresh,
            self.fading,
        )
    }

    pub fn with_fading(self, fading: FadingDist) -> Self {
        TierParams { fading, ..self }
    }

    /// Clustering threshold that yields the requested mean cluster size.
    pub fn cluster_thresh_for_size(&self, mean_size: f64) -> Result<f64> {
        require_positive("mean_size", mean_size)?;
        let radius_sq = mean_size / (self.density * PI);
        Ok(self.power * radius_sq.powf(-self.pathloss_exp / 2.0))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkConfig {
    tiers: Vec<TierParams>,
    modes: Vec<SchedulingMode>,
}

impl NetworkConfig {
    pub fn new(tiers: Vec<TierParams>, modes: Vec<SchedulingMode>) -> Result<Self> {
        if tiers.is_empty() {
            return Err(Error::invalid("tiers", "at least one tier is required"));
        }
        if modes.len() != tiers.len() {
            return Err(Error::invalid(
                "scheduling_mode",
                format!("{} modes given for {} tiers", modes.len(), tiers.len()),
            ));
        }
        Ok(NetworkConfig { tiers, modes })
    }

    /// All tiers under the same scheduling mode.
    pub fn uniform(tiers: Vec<TierParams>, mode: SchedulingMode) -> Result<Self> {
        let modes = vec![mode; tiers.len()];
        Self::new(tiers, modes)
    }

    pub fn tiers(&self) -> &[TierParams] {
        &self.tiers
    }

    pub fn modes(&self) -> &[SchedulingMode] {
        &self.modes
    }

    pub fn mode(&self, k: usize) -> SchedulingMode {
        self.modes[k]
    }

    pub fn num_tiers(&self) -> usize {
        self.tiers.len()
    }

    pub fn tier(&self, k: usize) -> &TierParams {
        &self.tiers[k]
    }

    pub fn iter(&self) -> impl Iterator<Item = (&TierParams, SchedulingMode)> {
        self.tiers.iter().zip(self.modes.iter().copied())
    }

    pub fn with_tier(&self, k: usize, tier: TierParams) -> Self {
        let mut out = self.clone();
        out.tiers[k] = tier;
        out
    }

    pub fn with_mode(&self, k: usize, mode: SchedulingMode) -> Self {
        let mut out = self.clone();
        out.modes[k] = mode;
        out
    }

    /// Keeps the tiers at the given zero-based indices, in the given order.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let mut tiers = Vec::with_capacity(indices.len());
        let mut modes = Vec::with_capacity(indices.len());
        for &i in indices {
            if i >= self.tiers.len() {
                return Err(Error::invalid(
                    "tiers",
                    format!("tier {} does not exist (K = {})", i + 1, self.tiers.len()),
                ));
            }
            tiers.push(self.tiers[i]);
            modes.push(self.modes[i]);
        }
        Self::new(tiers, modes)
    }

    pub fn max_cluster_radius(&self) -> f64 {
        self.tiers
            .iter()
            .map(TierParams::cluster_radius)
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn table1_tier1() -> TierParams {
        TierParams::from_db(
            4.0,
            46.0,
            4.3,
            -69.6,
            Some(-69.6),
            FadingDist::nakagami(1.8).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn from_db_converts_units() {
        let t = table1_tier1();
        assert!((t.density() - 4e-6).abs() < 1e-20);
        assert!((t.power() / 10f64.powf(4.6) - 1.0).abs() < 1e-14);
        assert_eq!(dbm_to_mw(0.0), 1.0);
    }

    #[test]
    fn activation_threshold_relative_to_cluster() {
        let t = TierParams::from_db(
            16.0,
            30.0,
            3.8,
            -63.1,
            Some(-63.1 + 3.0),
            FadingDist::nakagami(2.3).unwrap(),
        )
        .unwrap();
        let expected = 10f64.powf((-63.1 + 3.0) / 10.0);
        assert!((t.activation_thresh() / expected - 1.0).abs() < 1e-14);
    }

    #[test]
    fn validation_names_the_field() {
        let f = FadingDist::Deterministic;
        let err = TierParams::from_db(4.0, 46.0, 2.0, -70.0, None, f).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "pathloss_exp", .. }));
        let err = TierParams::from_db(f64::NAN, 46.0, 4.0, -70.0, None, f).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "density_per_km2", .. }));
        let err = TierParams::new(1e-6, 1.0, 4.0, 0.0, 0.0, f).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "cluster_thresh", .. }));
        let err = TierParams::new(1e-6, 1.0, 4.0, 1.0, -1.0, f).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { field: "activation_thresh", .. }));
    }

    #[test]
    fn unit_reference_radius() {
        let t = TierParams::new(1e-6, 5.0, 3.7, 5.0, 0.0, FadingDist::Deterministic).unwrap();
        assert_eq!(t.cluster_radius(), 1.0);
    }

    #[test]
    fn table1_tier1_radius() {
        let r = table1_tier1().cluster_radius();
        let direct = (10f64.powf(-6.96) / 10f64.powf(4.6)).powf(-1.0 / 4.3);
        assert!((r / direct - 1.0).abs() < 1e-12);
        assert!((r - 487.0).abs() < 2.0, "radius {r}");
    }

    #[test]
    fn radius_vanishes_for_huge_threshold() {
        let t = TierParams::new(1e-6, 1.0, 4.0, 1e40, 0.0, FadingDist::Deterministic).unwrap();
        assert!(t.cluster_radius() < 1e-9);
    }

    #[test]
    fn cluster_size_inversion() {
        let t = table1_tier1();
        let d = t.cluster_thresh_for_size(5.0).unwrap();
        let s = t.with_cluster_thresh(d).unwrap().expected_cluster_size();
        assert!((s - 5.0).abs() < 1e-10);
    }

    #[test]
    fn cluster_size_monotone_on_grid() {
        let base = table1_tier1();
        let mut prev = f64::INFINITY;
        for i in 0..20 {
            let d = base.cluster_thresh() * db_to_linear(i as f64);
            let s = base.with_cluster_thresh(d).unwrap().expected_cluster_size();
            assert!(s < prev);
            prev = s;
        }
        let mut prev = 0.0;
        for i in 1..20 {
            let s = base.with_density(i as f64 * 1e-6).unwrap().expected_cluster_size();
            assert!(s > prev);
            prev = s;
        }
        let tiny = base.with_density(1e-300).unwrap().expected_cluster_size();
        assert!(tiny < 1e-290);
    }

    #[test]
    fn network_invariants() {
        let t = table1_tier1();
        assert!(NetworkConfig::new(vec![], vec![]).is_err());
        assert!(NetworkConfig::new(vec![t], vec![]).is_err());
        let n = NetworkConfig::uniform(vec![t, t], SchedulingMode::Fr).unwrap();
        assert_eq!(n.num_tiers(), 2);
        assert!(n.select(&[2]).is_err());
        assert_eq!(n.select(&[1]).unwrap().num_tiers(), 1);
    }

    proptest! {
        #[test]
        fn db_round_trip(db in -200.0f64..200.0) {
            let back = linear_to_db(db_to_linear(db));
            prop_assert!((back - db).abs() <= 1e-12 * db.abs().max(1.0));
        }

        #[test]
        fn linear_round_trip(exp in -30.0f64..30.0, mant in 1.0f64..10.0) {
            let x = mant * 10f64.powf(exp);
            let back = db_to_linear(linear_to_db(x));
            prop_assert!(((back - x) / x).abs() <= 1e-12);
        }
    }
}
