//! JSON scenario files and the built-in presets.
//!
//! ```json
//! {"tiers":[{"density_per_km2":4,"power_dbm":46,"alpha":4.3,"delta_dbm":-69.6,
//!            "t_dbm":-69.6,"fading":{"nakagami_m":1.8},"mode":"FR"}]}
//! ```
//!
//! Powers are in dBm at the 1 m path-loss reference. `t_dbm` may be omitted,
//! which sets the activation threshold to zero (every cluster member active).

use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::config::{mw_to_dbm, NetworkConfig, SchedulingMode, TierParams};
use crate::error::{Error, Result};
use crate::fading::{FadingDist, FadingSpec};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TierSpec {
    pub density_per_km2: f64,
    pub power_dbm: f64,
    pub alpha: f64,
    pub delta_dbm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t_dbm: Option<f64>,
    pub fading: FadingSpec,
    #[serde(default = "default_mode")]
    pub mode: SchedulingMode,
}

fn default_mode() -> SchedulingMode {
    SchedulingMode::Fr
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub tiers: Vec<TierSpec>,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))?;
        Self::from_json(&text).map_err(|e| Error::Scenario(format!("{}: {e}", path.display())))
    }

    /// Validates every tier; errors carry the 1-based tier index.
    pub fn to_config(&self) -> Result<NetworkConfig> {
        if self.tiers.is_empty() {
            return Err(Error::Scenario("`tiers` must list at least one tier".into()));
        }
        let mut tiers = Vec::with_capacity(self.tiers.len());
        let mut modes = Vec::with_capacity(self.tiers.len());
        for (i, spec) in self.tiers.iter().enumerate() {
            let tier = FadingDist::try_from(spec.fading)
                .and_then(|fading| {
                    TierParams::from_db(
                        spec.density_per_km2,
                        spec.power_dbm,
                        spec.alpha,
                        spec.delta_dbm,
                        spec.t_dbm,
                        fading,
                    )
                })
                .map_err(|e| Error::Scenario(format!("tier {}: {e}", i + 1)))?;
            tiers.push(tier);
            modes.push(spec.mode);
        }
        NetworkConfig::new(tiers, modes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    /// Three tiers, frequency reuse everywhere.
    Table1,
    /// Macro plus small-cell tier, small-cell cluster threshold set for an
    /// expected cluster size of 5.
    TwoTierFig3,
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table1" => Ok(Preset::Table1),
            "twotier-fig3" => Ok(Preset::TwoTierFig3),
            other => Err(Error::Scenario(format!(
                "unknown preset `{other}` (expected `table1` or `twotier-fig3`)"
            ))),
        }
    }
}

fn table1_tiers() -> Vec<TierSpec> {
    let tier = |density, power, alpha, m, delta: f64, t_offset: f64| TierSpec {
        density_per_km2: density,
        power_dbm: power,
        alpha,
        delta_dbm: delta,
        t_dbm: Some(delta + t_offset),
        fading: FadingSpec::Nakagami { nakagami_m: m },
        mode: SchedulingMode::Fr,
    };
    vec![
        tier(4.0, 46.0, 4.3, 1.8, -69.6, 0.0),
        tier(16.0, 30.0, 3.8, 2.3, -63.1, 3.0),
        tier(40.0, 24.0, 3.5, 2.7, -49.5, 3.0),
    ]
}

/// Small-cell cluster size targeted by the two-tier preset.
pub const TWO_TIER_CLUSTER_SIZE: f64 = 5.0;

/// Offset of the small-cell activation threshold over its cluster threshold
/// in the two-tier preset, dB.
pub const TWO_TIER_T_OFFSET_DB: f64 = 3.0;

impl Preset {
    pub fn name(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::TwoTierFig3 => "twotier-fig3",
        }
    }

    pub fn scenario(self) -> Scenario {
        match self {
            Preset::Table1 => Scenario {
                tiers: table1_tiers(),
            },
            Preset::TwoTierFig3 => {
                let mut tiers = table1_tiers();
                tiers.truncate(2);
                let small = Scenario {
                    tiers: vec![tiers[1].clone()],
                }
                .to_config()
                .expect("built-in tier is valid");
                let delta = small
                    .tier(0)
                    .cluster_thresh_for_size(TWO_TIER_CLUSTER_SIZE)
                    .expect("positive target size");
                let delta_dbm = mw_to_dbm(delta);
                tiers[1].delta_dbm = delta_dbm;
                tiers[1].t_dbm = Some(delta_dbm + TWO_TIER_T_OFFSET_DB);
                Scenario { tiers }
            }
        }
    }

    pub fn config(self) -> NetworkConfig {
        self.scenario().to_config().expect("built-in preset is valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_round_trips() {
        let s = Preset::Table1.scenario();
        let back = Scenario::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(s, back);
        assert_eq!(s.to_config().unwrap(), back.to_config().unwrap());
    }

    #[test]
    fn cluster_sizes() {
        let c = Preset::Table1.config();
        let sizes: Vec<f64> = c.iter().map(|(t, _)| t.expected_cluster_size()).collect();
        for (s, want) in sizes.iter().zip([3.0, 4.0, 2.0]) {
            assert!((s / want - 1.0).abs() < 0.02, "{sizes:?}");
        }
        let two = Preset::TwoTierFig3.config();
        assert_eq!(two.num_tiers(), 2);
        assert!((two.tier(1).expected_cluster_size() - 5.0).abs() < 1e-9);
    }

    #[test]
    fn optional_threshold_and_mode() {
        let s = Scenario::from_json(
            r#"{"tiers":[{"density_per_km2":4,"power_dbm":46,"alpha":4.3,
                "delta_dbm":-69.6,"fading":{"deterministic":true}}]}"#,
        )
        .unwrap();
        let c = s.to_config().unwrap();
        assert_eq!(c.tier(0).activation_thresh(), 0.0);
        assert_eq!(c.mode(0), SchedulingMode::Fr);
    }

    #[test]
    fn errors_name_tier_and_field() {
        let s = Scenario::from_json(
            r#"{"tiers":[{"density_per_km2":4,"power_dbm":46,"alpha":1.5,
                "delta_dbm":-69.6,"fading":{"nakagami_m":2}}]}"#,
        )
        .unwrap();
        let msg = s.to_config().unwrap_err().to_string();
        assert!(msg.contains("tier 1") && msg.contains("pathloss_exp"), "{msg}");
        let e = Scenario::from_json(r#"{"tiers":[{"density":4}]}"#).unwrap_err();
        assert!(e.to_string().contains("line"), "{e}");
        assert!("nope".parse::<Preset>().is_err());
    }
}
