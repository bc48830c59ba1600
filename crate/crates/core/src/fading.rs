//! Unit-mean power fading laws.
//!
//! Nakagami-m power gains are Gamma(m, 1/m): mean 1, variance 1/m.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::quadrature::{integrate_split, Tolerance};
use crate::numerics::special::{ln_gamma, regularized_upper};

/// Tail mass beyond the quadrature cut-off.
const TAIL_MASS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NakagamiShape(f64);

impl NakagamiShape {
    pub fn m(self) -> f64 {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FadingDist {
    Nakagami(NakagamiShape),
    /// No fading: g = 1.
    Deterministic,
}

/// JSON form of a fading law: `{"nakagami_m": 1.8}` or `{"deterministic": true}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum FadingSpec {
    Nakagami { nakagami_m: f64 },
    Deterministic { deterministic: bool },
}

impl TryFrom<FadingSpec> for FadingDist {
    type Error = Error;

    fn try_from(spec: FadingSpec) -> Result<Self> {
        match spec {
            FadingSpec::Nakagami { nakagami_m } => FadingDist::nakagami(nakagami_m),
            FadingSpec::Deterministic {
                deterministic: true,
            } => Ok(FadingDist::Deterministic),
            FadingSpec::Deterministic {
                deterministic: false,
            } => Err(Error::invalid(
                "fading",
                "`deterministic: false` does not name a fading law",
            )),
        }
    }
}

impl From<FadingDist> for FadingSpec {
    fn from(d: FadingDist) -> Self {
        match d {
            FadingDist::Nakagami(s) => FadingSpec::Nakagami { nakagami_m: s.0 },
            FadingDist::Deterministic => FadingSpec::Deterministic {
                deterministic: true,
            },
        }
    }
}

impl FadingDist {
    pub fn nakagami(m: f64) -> Result<Self> {
        if !m.is_finite() || m < 0.5 {
            return Err(Error::invalid(
                "nakagami_m",
                format!("must be finite and at least 0.5, got {m}"),
            ));
        }
        Ok(FadingDist::Nakagami(NakagamiShape(m)))
    }

    /// Rayleigh fading (exponential power gain).
    pub fn rayleigh() -> Self {
        FadingDist::Nakagami(NakagamiShape(1.0))
    }

    pub fn mean(&self) -> f64 {
        1.0
    }

    pub fn second_moment(&self) -> f64 {
        match self {
            FadingDist::Nakagami(s) => 1.0 + 1.0 / s.0,
            FadingDist::Deterministic => 1.0,
        }
    }

    /// Density of the power gain; `None` for the deterministic law.
    pub fn pdf(&self, g: f64) -> Option<f64> {
        match self {
            FadingDist::Nakagami(s) => {
                let m = s.0;
                if g <= 0.0 {
                    return Some(0.0);
                }
                Some((m * m.ln() + (m - 1.0) * g.ln() - m * g - ln_gamma(m)).exp())
            }
            FadingDist::Deterministic => None,
        }
    }

    pub fn sampler(&self) -> FadingSampler {
        match self {
            FadingDist::Nakagami(s) => FadingSampler::Gamma(
                Gamma::new(s.0, 1.0 / s.0).expect("shape validated at construction"),
            ),
            FadingDist::Deterministic => FadingSampler::Unit,
        }
    }

    /// Draws one gain. Prefer [`FadingDist::sampler`] in loops.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.sampler().sample(rng)
    }

    /// Upper integration limit beyond which the law has less than 1e-12 mass.
    fn cutoff(m: f64) -> Result<f64> {
        let mut g = 2.0;
        while regularized_upper(m, m * g)? > TAIL_MASS {
            g *= 1.5;
        }
        Ok(g)
    }

    /// E[φ(g)] by adaptive quadrature, split at every declared kink.
    pub fn expect<F: Fn(f64) -> f64>(&self, phi: F, kinks: &[f64]) -> Result<f64> {
        match *self {
            FadingDist::Deterministic => Ok(phi(1.0)),
            FadingDist::Nakagami(s) => {
                let m = s.0;
                let g_max = Self::cutoff(m)?;
                let log_norm = m * m.ln() - ln_gamma(m);
                let tol = Tolerance::relative(1e-11);
                if m >= 1.0 {
                    let integrand = |g: f64| {
                        // Kronrod nodes are interior, so g = 0 is never sampled.
                        phi(g) * (log_norm + (m - 1.0) * g.ln() - m * g).exp()
                    };
                    Ok(integrate_split(integrand, 0.0, g_max, kinks, tol)?.value)
                } else {
                    // Substitute x = g^m on the first piece to remove the g^{m-1} pole.
                    let first = kinks
                        .iter()
                        .copied()
                        .filter(|k| *k > 0.0 && *k < g_max)
                        .fold(g_max, f64::min);
                    let head = |x: f64| {
                        let g = x.powf(1.0 / m);
                        phi(g) * ((log_norm - m.ln()) - m * g).exp()
                    };
                    let mut total =
                        integrate_split(head, 0.0, first.powf(m), &[], tol)?.value;
                    if first < g_max {
                        let tail = |g: f64| phi(g) * (log_norm + (m - 1.0) * g.ln() - m * g).exp();
                        total += integrate_split(tail, first, g_max, kinks, tol)?.value;
                    }
                    Ok(total)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub enum FadingSampler {
    Gamma(Gamma<f64>),
    Unit,
}

impl Distribution<f64> for FadingSampler {
    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FadingSampler::Gamma(g) => g.sample(rng),
            FadingSampler::Unit => 1.0,
        }
    }
}
