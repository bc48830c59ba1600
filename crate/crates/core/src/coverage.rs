//! Semi-closed-form coverage probability under non-coherent joint transmission.
//!
//! With the interference replaced by its Gamma surrogate (shape ν, scale θ),
//! coverage at threshold β reduces to `1 - E[Γ(ν, P/θβ)/Γ(ν)]`. Rounding ν up
//! or down to an integer n turns the expectation into a finite sum
//!
//! ```text
//! 1 - Σ_{m<n} E[x^m e^{-x}] / m!,   x = P / (θβ)
//! ```
//!
//! which is a lower bound for n = ⌈ν⌉ and an upper bound for n = ⌊ν⌋. Each
//! summand is a derivative of the signal Laplace transform, obtained from the
//! log-transform derivatives through complete Bell polynomials.
//!
//! Transforms are written as `u ↦ E[e^{-uP}]` with `u = 1/(θβ) ≥ 0`, so every
//! derivative that enters the series is nonnegative.

use std::cell::RefCell;
use std::f64::consts::PI;

use rayon::prelude::*;

use crate::config::{NetworkConfig, TierParams};
use crate::error::{Error, Result};
use crate::interference::{fit_gamma, GammaApprox};
use crate::numerics::bell::{binomial, power_faa_di_bruno, BellAccumulator, MAX_ORDER};
use crate::numerics::quadrature::{integrate, Tolerance};
use crate::numerics::special::upper_inc_gamma;

/// `E[e^{-uP_k}]` with the tier's true activation threshold (scheduling mode
/// only affects interference, never the signal set).
///
/// Returns the logarithm. `u = +∞` yields `log P(P_k = 0)`.
pub fn log_laplace_signal(tier: &TierParams, u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(Error::domain("log_laplace_signal", format!("u must be ≥ 0, got {u}")));
    }
    if u == 0.0 {
        return Ok(0.0);
    }
    let d = tier.area_exponent();
    let kinks: Vec<f64> = tier.activation_kink().into_iter().collect();
    let prefactor = PI * tier.campbell_scale();
    if u.is_infinite() {
        let e = tier.fading().expect(|g| tier.signal_floor(g).powf(-d), &kinks)?;
        return Ok(-prefactor * e);
    }
    let e = tier.fading().expect(
        |g| {
            let floor = tier.signal_floor(g);
            let x = u * g * floor;
            let tail = upper_inc_gamma(1.0 - d, x).unwrap_or(f64::NAN);
            floor.powf(-d) * -(-x).exp_m1() + (u * g).powf(d) * tail
        },
        &kinks,
    )?;
    Ok(-prefactor * e)
}

/// E[g^{2/α} Γ(m - 2/α, (g/θβ) max{Δ, T/g})] for one tier.
fn derivative_expectation(tier: &TierParams, order: usize, theta_beta: f64) -> Result<f64> {
    let d = tier.area_exponent();
    let a = order as f64 - d;
    let kinks: Vec<f64> = tier.activation_kink().into_iter().collect();
    tier.fading().expect(
        |g| {
            let x = g * tier.signal_floor(g) / theta_beta;
            g.powf(d) * upper_inc_gamma(a, x).unwrap_or(f64::NAN)
        },
        &kinks,
    )
}

fn check_derivative_args(order: usize, theta_beta: f64) -> Result<()> {
    if order == 0 {
        return Err(Error::domain("log_laplace_derivative", "order must be at least 1"));
    }
    if !(theta_beta > 0.0) || !theta_beta.is_finite() {
        return Err(Error::domain(
            "log_laplace_derivative",
            format!("θβ must be positive and finite, got {theta_beta}"),
        ));
    }
    Ok(())
}

/// m-th derivative in s of `log E[e^{sP_k}]` at `s = -1/(θβ)`; always positive.
pub fn log_laplace_derivative(tier: &TierParams, order: usize, theta_beta: f64) -> Result<f64> {
    check_derivative_args(order, theta_beta)?;
    let d = tier.area_exponent();
    let e = derivative_expectation(tier, order, theta_beta)?;
    Ok(2.0 * PI / tier.pathloss_exp()
        * tier.campbell_scale()
        * theta_beta.powf(order as f64 - d)
        * e)
}

/// The same derivative taken in the rescaled variable s·θβ, i.e. multiplied
/// by (θβ)^{-m}. Keeps the series in O(1) magnitudes for any β.
fn scaled_log_laplace_derivative(tier: &TierParams, order: usize, theta_beta: f64) -> Result<f64> {
    check_derivative_args(order, theta_beta)?;
    let d = tier.area_exponent();
    let e = derivative_expectation(tier, order, theta_beta)?;
    Ok(2.0 * PI / tier.pathloss_exp() * tier.campbell_scale() * theta_beta.powf(-d) * e)
}

/// `M_m = E[P^m e^{-P/(θβ)}]` for `m = 0 ..= m_max`.
pub fn weighted_signal_moments(
    config: &NetworkConfig,
    theta_beta: f64,
    m_max: usize,
) -> Result<Vec<f64>> {
    if m_max > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: m_max,
            max: MAX_ORDER,
        });
    }
    let u = 1.0 / theta_beta;
    let mut log_m0 = 0.0;
    for tier in config.tiers() {
        log_m0 += log_laplace_signal(tier, u)?;
    }
    let m0 = log_m0.exp();
    let mut acc = BellAccumulator::new();
    for j in 1..=m_max {
        let mut l = 0.0;
        for tier in config.tiers() {
            l += log_laplace_derivative(tier, j, theta_beta)?;
        }
        acc.push(l)?;
    }
    Ok(acc.bells().iter().map(|b| m0 * b).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageQuery<'a> {
    /// Linear SIR threshold.
    pub beta: f64,
    pub config: &'a NetworkConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageBounds {
    pub lower: f64,
    pub upper: f64,
    pub linear: f64,
    /// Magnitude of the last summand of the lower-bound series.
    pub gap: f64,
}

pub fn coverage_bounds(query: &CoverageQuery<'_>) -> Result<CoverageBounds> {
    CoverageModel::new(query.config.clone())?.bounds(query.beta)
}

fn clamp_probability(label: &str, beta: f64, p: f64) -> f64 {
    if !(0.0..=1.0).contains(&p) {
        log::debug!("{label} coverage {p:e} at β = {beta:e} clamped to [0, 1]");
    }
    p.clamp(0.0, 1.0)
}

fn bounds_from_terms(nu: f64, beta: f64, terms: &[f64]) -> CoverageBounds {
    let floor = nu.floor() as usize;
    let ceil = nu.ceil() as usize;
    let upper: f64 = 1.0 - terms[..floor].iter().sum::<f64>();
    let gap = if ceil > floor { terms[ceil - 1] } else { 0.0 };
    let lower = upper - gap;
    let linear = upper - (nu - nu.floor()) * gap;
    CoverageBounds {
        lower: clamp_probability("lower", beta, lower),
        upper: clamp_probability("upper", beta, upper),
        linear: clamp_probability("linear", beta, linear),
        gap,
    }
}

/// Unit-free Leibniz product of per-tier derivative sequences.
fn leibniz_product(a: &[f64], b: &[f64]) -> Vec<f64> {
    (0..a.len())
        .map(|n| (0..=n).map(|i| binomial(n, i) as f64 * a[i] * b[n - i]).sum())
        .collect()
}

/// Coverage analysis for one network and its interference surrogate.
#[derive(Debug, Clone)]
pub struct CoverageModel {
    config: NetworkConfig,
    fit: GammaApprox,
}

impl CoverageModel {
    pub fn new(config: NetworkConfig) -> Result<Self> {
        let fit = fit_gamma(&config)?;
        Self::with_fit(config, fit)
    }

    /// Uses a caller-supplied Gamma surrogate instead of the Campbell fit.
    pub fn with_fit(config: NetworkConfig, fit: GammaApprox) -> Result<Self> {
        let order = fit.nu.ceil() as usize;
        if !fit.nu.is_finite() || order > MAX_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_ORDER,
            });
        }
        Ok(CoverageModel { config, fit })
    }

    pub fn config(&self) -> &NetworkConfig {
        &self.config
    }

    pub fn fit(&self) -> &GammaApprox {
        &self.fit
    }

    fn theta_beta(&self, beta: f64) -> Result<f64> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::domain("coverage", format!("β must be positive, got {beta}")));
        }
        Ok(self.fit.theta * beta)
    }

    /// `E[x^m e^{-x}] / m!` for `x = P/(θβ)` and `m = 0 .. count`.
    pub fn series_terms(&self, beta: f64, count: usize) -> Result<Vec<f64>> {
        let theta_beta = self.theta_beta(beta)?;
        let u = 1.0 / theta_beta;
        let mut log_m0 = 0.0;
        for tier in self.config.tiers() {
            log_m0 += log_laplace_signal(tier, u)?;
        }
        let m0 = log_m0.exp();
        let mut acc = BellAccumulator::new();
        let mut terms = Vec::with_capacity(count);
        let mut factorial = 1.0;
        for m in 0..count {
            if m > 0 {
                let mut l = 0.0;
                for tier in self.config.tiers() {
                    l += scaled_log_laplace_derivative(tier, m, theta_beta)?;
                }
                acc.push(l)?;
                factorial *= m as f64;
            }
            terms.push(m0 * acc.bells()[m] / factorial);
        }
        Ok(terms)
    }

    pub fn bounds(&self, beta: f64) -> Result<CoverageBounds> {
        let terms = self.series_terms(beta, self.fit.nu.ceil() as usize)?;
        Ok(bounds_from_terms(self.fit.nu, beta, &terms))
    }

    /// Bounds over a grid; each point is computed independently, so the
    /// result does not depend on how the grid is scheduled across threads.
    pub fn bounds_grid(&self, betas: &[f64]) -> Result<Vec<CoverageBounds>> {
        betas.par_iter().map(|&b| self.bounds(b)).collect()
    }

    /// Limit of the coverage as β → 0⁺: the probability that at least one BS
    /// is active, `1 - Π_k P(P_k = 0)`.
    pub fn coverage_at_zero_threshold(&self) -> Result<f64> {
        let mut log_empty = 0.0;
        for tier in self.config.tiers() {
            log_empty += log_laplace_signal(tier, f64::INFINITY)?;
        }
        Ok(-log_empty.exp_m1())
    }

    /// Coverage from the linear blend of the bounds, with the β → 0 limit at 0.
    pub fn linear_coverage(&self, beta: f64) -> Result<f64> {
        if beta == 0.0 {
            return self.coverage_at_zero_threshold();
        }
        Ok(self.bounds(beta)?.linear)
    }

    /// Bounds conditioned on exactly `counts[k]` cluster members in tier k.
    pub fn conditional_bounds(&self, beta: f64, counts: &[u32]) -> Result<CoverageBounds> {
        let theta_beta = self.theta_beta(beta)?;
        let order = self.fit.nu.ceil() as usize;
        let derivs = conditional_derivatives(&self.config, counts, theta_beta, order, true)?;
        let mut factorial = 1.0;
        let terms: Vec<f64> = derivs
            .iter()
            .take(order)
            .enumerate()
            .map(|(m, v)| {
                if m > 0 {
                    factorial *= m as f64;
                }
                v / factorial
            })
            .collect();
        Ok(bounds_from_terms(self.fit.nu, beta, &terms))
    }

    /// Mean spectral efficiency `E[log2(1 + SIR)]` in bit/s/Hz from the
    /// linear coverage approximation.
    pub fn spectral_efficiency(&self) -> Result<f64> {
        rate_from_coverage(|beta| self.linear_coverage(beta))
    }
}

/// `∫_0^∞ P_c(2^τ - 1) dτ` for a coverage curve given as a function of the
/// linear threshold, truncated at the first integer τ where `P_c < 1e-6`.
pub fn rate_from_coverage<F>(coverage: F) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    const CUTOFF: f64 = 1e-6;
    const MAX_TAU: f64 = 128.0;
    let mut tau_max: f64 = 1.0;
    while coverage(tau_max.exp2() - 1.0)? >= CUTOFF {
        tau_max += 1.0;
        if tau_max > MAX_TAU {
            return Err(Error::IntegrationBudget(format!(
                "coverage still above {CUTOFF} at τ = {MAX_TAU}"
            )));
        }
    }
    let failure = RefCell::new(None);
    let integrand = |tau: f64| match coverage(tau.exp2() - 1.0) {
        Ok(p) => p,
        Err(e) => {
            failure.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let tol = Tolerance {
        rel: 1e-7,
        abs: 1e-9,
        max_intervals: 200,
    };
    let result = integrate(integrand, 0.0, tau_max, tol);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    match result {
        Ok(r) => Ok(r.value),
        Err(Error::Quadrature {
            value,
            error_estimate,
        }) => Err(Error::IntegrationBudget(format!(
            "rate integral stalled at {value} ± {error_estimate:e}"
        ))),
        Err(e) => Err(e),
    }
}

pub fn spectral_efficiency(config: &NetworkConfig) -> Result<f64> {
    CoverageModel::new(config.clone())?.spectral_efficiency()
}

/// `log E[e^{-uP_k} | C_k = count]`: each of the `count` cluster members is
/// uniform in the cluster disk, contributing `1 + log L_{P_k}(u) / E[C_k]`.
pub fn conditional_log_laplace(tier: &TierParams, count: u32, u: f64) -> Result<f64> {
    if count == 0 {
        return Ok(0.0);
    }
    let base = 1.0 + log_laplace_signal(tier, u)? / tier.expected_cluster_size();
    if !(base > 0.0) {
        return Err(Error::InvalidTransform { u, base });
    }
    Ok(count as f64 * base.ln())
}

/// Derivatives `0 ..= m_max` in s of `Π_k L_{P_k|C_k}(-s)` at `s = -1/(θβ)`.
/// With `scaled`, the derivatives are taken in `s·θβ`.
fn conditional_derivatives(
    config: &NetworkConfig,
    counts: &[u32],
    theta_beta: f64,
    m_max: usize,
    scaled: bool,
) -> Result<Vec<f64>> {
    if counts.len() != config.num_tiers() {
        return Err(Error::invalid(
            "counts",
            format!("{} counts for {} tiers", counts.len(), config.num_tiers()),
        ));
    }
    if m_max > MAX_ORDER {
        return Err(Error::UnsupportedOrder {
            order: m_max,
            max: MAX_ORDER,
        });
    }
    let u = 1.0 / theta_beta;
    let mut product = vec![0.0; m_max + 1];
    product[0] = 1.0;
    for (tier, &count) in config.tiers().iter().zip(counts) {
        if count == 0 {
            continue;
        }
        let inv_size = 1.0 / tier.expected_cluster_size();
        let base = 1.0 + log_laplace_signal(tier, u)? * inv_size;
        if !(base > 0.0) {
            return Err(Error::InvalidTransform { u, base });
        }
        let mut inner = Vec::with_capacity(m_max + 1);
        inner.push(base);
        for j in 1..=m_max {
            let l = if scaled {
                scaled_log_laplace_derivative(tier, j, theta_beta)?
            } else {
                log_laplace_derivative(tier, j, theta_beta)?
            };
            inner.push(inv_size * l);
        }
        let tier_derivs = (0..=m_max)
            .map(|m| power_faa_di_bruno(count, &inner, m))
            .collect::<Result<Vec<_>>>()?;
        product = leibniz_product(&product, &tier_derivs);
    }
    Ok(product)
}

/// `E[P^m e^{-P/(θβ)} | C]` for `m = 0 ..= m_max`.
pub fn conditional_signal_moments(
    config: &NetworkConfig,
    counts: &[u32],
    theta_beta: f64,
    m_max: usize,
) -> Result<Vec<f64>> {
    conditional_derivatives(config, counts, theta_beta, m_max, false)
}
