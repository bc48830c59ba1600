//! Complete and partial Bell polynomials for Faà di Bruno differentiation.
//!
//! With `f = exp`, the m-th derivative of `exp(h)` is `exp(h) · B_m(h', ..., h^(m))`
//! where `B_m` is the complete Bell polynomial, generated by
//! `B_{n+1} = Σ_{i=0}^{n} C(n, i) B_{n-i} h^(i+1)`.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Largest order supported by the precomputed binomial table.
pub const MAX_ORDER: usize = 64;

/// Values above this raise [`Error::BellOverflow`] instead of drifting into infinity.
pub const OVERFLOW_GUARD: f64 = 1e280;

fn pascal() -> &'static [[u64; MAX_ORDER + 1]; MAX_ORDER + 1] {
    static TABLE: OnceLock<[[u64; MAX_ORDER + 1]; MAX_ORDER + 1]> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = [[0u64; MAX_ORDER + 1]; MAX_ORDER + 1];
        for n in 0..=MAX_ORDER {
            t[n][0] = 1;
            for k in 1..=n {
                t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            }
        }
        t
    })
}

/// Exact binomial coefficient C(n, k) for n ≤ 64.
pub fn binomial(n: usize, k: usize) -> u64 {
    assert!(n <= MAX_ORDER, "binomial table covers n ≤ {MAX_ORDER}");
    if k > n {
        0
    } else {
        pascal()[n][k]
    }
}

fn check_order(order: usize) -> Result<()> {
    if order > MAX_ORDER {
        Err(Error::UnsupportedOrder {
            order,
            max: MAX_ORDER,
        })
    } else {
        Ok(())
    }
}

/// Incrementally accumulates complete Bell values as derivatives arrive.
#[derive(Debug, Clone)]
pub struct BellAccumulator {
    derivs: Vec<f64>,
    bells: Vec<f64>,
}

impl Default for BellAccumulator {
    fn default() -> Self {
        Self::new()
    }
}

impl BellAccumulator {
    pub fn new() -> Self {
        BellAccumulator {
            derivs: Vec::new(),
            bells: vec![1.0],
        }
    }

    /// Appends the next inner derivative and returns the newly available Bell value.
    pub fn push(&mut self, deriv: f64) -> Result<f64> {
        let n = self.derivs.len();
        check_order(n + 1)?;
        self.derivs.push(deriv);
        let next: f64 = (0..=n)
            .map(|i| binomial(n, i) as f64 * self.bells[n - i] * self.derivs[i])
            .sum();
        if !(next.abs() <= OVERFLOW_GUARD) {
            self.derivs.pop();
            return Err(Error::BellOverflow { order: n + 1 });
        }
        self.bells.push(next);
        Ok(next)
    }

    pub fn derivs(&self) -> &[f64] {
        &self.derivs
    }

    /// `B_0 ..= B_m` for the `m` derivatives pushed so far.
    pub fn bells(&self) -> &[f64] {
        &self.bells
    }

    pub fn order(&self) -> usize {
        self.derivs.len()
    }
}

/// Complete Bell polynomial values `B_0 ..= B_m` for derivatives `ℓ_1 ..= ℓ_m`.
pub fn complete_bell(derivs: &[f64]) -> Result<Vec<f64>> {
    let mut acc = BellAccumulator::new();
    for &d in derivs {
        acc.push(d)?;
    }
    Ok(acc.bells)
}

/// Partial Bell polynomials `B_{n,k}(x_1, ...)` for `0 ≤ k ≤ n ≤ m`, indexed `[n][k]`.
pub fn partial_bell_table(derivs: &[f64]) -> Result<Vec<Vec<f64>>> {
    let m = derivs.len();
    check_order(m)?;
    let mut t = vec![vec![0.0; m + 1]; m + 1];
    t[0][0] = 1.0;
    for n in 1..=m {
        for k in 1..=n {
            let mut acc = 0.0;
            for i in 1..=(n - k + 1) {
                acc += binomial(n - 1, i - 1) as f64 * derivs[i - 1] * t[n - i][k - 1];
            }
            if !(acc.abs() <= OVERFLOW_GUARD) {
                return Err(Error::BellOverflow { order: n });
            }
            t[n][k] = acc;
        }
    }
    Ok(t)
}

/// m-th derivative of `g(s)^power` from the values `g, g', ..., g^(m)` at a point.
///
/// The outer derivatives are the falling factorials
/// `power (power-1) ... (power-j+1) g^(power-j)`, which vanish for `j > power`.
pub fn power_faa_di_bruno(power: u32, inner: &[f64], m: usize) -> Result<f64> {
    if inner.len() < m + 1 {
        return Err(Error::domain(
            "power_faa_di_bruno",
            format!("need {} inner derivatives, got {}", m + 1, inner.len()),
        ));
    }
    let g = inner[0];
    if m == 0 {
        return Ok(g.powi(power as i32));
    }
    let table = partial_bell_table(&inner[1..=m])?;
    let mut falling = 1.0;
    let mut total = 0.0;
    for j in 1..=m.min(power as usize) {
        falling *= (power as usize + 1 - j) as f64;
        total += falling * g.powi((power as usize - j) as i32) * table[m][j];
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bell_numbers() {
        let b = complete_bell(&[1.0; 6]).unwrap();
        assert_eq!(b, vec![1.0, 1.0, 2.0, 5.0, 15.0, 52.0, 203.0]);
    }

    #[test]
    fn first_order_is_first_derivative() {
        let b = complete_bell(&[0.37]).unwrap();
        assert_eq!(b[1], 0.37);
    }

    #[test]
    fn empty_input_gives_unit() {
        assert_eq!(complete_bell(&[]).unwrap(), vec![1.0]);
    }

    #[test]
    fn binomial_table_is_exact() {
        assert_eq!(binomial(64, 32), 1_832_624_140_942_590_534);
        assert_eq!(binomial(10, 3), 120);
        assert_eq!(binomial(5, 7), 0);
    }

    #[test]
    fn order_beyond_table_is_rejected() {
        let r = complete_bell(&[0.5; 65]);
        assert!(matches!(r, Err(Error::UnsupportedOrder { order: 65, .. })));
    }

    #[test]
    fn overflow_guard_trips() {
        let r = complete_bell(&[1e200, 1e200, 1e200]);
        assert!(matches!(r, Err(Error::BellOverflow { order: 2 })));
    }

    #[test]
    fn power_rule_small_cases() {
        // C = 1 returns the inner derivative unchanged.
        let inner = [2.0, -0.5, 3.0, 7.0];
        assert_eq!(power_faa_di_bruno(1, &inner, 3).unwrap(), 7.0);
        // C = 2, m = 1: 2 g g'.
        assert_eq!(power_faa_di_bruno(2, &inner, 1).unwrap(), 2.0 * 2.0 * -0.5);
        // C = 0 is constant.
        assert_eq!(power_faa_di_bruno(0, &inner, 2).unwrap(), 0.0);
        assert_eq!(power_faa_di_bruno(3, &inner, 0).unwrap(), 8.0);
    }
}
