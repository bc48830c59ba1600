#![allow(dead_code)]

/// Complete Bell polynomials written out term by term.
pub fn expanded_bell(x: &[f64], n: usize) -> f64 {
    let x1 = x[0];
    let x2 = x.get(1).copied().unwrap_or(0.0);
    let x3 = x.get(2).copied().unwrap_or(0.0);
    let x4 = x.get(3).copied().unwrap_or(0.0);
    let x5 = x.get(4).copied().unwrap_or(0.0);
    let x6 = x.get(5).copied().unwrap_or(0.0);
    match n {
        0 => 1.0,
        1 => x1,
        2 => x1.powi(2) + x2,
        3 => x1.powi(3) + 3.0 * x1 * x2 + x3,
        4 => x1.powi(4) + 6.0 * x1.powi(2) * x2 + 4.0 * x1 * x3 + 3.0 * x2.powi(2) + x4,
        5 => {
            x1.powi(5)
                + 10.0 * x1.powi(3) * x2
                + 15.0 * x1 * x2.powi(2)
                + 10.0 * x1.powi(2) * x3
                + 10.0 * x2 * x3
                + 5.0 * x1 * x4
                + x5
        }
        6 => {
            x1.powi(6)
                + 15.0 * x1.powi(4) * x2
                + 20.0 * x1.powi(3) * x3
                + 45.0 * x1.powi(2) * x2.powi(2)
                + 15.0 * x2.powi(3)
                + 60.0 * x1 * x2 * x3
                + 15.0 * x1.powi(2) * x4
                + 10.0 * x3.powi(2)
                + 15.0 * x2 * x4
                + 6.0 * x1 * x5
                + x6
        }
        _ => panic!("expansion only written up to order 6"),
    }
}

/// Composite Simpson rule with `n` (even) panels.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        s += w * f(a + i as f64 * h);
    }
    s * h / 3.0
}

/// Richardson-extrapolated central difference.
pub fn derivative<F: Fn(f64) -> f64>(f: F, x: f64, h: f64) -> f64 {
    let d = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
