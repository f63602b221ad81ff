//! Bessel functions of the first kind for real order.

use statrs::function::gamma::gamma;
use std::f64::consts::PI;

/// Power series below this argument, large-argument expansion above.
pub const SERIES_SWITCH: f64 = 15.0;

/// `J_ν(x)` for `x ≥ 0`. Negative integer orders use `J_{−n} = (−1)ⁿ J_n`;
/// other negative orders are evaluated from the series directly.
pub fn bessel_j(nu: f64, x: f64) -> f64 {
    assert!(x >= 0.0, "bessel_j needs a non-negative argument");
    if nu < 0.0 && nu.fract() == 0.0 {
        let n = -nu;
        let s = if (n as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return s * bessel_j(n, x);
    }
    if x == 0.0 {
        return if nu == 0.0 {
            1.0
        } else if nu > 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
    }
    if x < SERIES_SWITCH {
        series(nu, x)
    } else {
        asymptotic(nu, x)
    }
}

fn series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = half.powf(nu) / gamma(nu + 1.0);
    let mut sum = term;
    let q = -half * half;
    for k in 1..300 {
        let k = k as f64;
        term *= q / (k * (nu + k));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() && k > half {
            break;
        }
    }
    sum
}

fn asymptotic(nu: f64, x: f64) -> f64 {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut a = 1.0;
    let mut last = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        a *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        if a.abs() >= last || a == 0.0 {
            break;
        }
        last = a.abs();
        match k % 4 {
            1 => q += a,
            2 => p -= a,
            3 => q -= a,
            _ => p += a,
        }
        if a.abs() < 1e-17 {
            break;
        }
    }
    let w = x - 0.5 * nu * PI - 0.25 * PI;
    (2.0 / (PI * x)).sqrt() * (p * w.cos() - q * w.sin())
}
