//! Special functions: log-gamma corrections, the binomial density in
//! saddle-point form, the regularized incomplete beta function and the
//! standard normal tail.

use std::f64::consts::PI;

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Iteration cap for the incomplete beta continued fraction.
pub const BETA_MAX_ITER: usize = 10_000;
/// Relative convergence tolerance for the incomplete beta continued fraction.
pub const BETA_TOLERANCE: f64 = 1e-14;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const FPMIN: f64 = 1e-300;

/// Error of Stirling's formula, `ln Gamma(n + 1) - (n + 1/2) ln n + n - ln sqrt(2 pi)`.
pub fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;

    if n > 15.0 {
        let nn = n * n;
        return (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n;
    }
    let ln_fact = if n.fract() == 0.0 {
        // n! is exact in f64 up to 22!.
        (1..=n as u64).map(|k| k as f64).product::<f64>().ln()
    } else {
        ln_gamma(n + 1.0)
    };
    ln_fact - (n + 0.5) * n.ln() + n - LN_SQRT_2PI
}

/// Deviance term `x ln(x / np) + np - x`, accurate when `x` is close to `np`.
pub fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// `ln [Gamma(n+1) / (Gamma(k+1) Gamma(n-k+1)) p^k q^(n-k)]` for real
/// `0 <= k <= n`, with `q = 1 - p` passed separately to avoid cancellation.
pub fn ln_binomial_density(k: f64, n: f64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if k == 0.0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if k == 0.0 {
        return if n == 0.0 {
            0.0
        } else if p < 0.1 {
            n * (-p).ln_1p()
        } else {
            n * q.ln()
        };
    }
    if k == n {
        return if q < 0.1 { n * (-q).ln_1p() } else { n * p.ln() };
    }
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(k, n * p) - bd0(n - k, n * q);
    let lf = (2.0 * PI).ln() + k.ln() + (-k / n).ln_1p();
    lc - 0.5 * lf
}

/// `ln [x^a (1-x)^b / (a B(a, b))]`, the prefactor of the continued fraction.
fn ln_beta_prefactor(a: f64, b: f64, x: f64) -> f64 {
    if a >= 1.0 && b >= 1.0 {
        ln_binomial_density(a, a + b - 1.0, x, 1.0 - x) + (1.0 - x).ln()
    } else {
        ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * (-x).ln_1p() - a.ln()
    }
}

/// Modified Lentz evaluation of the incomplete beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64> {
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < FPMIN {
        d = FPMIN;
    }
    d = 1.0 / d;
    let mut h = d;
    let mut delta = f64::INFINITY;
    for m in 1..=BETA_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = 1.0 + aa / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        delta = (del - 1.0).abs();
        if delta <= BETA_TOLERANCE {
            return Ok(h);
        }
    }
    Err(Error::NonConvergence {
        routine: "incomplete beta continued fraction",
        iterations: BETA_MAX_ITER,
        residual: delta,
    })
}

fn check_beta_args(p: f64, a: f64, b: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("incomplete beta argument must lie in [0, 1], got {p}")));
    }
    if !(a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!(
            "incomplete beta parameters must be positive and finite, got ({a}, {b})"
        )));
    }
    Ok(())
}

/// Regularized incomplete beta function `I_p(a, b)`.
pub fn regularized_incomplete_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_args(p, a, b)?;
    if p == 0.0 {
        return Ok(0.0);
    }
    if p == 1.0 {
        return Ok(1.0);
    }
    if p > (a + 1.0) / (a + b + 2.0) {
        let upper = (ln_beta_prefactor(b, a, 1.0 - p)).exp() * beta_continued_fraction(b, a, 1.0 - p)?;
        Ok((1.0 - upper).clamp(0.0, 1.0))
    } else {
        let lower = (ln_beta_prefactor(a, b, p)).exp() * beta_continued_fraction(a, b, p)?;
        Ok(lower.clamp(0.0, 1.0))
    }
}

/// Natural log of `I_p(a, b)`; stays finite far below the `f64` underflow
/// threshold.
pub fn ln_regularized_incomplete_beta(p: f64, a: f64, b: f64) -> Result<f64> {
    check_beta_args(p, a, b)?;
    if p == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if p == 1.0 {
        return Ok(0.0);
    }
    if p > (a + 1.0) / (a + b + 2.0) {
        let upper = (ln_beta_prefactor(b, a, 1.0 - p)).exp() * beta_continued_fraction(b, a, 1.0 - p)?;
        Ok((-upper.min(1.0)).ln_1p())
    } else {
        Ok(ln_beta_prefactor(a, b, p) + beta_continued_fraction(a, b, p)?.ln())
    }
}

/// Upper tail of the standard normal distribution, `1 - Phi(z)`.
pub fn normal_upper_tail(z: f64) -> f64 {
    0.5 * libm::erfc(z / std::f64::consts::SQRT_2)
}

/// `ln(exp(a) + exp(b))` without overflow.
pub fn ln_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}
