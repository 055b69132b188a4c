//! Bracketing root finder.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stopping rule for [`bisect`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bisection {
    /// Bracket width at which the search may stop.
    pub x_tol: f64,
    /// Largest accepted `|f(x)|` at the returned point.
    pub f_tol: f64,
    pub max_iter: usize,
}

impl Default for Bisection {
    fn default() -> Self {
        Self {
            x_tol: 1e-10,
            f_tol: 1e-9,
            max_iter: 200,
        }
    }
}

/// A located root and how it was reached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Root {
    pub x: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    /// `|f(x)|` at the returned point.
    pub residual: f64,
}

/// Bisection on `[lo, hi]` for a continuous `f` whose endpoint values do not
/// share a sign.
///
/// Stops once the bracket is narrower than `x_tol` and the residual is below
/// `f_tol`, or when the bracket can no longer be split in `f64`.
pub fn bisect<F>(mut f: F, lo: f64, hi: f64, cfg: &Bisection) -> Result<Root>
where
    F: FnMut(f64) -> Result<f64>,
{
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::domain(format!("empty bracket [{lo}, {hi}]")));
    }
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    if f_lo == 0.0 {
        return Ok(Root { x: lo, iterations: 0, bracket_width: 0.0, residual: 0.0 });
    }
    if f_hi == 0.0 {
        return Ok(Root { x: hi, iterations: 0, bracket_width: 0.0, residual: 0.0 });
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::domain(format!(
            "root not bracketed: f({lo}) = {f_lo:e}, f({hi}) = {f_hi:e}"
        )));
    }
    let lo_negative = f_lo < 0.0;
    let mut best = if f_lo.abs() <= f_hi.abs() { (lo, f_lo.abs()) } else { (hi, f_hi.abs()) };

    for iteration in 1..=cfg.max_iter {
        let mid = lo + 0.5 * (hi - lo);
        if mid <= lo || mid >= hi {
            return Ok(Root { x: best.0, iterations: iteration - 1, bracket_width: hi - lo, residual: best.1 });
        }
        let f_mid = f(mid)?;
        if f_mid.abs() <= best.1 {
            best = (mid, f_mid.abs());
        }
        if f_mid == 0.0 {
            return Ok(Root { x: mid, iterations: iteration, bracket_width: hi - lo, residual: 0.0 });
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= cfg.x_tol && best.1 <= cfg.f_tol {
            return Ok(Root { x: best.0, iterations: iteration, bracket_width: hi - lo, residual: best.1 });
        }
    }
    Err(Error::NonConvergence {
        routine: "bisection",
        iterations: cfg.max_iter,
        residual: best.1,
    })
}
