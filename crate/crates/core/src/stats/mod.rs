//! Failure and success probabilities of the bitwise majority-vote readout.
//!
//! The single-bit failure probability is available in three forms that are
//! interchangeable through [`FailureMethod`]: a direct binomial tail sum, the
//! incomplete beta representation and the large-`M` Gaussian approximation.

mod methods;
mod two_qubit;

pub use methods::{
    Auto, ExactBinomial, FailureMethod, Gaussian, IncompleteBeta, Method, MethodRegistry,
};
pub use two_qubit::{joint_prob_two_qubit, member_joint_table, psall_two_qubit, JointCount, TWO_QUBIT_MAX_M};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{check_probability, m_min, qubit_count, ProblemSpec};
use crate::special::{
    ln_add_exp, ln_regularized_incomplete_beta, normal_upper_tail, regularized_incomplete_beta,
};

/// Largest ensemble for which the direct binomial sum is attempted.
pub const EXACT_BINOMIAL_MAX_M: u64 = 10_000;

fn check_ensemble(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("ensemble size must be at least 1"));
    }
    Ok(())
}

/// Single-bit failure probability from the two half-weighted binomial tails.
///
/// Each member reports the wrong bit with probability `(1 - eps_eff) / 2`; the
/// vote fails when at least `M_min` members are wrong and fails with
/// probability 1/2 on a tie. Terms come from the ratio recurrence in log
/// space, anchored at the mode and normalised by the full sum, so no
/// factorial is ever formed.
pub fn pfail_one_exact(eps_eff: f64, m: u64) -> Result<f64> {
    check_probability("effective polarization", eps_eff)?;
    check_ensemble(m)?;
    if m > EXACT_BINOMIAL_MAX_M {
        return Err(Error::Guard {
            what: "exact binomial ensemble size",
            limit: EXACT_BINOMIAL_MAX_M,
            value: m,
        });
    }
    let p_wrong = (1.0 - eps_eff) / 2.0;
    if p_wrong == 0.0 {
        return Ok(0.0);
    }
    if eps_eff == 0.0 {
        // Every vote is a fair coin.
        return Ok(0.5);
    }
    let p_right = (1.0 + eps_eff) / 2.0;
    let log_odds = p_wrong.ln() - p_right.ln();

    // Log weights relative to the mode, where the dominant terms sit near 0.
    let step = |k: u64| ((m - k) as f64).ln() - ((k + 1) as f64).ln() + log_odds;
    let mode = (((m + 1) as f64 * p_wrong).floor() as u64).min(m);
    let mut weights = vec![0.0; m as usize + 1];
    for k in mode..m {
        weights[k as usize + 1] = weights[k as usize] + step(k);
    }
    for k in (0..mode).rev() {
        weights[k as usize] = weights[k as usize + 1] - step(k);
    }

    let tail = |from: u64| -> f64 {
        weights[from as usize..]
            .iter()
            .fold(f64::NEG_INFINITY, |acc, &w| ln_add_exp(acc, w))
    };
    let total = tail(0);
    let mm = m_min(m);
    let first = (tail(mm) - total).exp();
    let second = (tail(m - mm + 1) - total).exp();
    Ok(0.5 * (first + second))
}

/// Single-bit failure probability through the incomplete beta function,
/// `(I_p(M_min, M - M_min + 1) + I_p(M - M_min + 1, M_min)) / 2` with
/// `p = (1 - eps_eff) / 2`.
pub fn pfail_one_beta(eps_eff: f64, m: u64) -> Result<f64> {
    check_probability("effective polarization", eps_eff)?;
    check_ensemble(m)?;
    if eps_eff == 0.0 {
        return Ok(0.5);
    }
    let p = (1.0 - eps_eff) / 2.0;
    let (a, b) = beta_shape(m);
    if a == b {
        return regularized_incomplete_beta(p, a, b);
    }
    Ok(0.5 * (regularized_incomplete_beta(p, a, b)? + regularized_incomplete_beta(p, b, a)?))
}

/// Natural log of [`pfail_one_beta`], usable where the probability itself
/// underflows.
pub fn ln_pfail_one_beta(eps_eff: f64, m: u64) -> Result<f64> {
    check_probability("effective polarization", eps_eff)?;
    check_ensemble(m)?;
    let p = (1.0 - eps_eff) / 2.0;
    let (a, b) = beta_shape(m);
    let first = ln_regularized_incomplete_beta(p, a, b)?;
    let second = ln_regularized_incomplete_beta(p, b, a)?;
    Ok(ln_add_exp(first, second) - std::f64::consts::LN_2)
}

fn beta_shape(m: u64) -> (f64, f64) {
    let mm = m_min(m);
    (mm as f64, (m - mm + 1) as f64)
}

/// Gaussian approximation `1/2 - (Phi(eps sqrt(M)) - 1/2)`.
pub fn pfail_one_gauss(eps: f64, m: u64) -> Result<f64> {
    check_probability("polarization", eps)?;
    check_ensemble(m)?;
    Ok(normal_upper_tail(eps * (m as f64).sqrt()))
}

/// Arguments of a single-bit failure probability evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureProbabilityRequest {
    pub eps_eff: f64,
    pub m: u64,
    pub method: Method,
}

/// A probability together with the method that produced it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tagged {
    pub value: f64,
    pub method: &'static str,
}

/// Evaluates a request with the built-in methods.
pub fn pfail_one(request: &FailureProbabilityRequest) -> Result<Tagged> {
    let (value, method) = request
        .method
        .implementation()
        .evaluate_tagged(request.eps_eff, request.m)?;
    Ok(Tagged { value, method })
}

/// Upper bound on the single-bit failure probability at `eps = 1` and
/// `q = q_std`: `sqrt(2 / (pi M)) * 2(N-1)/(2N-3) * (2/(N-1))^(M/2)`.
pub fn pfail_one_eps1_bound(m: u64, n_db: u64) -> Result<f64> {
    Ok(ln_pfail_one_eps1_bound(m, n_db)?.exp())
}

/// Natural log of [`pfail_one_eps1_bound`].
pub fn ln_pfail_one_eps1_bound(m: u64, n_db: u64) -> Result<f64> {
    check_ensemble(m)?;
    if n_db < 3 {
        return Err(Error::domain(format!("bound requires N >= 3, got {n_db}")));
    }
    let (m, n) = (m as f64, n_db as f64);
    Ok(0.5 * (2.0 / (std::f64::consts::PI * m)).ln()
        + (2.0 * (n - 1.0) / (2.0 * n - 3.0)).ln()
        + 0.5 * m * (2.0 / (n - 1.0)).ln())
}

/// Bounds on the all-bit failure probability.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FailureBounds {
    pub lower: f64,
    pub upper: f64,
}

/// `p_fail_one <= p_fail_all <= min(1, n p_fail_one)` with `n = ceil(log2 N)`.
pub fn pfail_all_bounds(
    problem: &ProblemSpec,
    eps: f64,
    m: u64,
    method: &dyn FailureMethod,
) -> Result<FailureBounds> {
    let eps_eff = problem.effective_polarization(eps)?;
    let lower = method.evaluate(eps_eff, m)?;
    let n = f64::from(qubit_count(problem.n_db));
    Ok(FailureBounds {
        lower,
        upper: (n * lower).min(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_examples() {
        assert_eq!(pfail_one_exact(0.0, 101).unwrap(), 0.5);
        assert_eq!(pfail_one_exact(0.0, 7).unwrap(), 0.5);
        assert_eq!(pfail_one_beta(0.0, 7).unwrap(), 0.5);
        assert_eq!(pfail_one_exact(1.0, 17).unwrap(), 0.0);
        assert!((pfail_one_exact(0.2, 5).unwrap() - 0.31744).abs() < 1e-14);
        // Single member: fails exactly when it reports the wrong value.
        assert!((pfail_one_exact(0.3, 1).unwrap() - 0.35).abs() < 1e-15);
        // M = 2: wrong-wrong fails, a split vote fails half the time.
        let (w, r) = (0.35, 0.65);
        let want = w * w + 0.5 * 2.0 * w * r;
        assert!((pfail_one_exact(0.3, 2).unwrap() - want).abs() < 1e-15);
    }

    #[test]
    fn exact_guard() {
        assert!(matches!(
            pfail_one_exact(0.1, EXACT_BINOMIAL_MAX_M + 1),
            Err(Error::Guard { .. })
        ));
        assert!(pfail_one_exact(0.1, 0).is_err());
        assert!(pfail_one_exact(-0.1, 3).is_err());
    }

    #[test]
    fn beta_examples() {
        assert!((pfail_one_beta(0.0, 7).unwrap() - 0.5).abs() < 1e-14);
        assert!((pfail_one_beta(0.2, 5).unwrap() - 0.31744).abs() < 1e-14);
        assert_eq!(pfail_one_beta(1.0, 1000).unwrap(), 0.0);
        // 40-digit references from a direct binomial sum.
        let v = pfail_one_beta(0.1, 2001).unwrap();
        assert!(((v - 3.644_692_250_820_598_4e-6) / v).abs() < 1e-12);
        let v = pfail_one_beta(0.03, 1000).unwrap();
        assert!((v - 0.171_396_863_730_903_311_9).abs() < 1e-13);
    }

    #[test]
    fn beta_deep_tail() {
        let v = pfail_one_beta(0.5, 1001).unwrap();
        // Hoeffding: P(wrong majority) <= exp(-2 M (eps/2)^2).
        let hoeffding = (-2.0 * 1001.0 * 0.25_f64.powi(2)).exp();
        assert!(v < 1e-50 && v <= hoeffding);
        assert!(((v - 6.394_441_848_140_360_4e-65) / v).abs() < 1e-11);
        let lv = ln_pfail_one_beta(0.5, 1001).unwrap();
        assert!((lv - v.ln()).abs() < 1e-11);
    }

    #[test]
    fn gauss_examples() {
        assert_eq!(pfail_one_gauss(0.0, 12345).unwrap(), 0.5);
        let v = pfail_one_gauss(0.1, 100).unwrap();
        assert!((v - 0.158_655_253_931_457_05).abs() < 1e-14);
        let g = pfail_one_gauss(0.01, 1_000_000).unwrap();
        assert!(((g - 7.619_853_024_160_526e-24) / g).abs() < 1e-12);
        let b = pfail_one_beta(0.01, 1_000_000).unwrap();
        assert!(((g - b) / b).abs() < 0.1, "gauss {g} beta {b}");
    }

    #[test]
    fn dispatcher_examples() {
        let r = pfail_one(&FailureProbabilityRequest { eps_eff: 0.2, m: 5, method: Method::Auto }).unwrap();
        assert_eq!(r.method, "exact-binomial");
        assert!((r.value - 0.31744).abs() < 1e-14);
        let r = pfail_one(&FailureProbabilityRequest {
            eps_eff: 0.0,
            m: 1_000_000_000,
            method: Method::Auto,
        })
        .unwrap();
        assert_eq!(r.method, "gaussian");
        assert_eq!(r.value, 0.5);
        let r = pfail_one(&FailureProbabilityRequest {
            eps_eff: 0.2,
            m: 5,
            method: Method::IncompleteBeta,
        })
        .unwrap();
        assert_eq!(r.method, "incomplete-beta");
        assert!((r.value - 0.31744).abs() < 1e-14);
    }

    #[test]
    fn eps1_bound_examples() {
        let b = pfail_one_eps1_bound(100, 16).unwrap();
        let want = (2.0 / (100.0 * std::f64::consts::PI)).sqrt() * (30.0 / 29.0) * (2.0_f64 / 15.0).powi(50);
        assert!(((b - want) / want).abs() < 1e-12);
        assert!(pfail_one_eps1_bound(10, 1 << 40).unwrap() < 1e-50);
        assert!(pfail_one_eps1_bound(10, 2).is_err());

        let p = ProblemSpec::exact(8).unwrap();
        let eps_eff = p.effective_polarization(1.0).unwrap();
        let v = pfail_one_beta(eps_eff, 51).unwrap();
        assert!(v <= pfail_one_eps1_bound(51, 8).unwrap());
    }

    #[test]
    fn bounds_examples() {
        let p = ProblemSpec::exact(4).unwrap();
        let auto = Auto::default();
        let b = pfail_all_bounds(&p, 0.5, 3, &auto).unwrap();
        let exact_all = 1.0 - psall_two_qubit(0.5, 3).unwrap();
        assert!(b.lower <= exact_all && exact_all <= b.upper);

        let b = pfail_all_bounds(&p, 0.0, 9, &auto).unwrap();
        assert!((b.lower - 0.5).abs() < 1e-14);
        assert!((b.upper - 1.0).abs() < 1e-14);

        let t = ProblemSpec::typical(1 << 20).unwrap();
        let b = pfail_all_bounds(&t, 1.0, 9, &auto).unwrap();
        assert_eq!((b.lower, b.upper), (0.0, 0.0));
    }
}
