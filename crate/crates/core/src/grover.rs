//! Closed-form quantities of the single-marked-item Grover search and the
//! pseudopure ensemble built on top of it.
//!
//! After `q` Grover iterates the pure component of the state is
//! `alpha_q |s> + beta_q / sqrt(N-1) * sum_{x != s} |x>` with
//! `alpha_q = sin((2q+1) theta / 2)` and `theta = arccos(1 - 2/N)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How the oracle-invocation count and effective polarization are modelled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// `N = 2^n`, `q = q_std(N)` unless overridden, effective polarization
    /// evaluated from the exact amplitudes.
    Exact,
    /// `N >> 1`, `q = nint(pi sqrt(N) / 4)`, effective polarization equal to
    /// the polarization.
    Typical,
}

impl std::str::FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Scenario::Exact),
            "typical" => Ok(Scenario::Typical),
            other => Err(Error::domain(format!("unknown scenario `{other}`"))),
        }
    }
}

impl std::fmt::Display for Scenario {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scenario::Exact => "exact",
            Scenario::Typical => "typical",
        })
    }
}

/// Nearest integer, ties rounded away from zero.
///
/// Values within `1e-12` of a half-integer are treated as exact ties so that
/// rounding noise in `pi / (2 theta)` cannot flip the result at `N = 2`.
pub fn nint(x: f64) -> f64 {
    let frac = x - x.trunc();
    if (frac.abs() - 0.5).abs() <= 1e-12 {
        x.trunc() + 0.5_f64.copysign(x) * 2.0
    } else {
        x.round()
    }
}

/// Number of qubits `n = ceil(log2 N)`.
pub fn qubit_count(n_db: u64) -> u32 {
    if n_db <= 1 {
        0
    } else {
        u64::BITS - (n_db - 1).leading_zeros()
    }
}

fn check_db(n_db: u64) -> Result<()> {
    if n_db < 2 {
        return Err(Error::domain(format!("database size must be >= 2, got {n_db}")));
    }
    Ok(())
}

/// Grover rotation angle `arccos(1 - 2/N)`, in radians.
///
/// Evaluated as `2 asin(1/sqrt(N))`, which is the same angle but does not
/// lose digits to the cancellation in `1 - 2/N` for large `N`.
pub fn theta(n_db: u64) -> Result<f64> {
    check_db(n_db)?;
    Ok(2.0 * (1.0 / (n_db as f64).sqrt()).asin())
}

/// Standard iteration count `nint(pi / (2 theta) - 1/2)`.
pub fn q_std(n_db: u64) -> Result<u64> {
    let th = theta(n_db)?;
    Ok(nint(PI / (2.0 * th) - 0.5) as u64)
}

/// Iteration count used in the typical scenario, `nint(pi sqrt(N) / 4)`.
pub fn q_typical(n_db: u64) -> Result<u64> {
    check_db(n_db)?;
    Ok(nint(PI * (n_db as f64).sqrt() / 4.0) as u64)
}

/// Amplitudes `(alpha_q, beta_q)` on the marked item and on the uniform
/// superposition of unmarked items after `q` iterates.
pub fn amplitudes(n_db: u64, q: u64) -> Result<(f64, f64)> {
    let th = theta(n_db)?;
    let phase = (2.0 * q as f64 + 1.0) * th / 2.0;
    Ok(phase.sin_cos())
}

/// `eps (alpha_q^2 N - 1) / (N - 1)`.
///
/// Fails when `q` over-rotates far enough that `alpha_q^2 < 1/N`, which would
/// make the effective polarization negative.
pub fn effective_polarization(eps: f64, n_db: u64, q: u64) -> Result<f64> {
    check_probability("polarization", eps)?;
    let (alpha, _) = amplitudes(n_db, q)?;
    let n = n_db as f64;
    let factor = (alpha * alpha * n - 1.0) / (n - 1.0);
    if factor < -1e-15 {
        return Err(Error::domain(format!(
            "q = {q} gives alpha^2 < 1/N for N = {n_db}; effective polarization would be negative"
        )));
    }
    Ok((eps * factor).clamp(0.0, eps))
}

/// Probability that one ensemble member reports the correct value of a bit.
pub fn member_correct_probability(eps_eff: f64) -> f64 {
    (1.0 + eps_eff) / 2.0
}

pub(crate) fn check_probability(what: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::domain(format!("{what} must lie in [0, 1], got {p}")));
    }
    Ok(())
}

/// Database size, qubit count, scenario and oracle-invocation count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub n_db: u64,
    pub n_qubits: u32,
    pub scenario: Scenario,
    pub q: u64,
}

impl ProblemSpec {
    /// Builds a problem, deriving `q` from the scenario unless `q_override`
    /// is given.
    pub fn new(n_db: u64, scenario: Scenario, q_override: Option<u64>) -> Result<Self> {
        check_db(n_db)?;
        if scenario == Scenario::Exact && !n_db.is_power_of_two() {
            return Err(Error::domain(format!(
                "exact scenario requires N = 2^n, got {n_db}"
            )));
        }
        let q = match (q_override, scenario) {
            (Some(q), _) => q,
            (None, Scenario::Exact) => q_std(n_db)?,
            (None, Scenario::Typical) => q_typical(n_db)?,
        };
        if q == 0 {
            return Err(Error::domain("q must be at least 1"));
        }
        if scenario == Scenario::Exact {
            effective_polarization(1.0, n_db, q)?;
        }
        Ok(Self {
            n_db,
            n_qubits: qubit_count(n_db),
            scenario,
            q,
        })
    }

    pub fn exact(n_db: u64) -> Result<Self> {
        Self::new(n_db, Scenario::Exact, None)
    }

    pub fn typical(n_db: u64) -> Result<Self> {
        Self::new(n_db, Scenario::Typical, None)
    }

    pub fn grover_state(&self) -> GroverState {
        GroverState::new(self.n_db, self.q).expect("validated problem")
    }

    /// Effective polarization seen by each qubit of each ensemble member.
    pub fn effective_polarization(&self, eps: f64) -> Result<f64> {
        match self.scenario {
            Scenario::Typical => {
                check_probability("polarization", eps)?;
                Ok(eps)
            }
            Scenario::Exact => effective_polarization(eps, self.n_db, self.q),
        }
    }

    /// Largest ensemble size for which the matched classical search may
    /// still fail, `floor(N / q)`.
    pub fn m_max(&self) -> u64 {
        self.n_db / self.q
    }

    pub fn ensemble(&self, m: u64, eps: f64) -> Result<EnsembleSpec> {
        EnsembleSpec::new(self, m, eps)
    }
}

/// Angle and amplitudes of the pure component after `q` iterates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GroverState {
    pub theta: f64,
    pub alpha: f64,
    pub beta: f64,
    pub p_correct_conventional: f64,
}

impl GroverState {
    pub fn new(n_db: u64, q: u64) -> Result<Self> {
        let theta = theta(n_db)?;
        let (alpha, beta) = amplitudes(n_db, q)?;
        Ok(Self {
            theta,
            alpha,
            beta,
            p_correct_conventional: alpha * alpha,
        })
    }
}

/// Ensemble size and polarization for a given problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub m: u64,
    pub eps: f64,
    pub eps_eff: f64,
    pub m_min: u64,
}

impl EnsembleSpec {
    pub fn new(problem: &ProblemSpec, m: u64, eps: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::domain("ensemble size must be at least 1"));
        }
        Ok(Self {
            m,
            eps,
            eps_eff: problem.effective_polarization(eps)?,
            m_min: m_min(m),
        })
    }
}

/// Smallest vote count that is a strict majority, `ceil((M + 1) / 2)`.
pub fn m_min(m: u64) -> u64 {
    (m + 2) / 2
}
