//! Exact joint law of the two vote tallies for `N = 4`.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_factorial;

use crate::error::{Error, Result};
use crate::grover::check_probability;

/// Cost guard on the ensemble size for the two-qubit sums.
pub const TWO_QUBIT_MAX_M: u64 = 500;

/// Numbers of members that reported the correct value on qubit 1 and qubit 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointCount {
    pub k1: u64,
    pub k2: u64,
}

/// Single-member outcome probabilities for `N = 4`, `q = 1`, marked item `11`,
/// indexed `[bit2][bit1]`.
pub fn member_joint_table(eps: f64) -> [[f64; 2]; 2] {
    let off = (1.0 - eps) / 4.0;
    [[off, off], [off, (1.0 + 3.0 * eps) / 4.0]]
}

fn check_m(m: u64) -> Result<()> {
    if m == 0 {
        return Err(Error::domain("ensemble size must be at least 1"));
    }
    if m > TWO_QUBIT_MAX_M {
        return Err(Error::Guard {
            what: "two-qubit ensemble size",
            limit: TWO_QUBIT_MAX_M,
            value: m,
        });
    }
    Ok(())
}

// n ln(y) from ln(y), with 0 ln 0 = 0.
fn times_ln(n: u64, ln_y: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * ln_y
    }
}

fn joint_unchecked(k1: u64, k2: u64, m: u64, ln_off: f64, ln_hit: f64, ln_fact: &[f64]) -> f64 {
    let lo = (k1 + k2).saturating_sub(m);
    let hi = k1.min(k2);
    (lo..=hi)
        .map(|l| {
            let ln_multinomial = ln_fact[m as usize]
                - ln_fact[(m + l - k1 - k2) as usize]
                - ln_fact[(k1 - l) as usize]
                - ln_fact[(k2 - l) as usize]
                - ln_fact[l as usize];
            (ln_multinomial + times_ln(m - l, ln_off) + times_ln(l, ln_hit)).exp()
        })
        .sum()
}

fn ln_factorials(m: u64) -> Vec<f64> {
    (0..=m).map(ln_factorial).collect()
}

/// Probability that `k1` members are correct on qubit 1 and `k2` on qubit 2,
/// summing the multinomial over the number `l` of members correct on both.
pub fn joint_prob_two_qubit(k1: u64, k2: u64, m: u64, eps: f64) -> Result<f64> {
    check_probability("polarization", eps)?;
    check_m(m)?;
    if k1 > m || k2 > m {
        return Err(Error::domain(format!("counts ({k1}, {k2}) exceed ensemble size {m}")));
    }
    let table = member_joint_table(eps);
    Ok(joint_unchecked(
        k1,
        k2,
        m,
        table[0][0].ln(),
        table[1][1].ln(),
        &ln_factorials(m),
    ))
}

/// Probability that the vote recovers both bits, for odd `M`.
pub fn psall_two_qubit(eps: f64, m: u64) -> Result<f64> {
    check_probability("polarization", eps)?;
    check_m(m)?;
    if m.is_multiple_of(2) {
        return Err(Error::domain(format!(
            "two-qubit success probability is defined for odd M only, got {m}"
        )));
    }
    let table = member_joint_table(eps);
    let (ln_off, ln_hit) = (table[0][0].ln(), table[1][1].ln());
    let ln_fact = ln_factorials(m);
    let first = m.div_ceil(2);
    let mut total = 0.0;
    for k1 in first..=m {
        for k2 in first..=m {
            total += joint_unchecked(k1, k2, m, ln_off, ln_hit, &ln_fact);
        }
    }
    Ok(total.clamp(0.0, 1.0))
}
