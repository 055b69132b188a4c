//! Direct simulation of the ensemble readout.
//!
//! Each member is measured in the computational basis. With probability
//! `p_marked` the outcome is the marked string `s` (all ones), otherwise it is
//! uniform over the other `N - 1` strings. Every trial draws from its own
//! ChaCha8 stream, so results do not depend on how trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{check_probability, GroverState, ProblemSpec};

/// Environment variable capping worker threads; `0` or unset means automatic.
pub const THREADS_ENV: &str = "ENSEMBLE_GROVER_THREADS";

/// Reads [`THREADS_ENV`]. `Ok(None)` when unset or `0`.
pub fn thread_cap_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(0) => Ok(None),
            Ok(n) => Ok(Some(n)),
            Err(_) => Err(Error::domain(format!("{THREADS_ENV} must be a non-negative integer, got `{v}`"))),
        },
    }
}

/// Per-member outcome distribution after `q` iterates at polarization `eps`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutcomeModel {
    pub n_db: u64,
    pub n_qubits: u32,
    pub q: u64,
    pub eps: f64,
    pub p_marked: f64,
    pub p_other_each: f64,
}

impl OutcomeModel {
    /// Requires `N = 2^n` so that the marked item is the all-ones string.
    pub fn new(n_db: u64, q: u64, eps: f64) -> Result<Self> {
        check_probability("polarization", eps)?;
        if n_db < 2 || !n_db.is_power_of_two() {
            return Err(Error::domain(format!("simulation requires N = 2^n >= 2, got {n_db}")));
        }
        let state = GroverState::new(n_db, q)?;
        let mixed = (1.0 - eps) / n_db as f64;
        Ok(Self {
            n_db,
            n_qubits: n_db.trailing_zeros(),
            q,
            eps,
            p_marked: mixed + eps * state.alpha * state.alpha,
            p_other_each: mixed + eps * state.beta * state.beta / (n_db - 1) as f64,
        })
    }

    pub fn from_problem(problem: &ProblemSpec, eps: f64) -> Result<Self> {
        Self::new(problem.n_db, problem.q, eps)
    }

    /// The marked string, all ones.
    pub fn marked(&self) -> u64 {
        self.n_db - 1
    }

    /// Exact probability of drawing `x`.
    pub fn probability(&self, x: u64) -> f64 {
        if x == self.marked() {
            self.p_marked
        } else if x < self.n_db {
            self.p_other_each
        } else {
            0.0
        }
    }
}

/// One member's measurement outcome.
pub fn sample_member<R: Rng + ?Sized>(model: &OutcomeModel, rng: &mut R) -> u64 {
    if rng.gen::<f64>() < model.p_marked {
        model.marked()
    } else {
        // Uniform over 0..N-1, which is every string except the marked one.
        rng.gen_range(0..model.marked())
    }
}

/// Bitwise majority vote over `m` members; ties on a bit are settled by a
/// fair coin.
pub fn run_protocol<R: Rng + ?Sized>(model: &OutcomeModel, m: u64, rng: &mut R) -> u64 {
    let n = model.n_qubits as usize;
    let mut ones = [0u64; 64];
    for _ in 0..m {
        let x = sample_member(model, rng);
        for (j, count) in ones.iter_mut().enumerate().take(n) {
            *count += (x >> j) & 1;
        }
    }
    let mut candidate = 0u64;
    for (j, &k) in ones.iter().enumerate().take(n) {
        let bit = match (2 * k).cmp(&m) {
            std::cmp::Ordering::Greater => 1,
            std::cmp::Ordering::Less => 0,
            std::cmp::Ordering::Equal => rng.gen_range(0..2u64),
        };
        candidate |= bit << j;
    }
    candidate
}

fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Failure counts from repeated runs of the protocol.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialStats {
    pub trials: u64,
    /// Failures on each qubit, least significant bit first.
    pub per_bit_failures: Vec<u64>,
    pub all_bit_failures: u64,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: u64,
}

/// A frequency with its binomial standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rate {
    pub value: f64,
    pub sigma: f64,
}

impl Rate {
    pub fn from_counts(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            value: p,
            sigma: (p * (1.0 - p) / trials as f64).sqrt(),
        }
    }

    /// Whether `expected` lies within `k` standard errors. A zero-width
    /// interval only accepts an exact match.
    pub fn within(&self, expected: f64, k: f64) -> bool {
        (self.value - expected).abs() <= k * self.sigma + 1e-15
    }
}

impl TrialStats {
    pub fn per_bit_rate(&self, bit: usize) -> Rate {
        Rate::from_counts(self.per_bit_failures[bit], self.trials)
    }

    /// Failure rate on a single bit, pooled over all qubits.
    pub fn pooled_bit_rate(&self) -> Rate {
        let n = self.per_bit_failures.len() as u64;
        Rate::from_counts(self.per_bit_failures.iter().sum(), self.trials * n)
    }

    pub fn all_bit_rate(&self) -> Rate {
        Rate::from_counts(self.all_bit_failures, self.trials)
    }
}

/// Runs the protocol `trials` times, trial `t` drawing from stream `t` of the
/// generator seeded with `seed`.
pub fn estimate_failures(model: &OutcomeModel, m: u64, trials: u64, seed: u64) -> Result<TrialStats> {
    if m == 0 {
        return Err(Error::domain("ensemble size must be at least 1"));
    }
    if trials == 0 {
        return Err(Error::domain("trial count must be at least 1"));
    }
    let n = model.n_qubits as usize;
    let marked = model.marked();
    let (per_bit, all) = (0..trials)
        .into_par_iter()
        .fold(
            || (vec![0u64; n], 0u64),
            |(mut per_bit, mut all), t| {
                let wrong = run_protocol(model, m, &mut stream_rng(seed, t)) ^ marked;
                for (j, count) in per_bit.iter_mut().enumerate() {
                    *count += (wrong >> j) & 1;
                }
                all += (wrong != 0) as u64;
                (per_bit, all)
            },
        )
        .reduce(
            || (vec![0u64; n], 0u64),
            |(mut a, x), (b, y)| {
                a.iter_mut().zip(b).for_each(|(a, b)| *a += b);
                (a, x + y)
            },
        );
    Ok(TrialStats {
        trials,
        per_bit_failures: per_bit,
        all_bit_failures: all,
        seed,
        m,
    })
}

/// Histogram of `draws` single-member outcomes, for `N` up to `2^20`.
pub fn outcome_histogram(model: &OutcomeModel, draws: u64, seed: u64) -> Result<Vec<u64>> {
    const LIMIT: u64 = 1 << 20;
    if model.n_db > LIMIT {
        return Err(Error::Guard {
            what: "histogram database size",
            limit: LIMIT,
            value: model.n_db,
        });
    }
    const CHUNK: u64 = 1 << 14;
    let size = model.n_db as usize;
    let chunks = draws.div_ceil(CHUNK);
    Ok((0..chunks)
        .into_par_iter()
        .fold(
            || vec![0u64; size],
            |mut hist, c| {
                let mut rng = stream_rng(seed, c);
                let len = CHUNK.min(draws - c * CHUNK);
                for _ in 0..len {
                    hist[sample_member(model, &mut rng) as usize] += 1;
                }
                hist
            },
        )
        .reduce(
            || vec![0u64; size],
            |mut a, b| {
                a.iter_mut().zip(b).for_each(|(a, b)| *a += b);
                a
            },
        ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_normalised() {
        for (n, q) in [(4, 1), (8, 2), (16, 3), (1 << 20, 804), (1 << 47, 9_324_000)] {
            for eps in [0.0, 0.3, 1.0] {
                let m = OutcomeModel::new(n, q, eps).unwrap();
                let total = m.p_marked + (n - 1) as f64 * m.p_other_each;
                assert!((total - 1.0).abs() < 1e-12, "N={n}: {total}");
            }
        }
        assert!(OutcomeModel::new(12, 2, 0.5).is_err());
        assert!(OutcomeModel::new(4, 1, 1.5).is_err());
    }

    #[test]
    fn table_one_cells() {
        let m = OutcomeModel::new(4, 1, 0.5).unwrap();
        assert!((m.p_marked - 0.625).abs() < 1e-15);
        assert!((m.p_other_each - 0.125).abs() < 1e-15);
    }

    #[test]
    fn perfect_ensemble_always_correct() {
        let model = OutcomeModel::new(4, 1, 1.0).unwrap();
        let mut rng = stream_rng(7, 0);
        for m in [1, 2, 5, 40] {
            for _ in 0..100 {
                assert_eq!(run_protocol(&model, m, &mut rng), 3);
            }
        }
    }

    #[test]
    fn deterministic_across_runs() {
        let model = OutcomeModel::new(16, 3, 0.3).unwrap();
        let a = estimate_failures(&model, 7, 5_000, 42).unwrap();
        let b = estimate_failures(&model, 7, 5_000, 42).unwrap();
        assert_eq!(a, b);
        let c = estimate_failures(&model, 7, 5_000, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn schedule_independent() {
        let model = OutcomeModel::new(8, 2, 0.4).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let serial = pool.install(|| estimate_failures(&model, 5, 3_000, 9).unwrap());
        assert_eq!(serial, estimate_failures(&model, 5, 3_000, 9).unwrap());
        let h1 = pool.install(|| outcome_histogram(&model, 50_000, 1).unwrap());
        assert_eq!(h1, outcome_histogram(&model, 50_000, 1).unwrap());
        assert_eq!(h1.iter().sum::<u64>(), 50_000);
    }

    #[test]
    fn rejects_empty_runs() {
        let model = OutcomeModel::new(4, 1, 0.5).unwrap();
        assert!(estimate_failures(&model, 0, 10, 1).is_err());
        assert!(estimate_failures(&model, 1, 0, 1).is_err());
    }
}
