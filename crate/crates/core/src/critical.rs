//! Classical baseline and the critical polarizations at which the ensemble
//! search matches it for the same aggregate number of oracle calls `Q = qM`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grover::{check_probability, ProblemSpec};
use crate::roots::{bisect, Bisection};
use crate::stats::{Auto, FailureMethod};

/// A randomized classical search that probes `queries` distinct locations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalSearchSpec {
    pub queries: u64,
    pub n_db: u64,
}

impl ClassicalSearchSpec {
    pub fn new(queries: u64, n_db: u64) -> Result<Self> {
        if n_db < 2 {
            return Err(Error::domain(format!("database size must be >= 2, got {n_db}")));
        }
        Ok(Self { queries, n_db })
    }

    /// Classical search matched to `m` ensemble members running `q` iterates.
    pub fn matched(problem: &ProblemSpec, m: u64) -> Self {
        Self {
            queries: problem.q.saturating_mul(m),
            n_db: problem.n_db,
        }
    }

    pub fn failure_probability(&self) -> f64 {
        pfail_classical(self.queries, self.n_db)
    }
}

/// Failure probability `max(0, 1 - Q/N)` of the classical search.
pub fn pfail_classical(queries: u64, n_db: u64) -> f64 {
    if queries >= n_db {
        0.0
    } else {
        (n_db - queries) as f64 / n_db as f64
    }
}

/// `floor(N / q)`.
pub fn m_max(q: u64, n_db: u64) -> Result<u64> {
    if q == 0 {
        return Err(Error::domain("q must be at least 1"));
    }
    Ok(n_db / q)
}

/// `(1 - pfail_one(eps, M)) / (qM / N)`: the ensemble single-bit success
/// probability per unit of classical success probability.
pub fn success_ratio(problem: &ProblemSpec, method: &dyn FailureMethod, eps: f64, m: u64) -> Result<f64> {
    let eps_eff = problem.effective_polarization(eps)?;
    let pfail = method.evaluate(eps_eff, m)?;
    Ok((1.0 - pfail) * problem.n_db as f64 / (problem.q as f64 * m as f64))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(1.0..2.0).contains(&alpha) {
        return Err(Error::domain(format!(
            "resource exponent must satisfy 1 <= alpha < 2, got {alpha}"
        )));
    }
    Ok(())
}

/// Largest `M` with `(qM)^alpha <= N`, i.e. `floor(N^(1/alpha) / q)`.
pub fn generalized_m_max(alpha: f64, problem: &ProblemSpec) -> Result<u64> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(problem.m_max());
    }
    let x = (problem.n_db as f64).powf(1.0 / alpha) / problem.q as f64;
    let near = x.round();
    if (x - near).abs() <= 1e-9 * near.max(1.0) {
        Ok(near as u64)
    } else {
        Ok(x.floor() as u64)
    }
}

/// Exponent `1/4 - 1/(2 alpha)` of the critical-polarization scaling when the
/// classical search needs `(qM)^alpha` queries.
pub fn generalized_scaling_exponent(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(0.25 - 0.5 / alpha)
}

/// Classical failure probability `max(0, 1 - (qM)^alpha / N)`.
pub fn generalized_pfail_classical(alpha: f64, problem: &ProblemSpec, m: u64) -> Result<f64> {
    check_alpha(alpha)?;
    let cost = (problem.q as f64 * m as f64).powf(alpha);
    Ok((1.0 - cost / problem.n_db as f64).max(0.0))
}

/// One solved critical polarization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalRoot {
    pub eps: f64,
    /// Failure probability the single-bit failure was matched to.
    pub target: f64,
    pub iterations: usize,
    pub bracket_width: f64,
    /// `|pfail_one(eps, M) - target|`.
    pub residual: f64,
}

/// Necessary and sufficient critical polarizations at one `(M, N)`.
/// `None` means no polarization in `[0, 1]` meets the target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalResult {
    #[serde(rename = "M")]
    pub m: u64,
    #[serde(rename = "N")]
    pub n_db: u64,
    pub q: u64,
    pub necessary: Option<CriticalRoot>,
    pub sufficient: Option<CriticalRoot>,
}

impl CriticalResult {
    pub fn eps_necc(&self) -> Option<f64> {
        self.necessary.map(|r| r.eps)
    }

    pub fn eps_suff(&self) -> Option<f64> {
        self.sufficient.map(|r| r.eps)
    }

    pub fn iterations(&self) -> usize {
        self.necessary.map_or(0, |r| r.iterations) + self.sufficient.map_or(0, |r| r.iterations)
    }

    /// Widest final bracket of the two solves.
    pub fn bracket_width(&self) -> f64 {
        let w = |r: Option<CriticalRoot>| r.map_or(0.0, |r| r.bracket_width);
        w(self.necessary).max(w(self.sufficient))
    }
}

/// One record of a critical-polarization sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    #[serde(rename = "N")]
    pub n_db: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub q: u64,
    /// Success probability of the matched classical search.
    pub p_target: f64,
    pub eps_necc: Option<f64>,
    pub eps_suff: Option<f64>,
    pub residual_necc: Option<f64>,
    pub residual_suff: Option<f64>,
}

impl SweepRow {
    fn from_result(result: &CriticalResult, p_target: f64) -> Self {
        Self {
            n_db: result.n_db,
            m: result.m,
            q: result.q,
            p_target,
            eps_necc: result.eps_necc(),
            eps_suff: result.eps_suff(),
            residual_necc: result.necessary.map(|r| r.residual),
            residual_suff: result.sufficient.map(|r| r.residual),
        }
    }
}

/// A row that could not be computed.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepFailure {
    pub n_db: u64,
    pub m: Option<u64>,
    pub error: Error,
}

/// Rows in input order plus the rows that were skipped.
#[derive(Debug, Clone, Default)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub failures: Vec<SweepFailure>,
}

impl FromIterator<std::result::Result<SweepRow, SweepFailure>> for SweepOutcome {
    fn from_iter<I: IntoIterator<Item = std::result::Result<SweepRow, SweepFailure>>>(iter: I) -> Self {
        let mut out = SweepOutcome::default();
        for item in iter {
            match item {
                Ok(row) => out.rows.push(row),
                Err(failure) => out.failures.push(failure),
            }
        }
        out
    }
}

/// Ratios from repeating a critical-polarization solve at `(sqrt(gamma) M, gamma N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub gamma: f64,
    pub m: u64,
    pub n_db: u64,
    pub scaled_m: u64,
    pub scaled_n_db: u64,
    /// `gamma^(-1/4)`.
    pub expected: f64,
    pub ratio_necc: f64,
    pub ratio_suff: f64,
    /// Sufficient ratio with the `(M, N)` solve using the qubit count of
    /// `gamma N`, which removes the `ceil(log2 N) / ceil(log2 gamma N)` factor.
    pub ratio_suff_corrected: f64,
}

/// Bisection solver for the critical polarizations.
#[derive(Clone)]
pub struct CriticalSolver {
    method: Arc<dyn FailureMethod>,
    bisection: Bisection,
}

impl Default for CriticalSolver {
    fn default() -> Self {
        Self::new(Arc::new(Auto::default()))
    }
}

impl std::fmt::Debug for CriticalSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CriticalSolver")
            .field("method", &self.method.name())
            .field("bisection", &self.bisection)
            .finish()
    }
}

fn solve_failure<T>(n_db: u64, m: Option<u64>, r: Result<T>) -> std::result::Result<T, SweepFailure> {
    r.map_err(|error| SweepFailure { n_db, m, error })
}

impl CriticalSolver {
    pub fn new(method: Arc<dyn FailureMethod>) -> Self {
        Self {
            method,
            bisection: Bisection::default(),
        }
    }

    pub fn with_bisection(mut self, bisection: Bisection) -> Self {
        self.bisection = bisection;
        self
    }

    pub fn method(&self) -> &dyn FailureMethod {
        self.method.as_ref()
    }

    /// Polarization at which `pfail_one(eps_eff(eps), M)` equals `target`.
    ///
    /// `pfail_one` falls from 1/2 at `eps = 0`, so targets of 1/2 or more give
    /// 0, and a target below the `eps = 1` failure gives `None`.
    pub fn solve_for_target(&self, problem: &ProblemSpec, m: u64, target: f64) -> Result<Option<CriticalRoot>> {
        if m == 0 {
            return Err(Error::domain("ensemble size must be at least 1"));
        }
        check_probability("target failure probability", target)?;
        let exact = |eps: f64| CriticalRoot {
            eps,
            target,
            iterations: 0,
            bracket_width: 0.0,
            residual: 0.0,
        };
        if target >= 0.5 {
            return Ok(Some(exact(0.0)));
        }
        let f = |eps: f64| -> Result<f64> {
            let eps_eff = problem.effective_polarization(eps)?;
            Ok(self.method.evaluate(eps_eff, m)? - target)
        };
        let at_one = f(1.0)?;
        if at_one > 0.0 {
            return Ok(None);
        }
        if at_one == 0.0 {
            return Ok(Some(exact(1.0)));
        }
        let root = bisect(f, 0.0, 1.0, &self.bisection)?;
        Ok(Some(CriticalRoot {
            eps: root.x,
            target,
            iterations: root.iterations,
            bracket_width: root.bracket_width,
            residual: root.residual,
        }))
    }

    /// Polarization at which the single-bit failure equals the classical
    /// failure `1 - qM/N`. `None` above `M_max`.
    pub fn necessary(&self, problem: &ProblemSpec, m: u64) -> Result<Option<CriticalRoot>> {
        if m > problem.m_max() {
            return Ok(None);
        }
        let target = ClassicalSearchSpec::matched(problem, m).failure_probability();
        self.solve_for_target(problem, m, target)
    }

    /// Polarization at which `n` times the single-bit failure equals the
    /// classical failure. `None` above `M_max`.
    pub fn sufficient(&self, problem: &ProblemSpec, m: u64) -> Result<Option<CriticalRoot>> {
        self.sufficient_with_qubits(problem, m, problem.n_qubits)
    }

    /// As [`sufficient`](Self::sufficient) but with an explicit qubit count.
    pub fn sufficient_with_qubits(&self, problem: &ProblemSpec, m: u64, n_qubits: u32) -> Result<Option<CriticalRoot>> {
        if n_qubits == 0 {
            return Err(Error::domain("qubit count must be at least 1"));
        }
        if m > problem.m_max() {
            return Ok(None);
        }
        let target = ClassicalSearchSpec::matched(problem, m).failure_probability() / n_qubits as f64;
        self.solve_for_target(problem, m, target)
    }

    pub fn solve(&self, problem: &ProblemSpec, m: u64) -> Result<CriticalResult> {
        Ok(CriticalResult {
            m,
            n_db: problem.n_db,
            q: problem.q,
            necessary: self.necessary(problem, m)?,
            sufficient: self.sufficient(problem, m)?,
        })
    }

    /// Necessary critical polarization against a classical search needing
    /// `(qM)^alpha` queries.
    pub fn generalized_necessary(&self, alpha: f64, problem: &ProblemSpec, m: u64) -> Result<Option<CriticalRoot>> {
        if m > generalized_m_max(alpha, problem)? {
            return Ok(None);
        }
        let target = generalized_pfail_classical(alpha, problem, m)?;
        self.solve_for_target(problem, m, target)
    }

    /// Solves at `(M, N)` and `(round(sqrt(gamma) M), gamma N)` in the
    /// typical scenario and returns the ratios of the critical polarizations.
    pub fn scaling_check(&self, gamma: f64, m: u64, n_db: u64) -> Result<ScalingCheck> {
        let (scaled_m, scaled_n_db) = scaled_point(gamma, gamma.sqrt(), m, n_db)?;
        let base = ProblemSpec::typical(n_db)?;
        let scaled = ProblemSpec::typical(scaled_n_db)?;
        let need = |r: Result<Option<CriticalRoot>>, what: &str| -> Result<f64> {
            match r? {
                Some(root) if root.eps > 0.0 => Ok(root.eps),
                _ => Err(Error::domain(format!("{what} critical polarization has no positive value"))),
            }
        };
        let necc = need(self.necessary(&base, m), "base necessary")?;
        let suff = need(self.sufficient(&base, m), "base sufficient")?;
        let suff_corr = need(
            self.sufficient_with_qubits(&base, m, scaled.n_qubits),
            "base sufficient",
        )?;
        let necc_scaled = need(self.necessary(&scaled, scaled_m), "scaled necessary")?;
        let suff_scaled = need(self.sufficient(&scaled, scaled_m), "scaled sufficient")?;
        Ok(ScalingCheck {
            gamma,
            m,
            n_db,
            scaled_m,
            scaled_n_db,
            expected: gamma.powf(-0.25),
            ratio_necc: necc_scaled / necc,
            ratio_suff: suff_scaled / suff,
            ratio_suff_corrected: suff_scaled / suff_corr,
        })
    }

    /// Ratio of generalized necessary polarizations at
    /// `(gamma^(1/alpha - 1/2) M, gamma N)` and `(M, N)`; expected to be close
    /// to `gamma^(1/4 - 1/(2 alpha))`.
    pub fn generalized_scaling_check(&self, alpha: f64, gamma: f64, m: u64, n_db: u64) -> Result<f64> {
        check_alpha(alpha)?;
        let (scaled_m, scaled_n_db) = scaled_point(gamma, gamma.powf(1.0 / alpha - 0.5), m, n_db)?;
        let base = ProblemSpec::typical(n_db)?;
        let scaled = ProblemSpec::typical(scaled_n_db)?;
        let a = self.generalized_necessary(alpha, &base, m)?;
        let b = self.generalized_necessary(alpha, &scaled, scaled_m)?;
        match (a, b) {
            (Some(a), Some(b)) if a.eps > 0.0 => Ok(b.eps / a.eps),
            _ => Err(Error::domain("generalized critical polarization has no positive value")),
        }
    }

    /// Fixed classical success probability: for each `N` (typical scenario)
    /// `M = ceil(ceil(p N) / q)`, then both critical polarizations. Rows come
    /// back in input order; rows that fail are reported separately.
    pub fn sweep_fixed_success(&self, p_target: f64, n_list: &[u64]) -> Result<SweepOutcome> {
        if !(p_target > 0.0 && p_target < 1.0) {
            return Err(Error::domain(format!(
                "classical success probability must lie in (0, 1), got {p_target}"
            )));
        }
        Ok(n_list
            .par_iter()
            .map(|&n_db| {
                let problem = solve_failure(n_db, None, ProblemSpec::typical(n_db))?;
                let queries = (p_target * n_db as f64).ceil() as u64;
                let m = queries.div_ceil(problem.q).max(1);
                let result = solve_failure(n_db, Some(m), self.solve(&problem, m))?;
                Ok(SweepRow::from_result(&result, p_target))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect())
    }

    /// Fixed `N`, one row per ensemble size; `p_target` is the matched
    /// classical success probability `min(1, qM/N)`.
    pub fn sweep_ensemble(&self, problem: &ProblemSpec, ms: &[u64]) -> SweepOutcome {
        ms.par_iter()
            .map(|&m| {
                let result = solve_failure(problem.n_db, Some(m), self.solve(problem, m))?;
                let p = 1.0 - ClassicalSearchSpec::matched(problem, m).failure_probability();
                Ok(SweepRow::from_result(&result, p))
            })
            .collect::<Vec<_>>()
            .into_iter()
            .collect()
    }
}

fn scaled_point(gamma: f64, m_factor: f64, m: u64, n_db: u64) -> Result<(u64, u64)> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::domain(format!("gamma must be positive, got {gamma}")));
    }
    let scaled_n = (gamma * n_db as f64).round();
    if scaled_n >= u64::MAX as f64 {
        return Err(Error::domain("scaled database size overflows"));
    }
    let scaled_m = (m_factor * m as f64).round().max(1.0);
    Ok((scaled_m as u64, scaled_n as u64))
}

/// Necessary critical polarization with the default solver.
pub fn solve_necessary_eps(problem: &ProblemSpec, m: u64) -> Result<Option<f64>> {
    Ok(CriticalSolver::default().necessary(problem, m)?.map(|r| r.eps))
}

/// Sufficient critical polarization with the default solver.
pub fn solve_sufficient_eps(problem: &ProblemSpec, m: u64) -> Result<Option<f64>> {
    Ok(CriticalSolver::default().sufficient(problem, m)?.map(|r| r.eps))
}

/// `N^(-1/4)` scaling of the critical polarizations for `gamma`.
pub fn scaling_check(gamma: f64, m: u64, n_db: u64) -> Result<f64> {
    Ok(CriticalSolver::default().scaling_check(gamma, m, n_db)?.ratio_necc)
}

/// See [`CriticalSolver::sweep_fixed_success`].
pub fn sweep_fixed_success(p_target: f64, n_list: &[u64]) -> Result<SweepOutcome> {
    CriticalSolver::default().sweep_fixed_success(p_target, n_list)
}

/// Which critical polarization column of a sweep to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Column {
    Necessary,
    Sufficient,
}

impl Column {
    pub fn name(self) -> &'static str {
        match self {
            Column::Necessary => "eps_necc",
            Column::Sufficient => "eps_suff",
        }
    }

    pub fn get(self, row: &SweepRow) -> Option<f64> {
        match self {
            Column::Necessary => row.eps_necc,
            Column::Sufficient => row.eps_suff,
        }
    }
}

/// `log10 eps = intercept + slope * log10 N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub rss: f64,
    pub points: usize,
}

impl FitResult {
    pub fn predict_log10(&self, log10_n: f64) -> f64 {
        self.intercept + self.slope * log10_n
    }

    /// `log10 N` at which the fitted line reaches `eps`.
    pub fn log10_n_at(&self, eps: f64) -> f64 {
        (eps.log10() - self.intercept) / self.slope
    }
}

/// Ordinary least squares of `log10 eps` on `log10 N`.
pub fn loglog_fit(points: &[(f64, f64)]) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::domain(format!("fit needs at least 3 points, got {}", points.len())));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(n, eps) in points {
        if !(n > 0.0 && eps > 0.0 && n.is_finite() && eps.is_finite()) {
            return Err(Error::domain(format!("fit needs positive values, got N={n}, eps={eps}")));
        }
        xs.push(n.log10());
        ys.push(eps.log10());
    }
    let k = xs.len() as f64;
    let x_mean = xs.iter().sum::<f64>() / k;
    let y_mean = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - x_mean).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - x_mean) * (y - y_mean)).sum();
    if sxx == 0.0 {
        return Err(Error::domain("fit is degenerate: all N are equal"));
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let rss = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(FitResult {
        slope,
        intercept,
        rss,
        points: xs.len(),
    })
}

/// Fits one column of sweep rows. Rows without a value fail the fit.
pub fn fit_rows(rows: &[SweepRow], column: Column) -> Result<FitResult> {
    let points = rows
        .iter()
        .map(|row| {
            column
                .get(row)
                .map(|eps| (row.n_db as f64, eps))
                .ok_or_else(|| Error::domain(format!("row N={} M={} has no {}", row.n_db, row.m, column.name())))
        })
        .collect::<Result<Vec<_>>>()?;
    loglog_fit(&points)
}

/// `count` values spread evenly in `log10` between `lo` and `hi`, rounded to
/// integers.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<u64> {
    match count {
        0 => vec![],
        1 => vec![lo.round() as u64],
        _ => {
            let (a, b) = (lo.log10(), hi.log10());
            (0..count)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64).round() as u64)
                .collect()
        }
    }
}
