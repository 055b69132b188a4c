use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use ensemble_grover::critical::{
    fit_rows, generalized_m_max, generalized_scaling_exponent, logspace, pfail_classical, Column,
    CriticalSolver, SweepOutcome, SweepRow,
};
use ensemble_grover::grover::{effective_polarization, q_std, ProblemSpec, Scenario};
use ensemble_grover::montecarlo::{estimate_failures, OutcomeModel, Rate, TrialStats};
use ensemble_grover::stats::{
    pfail_all_bounds, pfail_one_beta, pfail_one_exact, pfail_one_gauss, psall_two_qubit, FailureMethod,
    MethodRegistry, EXACT_BINOMIAL_MAX_M, TWO_QUBIT_MAX_M,
};

use crate::args::{Command, ComputeArgs, FitArgs, Format, SimulateArgs, SweepArgs};
use crate::error::CliError;
use crate::output::{sink, write_records};

pub const SWEEP_HEADER: [&str; 8] = [
    "N",
    "M",
    "q",
    "p_target",
    "eps_necc",
    "eps_suff",
    "residual_necc",
    "residual_suff",
];

pub fn run(command: &Command) -> Result<(), CliError> {
    match command {
        Command::Compute(a) => compute(a, &mut sink(&a.output)?),
        Command::Sweep(a) => sweep(a, &mut sink(&a.output)?),
        Command::Fit(a) => fit(a, &mut sink(&a.output)?),
        Command::Simulate(a) => simulate(a, &mut sink(&a.output)?),
    }
}

fn method(name: &str) -> Result<Arc<dyn FailureMethod>, CliError> {
    Ok(MethodRegistry::builtin().get(name)?)
}

#[derive(Debug, Default, Serialize)]
struct ComputeReport {
    #[serde(rename = "N")]
    n_db: u64,
    n: u32,
    scenario: String,
    q: u64,
    q_std: u64,
    theta: f64,
    alpha_sq: f64,
    m_max: u64,
    #[serde(rename = "M")]
    m: Option<u64>,
    eps: Option<f64>,
    eps_eff: Option<f64>,
    m_min: Option<u64>,
    method: Option<&'static str>,
    pfail_one: Option<f64>,
    pfail_one_exact: Option<f64>,
    pfail_one_beta: Option<f64>,
    pfail_one_gauss: Option<f64>,
    pfail_all_lower: Option<f64>,
    pfail_all_upper: Option<f64>,
    pfail_all_two_qubit: Option<f64>,
    pfail_classical: Option<f64>,
    eps_necc: Option<f64>,
    eps_suff: Option<f64>,
    gamma: Option<f64>,
    scaling_expected: Option<f64>,
    scaling_ratio_necc: Option<f64>,
    scaling_ratio_suff: Option<f64>,
    scaling_ratio_suff_corrected: Option<f64>,
    alpha: Option<f64>,
    generalized_m_max: Option<u64>,
    generalized_exponent: Option<f64>,
    generalized_eps_necc: Option<f64>,
}

const COMPUTE_HEADER: [&str; 32] = [
    "N",
    "n",
    "scenario",
    "q",
    "q_std",
    "theta",
    "alpha_sq",
    "m_max",
    "M",
    "eps",
    "eps_eff",
    "m_min",
    "method",
    "pfail_one",
    "pfail_one_exact",
    "pfail_one_beta",
    "pfail_one_gauss",
    "pfail_all_lower",
    "pfail_all_upper",
    "pfail_all_two_qubit",
    "pfail_classical",
    "eps_necc",
    "eps_suff",
    "gamma",
    "scaling_expected",
    "scaling_ratio_necc",
    "scaling_ratio_suff",
    "scaling_ratio_suff_corrected",
    "alpha",
    "generalized_m_max",
    "generalized_exponent",
    "generalized_eps_necc",
];

pub fn compute(args: &ComputeArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let problem = ProblemSpec::new(
        args.problem.n_db,
        args.problem.scenario.unwrap_or(Scenario::Typical),
        args.problem.q,
    )?;
    let method = method(&args.method)?;
    if args.eps.is_some() && args.m.is_none() {
        return Err(CliError::Usage("--eps requires --m".into()));
    }
    if args.gamma.is_some() && args.m.is_none() {
        return Err(CliError::Usage("--gamma requires --m".into()));
    }
    let state = problem.grover_state();
    let mut report = ComputeReport {
        n_db: problem.n_db,
        n: problem.n_qubits,
        scenario: problem.scenario.to_string(),
        q: problem.q,
        q_std: q_std(problem.n_db)?,
        theta: state.theta,
        alpha_sq: state.p_correct_conventional,
        m_max: problem.m_max(),
        m: args.m,
        eps: args.eps,
        gamma: args.gamma,
        alpha: args.alpha,
        ..Default::default()
    };
    let solver = CriticalSolver::new(method.clone());

    if let Some(m) = args.m {
        let ensemble = problem.ensemble(m, args.eps.unwrap_or(0.0))?;
        report.m_min = Some(ensemble.m_min);
        report.pfail_classical = Some(pfail_classical(problem.q.saturating_mul(m), problem.n_db));
        let result = solver.solve(&problem, m)?;
        report.eps_necc = result.eps_necc();
        report.eps_suff = result.eps_suff();

        if let Some(eps) = args.eps {
            let eps_eff = ensemble.eps_eff;
            let (value, tag) = method.evaluate_tagged(eps_eff, m)?;
            let bounds = pfail_all_bounds(&problem, eps, m, method.as_ref())?;
            report.eps_eff = Some(eps_eff);
            report.method = Some(tag);
            report.pfail_one = Some(value);
            if m <= EXACT_BINOMIAL_MAX_M {
                report.pfail_one_exact = Some(pfail_one_exact(eps_eff, m)?);
            }
            report.pfail_one_beta = Some(pfail_one_beta(eps_eff, m)?);
            report.pfail_one_gauss = Some(pfail_one_gauss(eps_eff, m)?);
            report.pfail_all_lower = Some(bounds.lower);
            report.pfail_all_upper = Some(bounds.upper);
            if problem.n_db == 4 && problem.q == 1 && m % 2 == 1 && m <= TWO_QUBIT_MAX_M {
                report.pfail_all_two_qubit = Some(1.0 - psall_two_qubit(eps_eff, m)?);
            }
        }
        if let Some(gamma) = args.gamma {
            let s = solver.scaling_check(gamma, m, problem.n_db)?;
            report.scaling_expected = Some(s.expected);
            report.scaling_ratio_necc = Some(s.ratio_necc);
            report.scaling_ratio_suff = Some(s.ratio_suff);
            report.scaling_ratio_suff_corrected = Some(s.ratio_suff_corrected);
        }
    }
    if let Some(alpha) = args.alpha {
        report.generalized_m_max = Some(generalized_m_max(alpha, &problem)?);
        report.generalized_exponent = Some(generalized_scaling_exponent(alpha)?);
        if let Some(m) = args.m {
            report.generalized_eps_necc = solver.generalized_necessary(alpha, &problem, m)?.map(|r| r.eps);
        }
    }
    write_records(out, args.output.format, &COMPUTE_HEADER, &[report], false)
}

/// Up to `points` distinct integers spread evenly over `lo..=hi`.
pub fn ensemble_grid(lo: u64, hi: u64, points: u64) -> Vec<u64> {
    if lo > hi || points == 0 {
        return vec![];
    }
    if hi - lo < points {
        return (lo..=hi).collect();
    }
    if points == 1 {
        return vec![lo];
    }
    let span = (hi - lo) as f64;
    let mut ms: Vec<u64> = (0..points)
        .map(|i| lo + (span * i as f64 / (points - 1) as f64).round() as u64)
        .collect();
    ms.dedup();
    ms
}

pub fn sweep(args: &SweepArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let solver = CriticalSolver::new(method(&args.method)?);
    let outcome: SweepOutcome = match (args.n_db, args.p_target) {
        (Some(n_db), None) => {
            let problem = ProblemSpec::new(n_db, args.scenario.unwrap_or(Scenario::Typical), args.q)?;
            let lo = args.m_min.unwrap_or((problem.m_max() / 2).max(1));
            let hi = args.m_max.unwrap_or(problem.m_max());
            solver.sweep_ensemble(&problem, &ensemble_grid(lo.max(1), hi, args.points))
        }
        (None, Some(p)) => {
            let n_list = args.n_list.clone().unwrap_or_else(|| logspace(1e8, 1e16, 9));
            solver.sweep_fixed_success(p, &n_list)?
        }
        _ => return Err(CliError::Usage("sweep needs either --n-db or --p-target".into())),
    };
    for f in &outcome.failures {
        match f.m {
            Some(m) => eprintln!("skipping N={} M={m}: {}", f.n_db, f.error),
            None => eprintln!("skipping N={}: {}", f.n_db, f.error),
        }
    }
    write_records(out, args.output.format, &SWEEP_HEADER, &outcome.rows, true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitRecord {
    pub column: &'static str,
    pub slope: f64,
    pub intercept: f64,
    pub rss: f64,
    pub points: usize,
    pub extrapolate_eps: Option<f64>,
    pub log10_n_at_eps: Option<f64>,
}

const FIT_HEADER: [&str; 7] = [
    "column",
    "slope",
    "intercept",
    "rss",
    "points",
    "extrapolate_eps",
    "log10_n_at_eps",
];

pub fn read_sweep(path: &std::path::Path) -> Result<Vec<SweepRow>, CliError> {
    let mut reader = csv::Reader::from_path(path)?;
    let header = reader.headers()?.clone();
    if header.iter().ne(SWEEP_HEADER) {
        return Err(CliError::Usage(format!(
            "{} does not have the sweep header {}",
            path.display(),
            SWEEP_HEADER.join(",")
        )));
    }
    Ok(reader.deserialize().collect::<Result<Vec<SweepRow>, _>>()?)
}

pub fn fit_records(rows: &[SweepRow], extrapolate_eps: Option<f64>) -> Result<Vec<FitRecord>, CliError> {
    [Column::Necessary, Column::Sufficient]
        .into_iter()
        .map(|column| {
            let fit = fit_rows(rows, column)?;
            Ok(FitRecord {
                column: column.name(),
                slope: fit.slope,
                intercept: fit.intercept,
                rss: fit.rss,
                points: fit.points,
                extrapolate_eps,
                log10_n_at_eps: extrapolate_eps.map(|e| fit.log10_n_at(e)),
            })
        })
        .collect()
}

pub fn fit(args: &FitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if let Some(e) = args.extrapolate_eps {
        if !(e > 0.0 && e <= 1.0) {
            return Err(CliError::Usage(format!("--extrapolate-eps must lie in (0, 1], got {e}")));
        }
    }
    let rows = read_sweep(&args.input)?;
    let records = fit_records(&rows, args.extrapolate_eps)?;
    write_records(out, args.output.format, &FIT_HEADER, &records, true)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub quantity: String,
    pub trials: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub seed: u64,
    pub failures: u64,
    pub empirical: f64,
    pub sigma: f64,
    pub analytic_low: f64,
    pub analytic_high: f64,
    pub within_3sigma: bool,
}

const SIMULATE_HEADER: [&str; 10] = [
    "quantity",
    "trials",
    "M",
    "seed",
    "failures",
    "empirical",
    "sigma",
    "analytic_low",
    "analytic_high",
    "within_3sigma",
];

#[derive(Debug, Serialize)]
struct SimulateReport {
    stats: TrialStats,
    comparison: Vec<Comparison>,
}

fn compare(quantity: String, stats: &TrialStats, failures: u64, low: f64, high: f64) -> Comparison {
    let rate = Rate::from_counts(failures, stats.trials);
    let slack = 3.0 * rate.sigma + 1e-15;
    Comparison {
        quantity,
        trials: stats.trials,
        m: stats.m,
        seed: stats.seed,
        failures,
        empirical: rate.value,
        sigma: rate.sigma,
        analytic_low: low,
        analytic_high: high,
        within_3sigma: rate.value >= low - slack && rate.value <= high + slack,
    }
}

/// Runs the protocol and lines the empirical rates up against the analytic
/// single-bit failure probability and the all-bit value or bounds.
pub fn simulation_table(problem: &ProblemSpec, eps: f64, m: u64, trials: u64, seed: u64) -> Result<SimulateReportParts, CliError> {
    let model = OutcomeModel::from_problem(problem, eps)?;
    let stats = estimate_failures(&model, m, trials, seed)?;
    // The sampler uses the exact amplitudes whatever the scenario.
    let eps_eff = effective_polarization(eps, problem.n_db, problem.q)?;
    let one = method("auto")?.evaluate(eps_eff, m)?;
    let mut rows: Vec<Comparison> = stats
        .per_bit_failures
        .iter()
        .enumerate()
        .map(|(j, &k)| compare(format!("bit{j}_failure"), &stats, k, one, one))
        .collect();
    let (low, high) = if problem.n_db == 4 && problem.q == 1 && m % 2 == 1 && m <= TWO_QUBIT_MAX_M {
        let all = 1.0 - psall_two_qubit(eps_eff, m)?;
        (all, all)
    } else {
        (one, (f64::from(problem.n_qubits) * one).min(1.0))
    };
    rows.push(compare("all_bit_failure".into(), &stats, stats.all_bit_failures, low, high));
    Ok(SimulateReportParts { stats, comparison: rows })
}

pub struct SimulateReportParts {
    pub stats: TrialStats,
    pub comparison: Vec<Comparison>,
}

pub fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    if args.m == 0 || args.trials == 0 {
        return Err(CliError::Usage("--m and --trials must be at least 1".into()));
    }
    let problem = ProblemSpec::new(args.n_db, args.scenario.unwrap_or(Scenario::Exact), args.q)?;
    let parts = simulation_table(&problem, args.eps, args.m, args.trials, args.seed)?;
    match args.output.format {
        Format::Csv => write_records(out, Format::Csv, &SIMULATE_HEADER, &parts.comparison, true),
        Format::Json => {
            let report = SimulateReport {
                stats: parts.stats,
                comparison: parts.comparison,
            };
            write_records(out, Format::Json, &[], &[report], false)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    use crate::args::Cli;

    fn run_to_string(argv: &[&str]) -> Result<String, CliError> {
        let cli = Cli::try_parse_from(std::iter::once("ensemble-grover").chain(argv.iter().copied()))
            .map_err(|e| CliError::Usage(e.to_string()))?;
        let mut buf = Vec::new();
        match &cli.command {
            Command::Compute(a) => compute(a, &mut buf)?,
            Command::Sweep(a) => sweep(a, &mut buf)?,
            Command::Fit(a) => fit(a, &mut buf)?,
            Command::Simulate(a) => simulate(a, &mut buf)?,
        }
        Ok(String::from_utf8(buf).unwrap())
    }

    fn json(argv: &[&str]) -> serde_json::Value {
        let mut v: Vec<&str> = argv.to_vec();
        v.extend(["--format", "json"]);
        serde_json::from_str(&run_to_string(&v).unwrap()).unwrap()
    }

    #[test]
    fn grid() {
        assert_eq!(ensemble_grid(5, 4, 10), Vec::<u64>::new());
        assert_eq!(ensemble_grid(1, 3, 10), vec![1, 2, 3]);
        assert_eq!(ensemble_grid(0, 100, 3), vec![0, 50, 100]);
        assert_eq!(ensemble_grid(7, 100, 1), vec![7]);
        assert!(ensemble_grid(1, 1000, 0).is_empty());
    }

    #[test]
    fn compute_worked_case() {
        let v = json(&["compute", "--n-db", "4", "--q", "1", "--eps", "1", "--m", "1"]);
        assert_eq!(v["alpha_sq"], 1.0);
        assert_eq!(v["pfail_all_lower"], 0.0);
        assert_eq!(v["pfail_all_upper"], 0.0);
        assert_eq!(v["pfail_all_two_qubit"], 0.0);
    }

    #[test]
    fn compute_unpolarized() {
        let v = json(&["compute", "--n-db", "4", "--eps", "0", "--m", "7"]);
        assert_eq!(v["pfail_one"], 0.5);
        assert_eq!(v["method"], "exact-binomial");
    }

    #[test]
    fn compute_large_reports_each_method() {
        let v = json(&["compute", "--n-db", "1e10", "--eps", "0.01", "--m", "100000"]);
        assert_eq!(v["method"], "incomplete-beta");
        assert!(v["pfail_one_exact"].is_null());
        let (beta, gauss) = (v["pfail_one_beta"].as_f64().unwrap(), v["pfail_one_gauss"].as_f64().unwrap());
        assert!((beta - gauss).abs() < 1e-3);
        let v = json(&["compute", "--n-db", "1e10", "--eps", "0.01", "--m", "100000", "--method", "gaussian"]);
        assert_eq!(v["method"], "gaussian");
        assert_eq!(v["pfail_one"], v["pfail_one_gauss"]);
    }

    #[test]
    fn compute_optional_blocks() {
        let v = json(&["compute", "--n-db", "1e10", "--m", "100000", "--gamma", "1e4", "--alpha", "1"]);
        assert!((v["scaling_ratio_necc"].as_f64().unwrap() - 0.1).abs() < 0.005);
        assert_eq!(v["generalized_exponent"], -0.25);
        assert_eq!(v["generalized_eps_necc"], v["eps_necc"]);
        assert!(v["pfail_one"].is_null());
    }

    #[test]
    fn compute_validation() {
        let err = run_to_string(&["compute", "--n-db", "4", "--eps", "1.5", "--m", "1"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_to_string(&["compute", "--n-db", "4", "--eps", "0.5"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_to_string(&["compute", "--n-db", "12", "--scenario", "exact"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_to_string(&["compute", "--n-db", "16", "--method", "newton"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
        let err = run_to_string(&["compute", "--n-db", "16", "--alpha", "2"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn compute_csv_has_one_row() {
        let s = run_to_string(&["compute", "--n-db", "16", "--m", "5", "--eps", "0.3"]).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], COMPUTE_HEADER.join(","));
        assert_eq!(lines[1].split(',').count(), COMPUTE_HEADER.len());
    }

    #[test]
    fn sweep_empty_range() {
        let s = run_to_string(&["sweep", "--n-db", "1e6", "--m-min", "10", "--m-max", "5"]).unwrap();
        assert_eq!(s, format!("{}\n", SWEEP_HEADER.join(",")));
    }

    #[test]
    fn sweep_needs_a_mode() {
        assert_eq!(run_to_string(&["sweep"]).unwrap_err().exit_code(), 2);
        assert!(run_to_string(&["sweep", "--n-db", "100", "--p-target", "0.5"]).is_err());
    }

    #[test]
    fn simulate_four_qubit_database() {
        let v = json(&["simulate", "--n-db", "4", "--m", "3", "--eps", "0.5", "--trials", "20000", "--seed", "3"]);
        assert_eq!(v["stats"]["trials"], 20000);
        assert_eq!(v["comparison"].as_array().unwrap().len(), 3);
        let all = &v["comparison"][2];
        assert_eq!(all["quantity"], "all_bit_failure");
        assert_eq!(all["analytic_low"], all["analytic_high"]);
    }

    #[test]
    fn simulate_rejects_non_power_of_two() {
        let err = run_to_string(&["simulate", "--n-db", "12", "--m", "3", "--eps", "0.5", "--scenario", "typical"]).unwrap_err();
        assert_eq!(err.exit_code(), 2);
    }
}
