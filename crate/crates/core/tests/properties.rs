use ensemble_grover::critical::{loglog_fit, CriticalSolver};
use ensemble_grover::grover::{amplitudes, effective_polarization, m_min, ProblemSpec};
use ensemble_grover::stats::{pfail_all_bounds, pfail_one_beta, pfail_one_exact, Auto};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn amplitudes_are_normalised(n_db in 2_u64..1_000_000_000_000, q in 0_u64..100_000) {
        let (a, b) = amplitudes(n_db, q).unwrap();
        prop_assert!((a * a + b * b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn effective_polarization_within_range(k in 2_u32..40, eps in 0.0_f64..=1.0) {
        let problem = ProblemSpec::exact(1 << k).unwrap();
        let e = effective_polarization(eps, problem.n_db, problem.q).unwrap();
        prop_assert!((0.0..=eps).contains(&e));
    }

    #[test]
    fn majority_threshold(m in 1_u64..10_000_000) {
        let mm = m_min(m);
        prop_assert!(2 * mm > m && 2 * (mm - 1) <= m);
    }

    #[test]
    fn pfail_decreases_with_polarization(m in 1_u64..3000, a in 0.0_f64..=1.0, b in 0.0_f64..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let p_lo = pfail_one_beta(lo, m).unwrap();
        let p_hi = pfail_one_beta(hi, m).unwrap();
        prop_assert!(p_hi <= p_lo + 1e-15);
        prop_assert!((0.0..=0.5).contains(&p_lo));
    }

    #[test]
    fn odd_ensembles_improve_with_size(m in (0_u64..1000).prop_map(|k| 2 * k + 1), eps in 0.001_f64..=0.999) {
        let (a, b) = (pfail_one_exact(eps, m).unwrap(), pfail_one_exact(eps, m + 2).unwrap());
        // Both underflow to zero deep in the tail.
        prop_assert!(b < a || (a == 0.0 && b == 0.0));
    }

    #[test]
    fn bounds_are_ordered(k in 2_u32..30, m in 1_u64..5000, eps in 0.0_f64..=1.0) {
        let problem = ProblemSpec::exact(1 << k).unwrap();
        let b = pfail_all_bounds(&problem, eps, m, &Auto::default()).unwrap();
        prop_assert!(b.lower <= b.upper && b.upper <= 1.0);
    }

    #[test]
    fn fit_recovers_power_laws(slope in -1.0_f64..1.0, intercept in -3.0_f64..3.0) {
        let pts: Vec<(f64, f64)> = (6..=14)
            .map(|k| { let n = 10f64.powi(k); (n, 10f64.powf(intercept + slope * k as f64)) })
            .collect();
        let fit = loglog_fit(&pts).unwrap();
        prop_assert!((fit.slope - slope).abs() < 1e-10);
        prop_assert!((fit.intercept - intercept).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn critical_roots_are_consistent(log_n in 6.0_f64..14.0, frac in 0.05_f64..1.0) {
        let n_db = 10f64.powf(log_n) as u64;
        let problem = ProblemSpec::typical(n_db).unwrap();
        let m = ((frac * problem.m_max() as f64) as u64).max(1);
        let solver = CriticalSolver::default();
        let r = solver.solve(&problem, m).unwrap();
        let necc = r.necessary.unwrap();
        let suff = r.sufficient.unwrap();
        prop_assert!(necc.eps <= suff.eps);
        for root in [necc, suff] {
            prop_assert!(root.residual <= 1e-9);
            if root.iterations > 0 {
                let got = solver.method().evaluate(root.eps, m).unwrap();
                prop_assert!((got - root.target).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn necessary_grows_with_ensemble(log_n in 5.0_f64..9.0, frac in 0.5_f64..0.99) {
        let problem = ProblemSpec::typical(10f64.powf(log_n) as u64).unwrap();
        let solver = CriticalSolver::default();
        let m = ((frac * problem.m_max() as f64) as u64) | 1;
        prop_assume!(m + 2 <= problem.m_max());
        let a = solver.necessary(&problem, m).unwrap().unwrap().eps;
        let b = solver.necessary(&problem, m + 2).unwrap().unwrap().eps;
        prop_assert!(b >= a);
    }
}
