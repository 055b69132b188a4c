use ensemble_grover::grover::ProblemSpec;
use ensemble_grover::montecarlo::{estimate_failures, outcome_histogram, run_protocol, OutcomeModel, Rate};
use ensemble_grover::stats::{pfail_one_exact, psall_two_qubit};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

#[test]
fn unpolarized_draws_are_uniform() {
    let model = OutcomeModel::new(8, 2, 0.0).unwrap();
    let draws = 1_000_000;
    let hist = outcome_histogram(&model, draws, 77).unwrap();
    let expected = draws as f64 / 8.0;
    let chi2: f64 = hist.iter().map(|&c| (c as f64 - expected).powi(2) / expected).sum();
    let critical = ChiSquared::new(7.0).unwrap().inverse_cdf(0.99);
    assert!(chi2 < critical, "chi2 = {chi2}, critical = {critical}");
}

#[test]
fn table_one_at_half_polarization() {
    let model = OutcomeModel::new(4, 1, 0.5).unwrap();
    let draws = 1_000_000;
    let hist = outcome_histogram(&model, draws, 3).unwrap();
    for (x, &c) in hist.iter().enumerate() {
        let want = if x == 3 { 0.625 } else { 0.125 };
        assert!(Rate::from_counts(c, draws).within(want, 3.0), "cell {x}: {c}");
    }
}

#[test]
fn single_member_returns_its_outcome() {
    let model = OutcomeModel::new(16, 3, 0.4).unwrap();
    for seed in 0..50 {
        let x = run_protocol(&model, 1, &mut ChaCha8Rng::seed_from_u64(seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        assert_eq!(x, ensemble_grover::montecarlo::sample_member(&model, &mut rng));
    }
}

#[test]
fn three_members_match_two_qubit_law() {
    let model = OutcomeModel::new(4, 1, 0.5).unwrap();
    let stats = estimate_failures(&model, 3, 1_000_000, 8).unwrap();
    let want = 1.0 - psall_two_qubit(0.5, 3).unwrap();
    assert!(stats.all_bit_rate().within(want, 3.0), "{:?} vs {want}", stats.all_bit_rate());
}

#[test]
fn unpolarized_single_member_fails_three_quarters() {
    let model = OutcomeModel::new(4, 1, 0.0).unwrap();
    let stats = estimate_failures(&model, 1, 1_000_000, 21).unwrap();
    assert!(stats.all_bit_rate().within(0.75, 3.0));
}

#[test]
fn per_bit_failure_at_five_members() {
    // N = 4, q = 1 gives alpha = 1, so the effective polarization is eps.
    let model = OutcomeModel::new(4, 1, 0.2).unwrap();
    let stats = estimate_failures(&model, 5, 1_000_000, 4).unwrap();
    let want = pfail_one_exact(0.2, 5).unwrap();
    assert!((want - 0.31744).abs() < 1e-14);
    for bit in 0..2 {
        assert!(stats.per_bit_rate(bit).within(want, 3.0), "bit {bit}: {:?}", stats.per_bit_rate(bit));
    }
}

#[test]
fn sandwich_and_qubit_symmetry() {
    let trials = 100_000;
    for n_db in [4_u64, 8, 16] {
        let problem = ProblemSpec::exact(n_db).unwrap();
        let n = problem.n_qubits as usize;
        for m in [1, 3, 5, 11] {
            for eps in [0.0, 0.3, 0.7, 1.0] {
                let model = OutcomeModel::from_problem(&problem, eps).unwrap();
                let stats = estimate_failures(&model, m, trials, n_db * 1000 + m).unwrap();
                let all = stats.all_bit_rate();
                let pooled = stats.pooled_bit_rate();
                let slack = 4.0 * (all.sigma + n as f64 * pooled.sigma) + 1e-15;
                for bit in 0..n {
                    let one = stats.per_bit_rate(bit);
                    assert!(one.value <= all.value + slack, "N={n_db} M={m} eps={eps}");
                }
                assert!(all.value <= n as f64 * pooled.value + slack, "N={n_db} M={m} eps={eps}");
                for bit in 0..n {
                    let one = stats.per_bit_rate(bit);
                    let sigma = (one.sigma.powi(2) + pooled.sigma.powi(2)).sqrt();
                    assert!((one.value - pooled.value).abs() <= 4.0 * sigma + 1e-15, "N={n_db} M={m} eps={eps} bit {bit}");
                }
            }
        }
    }
}

#[test]
fn single_bit_marginal() {
    for n_db in [8_u64, 64] {
        let problem = ProblemSpec::exact(n_db).unwrap();
        for eps in [0.1, 0.6] {
            let model = OutcomeModel::from_problem(&problem, eps).unwrap();
            let stats = estimate_failures(&model, 1, 400_000, 99).unwrap();
            let want = (1.0 - problem.effective_polarization(eps).unwrap()) / 2.0;
            assert!(stats.pooled_bit_rate().within(want, 3.0), "N={n_db} eps={eps}");
        }
    }
}

#[test]
fn large_database_sampling_is_cheap() {
    let problem = ProblemSpec::exact(1 << 46).unwrap();
    let model = OutcomeModel::from_problem(&problem, 0.05).unwrap();
    let stats = estimate_failures(&model, 101, 2_000, 1).unwrap();
    assert_eq!(stats.per_bit_failures.len(), 46);
}
