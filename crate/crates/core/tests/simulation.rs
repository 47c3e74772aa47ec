use lrb::analytic::f_phys_est;
use lrb::channel::{bitflip_correlated, bitflip_independent, compose_channels, depolarizing, marginal_channel, tensor_product};
use lrb::channel::PauliChannel;
use lrb::code::{bitflip_code, five_qubit_code};
use lrb::fit::{fidelity_from_p, fit_decay, FitOptions};
use lrb::logical::RecoveryMode;
use lrb::rb::{
    exact_sequence_average, exact_sequence_average_twirl, simulate_lrb, simulate_physical_rb, LrbSimulator, RbConfig,
    RecoveryTiming, SpamSpec,
};
use lrb::Error;

fn flip(alpha: f64) -> PauliChannel {
    PauliChannel::from_strings(1, [("I", 1.0 - alpha), ("X", alpha)]).unwrap()
}

fn configs() -> Vec<(&'static str, RbConfig)> {
    let base = |noise, recovery| RbConfig::new(bitflip_code(), noise, recovery, vec![1, 2, 3], 200, 50, 77);
    let mut spam = base(bitflip_independent(0.05, 3).unwrap(), RecoveryMode::Lookup);
    spam.spam = SpamSpec { prep: Some(flip(0.02)), meas: Some(flip(0.02)), recovery_noise: None };
    let mut round = base(bitflip_independent(0.05, 3).unwrap(), RecoveryMode::Lookup);
    round.spam.recovery_noise = Some(bitflip_independent(0.03, 3).unwrap());
    round.recovery_timing = RecoveryTiming::PostProcessed;
    let correlated = compose_channels(
        &bitflip_correlated(0.02, &[(0, 1), (1, 2)], 3).unwrap(),
        &bitflip_independent(0.1, 3).unwrap(),
    )
    .unwrap();
    let depol = tensor_product(&vec![depolarizing(0.9).unwrap(); 5]);
    vec![
        ("lookup", base(bitflip_independent(0.1, 3).unwrap(), RecoveryMode::Lookup)),
        ("trivial", base(bitflip_independent(0.1, 3).unwrap(), RecoveryMode::Trivial)),
        ("correlated", base(correlated.clone(), RecoveryMode::Trivial)),
        ("spam", spam),
        ("recovery noise, post-processed", round),
        ("five-qubit", RbConfig::new(five_qubit_code(), depol, RecoveryMode::Lookup, vec![1, 2, 3], 200, 50, 78)),
    ]
}

#[test]
fn mean_survival_matches_exact_average() {
    for (name, config) in configs() {
        let data = simulate_lrb(&config).unwrap();
        for (m, rows) in data.by_length() {
            let fractions: Vec<f64> = rows.iter().map(|r| r.fraction()).collect();
            let l = fractions.len() as f64;
            let mean = fractions.iter().sum::<f64>() / l;
            let var = fractions.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / (l - 1.0);
            // Standard error over sequences, floored by the shot-noise bound.
            let sigma = (var / l).sqrt().max(0.5 / (l * config.shots_per_sequence as f64).sqrt());
            let exact = exact_sequence_average(&config, m).unwrap();
            assert!((mean - exact).abs() <= 5.0 * sigma, "{name} m={m}: {mean} vs {exact} (σ {sigma})");
            let twirl = exact_sequence_average_twirl(&config, m).unwrap();
            assert!((twirl - exact).abs() < 1e-12, "{name} m={m}: {twirl} vs {exact}");
        }
    }
}

#[test]
fn brute_force_is_bounded() {
    let (_, config) = configs().remove(0);
    assert!(matches!(exact_sequence_average(&config, 5), Err(Error::TooLarge { .. })));
    assert!(exact_sequence_average_twirl(&config, 40).is_ok());
}

#[test]
fn sequences_do_not_depend_on_evaluation_order() {
    let (_, mut config) = configs().remove(0);
    config.sequences_per_length = 6;
    config.shots_per_sequence = 20;
    let data = simulate_lrb(&config).unwrap();
    let sim = LrbSimulator::new(config.clone()).unwrap();
    let mut reversed: Vec<_> = data.rows().iter().rev().map(|r| sim.run_sequence(r.m, r.sequence_index).unwrap()).collect();
    reversed.reverse();
    assert_eq!(reversed.as_slice(), data.rows());
}

#[test]
fn long_sequences_plateau_at_one_half() {
    let config =
        RbConfig::new(bitflip_code(), bitflip_independent(0.1, 3).unwrap(), RecoveryMode::Lookup, vec![128, 256, 512], 50, 100, 5);
    let data = simulate_lrb(&config).unwrap();
    let mean = data.mean_survival()[&512];
    assert!((mean - 0.5).abs() < 0.035, "{mean}");
}

#[test]
fn noiseless_runs_always_survive() {
    for code in [bitflip_code(), five_qubit_code()] {
        let n = code.n_physical();
        for recovery in [RecoveryMode::Lookup, RecoveryMode::Trivial] {
            for timing in [RecoveryTiming::Concurrent, RecoveryTiming::PostProcessed] {
                let mut config = RbConfig::new(code.clone(), PauliChannel::identity(n), recovery, vec![1, 7, 33], 4, 10, 1);
                config.recovery_timing = timing;
                let data = simulate_lrb(&config).unwrap();
                assert!(data.rows().iter().all(|r| r.survivals == r.shots), "{} {recovery:?} {timing:?}", code.name());
            }
        }
    }
}

fn physical_fit(channel: &PauliChannel, seed: u64) -> (f64, f64) {
    let config = RbConfig::new(
        bitflip_code(),
        bitflip_independent(0.0, 3).unwrap(),
        RecoveryMode::Lookup,
        vec![1, 2, 4, 8, 16, 32],
        50,
        100,
        seed,
    );
    let data = simulate_physical_rb(channel, &config).unwrap();
    let fit = fit_decay(&data, &FitOptions { n_bootstrap: 200, seed, ..FitOptions::default() }).unwrap();
    (fit.p, fit.std_err.p)
}

#[test]
fn physical_bitflip_decay() {
    let (p, err) = physical_fit(&flip(0.1), 11);
    let exact = 1.0 - 4.0 * 0.1 / 3.0;
    assert!((p - exact).abs() <= 3.0 * err, "{p} ± {err} vs {exact}");
}

#[test]
fn marginal_rb_estimates_marginal_fidelity() {
    let (p, q) = (0.1, 0.01);
    let joint = compose_channels(&bitflip_correlated(q, &[(0, 1), (1, 2)], 3).unwrap(), &bitflip_independent(p, 3).unwrap())
        .unwrap();
    let (decay, err) = physical_fit(&marginal_channel(&joint, 0).unwrap(), 12);
    let f = fidelity_from_p(decay);
    let expected = f_phys_est(p, q).unwrap();
    assert!((f - expected).abs() <= 3.0 * err / 2.0, "{f} ± {} vs {expected}", err / 2.0);
}
