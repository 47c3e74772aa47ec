//! Acceptance gate: one line per criterion, then a single verdict.

use std::fs;
use std::process::Command;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use lrb::analytic::{anticorrelated_report, delta_f, error_probabilities_ind, f_norec, f_rec};
use lrb::channel::{bitflip_correlated, bitflip_independent, compose_channels, depolarizing, PauliChannel};
use lrb::code::bitflip_code;
use lrb::dense::replay_trial;
use lrb::fit::{estimate_code_properties, fit_decay, FitOptions};
use lrb::logical::{ancilla_equivalence_check, logical_fidelity, twirl_by_group_average, twirl_channel, RecoveryMode};
use lrb::ptm::{average_gate_fidelity, channel_to_ptm, Superoperator};
use lrb::rb::{
    exact_decay, exact_sequence_average, generate_sequence, simulate_lrb, LrbSimulator, RbConfig, RecoveryTiming,
};
use lrb::rng::shot_rng;

type Check = Result<String, String>;

fn bitflip_noise(p: f64, q: f64) -> PauliChannel {
    compose_channels(&bitflip_correlated(q, &[(0, 1), (1, 2)], 3).unwrap(), &bitflip_independent(p, 3).unwrap()).unwrap()
}

fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(f)
}

fn criterion_1() -> Check {
    let start = Instant::now();
    let code = bitflip_code();
    let mut worst: f64 = 0.0;
    for p in [0.001, 0.01, 0.05, 0.1, 0.25, 1.0 / 3.0] {
        for q in [0.0, p / 100.0, p / 10.0] {
            let noise = bitflip_noise(p, q);
            let rec = logical_fidelity(&code, &noise, RecoveryMode::Lookup).map_err(|e| e.to_string())?;
            let norec = logical_fidelity(&code, &noise, RecoveryMode::Trivial).map_err(|e| e.to_string())?;
            worst = worst.max((rec - f_rec(p, q).unwrap()).abs()).max((norec - f_norec(p, q).unwrap()).abs());
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("max |oracle − polynomial| = {worst:.2e}, {elapsed:.2?}");
    if worst <= 1e-10 && elapsed < Duration::from_secs(1) { Ok(detail) } else { Err(detail) }
}

fn pr_co(p: f64) -> f64 {
    error_probabilities_ind(p).unwrap().pr_co
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64, tol: f64) -> f64 {
    let flo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn criterion_2() -> Check {
    // Grid maximum, then bisection on the sign of a central difference.
    let grid: Vec<f64> = (0..=500).map(|k| k as f64 * 0.001).collect();
    let best = grid.iter().copied().max_by(|a, b| pr_co(*a).total_cmp(&pr_co(*b))).unwrap();
    let h = 1e-7;
    let slope = |p: f64| pr_co(p + h) - pr_co(p - h);
    let argmax = bisect(best - 0.001, best + 0.001, slope, 1e-9);
    let diff = |p: f64| {
        let t = error_probabilities_ind(p).unwrap();
        t.pr_co - t.pr_un
    };
    let crossing = bisect(0.34, 0.5, diff, 1e-13);
    let expected = (9.0 - 21f64.sqrt()) / 10.0;
    let detail = format!(
        "argmax pr_co = {argmax:.9} (grid {best}), pr_co = pr_un at {crossing:.12} vs {expected:.12}"
    );
    if (argmax - 1.0 / 3.0).abs() <= 1e-6 && (crossing - expected).abs() <= 1e-9 { Ok(detail) } else { Err(detail) }
}

/// Returns `(interior_ok, edge_max_abs, asymptotic_max_rel)`.
fn criterion_3_parts() -> (bool, f64, f64) {
    let axis: Vec<f64> = (1..=100).map(|k| k as f64 * 0.005).collect();
    let mut interior_ok = true;
    let mut edge: f64 = 0.0;
    for &p in &axis {
        for &q in &axis {
            let d = delta_f(p, q).unwrap();
            if p < 0.5 {
                interior_ok &= d > 0.0;
            } else {
                edge = edge.max(d.abs());
            }
        }
    }
    let small: Vec<f64> = (1..=40).map(|k| k as f64 * 0.00025).collect();
    let mut rel: f64 = 0.0;
    for &p in &small {
        for &q in &small {
            let lead = 4.0 / 3.0 * q;
            rel = rel.max((delta_f(p, q).unwrap() - lead).abs() / lead);
        }
    }
    (interior_ok, edge, rel)
}

fn criterion_4() -> Check {
    let mut worst_marginal: f64 = 0.0;
    for k in 1..=1000 {
        let p = k as f64 / 1000.0;
        let r = anticorrelated_report(p).map_err(|e| e.to_string())?;
        if r.f_logical_true != 1.0 || r.f_logical_extrapolated >= 1.0 {
            return Err(format!("p = {p}: true {}, extrapolated {}", r.f_logical_true, r.f_logical_extrapolated));
        }
        // Marginal fidelity of the mixture, from its transfer matrix.
        let marginal = lrb::channel::marginal_channel(&lrb::channel::bitflip_mixture(p, 3).unwrap(), 0).unwrap();
        let f = average_gate_fidelity(&channel_to_ptm(&marginal));
        worst_marginal = worst_marginal.max((f - (1.0 - 2.0 * p / 9.0)).abs()).max((r.f_phys_est - f).abs());
    }
    let detail = format!("1000 points in (0, 1], marginal fidelity error {worst_marginal:.2e}");
    if worst_marginal <= 1e-12 { Ok(detail) } else { Err(detail) }
}

fn criterion_5() -> Check {
    let start = Instant::now();
    let base = RbConfig::new(bitflip_code(), bitflip_noise(0.1, 0.0), RecoveryMode::Lookup, vec![1, 2, 3], 1, 1, 0);
    let mut with_spam = base.clone();
    with_spam.spam.prep = Some(bitflip_independent(0.02, 1).unwrap());
    with_spam.spam.meas = Some(bitflip_independent(0.02, 1).unwrap());
    let mut worst: f64 = 0.0;
    for config in [&base, &with_spam] {
        let (a, p, b) = exact_decay(config).map_err(|e| e.to_string())?;
        for m in 1..=4 {
            let brute = exact_sequence_average(config, m).map_err(|e| e.to_string())?;
            worst = worst.max((brute - (a * p.powi(m as i32) + b)).abs());
        }
    }
    let elapsed = start.elapsed();
    let detail = format!("max |brute force − A pᵐ − B| = {worst:.2e} over m ≤ 4, with and without SPAM, {elapsed:.2?}");
    if worst <= 1e-12 && elapsed < Duration::from_secs(300) { Ok(detail) } else { Err(detail) }
}

fn criterion_6() -> Check {
    let start = Instant::now();
    let lengths = vec![1, 2, 4, 8, 16, 32, 64];
    let rec = RbConfig::new(bitflip_code(), bitflip_noise(0.1, 0.0), RecoveryMode::Lookup, lengths.clone(), 50, 200, 6001);
    let norec = RbConfig { recovery: RecoveryMode::Trivial, master_seed: 6002, ..rec.clone() };
    let options = FitOptions { seed: 6003, ..FitOptions::default() };
    let (fit_rec, fit_norec) = single_threaded(|| {
        let a = fit_decay(&simulate_lrb(&rec).unwrap(), &options).unwrap();
        let b = fit_decay(&simulate_lrb(&norec).unwrap(), &options).unwrap();
        (a, b)
    });
    let elapsed = start.elapsed();
    let est = estimate_code_properties(&fit_rec, &fit_norec).map_err(|e| e.to_string())?;
    let z = |x: f64, truth: f64, s: f64| (x - truth).abs() / s;
    let zs = [
        z(fit_rec.p, 0.9626666666666667, fit_rec.std_err.p),
        z(fit_norec.p, 0.6386666666666667, fit_norec.std_err.p),
        z(est.pr_no, 0.8193333333333334, est.std_err.pr_no),
        z(est.pr_co, 0.162, est.std_err.pr_co),
        z(est.pr_un, 0.018666666666666667, est.std_err.pr_un),
    ];
    let detail = format!(
        "p̂_rec = {:.5} ± {:.5}, p̂_norec = {:.5} ± {:.5}, Pr = ({:.4}, {:.4}, {:.4}), max |z| = {:.2}, {elapsed:.2?} on one thread",
        fit_rec.p,
        fit_rec.std_err.p,
        fit_norec.p,
        fit_norec.std_err.p,
        est.pr_no,
        est.pr_co,
        est.pr_un,
        zs.iter().fold(0.0f64, |a, &b| a.max(b))
    );
    if zs.iter().all(|&z| z <= 3.0) && elapsed < Duration::from_secs(60) { Ok(detail) } else { Err(detail) }
}

fn criterion_7() -> Check {
    let mut base = RbConfig::new(bitflip_code(), bitflip_noise(0.1, 0.02), RecoveryMode::Lookup, vec![1, 2, 3], 1, 1, 77);
    base.spam.recovery_noise = Some(bitflip_independent(0.02, 3).unwrap());
    let concurrent = LrbSimulator::new(base.clone()).unwrap();
    let post = LrbSimulator::new(RbConfig { recovery_timing: RecoveryTiming::PostProcessed, ..base }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut survived, mut mismatches) = (0, 0);
    let trials = 100_000;
    for t in 0..trials {
        let m = rng.gen_range(1..=24);
        let seq = generate_sequence(m, &mut rng).unwrap();
        let a = concurrent.run_trial(&seq, &mut shot_rng(77, m, t, 0));
        let b = post.run_trial(&seq, &mut shot_rng(77, m, t, 0));
        survived += a as usize;
        mismatches += (a != b) as usize;
    }
    let detail = format!("{trials} trials, {mismatches} mismatches, survival rate {:.3}", survived as f64 / trials as f64);
    if mismatches == 0 { Ok(detail) } else { Err(detail) }
}

fn criterion_8() -> Check {
    let code = bitflip_code();
    let mut config = RbConfig::new(code.clone(), bitflip_noise(0.15, 0.05), RecoveryMode::Lookup, vec![1, 2, 3], 1, 1, 88);
    config.spam.prep = Some(depolarizing(0.9).unwrap());
    config.spam.meas = Some(depolarizing(0.9).unwrap());
    config.spam.recovery_noise = Some(bitflip_independent(0.03, 3).unwrap());
    let concurrent = LrbSimulator::new(config.clone()).unwrap();
    let post = LrbSimulator::new(RbConfig { recovery_timing: RecoveryTiming::PostProcessed, ..config }).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let (mut survived, mut mismatches) = (0, 0);
    let trials = 1000;
    for t in 0..trials {
        let m = rng.gen_range(1..=8);
        let seq = generate_sequence(m, &mut rng).unwrap();
        let (frame, realization) = concurrent.run_trial_recorded(&seq, &mut shot_rng(88, m, t, 0));
        let post_frame = post.evaluate(&seq, &realization).unwrap();
        let prob = replay_trial(&code, seq.gates(), &realization).map_err(|e| e.to_string())?;
        let dense = prob > 0.5;
        if (prob - if dense { 1.0 } else { 0.0 }).abs() > 1e-9 {
            return Err(format!("trial {t}: dense survival probability {prob} is not 0 or 1"));
        }
        survived += frame as usize;
        mismatches += (frame != dense || post_frame != dense) as usize;
    }
    let detail = format!("{trials} trials, {mismatches} mismatches, survival rate {:.3}", survived as f64 / trials as f64);
    if mismatches == 0 { Ok(detail) } else { Err(detail) }
}

fn criterion_9() -> Check {
    let code = bitflip_code();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let (p, q) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
        if !ancilla_equivalence_check(&code, &bitflip_noise(p, q)).map_err(|e| e.to_string())? {
            return Err(format!("mismatch at p = {p}, q = {q}"));
        }
    }
    Ok("20 random (p, q), transfer matrices equal to 1e-12".into())
}

fn criterion_10() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let w: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
        let total: f64 = w.iter().sum();
        let channel = PauliChannel::from_strings(1, ["I", "X", "Y", "Z"].into_iter().zip(w.iter().map(|x| x / total)))
            .map_err(|e| e.to_string())?;
        let ptm = channel_to_ptm(&channel);
        let (p, twirled) = twirl_channel(&ptm).map_err(|e| e.to_string())?;
        let f = average_gate_fidelity(&ptm);
        let diag = Superoperator::from_diagonal(&[1.0, 2.0 * f - 1.0, 2.0 * f - 1.0, 2.0 * f - 1.0]).unwrap();
        let group = twirl_by_group_average(&ptm).map_err(|e| e.to_string())?;
        worst = worst.max((p - (2.0 * f - 1.0)).abs()).max(twirled.max_abs_diff(&diag)).max(twirled.max_abs_diff(&group));
    }
    let detail = format!("20 random Pauli channels, max deviation {worst:.2e}");
    if worst <= 1e-12 { Ok(detail) } else { Err(detail) }
}

fn criterion_11() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let config = dir.path().join("config.json");
    fs::write(
        &config,
        r#"{
  "code": "bitflip",
  "noise": {"type": "composite", "channels": [
    {"type": "bitflip_independent", "p": 0.08, "n": 3},
    {"type": "bitflip_correlated", "q": 0.01, "pairs": [[0, 1], [1, 2]], "n": 3}
  ]},
  "recovery": "lookup",
  "recovery_timing": "post_processed",
  "spam": {"prep": {"type": "bitflip_independent", "p": 0.02, "n": 1}},
  "sequence_lengths": [1, 3, 9, 27],
  "sequences_per_length": 20,
  "shots_per_sequence": 50,
  "seed": 11,
  "n_bootstrap": 200,
  "emit": ["dataset", "fit", "oracle", "figures"]
}"#,
    )
    .map_err(|e| e.to_string())?;
    let run = |threads: &str, out: &str| -> Result<(), String> {
        let status = Command::new(env!("CARGO_BIN_EXE_lrb"))
            .args(["--threads", threads, "simulate", "--config"])
            .arg(&config)
            .arg("--out")
            .arg(dir.path().join(out))
            .status()
            .map_err(|e| e.to_string())?;
        if status.success() { Ok(()) } else { Err(format!("simulate with {threads} threads: {status}")) }
    };
    run("1", "one")?;
    run("8", "many")?;
    let mut names: Vec<String> = fs::read_dir(dir.path().join("one"))
        .map_err(|e| e.to_string())?
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in &names {
        let a = fs::read(dir.path().join("one").join(name)).map_err(|e| e.to_string())?;
        let b = fs::read(dir.path().join("many").join(name)).map_err(|e| e.to_string())?;
        if a != b {
            return Err(format!("{name} differs between 1 and 8 threads"));
        }
    }
    Ok(format!("{} artifacts byte-identical across 1 and 8 threads: {}", names.len(), names.join(", ")))
}

/// Written to the raw stderr handle so the lines survive libtest's capture.
fn report(line: String) {
    use std::io::Write;
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "{line}");
}

#[test]
fn acceptance() {
    let (interior_ok, edge, rel) = criterion_3_parts();
    let c3_core = interior_ok && edge <= 1e-15 && rel <= 0.1;
    let criteria: Vec<(&str, Check)> = vec![
        ("1 oracle matches closed-form fidelities", criterion_1()),
        ("2 Pr(Co) landmarks at 1/3 and (9 − √21)/10", criterion_2()),
        (
            "3 overestimation delta_f > 0 and ≈ (4/3)q",
            // Literal strict positivity on the closed edge p = 0.5 is false for
            // every correct implementation: delta_f vanishes there identically.
            Err(format!(
                "delta_f > 0 for all 0 < p < 0.5: {interior_ok}; on p = 0.5 delta_f = 0 (max |delta_f| {edge:.1e}), \
                 so the strict inequality fails on that edge; |delta_f/(4q/3) − 1| ≤ {rel:.3} for p, q ≤ 1e-2"
            )),
        ),
        ("4 anticorrelated underestimation", criterion_4()),
        ("5 brute-force sequence average equals A pᵐ + B", criterion_5()),
        ("6 Monte Carlo fit consistency", criterion_6()),
        ("7 post-processed and concurrent recovery agree", criterion_7()),
        ("8 Pauli frame equals density-matrix simulation", criterion_8()),
        ("9 ancilla-coupled recovery equals direct recovery", criterion_9()),
        ("10 twirl is depolarizing with p = 2F − 1", criterion_10()),
        ("11 artifacts independent of thread count", criterion_11()),
    ];
    // Criteria whose literal statement cannot hold; the harness still
    // requires every achievable part of them to pass.
    let known_unattainable = ["3 "];
    let mut unexpected = Vec::new();
    for (name, result) in &criteria {
        let expected_fail = known_unattainable.iter().any(|k| name.starts_with(k));
        match result {
            Ok(detail) => report(format!("PASS  criterion {name}: {detail}")),
            Err(detail) if expected_fail => report(format!("FAIL  criterion {name} (known, see notes): {detail}")),
            Err(detail) => {
                report(format!("FAIL  criterion {name}: {detail}"));
                unexpected.push(*name);
            }
        }
    }
    assert!(c3_core, "achievable parts of criterion 3 failed");
    assert!(unexpected.is_empty(), "failed criteria: {unexpected:?}");
}
