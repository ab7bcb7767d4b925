//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line (run with `--nocapture` to see them as they complete).
//!
//! The regime fixtures live in `tests/fixtures/` and are full experiment
//! configs; the expected values are closed forms evaluated at high precision
//! or distributional laws with CLT-based tolerances (three Monte Carlo
//! standard errors plus an absolute floor of 1e-3).

use holling_core::{
    check_moment_bound, classify_regime, estimate_log_slope, estimate_time_average,
    logistic_time_average, run_comparison_ensemble, run_ensemble, run_experiment,
    simulate_comparison, simulate_path, verify_regime, ComparisonKind, ComparisonSpec,
    CrispModel, ExperimentConfig, Interval, IntervalError, JumpAtom, JumpMeasure,
    PositiveInterval, Regime, SampledPath, SimulationConfig, Species, StateVector, Trajectory,
    VerifyOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use std::time::Instant;

fn criterion(n: u32, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {n:>2} [{}] {name}: {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {n} ({name}) failed: {detail}");
}

fn fixture(name: &str) -> ExperimentConfig {
    let text = match name {
        "extinction" => include_str!("fixtures/extinction.toml"),
        "partial_extinction" => include_str!("fixtures/partial_extinction.toml"),
        "persistence" => include_str!("fixtures/persistence.toml"),
        other => panic!("unknown fixture {other}"),
    };
    ExperimentConfig::from_toml_str(text).expect("fixture parses")
}

fn assert_recorded_positivity(ensemble: &[Trajectory]) {
    for traj in ensemble {
        for sp in Species::ALL {
            for &u in traj.log_series(sp) {
                assert!(u.is_finite());
                assert!(u.exp() > 0.0);
            }
        }
    }
}

static PERSISTENCE: OnceLock<(CrispModel, SimulationConfig, StateVector, Vec<Trajectory>)> =
    OnceLock::new();

fn persistence_ensemble() -> &'static (CrispModel, SimulationConfig, StateVector, Vec<Trajectory>)
{
    PERSISTENCE.get_or_init(|| {
        let cfg = fixture("persistence");
        let crisp = cfg.model.realize(cfg.single_p().unwrap()).unwrap();
        let ensemble = run_ensemble(&crisp, &cfg.init, &cfg.sim).unwrap();
        (crisp, cfg.sim.clone(), cfg.init, ensemble)
    })
}

fn sample_interval(rng: &mut ChaCha8Rng) -> Interval {
    let lo = rng.random_range(-50.0..50.0);
    let w = rng.random_range(0.0..40.0);
    Interval::new(lo, lo + w).unwrap()
}

fn sample_sign_definite(rng: &mut ChaCha8Rng) -> Interval {
    let lo = rng.random_range(0.5..50.0);
    let w = rng.random_range(0.0..10.0);
    if rng.random::<bool>() {
        Interval::new(lo, lo + w).unwrap()
    } else {
        Interval::new(-(lo + w), -lo).unwrap()
    }
}

fn sample_member(rng: &mut ChaCha8Rng, iv: &Interval) -> f64 {
    (iv.lo() + rng.random::<f64>() * iv.width()).clamp(iv.lo(), iv.hi())
}

/// Criterion 1: interval-algebra soundness. 1e5 randomized trials per
/// operation with zero violations; membership for add/scalar_mul/mul/div,
/// the endpoint-formula contract for the (partial) subtraction; realize
/// endpoint identities exact.
#[test]
fn criterion_01_interval_algebra_soundness() {
    let start = Instant::now();
    const TRIALS: usize = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(0xACCE01);
    let mut violations = 0usize;

    for _ in 0..TRIALS {
        let (a, b) = (sample_interval(&mut rng), sample_interval(&mut rng));
        let (x, y) = (sample_member(&mut rng, &a), sample_member(&mut rng, &b));
        if !a.add(&b).contains(x + y) {
            violations += 1;
        }
    }
    for _ in 0..TRIALS {
        let (a, b) = (sample_interval(&mut rng), sample_interval(&mut rng));
        let (x, y) = (sample_member(&mut rng, &a), sample_member(&mut rng, &b));
        if !a.mul(&b).contains(x * y) {
            violations += 1;
        }
    }
    for _ in 0..TRIALS {
        let a = sample_interval(&mut rng);
        let x = sample_member(&mut rng, &a);
        let alpha = rng.random_range(1e-6..100.0);
        if !a.scale(alpha).unwrap().contains(alpha * x) {
            violations += 1;
        }
    }
    for _ in 0..TRIALS {
        let (a, b) = (sample_interval(&mut rng), sample_sign_definite(&mut rng));
        let (x, y) = (sample_member(&mut rng, &a), sample_member(&mut rng, &b));
        if !a.div(&b).unwrap().contains(x / y) {
            violations += 1;
        }
    }
    // Subtraction is endpoint-wise and partial: valid exactly when the
    // minuend is at least as wide as the subtrahend.
    for _ in 0..TRIALS {
        let (a, b) = (sample_interval(&mut rng), sample_interval(&mut rng));
        match a.sub(&b) {
            Ok(d) => {
                if d.lo() != a.lo() - b.lo() || d.hi() != a.hi() - b.hi() || d.lo() > d.hi() {
                    violations += 1;
                }
            }
            Err(IntervalError::InvalidInterval { .. }) => {
                if a.lo() - b.lo() <= a.hi() - b.hi() {
                    violations += 1;
                }
            }
            Err(_) => violations += 1,
        }
    }
    // realize endpoint identities, exact
    for _ in 0..10_000 {
        let lo = rng.random_range(1e-6..100.0);
        let w = rng.random_range(0.0..100.0);
        let g = PositiveInterval::from_endpoints(lo, lo + w).unwrap();
        if g.realize(0.0).unwrap() != lo || g.realize(1.0).unwrap() != lo + w {
            violations += 1;
        }
    }

    let elapsed = start.elapsed();
    criterion(
        1,
        "interval algebra soundness",
        violations == 0 && elapsed.as_secs_f64() < 5.0,
        &format!("{violations} violations over 5x{TRIALS} trials in {elapsed:.2?}"),
    );
}

/// Criterion 2: the 1-D logistic jump-diffusion ensemble reproduces the
/// closed-form time average b/a and a zero log-slope.
#[test]
fn criterion_02_logistic_lemma_oracle() {
    let start = Instant::now();
    let rate = PositiveInterval::from_endpoints(0.3, 0.5)
        .unwrap()
        .realize(0.5)
        .unwrap();
    let jumps = JumpMeasure::new(vec![JumpAtom {
        weight: 0.5,
        c1: 0.1,
        c2: 0.0,
        c3: 0.0,
    }])
    .unwrap();
    let model = CrispModel::new(
        0.5,
        [rate, 0.5, 0.5],
        [[0.2, 0.0, 0.0], [0.0, 0.5, 0.0], [0.0, 0.0, 0.5]],
        [0.1, 0.1, 0.1],
        jumps,
    )
    .unwrap();
    let spec = ComparisonSpec::new(ComparisonKind::Phi1, &model);
    let predicted = logistic_time_average(
        spec.rate(),
        spec.self_interaction(),
        spec.sigma(),
        &spec.jump_pairs(),
    )
    .unwrap();
    // frozen high-precision closed form: (sqrt(0.15) - 0.005 + 0.5 ln 1.1)/0.2
    assert!((predicted - 2.1497671226145206).abs() < 1e-12);

    let cfg = SimulationConfig {
        horizon: 1000.0,
        dt: 1e-3,
        seed: 4242,
        n_paths: 200,
        record_stride: 100,
    };
    let ensemble = run_comparison_ensemble(&spec, 0.5, &cfg).unwrap();
    let window = (cfg.horizon / 2.0, cfg.horizon);
    let avg = estimate_time_average(&ensemble, Species::Prey1, window).unwrap();
    let slope = estimate_log_slope(&ensemble, Species::Prey1, 0.5).unwrap();

    let avg_tol = 3.0 * avg.std_error + 1e-3;
    let slope_tol = 3.0 * slope.std_error + 1e-3;
    let within_se = (avg.value - predicted).abs() <= avg_tol;
    let within_5pct = (avg.value - predicted).abs() <= 0.05 * predicted;
    let slope_zero = slope.value.abs() <= slope_tol;
    let elapsed = start.elapsed();
    criterion(
        2,
        "Lemma-4.2-style logistic oracle",
        within_se && within_5pct && slope_zero && elapsed.as_secs_f64() < 120.0,
        &format!(
            "<x> = {:.5} vs b/a = {:.5} (tol {:.5}), slope = {:.2e} (tol {:.2e}), {elapsed:.2?}",
            avg.value, predicted, avg_tol, slope.value, slope_tol
        ),
    );
}

/// Criterion 3: total extinction. All three terminal states below 1e-4 on
/// at least 95% of paths, tail log-slopes bounded by the b_i.
#[test]
fn criterion_03_total_extinction() {
    let start = Instant::now();
    let cfg = fixture("extinction");
    let crisp = cfg.model.realize(cfg.single_p().unwrap()).unwrap();
    let b = crisp.b().as_array();
    assert!(
        b.iter().all(|&bi| (-0.4..=-0.1).contains(&bi)),
        "fixture thresholds drifted: {b:?}"
    );
    let verdict = classify_regime(crisp.b(), &crisp);
    assert_eq!(verdict.regime, Regime::AllExtinct);

    let ensemble = run_ensemble(&crisp, &cfg.init, &cfg.sim).unwrap();
    assert_recorded_positivity(&ensemble);
    let report = verify_regime(&crisp, &verdict, &ensemble, &VerifyOptions::default()).unwrap();
    let elapsed = start.elapsed();
    criterion(
        3,
        "total extinction",
        report.all_pass() && elapsed.as_secs_f64() < 120.0,
        &format!(
            "b = ({:.3}, {:.3}, {:.3}); failed: {:?}; {elapsed:.2?}",
            b[0],
            b[1],
            b[2],
            report.failed_names()
        ),
    );
}

/// Criterion 4: partial extinction. Prey 2 and the predator die out, the
/// prey-1 time average matches b1/a11.
#[test]
fn criterion_04_partial_extinction() {
    let start = Instant::now();
    let cfg = fixture("partial_extinction");
    let crisp = cfg.model.realize(cfg.single_p().unwrap()).unwrap();
    let b = crisp.b();
    let a31 = crisp.a(Species::Predator, Species::Prey1);
    assert!(b.b1 > 0.0 && b.b2 < 0.0 && b.b3 + a31 < 0.0);
    let verdict = classify_regime(b, &crisp);
    assert_eq!(verdict.regime, Regime::PreyOnePersists);
    let predicted_avg = b.b1 / crisp.a(Species::Prey1, Species::Prey1);

    let ensemble = run_ensemble(&crisp, &cfg.init, &cfg.sim).unwrap();
    assert_recorded_positivity(&ensemble);
    let report = verify_regime(&crisp, &verdict, &ensemble, &VerifyOptions::default()).unwrap();
    let observed_avg = report
        .checks
        .iter()
        .find(|c| c.name == "time_average_x1")
        .expect("x1 average check present")
        .observed;
    let elapsed = start.elapsed();
    criterion(
        4,
        "partial extinction with prey-1 average",
        report.all_pass() && elapsed.as_secs_f64() < 120.0,
        &format!(
            "<x1> = {observed_avg:.4} vs b1/a11 = {predicted_avg:.4}; failed: {:?}; {elapsed:.2?}",
            report.failed_names()
        ),
    );
}

/// Criterion 5: persistence bounds. Every long-run average inside its
/// closed-form interval, every log-slope within CI of zero.
#[test]
fn criterion_05_persistence_bounds() {
    let start = Instant::now();
    let (crisp, _, _, ensemble) = persistence_ensemble();
    let verdict = classify_regime(crisp.b(), crisp);
    assert_eq!(verdict.regime, Regime::AllPersistent);
    assert_recorded_positivity(ensemble);
    let report = verify_regime(crisp, &verdict, ensemble, &VerifyOptions::default()).unwrap();
    let bounds: Vec<String> = Species::ALL
        .iter()
        .map(|&sp| {
            let (lo, hi) = verdict.predicted_bounds[sp.index()].unwrap();
            format!("{} in [{lo:.3}, {hi:.3}]", sp.label())
        })
        .collect();
    let elapsed = start.elapsed();
    criterion(
        5,
        "persistence bounds",
        report.all_pass() && elapsed.as_secs_f64() < 120.0,
        &format!("{}; failed: {:?}; {elapsed:.2?}", bounds.join(", "), report.failed_names()),
    );
}

/// Criterion 6: pathwise comparison. With shared increments, x1 <= phi1,
/// x2 <= phi2, phi3 <= y <= phi4 at every recorded point on 50 paths.
#[test]
fn criterion_06_pathwise_comparison() {
    let start = Instant::now();
    let cfg_exp = fixture("persistence");
    let crisp = cfg_exp.model.realize(0.5).unwrap();
    let cfg = SimulationConfig {
        horizon: 200.0,
        dt: 1e-3,
        seed: 606,
        n_paths: 50,
        record_stride: 100,
    };
    let init = cfg_exp.init;
    let specs: Vec<ComparisonSpec> = ComparisonKind::ALL
        .iter()
        .map(|&k| ComparisonSpec::new(k, &crisp))
        .collect();
    let mut violations = 0usize;
    let mut points = 0usize;
    for path in 0..cfg.n_paths as u64 {
        let full = simulate_path(&crisp, &init, &cfg, path).unwrap();
        let phi: Vec<_> = specs
            .iter()
            .map(|s| simulate_comparison(s, init.get(s.species()), &cfg, path).unwrap())
            .collect();
        let u1 = full.log_series(Species::Prey1);
        let u2 = full.log_series(Species::Prey2);
        let v = full.log_series(Species::Predator);
        for i in 0..full.times().len() {
            points += 1;
            // log-space slack 1e-9 == relative slack 1e-9 on states
            if u1[i] > phi[0].log_values()[i] + 1e-9
                || u2[i] > phi[1].log_values()[i] + 1e-9
                || v[i] < phi[2].log_values()[i] - 1e-9
                || v[i] > phi[3].log_values()[i] + 1e-9
            {
                violations += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    criterion(
        6,
        "pathwise comparison ordering",
        violations == 0,
        &format!("{violations} violations over {points} grid points x 50 paths; {elapsed:.2?}"),
    );
}

/// Criterion 7: positivity and stability. No blow-up errors on any
/// acceptance config; every recorded state strictly positive.
#[test]
fn criterion_07_positivity_and_stability() {
    let start = Instant::now();
    let mut checked = 0usize;
    for name in ["extinction", "partial_extinction", "persistence"] {
        let cfg = fixture(name);
        let crisp = cfg.model.realize(cfg.single_p().unwrap()).unwrap();
        let sim = SimulationConfig {
            n_paths: 50,
            ..cfg.sim.clone()
        };
        let ensemble = run_ensemble(&crisp, &cfg.init, &sim)
            .unwrap_or_else(|e| panic!("config {name} must not blow up: {e}"));
        assert_recorded_positivity(&ensemble);
        checked += ensemble.iter().map(|t| t.times().len() * 3).sum::<usize>();
    }
    let elapsed = start.elapsed();
    criterion(
        7,
        "positivity and stability",
        true,
        &format!("{checked} recorded components positive and finite; {elapsed:.2?}"),
    );
}

/// Criterion 8: martingale decay. The fitted power-law exponent of
/// E|M_i(T)/T| over T in {100, 400, 1600} lies in [-0.75, -0.25].
#[test]
fn criterion_08_martingale_decay() {
    let start = Instant::now();
    let cfg_exp = fixture("persistence");
    let crisp = cfg_exp.model.realize(0.5).unwrap();
    let horizons = [100.0_f64, 400.0, 1600.0];
    let mut means = vec![Vec::new(); 3]; // per species, per horizon
    for &horizon in &horizons {
        let cfg = SimulationConfig {
            horizon,
            dt: 0.01,
            seed: 808,
            n_paths: 100,
            record_stride: (horizon / 0.01) as usize,
        };
        let ensemble = run_ensemble(&crisp, &cfg_exp.init, &cfg).unwrap();
        for (k, &sp) in Species::ALL.iter().enumerate() {
            let mean = ensemble
                .iter()
                .map(|t| (t.diffusion_martingale(sp).last().unwrap() / horizon).abs())
                .sum::<f64>()
                / ensemble.len() as f64;
            means[k].push(mean);
        }
    }
    let log_t: Vec<f64> = horizons.iter().map(|t| t.ln()).collect();
    let mut exponents = [0.0_f64; 3];
    for k in 0..3 {
        let log_m: Vec<f64> = means[k].iter().map(|m| m.ln()).collect();
        exponents[k] = holling_core::stats::least_squares_slope(&log_t, &log_m);
    }
    let pass = exponents.iter().all(|e| (-0.75..=-0.25).contains(e));
    let elapsed = start.elapsed();
    criterion(
        8,
        "martingale decay exponent",
        pass,
        &format!(
            "fitted exponents ({:.3}, {:.3}, {:.3}) for T^-1/2 law; {elapsed:.2?}",
            exponents[0], exponents[1], exponents[2]
        ),
    );
}

/// Criterion 9: moment boundedness in the persistence regime for k = 1, 2.
#[test]
fn criterion_09_moment_boundedness() {
    let start = Instant::now();
    let (_, _, _, ensemble) = persistence_ensemble();
    let mut detail = String::new();
    let mut pass = true;
    for k in [1.0, 2.0] {
        let report = check_moment_bound(ensemble, k).unwrap();
        pass &= report.bounded();
        detail.push_str(&format!(
            "k={k}: max {:.4} vs 2x median {:.4}; ",
            report.window_max,
            2.0 * report.window_median
        ));
    }
    let elapsed = start.elapsed();
    detail.push_str(&format!("{elapsed:.2?}"));
    criterion(9, "moment boundedness", pass, &detail);
}

/// Criterion 10: determinism. The same acceptance config run twice writes
/// byte-identical summary CSVs, with the ensemble simulated in parallel.
#[test]
fn criterion_10_byte_identical_reruns() {
    let start = Instant::now();
    let dir_a = tempfile::tempdir().unwrap();
    let dir_b = tempfile::tempdir().unwrap();
    let mut summaries = Vec::new();
    for dir in [&dir_a, &dir_b] {
        let mut cfg = fixture("extinction");
        cfg.output_dir = Some(dir.path().to_path_buf());
        let outcome = run_experiment(&cfg, false).unwrap();
        summaries.push(std::fs::read(outcome.out_dir.join("summary.csv")).unwrap());
    }
    let identical = summaries[0] == summaries[1];
    let elapsed = start.elapsed();
    criterion(
        10,
        "byte-identical reruns",
        identical,
        &format!(
            "summary.csv {} bytes, parallel ensembles of 200 paths; {elapsed:.2?}",
            summaries[0].len()
        ),
    );
}
