use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use star_noma::analytic::ber_numeric;
use star_noma::mc::{run_blocks, AnalyticValue, BerEstimate, Engine, Provenance, StoppingRule, SweepSpec};
use star_noma::noma::SicMode;
use star_noma::scenario::{AxisKind, NoiseModel, ScenarioConfig, SystemVariant};

const SINGLE: &str = r#"
[system]
bs_ris_distance = 10.0

[[users]]
zone = "reflection"
elements = 32
power = 1.0
ris_distance = 2.0
bs_distance = 12.0
"#;

const TWO_USER: &str = r#"
[system]
bs_ris_distance = 50.0

[[users]]
zone = "transmission"
elements = 16
power = 0.7
ris_distance = 6.0
bs_distance = 56.0

[[users]]
zone = "reflection"
elements = 16
power = 0.3
ris_distance = 4.0
bs_distance = 54.0
"#;

fn parse(text: &str) -> ScenarioConfig {
    ScenarioConfig::from_toml_str(text).unwrap().0
}

fn rule(min_errors: u64, max_trials: u64) -> StoppingRule {
    StoppingRule::new(min_errors, max_trials).unwrap()
}

fn widened(est: &BerEstimate, value: f64) -> bool {
    // 95% interval plus a small allowance for the truncated density in the oracle
    est.ci_low * 0.999 <= value && value <= est.ci_high * 1.001
}

#[test]
fn sole_occupant_matches_numeric_oracle() {
    let config = parse(SINGLE);
    let engine = Engine::default();
    for (db, seed) in [(3.0, 1), (6.0, 2)] {
        let est = engine.run_ber_point(&config, db, 1, &rule(400, 4_000_000), seed).unwrap();
        let params = config.analytic_params(1).unwrap();
        let oracle = ber_numeric(&params, 10f64.powf(db / 10.0)).unwrap();
        assert!(widened(&est, oracle), "{db} dB: {est:?} vs {oracle}");
    }
}

#[test]
fn noise_dominated_limit_is_one_half() {
    let mut config = parse(TWO_USER);
    let est = Engine::default().run_ber_point(&config, -60.0, 2, &rule(5000, 20_000), 3).unwrap();
    assert!(est.ci_low <= 0.5 && 0.5 <= est.ci_high, "{est:?}");
    config.system.variant = SystemVariant::ClassicalNoma;
    let est = Engine::default().run_classical_point(&config, -60.0, 1, &rule(5000, 20_000), 3).unwrap();
    assert!(est.ci_low <= 0.5 && 0.5 <= est.ci_high, "{est:?}");
}

/// `½ (1 − √(γ̄ / (1 + γ̄)))`, BPSK over Rayleigh fading.
fn rayleigh_bpsk(mean_snr: f64) -> f64 {
    0.5 * (1.0 - (mean_snr / (1.0 + mean_snr)).sqrt())
}

#[test]
fn classical_single_user_matches_textbook() {
    let mut config = parse(SINGLE);
    config.system.variant = SystemVariant::ClassicalNoma;
    let gain = config.classical_gain(1).unwrap();
    let engine = Engine::default();
    for (noise, db) in [(NoiseModel::Circular, 20.0), (NoiseModel::PerDimension, 23.0)] {
        config.system.noise = noise;
        let snr = 10f64.powf(db / 10.0);
        // With per-dimension noise the real-axis noise is twice as strong.
        let mean_snr = gain * noise.analytic_snr(snr) / 2.0;
        let want = rayleigh_bpsk(mean_snr);
        let est = engine.run_classical_point(&config, db, 1, &rule(400, 4_000_000), 5).unwrap();
        assert!(est.ci_low <= want && want <= est.ci_high, "{noise:?}: {est:?} vs {want}");
    }
}

#[test]
fn detected_sic_is_never_better_than_genie() {
    let mut config = parse(TWO_USER);
    let engine = Engine::default();
    let r = rule(300, 2_000_000);
    for db in [25.0, 35.0] {
        config.system.sic = SicMode::Genie;
        let genie = engine.run_ber_point(&config, db, 2, &r, 9).unwrap();
        config.system.sic = SicMode::Detected;
        let detected = engine.run_ber_point(&config, db, 2, &r, 9).unwrap();
        assert!(detected.ci_high >= genie.ci_low, "{db} dB: {detected:?} vs {genie:?}");
        assert!(detected.ber >= genie.ber, "{db} dB: {detected:?} vs {genie:?}");
    }
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let config = parse(TWO_USER);
    let r = rule(150, 1_000_000);
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| Engine { block_trials: 1000 }.run_ber_point(&config, 30.0, 2, &r, 77).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(3));
    assert_eq!(one, run(8));
    assert_eq!(one.provenance.block_trials, 1000);
    assert_ne!(one, Engine { block_trials: 1000 }.run_ber_point(&config, 30.0, 2, &r, 78).unwrap());
}

#[test]
fn wilson_interval_covers_bernoulli_rate() {
    let p = 0.01;
    let r = rule(u64::MAX, 2000);
    let covered = (0..1000u64)
        .filter(|&rep| {
            let est = run_blocks(&r, rep, 500, |rng: &mut ChaCha8Rng, n| {
                Ok((0..n).filter(|_| rng.random::<f64>() < p).count() as u64)
            })
            .unwrap();
            est.ci_low <= p && p <= est.ci_high
        })
        .count();
    assert!(covered >= 930, "coverage {covered}/1000");
}

#[test]
fn sweep_shapes_and_analytic_columns() {
    let config = parse(TWO_USER);
    let spec = SweepSpec {
        axis: AxisKind::Snr,
        values: vec![10.0],
        users: vec![1, 2],
        fixed_snr_db: 40.0,
    };
    let res = Engine::default().run_sweep(&config, &spec, &rule(50, 100_000), 1).unwrap();
    assert_eq!(res.cells.len(), 2);
    for cell in &res.cells {
        assert!(cell.mc.is_ok());
        assert!(cell.analytic.closed_form.value().is_some());
        // each user is alone in its zone
        assert_eq!(cell.analytic.asymptotic, AnalyticValue::NoFloor);
    }

    let mut detected = config.clone();
    detected.system.sic = SicMode::Detected;
    let res = Engine::default().run_sweep(&detected, &spec, &rule(50, 100_000), 1).unwrap();
    assert!(res.cells[1].analytic.closed_form.value().unwrap() >= res.cells[1].analytic.numeric.value().unwrap() * 0.5);

    let mut classical = config.clone();
    classical.system.variant = SystemVariant::ClassicalNoma;
    let res = Engine::default().run_sweep(&classical, &spec, &rule(50, 100_000), 1).unwrap();
    assert_eq!(res.cells[0].analytic.closed_form, AnalyticValue::NotApplicable);

    let elements = SweepSpec {
        axis: AxisKind::Elements,
        values: vec![4.0, 8.0, 12.0],
        users: vec![2],
        fixed_snr_db: 30.0,
    };
    let res = Engine::default().run_sweep(&config, &elements, &rule(20, 20_000), 1).unwrap();
    let bers: Vec<f64> = res.user_series(2).map(|c| c.analytic.numeric.value().unwrap()).collect();
    assert!(bers.windows(2).all(|w| w[1] < w[0]), "{bers:?}");

    let bad = SweepSpec {
        axis: AxisKind::Snr,
        values: vec![10.0, 5.0, 20.0],
        ..spec.clone()
    };
    assert!(Engine::default().run_sweep(&config, &bad, &rule(1, 1), 1).is_err());
    let bad_user = SweepSpec { users: vec![3], ..spec };
    assert!(Engine::default().run_sweep(&config, &bad_user, &rule(1, 1), 1).is_err());
}

proptest! {
    #[test]
    fn estimate_invariants(trials in 1u64..10_000_000, frac in 0.0f64..=1.0) {
        let errors = ((trials as f64) * frac).floor() as u64;
        let est = BerEstimate::from_counts(errors, trials, Provenance { seed: 0, block_trials: 1, blocks: 1 });
        prop_assert!(est.errors <= est.trials);
        prop_assert!((0.0..=1.0).contains(&est.ber));
        prop_assert!(est.ci_low <= est.ber && est.ber <= est.ci_high);
        prop_assert!(est.ci_low >= 0.0 && est.ci_high <= 1.0);
        prop_assert_eq!(est.underflow, errors == 0);
    }
}
