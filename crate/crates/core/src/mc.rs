//! Monte Carlo BER over the exact signal model.
//!
//! Each trial draws a fresh channel, aligns every subsurface to its own user,
//! sends independent BPSK symbols to all users and runs the SIC receiver of
//! the observed user. The interference from co-zone subsurfaces is generated
//! from the sampled coefficients, never from its Gaussian approximation.
//!
//! Trials are split into fixed-size blocks. Block `b` draws from a ChaCha
//! stream keyed by `(seed, b)`, so a block's outcome does not depend on which
//! worker runs it. Blocks are merged in index order and the stopping rule is
//! checked after every merge, which makes the estimate a function of
//! `(seed, block size, rule)` only.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    ber_asymptotic, ber_closed_form, ber_imperfect_sic, ber_imperfect_sic_numeric, ber_numeric,
    combine_imperfect_sic, Asymptote,
};
use crate::channel::{complex_gaussian, ReceiverLink};
use crate::noma::{sic_receive, superpose, Bpsk, SicMode};
use crate::scenario::{check_axis, AxisKind, ScenarioConfig, SystemVariant};
use crate::special::QApproxCoeffs;
use crate::{Error, Result};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

pub const DEFAULT_BLOCK_TRIALS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StoppingRule {
    pub min_errors: u64,
    pub max_trials: u64,
    /// Stop only once `(ci_high − ci_low) / ber` is at most this.
    pub target_rel_width: Option<f64>,
}

impl Default for StoppingRule {
    fn default() -> Self {
        StoppingRule {
            min_errors: 200,
            max_trials: 1_000_000_000,
            target_rel_width: None,
        }
    }
}

impl StoppingRule {
    pub fn new(min_errors: u64, max_trials: u64) -> Result<Self> {
        let rule = StoppingRule {
            min_errors,
            max_trials,
            target_rel_width: None,
        };
        rule.validate()?;
        Ok(rule)
    }

    pub fn validate(&self) -> Result<()> {
        if self.min_errors == 0 {
            return Err(Error::invalid("min_errors", "must be at least 1"));
        }
        if self.max_trials == 0 {
            return Err(Error::invalid("max_trials", "must be at least 1"));
        }
        if let Some(w) = self.target_rel_width {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::invalid("target_rel_width", format!("must be positive, got {w}")));
            }
        }
        Ok(())
    }

    fn satisfied(&self, errors: u64, trials: u64) -> bool {
        if errors < self.min_errors {
            return false;
        }
        match self.target_rel_width {
            None => true,
            Some(target) => {
                let (lo, hi) = wilson_interval(errors, trials);
                (hi - lo) / (errors as f64 / trials as f64) <= target
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub seed: u64,
    pub block_trials: u64,
    pub blocks: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BerEstimate {
    pub errors: u64,
    pub trials: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// No error was observed; `ci_high` is the one-sided 95% upper bound.
    pub underflow: bool,
    pub provenance: Provenance,
}

impl BerEstimate {
    pub fn from_counts(errors: u64, trials: u64, provenance: Provenance) -> Self {
        assert!(trials > 0 && errors <= trials, "{errors} errors in {trials} trials");
        let ber = errors as f64 / trials as f64;
        let (ci_low, ci_high, underflow) = if errors == 0 {
            (0.0, zero_error_upper_bound(trials), true)
        } else {
            let (lo, hi) = wilson_interval(errors, trials);
            (lo.min(ber), hi.max(ber), false)
        };
        BerEstimate {
            errors,
            trials,
            ber,
            ci_low,
            ci_high,
            underflow,
            provenance,
        }
    }
}

/// Wilson score interval at 95%.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    let p = errors as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0), (center + half).min(1.0))
}

/// One-sided 95% upper bound on `p` after zero errors in `trials`.
pub fn zero_error_upper_bound(trials: u64) -> f64 {
    1.0 - 0.05f64.powf(1.0 / trials as f64)
}

/// Mixes a master seed with cell coordinates (SplitMix64 finaliser).
pub fn derive_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut z = seed
        .wrapping_add(a.wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .wrapping_add(b.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Random stream of block `block` under master seed `seed`.
pub fn block_rng(seed: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block);
    rng
}

/// Runs `trials(rng, n)` (returning the error count of `n` trials) block by
/// block until `rule` fires.
pub fn run_blocks<F>(rule: &StoppingRule, seed: u64, block_trials: u64, trials: F) -> Result<BerEstimate>
where
    F: Fn(&mut ChaCha8Rng, u64) -> Result<u64> + Sync,
{
    rule.validate()?;
    if block_trials == 0 {
        return Err(Error::invalid("block_trials", "must be at least 1"));
    }
    let wave = rayon::current_num_threads().max(1) as u64;
    let total_blocks = rule.max_trials.div_ceil(block_trials);
    let (mut errors, mut done, mut next) = (0u64, 0u64, 0u64);
    while next < total_blocks {
        let end = (next + wave).min(total_blocks);
        let counts = (next..end)
            .into_par_iter()
            .map(|b| {
                let n = block_trials.min(rule.max_trials - b * block_trials);
                trials(&mut block_rng(seed, b), n).map(|e| (e, n))
            })
            .collect::<Result<Vec<_>>>()?;
        for (e, n) in counts {
            errors += e;
            done += n;
            next += 1;
            if rule.satisfied(errors, done) {
                return Ok(estimate(errors, done, seed, block_trials, next));
            }
        }
    }
    Ok(estimate(errors, done, seed, block_trials, next))
}

fn estimate(errors: u64, trials: u64, seed: u64, block_trials: u64, blocks: u64) -> BerEstimate {
    BerEstimate::from_counts(
        errors,
        trials,
        Provenance {
            seed,
            block_trials,
            blocks,
        },
    )
}

fn check_user(config: &ScenarioConfig, user: usize) -> Result<()> {
    if user == 0 || user > config.num_users() {
        return Err(Error::invalid(
            "user",
            format!("must be in 1..={}, got {user}", config.num_users()),
        ));
    }
    Ok(())
}

fn snr_linear(snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::invalid("snr_db", "is NaN"));
    }
    Ok(10f64.powf(snr_db / 10.0))
}

fn random_symbols<R: Rng + ?Sized>(rng: &mut R, out: &mut [Bpsk]) {
    for s in out.iter_mut() {
        *s = Bpsk::from_bit(rng.random::<bool>());
    }
}

fn noise<R: Rng + ?Sized>(rng: &mut R, sd: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(sd * re, sd * im)
}

/// Block size and other knobs that enter the provenance of an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Engine {
    pub block_trials: u64,
}

impl Default for Engine {
    fn default() -> Self {
        Engine {
            block_trials: DEFAULT_BLOCK_TRIALS,
        }
    }
}

impl Engine {
    /// BER of `user` in the STAR-RIS NOMA system at `snr_db`.
    pub fn run_ber_point(
        &self,
        config: &ScenarioConfig,
        snr_db: f64,
        user: usize,
        rule: &StoppingRule,
        seed: u64,
    ) -> Result<BerEstimate> {
        check_user(config, user)?;
        if config.variant() != SystemVariant::StarRisNoma {
            return Err(Error::invalid("system.variant", "run_ber_point needs a star-ris-noma config"));
        }
        let power = config.power()?;
        let link = ReceiverLink::new(&config.allocation()?, &config.path_loss()?, user)?;
        let sd = config
            .system
            .noise
            .quadrature_sd(power.transmit_power(), snr_linear(snr_db)?);
        let mode = config.system.sic;
        let users = config.num_users();
        run_blocks(rule, seed, self.block_trials, |rng, n| {
            let mut symbols = vec![Bpsk::Plus; users];
            let mut errors = 0;
            for _ in 0..n {
                random_symbols(rng, &mut symbols);
                let draw = link.draw(rng);
                let x = superpose(&symbols, &power)?;
                let y = (draw.gain + draw.interference) * x + noise(rng, sd);
                let out = sic_receive(y, user, draw.gain, &power, mode, Some(&symbols))?;
                if out.decision() != symbols[user - 1] {
                    errors += 1;
                }
            }
            Ok(errors)
        })
    }

    /// BER of `user` in classical NOMA: one flat Rayleigh coefficient of
    /// variance `d_k^(−α)` per trial, coherent detection.
    pub fn run_classical_point(
        &self,
        config: &ScenarioConfig,
        snr_db: f64,
        user: usize,
        rule: &StoppingRule,
        seed: u64,
    ) -> Result<BerEstimate> {
        check_user(config, user)?;
        let power = config.power()?;
        let gain = config.classical_gain(user)?;
        let sd = config
            .system
            .noise
            .quadrature_sd(power.transmit_power(), snr_linear(snr_db)?);
        let mode = config.system.sic;
        let users = config.num_users();
        run_blocks(rule, seed, self.block_trials, |rng, n| {
            let mut symbols = vec![Bpsk::Plus; users];
            let mut errors = 0;
            for _ in 0..n {
                random_symbols(rng, &mut symbols);
                let h = complex_gaussian(rng, gain);
                let x = superpose(&symbols, &power)?;
                let y = h * x + noise(rng, sd);
                let magnitude = h.norm();
                let derotated = if magnitude > 0.0 { y * h.conj() / magnitude } else { y };
                let out = sic_receive(derotated, user, magnitude, &power, mode, Some(&symbols))?;
                if out.decision() != symbols[user - 1] {
                    errors += 1;
                }
            }
            Ok(errors)
        })
    }

    /// Dispatches on the config's system variant.
    pub fn run_point(
        &self,
        config: &ScenarioConfig,
        snr_db: f64,
        user: usize,
        rule: &StoppingRule,
        seed: u64,
    ) -> Result<BerEstimate> {
        match config.variant() {
            SystemVariant::StarRisNoma => self.run_ber_point(config, snr_db, user, rule, seed),
            SystemVariant::ClassicalNoma => self.run_classical_point(config, snr_db, user, rule, seed),
        }
    }

    pub fn run_sweep(
        &self,
        config: &ScenarioConfig,
        spec: &SweepSpec,
        rule: &StoppingRule,
        seed: u64,
    ) -> Result<SweepResult> {
        spec.validate(config)?;
        let mut cells = Vec::with_capacity(spec.values.len() * spec.users.len());
        for (i, &value) in spec.values.iter().enumerate() {
            let (point, snr_db) = spec.point(config, value)?;
            for &user in &spec.users {
                let cell_seed = derive_seed(seed, i as u64, user as u64);
                let mc = self.run_point(&point, snr_db, user, rule, cell_seed);
                let analytic = AnalyticSeries::evaluate(&point, snr_db, user);
                cells.push(SweepCell {
                    axis_value: value,
                    user,
                    mc,
                    analytic,
                });
            }
        }
        Ok(SweepResult {
            axis: spec.axis,
            fixed_snr_db: spec.fixed_snr_db,
            cells,
        })
    }
}

pub fn run_ber_point(
    config: &ScenarioConfig,
    snr_db: f64,
    user: usize,
    rule: &StoppingRule,
    seed: u64,
) -> Result<BerEstimate> {
    Engine::default().run_ber_point(config, snr_db, user, rule, seed)
}

pub fn run_classical_point(
    config: &ScenarioConfig,
    snr_db: f64,
    user: usize,
    rule: &StoppingRule,
    seed: u64,
) -> Result<BerEstimate> {
    Engine::default().run_classical_point(config, snr_db, user, rule, seed)
}

pub fn run_sweep(
    config: &ScenarioConfig,
    spec: &SweepSpec,
    rule: &StoppingRule,
    seed: u64,
) -> Result<SweepResult> {
    Engine::default().run_sweep(config, spec, rule, seed)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub axis: AxisKind,
    pub values: Vec<f64>,
    pub users: Vec<usize>,
    /// SNR of element-count and power-coefficient sweeps.
    pub fixed_snr_db: f64,
}

impl SweepSpec {
    pub fn validate(&self, config: &ScenarioConfig) -> Result<()> {
        check_axis(self.axis, &self.values)?;
        if self.users.is_empty() {
            return Err(Error::invalid("users", "no users selected"));
        }
        for &u in &self.users {
            check_user(config, u)?;
        }
        if self.axis == AxisKind::Power {
            for &v in &self.values {
                config.with_first_power(v)?;
            }
        }
        Ok(())
    }

    /// The config and SNR of one axis point.
    pub fn point(&self, config: &ScenarioConfig, value: f64) -> Result<(ScenarioConfig, f64)> {
        Ok(match self.axis {
            AxisKind::Snr => (config.clone(), value),
            AxisKind::Elements => (config.with_elements(value as usize), self.fixed_snr_db),
            AxisKind::Power => (config.with_first_power(value)?, self.fixed_snr_db),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AnalyticValue {
    Value(f64),
    NoFloor,
    NotApplicable,
    Failed(String),
}

impl AnalyticValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            AnalyticValue::Value(v) => Some(*v),
            _ => None,
        }
    }

    fn from_result(r: Result<f64>) -> Self {
        match r {
            Ok(v) => AnalyticValue::Value(v),
            Err(e) => AnalyticValue::Failed(e.to_string()),
        }
    }
}

/// Closed form, numeric oracle and high-SNR asymptote at one point.
///
/// With detected SIC and two users, user 2's columns use the imperfect-SIC
/// combination; with more users that combination is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticSeries {
    pub closed_form: AnalyticValue,
    pub numeric: AnalyticValue,
    pub asymptotic: AnalyticValue,
}

impl AnalyticSeries {
    pub fn evaluate(config: &ScenarioConfig, snr_db: f64, user: usize) -> Self {
        let na = AnalyticSeries {
            closed_form: AnalyticValue::NotApplicable,
            numeric: AnalyticValue::NotApplicable,
            asymptotic: AnalyticValue::NotApplicable,
        };
        if config.variant() == SystemVariant::ClassicalNoma {
            return na;
        }
        let failed = |e: Error| AnalyticSeries {
            closed_form: AnalyticValue::Failed(e.to_string()),
            numeric: AnalyticValue::Failed(e.to_string()),
            asymptotic: AnalyticValue::Failed(e.to_string()),
        };
        let params = match config.analytic_params(user) {
            Ok(p) => p,
            Err(e) => return failed(e),
        };
        let snr = match snr_linear(snr_db) {
            Ok(s) => config.system.noise.analytic_snr(s),
            Err(e) => return failed(e),
        };
        let coeffs = QApproxCoeffs::default();
        let asym = |p| match ber_asymptotic(p, &coeffs) {
            Ok(Asymptote::Floor(v)) => AnalyticValue::Value(v),
            Ok(Asymptote::NoFloor) => AnalyticValue::NoFloor,
            Err(e) => AnalyticValue::Failed(e.to_string()),
        };
        let imperfect = config.system.sic == SicMode::Detected && user > 1;
        if !imperfect {
            return AnalyticSeries {
                closed_form: AnalyticValue::from_result(ber_closed_form(&params, snr, &coeffs)),
                numeric: AnalyticValue::from_result(ber_numeric(&params, snr)),
                asymptotic: asym(&params),
            };
        }
        if config.num_users() != 2 {
            return na;
        }
        let first = match params.as_user(1) {
            Ok(p) => p,
            Err(e) => return failed(e),
        };
        let asymptotic = match (asym(&params), asym(&first)) {
            (AnalyticValue::Value(own), AnalyticValue::Value(stage)) => {
                AnalyticValue::Value(combine_imperfect_sic(own, 1.0 - stage))
            }
            (AnalyticValue::NoFloor, _) => AnalyticValue::NoFloor,
            (AnalyticValue::Failed(e), _) | (_, AnalyticValue::Failed(e)) => AnalyticValue::Failed(e),
            _ => AnalyticValue::NotApplicable,
        };
        AnalyticSeries {
            closed_form: AnalyticValue::from_result(ber_imperfect_sic(&params, &first, snr, &coeffs)),
            numeric: AnalyticValue::from_result(ber_imperfect_sic_numeric(&params, &first, snr)),
            asymptotic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepCell {
    pub axis_value: f64,
    pub user: usize,
    pub mc: Result<BerEstimate>,
    pub analytic: AnalyticSeries,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub axis: AxisKind,
    pub fixed_snr_db: f64,
    pub cells: Vec<SweepCell>,
}

impl SweepResult {
    /// Cells of one user in axis order.
    pub fn user_series(&self, user: usize) -> impl Iterator<Item = &SweepCell> {
        self.cells.iter().filter(move |c| c.user == user)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_contains_estimate() {
        for (e, n) in [(1, 10), (5, 1000), (200, 200_000), (999, 1000), (1000, 1000)] {
            let (lo, hi) = wilson_interval(e, n);
            let p = e as f64 / n as f64;
            assert!(lo <= p && p <= hi, "{e}/{n}: [{lo}, {hi}]");
            assert!(lo >= 0.0 && hi <= 1.0);
        }
        let est = BerEstimate::from_counts(
            0,
            1000,
            Provenance {
                seed: 0,
                block_trials: 1,
                blocks: 1,
            },
        );
        assert!(est.underflow);
        assert_eq!(est.ci_low, 0.0);
        assert!((est.ci_high - 0.002_991_6).abs() < 1e-6);
    }

    #[test]
    fn blocks_stop_at_rule_and_are_reproducible() {
        let rule = StoppingRule::new(50, 1_000_000).unwrap();
        let coin = |rng: &mut ChaCha8Rng, n: u64| Ok((0..n).filter(|_| rng.random::<f64>() < 0.01).count() as u64);
        let a = run_blocks(&rule, 7, 1000, coin).unwrap();
        let b = run_blocks(&rule, 7, 1000, coin).unwrap();
        assert_eq!(a, b);
        assert!(a.errors >= 50);
        assert_eq!(a.trials, a.provenance.blocks * 1000);
        assert!(a.trials < 20_000);

        let capped = StoppingRule::new(1_000_000, 2500).unwrap();
        let c = run_blocks(&capped, 7, 1000, coin).unwrap();
        assert_eq!(c.trials, 2500);
        assert_eq!(c.provenance.blocks, 3);
    }

    #[test]
    fn stopping_rule_validation() {
        assert!(StoppingRule::new(0, 10).is_err());
        assert!(StoppingRule::new(10, 0).is_err());
        let mut r = StoppingRule::default();
        assert_eq!((r.min_errors, r.max_trials), (200, 1_000_000_000));
        r.target_rel_width = Some(-1.0);
        assert!(r.validate().is_err());
    }

    #[test]
    fn relative_width_target_delays_stop() {
        let coin = |rng: &mut ChaCha8Rng, n: u64| Ok((0..n).filter(|_| rng.random::<f64>() < 0.05).count() as u64);
        let loose = StoppingRule::new(10, 10_000_000).unwrap();
        let mut tight = loose;
        tight.target_rel_width = Some(0.1);
        let a = run_blocks(&loose, 1, 500, coin).unwrap();
        let b = run_blocks(&tight, 1, 500, coin).unwrap();
        assert!(b.trials > a.trials);
        assert!((b.ci_high - b.ci_low) / b.ber <= 0.1);
    }

    #[test]
    fn derived_seeds_differ() {
        let s: std::collections::HashSet<u64> = (0..10)
            .flat_map(|i| (1..4).map(move |u| derive_seed(42, i, u)))
            .collect();
        assert_eq!(s.len(), 30);
    }
}
