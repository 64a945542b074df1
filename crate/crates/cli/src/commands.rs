//! The `point`, `sweep` and `figure` subcommands.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use star_noma::mc::{derive_seed, AnalyticSeries, AnalyticValue, BerEstimate, Engine, StoppingRule, SweepResult, SweepSpec};
use star_noma::scenario::{AxisKind, ScenarioConfig, DEFAULT_FIXED_SNR_DB};

use crate::error::CliError;
use crate::manifest::{config_hash, manifest_path_for, RunManifest};
use crate::output::{encode, Format, PendingFile, Row};
use crate::overrides::Overrides;
use crate::presets::{plan, Figure};
use crate::values::parse_values;

pub fn load_config(path: &Path) -> Result<(ScenarioConfig, Vec<String>), CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;
    ScenarioConfig::from_toml_str(&text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })
}

fn rule(min_errors: Option<u64>, max_trials: Option<u64>, config: Option<&ScenarioConfig>) -> Result<StoppingRule, CliError> {
    let sweep = config.and_then(|c| c.sweep.as_ref());
    let default = StoppingRule::default();
    let rule = StoppingRule {
        min_errors: min_errors.or(sweep.and_then(|s| s.min_errors)).unwrap_or(default.min_errors),
        max_trials: max_trials.or(sweep.and_then(|s| s.max_trials)).unwrap_or(default.max_trials),
        target_rel_width: None,
    };
    rule.validate()?;
    Ok(rule)
}

fn analytic_text(v: &AnalyticValue) -> String {
    match v {
        AnalyticValue::Value(x) => format!("{x:.4e}"),
        AnalyticValue::NoFloor => "no-floor".into(),
        AnalyticValue::NotApplicable => "na".into(),
        AnalyticValue::Failed(e) => format!("err({e})"),
    }
}

/// One line per user: the MC estimate with its interval and the analytic values.
pub fn format_point(user: usize, est: &BerEstimate, analytic: &AnalyticSeries) -> String {
    let mut line = format!(
        "user {user}: ber_mc={:.4e} ci95=[{:.4e}, {:.4e}] closed_form={} numeric={} asymptotic={} ({} errors / {} trials)",
        est.ber,
        est.ci_low,
        est.ci_high,
        analytic_text(&analytic.closed_form),
        analytic_text(&analytic.numeric),
        analytic_text(&analytic.asymptotic),
        est.errors,
        est.trials,
    );
    if est.underflow {
        let _ = write!(line, " [no errors observed; ci95 upper bound is one-sided]");
    }
    line
}

#[derive(Debug, Clone)]
pub struct PointArgs {
    pub config: PathBuf,
    pub snr_db: f64,
    pub user: Option<usize>,
    pub seed: u64,
    pub min_errors: Option<u64>,
    pub max_trials: Option<u64>,
}

pub fn cmd_point(args: &PointArgs) -> Result<Vec<String>, CliError> {
    let (config, warnings) = load_config(&args.config)?;
    if !args.snr_db.is_finite() {
        return Err(CliError::usage("--snr-db", "must be finite"));
    }
    let rule = rule(args.min_errors, args.max_trials, Some(&config))?;
    let users: Vec<usize> = match args.user {
        Some(u) if u == 0 || u > config.num_users() => {
            return Err(CliError::usage("--user", format!("must be in 1..={}", config.num_users())))
        }
        Some(u) => vec![u],
        None => (1..=config.num_users()).collect(),
    };
    let engine = Engine::default();
    let mut lines: Vec<String> = warnings.iter().map(|w| format!("warning: {w}")).collect();
    for user in users {
        let est = engine.run_point(&config, args.snr_db, user, &rule, derive_seed(args.seed, 0, user as u64))?;
        let analytic = AnalyticSeries::evaluate(&config, args.snr_db, user);
        lines.push(format_point(user, &est, &analytic));
    }
    Ok(lines)
}

#[derive(Debug, Clone)]
pub struct SweepArgs {
    pub config: PathBuf,
    pub axis: Option<AxisKind>,
    pub values: Option<String>,
    pub users: Option<Vec<usize>>,
    pub snr_db: Option<f64>,
    pub out: PathBuf,
    pub format: Format,
    pub seed: Option<u64>,
    pub min_errors: Option<u64>,
    pub max_trials: Option<u64>,
}

/// What a finished run wrote.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
    /// Cells whose simulation failed; the files are still written.
    pub failed_cells: usize,
}

impl RunSummary {
    pub fn into_result(self) -> Result<RunSummary, CliError> {
        if self.failed_cells > 0 {
            return Err(CliError::Runtime(format!(
                "{} cell(s) failed; see warnings in {}",
                self.failed_cells,
                self.manifest_path.display()
            )));
        }
        Ok(self)
    }
}

fn cell_warnings(label: &str, result: &SweepResult, warnings: &mut Vec<String>) -> usize {
    let mut failed = 0;
    for cell in &result.cells {
        match &cell.mc {
            Ok(e) if e.underflow => warnings.push(format!(
                "{label}: no errors in {} trials at {} = {}, user {}; BER below {:.3e} (one-sided 95%)",
                e.trials, result.axis, cell.axis_value, cell.user, e.ci_high
            )),
            Ok(_) => {}
            Err(err) => {
                failed += 1;
                warnings.push(format!(
                    "{label}: simulation failed at {} = {}, user {}: {err}",
                    result.axis, cell.axis_value, cell.user
                ));
            }
        }
        for (name, v) in [
            ("closed form", &cell.analytic.closed_form),
            ("numeric", &cell.analytic.numeric),
            ("asymptote", &cell.analytic.asymptotic),
        ] {
            if let AnalyticValue::Failed(err) = v {
                warnings.push(format!(
                    "{label}: {name} failed at {} = {}, user {}: {err}",
                    result.axis, cell.axis_value, cell.user
                ));
            }
        }
    }
    failed
}

fn rows(result: &SweepResult) -> Vec<Row> {
    result.cells.iter().map(Row::from_cell).collect()
}

#[derive(Serialize)]
struct SweepIdentity<'a> {
    config: &'a ScenarioConfig,
    axis: AxisKind,
    values: &'a [f64],
    users: &'a [usize],
    fixed_snr_db: f64,
    min_errors: u64,
    max_trials: u64,
}

pub fn cmd_sweep(args: &SweepArgs) -> Result<RunSummary, CliError> {
    let (config, config_warnings) = load_config(&args.config)?;
    let section = config.sweep.as_ref();
    let axis = args
        .axis
        .or(section.map(|s| s.axis))
        .ok_or_else(|| CliError::usage("--axis", "not given and the config has no [sweep] section"))?;
    let values = match (&args.values, section) {
        (Some(text), _) => parse_values(text)?,
        (None, Some(s)) if args.axis.is_none_or(|a| a == s.axis) => s.values.clone(),
        _ => return Err(CliError::usage("--values", "not given and the config has no matching [sweep] values")),
    };
    let users = args
        .users
        .clone()
        .or(section.and_then(|s| s.users.clone()))
        .unwrap_or_else(|| (1..=config.num_users()).collect());
    let fixed_snr_db = args.snr_db.or(section.and_then(|s| s.snr_db)).unwrap_or(DEFAULT_FIXED_SNR_DB);
    let seed = args.seed.or(section.and_then(|s| s.seed)).unwrap_or(0);
    let rule = rule(args.min_errors, args.max_trials, Some(&config))?;
    let spec = SweepSpec {
        axis,
        values,
        users,
        fixed_snr_db,
    };
    spec.validate(&config)?;

    let data = PendingFile::reserve(&args.out)?;
    let manifest_path = manifest_path_for(&args.out);
    let manifest_file = PendingFile::reserve(&manifest_path)?;

    let hash = config_hash(&SweepIdentity {
        config: &config,
        axis: spec.axis,
        values: &spec.values,
        users: &spec.users,
        fixed_snr_db: spec.fixed_snr_db,
        min_errors: rule.min_errors,
        max_trials: rule.max_trials,
    })?;
    let mut manifest = RunManifest::new("sweep", hash, seed);
    manifest.warnings.extend(config_warnings);

    let result = Engine::default().run_sweep(&config, &spec, &rule, seed)?;
    let failed_cells = cell_warnings("sweep", &result, &mut manifest.warnings);
    let path = data.commit(&encode(&rows(&result), args.format)?)?;
    manifest.files.push(path.display().to_string());
    manifest.write(manifest_file)?;
    Ok(RunSummary {
        manifest_path,
        manifest,
        failed_cells,
    })
}

#[derive(Debug, Clone)]
pub struct FigureArgs {
    pub figure: Figure,
    pub overrides: Vec<String>,
    pub seed: u64,
    pub out: PathBuf,
    pub format: Format,
    pub min_errors: Option<u64>,
    pub max_trials: Option<u64>,
}

#[derive(Serialize)]
struct CurveIdentity<'a> {
    name: &'a str,
    config: &'a ScenarioConfig,
    axis: AxisKind,
    values: &'a [f64],
    users: &'a [usize],
    fixed_snr_db: f64,
}

#[derive(Serialize)]
struct FigureIdentity<'a> {
    figure: String,
    curves: Vec<CurveIdentity<'a>>,
    min_errors: u64,
    max_trials: u64,
}

pub const FIGURE_MANIFEST: &str = "manifest.json";

pub fn cmd_figure(args: &FigureArgs) -> Result<RunSummary, CliError> {
    let overrides = Overrides::parse(&args.overrides)?;
    let plan = plan(args.figure, &overrides)?;
    let rule = rule(args.min_errors, args.max_trials, None)?;

    std::fs::create_dir_all(&args.out).map_err(|e| CliError::Output {
        path: args.out.clone(),
        reason: e.to_string(),
    })?;
    let pending = plan
        .curves
        .iter()
        .map(|c| PendingFile::reserve(&args.out.join(format!("{}.{}", c.name, args.format.extension()))))
        .collect::<Result<Vec<_>, _>>()?;
    let manifest_path = args.out.join(FIGURE_MANIFEST);
    let manifest_file = PendingFile::reserve(&manifest_path)?;

    let hash = config_hash(&FigureIdentity {
        figure: args.figure.to_string(),
        curves: plan
            .curves
            .iter()
            .map(|c| CurveIdentity {
                name: &c.name,
                config: &c.config,
                axis: c.spec.axis,
                values: &c.spec.values,
                users: &c.spec.users,
                fixed_snr_db: c.spec.fixed_snr_db,
            })
            .collect(),
        min_errors: rule.min_errors,
        max_trials: rule.max_trials,
    })?;
    let mut manifest = RunManifest::new(&format!("figure {}", args.figure), hash, args.seed);
    manifest.notes = plan.notes.clone();
    let mut seen = std::collections::BTreeSet::new();
    for curve in &plan.curves {
        for w in curve.config.ordering_warnings() {
            if seen.insert(w.clone()) {
                manifest.warnings.push(format!("{}: {w}", curve.name));
            }
        }
    }

    let engine = Engine::default();
    let mut failed_cells = 0;
    for ((index, curve), file) in plan.curves.iter().enumerate().zip(pending) {
        let seed = derive_seed(args.seed, index as u64, u64::MAX);
        let result = engine.run_sweep(&curve.config, &curve.spec, &rule, seed)?;
        failed_cells += cell_warnings(&curve.name, &result, &mut manifest.warnings);
        let path = file.commit(&encode(&rows(&result), args.format)?)?;
        manifest.files.push(path.display().to_string());
    }
    manifest.write(manifest_file)?;
    Ok(RunSummary {
        manifest_path,
        manifest,
        failed_cells,
    })
}
