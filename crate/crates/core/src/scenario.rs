//! Experiment description and its TOML form.
//!
//! ```toml
//! [system]
//! variant = "star-ris-noma"      # or "classical-noma"
//! transmit_power = 1.0
//! bs_ris_distance = 50.0
//! bs_exponent = 2.0
//! ris_user_exponent = 2.0
//! classical_exponent = 2.0
//! sic = "genie"                  # or "detected"
//! noise = "per-dimension"        # or "circular"
//!
//! [[users]]
//! zone = "transmission"
//! elements = 50
//! power = 0.7
//! ris_distance = 6.0
//! bs_distance = 56.0             # classical variant only
//!
//! [sweep]                        # optional
//! axis = "snr"                   # "snr" | "elements" | "power"
//! values = [0.0, 10.0, 20.0]
//! users = [1, 2]
//! snr_db = 40.0                  # fixed SNR of elements/power sweeps
//! seed = 1
//! min_errors = 200
//! max_trials = 1000000000
//! ```

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::analytic::UserAnalyticParams;
use crate::channel::{path_gain, PathLossParams, SubsurfaceAllocation, Zone};
use crate::noma::{PowerAllocation, SicMode};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SystemVariant {
    StarRisNoma,
    ClassicalNoma,
}

/// How `σ² = P / γ` is spread over the complex noise sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseModel {
    /// Each quadrature has variance `σ²`. Matches the analytic `Q(A φ √γ)`.
    PerDimension,
    /// `CN(0, σ²)`: each quadrature has variance `σ²/2`.
    Circular,
}

impl NoiseModel {
    /// Standard deviation of the in-phase (and quadrature) noise component.
    pub fn quadrature_sd(self, transmit_power: f64, snr: f64) -> f64 {
        let variance = transmit_power / snr;
        match self {
            NoiseModel::PerDimension => variance.sqrt(),
            NoiseModel::Circular => (0.5 * variance).sqrt(),
        }
    }

    /// SNR to feed the analytic expressions so they describe this noise.
    pub fn analytic_snr(self, snr: f64) -> f64 {
        match self {
            NoiseModel::PerDimension => snr,
            NoiseModel::Circular => 2.0 * snr,
        }
    }
}

fn default_power() -> f64 {
    1.0
}

fn default_exponent() -> f64 {
    2.0
}

fn default_variant() -> SystemVariant {
    SystemVariant::StarRisNoma
}

fn default_sic() -> SicMode {
    SicMode::Genie
}

fn default_noise() -> NoiseModel {
    NoiseModel::PerDimension
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    #[serde(default = "default_variant")]
    pub variant: SystemVariant,
    #[serde(default = "default_power")]
    pub transmit_power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_ris_distance: Option<f64>,
    #[serde(default = "default_exponent")]
    pub bs_exponent: f64,
    #[serde(default = "default_exponent")]
    pub ris_user_exponent: f64,
    #[serde(default = "default_exponent")]
    pub classical_exponent: f64,
    #[serde(default = "default_sic")]
    pub sic: SicMode,
    #[serde(default = "default_noise")]
    pub noise: NoiseModel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserConfig {
    pub zone: Zone,
    #[serde(default)]
    pub elements: usize,
    pub power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ris_distance: Option<f64>,
    /// BS → user distance of the classical-NOMA baseline.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bs_distance: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisKind {
    Snr,
    Elements,
    Power,
}

impl std::fmt::Display for AxisKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AxisKind::Snr => "snr",
            AxisKind::Elements => "elements",
            AxisKind::Power => "power",
        })
    }
}

impl std::str::FromStr for AxisKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "snr" => Ok(AxisKind::Snr),
            "elements" => Ok(AxisKind::Elements),
            "power" => Ok(AxisKind::Power),
            other => Err(Error::invalid("axis", format!("expected snr|elements|power, got `{other}`"))),
        }
    }
}

pub const DEFAULT_FIXED_SNR_DB: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub axis: AxisKind,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub users: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snr_db: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_errors: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_trials: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub system: SystemConfig,
    pub users: Vec<UserConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
}

fn positive(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be positive, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<()> {
    if v.is_finite() && v >= 0.0 {
        Ok(())
    } else {
        Err(Error::invalid(field, format!("must be non-negative, got {v}")))
    }
}

impl ScenarioConfig {
    /// Parses and validates. Returns ordering warnings alongside the config.
    pub fn from_toml_str(text: &str) -> Result<(Self, Vec<String>)> {
        let config: ScenarioConfig = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let warnings = config.validate()?;
        Ok((config, warnings))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn num_users(&self) -> usize {
        self.users.len()
    }

    pub fn variant(&self) -> SystemVariant {
        self.system.variant
    }

    /// Checks every field; on success returns the user-ordering warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        let s = &self.system;
        positive("system.transmit_power", s.transmit_power)?;
        non_negative("system.bs_exponent", s.bs_exponent)?;
        non_negative("system.ris_user_exponent", s.ris_user_exponent)?;
        non_negative("system.classical_exponent", s.classical_exponent)?;
        if self.users.is_empty() {
            return Err(Error::invalid("users", "need at least one [[users]] entry"));
        }
        match s.variant {
            SystemVariant::StarRisNoma => {
                let d = s
                    .bs_ris_distance
                    .ok_or_else(|| Error::invalid("system.bs_ris_distance", "required for star-ris-noma"))?;
                positive("system.bs_ris_distance", d)?;
            }
            SystemVariant::ClassicalNoma => {}
        }
        for (i, u) in self.users.iter().enumerate() {
            let field = |name: &str| format!("users[{}].{name}", i + 1);
            positive(&field("power"), u.power)?;
            if i > 0 && u.power > self.users[i - 1].power {
                return Err(Error::invalid(
                    field("power"),
                    format!(
                        "power coefficients must be non-increasing, {} > users[{}].power = {}",
                        u.power,
                        i,
                        self.users[i - 1].power
                    ),
                ));
            }
            match s.variant {
                SystemVariant::StarRisNoma => {
                    let d = u
                        .ris_distance
                        .ok_or_else(|| Error::invalid(field("ris_distance"), "required for star-ris-noma"))?;
                    positive(&field("ris_distance"), d)?;
                }
                SystemVariant::ClassicalNoma => {
                    let d = u
                        .bs_distance
                        .ok_or_else(|| Error::invalid(field("bs_distance"), "required for classical-noma"))?;
                    positive(&field("bs_distance"), d)?;
                }
            }
            if let Some(d) = u.bs_distance {
                positive(&field("bs_distance"), d)?;
            }
        }
        let sum: f64 = self.users.iter().map(|u| u.power).sum();
        if (sum - 1.0).abs() > PowerAllocation::SUM_TOLERANCE {
            return Err(Error::invalid(
                "users[].power",
                format!("power coefficients must sum to 1, got {sum}"),
            ));
        }
        if let Some(sweep) = &self.sweep {
            self.validate_sweep(sweep)?;
        }
        let mut warnings = self.ordering_warnings();
        if s.transmit_power != 1.0 {
            warnings.push(format!(
                "system.transmit_power = {}: the analytic expressions match the simulated signal model only for P = 1",
                s.transmit_power
            ));
        }
        Ok(warnings)
    }

    fn validate_sweep(&self, sweep: &SweepConfig) -> Result<()> {
        check_axis(sweep.axis, &sweep.values).map_err(|e| match e {
            Error::InvalidParameter { reason, .. } => Error::invalid("sweep.values", reason),
            other => other,
        })?;
        if let Some(users) = &sweep.users {
            for &u in users {
                if u == 0 || u > self.num_users() {
                    return Err(Error::invalid(
                        "sweep.users",
                        format!("user {u} is not in 1..={}", self.num_users()),
                    ));
                }
            }
        }
        if let Some(snr) = sweep.snr_db {
            if !snr.is_finite() {
                return Err(Error::invalid("sweep.snr_db", "must be finite"));
            }
        }
        if sweep.min_errors == Some(0) {
            return Err(Error::invalid("sweep.min_errors", "must be at least 1"));
        }
        if sweep.max_trials == Some(0) {
            return Err(Error::invalid("sweep.max_trials", "must be at least 1"));
        }
        if sweep.axis == AxisKind::Power {
            for &v in &sweep.values {
                self.with_first_power(v)
                    .map_err(|e| Error::invalid("sweep.values", e.to_string()))?;
            }
        }
        Ok(())
    }

    /// Channel strength used to order users: `μ_k` (STAR-RIS) or `L_k` (classical).
    pub fn channel_strength(&self, user: usize) -> Result<f64> {
        match self.system.variant {
            SystemVariant::StarRisNoma => {
                let l = self.path_loss()?.overall_gain(user);
                Ok(PI / 4.0 * l.sqrt() * self.users[user - 1].elements as f64)
            }
            SystemVariant::ClassicalNoma => self.classical_gain(user),
        }
    }

    /// Power must be ordered inversely to channel strength; violations are
    /// reported, not rejected.
    pub fn ordering_warnings(&self) -> Vec<String> {
        let mut warnings = Vec::new();
        for k in 1..self.num_users() {
            let (Ok(weak), Ok(strong)) = (self.channel_strength(k), self.channel_strength(k + 1)) else {
                continue;
            };
            if weak > strong {
                warnings.push(format!(
                    "user ordering: user {k} has a stronger mean channel ({weak:.4e}) than user {} ({strong:.4e}) \
                     but a larger power coefficient",
                    k + 1
                ));
            }
        }
        warnings
    }

    pub fn power(&self) -> Result<PowerAllocation> {
        PowerAllocation::new(
            self.users.iter().map(|u| u.power).collect(),
            self.system.transmit_power,
        )
    }

    pub fn allocation(&self) -> Result<SubsurfaceAllocation> {
        SubsurfaceAllocation::new(
            self.users.iter().map(|u| u.elements).collect(),
            self.users.iter().map(|u| u.zone).collect(),
        )
    }

    pub fn path_loss(&self) -> Result<PathLossParams> {
        let d = self
            .system
            .bs_ris_distance
            .ok_or_else(|| Error::invalid("system.bs_ris_distance", "required for star-ris-noma"))?;
        let users = self
            .users
            .iter()
            .enumerate()
            .map(|(i, u)| {
                u.ris_distance
                    .ok_or_else(|| Error::invalid(format!("users[{}].ris_distance", i + 1), "missing"))
            })
            .collect::<Result<Vec<_>>>()?;
        PathLossParams::new(d, users, self.system.bs_exponent, self.system.ris_user_exponent)
    }

    /// `L_k = d_k^(−α)` of the classical baseline.
    pub fn classical_gain(&self, user: usize) -> Result<f64> {
        let d = self.users[user - 1]
            .bs_distance
            .ok_or_else(|| Error::invalid(format!("users[{user}].bs_distance"), "missing"))?;
        path_gain(d, self.system.classical_exponent)
    }

    pub fn analytic_params(&self, user: usize) -> Result<UserAnalyticParams> {
        let alloc = self.allocation()?;
        UserAnalyticParams::new(
            user,
            self.power()?,
            self.path_loss()?.overall_gain(user),
            alloc.elements(user),
            alloc.zone_total_for(user),
        )
    }

    /// Every subsurface set to `elements`.
    pub fn with_elements(&self, elements: usize) -> Self {
        let mut c = self.clone();
        for u in &mut c.users {
            u.elements = elements;
        }
        c
    }

    /// `a_1` set to `a1`, the other coefficients rescaled to keep the sum at 1.
    pub fn with_first_power(&self, a1: f64) -> Result<Self> {
        if !(a1.is_finite() && a1 > 0.0 && a1 <= 1.0) {
            return Err(Error::invalid("power", format!("a_1 must be in (0, 1], got {a1}")));
        }
        let mut c = self.clone();
        let rest: f64 = self.users[1..].iter().map(|u| u.power).sum();
        if self.num_users() == 1 {
            c.users[0].power = a1;
        } else {
            if a1 >= 1.0 {
                return Err(Error::invalid("power", "a_1 = 1 leaves nothing for the other users"));
            }
            c.users[0].power = a1;
            for u in &mut c.users[1..] {
                u.power *= (1.0 - a1) / rest;
            }
        }
        c.power()?;
        Ok(c)
    }
}

/// Axis values must be non-empty, finite, strictly ordered, and fit the axis.
pub fn check_axis(axis: AxisKind, values: &[f64]) -> Result<()> {
    if values.is_empty() {
        return Err(Error::invalid("values", "axis has no points"));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::invalid("values", format!("non-finite axis value {v}")));
    }
    let increasing = values.windows(2).all(|w| w[0] < w[1]);
    let decreasing = values.windows(2).all(|w| w[0] > w[1]);
    if !(increasing || decreasing) {
        return Err(Error::invalid("values", "axis must be strictly increasing or decreasing"));
    }
    match axis {
        AxisKind::Snr => {}
        AxisKind::Elements => {
            if let Some(v) = values.iter().find(|&&v| v < 1.0 || v.fract() != 0.0) {
                return Err(Error::invalid("values", format!("element counts must be positive integers, got {v}")));
            }
        }
        AxisKind::Power => {
            if let Some(v) = values.iter().find(|&&v| v <= 0.0 || v > 1.0) {
                return Err(Error::invalid("values", format!("power coefficients must be in (0, 1], got {v}")));
            }
        }
    }
    Ok(())
}
