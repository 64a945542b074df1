//! Power-domain NOMA over BPSK: superposition coding at the base station,
//! successive interference cancellation (SIC) and maximum-likelihood
//! detection at the users.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Power coefficients `a_1 ≥ … ≥ a_K > 0`, `Σ a_k = 1`, and transmit power `P`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerAllocation {
    coefficients: Vec<f64>,
    transmit_power: f64,
}

impl PowerAllocation {
    pub const SUM_TOLERANCE: f64 = 1e-9;

    pub fn new(coefficients: Vec<f64>, transmit_power: f64) -> Result<Self> {
        if coefficients.is_empty() {
            return Err(Error::invalid("power", "need at least one user"));
        }
        if !(transmit_power.is_finite() && transmit_power > 0.0) {
            return Err(Error::invalid(
                "transmit_power",
                format!("must be positive, got {transmit_power}"),
            ));
        }
        for (k, &a) in coefficients.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::invalid(
                    format!("power[{}]", k + 1),
                    format!("must be positive, got {a}"),
                ));
            }
            if k > 0 && a > coefficients[k - 1] {
                return Err(Error::invalid(
                    format!("power[{}]", k + 1),
                    format!(
                        "coefficients must be non-increasing, got a_{} = {} > a_{} = {}",
                        k + 1,
                        a,
                        k,
                        coefficients[k - 1]
                    ),
                ));
            }
        }
        let sum: f64 = coefficients.iter().sum();
        if (sum - 1.0).abs() > Self::SUM_TOLERANCE {
            return Err(Error::invalid(
                "power",
                format!("coefficients must sum to 1, got {sum}"),
            ));
        }
        Ok(PowerAllocation {
            coefficients,
            transmit_power,
        })
    }

    pub fn num_users(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn coefficient(&self, user: usize) -> f64 {
        self.coefficients[user - 1]
    }

    pub fn transmit_power(&self) -> f64 {
        self.transmit_power
    }

    /// `√(a_k P)`.
    pub fn amplitude(&self, user: usize) -> f64 {
        (self.coefficients[user - 1] * self.transmit_power).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bpsk {
    Plus,
    Minus,
}

impl Bpsk {
    pub fn from_bit(bit: bool) -> Self {
        if bit {
            Bpsk::Plus
        } else {
            Bpsk::Minus
        }
    }

    pub fn value(self) -> f64 {
        match self {
            Bpsk::Plus => 1.0,
            Bpsk::Minus => -1.0,
        }
    }
}

impl std::ops::Neg for Bpsk {
    type Output = Bpsk;

    fn neg(self) -> Bpsk {
        match self {
            Bpsk::Plus => Bpsk::Minus,
            Bpsk::Minus => Bpsk::Plus,
        }
    }
}

/// `x = Σ_k √(a_k P) x_k`.
pub fn superpose(symbols: &[Bpsk], alloc: &PowerAllocation) -> Result<Complex64> {
    if symbols.len() != alloc.num_users() {
        return Err(Error::invalid(
            "symbols",
            format!("{} symbols for {} users", symbols.len(), alloc.num_users()),
        ));
    }
    let x = symbols
        .iter()
        .enumerate()
        .map(|(k, s)| alloc.amplitude(k + 1) * s.value())
        .sum::<f64>();
    Ok(Complex64::new(x, 0.0))
}

/// Minimum-distance decision over `{+1, −1}`.
///
/// With a real non-negative gain the two metrics differ only through the real
/// part of the residual, so this is a sign test. Ties go to `+1`.
pub fn mld_detect(residual: Complex64, effective_gain: f64, power_term: f64) -> Bpsk {
    if effective_gain * power_term == 0.0 || residual.re >= 0.0 {
        Bpsk::Plus
    } else {
        Bpsk::Minus
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SicMode {
    /// Cancellation with the true transmitted symbols (perfect SIC).
    Genie,
    /// Cancellation with the receiver's own stage decisions (imperfect SIC).
    Detected,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionOutcome {
    decisions: Vec<Bpsk>,
    mode: SicMode,
}

impl DetectionOutcome {
    /// Decisions of the cancellation stages for users `1..k−1`.
    pub fn sic_stages(&self) -> &[Bpsk] {
        &self.decisions[..self.decisions.len() - 1]
    }

    /// Every stage, the last one being the user's own symbol.
    pub fn stages(&self) -> &[Bpsk] {
        &self.decisions
    }

    pub fn decision(&self) -> Bpsk {
        *self.decisions.last().expect("at least one stage")
    }

    pub fn mode(&self) -> SicMode {
        self.mode
    }
}

/// SIC receiver of user `k`: detect and cancel users `1..k−1` in order, then
/// detect `x_k`. At each stage the not-yet-cancelled users act as noise.
pub fn sic_receive(
    y: Complex64,
    user: usize,
    effective_gain: f64,
    alloc: &PowerAllocation,
    mode: SicMode,
    true_symbols: Option<&[Bpsk]>,
) -> Result<DetectionOutcome> {
    if user == 0 || user > alloc.num_users() {
        return Err(Error::invalid(
            "user",
            format!("must be in 1..={}, got {user}", alloc.num_users()),
        ));
    }
    let truth = match (mode, true_symbols) {
        (SicMode::Genie, None) => {
            return Err(Error::invalid("true_symbols", "genie SIC needs the transmitted symbols"))
        }
        (SicMode::Genie, Some(s)) if s.len() < user - 1 => {
            return Err(Error::invalid(
                "true_symbols",
                format!("need symbols of users 1..{}, got {}", user - 1, s.len()),
            ))
        }
        (_, s) => s,
    };
    let mut decisions = Vec::with_capacity(user);
    let mut residual = y;
    for j in 1..user {
        let amplitude = alloc.amplitude(j);
        let detected = mld_detect(residual, effective_gain, amplitude);
        decisions.push(detected);
        let cancel = match (mode, truth) {
            (SicMode::Genie, Some(t)) => t[j - 1],
            _ => detected,
        };
        residual -= amplitude * effective_gain * cancel.value();
    }
    decisions.push(mld_detect(residual, effective_gain, alloc.amplitude(user)));
    Ok(DetectionOutcome { decisions, mode })
}
