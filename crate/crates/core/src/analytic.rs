//! Closed-form and semi-analytical BER of STAR-RIS NOMA users.
//!
//! All expressions share the same model: the aligned cascaded magnitude `φ_k`
//! is Gaussian with the moments of [`clt_moments`], the mutual subsurface
//! interference is folded into the noise through the penalty factor
//! `ρ_k = (1 + L_k (N_χ − N_k) γ / P)^{−1}`, and user `k` sees every sign
//! combination of the weaker users' symbols with equal probability.
//!
//! Users are numbered from 1.

use serde::{Deserialize, Serialize};

use crate::channel::{clt_moments, CltMoments};
use crate::noma::PowerAllocation;
use crate::quadrature::{integrate, Tolerance};
use crate::special::{erf, normal_pdf, q_exact, QApproxCoeffs};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct UserAnalyticParams {
    user: usize,
    power: PowerAllocation,
    path_gain: f64,
    elements: usize,
    zone_elements: usize,
    moments: CltMoments,
}

impl UserAnalyticParams {
    pub fn new(
        user: usize,
        power: PowerAllocation,
        path_gain: f64,
        elements: usize,
        zone_elements: usize,
    ) -> Result<Self> {
        let moments = clt_moments(path_gain, elements)?;
        Self::with_moments(user, power, path_gain, elements, zone_elements, moments)
    }

    /// Like [`new`](Self::new) with caller-supplied moments of `φ_k`.
    pub fn with_moments(
        user: usize,
        power: PowerAllocation,
        path_gain: f64,
        elements: usize,
        zone_elements: usize,
        moments: CltMoments,
    ) -> Result<Self> {
        if user == 0 || user > power.num_users() {
            return Err(Error::invalid(
                "user",
                format!("must be in 1..={}, got {user}", power.num_users()),
            ));
        }
        if !(path_gain.is_finite() && path_gain > 0.0) {
            return Err(Error::invalid("path_gain", format!("must be positive, got {path_gain}")));
        }
        if zone_elements < elements {
            return Err(Error::invalid(
                "zone_elements",
                format!("zone total {zone_elements} is smaller than the user's {elements} elements"),
            ));
        }
        if !(moments.mean >= 0.0 && moments.variance >= 0.0) {
            return Err(Error::invalid("moments", "mean and variance must be non-negative"));
        }
        Ok(UserAnalyticParams {
            user,
            power,
            path_gain,
            elements,
            zone_elements,
            moments,
        })
    }

    /// The same channel seen as the receiver of another user's stream, as
    /// needed for detecting `x_1` at user 2.
    pub fn as_user(&self, user: usize) -> Result<Self> {
        Self::with_moments(
            user,
            self.power.clone(),
            self.path_gain,
            self.elements,
            self.zone_elements,
            self.moments,
        )
    }

    pub fn user(&self) -> usize {
        self.user
    }

    pub fn num_users(&self) -> usize {
        self.power.num_users()
    }

    pub fn power(&self) -> &PowerAllocation {
        &self.power
    }

    pub fn path_gain(&self) -> f64 {
        self.path_gain
    }

    pub fn elements(&self) -> usize {
        self.elements
    }

    pub fn zone_elements(&self) -> usize {
        self.zone_elements
    }

    pub fn moments(&self) -> CltMoments {
        self.moments
    }

    /// `L_k (N_χ − N_k)`, the interference power relative to `P`.
    fn interference_gain(&self) -> f64 {
        self.path_gain * (self.zone_elements - self.elements) as f64
    }

    pub fn has_floor(&self) -> bool {
        self.zone_elements > self.elements
    }
}

/// Amplitudes `A_k^(i) = √(a_k P) ± … ± √(a_K P)`, each with weight `2^{k−K}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignCombinationSet {
    amplitudes: Vec<f64>,
    weight: f64,
}

impl SignCombinationSet {
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    fn weighted_sum(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.weight * self.amplitudes.iter().map(|&a| f(a)).sum::<f64>()
    }
}

/// Enumerates every sign pattern of users `k+1..K`. Index bit `j` set means
/// user `k+1+j` enters with a minus sign, so index 0 is the all-plus sum.
pub fn sign_combinations(user: usize, power: &PowerAllocation) -> Result<SignCombinationSet> {
    let total = power.num_users();
    if user == 0 || user > total {
        return Err(Error::invalid("user", format!("must be in 1..={total}, got {user}")));
    }
    let weaker = total - user;
    if weaker >= 63 {
        return Err(Error::Unsupported(format!("{weaker} interfering users")));
    }
    let count = 1usize << weaker;
    let amplitudes = (0..count)
        .map(|pattern| {
            let mut a = power.amplitude(user);
            for j in 0..weaker {
                let s = if pattern >> j & 1 == 1 { -1.0 } else { 1.0 };
                a += s * power.amplitude(user + 1 + j);
            }
            a
        })
        .collect();
    Ok(SignCombinationSet {
        amplitudes,
        weight: (2.0f64).powi(-(weaker as i32)),
    })
}

/// `ρ_k`.
pub fn interference_penalty(params: &UserAnalyticParams, snr: f64) -> f64 {
    1.0 / (1.0 + params.interference_gain() * snr / params.power.transmit_power())
}

/// `ρ_k γ`, with its `γ → ∞` limit `ϖ` (infinite for a sole occupant).
pub fn effective_snr(params: &UserAnalyticParams, snr: f64) -> f64 {
    if snr.is_infinite() {
        return floor_snr(params);
    }
    snr * interference_penalty(params, snr)
}

/// `ϖ = (L_k (N_χ − N_k) / P)^{−1}`.
pub fn floor_snr(params: &UserAnalyticParams) -> f64 {
    params.power.transmit_power() / params.interference_gain()
}

fn check_snr(snr: f64) -> Result<()> {
    if snr.is_nan() || snr < 0.0 {
        return Err(Error::invalid("snr", format!("must be non-negative, got {snr}")));
    }
    Ok(())
}

/// BER of user `k` for a fixed cascaded magnitude `φ`, exact Q-function.
pub fn conditional_ber(phi: f64, params: &UserAnalyticParams, snr: f64) -> Result<f64> {
    if phi.is_nan() || phi < 0.0 {
        return Err(Error::invalid("phi", format!("must be non-negative, got {phi}")));
    }
    check_snr(snr)?;
    let combos = sign_combinations(params.user, &params.power)?;
    Ok(conditional_with(&combos, phi, effective_snr(params, snr).sqrt()))
}

fn conditional_with(combos: &SignCombinationSet, phi: f64, snr_root: f64) -> f64 {
    combos.weighted_sum(|a| q_exact(a * phi * snr_root))
}

/// Span of the truncated `φ_k` density used by [`ber_numeric`], in standard deviations.
pub const NUMERIC_SPAN_SIGMAS: f64 = 10.0;

/// Averages [`conditional_ber`] over the Gaussian density of `φ_k`,
/// truncated to `[max(0, μ − 10√v), μ + 10√v]`, by adaptive quadrature.
pub fn ber_numeric(params: &UserAnalyticParams, snr: f64) -> Result<f64> {
    check_snr(snr)?;
    let combos = sign_combinations(params.user, &params.power)?;
    let snr_root = effective_snr(params, snr).sqrt();
    let CltMoments { mean, variance } = params.moments;
    if variance == 0.0 {
        return Ok(conditional_with(&combos, mean, snr_root));
    }
    let sd = variance.sqrt();
    let lo = (mean - NUMERIC_SPAN_SIGMAS * sd).max(0.0);
    let hi = mean + NUMERIC_SPAN_SIGMAS * sd;
    let q = integrate(
        |x| conditional_with(&combos, x, snr_root) * normal_pdf(x, mean, variance),
        lo,
        hi,
        &[mean],
        Tolerance::default(),
    )
    .map_err(|e| match e {
        Error::Numeric(msg) => Error::Numeric(format!(
            "user {} (N_k = {}, L_k = {:e}, snr = {snr:e}): {msg}",
            params.user, params.elements, params.path_gain
        )),
        other => other,
    })?;
    Ok(q.value)
}

/// `∫_0^∞ exp(−a s² x² − b s x − c) N(x; μ, v) dx` for `s ≥ 0`.
fn approx_term(s: f64, mean: f64, variance: f64, coeffs: &QApproxCoeffs) -> f64 {
    let QApproxCoeffs { a, b, c } = *coeffs;
    let (mu, v) = (mean, variance);
    let denom = 4.0 * a * s * s * v * v + 2.0 * v;
    // (b s v − μ)² / (4 a s² v² + 2 v), written as z² with the sign kept
    let z = (mu - b * s * v) / denom.sqrt();
    let exponent = -(2.0 * c * v + mu * mu) / (2.0 * v) + z * z;
    let root = (v / (4.0 * a * s * s * v + 2.0)).sqrt();
    exponent.exp() / (2.0 * v).sqrt() * root * (1.0 + erf(z))
}

fn closed_form_at(params: &UserAnalyticParams, eff_snr: f64, coeffs: &QApproxCoeffs) -> Result<f64> {
    let CltMoments { mean, variance } = params.moments;
    if variance <= 0.0 {
        return Err(Error::invalid(
            "variance",
            format!("closed form divides by the channel variance, got {variance}"),
        ));
    }
    let combos = sign_combinations(params.user, &params.power)?;
    let snr_root = eff_snr.sqrt();
    // Mass of the φ density on [0, ∞); Q(−x) = 1 − Q(x) extends the
    // one-sided approximation to negative amplitudes.
    let mass = q_exact(-mean / variance.sqrt());
    Ok(combos.weighted_sum(|amp| {
        let s = amp * snr_root;
        if s >= 0.0 {
            approx_term(s, mean, variance, coeffs)
        } else {
            mass - approx_term(-s, mean, variance, coeffs)
        }
    }))
}

/// Perfect-SIC BER of user `k` with the exponential Q approximation.
pub fn ber_closed_form(params: &UserAnalyticParams, snr: f64, coeffs: &QApproxCoeffs) -> Result<f64> {
    check_snr(snr)?;
    closed_form_at(params, effective_snr(params, snr), coeffs)
}

/// Two-user BER of user 2 when cancellation of `x_1` can fail:
/// `P_{e,2} P(x_1^c) + 0.5 (1 − P(x_1^c))`.
///
/// `user1_at_user2` must describe stream 1 seen through user 2's channel.
/// User 1 performs no cancellation; its BER is [`ber_closed_form`].
pub fn ber_imperfect_sic(
    user2: &UserAnalyticParams,
    user1_at_user2: &UserAnalyticParams,
    snr: f64,
    coeffs: &QApproxCoeffs,
) -> Result<f64> {
    imperfect_sic_with(user2, user1_at_user2, |p| ber_closed_form(p, snr, coeffs))
}

/// [`ber_imperfect_sic`] with both error probabilities from [`ber_numeric`].
pub fn ber_imperfect_sic_numeric(
    user2: &UserAnalyticParams,
    user1_at_user2: &UserAnalyticParams,
    snr: f64,
) -> Result<f64> {
    imperfect_sic_with(user2, user1_at_user2, |p| ber_numeric(p, snr))
}

fn imperfect_sic_with(
    user2: &UserAnalyticParams,
    user1_at_user2: &UserAnalyticParams,
    ber: impl Fn(&UserAnalyticParams) -> Result<f64>,
) -> Result<f64> {
    for p in [user2, user1_at_user2] {
        if p.num_users() != 2 {
            return Err(Error::Unsupported(format!(
                "imperfect SIC is derived for two users only, got K = {}",
                p.num_users()
            )));
        }
    }
    if user2.user != 2 || user1_at_user2.user != 1 {
        return Err(Error::invalid(
            "user",
            "expected user 2's own parameters and stream 1 seen at user 2",
        ));
    }
    let correct = 1.0 - ber(user1_at_user2)?;
    Ok(combine_imperfect_sic(ber(user2)?, correct))
}

/// `P_{e,2} P(x_1^c) + 0.5 (1 − P(x_1^c))`.
pub fn combine_imperfect_sic(perfect_ber: f64, first_stage_correct: f64) -> f64 {
    perfect_ber * first_stage_correct + 0.5 * (1.0 - first_stage_correct)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Asymptote {
    /// High-SNR error floor.
    Floor(f64),
    /// The user has no co-zone interferers; BER keeps falling with SNR.
    NoFloor,
}

impl Asymptote {
    pub fn floor(self) -> Option<f64> {
        match self {
            Asymptote::Floor(v) => Some(v),
            Asymptote::NoFloor => None,
        }
    }
}

/// High-SNR limit of [`ber_closed_form`]: `ρ_k γ` replaced by `ϖ`.
pub fn ber_asymptotic(params: &UserAnalyticParams, coeffs: &QApproxCoeffs) -> Result<Asymptote> {
    if !params.has_floor() {
        return Ok(Asymptote::NoFloor);
    }
    closed_form_at(params, floor_snr(params), coeffs).map(Asymptote::Floor)
}

/// [`ber_numeric`] at `ρ_k γ = ϖ`.
pub fn ber_asymptotic_numeric(params: &UserAnalyticParams) -> Result<Asymptote> {
    if !params.has_floor() {
        return Ok(Asymptote::NoFloor);
    }
    ber_numeric(params, f64::INFINITY).map(Asymptote::Floor)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn power2() -> PowerAllocation {
        PowerAllocation::new(vec![0.7, 0.3], 1.0).unwrap()
    }

    fn fig2_user(user: usize, elements: usize) -> UserAnalyticParams {
        let l = [1.0 / 90_000.0, 2.5e-5][user - 1];
        UserAnalyticParams::new(user, power2(), l, elements, elements).unwrap()
    }

    #[test]
    fn sign_combination_sets() {
        let p = power2();
        let last = sign_combinations(2, &p).unwrap();
        assert_eq!(last.len(), 1);
        assert_eq!(last.weight(), 1.0);
        assert!((last.amplitudes()[0] - 0.3f64.sqrt()).abs() < 1e-15);

        let first = sign_combinations(1, &p).unwrap();
        assert_eq!(first.weight(), 0.5);
        assert!((first.amplitudes()[0] - 1.384_382_584_039_241_6).abs() < 1e-15);
        assert!((first.amplitudes()[1] - 0.288_937_469_028_909_5).abs() < 1e-15);

        let p3 = PowerAllocation::new(vec![0.75, 0.248, 0.002], 1.0).unwrap();
        let s = sign_combinations(1, &p3).unwrap();
        assert_eq!(s.len(), 4);
        assert_eq!(s.weight(), 0.25);
        assert!(sign_combinations(0, &p3).is_err());
        assert!(sign_combinations(4, &p3).is_err());
    }

    #[test]
    fn penalty_examples() {
        let sole = fig2_user(1, 25);
        assert_eq!(interference_penalty(&sole, 1e6), 1.0);
        assert!(ber_asymptotic(&sole, &QApproxCoeffs::default()).unwrap() == Asymptote::NoFloor);

        let shared = UserAnalyticParams::new(1, power2(), 1e-6, 25, 50).unwrap();
        assert!((interference_penalty(&shared, 1e4) - 0.8).abs() < 1e-15);
        let w = floor_snr(&shared);
        assert!((w - 1.0 / 25e-6).abs() < 1e-6);
        assert!((effective_snr(&shared, 1e15) / w - 1.0).abs() < 1e-8);
        assert_eq!(effective_snr(&shared, f64::INFINITY), w);
    }

    #[test]
    fn conditional_ber_limits() {
        let p = fig2_user(1, 50);
        assert!((conditional_ber(0.0, &p, 1e3).unwrap() - 0.5).abs() < 1e-15);
        let single = UserAnalyticParams::new(1, PowerAllocation::new(vec![1.0], 1.0).unwrap(), 1e-4, 10, 10).unwrap();
        let phi = 0.02;
        let snr: f64 = 3000.0;
        let want = q_exact(phi * snr.sqrt());
        assert!((conditional_ber(phi, &single, snr).unwrap() - want).abs() < 1e-16);
        assert!(conditional_ber(-1.0, &p, 1.0).is_err());
    }

    #[test]
    fn closed_form_at_zero_snr() {
        let p = fig2_user(2, 50);
        let got = ber_closed_form(&p, 0.0, &QApproxCoeffs::default()).unwrap();
        assert!((got - (-0.6964f64).exp()).abs() < 1e-12, "{got}");
        let numeric = ber_numeric(&p, 0.0).unwrap();
        assert!((numeric - 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_form_rejects_zero_variance() {
        let p = UserAnalyticParams::with_moments(
            1,
            power2(),
            1e-5,
            10,
            10,
            CltMoments {
                mean: 0.1,
                variance: 0.0,
            },
        )
        .unwrap();
        assert!(ber_closed_form(&p, 10.0, &QApproxCoeffs::default()).is_err());
        // degenerate density: point mass at μ
        let want = conditional_ber(0.1, &p, 10.0).unwrap();
        assert_eq!(ber_numeric(&p, 10.0).unwrap(), want);
    }

    #[test]
    fn numeric_tends_to_point_mass() {
        let base = fig2_user(1, 50);
        let mean = base.moments().mean;
        let want = conditional_ber(mean, &base, 1e3).unwrap();
        let narrow = UserAnalyticParams::with_moments(
            1,
            power2(),
            base.path_gain(),
            50,
            50,
            CltMoments {
                mean,
                variance: 1e-14,
            },
        )
        .unwrap();
        let got = ber_numeric(&narrow, 1e3).unwrap();
        assert!((got / want - 1.0).abs() < 1e-6, "{got} vs {want}");
    }

    #[test]
    fn closed_form_tracks_numeric_where_the_approximation_is_tight() {
        // Around BER 1e-1 the Q-approximation is within 1%.
        let c = QApproxCoeffs::default();
        for (user, snr_db) in [(1, 15.0), (2, 20.0)] {
            let p = fig2_user(user, 50);
            let snr = 10f64.powf(snr_db / 10.0);
            let cf = ber_closed_form(&p, snr, &c).unwrap();
            let num = ber_numeric(&p, snr).unwrap();
            assert!((cf / num - 1.0).abs() < 0.02, "user {user}: {cf} vs {num}");
        }
    }

    #[test]
    fn asymptote_is_high_snr_limit() {
        let c = QApproxCoeffs::default();
        let p = UserAnalyticParams::new(1, power2(), 1.0 / 18_000.0, 25, 50).unwrap();
        let floor = ber_asymptotic(&p, &c).unwrap().floor().unwrap();
        let mut last_gap = f64::INFINITY;
        for db in [20.0, 40.0, 60.0, 80.0, 100.0] {
            let gap = (ber_closed_form(&p, 10f64.powf(db / 10.0), &c).unwrap() - floor).abs();
            assert!(gap <= last_gap);
            last_gap = gap;
        }
        assert!(last_gap < 1e-5 * floor, "{last_gap} vs {floor}");
    }

    #[test]
    fn imperfect_sic_limits_and_errors() {
        assert_eq!(combine_imperfect_sic(1e-3, 1.0), 1e-3);
        assert_eq!(combine_imperfect_sic(1e-3, 0.0), 0.5);

        let u2 = fig2_user(2, 50);
        let u1_at_2 = u2.as_user(1).unwrap();
        let c = QApproxCoeffs::default();
        let snr = 1e3;
        let imperfect = ber_imperfect_sic(&u2, &u1_at_2, snr, &c).unwrap();
        assert!(imperfect >= ber_closed_form(&u2, snr, &c).unwrap());
        assert!(ber_imperfect_sic(&u1_at_2, &u2, snr, &c).is_err());

        let p3 = PowerAllocation::new(vec![0.75, 0.248, 0.002], 1.0).unwrap();
        let a = UserAnalyticParams::new(2, p3.clone(), 1e-5, 10, 10).unwrap();
        let b = a.as_user(1).unwrap();
        assert!(matches!(
            ber_imperfect_sic(&a, &b, snr, &c),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn negative_amplitudes_use_reflection() {
        // √a1 − √a2 − √a3 < 0 for this allocation.
        let p = PowerAllocation::new(vec![0.4, 0.35, 0.25], 1.0).unwrap();
        let s = sign_combinations(1, &p).unwrap();
        assert!(s.amplitudes().iter().any(|&a| a < 0.0));
        let params = UserAnalyticParams::new(1, p, 2.5e-5, 50, 50).unwrap();
        for db in [0.0, 10.0, 20.0] {
            let snr = 10f64.powf(db / 10.0);
            let cf = ber_closed_form(&params, snr, &QApproxCoeffs::default()).unwrap();
            let num = ber_numeric(&params, snr).unwrap();
            assert!((cf - num).abs() < 0.01, "{db} dB: {cf} vs {num}");
        }
    }
}
