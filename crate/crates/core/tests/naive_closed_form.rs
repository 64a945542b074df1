//! A naive transcription of the closed form, kept next to the implemented one.
//!
//! The naive version has `4 A² ρ γ v + 2` under the square root (the fitting
//! coefficient `a` is missing) and takes the square root of a square inside
//! `erf`, which loses the sign of `μ − b A √(ργ) v`. Both slips matter once
//! `A √(ργ)` is large.

use star_noma::analytic::{ber_closed_form, ber_numeric, effective_snr, sign_combinations, UserAnalyticParams};
use star_noma::noma::PowerAllocation;
use star_noma::quadrature::{integrate, Tolerance};
use star_noma::special::{erf, normal_pdf, q_approx, QApproxCoeffs};

fn naive(params: &UserAnalyticParams, snr: f64, c: &QApproxCoeffs) -> f64 {
    let m = params.moments();
    let (mu, v) = (m.mean, m.variance);
    let rg = effective_snr(params, snr);
    let combos = sign_combinations(params.user(), params.power()).unwrap();
    let prefactor = (-(2.0 * c.c * v + mu * mu) / (2.0 * v)).exp() / (2.0 * v).sqrt();
    let sum: f64 = combos
        .amplitudes()
        .iter()
        .map(|&amp| {
            let ratio = (c.b * amp * rg.sqrt() * v - mu).powi(2) / (4.0 * c.a * amp * amp * rg * v * v + 2.0 * v);
            combos.weight() * ratio.exp() * (v / (4.0 * amp * amp * rg * v + 2.0)).sqrt() * (1.0 + erf(ratio.sqrt()))
        })
        .sum();
    prefactor * sum
}

fn fig2(user: usize, elements: usize) -> UserAnalyticParams {
    let power = PowerAllocation::new(vec![0.7, 0.3], 1.0).unwrap();
    let distance = [6.0, 4.0][user - 1];
    let gain = 1.0 / (2500.0 * distance * distance);
    UserAnalyticParams::new(user, power, gain, elements, elements).unwrap()
}

#[test]
fn naive_and_corrected_agree_at_zero_snr() {
    let c = QApproxCoeffs::default();
    let p = fig2(1, 50);
    let a = naive(&p, 0.0, &c);
    let b = ber_closed_form(&p, 0.0, &c).unwrap();
    assert!((a / b - 1.0).abs() < 1e-12, "{a} vs {b}");
}

/// `∫_0^∞ Σ_i w_i q_approx(A_i √(ργ) x) N(x; μ, v) dx` by quadrature: the
/// quantity both naive and corrected forms claim to evaluate.
fn approximated_integral(params: &UserAnalyticParams, snr: f64, c: &QApproxCoeffs) -> f64 {
    let m = params.moments();
    let root = effective_snr(params, snr).sqrt();
    let combos = sign_combinations(params.user(), params.power()).unwrap();
    let sd = m.variance.sqrt();
    let integrand = |x: f64| {
        combos
            .amplitudes()
            .iter()
            .map(|&amp| combos.weight() * q_approx(amp * root * x, c).unwrap())
            .sum::<f64>()
            * normal_pdf(x, m.mean, m.variance)
    };
    let hi = m.mean + 12.0 * sd;
    let tol = Tolerance {
        rel: 1e-11,
        abs: 0.0,
        max_intervals: 5000,
    };
    integrate(integrand, 0.0, hi, &[m.mean], tol).unwrap().value
}

#[test]
fn corrected_form_is_the_integral_of_the_approximation() {
    let c = QApproxCoeffs::default();
    let mut worst_naive: f64 = 0.0;
    for user in [1, 2] {
        for elements in [25, 50, 75] {
            for db in [10.0, 20.0, 30.0, 40.0, 50.0] {
                let p = fig2(user, elements);
                let snr = 10f64.powf(db / 10.0);
                let reference = approximated_integral(&p, snr, &c);
                let corrected = ber_closed_form(&p, snr, &c).unwrap();
                assert!(
                    (corrected / reference - 1.0).abs() < 1e-8,
                    "user {user} N {elements} {db} dB: {corrected} vs {reference}"
                );
                worst_naive = worst_naive.max((naive(&p, snr, &c) / reference - 1.0).abs());
            }
        }
    }
    assert!(worst_naive > 0.3, "naive form unexpectedly exact: {worst_naive}");
}

#[test]
fn both_forms_share_the_approximation_bias_at_low_ber() {
    // Neither form is a good estimate of the exact BER far down the curve;
    // the exponential fit of Q overshoots in relative terms there.
    let c = QApproxCoeffs::default();
    let p = fig2(2, 75);
    let snr = 1e3;
    let num = ber_numeric(&p, snr).unwrap();
    assert!(ber_closed_form(&p, snr, &c).unwrap() / num > 1.5);
    assert!(naive(&p, snr, &c) / num > 1.3);
}
