//! Gaussian tail functions.
//!
//! Every error-function evaluation in the crate goes through [`q_exact`], so
//! there is a single precision-controlled special function. The exponential
//! approximation [`q_approx`] is the one that makes the averaged BER integral
//! solvable in closed form.

#![allow(clippy::excessive_precision)]

use std::f64::consts::SQRT_2;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Gaussian tail probability `Q(x) = P(Z > x)` for a standard normal `Z`.
///
/// Relative accuracy is close to machine precision wherever the result is a
/// normal `f64` (|x| below about 37.5); beyond that the tail underflows.
pub fn q_exact(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Complementary error function, `erfc(x) = 2 Q(x √2)`.
pub fn erfc(x: f64) -> f64 {
    2.0 * q_exact(x * SQRT_2)
}

/// Error function, `erf(x) = 1 − 2 Q(x √2)`.
pub fn erf(x: f64) -> f64 {
    1.0 - 2.0 * q_exact(x * SQRT_2)
}

/// Standard normal density.
pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let z = x - mean;
    (-z * z / (2.0 * variance)).exp() / (2.0 * std::f64::consts::PI * variance).sqrt()
}

/// Fitting constants of the exponential Q-function approximation
/// `Q(x) ≈ exp(−a x² − b x − c)` for `x ≥ 0` (López-Benítez and Casadevall).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QApproxCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

impl QApproxCoeffs {
    pub const LOPEZ_BENITEZ: QApproxCoeffs = QApproxCoeffs {
        a: 0.3842,
        b: 0.7640,
        c: 0.6964,
    };

    pub fn new(a: f64, b: f64, c: f64) -> Result<Self> {
        for (name, v) in [("a", a), ("b", b), ("c", c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::invalid(name, format!("must be positive, got {v}")));
            }
        }
        Ok(QApproxCoeffs { a, b, c })
    }
}

impl Default for QApproxCoeffs {
    fn default() -> Self {
        Self::LOPEZ_BENITEZ
    }
}

/// One-sided exponential approximation of the Gaussian tail.
pub fn q_approx(x: f64, coeffs: &QApproxCoeffs) -> Result<f64> {
    if x.is_nan() || x < 0.0 {
        return Err(Error::invalid(
            "x",
            format!("exponential Q approximation is only defined for x >= 0, got {x}"),
        ));
    }
    Ok((-coeffs.a * x * x - coeffs.b * x - coeffs.c).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    // Reference values from mpmath at 40 digits.
    const Q_TABLE: &[(f64, f64)] = &[
        (0.5, 0.308_537_538_725_986_896_36),
        (1.0, 0.158_655_253_931_457_051_41),
        (2.0, 0.022_750_131_948_179_207_2),
        (3.0, 0.001_349_898_031_630_094_526_7),
        (5.0, 2.866_515_718_791_939_116_7e-7),
        (8.0, 6.220_960_574_271_784_123_5e-16),
        (12.0, 1.776_482_112_077_678_997_7e-33),
        (20.0, 2.753_624_118_606_233_695_1e-89),
        (30.0, 4.906_713_927_148_187_059_5e-198),
        (37.0, 5.725_571_222_524_576_822_7e-300),
        (-1.0, 0.841_344_746_068_542_948_59),
        (-3.0, 0.998_650_101_968_369_905_47),
    ];

    #[test]
    fn q_exact_matches_high_precision_table() {
        for &(x, want) in Q_TABLE {
            let got = q_exact(x);
            let rel = ((got - want) / want).abs();
            assert!(rel < 1e-12, "Q({x}) = {got:e}, want {want:e}, rel {rel:e}");
        }
    }

    #[test]
    fn q_exact_symmetry() {
        assert_eq!(q_exact(0.0), 0.5);
        for i in 0..200 {
            let x = i as f64 * 0.05;
            assert!((q_exact(-x) - (1.0 - q_exact(x))).abs() < 1e-15);
            assert!(q_exact(x + 0.05) < q_exact(x));
        }
    }

    #[test]
    fn erf_from_tail() {
        let table = [
            (0.1, 0.112_462_916_018_284_898_4),
            (0.5, 0.520_499_877_813_046_537_68),
            (1.0, 0.842_700_792_949_714_869_34),
            (2.0, 0.995_322_265_018_952_734_16),
        ];
        for (x, want) in table {
            assert!((erf(x) - want).abs() < 1e-15);
            assert!((erf(-x) + want).abs() < 1e-15);
        }
        assert!((erfc(1.0) - (1.0 - erf(1.0))).abs() < 1e-16);
    }

    #[test]
    fn q_approx_reference_points() {
        let c = QApproxCoeffs::default();
        assert!((q_approx(0.0, &c).unwrap() - 0.498_376_232_622_752_3).abs() < 1e-15);
        assert!((q_approx(1.0, &c).unwrap() - 0.158_088_543_661_715_1).abs() < 1e-15);
    }

    #[test]
    fn q_approx_relative_error_is_small_only_near_the_origin() {
        let c = QApproxCoeffs::default();
        for i in 0..=400 {
            let x = i as f64 * 0.005;
            let rel = (q_approx(x, &c).unwrap() / q_exact(x) - 1.0).abs();
            assert!(rel < 0.025, "x = {x}: {rel}");
        }
        // The fitted curve decays like exp(-0.3842 x^2) and overshoots the tail.
        let rel6 = q_approx(6.0, &c).unwrap() / q_exact(6.0) - 1.0;
        assert!(rel6 > 3.0);
    }

    #[test]
    fn q_approx_rejects_negative_argument() {
        let err = q_approx(-0.1, &QApproxCoeffs::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidParameter { .. }));
        assert!(QApproxCoeffs::new(0.3, -1.0, 0.2).is_err());
    }
}
