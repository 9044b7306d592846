use serde::Serialize;

use crate::error::{Error, Result};

/// Below this distance from `γ = 1` the closed forms lose most of their
/// digits to cancellation and the Taylor series takes over.
const SERIES_RADIUS: f64 = 1e-4;

/// The Langer exponent `a(γ)` with `a(γ) = 2(γ−1) − (γ−1)²/15 + O((γ−1)³)`:
///
/// ```text
/// γ ≥ 1:  a =  [3(γ log(γ + √(γ²−1)) − √(γ²−1))]^{2/3}
/// γ < 1:  a = −[3(√(1−γ²) − γ arccos γ)]^{2/3}
/// ```
pub fn a_of_gamma(gamma: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.5) {
        return Err(Error::Domain(format!("γ = {gamma} outside (0, 1.5)")));
    }
    let e = gamma - 1.0;
    if e.abs() < SERIES_RADIUS {
        // The cubic coefficient follows from the next term of both closed
        // forms; it keeps the series well below f64 resolution here.
        return Ok(2.0 * e - e * e / 15.0 + 16.0 * e * e * e / 1575.0);
    }
    Ok(if gamma >= 1.0 {
        let r = (gamma * gamma - 1.0).sqrt();
        (3.0 * (gamma * (gamma + r).ln() - r)).powf(2.0 / 3.0)
    } else {
        let r = (1.0 - gamma * gamma).sqrt();
        -(3.0 * (r - gamma * gamma.acos())).powf(2.0 / 3.0)
    })
}

/// `s(γ) = t^{2/3} a(γ)`.
pub fn s_of_gamma(t: f64, gamma: f64) -> Result<f64> {
    Ok(t.powf(2.0 / 3.0) * a_of_gamma(gamma)?)
}

/// Integer levels and rescaled abscissae attached to `(t, x)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingPoint {
    pub t: f64,
    pub x: f64,
    /// `j = [t + x t^{1/3}/2]`, the level for `Cro_t` and `Nes_t`.
    pub j: usize,
    /// `x_t = ((2j+1) − 2t)/t^{1/3}`.
    pub x_t: f64,
    /// `ℓ = [2t + x t^{1/3}]`, the level for `L_t`.
    pub l: usize,
    /// `x^{(t)} = (ℓ − 2t)/t^{1/3}`.
    pub x_lt: f64,
}

impl ScalingPoint {
    pub fn new(t: f64, x: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 1.0 && x.is_finite()) {
            return Err(Error::Validation(format!("need finite t ≥ 1 and finite x, got t = {t}, x = {x}")));
        }
        let c = t.cbrt();
        let jf = (t + 0.5 * x * c).floor();
        let lf = (2.0 * t + x * c).floor();
        if jf < 0.0 || lf < 0.0 {
            return Err(Error::Range(format!("x = {x} gives a negative level at t = {t}")));
        }
        Ok(ScalingPoint {
            t,
            x,
            j: jf as usize,
            x_t: (jf - t) / (0.5 * c) + 1.0 / c,
            l: lf as usize,
            x_lt: (lf - 2.0 * t) / c,
        })
    }
}

/// `γ = n/(2t)` and `γ̃ = (2m−n)/(2t)`.
pub fn gammas(t: f64, n: usize, m: usize) -> (f64, f64) {
    (n as f64 / (2.0 * t), (2 * m) as f64 / (2.0 * t) - n as f64 / (2.0 * t))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn a_near_one() {
        assert_eq!(a_of_gamma(1.0).unwrap(), 0.0);
        let e: f64 = 0.1;
        assert!((a_of_gamma(1.1).unwrap() - (2.0 * e - e * e / 15.0)).abs() < 5e-4);
        for g in [1.0 - 1e-3, 1.0 + 1e-3, 1.0 - 2e-4, 1.0 + 2e-4] {
            let e = g - 1.0;
            let series = 2.0 * e - e * e / 15.0;
            assert!(((a_of_gamma(g).unwrap() - series) / series).abs() < 1e-5, "{g}");
        }
        // Continuity across the switch to the series.
        let lo = a_of_gamma(1.0 + 0.999_999 * SERIES_RADIUS).unwrap();
        let hi = a_of_gamma(1.0 + 1.000_001 * SERIES_RADIUS).unwrap();
        assert!((lo - hi).abs() < 1e-9);
        assert!(a_of_gamma(1.5).is_err() && a_of_gamma(0.0).is_err());
    }

    #[test]
    fn a_monotone() {
        let mut prev = f64::NEG_INFINITY;
        for i in 1..150 {
            let a = a_of_gamma(i as f64 / 100.0).unwrap();
            assert!(a > prev);
            prev = a;
        }
    }

    #[test]
    fn scaling_examples() {
        let p = ScalingPoint::new(1000.0, 0.0).unwrap();
        assert_eq!(p.j, 1000);
        assert!((p.x_t - 0.1).abs() < 1e-12);
        assert_eq!(p.x_lt, 0.0);
        assert_eq!(s_of_gamma(50.0, 1.0).unwrap(), 0.0);
        // 2j+1 = 2t + x_t t^{1/3}.
        let p = ScalingPoint::new(37.0, -1.3).unwrap();
        assert!(((2 * p.j + 1) as f64 - (74.0 + p.x_t * 37f64.cbrt())).abs() < 1e-12);
    }
}
