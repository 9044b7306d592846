use serde::Serialize;

use crate::error::{Error, Result};

/// Residuals of an asymptotic formula at increasing `t`, with the
/// least-squares fit of `log|r|` against `log t`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResidualSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub slope: f64,
    pub intercept: f64,
}

impl ResidualSeries {
    pub fn new(label: impl Into<String>, points: Vec<(f64, f64)>) -> Result<Self> {
        let (slope, intercept) = fit_decay(&points)?;
        Ok(ResidualSeries {
            label: label.into(),
            points,
            slope,
            intercept,
        })
    }

    pub fn slope_within(&self, lo: f64, hi: f64) -> bool {
        self.slope >= lo && self.slope <= hi
    }
}

/// Least-squares slope and intercept of `log|r|` against `log t`.
pub fn fit_decay(points: &[(f64, f64)]) -> Result<(f64, f64)> {
    if points.len() < 3 {
        return Err(Error::DegenerateFit(format!("{} points, need at least 3", points.len())));
    }
    if let Some(&(t, r)) = points.iter().find(|(t, r)| !(*t > 0.0) || *r == 0.0 || !r.is_finite()) {
        return Err(Error::DegenerateFit(format!("cannot take logarithms at t = {t}, r = {r}")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.abs().ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all t equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let ts = [20.0, 40.0, 80.0, 160.0];
        let s = ResidualSeries::new("inv", ts.iter().map(|&t| (t, 3.0 / t)).collect()).unwrap();
        assert!((s.slope + 1.0).abs() < 1e-6);
        assert!((s.intercept - 3f64.ln()).abs() < 1e-9);
        let s = ResidualSeries::new("two-thirds", ts.iter().map(|&t| (t, -0.5 * t.powf(-2.0 / 3.0))).collect()).unwrap();
        assert!((s.slope + 2.0 / 3.0).abs() < 1e-6);
        assert!(s.slope_within(-0.7, -0.6));
    }

    #[test]
    fn degenerate() {
        assert!(matches!(fit_decay(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]), Err(Error::DegenerateFit(_))));
        assert!(fit_decay(&[(1.0, 1.0), (2.0, 0.5)]).is_err());
        assert!(fit_decay(&[(2.0, 1.0), (2.0, 3.0), (2.0, 2.0)]).is_err());
    }
}
