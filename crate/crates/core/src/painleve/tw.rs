//! Tracy–Widom distributions from the Hastings–McLeod solution.
//!
//! `F(s) = exp(½∫_s^∞ (u − q))` (GOE) and `F_GUE(s) = exp(∫_s^∞ u)`, with
//! derivatives from `(log F)′ = ½(q − u)` and `(log F_GUE)′ = −u`.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::composite_gauss_legendre;

use super::airy::airy;
use super::hm::{solve_hm, HMSolution, HmOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TwKind {
    Goe,
    Gue,
}

impl std::str::FromStr for TwKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "goe" => Ok(TwKind::Goe),
            "gue" => Ok(TwKind::Gue),
            _ => Err(Error::Validation(format!("unknown ensemble {s:?}, expected goe or gue"))),
        }
    }
}

static DEFAULT: OnceLock<Result<HMSolution>> = OnceLock::new();

/// The solution on the default grid, computed once per process.
pub fn default_solution() -> Result<&'static HMSolution> {
    DEFAULT
        .get_or_init(|| solve_hm(&HmOptions::default()))
        .as_ref()
        .map_err(Clone::clone)
}

/// `F`, `F′` and `F″` at one point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TwValue {
    pub x: f64,
    pub cdf: f64,
    pub pdf: f64,
    pub pdf_prime: f64,
}

impl TwValue {
    pub fn deriv(&self, order: u8) -> Result<f64> {
        match order {
            0 => Ok(self.cdf),
            1 => Ok(self.pdf),
            2 => Ok(self.pdf_prime),
            _ => Err(Error::Validation(format!("derivative order {order} not in 0..=2"))),
        }
    }
}

/// A Tracy–Widom law backed by a Hastings–McLeod solution.
#[derive(Debug, Clone, Copy)]
pub struct TwDistribution<'a> {
    pub kind: TwKind,
    pub solution: &'a HMSolution,
}

impl<'a> TwDistribution<'a> {
    pub fn new(kind: TwKind, solution: &'a HMSolution) -> Self {
        TwDistribution { kind, solution }
    }

    /// Usable abscissae: one unit inside the solution grid.
    pub fn range(&self) -> (f64, f64) {
        (self.solution.s_min + 1.0, self.solution.s_max - 1.0)
    }

    fn check(&self, x: f64) -> Result<()> {
        let (lo, hi) = self.range();
        if x >= lo && x <= hi {
            Ok(())
        } else {
            Err(Error::Range(format!("x = {x} outside [{lo}, {hi}]")))
        }
    }

    pub fn eval(&self, x: f64) -> Result<TwValue> {
        self.check(x)?;
        let p = self.solution.at(x)?;
        let (cdf, d1, d2) = match self.kind {
            TwKind::Goe => {
                let f = p.log_f.exp();
                let w = p.q - p.u;
                (f, 0.5 * w, 0.25 * w * w + 0.5 * (p.qp - p.q * p.q))
            }
            TwKind::Gue => {
                let f = p.log_f_gue.exp();
                (f, -p.u, p.u * p.u - p.q * p.q)
            }
        };
        Ok(TwValue {
            x,
            cdf,
            pdf: cdf * d1,
            pdf_prime: cdf * d2,
        })
    }

    pub fn cdf(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.cdf)
    }

    pub fn pdf(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.pdf)
    }

    pub fn pdf_prime(&self, x: f64) -> Result<f64> {
        Ok(self.eval(x)?.pdf_prime)
    }

    /// Mean and variance by Gauss–Legendre quadrature of `x F′` and `x² F′`
    /// over the whole solution grid. Beyond `s_max` the GOE density is
    /// `½Ai(x)` to within `10^{−20}`, which still carries about `10^{−9}`
    /// of the second moment and is integrated separately; the GUE density
    /// there is of order `Ai²` and is dropped.
    pub fn mean_variance(&self) -> Result<(f64, f64)> {
        let sol = self.solution;
        let mut nodes = composite_gauss_legendre(sol.s_min, sol.s_max, 44, 24);
        let mut density: Vec<f64> = Vec::with_capacity(nodes.len());
        for &(x, _) in &nodes {
            let p = sol.at(x)?;
            density.push(match self.kind {
                TwKind::Goe => p.log_f.exp() * 0.5 * (p.q - p.u),
                TwKind::Gue => p.log_f_gue.exp() * -p.u,
            });
        }
        if self.kind == TwKind::Goe && sol.s_max < 15.0 {
            let tail = composite_gauss_legendre(sol.s_max, 16.0, 4, 24);
            density.extend(tail.iter().map(|&(x, _)| 0.5 * airy(x).0));
            nodes.extend(tail);
        }
        let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
        for ((x, w), d) in nodes.into_iter().zip(density) {
            m0 += w * d;
            m1 += w * x * d;
            m2 += w * x * x * d;
        }
        let mean = m1 / m0;
        Ok((mean, m2 / m0 - mean * mean))
    }

    /// Second-order correction in the marginal limit laws: `E(x)` with
    /// `20 E F = −4F″ − x²F′/3` for GOE, and `u² − q² − x²u/6` for GUE.
    pub fn correction(&self, x: f64) -> Result<f64> {
        self.check(x)?;
        let p = self.solution.at(x)?;
        Ok(match self.kind {
            TwKind::Goe => {
                let w = p.u - p.q;
                (-w * w + 2.0 * (p.q * p.q - p.qp) + x * x * w / 6.0) / 20.0
            }
            TwKind::Gue => p.u * p.u - p.q * p.q - x * x * p.u / 6.0,
        })
    }
}

pub fn tw_cdf(kind: TwKind, x: f64) -> Result<f64> {
    TwDistribution::new(kind, default_solution()?).cdf(x)
}

pub fn tw_pdf(kind: TwKind, x: f64) -> Result<f64> {
    TwDistribution::new(kind, default_solution()?).pdf(x)
}

pub fn tw_pdf_prime(kind: TwKind, x: f64) -> Result<f64> {
    TwDistribution::new(kind, default_solution()?).pdf_prime(x)
}

/// `g₁ = ½(u′(y)q(ỹ) + u(y)q′(ỹ))`, `g₂ = ½(q(y)u′(ỹ) + q′(y)u(ỹ))` and
/// `h(y) = u q′/5 − q³/5 − y q/20`, with `u′ = q²`.
pub fn g1g2h(sol: &HMSolution, y: f64, yt: f64) -> Result<(f64, f64, f64)> {
    let a = sol.at(y)?;
    let b = sol.at(yt)?;
    let g1 = 0.5 * (a.q * a.q * b.q + a.u * b.qp);
    let g2 = 0.5 * (a.q * b.q * b.q + a.qp * b.u);
    let h = a.u * a.qp / 5.0 - a.q.powi(3) / 5.0 - y * a.q / 20.0;
    Ok((g1, g2, h))
}

/// The correction coefficients of the OPUC expansion written directly and
/// as perfect derivatives, evaluated at `η` with shift `x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerfectDerivativeCheck {
    pub eta: f64,
    pub u1_direct: f64,
    pub u1_derivative: f64,
    pub u2_direct: f64,
    pub u2_derivative: f64,
}

impl PerfectDerivativeCheck {
    pub fn max_residual(&self) -> f64 {
        (self.u1_direct - self.u1_derivative)
            .abs()
            .max((self.u2_direct - self.u2_derivative).abs())
    }
}

/// Compares `h + (3η/20 − x/6)(q + ηq′)` with
/// `(1/5) d/dη [uq − q′ + (9η − 10x)ηq/12]`, and
/// `4qh + (3η/5 − 2x/3)(ηq′q + q²) + qq″ − q′² − q⁴` with
/// `(1/5) d²/dη² [u² − q² + (9η − 10x)ηu/6]`, the derivatives taken by
/// Richardson-extrapolated central differences.
pub fn perfect_derivative_check(sol: &HMSolution, eta: f64, x: f64) -> Result<PerfectDerivativeCheck> {
    let p = sol.at(eta)?;
    let (_, _, h) = g1g2h(sol, eta, eta)?;
    let u1_direct = h + (3.0 * eta / 20.0 - x / 6.0) * (p.q + eta * p.qp);
    let u2_direct = 4.0 * p.q * h
        + (0.6 * eta - 2.0 * x / 3.0) * (eta * p.qp * p.q + p.q * p.q)
        + p.q * p.qpp()
        - p.qp * p.qp
        - p.q.powi(4);
    let b1 = |e: f64| -> Result<f64> {
        let p = sol.at(e)?;
        Ok((p.u * p.q - p.qp + (9.0 * e - 10.0 * x) * e * p.q / 12.0) / 5.0)
    };
    let b2 = |e: f64| -> Result<f64> {
        let p = sol.at(e)?;
        Ok((p.u * p.u - p.q * p.q + (9.0 * e - 10.0 * x) * e * p.u / 6.0) / 5.0)
    };
    let d1 = |d: f64| -> Result<f64> { Ok((b1(eta + d)? - b1(eta - d)?) / (2.0 * d)) };
    let d2 = |d: f64| -> Result<f64> { Ok((b2(eta + d)? - 2.0 * b2(eta)? + b2(eta - d)?) / (d * d)) };
    let d = 1e-2;
    let u1_derivative = (4.0 * d1(d / 2.0)? - d1(d)?) / 3.0;
    let u2_derivative = (4.0 * d2(d / 2.0)? - d2(d)?) / 3.0;
    Ok(PerfectDerivativeCheck {
        eta,
        u1_direct,
        u1_derivative,
        u2_direct,
        u2_derivative,
    })
}
