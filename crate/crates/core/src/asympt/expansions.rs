//! Residuals of the second-order expansions of the marginal and joint laws
//! and of the Painlevé-regime formulas for `π_n(0)`.

use rug::Float;
use serde::Serialize;

use crate::detkernel::{opuc, toeplitz_minors, DetOptions};
use crate::error::{Error, Result};
use crate::moments::MomentKind;
use crate::opflow::{joint_cdf, nes_marginal_cdfs};
use crate::painleve::{default_solution, g1g2h, TwDistribution, TwKind};

use super::scaling::{gammas, s_of_gamma, ScalingPoint};

fn tw(kind: TwKind) -> Result<TwDistribution<'static>> {
    Ok(TwDistribution::new(kind, default_solution()?))
}

/// `F(x_t) − (4F″(x) + x²F′(x)/3)/(20 t^{2/3})`, the two-term expansion of
/// `P{Nes_t ≤ t + x t^{1/3}/2}`.
pub fn thm13_approx(t: f64, x: f64) -> Result<f64> {
    let p = ScalingPoint::new(t, x)?;
    let f = tw(TwKind::Goe)?;
    let v = f.eval(x)?;
    Ok(f.cdf(p.x_t)? - (4.0 * v.pdf_prime + x * x * v.pdf / 3.0) / (20.0 * t.powf(2.0 / 3.0)))
}

/// `F_GUE(x^{(t)}) − (F_GUE″(x) + x²F_GUE′(x)/6)/(10 t^{2/3})` for
/// `P{L_t ≤ 2t + x t^{1/3}}`.
pub fn thm15_approx(t: f64, x: f64) -> Result<f64> {
    let p = ScalingPoint::new(t, x)?;
    let f = tw(TwKind::Gue)?;
    let v = f.eval(x)?;
    Ok(f.cdf(p.x_lt)? - (v.pdf_prime + x * x * v.pdf / 6.0) / (10.0 * t.powf(2.0 / 3.0)))
}

/// One exact value against its expansion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpansionPoint {
    pub t: f64,
    pub x: f64,
    pub level: usize,
    pub exact: f64,
    pub approx: f64,
    /// `exact − approx`.
    pub residual: f64,
}

fn check_xs(xs: &[f64]) -> Result<()> {
    if xs.is_empty() {
        return Err(Error::Validation("no abscissae given".into()));
    }
    Ok(())
}

/// Exact `P{Nes_t ≤ j}` against [`thm13_approx`] for each `x`, all levels
/// from one determinant elimination.
pub fn thm13_residuals(t: f64, xs: &[f64], opts: &DetOptions) -> Result<Vec<ExpansionPoint>> {
    check_xs(xs)?;
    let pts: Vec<ScalingPoint> = xs.iter().map(|&x| ScalingPoint::new(t, x)).collect::<Result<_>>()?;
    let jmax = pts.iter().map(|p| p.j).max().unwrap_or(0);
    let cdfs = nes_marginal_cdfs(t, jmax, opts)?;
    pts.iter()
        .map(|p| {
            let exact = cdfs[p.j].value_f64();
            let approx = thm13_approx(t, p.x)?;
            Ok(ExpansionPoint {
                t,
                x: p.x,
                level: p.j,
                exact,
                approx,
                residual: exact - approx,
            })
        })
        .collect()
}

/// Exact `P{L_t ≤ ℓ} = e^{−t²} T_ℓ` against [`thm15_approx`].
pub fn thm15_residuals(t: f64, xs: &[f64], opts: &DetOptions) -> Result<Vec<ExpansionPoint>> {
    check_xs(xs)?;
    let pts: Vec<ScalingPoint> = xs.iter().map(|&x| ScalingPoint::new(t, x)).collect::<Result<_>>()?;
    let lmax = pts.iter().map(|p| p.l).max().unwrap_or(0);
    let minors = toeplitz_minors(MomentKind::Continuous, t, lmax, opts)?;
    let prec = minors.prec_bits;
    let damp = Float::with_val(prec, -(Float::with_val(prec, t).square())).exp();
    pts.iter()
        .map(|p| {
            let exact = if p.l == 0 {
                damp.to_f64()
            } else {
                Float::with_val(prec, &minors.value[p.l - 1] * &damp).to_f64()
            };
            let approx = thm15_approx(t, p.x)?;
            Ok(ExpansionPoint {
                t,
                x: p.x,
                level: p.l,
                exact,
                approx,
                residual: exact - approx,
            })
        })
        .collect()
}

/// The joint law at `(x, x′)` split into its product part and the leading
/// correction `F′(x)F′(x′)/t^{2/3}`. Both marginals are taken at the same
/// integer levels as the joint probability.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct JointExpansion {
    pub t: f64,
    pub x: f64,
    pub x_prime: f64,
    pub k: usize,
    pub j: usize,
    pub joint: f64,
    pub product: f64,
    pub correction: f64,
    /// `joint − product − correction`.
    pub residual: f64,
}

impl JointExpansion {
    /// `joint − product`, the quantity the correction approximates.
    pub fn measured(&self) -> f64 {
        self.joint - self.product
    }
}

/// `P{Cro_t ≤ k, Nes_t ≤ j}` with `k` from `x` and `j` from `x′`.
pub fn thm11_expansion(t: f64, x: f64, x_prime: f64, opts: &DetOptions) -> Result<JointExpansion> {
    let pk = ScalingPoint::new(t, x)?;
    let pj = ScalingPoint::new(t, x_prime)?;
    let f = tw(TwKind::Goe)?;
    let correction = f.pdf(x)? * f.pdf(x_prime)? / t.powf(2.0 / 3.0);
    let joint = joint_cdf(t, pk.j, pj.j, opts)?.value_f64();
    let marg = nes_marginal_cdfs(t, pk.j.max(pj.j), opts)?;
    // Cro_t and Nes_t have the same marginal law.
    let product = marg[pk.j].value_f64() * marg[pj.j].value_f64();
    Ok(JointExpansion {
        t,
        x,
        x_prime,
        k: pk.j,
        j: pj.j,
        joint,
        product,
        correction,
        residual: joint - product - correction,
    })
}

/// `P{C̃ro_t ≤ x}·P{Ñes_t ≤ x′} + F′(x)F′(x′)/t^{2/3}`.
pub fn thm11_joint_approx(t: f64, x: f64, x_prime: f64, opts: &DetOptions) -> Result<f64> {
    let e = thm11_expansion(t, x, x_prime, opts)?;
    Ok(e.product + e.correction)
}

/// `π_n(0)` against its Painlevé-regime approximation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeCheck {
    pub t: f64,
    pub n: usize,
    pub m: Option<usize>,
    pub gamma: f64,
    pub s: f64,
    pub gamma_tilde: Option<f64>,
    pub s_tilde: Option<f64>,
    pub exact: f64,
    pub approx: f64,
    pub residual: f64,
}

fn regime_s(t: f64, gamma: f64) -> Result<f64> {
    let s = s_of_gamma(t, gamma)?;
    let (lo, hi) = tw(TwKind::Gue)?.range();
    if !(s >= lo && s <= hi) {
        return Err(Error::Range(format!(
            "s(γ) = {s} for γ = {gamma} at t = {t} outside the Painlevé grid [{lo}, {hi}]"
        )));
    }
    Ok(s)
}

fn sign(n: usize) -> f64 {
    if n % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `(−1)ⁿπ_{n,∞}(0;t) − [t^{−1/3} q(s)(1 − (γ−1)/30) + h(s)/t]` with
/// `γ = n/2t` and `s = s(γ)`.
pub fn prop63_check(t: f64, n: usize, opts: &DetOptions) -> Result<RegimeCheck> {
    if !(t >= 1.0) || n == 0 {
        return Err(Error::Validation(format!("need t ≥ 1 and n ≥ 1, got t = {t}, n = {n}")));
    }
    let gamma = n as f64 / (2.0 * t);
    let s = regime_s(t, gamma)?;
    let sol = default_solution()?;
    let q = sol.at(s)?.q;
    let (_, _, h) = g1g2h(sol, s, s)?;
    let approx = t.powf(-1.0 / 3.0) * q * (1.0 - (gamma - 1.0) / 30.0) + h / t;
    let o = opuc(MomentKind::Continuous, t, n, opts)?;
    let exact = sign(n) * o.value.pi0_f64(n);
    Ok(RegimeCheck {
        t,
        n,
        m: None,
        gamma,
        s,
        gamma_tilde: None,
        s_tilde: None,
        exact,
        approx,
        residual: exact - approx,
    })
}

/// `π_{n,m}(0;t) − [π_{n,∞}(0;t) − (−1)ⁿπ_{2m−n,∞}(0;t) + (g₁ − (−1)ⁿg₂)(s, s̃)/t]`
/// with `s = s(n/2t)` and `s̃ = s((2m−n)/2t)`.
pub fn prop62_check(t: f64, n: usize, m: usize, opts: &DetOptions) -> Result<RegimeCheck> {
    if !(t >= 1.0) || n == 0 || 2 * m <= n {
        return Err(Error::Validation(format!(
            "need t ≥ 1, n ≥ 1 and 2m > n, got t = {t}, n = {n}, m = {m}"
        )));
    }
    let (gamma, gamma_tilde) = gammas(t, n, m);
    let s = regime_s(t, gamma)?;
    let s_tilde = regime_s(t, gamma_tilde)?;
    let sol = default_solution()?;
    let (g1, g2, _) = g1g2h(sol, s, s_tilde)?;
    let n2 = 2 * m - n;
    let cont = opuc(MomentKind::Continuous, t, n.max(n2), opts)?;
    let disc = opuc(MomentKind::Discrete { m: m as u32 }, t, n, opts)?;
    let sg = sign(n);
    let approx = cont.value.pi0_f64(n) - sg * cont.value.pi0_f64(n2) + (g1 - sg * g2) / t;
    let exact = disc.value.pi0_f64(n);
    Ok(RegimeCheck {
        t,
        n,
        m: Some(m),
        gamma,
        s,
        gamma_tilde: Some(gamma_tilde),
        s_tilde: Some(s_tilde),
        exact,
        approx,
        residual: exact - approx,
    })
}

/// `|π_n(0)|` far outside the Painlevé window, where it should decay like
/// `e^{−c max(n, 2m−n)}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentialRegime {
    pub t: f64,
    pub delta: f64,
    /// `(n, m, |π_{n,m}(0)|)`, `m = None` for the continuous weight.
    pub points: Vec<(usize, Option<usize>, f64)>,
    /// Smallest `−log|π|/max(n, 2m−n)` over the points.
    pub rate: f64,
}

/// Samples `n, 2m−n ≥ 2t(1+δ)` for both weights.
pub fn exponential_regime_check(t: f64, delta: f64, opts: &DetOptions) -> Result<ExponentialRegime> {
    if !(t >= 1.0 && delta > 0.0) {
        return Err(Error::Validation(format!("need t ≥ 1 and δ > 0, got t = {t}, δ = {delta}")));
    }
    let n0 = (2.0 * t * (1.0 + delta)).ceil() as usize;
    let ns = [n0, n0 + 3, n0 + 8];
    let cont = opuc(MomentKind::Continuous, t, n0 + 8, opts)?;
    let mut points = Vec::new();
    for &n in &ns {
        points.push((n, None, cont.value.pi0_f64(n).abs()));
        for extra in [0usize, 2, 6] {
            // 2m − n = n + extra.
            let m = n + extra / 2;
            let disc = opuc(MomentKind::Discrete { m: m as u32 }, t, n, opts)?;
            points.push((n, Some(m), disc.value.pi0_f64(n).abs()));
        }
    }
    let rate = points
        .iter()
        .map(|&(n, m, v)| {
            let scale = m.map_or(n, |m| n.max(2 * m - n)) as f64;
            -v.ln() / scale
        })
        .fold(f64::INFINITY, f64::min);
    Ok(ExponentialRegime {
        t,
        delta,
        points,
        rate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thm13_improves_with_t() {
        let opts = DetOptions::default();
        let r20 = thm13_residuals(20.0, &[0.0], &opts).unwrap()[0].residual.abs();
        let r40 = thm13_residuals(40.0, &[0.0], &opts).unwrap()[0].residual.abs();
        assert!(r40 < r20, "{r20} {r40}");
        let ratio = r20 / r40;
        assert!(ratio > 1.0 && ratio < 4.0, "{ratio}");
    }

    #[test]
    fn continuous_regime_residual_small() {
        let opts = DetOptions::default();
        let c = prop63_check(20.0, 40, &opts).unwrap();
        assert!(c.residual.abs() < 20f64.powf(-4.0 / 3.0), "{c:?}");
        assert!(c.exact > 0.0);
    }

    #[test]
    fn discrete_regime_window() {
        let opts = DetOptions::default();
        let c = prop62_check(30.0, 60, 61, &opts).unwrap();
        assert!(c.residual.abs() < 10.0 * 30f64.powf(-4.0 / 3.0), "{c:?}");
        assert!(matches!(prop62_check(30.0, 10, 61, &opts), Err(Error::Range(_)) | Err(Error::Domain(_))));
    }

    #[test]
    fn exponential_decay() {
        let opts = DetOptions::default();
        let e = exponential_regime_check(20.0, 0.25, &opts).unwrap();
        assert!(e.rate > 0.0, "{e:?}");
        let o = opuc(MomentKind::Continuous, 20.0, 60, &opts).unwrap();
        assert!(o.value.pi0_f64(60).abs() < 1e-6);
    }
}
