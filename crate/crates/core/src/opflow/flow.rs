use rug::Float;
use serde::Serialize;

use crate::detkernel::{levinson_opuc, DetOptions, OpucSequence};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::moments::{check_t, MomentKind, MomentSequence};
use crate::quadrature::composite_gauss_legendre;

/// Gauss–Legendre points per panel; panels have length at most one.
const NODES_PER_UNIT: usize = 64;

/// Quadrature estimate with its panel-doubling stability.
#[derive(Debug, Clone, Serialize)]
pub struct QuadratureResult {
    #[serde(skip)]
    pub value: Float,
    pub nodes: usize,
    /// `|I_N − I_{2N}|` from the last doubling.
    pub stability: f64,
}

impl QuadratureResult {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

/// `𝒬 = −(a c + b²) + a c b²` with `(a, b, c) = (π_{n−1}, π_n, π_{n+1})`
/// at zero.
pub fn q_functional(opuc: &OpucSequence, n: usize) -> Float {
    let a = &opuc.pi0[n - 1];
    let b = &opuc.pi0[n];
    let c = &opuc.pi0[n + 1];
    let prec = b.prec();
    let ac = Float::with_val(prec, a * c);
    let b2 = Float::with_val(prec, b.square_ref());
    let prod = Float::with_val(prec, &ac * &b2);
    -(ac + b2) + prod
}

/// Fixed-precision recursion, accepting any real `t`.
pub(crate) fn opuc_at(kind: MomentKind, t: f64, nmax: usize, prec: u32) -> Result<OpucSequence> {
    let h = MomentSequence::with_signed_t(kind, t, nmax + 1, prec)?;
    levinson_opuc(&h, nmax)
}

/// Working precision for a recursion at `|t| ≤ t_max` up to degree `n`.
fn flow_prec(opts: &DetOptions, t_max: f64, n: usize) -> u32 {
    opts.start_for(t_max, n) + 64
}

/// Integrates `f(τ, π(τ))` over `[0, t]` with `panels` panels.
fn integrate<F>(t: f64, panels: usize, kind: MomentKind, nmax: usize, prec: u32, exec: Exec, f: &F) -> Result<Float>
where
    F: Fn(f64, &OpucSequence) -> Float + Sync,
{
    let nodes = composite_gauss_legendre(0.0, t, panels, NODES_PER_UNIT);
    let terms = exec.map_slice(&nodes, |&(tau, w)| -> Result<Float> {
        let o = opuc_at(kind, tau, nmax, prec)?;
        Ok(f(tau, &o) * w)
    });
    let mut acc = Float::with_val(prec, 0);
    for v in terms {
        acc += v?;
    }
    Ok(acc)
}

/// Doubles the panel count from `⌈t⌉` until successive estimates agree to
/// `1e−10` (or four doublings), returning the finer one.
fn adaptive<F>(t: f64, kind: MomentKind, nmax: usize, opts: &DetOptions, f: F) -> Result<QuadratureResult>
where
    F: Fn(f64, &OpucSequence) -> Float + Sync,
{
    let prec = flow_prec(opts, t, nmax);
    if t == 0.0 {
        return Ok(QuadratureResult {
            value: Float::with_val(prec, 0),
            nodes: 0,
            stability: 0.0,
        });
    }
    let mut panels = t.ceil().max(1.0) as usize;
    let mut prev = integrate(t, panels, kind, nmax, prec, opts.exec, &f)?;
    for _ in 0..4 {
        panels *= 2;
        let next = integrate(t, panels, kind, nmax, prec, opts.exec, &f)?;
        let diff = Float::with_val(prec, &next - &prev).abs().to_f64();
        if diff < 1e-10 {
            return Ok(QuadratureResult {
                value: next,
                nodes: panels * NODES_PER_UNIT,
                stability: diff,
            });
        }
        prev = next;
    }
    Err(Error::Convergence(format!(
        "flow quadrature at t = {t} not stable after {panels} panels"
    )))
}

fn prop1_integrand(j: usize) -> impl Fn(f64, f64, &OpucSequence) -> Float + Sync {
    move |t, tau, o| {
        let q = q_functional(o, 2 * j + 1);
        Float::with_val(q.prec(), &o.pi0[2 * j + 1]) + q * (t - tau)
    }
}

/// `log P{Cro_t ≤ k, Nes_t ≤ j}` from
/// `∫₀ᵗ π_{2j+1}(0;τ)dτ + ∫₀ᵗ (t−τ) 𝒬_j(τ) dτ` over the discrete weight with
/// `m = j + k + 1`; the double integral is folded into the weight `(t−τ)`.
///
/// The recursion needs degree `2j+2 ≤ 2m−1`, i.e. `k ≥ 1`. For `k = 0`
/// only the empty matching qualifies and the value `−t²/2` is returned.
pub fn prop1_quadrature(t: f64, k: usize, j: usize, opts: &DetOptions) -> Result<QuadratureResult> {
    check_t(t)?;
    if k == 0 {
        let prec = flow_prec(opts, t, 0);
        return Ok(QuadratureResult {
            value: Float::with_val(prec, -(t * t) / 2.0),
            nodes: 0,
            stability: 0.0,
        });
    }
    let kind = MomentKind::Discrete { m: (j + k + 1) as u32 };
    let f = prop1_integrand(j);
    adaptive(t, kind, 2 * j + 2, opts, move |tau, o| f(t, tau, o))
}

/// The same flow for the weight `e^{2t cos θ}`: `log P{Nes_t ≤ j}`.
pub fn nes_prop1_quadrature(t: f64, j: usize, opts: &DetOptions) -> Result<QuadratureResult> {
    check_t(t)?;
    let f = prop1_integrand(j);
    adaptive(t, MomentKind::Continuous, 2 * j + 2, opts, move |tau, o| f(t, tau, o))
}

/// `log P{L_t ≤ ℓ} = 2∫₀ᵗ (t−τ) 𝒬(τ) dτ` with `𝒬` built from
/// `π_{ℓ−1}, π_ℓ, π_{ℓ+1}`. For `ℓ = 0` the value is `−t²`.
pub fn lt_prop1_quadrature(t: f64, l: usize, opts: &DetOptions) -> Result<QuadratureResult> {
    check_t(t)?;
    if l == 0 {
        let prec = flow_prec(opts, t, 0);
        return Ok(QuadratureResult {
            value: Float::with_val(prec, -(t * t)),
            nodes: 0,
            stability: 0.0,
        });
    }
    adaptive(t, MomentKind::Continuous, l + 1, opts, move |tau, o| q_functional(o, l) * (2.0 * (t - tau)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::opflow::{log_joint_cdf, log_lt_cdf, log_nes_marginal_cdf};

    #[test]
    fn zero_time() {
        let o = DetOptions::default();
        assert_eq!(prop1_quadrature(0.0, 3, 2, &o).unwrap().value, 0);
    }

    #[test]
    fn matches_determinants() {
        let o = DetOptions::default();
        let q = prop1_quadrature(2.0, 4, 3, &o).unwrap().value_f64();
        let d = log_joint_cdf(2.0, 4, 3, &o).unwrap().to_f64();
        assert!((q - d).abs() < 1e-8, "{q} vs {d}");
        let q = nes_prop1_quadrature(2.0, 3, &o).unwrap().value_f64();
        let d = log_nes_marginal_cdf(2.0, 3, &o).unwrap().to_f64();
        assert!((q - d).abs() < 1e-8, "{q} vs {d}");
        for l in [1, 2, 5] {
            let q = lt_prop1_quadrature(1.5, l, &o).unwrap().value_f64();
            let d = log_lt_cdf(1.5, l, &o).unwrap().to_f64();
            assert!((q - d).abs() < 1e-8, "l={l}: {q} vs {d}");
        }
    }

    #[test]
    fn degenerate_levels() {
        let o = DetOptions::default();
        let q = prop1_quadrature(1.3, 0, 4, &o).unwrap().value_f64();
        assert!((q + 1.3 * 1.3 / 2.0).abs() < 1e-15);
        let q = prop1_quadrature(1.3, 3, 0, &o).unwrap().value_f64();
        assert!((q + 1.3 * 1.3 / 2.0).abs() < 1e-10);
    }
}
