use rug::Float;
use serde::Serialize;

use crate::combinat::StatTable;
use crate::detkernel::{toeplitz_hankel_minors, DetOptions};
use crate::error::{Error, Result};
use crate::moments::MomentKind;
use crate::opflow::nes_marginal_cdfs;

/// `Cov(Cro_t, Nes_t)` with a bound on the neglected part of the sum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PoissonCovariance {
    pub t: f64,
    pub covariance: f64,
    /// Levels `lo ..= hi` summed exactly on both axes.
    pub levels: (usize, usize),
    /// Bound on the terms left out.
    pub truncation_bound: f64,
    /// Smallest certificate over all determinants used.
    pub certificate_bits: u32,
}

/// Marginal probabilities below this are cut from the exact grid.
const CUT: f64 = 1e-13;

/// Hoeffding's formula for integer variables,
/// `Cov(X, Y) = Σ_{k,j ≥ 0} (P{X ≤ k, Y ≤ j} − P{X ≤ k} P{Y ≤ j})`.
///
/// Along an antidiagonal `k + j = m − 1` the joint probabilities share the
/// weight on the `2m`-th roots of unity, so each antidiagonal costs one
/// elimination. Outside `[lo, hi]²` each term is at most
/// `min(F(k), 1−F(k))·min(F(j), 1−F(j))`-weighted, which gives the bound
/// `2·S_out·S_all` with `S = Σ min(F, 1−F)` over the excluded and all
/// levels respectively.
pub fn covariance_poissonized(t: f64, opts: &DetOptions) -> Result<PoissonCovariance> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Validation(format!("t must be finite and nonnegative, got {t}")));
    }
    if t > 60.0 {
        return Err(Error::Validation(format!("t = {t} above the supported 60")));
    }
    if t == 0.0 {
        return Ok(PoissonCovariance {
            t,
            covariance: 0.0,
            levels: (0, 0),
            truncation_bound: 0.0,
            certificate_bits: u32::MAX,
        });
    }
    // Marginal CDF far enough right that 1 − F is negligible.
    let mut jmax = (t + 6.0 * t.cbrt() + 10.0).ceil() as usize;
    let marg = loop {
        let m = nes_marginal_cdfs(t, jmax, opts)?;
        let last = &m[jmax].value;
        let tail = Float::with_val(last.prec(), 1 - last);
        if tail.to_f64() < 1e-30 {
            break m;
        }
        jmax += jmax / 2;
    };
    let mut cert = marg.iter().map(|p| p.certificate_bits).min().unwrap_or(u32::MAX);
    let prec = marg[0].value.prec();
    let f: Vec<&Float> = marg.iter().map(|p| &p.value).collect();
    let lower: Vec<f64> = f.iter().map(|v| v.to_f64()).collect();
    let upper: Vec<f64> = f.iter().map(|v| Float::with_val(prec, 1 - *v).to_f64()).collect();
    let lo = lower.iter().position(|&v| v >= CUT).unwrap_or(0);
    let hi = upper.iter().rposition(|&v| v >= CUT).unwrap_or(0).max(lo);
    let small = |k: usize| lower[k].min(upper[k]);
    let s_all: f64 = (0..=jmax).map(small).sum();
    let s_out: f64 = (0..lo).chain(hi + 1..=jmax).map(small).sum::<f64>() + 1e-30;
    let bound = 2.0 * s_out * s_all;

    let damp = Float::with_val(prec, -(Float::with_val(prec, t).square() / 2u32)).exp();
    let diagonals: Vec<usize> = (2 * lo + 1..=2 * hi + 1).collect();
    let parts = opts.exec.map_slice(&diagonals, |&m| -> Result<(Float, u32)> {
        let jmin = lo.max((m - 1).saturating_sub(hi));
        let jtop = hi.min(m - 1 - lo);
        let mut acc = Float::with_val(prec, 0);
        if jmin > jtop {
            return Ok((acc, u32::MAX));
        }
        let inner = DetOptions {
            exec: crate::exec::Exec::Sequential,
            ..*opts
        };
        let minors = toeplitz_hankel_minors(MomentKind::Discrete { m: m as u32 }, t, jtop, &inner)?;
        for j in jmin..=jtop {
            let k = m - 1 - j;
            let joint = if j == 0 {
                damp.clone()
            } else {
                Float::with_val(prec, &minors.value[j - 1] * &damp)
            };
            acc += joint - Float::with_val(prec, f[k] * f[j]);
        }
        Ok((acc, minors.agreed_bits))
    });
    let mut total = Float::with_val(prec, 0);
    for p in parts {
        let (v, bits) = p?;
        total += v;
        cert = cert.min(bits);
    }
    Ok(PoissonCovariance {
        t,
        covariance: total.to_f64(),
        levels: (lo, hi),
        truncation_bound: bound,
        certificate_bits: cert,
    })
}

/// The same covariance from exact tables `n = 1 … N` mixed with Poisson
/// weights `e^{−λ}λⁿ/n!`, `λ = t²/2`; the empty matching adds nothing.
/// Returns the value and the Poisson mass beyond `N`.
pub fn covariance_poisson_truncation(t: f64, tables: &[StatTable]) -> Result<(f64, f64)> {
    if tables.iter().enumerate().any(|(i, tb)| tb.n != i + 1) {
        return Err(Error::Validation("tables must cover n = 1, …, N in order".into()));
    }
    let lambda = t * t / 2.0;
    let mut w = (-lambda).exp();
    let (mut ex, mut ey, mut exy, mut mass) = (0.0, 0.0, 0.0, w);
    for (i, tb) in tables.iter().enumerate() {
        w *= lambda / (i + 1) as f64;
        let h = tb.histogram();
        let total = tb.total() as f64;
        for (k, row) in h.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                let p = w * c as f64 / total;
                ex += p * k as f64;
                ey += p * j as f64;
                exy += p * (k * j) as f64;
            }
        }
        mass += w;
    }
    Ok((exy - ex * ey, (1.0 - mass).max(0.0)))
}
