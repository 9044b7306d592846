//! Trigonometric moments `h_ℓ` of the discrete weight on the `2m`-th roots of
//! unity and of the continuous weight `e^{t(z+1/z)}`, plus the transition
//! kernel of the continuous-time simple random walk.

use rug::Float;
use serde::Serialize;

use crate::bigreal::{check_prec, pi, MAX_PREC};
use crate::error::{Error, Result};

use crate::bigreal::GUARD_BITS;

/// Which weight the moments belong to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum MomentKind {
    /// Uniform atoms at `e^{iπr/m}`, `r = 0 … 2m−1`, weighted by `e^{2t cos(πr/m)}`.
    Discrete { m: u32 },
    /// `e^{2t cos θ} dθ/2π`; `h_ℓ = I_ℓ(2t)`.
    Continuous,
}

/// Moments `h_0 … h_L` at a fixed precision. Negative and periodic indices
/// are folded on lookup.
#[derive(Debug, Clone)]
pub struct MomentSequence {
    pub kind: MomentKind,
    pub t: f64,
    pub prec_bits: u32,
    h: Vec<Float>,
}

pub(crate) fn check_t(t: f64) -> Result<()> {
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Validation(format!("t must be finite and nonnegative, got {t}")));
    }
    Ok(())
}

fn check_m(m: u32) -> Result<()> {
    if m == 0 {
        return Err(Error::Validation("m must be at least 1".into()));
    }
    Ok(())
}

impl MomentSequence {
    /// Moments with `|ℓ| ≤ max_l` at `prec_bits`. Entries carry absolute
    /// error of order `e^{2t}·2^{−prec_bits}`, which is what determinant
    /// evaluation needs; use [`h_discrete`] for full relative accuracy of a
    /// single tiny moment.
    pub fn new(kind: MomentKind, t: f64, max_l: usize, prec_bits: u32) -> Result<Self> {
        check_t(t)?;
        Self::with_signed_t(kind, t, max_l, prec_bits)
    }

    /// As [`MomentSequence::new`] but also accepting `t < 0`, where the
    /// weight `e^{2t cos θ}` is still positive. Central differences around
    /// `t = 0` need this.
    pub(crate) fn with_signed_t(kind: MomentKind, t: f64, max_l: usize, prec_bits: u32) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::Validation(format!("t must be finite, got {t}")));
        }
        check_prec(prec_bits)?;
        let h = match kind {
            MomentKind::Discrete { m } => {
                check_m(m)?;
                discrete_moments(m, t, max_l.min(m as usize), prec_bits)
            }
            MomentKind::Continuous => bessel_i_sequence(max_l, t, prec_bits),
        };
        Ok(MomentSequence {
            kind,
            t,
            prec_bits,
            h,
        })
    }

    /// Largest `|ℓ|` answerable by [`MomentSequence::get`].
    pub fn max_l(&self) -> usize {
        match self.kind {
            MomentKind::Discrete { m } if self.h.len() > m as usize => usize::MAX,
            _ => self.h.len() - 1,
        }
    }

    /// `h_ℓ` for any index within range.
    pub fn get(&self, l: i64) -> &Float {
        let mut a = l.unsigned_abs() as usize;
        if let MomentKind::Discrete { m } = self.kind {
            let period = 2 * m as usize;
            a %= period;
            if a > m as usize {
                a = period - a;
            }
        }
        assert!(a < self.h.len(), "moment index {l} beyond computed range");
        &self.h[a]
    }
}

/// `cos(πk/m)` for `k = 0 … 2m−1`, using the reflection `k ↔ 2m−k`.
fn cos_table(m: u32, prec: u32) -> Vec<Float> {
    let m = m as usize;
    let pi = pi(prec);
    let mut c: Vec<Float> = (0..=m)
        .map(|k| (Float::with_val(prec, &pi * k as u32) / m as u32).cos())
        .collect();
    for k in m + 1..2 * m {
        let v = c[2 * m - k].clone();
        c.push(v);
    }
    c
}

/// `h_ℓ` for `ℓ = 0 … max_l` (`max_l ≤ m`) by the folded cosine sum
/// `(1/2m)[E_0 + (−1)^ℓ E_m + 2 Σ_{r=1}^{m−1} cos(πrℓ/m) E_r]` with
/// `E_r = e^{2t cos(πr/m)}`.
fn discrete_moments(m: u32, t: f64, max_l: usize, prec: u32) -> Vec<Float> {
    if t == 0.0 {
        return (0..=max_l)
            .map(|l| Float::with_val(prec, u32::from(l % (2 * m as usize) == 0)))
            .collect();
    }
    let wp = prec + GUARD_BITS;
    let cos = cos_table(m, wp);
    let two_t = Float::with_val(wp, 2.0 * t);
    let e: Vec<Float> = (0..=m as usize)
        .map(|r| Float::with_val(wp, &two_t * &cos[r]).exp())
        .collect();
    let period = 2 * m as usize;
    let mut tmp = Float::new(wp);
    (0..=max_l)
        .map(|l| {
            let mut acc = Float::with_val(wp, 0);
            for r in 1..m as usize {
                tmp.assign_mul(&cos[(r * l) % period], &e[r]);
                acc += &tmp;
            }
            acc *= 2u32;
            acc += &e[0];
            if l % 2 == 0 {
                acc += &e[m as usize];
            } else {
                acc -= &e[m as usize];
            }
            acc /= 2 * m;
            Float::with_val(prec, acc)
        })
        .collect()
}

/// Small extension trait so the hot loop can reuse a scratch value.
trait AssignMul {
    fn assign_mul(&mut self, a: &Float, b: &Float);
}

impl AssignMul for Float {
    fn assign_mul(&mut self, a: &Float, b: &Float) {
        use rug::Assign;
        self.assign(a * b);
    }
}

/// Discrete moment `h_ℓ` to full relative precision `prec_bits`.
///
/// The cosine sum cancels down from `e^{2t}` to `h_ℓ`, so the working
/// precision is raised until the rounding error bound sits `prec_bits`
/// below the result.
pub fn h_discrete(l: i64, m: u32, t: f64, prec_bits: u32) -> Result<Float> {
    check_m(m)?;
    check_t(t)?;
    check_prec(prec_bits)?;
    let period = 2 * m as i64;
    let mut a = l.rem_euclid(period);
    if a > m as i64 {
        a = period - a;
    }
    if t == 0.0 {
        return Ok(Float::with_val(prec_bits, u32::from(a == 0)));
    }
    // Terms are at most e^{2t}; the sum has 2m of them.
    let magnitude_bits = (2.0 * t * std::f64::consts::LOG2_E).ceil() as u32 + 2 * (32 - m.leading_zeros()) + 4;
    let mut wp = prec_bits + magnitude_bits;
    loop {
        let v = discrete_moments(m, t, a as usize, wp).pop().unwrap();
        let err_exp = magnitude_bits as i64 - wp as i64;
        if !v.is_zero() && (v.get_exp().unwrap() as i64 - 1) - err_exp > prec_bits as i64 {
            return Ok(Float::with_val(prec_bits, v));
        }
        if wp >= MAX_PREC {
            return Err(Error::Precision {
                what: format!("h_{l} of the discrete weight (m = {m}, t = {t})"),
                bits: wp,
                suggested_bits: wp.saturating_mul(2),
            });
        }
        wp = (2 * wp).min(MAX_PREC);
    }
}

/// `I_{|ℓ|}(2t)` by its ascending series, to relative precision `prec_bits`.
///
/// All terms are positive. Once the term ratio `t²/((k+1)(k+1+ν))` drops
/// below ½ the remaining tail is at most the last term, and summation stops
/// when that term is below `2^{−prec−2}` of the partial sum.
pub fn h_continuous(l: i64, t: f64, prec_bits: u32) -> Result<Float> {
    check_t(t)?;
    check_prec(prec_bits)?;
    Ok(bessel_i(l.unsigned_abs() as usize, t, prec_bits))
}

pub(crate) fn bessel_i(nu: usize, t: f64, prec: u32) -> Float {
    let wp = prec + GUARD_BITS;
    if t == 0.0 {
        return Float::with_val(prec, u32::from(nu == 0));
    }
    let tt = Float::with_val(wp, t);
    let t2 = Float::with_val(wp, &tt * &tt);
    // First term t^ν/ν!.
    let mut term = Float::with_val(wp, 1);
    for i in 1..=nu {
        term *= &tt;
        term /= i as u32;
    }
    let mut sum = term.clone();
    let mut k: u64 = 0;
    loop {
        let denom = (k + 1) * (k + 1 + nu as u64);
        term *= &t2;
        term /= denom as f64;
        sum += &term;
        k += 1;
        let ratio_small = t * t < 0.5 * ((k + 1) * (k + 1 + nu as u64)) as f64;
        if ratio_small && term.is_zero() {
            break;
        }
        if ratio_small {
            let te = term.get_exp().unwrap() as i64;
            let se = sum.get_exp().unwrap() as i64;
            if se - te > prec as i64 + 2 {
                break;
            }
        }
    }
    Float::with_val(prec, sum)
}

/// `I_0(2t) … I_L(2t)`: two top orders by series, the rest by the downward
/// recurrence `I_{ν−1} = I_{ν+1} + (ν/t) I_ν`, which is stable for the
/// minimal solution.
fn bessel_i_sequence(max_l: usize, t: f64, prec: u32) -> Vec<Float> {
    if t == 0.0 {
        return (0..=max_l).map(|l| Float::with_val(prec, u32::from(l == 0))).collect();
    }
    let wp = prec + GUARD_BITS;
    let top = max_l + 1;
    let mut out = vec![Float::new(wp); top + 1];
    out[top] = bessel_i(top, t, wp);
    out[top - 1] = bessel_i(top - 1, t, wp);
    let tt = Float::with_val(wp, t);
    for nu in (1..top).rev() {
        let v = Float::with_val(wp, &out[nu] * nu as u32) / &tt + &out[nu + 1];
        out[nu - 1] = v;
    }
    out.truncate(max_l + 1);
    out.into_iter().map(|v| Float::with_val(prec, v)).collect()
}

/// `p_t(a) = e^{−2t} I_{|a|}(2t)`, the probability that a rate-one-each-way
/// continuous-time simple random walk sits at displacement `a` at time `t`.
pub fn p_transition(a: i64, t: f64, prec_bits: u32) -> Result<Float> {
    check_t(t)?;
    check_prec(prec_bits)?;
    let wp = prec_bits + GUARD_BITS;
    let i = bessel_i(a.unsigned_abs() as usize, t, wp);
    let e = Float::with_val(wp, -2.0 * t).exp();
    Ok(Float::with_val(prec_bits, i * e))
}

/// Sine-kernel entry `(1/m) Σ_{r=0}^{2m−1} sin(πra/m) sin(πrb/m) e^{2t cos(πr/m)}`,
/// an independent route to `h_{a−b} − h_{a+b}` for the discrete weight.
pub fn sine_kernel_matrix(m: u32, t: f64, j: usize, prec: u32) -> Result<Vec<Vec<Float>>> {
    check_m(m)?;
    check_t(t)?;
    check_prec(prec)?;
    let wp = prec + GUARD_BITS;
    let pi = pi(wp);
    let two_m = 2 * m as usize;
    let angle = |k: usize| Float::with_val(wp, &pi * (k % two_m) as u32) / m;
    let weights: Vec<Float> = (0..two_m)
        .map(|r| Float::with_val(wp, angle(r).cos() * (2.0 * t)).exp())
        .collect();
    let sines: Vec<Vec<Float>> = (1..=j)
        .map(|a| (0..two_m).map(|r| angle(r * a).sin()).collect())
        .collect();
    let mut out = vec![vec![Float::new(prec); j]; j];
    for a in 0..j {
        for b in 0..=a {
            let mut acc = Float::with_val(wp, 0);
            for r in 0..two_m {
                acc += Float::with_val(wp, &sines[a][r] * &sines[b][r]) * &weights[r];
            }
            acc /= m;
            out[a][b] = Float::with_val(prec, &acc);
            out[b][a] = Float::with_val(prec, acc);
        }
    }
    Ok(out)
}
