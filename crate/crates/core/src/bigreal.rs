//! Arbitrary-precision reals backed by MPFR.

use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

pub type BigReal = Float;

/// Guard bits added on top of a caller's requested precision.
pub const GUARD_BITS: u32 = 64;

/// Hard ceiling for adaptive precision loops.
pub const MAX_PREC: u32 = 1 << 17;

pub fn check_prec(bits: u32) -> Result<()> {
    if !(16..=MAX_PREC).contains(&bits) {
        return Err(Error::Validation(format!(
            "precision {bits} bits outside [16, {MAX_PREC}]"
        )));
    }
    Ok(())
}

pub fn from_f64(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x)
}

pub fn pi(prec: u32) -> Float {
    Float::with_val(prec, Constant::Pi)
}

/// `e^{x}` for an exactly representable `x`.
pub fn exp_f64(prec: u32, x: f64) -> Float {
    Float::with_val(prec, x).exp()
}

/// `2^{−bits}` at the given precision.
pub fn ulp_scale(prec: u32, bits: u32) -> Float {
    Float::with_val(prec, 2).pow(-(bits as i32))
}

/// Decimal rendering with `digits` significant digits, plain notation for
/// moderate exponents.
pub fn to_decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let s = x.to_string_radix(10, Some(digits.max(1)));
    normalise_sci(&s)
}

/// Enough decimal digits to round-trip `prec` bits.
pub fn round_trip_digits(prec: u32) -> usize {
    (prec as f64 * std::f64::consts::LOG10_2).ceil() as usize + 2
}

fn normalise_sci(s: &str) -> String {
    // MPFR prints `d.ddde±x`; rewrite to plain notation when |x| is small.
    let (mant, exp) = match s.split_once('e') {
        Some((m, e)) => (m, e.parse::<i64>().unwrap_or(0)),
        None => return strip_zeros(s.to_string()),
    };
    if !(-8..=20).contains(&exp) {
        return s.to_string();
    }
    let neg = mant.starts_with('-');
    let digits: String = mant.chars().filter(|c| c.is_ascii_digit()).collect();
    let point = 1 + exp;
    let mut out = String::new();
    if neg {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    strip_zeros(out)
}

fn strip_zeros(mut out: String) -> String {
    if out.contains('.') {
        while out.ends_with('0') {
            out.pop();
        }
        if out.ends_with('.') {
            out.pop();
        }
    }
    out
}

/// Parses a decimal string at the given precision.
pub fn parse(prec: u32, s: &str) -> Result<Float> {
    Float::parse(s)
        .map(|v| Float::with_val(prec, v))
        .map_err(|e| Error::Validation(format!("bad number {s:?}: {e}")))
}

/// Number of bits to which `a` and `b` agree relative to `max(|a|, |b|)`.
/// Returns `u32::MAX` when they are identical.
pub fn agreement_bits(a: &Float, b: &Float) -> u32 {
    if a == b {
        return u32::MAX;
    }
    let diff = Float::with_val(a.prec().max(b.prec()), a - b).abs();
    let scale = Float::with_val(a.prec().max(b.prec()), a.abs_ref()).max(&Float::with_val(53, b.abs_ref()));
    if scale.is_zero() {
        return u32::MAX;
    }
    let e_scale = scale.get_exp().unwrap_or(0);
    let e_diff = diff.get_exp().unwrap_or(i32::MIN);
    (e_scale.saturating_sub(e_diff)).max(0) as u32
}
