//! Big-float Toeplitz and Toeplitz-minus-Hankel determinants with a
//! precision-doubling certificate, and the Levinson/Szegő recursion for
//! orthogonal polynomials on the unit circle.

mod levinson;
mod linalg;

pub use levinson::{levinson_opuc, opuc, OpucSequence};
pub use linalg::{det_lu, det_spd, minors_from_pivots, spd_pivots};

use rug::Float;
use serde::Serialize;

use crate::bigreal::{agreement_bits, MAX_PREC};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::moments::{MomentKind, MomentSequence};

/// Knobs for certified evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetOptions {
    /// Required relative agreement between successive precisions.
    pub tol_bits: u32,
    /// Overrides the automatic starting precision.
    pub start_prec: Option<u32>,
    pub exec: Exec,
}

impl Default for DetOptions {
    fn default() -> Self {
        DetOptions {
            tol_bits: 100,
            start_prec: None,
            exec: Exec::default(),
        }
    }
}

impl DetOptions {
    pub fn with_tol_bits(mut self, bits: u32) -> Self {
        self.tol_bits = bits;
        self
    }

    pub fn with_start_prec(mut self, bits: u32) -> Self {
        self.start_prec = Some(bits);
        self
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    /// `max(256, 8t + 16n)` unless overridden. Entries grow like `e^{2t}`,
    /// so the cancellation is roughly linear in `t`.
    pub fn start_for(&self, t: f64, n: usize) -> u32 {
        self.start_prec
            .unwrap_or_else(|| (8.0 * t + 16.0 * n as f64).ceil().max(256.0) as u32)
            .max(self.tol_bits + 32)
    }
}

/// A value confirmed by recomputation at twice the precision.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Certified<T = Float> {
    #[serde(skip)]
    pub value: T,
    /// Precision of the run that produced `value`.
    pub prec_bits: u32,
    /// Bits of relative agreement with the run at half the precision.
    pub agreed_bits: u32,
}

/// Evaluates `f` at doubling precisions until two successive results agree
/// to `tol_bits`; returns the higher-precision one.
pub fn certify<T, F, A>(what: &str, start: u32, tol_bits: u32, agree: A, f: F) -> Result<Certified<T>>
where
    F: Fn(u32) -> Result<T>,
    A: Fn(&T, &T) -> u32,
{
    let mut prec = start.min(MAX_PREC);
    let mut prev = f(prec)?;
    loop {
        if prec >= MAX_PREC {
            return Err(Error::Precision {
                what: what.to_string(),
                bits: prec,
                suggested_bits: prec.saturating_mul(2),
            });
        }
        let next_prec = (2 * prec).min(MAX_PREC);
        let next = f(next_prec)?;
        let bits = agree(&prev, &next);
        if bits >= tol_bits {
            return Ok(Certified {
                value: next,
                prec_bits: next_prec,
                agreed_bits: bits,
            });
        }
        prev = next;
        prec = next_prec;
    }
}

/// Certifies a single big float by relative agreement.
pub fn certify_float<F>(what: &str, start: u32, tol_bits: u32, f: F) -> Result<Certified>
where
    F: Fn(u32) -> Result<Float>,
{
    certify(what, start, tol_bits, agreement_bits, f)
}

/// Certifies a vector of big floats; agreement is the worst entry.
pub fn certify_floats<F>(what: &str, start: u32, tol_bits: u32, f: F) -> Result<Certified<Vec<Float>>>
where
    F: Fn(u32) -> Result<Vec<Float>>,
{
    certify(
        what,
        start,
        tol_bits,
        |a: &Vec<Float>, b: &Vec<Float>| a.iter().zip(b).map(|(x, y)| agreement_bits(x, y)).min().unwrap_or(u32::MAX),
        f,
    )
}

/// `[h_{a−b}]_{a,b=0..n−1}`.
pub fn toeplitz_matrix(h: &MomentSequence, n: usize) -> Vec<Vec<Float>> {
    (0..n)
        .map(|a| (0..n).map(|b| h.get(a as i64 - b as i64).clone()).collect())
        .collect()
}

/// `[h_{a−b} − h_{a+b}]_{a,b=1..j}`.
pub fn toeplitz_hankel_matrix(h: &MomentSequence, j: usize) -> Vec<Vec<Float>> {
    let prec = h.prec_bits;
    (1..=j as i64)
        .map(|a| {
            (1..=j as i64)
                .map(|b| Float::with_val(prec, h.get(a - b) - h.get(a + b)))
                .collect()
        })
        .collect()
}

/// `T_n = det[h_{a−b}]` at the moments' own precision, without certificate.
pub fn toeplitz_det_from(h: &MomentSequence, n: usize, exec: Exec) -> Float {
    if n == 0 {
        return Float::with_val(h.prec_bits, 1);
    }
    det_spd(toeplitz_matrix(h, n), exec)
}

/// `H_j = det[h_{a−b} − h_{a+b}]` at the moments' own precision.
pub fn toeplitz_hankel_det_from(h: &MomentSequence, j: usize, exec: Exec) -> Float {
    if j == 0 {
        return Float::with_val(h.prec_bits, 1);
    }
    det_spd(toeplitz_hankel_matrix(h, j), exec)
}

fn check_th_size(kind: MomentKind, j: usize) -> Result<()> {
    if let MomentKind::Discrete { m } = kind {
        if j + 1 > m as usize {
            return Err(Error::Validation(format!(
                "Toeplitz-minus-Hankel size {j} needs m > {j} for the discrete weight, got m = {m}"
            )));
        }
    }
    Ok(())
}

/// Certified `T_n(t)`.
pub fn toeplitz_det(kind: MomentKind, t: f64, n: usize, opts: &DetOptions) -> Result<Certified> {
    let what = format!("Toeplitz determinant T_{n}(t = {t})");
    certify_float(&what, opts.start_for(t, n), opts.tol_bits, |prec| {
        let h = MomentSequence::new(kind, t, n, prec)?;
        Ok(toeplitz_det_from(&h, n, opts.exec))
    })
}

/// Certified `H_j(t)`.
pub fn toeplitz_hankel_det(kind: MomentKind, t: f64, j: usize, opts: &DetOptions) -> Result<Certified> {
    check_th_size(kind, j)?;
    let what = format!("Toeplitz-minus-Hankel determinant H_{j}(t = {t})");
    certify_float(&what, opts.start_for(t, j), opts.tol_bits, |prec| {
        let h = MomentSequence::new(kind, t, 2 * j, prec)?;
        Ok(toeplitz_hankel_det_from(&h, j, opts.exec))
    })
}

/// Certified leading minors `H_1 … H_j` from one elimination. The
/// Toeplitz-minus-Hankel matrix is the Gram matrix of `sin(aθ)` under the
/// weight, hence positive definite, so unpivoted elimination exposes every
/// leading minor.
pub fn toeplitz_hankel_minors(kind: MomentKind, t: f64, j: usize, opts: &DetOptions) -> Result<Certified<Vec<Float>>> {
    check_th_size(kind, j)?;
    let what = format!("Toeplitz-minus-Hankel minors up to H_{j}(t = {t})");
    certify_floats(&what, opts.start_for(t, j), opts.tol_bits, |prec| {
        if j == 0 {
            return Ok(Vec::new());
        }
        let h = MomentSequence::new(kind, t, 2 * j, prec)?;
        let a = toeplitz_hankel_matrix(&h, j);
        match spd_pivots(&a, opts.exec) {
            Some(p) => Ok(minors_from_pivots(&p)),
            // Loss of positivity at this precision: report zeros so the
            // certificate forces a retry at higher precision.
            None => Ok(vec![Float::with_val(prec, 0); j]),
        }
    })
}

/// Certified `T_1 … T_n` from one elimination.
pub fn toeplitz_minors(kind: MomentKind, t: f64, n: usize, opts: &DetOptions) -> Result<Certified<Vec<Float>>> {
    let what = format!("Toeplitz minors up to T_{n}(t = {t})");
    certify_floats(&what, opts.start_for(t, n), opts.tol_bits, |prec| {
        if n == 0 {
            return Ok(Vec::new());
        }
        let h = MomentSequence::new(kind, t, n, prec)?;
        let a = toeplitz_matrix(&h, n);
        match spd_pivots(&a, opts.exec) {
            Some(p) => Ok(minors_from_pivots(&p)),
            None => Ok(vec![Float::with_val(prec, 0); n]),
        }
    })
}
