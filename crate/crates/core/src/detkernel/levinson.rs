use rug::{Assign, Float};
use serde::Serialize;

use crate::bigreal::check_prec;
use crate::error::{Error, Result};
use crate::moments::{MomentKind, MomentSequence};

use super::{certify, Certified, DetOptions};

/// Verblunsky data `π_n(0)` and norms `N_n` for `n = 0 … nmax`.
#[derive(Debug, Clone, Serialize)]
pub struct OpucSequence {
    pub t: f64,
    pub kind: MomentKind,
    pub nmax: usize,
    pub prec_bits: u32,
    #[serde(skip)]
    pub pi0: Vec<Float>,
    #[serde(skip)]
    pub norms: Vec<Float>,
}

impl OpucSequence {
    pub fn pi0_f64(&self, n: usize) -> f64 {
        self.pi0[n].to_f64()
    }

    pub fn norm_f64(&self, n: usize) -> f64 {
        self.norms[n].to_f64()
    }
}

/// Szegő recursion from the moments. With `π_n(z) = Σ c_k z^k` monic and
/// real,
///
/// ```text
/// π_{n+1}(0) = −(Σ_k c_k h_{k+1}) / N_n,
/// π_{n+1}(z) = z π_n(z) + π_{n+1}(0) π_n*(z),
/// N_{n+1}    = N_n (1 − π_{n+1}(0)²),
/// ```
///
/// where `π_n*` has the coefficients of `π_n` reversed.
pub fn levinson_opuc(h: &MomentSequence, nmax: usize) -> Result<OpucSequence> {
    if let MomentKind::Discrete { m } = h.kind {
        if nmax > 2 * m as usize - 1 {
            return Err(Error::Singularity(format!(
                "n = {nmax} exceeds 2m − 1 = {} for a weight on {} points",
                2 * m - 1,
                2 * m
            )));
        }
    }
    if h.kind == MomentKind::Continuous && h.max_l() < nmax {
        return Err(Error::Validation(format!("need moments up to {nmax}, have {}", h.max_l())));
    }
    let prec = h.prec_bits;
    let mut c: Vec<Float> = vec![Float::with_val(prec, 1)];
    let mut pi0 = vec![Float::with_val(prec, 1)];
    let mut norms = vec![h.get(0).clone()];
    if !norms[0].is_sign_positive() || norms[0].is_zero() {
        return Err(Error::Singularity("h_0 is not positive".into()));
    }
    let mut tmp = Float::new(prec);
    for n in 0..nmax {
        let mut s = Float::with_val(prec, 0);
        for (k, ck) in c.iter().enumerate() {
            tmp.assign(ck * h.get(k as i64 + 1));
            s += &tmp;
        }
        let alpha = -s / &norms[n];
        let one_minus = Float::with_val(prec, 1) - Float::with_val(prec, alpha.square_ref());
        if !one_minus.is_sign_positive() || one_minus.is_zero() {
            return Err(Error::Singularity(format!(
                "|π_{}(0)| ≥ 1 at t = {}: recursion left the support of the weight",
                n + 1,
                h.t
            )));
        }
        let next_norm = Float::with_val(prec, &norms[n] * &one_minus);
        let mut next = Vec::with_capacity(n + 2);
        for k in 0..=n + 1 {
            let shifted = if k >= 1 { c[k - 1].clone() } else { Float::with_val(prec, 0) };
            let reversed = if k <= n {
                Float::with_val(prec, &alpha * &c[n - k])
            } else {
                Float::with_val(prec, 0)
            };
            next.push(shifted + reversed);
        }
        c = next;
        pi0.push(alpha);
        norms.push(next_norm);
    }
    Ok(OpucSequence {
        t: h.t,
        kind: h.kind,
        nmax,
        prec_bits: prec,
        pi0,
        norms,
    })
}

/// Certified recursion: `π_n(0)` must agree in absolute terms and `N_n`
/// relatively to `opts.tol_bits` between successive precisions.
pub fn opuc(kind: MomentKind, t: f64, nmax: usize, opts: &DetOptions) -> Result<Certified<OpucSequence>> {
    let start = opts.start_for(t, nmax);
    check_prec(start.min(crate::bigreal::MAX_PREC))?;
    certify(
        &format!("OPUC recursion to n = {nmax} at t = {t}"),
        start,
        opts.tol_bits,
        |a: &OpucSequence, b: &OpucSequence| {
            let pi_bits = a
                .pi0
                .iter()
                .zip(&b.pi0)
                .map(|(x, y)| {
                    let d = Float::with_val(x.prec(), x - y).abs();
                    if d.is_zero() {
                        u32::MAX
                    } else {
                        (-d.get_exp().unwrap()).max(0) as u32
                    }
                })
                .min()
                .unwrap_or(u32::MAX);
            let n_bits = a
                .norms
                .iter()
                .zip(&b.norms)
                .map(|(x, y)| crate::bigreal::agreement_bits(x, y))
                .min()
                .unwrap_or(u32::MAX);
            pi_bits.min(n_bits)
        },
        |prec| {
            let h = MomentSequence::new(kind, t, nmax + 1, prec)?;
            levinson_opuc(&h, nmax)
        },
    )
}
