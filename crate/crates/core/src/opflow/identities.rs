use rug::Float;
use serde::Serialize;

use crate::detkernel::{toeplitz_det_from, toeplitz_hankel_det_from, DetOptions, OpucSequence};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::moments::{MomentKind, MomentSequence};

use super::flow::{opuc_at, q_functional};

/// Maximal residual of one differential identity at step `h` and `h/2`.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualPair {
    pub name: String,
    pub coarse: f64,
    pub fine: f64,
    /// `coarse / fine`; close to 4 for a second-order difference.
    pub ratio: f64,
}

impl ResidualPair {
    fn new(name: &str, coarse: f64, fine: f64) -> Self {
        ResidualPair {
            name: name.into(),
            coarse,
            fine,
            ratio: if fine > 0.0 { coarse / fine } else { f64::INFINITY },
        }
    }

    /// Small, and either second order under halving or already at rounding
    /// level.
    pub fn passes(&self, tol: f64) -> bool {
        let negligible = self.coarse < 1e-30;
        self.coarse < tol && (negligible || (3.0..=5.0).contains(&self.ratio))
    }
}

/// Outcome of [`ode_identity_checks`].
#[derive(Debug, Clone, Serialize)]
pub struct IdentityReport {
    pub t: f64,
    pub kind: MomentKind,
    pub nmax: usize,
    pub step: f64,
    /// Algebraic identities, as maximal relative residuals.
    pub algebraic: Vec<(String, f64)>,
    /// Differential identities checked by central differences.
    pub differential: Vec<ResidualPair>,
    pub pass: bool,
}

struct Sample {
    opuc: OpucSequence,
    // log T_n for n = 0 … nmax+1 and log H_j for j = 0 … jmax.
    log_t: Vec<Float>,
    log_h: Vec<Float>,
}

fn sample(kind: MomentKind, t: f64, nmax: usize, jmax: usize, prec: u32) -> Result<Sample> {
    let opuc = opuc_at(kind, t, nmax, prec)?;
    let h = MomentSequence::with_signed_t(kind, t, nmax + 2, prec)?;
    let log_t = (0..=nmax + 1)
        .map(|n| toeplitz_det_from(&h, n, Exec::Sequential).ln())
        .collect();
    let log_h = (0..=jmax)
        .map(|j| toeplitz_hankel_det_from(&h, j, Exec::Sequential).ln())
        .collect();
    Ok(Sample { opuc, log_t, log_h })
}

fn f(x: &Float) -> f64 {
    x.to_f64()
}

/// Checks the flow identities of the recursion at `t`:
///
/// * `N_{n+1}/N_n = 1 − π_{n+1}(0)²` with `N_n = T_{n+1}/T_n` from determinants;
/// * `T_j = Π_{n<j} N_n` and `H_j = Π_{n=1}^{j} N_{2n}/(1 − π_{2n}(0))`;
/// * `π_n(0)′ = (π_{n+1}(0) − π_{n−1}(0))(1 − π_n(0)²)`;
/// * `N_n′ = −2 π_{n+1}(0) π_n(0) N_n`;
/// * `(log H_j)′ = π_{2j+1}(0) + ½ (log T_{2j+1})′`;
/// * `½ (log(e^{−t²} T_j))″ = −(π_{j−1}π_{j+1} + π_j²) + π_{j−1}π_{j+1}π_j²`.
///
/// Derivatives are central differences with step `step` and `step/2`,
/// where `step` is first rounded to a power of two so that `t ± step` is
/// exact and the second difference is not swamped by abscissa rounding.
pub fn ode_identity_checks(t: f64, nmax: usize, kind: MomentKind, step: f64, opts: &DetOptions) -> Result<IdentityReport> {
    if !(t.is_finite() && t >= 0.0) || !(step > 0.0 && step < 0.5) {
        return Err(Error::Validation("need t ≥ 0 and 0 < step < 0.5".into()));
    }
    if nmax < 2 {
        return Err(Error::Validation("nmax must be at least 2".into()));
    }
    if let MomentKind::Discrete { m } = kind {
        if nmax + 1 > 2 * m as usize - 1 {
            return Err(Error::Singularity(format!("nmax + 1 = {} exceeds 2m − 1 = {}", nmax + 1, 2 * m - 1)));
        }
    }
    let step = 2f64.powi(step.log2().round() as i32);
    let jmax = match kind {
        MomentKind::Discrete { m } => ((nmax - 1) / 2).min(m as usize - 1),
        MomentKind::Continuous => (nmax - 1) / 2,
    };
    let prec = opts.start_for(t + 1.0, nmax) + 128;
    let at = |s: f64| sample(kind, s, nmax + 1, jmax, prec);
    let c = at(t)?;
    let o = &c.opuc;

    let mut algebraic = Vec::new();
    let rel = |a: &Float, b: &Float| f(&Float::with_val(prec, a - b).abs()) / f(&Float::with_val(prec, b.abs_ref())).max(1e-300);

    let mut worst = 0.0f64;
    for n in 0..nmax {
        let lhs = Float::with_val(prec, &c.log_t[n + 2] + &c.log_t[n]) - &c.log_t[n + 1] * Float::with_val(prec, 2);
        let rhs = (Float::with_val(prec, 1) - Float::with_val(prec, o.pi0[n + 1].square_ref())).ln();
        worst = worst.max(f(&Float::with_val(prec, lhs - rhs).abs()));
    }
    algebraic.push(("norm_ratio".to_string(), worst));

    let mut worst_t = 0.0f64;
    let mut prod = Float::with_val(prec, 1);
    for n in 0..=nmax {
        prod *= &o.norms[n];
        worst_t = worst_t.max(rel(&Float::with_val(prec, prod.ln_ref()), &c.log_t[n + 1]).min(
            f(&Float::with_val(prec, Float::with_val(prec, prod.ln_ref()) - &c.log_t[n + 1]).abs()),
        ));
    }
    algebraic.push(("toeplitz_product".to_string(), worst_t));

    let mut worst_h = 0.0f64;
    let mut prod = Float::with_val(prec, 1);
    for j in 1..=jmax.min(nmax / 2) {
        let denom = Float::with_val(prec, 1) - &o.pi0[2 * j];
        prod = prod * &o.norms[2 * j] / denom;
        worst_h = worst_h.max(f(&Float::with_val(prec, Float::with_val(prec, prod.ln_ref()) - &c.log_h[j]).abs()));
    }
    algebraic.push(("hankel_product".to_string(), worst_h));

    let diffs = |h: f64| -> Result<[f64; 4]> {
        let p = at(t + h)?;
        let m = at(t - h)?;
        let d = |a: &Float, b: &Float| f(&Float::with_val(prec, a - b)) / (2.0 * h);
        let mut r_pi = 0.0f64;
        for n in 1..=nmax {
            let lhs = d(&p.opuc.pi0[n], &m.opuc.pi0[n]);
            let pin = f(&o.pi0[n]);
            let rhs = (f(&o.pi0[n + 1]) - f(&o.pi0[n - 1])) * (1.0 - pin * pin);
            r_pi = r_pi.max((lhs - rhs).abs());
        }
        let mut r_n = 0.0f64;
        for n in 0..=nmax {
            // Compare logarithmic derivatives to stay scale free.
            let lhs = d(&p.opuc.norms[n].clone().ln(), &m.opuc.norms[n].clone().ln());
            let rhs = -2.0 * f(&o.pi0[n + 1]) * f(&o.pi0[n]);
            r_n = r_n.max((lhs - rhs).abs());
        }
        let mut r_h = 0.0f64;
        for j in 1..=jmax {
            let lhs = d(&p.log_h[j], &m.log_h[j]);
            let rhs = f(&o.pi0[2 * j + 1]) + 0.5 * d(&p.log_t[2 * j + 1], &m.log_t[2 * j + 1]);
            r_h = r_h.max((lhs - rhs).abs());
        }
        let mut r_q = 0.0f64;
        for j in 1..=nmax {
            let second = f(&(Float::with_val(prec, &p.log_t[j] + &m.log_t[j]) - Float::with_val(prec, &c.log_t[j] * 2u32)))
                / (h * h);
            // (log e^{−t²})″ = −2.
            let lhs = 0.5 * (second - 2.0);
            let rhs = f(&q_functional(o, j));
            r_q = r_q.max((lhs - rhs).abs());
        }
        Ok([r_pi, r_n, r_h, r_q])
    };
    let coarse = diffs(step)?;
    let fine = diffs(step / 2.0)?;
    let names = ["verblunsky_derivative", "norm_derivative", "hankel_log_derivative", "toeplitz_second_derivative"];
    let differential: Vec<ResidualPair> = names
        .iter()
        .zip(coarse.iter().zip(&fine))
        .map(|(n, (c, f))| ResidualPair::new(n, *c, *f))
        .collect();
    let pass = algebraic.iter().all(|(_, r)| *r < 1e-20) && differential.iter().all(|r| r.passes(1e-6));
    Ok(IdentityReport {
        t,
        kind,
        nmax,
        step,
        algebraic,
        differential,
        pass,
    })
}
