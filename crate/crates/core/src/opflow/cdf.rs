use rug::Float;
use serde::Serialize;

use crate::combinat::{double_factorial_odd, StatTable};
use crate::detkernel::{toeplitz_det, toeplitz_hankel_det, toeplitz_hankel_minors, Certified, DetOptions};
use crate::error::{Error, Result};
use crate::moments::{check_t, MomentKind};

/// How a probability was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Route {
    Determinant,
    Prop1Quadrature,
    PoissonTruncation,
}

/// A probability together with its provenance and accuracy.
#[derive(Debug, Clone, Serialize)]
pub struct DistributionPoint {
    pub t: f64,
    pub k: Option<usize>,
    pub j: Option<usize>,
    pub l: Option<usize>,
    #[serde(skip)]
    pub value: Float,
    pub route: Route,
    pub prec_bits: u32,
    /// Bits of agreement in the precision certificate (determinant route)
    /// or `−log2` of the truncation bound (Poisson route).
    pub certificate_bits: u32,
}

impl DistributionPoint {
    pub fn value_f64(&self) -> f64 {
        self.value.to_f64()
    }
}

fn gaussian_factor(prec: u32, t: f64, coeff: f64) -> Float {
    // e^{−coeff·t²}, with t² formed exactly in big precision.
    let tt = Float::with_val(prec, t);
    Float::with_val(prec, -(tt.square() * coeff)).exp()
}

fn point(t: f64, k: Option<usize>, j: Option<usize>, l: Option<usize>, det: Certified, coeff: f64) -> DistributionPoint {
    let prec = det.prec_bits.max(det.value.prec());
    let value = Float::with_val(prec, &det.value * gaussian_factor(prec, t, coeff));
    DistributionPoint {
        t,
        k,
        j,
        l,
        value,
        route: Route::Determinant,
        prec_bits: prec,
        certificate_bits: det.agreed_bits,
    }
}

fn identity_det(prec: u32) -> Certified {
    Certified {
        value: Float::with_val(prec, 1),
        prec_bits: prec,
        agreed_bits: u32::MAX,
    }
}

/// `P{Cro_t ≤ k, Nes_t ≤ j} = e^{−t²/2} H_j` for the discrete weight with
/// `m = j + k + 1`.
pub fn joint_cdf(t: f64, k: usize, j: usize, opts: &DetOptions) -> Result<DistributionPoint> {
    check_t(t)?;
    let det = if j == 0 {
        identity_det(opts.start_for(t, 0))
    } else {
        toeplitz_hankel_det(MomentKind::Discrete { m: (j + k + 1) as u32 }, t, j, opts)?
    };
    Ok(point(t, Some(k), Some(j), None, det, 0.5))
}

/// `P{Nes_t ≤ j} = e^{−t²/2} H_j` for the weight `e^{2t cos θ}`.
pub fn nes_marginal_cdf(t: f64, j: usize, opts: &DetOptions) -> Result<DistributionPoint> {
    check_t(t)?;
    let det = if j == 0 {
        identity_det(opts.start_for(t, 0))
    } else {
        toeplitz_hankel_det(MomentKind::Continuous, t, j, opts)?
    };
    Ok(point(t, None, Some(j), None, det, 0.5))
}

/// `P{Nes_t ≤ j}` for `j = 0 … jmax` from one elimination.
pub fn nes_marginal_cdfs(t: f64, jmax: usize, opts: &DetOptions) -> Result<Vec<DistributionPoint>> {
    check_t(t)?;
    let minors = toeplitz_hankel_minors(MomentKind::Continuous, t, jmax, opts)?;
    let mut out = vec![point(t, None, Some(0), None, identity_det(minors.prec_bits), 0.5)];
    for (i, v) in minors.value.into_iter().enumerate() {
        let det = Certified {
            value: v,
            prec_bits: minors.prec_bits,
            agreed_bits: minors.agreed_bits,
        };
        out.push(point(t, None, Some(i + 1), None, det, 0.5));
    }
    Ok(out)
}

/// `P{L_t ≤ ℓ} = e^{−t²} T_ℓ` for the weight `e^{2t cos θ}`.
pub fn lt_cdf(t: f64, l: usize, opts: &DetOptions) -> Result<DistributionPoint> {
    check_t(t)?;
    let det = toeplitz_det(MomentKind::Continuous, t, l, opts)?;
    Ok(point(t, None, None, Some(l), det, 1.0))
}

fn log_of(det: &Certified, t: f64, coeff: f64) -> Float {
    let prec = det.value.prec();
    let tt = Float::with_val(prec, t);
    Float::with_val(prec, det.value.ln_ref()) - tt.square() * coeff
}

/// `log P{Cro_t ≤ k, Nes_t ≤ j}` formed as `log H_j − t²/2`, immune to
/// underflow of the probability itself.
pub fn log_joint_cdf(t: f64, k: usize, j: usize, opts: &DetOptions) -> Result<Float> {
    check_t(t)?;
    let det = if j == 0 {
        identity_det(opts.start_for(t, 0))
    } else {
        toeplitz_hankel_det(MomentKind::Discrete { m: (j + k + 1) as u32 }, t, j, opts)?
    };
    Ok(log_of(&det, t, 0.5))
}

pub fn log_nes_marginal_cdf(t: f64, j: usize, opts: &DetOptions) -> Result<Float> {
    check_t(t)?;
    let det = if j == 0 {
        identity_det(opts.start_for(t, 0))
    } else {
        toeplitz_hankel_det(MomentKind::Continuous, t, j, opts)?
    };
    Ok(log_of(&det, t, 0.5))
}

pub fn log_lt_cdf(t: f64, l: usize, opts: &DetOptions) -> Result<Float> {
    check_t(t)?;
    let det = toeplitz_det(MomentKind::Continuous, t, l, opts)?;
    Ok(log_of(&det, t, 1.0))
}

/// `Σ_{n ≤ N} Pois(n; t²/2) · g_{k,j}(n)/(2n−1)!!` from exact tables
/// `tables[n−1]` for `n = 1 … N`, which equals `e^{−t²/2} Σ g_{k,j}(n)
/// t^{2n}/(2n)!` truncated. The omitted mass is at most `P{Pois(t²/2) > N}`,
/// reported as the certificate.
pub fn joint_cdf_poisson(t: f64, k: usize, j: usize, tables: &[StatTable], prec: u32) -> Result<DistributionPoint> {
    check_t(t)?;
    for (i, tab) in tables.iter().enumerate() {
        if tab.n != i + 1 {
            return Err(Error::Validation("tables must cover n = 1, 2, … consecutively".into()));
        }
    }
    let lambda = Float::with_val(prec, t) * t / 2u32;
    let mut p = Float::with_val(prec, -lambda.clone()).exp();
    let mut acc = p.clone();
    let mut mass = p.clone();
    for (i, tab) in tables.iter().enumerate() {
        let n = (i + 1) as u32;
        p = p * &lambda / n;
        mass += &p;
        let frac = Float::with_val(prec, tab.get(k, j)) / double_factorial_odd(n as usize);
        acc += Float::with_val(prec, &p * frac);
    }
    let tail = Float::with_val(prec, 1) - mass;
    let bits = if tail.is_zero() || tail.is_sign_negative() {
        prec
    } else {
        (-tail.get_exp().unwrap()).max(0) as u32
    };
    Ok(DistributionPoint {
        t,
        k: Some(k),
        j: Some(j),
        l: None,
        value: acc,
        route: Route::PoissonTruncation,
        prec_bits: prec,
        certificate_bits: bits,
    })
}
