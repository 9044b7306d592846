use rug::{Float, Integer, Rational};
use serde::Serialize;

use crate::error::Result;
use crate::exec::Exec;

use super::enumerate::{check_capacity, joint_histogram, MAX_ENUM_N};

/// Exact cumulative counts `g[k][j] = #{M ∈ 𝓜_n : cro(M) ≤ k, nes(M) ≤ j}`
/// for `0 ≤ k, j ≤ n`.
///
/// Counts are stored as `u64`; the largest value reachable under the
/// enumeration limit is `(2·9−1)!! < 2³⁵`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StatTable {
    pub n: usize,
    pub g: Vec<Vec<u64>>,
}

impl StatTable {
    pub fn from_histogram(n: usize, hist: &[Vec<u64>]) -> Self {
        let mut g = vec![vec![0u64; n + 1]; n + 1];
        for k in 0..=n {
            for j in 0..=n {
                let mut v = hist[k][j];
                if k > 0 {
                    v += g[k - 1][j];
                }
                if j > 0 {
                    v += g[k][j - 1];
                }
                if k > 0 && j > 0 {
                    v -= g[k - 1][j - 1];
                }
                g[k][j] = v;
            }
        }
        StatTable { n, g }
    }

    /// `g_{k,j}(n)` for arbitrary levels; levels above `n` saturate.
    pub fn get(&self, k: usize, j: usize) -> u64 {
        self.g[k.min(self.n)][j.min(self.n)]
    }

    pub fn total(&self) -> u64 {
        self.g[self.n][self.n]
    }

    /// `P{cro_n ≤ k, nes_n ≤ j}` under the uniform measure, as a float.
    pub fn probability(&self, k: usize, j: usize) -> f64 {
        self.get(k, j) as f64 / self.total() as f64
    }

    /// Recovers the joint point masses `#{cro = c, nes = e}`.
    pub fn histogram(&self) -> Vec<Vec<u64>> {
        let n = self.n;
        let mut h = vec![vec![0u64; n + 1]; n + 1];
        for k in 0..=n {
            for j in 0..=n {
                let mut v = self.g[k][j] as i128;
                if k > 0 {
                    v -= self.g[k - 1][j] as i128;
                }
                if j > 0 {
                    v -= self.g[k][j - 1] as i128;
                }
                if k > 0 && j > 0 {
                    v += self.g[k - 1][j - 1] as i128;
                }
                h[k][j] = v as u64;
            }
        }
        h
    }
}

/// Exact `g_{k,j}(n)` table by full enumeration.
pub fn gkj_table(n: usize) -> Result<StatTable> {
    gkj_table_with(n, Exec::default())
}

pub fn gkj_table_with(n: usize, exec: Exec) -> Result<StatTable> {
    let hist = joint_histogram(n, exec)?;
    Ok(StatTable::from_histogram(n, &hist))
}

/// Exact covariance and (rounded) correlation of `(cro_n, nes_n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovCor {
    pub n: usize,
    pub count: u64,
    pub covariance: Rational,
    /// `None` when a marginal is degenerate (`n = 1`).
    pub correlation: Option<f64>,
}

impl CovCor {
    pub fn covariance_f64(&self) -> f64 {
        self.covariance.to_f64()
    }
}

pub fn cov_cor(n: usize) -> Result<CovCor> {
    Ok(cov_cor_from_table(&gkj_table(n)?))
}

pub fn cov_cor_from_table(table: &StatTable) -> CovCor {
    let hist = table.histogram();
    let total = Integer::from(table.total());
    let (mut sx, mut sy, mut sxx, mut syy, mut sxy) = (
        Integer::new(),
        Integer::new(),
        Integer::new(),
        Integer::new(),
        Integer::new(),
    );
    for (c, row) in hist.iter().enumerate() {
        for (e, &w) in row.iter().enumerate() {
            let w = Integer::from(w);
            let (c, e) = (c as u64, e as u64);
            sx += Integer::from(&w * c);
            sy += Integer::from(&w * e);
            sxx += Integer::from(&w * (c * c));
            syy += Integer::from(&w * (e * e));
            sxy += Integer::from(&w * (c * e));
        }
    }
    let n2 = Integer::from(&total * &total);
    let cov_num = Integer::from(&total * &sxy) - Integer::from(&sx * &sy);
    let vx = Integer::from(&total * &sxx) - Integer::from(&sx * &sx);
    let vy = Integer::from(&total * &syy) - Integer::from(&sy * &sy);
    let covariance = Rational::from((cov_num.clone(), n2));
    let correlation = if vx == 0 || vy == 0 {
        None
    } else {
        let denom = Float::with_val(192, Integer::from(&vx * &vy)).sqrt();
        Some((Float::with_val(192, &cov_num) / denom).to_f64())
    };
    CovCor {
        n: table.n,
        count: table.total(),
        covariance,
        correlation,
    }
}

/// Checks `g_{k,j}(n+1) ≤ (2n+1)·g_{k,j}(n)` for every level pair.
pub fn monotonicity_check(n: usize) -> Result<bool> {
    check_capacity(n, MAX_ENUM_N - 1)?;
    let lo = gkj_table(n)?;
    let hi = gkj_table(n + 1)?;
    Ok(monotone_between(&lo, &hi))
}

pub(crate) fn monotone_between(lo: &StatTable, hi: &StatTable) -> bool {
    let factor = 2 * lo.n as u64 + 1;
    (0..=hi.n).all(|k| (0..=hi.n).all(|j| hi.get(k, j) <= factor * lo.get(k, j)))
}

/// Outcome of the de-Poissonization sandwich at one `(n, k, j)`.
#[derive(Debug, Clone, Serialize)]
pub struct DepoissonCheck {
    pub n: usize,
    pub k: usize,
    pub j: usize,
    pub a_n: f64,
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// De-Poissonization sandwich `φ(√μ_n) − n^{−s} ≤ a_n ≤ φ(√ν_n) + n^{−s}`
/// for `a_n = P{cro_n ≤ k, nes_n ≤ j}` with
/// `μ_n = n + 2√(s n log n)`, `ν_n = n − 2√(s n log n)` and
/// `φ(√λ) = Σ_m e^{−λ} λ^m/m! · a_m`.
///
/// Only `a_0 … a_M` are known exactly (`M` = last table). The Poisson
/// average is bracketed using `0 ≤ a_m ≤ a_M` for `m > M` (the sequence is
/// nonincreasing), and the lower (upper) bound uses the upper (lower)
/// bracket, so a pass here implies the sandwich for the true `φ`.
/// `ν_n ≤ 0` is read as `φ(0) = a_0 = 1`.
pub fn depoissonization_check(tables: &[StatTable], n: usize, k: usize, j: usize, s: f64) -> DepoissonCheck {
    let a: Vec<f64> = std::iter::once(1.0)
        .chain(tables.iter().map(|t| t.probability(k, j)))
        .collect();
    let last = a.len() - 1;
    let nf = n as f64;
    let spread = 2.0 * (s * nf * nf.ln()).sqrt();
    let mu = nf + spread;
    let nu = (nf - spread).max(0.0);
    let poisson_average = |lambda: f64, tail_value: f64| -> f64 {
        if lambda == 0.0 {
            return a[0];
        }
        let mut p = (-lambda).exp();
        let mut cdf = 0.0;
        let mut acc = 0.0;
        for (m, &am) in a.iter().enumerate() {
            if m > 0 {
                p *= lambda / m as f64;
            }
            acc += p * am;
            cdf += p;
        }
        acc + (1.0 - cdf).max(0.0) * tail_value
    };
    let slack = nf.powf(-s);
    let lower = poisson_average(mu, a[last]) - slack;
    let upper = poisson_average(nu, 0.0) + slack;
    let a_n = a[n];
    DepoissonCheck {
        n,
        k,
        j,
        a_n,
        lower,
        upper,
        holds: lower <= a_n && a_n <= upper,
    }
}

/// Summary row keyed by `2n`: count, covariance, correlation.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub two_n: usize,
    pub count: u64,
    pub covariance: String,
    pub correlation: Option<f64>,
}

impl From<&CovCor> for SummaryRow {
    fn from(c: &CovCor) -> Self {
        SummaryRow {
            two_n: 2 * c.n,
            count: c.count,
            covariance: c.covariance.to_string(),
            correlation: c.correlation,
        }
    }
}

#[cfg(test)]
fn total_matchings(n: usize) -> u64 {
    super::enumerate::double_factorial_odd(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn catalan(n: u64) -> u64 {
        let mut c = 1u64;
        for i in 0..n {
            c = c * 2 * (2 * i + 1) / (i + 2);
        }
        c
    }

    #[test]
    fn n2_by_hand() {
        // Matchings of [4]: {12,34} (1,1), {14,23} (1,2), {13,24} (2,1).
        let t = gkj_table(2).unwrap();
        assert_eq!(t.g[1][1], 1);
        assert_eq!(t.g[2][1], 2);
        assert_eq!(t.g[1][2], 2);
        assert_eq!(t.g[2][2], 3);
        assert_eq!(t.g[0][0], 0);
    }

    #[test]
    fn table_invariants_small() {
        for n in 1..=7 {
            let t = gkj_table(n).unwrap();
            assert_eq!(t.total(), total_matchings(n));
            assert_eq!(t.g[1][n], catalan(n as u64));
            for k in 0..=n {
                for j in 0..=n {
                    assert_eq!(t.g[k][j], t.g[j][k]);
                    if k > 0 {
                        assert!(t.g[k - 1][j] <= t.g[k][j]);
                    }
                    if j > 0 {
                        assert!(t.g[k][j - 1] <= t.g[k][j]);
                    }
                }
            }
        }
    }

    #[test]
    fn cov_cor_small() {
        let c = cov_cor(2).unwrap();
        assert_eq!(c.covariance, Rational::from((-1, 9)));
        assert!((c.correlation.unwrap() + 0.5).abs() < 1e-15);
        let c = cov_cor(1).unwrap();
        assert_eq!(c.covariance, 0);
        assert_eq!(c.correlation, None);
    }

    #[test]
    fn monotonicity() {
        assert!(monotonicity_check(1).unwrap());
        assert!(monotonicity_check(2).unwrap());
        assert!(monotonicity_check(5).unwrap());
        assert!(monotonicity_check(9).is_err());
    }

    #[test]
    fn histogram_round_trip() {
        let t = gkj_table(5).unwrap();
        let back = StatTable::from_histogram(5, &t.histogram());
        assert_eq!(back, t);
    }
}
