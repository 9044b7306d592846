//! The Hastings–McLeod solution of `q″ = s q + 2q³` as a two-point
//! boundary value problem.

use serde::Serialize;

use crate::error::{Error, Result};

use super::airy::{airy, airy_prime_sq_tail, airy_tail, airy_sq_tail};

/// Grid and tolerance for [`solve_hm`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HmOptions {
    pub s_min: f64,
    pub s_max: f64,
    pub npoints: usize,
    /// Target for the step-doubling error estimate of `q`.
    pub tol: f64,
}

impl Default for HmOptions {
    fn default() -> Self {
        HmOptions {
            s_min: -12.0,
            s_max: 10.0,
            npoints: 8001,
            tol: 1e-9,
        }
    }
}

/// Largest grid the step-doubling loop will try.
const MAX_POINTS: usize = 128_001;

/// Hastings–McLeod data on a uniform grid. Alongside `q` the solution
/// carries `q′`, `u = ∫_∞^s q²`, `v = ∫_∞^s q′²` and the logarithms of the
/// GOE and GUE Tracy–Widom distributions, each with enough derivative
/// information for quintic Hermite interpolation.
#[derive(Debug, Clone, Serialize)]
pub struct HMSolution {
    pub s_min: f64,
    pub s_max: f64,
    pub h: f64,
    #[serde(skip)]
    pub s: Vec<f64>,
    #[serde(skip)]
    pub q: Vec<f64>,
    #[serde(skip)]
    pub qp: Vec<f64>,
    #[serde(skip)]
    pub u: Vec<f64>,
    #[serde(skip)]
    pub v: Vec<f64>,
    /// `log F(s) = ½ ∫_s^∞ (u − q)`.
    #[serde(skip)]
    pub log_f: Vec<f64>,
    /// `log F_GUE(s) = ∫_s^∞ u`.
    #[serde(skip)]
    pub log_f_gue: Vec<f64>,
    /// Step-doubling estimate of the error in `q`.
    pub discretisation_error: f64,
    /// Largest `|q⁴ − u − q′² + s q²|` on the grid.
    pub quartic_residual: f64,
    pub newton_iterations: usize,
}

/// Interpolated values at one abscissa.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HmPoint {
    pub s: f64,
    pub q: f64,
    pub qp: f64,
    pub u: f64,
    pub v: f64,
    pub log_f: f64,
    pub log_f_gue: f64,
}

impl HmPoint {
    /// `q″ = s q + 2 q³`.
    pub fn qpp(&self) -> f64 {
        self.s * self.q + 2.0 * self.q.powi(3)
    }
}

/// Left boundary value: `√(−s/2)(1 + 1/(8s³) − 73/(128s⁶) + 10657/(1024s⁹))`.
/// The neglected remainder is `O(|s|^{−12})`, about `10^{−13}` at `s = −12`,
/// while the bare leading term would be off by `10^{−4}`.
pub fn hm_left_asymptotic(s: f64) -> (f64, f64) {
    let lead = (-s / 2.0).sqrt();
    let w = 1.0 / s.powi(3);
    let series = 1.0 + w / 8.0 - 73.0 / 128.0 * w * w + 10657.0 / 1024.0 * w * w * w;
    // d/ds of both factors.
    let dlead = -0.25 / lead;
    let dw = -3.0 / s.powi(4);
    let dseries = dw * (1.0 / 8.0 - 2.0 * 73.0 / 128.0 * w + 3.0 * 10657.0 / 1024.0 * w * w);
    (lead * series, dlead * series + lead * dseries)
}

fn validate(o: &HmOptions) -> Result<()> {
    if !(o.s_min < -5.0 && o.s_max > 5.0 && o.s_max <= 16.0 && o.s_min >= -40.0) {
        return Err(Error::Validation(format!(
            "grid [{}, {}] must satisfy −40 ≤ s_min < −5 and 5 < s_max ≤ 16",
            o.s_min, o.s_max
        )));
    }
    if o.npoints < 2000 {
        return Err(Error::Validation("npoints must be at least 2000".into()));
    }
    if !(o.tol > 0.0) {
        return Err(Error::Validation("tol must be positive".into()));
    }
    Ok(())
}

/// Solves the Numerov discretisation
/// `q_{i−1} − 2q_i + q_{i+1} = h²/12 (f_{i−1} + 10 f_i + f_{i+1})`,
/// `f = s q + 2q³`, with Dirichlet data by Newton's method; each step is a
/// tridiagonal solve.
fn numerov_newton(s: &[f64], left: f64, right: f64, guess: Option<&[f64]>) -> Result<(Vec<f64>, usize)> {
    let n = s.len();
    let h = s[1] - s[0];
    let c = h * h / 12.0;
    let mut q: Vec<f64> = match guess {
        Some(g) => g.to_vec(),
        None => s
            .iter()
            .map(|&x| {
                // Blend of the two asymptotic regimes, positive throughout.
                let softplus = if -x > 30.0 { -x } else { (1.0 + (-x).exp()).ln() };
                (0.5 * softplus).sqrt() * (0.61 + 0.39 * (-(x.max(0.0)).powf(1.5) / 1.5).exp()) * 0.9
            })
            .collect(),
    };
    q[0] = left;
    q[n - 1] = right;
    let f = |x: f64, v: f64| x * v + 2.0 * v * v * v;
    let df = |x: f64, v: f64| x + 6.0 * v * v;
    let mut sub = vec![0.0; n];
    let mut diag = vec![0.0; n];
    let mut sup = vec![0.0; n];
    let mut rhs = vec![0.0; n];
    for iter in 1..=60 {
        for i in 1..n - 1 {
            let (fm, f0, fp) = (f(s[i - 1], q[i - 1]), f(s[i], q[i]), f(s[i + 1], q[i + 1]));
            rhs[i] = -(q[i - 1] - 2.0 * q[i] + q[i + 1] - c * (fm + 10.0 * f0 + fp));
            sub[i] = if i > 1 { 1.0 - c * df(s[i - 1], q[i - 1]) } else { 0.0 };
            diag[i] = -2.0 - 10.0 * c * df(s[i], q[i]);
            sup[i] = if i < n - 2 { 1.0 - c * df(s[i + 1], q[i + 1]) } else { 0.0 };
        }
        // Thomas algorithm on rows 1..n-2.
        for i in 2..n - 1 {
            let m = sub[i] / diag[i - 1];
            diag[i] -= m * sup[i - 1];
            rhs[i] -= m * rhs[i - 1];
        }
        let mut delta = vec![0.0; n];
        delta[n - 2] = rhs[n - 2] / diag[n - 2];
        for i in (1..n - 2).rev() {
            delta[i] = (rhs[i] - sup[i] * delta[i + 1]) / diag[i];
        }
        let step = delta.iter().fold(0.0f64, |a, d| a.max(d.abs()));
        if !step.is_finite() {
            break;
        }
        for i in 1..n - 1 {
            q[i] += delta[i];
        }
        if step < 1e-15 {
            return Ok((q, iter));
        }
    }
    Err(Error::Convergence(format!(
        "Newton iteration for the Hastings–McLeod problem did not converge on {n} points; try a denser grid"
    )))
}

/// Finite-difference weights for the first derivative at 0 from values at
/// `offsets` (Fornberg's recursion).
fn fd_weights(offsets: &[f64]) -> Vec<f64> {
    let n = offsets.len();
    let mut c = vec![vec![0.0; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = offsets[0];
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = offsets[i];
        for j in 0..i {
            let c3 = offsets[i] - offsets[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|r| r[1]).collect()
}

/// Eighth-order differences, one-sided near the ends.
fn derivative(q: &[f64], h: f64) -> Vec<f64> {
    let n = q.len();
    let width = 9usize;
    let half = width / 2;
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - width);
            let offsets: Vec<f64> = (start..start + width).map(|k| k as f64 - i as f64).collect();
            let w = fd_weights(&offsets);
            w.iter().zip(&q[start..start + width]).map(|(w, v)| w * v).sum::<f64>() / h
        })
        .collect()
}

/// `∫_{x0}^{x1}` of the quintic Hermite interpolant of `(f, f′, f″)`.
fn hermite_integral(h: f64, a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    h * ((a.0 + b.0) / 2.0 + h * (a.1 - b.1) / 10.0 + h * h * (a.2 + b.2) / 120.0)
}

/// Quintic Hermite interpolation on `[0, 1]` with step `h`.
fn hermite_eval(h: f64, tau: f64, a: (f64, f64, f64), b: (f64, f64, f64)) -> f64 {
    let t2 = tau * tau;
    let t3 = t2 * tau;
    let t4 = t3 * tau;
    let t5 = t4 * tau;
    let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h1 = tau - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
    let h3 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h5 = 0.5 * (t3 - 2.0 * t4 + t5);
    a.0 * h0 + h * a.1 * h1 + h * h * a.2 * h2 + b.0 * h3 + h * b.1 * h4 + h * h * b.2 * h5
}

fn grid(o: &HmOptions, npoints: usize) -> Vec<f64> {
    let h = (o.s_max - o.s_min) / (npoints - 1) as f64;
    (0..npoints).map(|i| o.s_min + i as f64 * h).collect()
}

/// Solves for the Hastings–McLeod function with `q(s_min)` from the
/// asymptotic series and `q(s_max) = Ai(s_max)`, doubling the grid until
/// the step-doubling error estimate is below `tol`, then derives `q′`, the
/// integrals `u`, `v` and the Tracy–Widom logarithms.
pub fn solve_hm(o: &HmOptions) -> Result<HMSolution> {
    validate(o)?;
    let left = hm_left_asymptotic(o.s_min).0;
    let right = airy(o.s_max).0;
    let mut n = o.npoints;
    let coarse_n = (n - 1) / 2 + 1;
    let (mut coarse, _) = numerov_newton(&grid(o, coarse_n), left, right, None)?;
    loop {
        let s = grid(o, n);
        // Interpolate the coarse solution as the initial guess.
        let guess: Vec<f64> = (0..n)
            .map(|i| {
                let x = i as f64 * (coarse.len() - 1) as f64 / (n - 1) as f64;
                let k = (x.floor() as usize).min(coarse.len() - 2);
                let f = x - k as f64;
                coarse[k] * (1.0 - f) + coarse[k + 1] * f
            })
            .collect();
        let (q, iters) = numerov_newton(&s, left, right, Some(&guess))?;
        let ratio = (n - 1) / (coarse.len() - 1);
        let diff = coarse
            .iter()
            .enumerate()
            .map(|(k, c)| (q[k * ratio] - c).abs())
            .fold(0.0, f64::max);
        // Fourth-order scheme: the fine error is about diff/15.
        let est = diff / 15.0;
        if est <= o.tol {
            return finish(o, s, q, est, iters);
        }
        if 2 * n - 1 > MAX_POINTS {
            return Err(Error::Precision {
                what: format!("Hastings–McLeod discretisation error {est:.2e} above tol {:.2e}", o.tol),
                bits: 53,
                suggested_bits: 106,
            });
        }
        coarse = q;
        n = 2 * n - 1;
    }
}

fn finish(o: &HmOptions, s: Vec<f64>, q: Vec<f64>, est: f64, iters: usize) -> Result<HMSolution> {
    let n = s.len();
    let h = s[1] - s[0];
    let mut qp = derivative(&q, h);
    qp[n - 1] = airy(o.s_max).1;
    qp[0] = hm_left_asymptotic(o.s_min).1;
    let qpp: Vec<f64> = (0..n).map(|i| s[i] * q[i] + 2.0 * q[i].powi(3)).collect();
    let qppp: Vec<f64> = (0..n)
        .map(|i| q[i] + s[i] * qp[i] + 6.0 * q[i] * q[i] * qp[i])
        .collect();

    // Integrate downward from s_max with the tails beyond it added
    // analytically.
    let mut u = vec![0.0; n];
    let mut v = vec![0.0; n];
    u[n - 1] = -airy_sq_tail(o.s_max);
    v[n - 1] = -airy_prime_sq_tail(o.s_max);
    for i in (0..n - 1).rev() {
        let fu = |k: usize| (q[k] * q[k], 2.0 * q[k] * qp[k], 2.0 * qp[k] * qp[k] + 2.0 * q[k] * qpp[k]);
        let fv = |k: usize| (qp[k] * qp[k], 2.0 * qp[k] * qpp[k], 2.0 * qpp[k] * qpp[k] + 2.0 * qp[k] * qppp[k]);
        u[i] = u[i + 1] - hermite_integral(h, fu(i), fu(i + 1));
        v[i] = v[i + 1] - hermite_integral(h, fv(i), fv(i + 1));
    }
    // ∫_{s_max}^∞ u is below 10^{−20} for s_max ≥ 8 and is dropped.
    let mut log_f = vec![0.0; n];
    let mut log_f_gue = vec![0.0; n];
    log_f[n - 1] = -0.5 * airy_tail(o.s_max);
    for i in (0..n - 1).rev() {
        let fg = |k: usize| {
            (
                0.5 * (u[k] - q[k]),
                0.5 * (q[k] * q[k] - qp[k]),
                0.5 * (2.0 * q[k] * qp[k] - qpp[k]),
            )
        };
        let fu = |k: usize| (u[k], q[k] * q[k], 2.0 * q[k] * qp[k]);
        log_f[i] = log_f[i + 1] + hermite_integral(h, fg(i), fg(i + 1));
        log_f_gue[i] = log_f_gue[i + 1] + hermite_integral(h, fu(i), fu(i + 1));
    }
    let quartic_residual = (0..n)
        .map(|i| (q[i].powi(4) - u[i] - qp[i] * qp[i] + s[i] * q[i] * q[i]).abs())
        .fold(0.0, f64::max);
    let sol = HMSolution {
        s_min: o.s_min,
        s_max: o.s_max,
        h,
        s,
        q,
        qp,
        u,
        v,
        log_f,
        log_f_gue,
        discretisation_error: est,
        quartic_residual,
        newton_iterations: iters,
    };
    sol.check_invariants()?;
    Ok(sol)
}

impl HMSolution {
    fn check_invariants(&self) -> Result<()> {
        let fail = |what: String| {
            Err(Error::Precision {
                what,
                bits: 53,
                suggested_bits: 106,
            })
        };
        if let Some(i) = self.q.iter().position(|&v| v <= 0.0) {
            return fail(format!("q not positive at s = {}", self.s[i]));
        }
        if self.u.windows(2).any(|w| w[1] < w[0]) || self.u.iter().any(|&v| v > 0.0) {
            return fail("u not nonpositive and nondecreasing".into());
        }
        if self.quartic_residual > 1e-8 {
            return fail(format!("quartic identity residual {:.2e}", self.quartic_residual));
        }
        Ok(())
    }

    /// Interpolates every tracked quantity at `s`.
    pub fn at(&self, s: f64) -> Result<HmPoint> {
        if !(s >= self.s_min && s <= self.s_max) {
            return Err(Error::Range(format!(
                "s = {s} outside the solution grid [{}, {}]",
                self.s_min, self.s_max
            )));
        }
        let n = self.s.len();
        let x = (s - self.s_min) / self.h;
        let i = (x.floor() as usize).min(n - 2);
        let tau = x - i as f64;
        let j = i + 1;
        let qpp = |k: usize| self.s[k] * self.q[k] + 2.0 * self.q[k].powi(3);
        let qppp = |k: usize| self.q[k] + self.s[k] * self.qp[k] + 6.0 * self.q[k].powi(2) * self.qp[k];
        let e = |a, b| hermite_eval(self.h, tau, a, b);
        let q = e((self.q[i], self.qp[i], qpp(i)), (self.q[j], self.qp[j], qpp(j)));
        let qp = e((self.qp[i], qpp(i), qppp(i)), (self.qp[j], qpp(j), qppp(j)));
        let uq = |k: usize| (self.u[k], self.q[k].powi(2), 2.0 * self.q[k] * self.qp[k]);
        let u = e(uq(i), uq(j));
        let vq = |k: usize| (self.v[k], self.qp[k].powi(2), 2.0 * self.qp[k] * qpp(k));
        let v = e(vq(i), vq(j));
        let lf = |k: usize| {
            (
                self.log_f[k],
                0.5 * (self.q[k] - self.u[k]),
                0.5 * (self.qp[k] - self.q[k].powi(2)),
            )
        };
        let log_f = e(lf(i), lf(j));
        let lg = |k: usize| (self.log_f_gue[k], -self.u[k], -self.q[k].powi(2));
        let log_f_gue = e(lg(i), lg(j));
        Ok(HmPoint {
            s,
            q,
            qp,
            u,
            v,
            log_f,
            log_f_gue,
        })
    }

    /// `α(s) = q²u/2 − u³/6 + log F(s)² − ∫_∞^s q′²` where `F(s)² = F_GUE(s)`.
    /// This is the reading under which `α′ = qβ`, the diagonal part of the
    /// Lax recursion that also links `u` and `(u² − q²)/2`.
    pub fn alpha(&self, s: f64) -> Result<f64> {
        let p = self.at(s)?;
        Ok(p.q * p.q * p.u / 2.0 - p.u.powi(3) / 6.0 + p.log_f_gue - p.v)
    }

    /// `β(s) = q′u − q(s + q²/2 + u²/2)`.
    pub fn beta(&self, s: f64) -> Result<f64> {
        let p = self.at(s)?;
        Ok(p.qp * p.u - p.q * (s + p.q * p.q / 2.0 + p.u * p.u / 2.0))
    }

    /// Largest Numerov residual relative to the local scale, a check that
    /// the stored `q` solves the discrete problem.
    pub fn ode_residual(&self) -> f64 {
        let c = self.h * self.h / 12.0;
        let f = |k: usize| self.s[k] * self.q[k] + 2.0 * self.q[k].powi(3);
        (1..self.s.len() - 1)
            .map(|i| {
                (self.q[i - 1] - 2.0 * self.q[i] + self.q[i + 1] - c * (f(i - 1) + 10.0 * f(i) + f(i + 1))).abs()
                    / (self.h * self.h)
            })
            .fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fd_weights_central() {
        let w = fd_weights(&[-1.0, 0.0, 1.0]);
        assert!((w[0] + 0.5).abs() < 1e-14 && w[1].abs() < 1e-14 && (w[2] - 0.5).abs() < 1e-14);
        // Exact on polynomials up to degree 8.
        let off: Vec<f64> = (0..9).map(|k| k as f64 - 2.0).collect();
        let w = fd_weights(&off);
        let d: f64 = w.iter().zip(&off).map(|(w, x)| w * x.powi(8)).sum();
        assert!(d.abs() < 1e-9);
        let d: f64 = w.iter().zip(&off).map(|(w, x)| w * x).sum();
        assert!((d - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hermite_rules_exact_for_quintics() {
        let p = |x: f64| (x.powi(5) - 2.0 * x.powi(3) + x, 5.0 * x.powi(4) - 6.0 * x * x + 1.0, 20.0 * x.powi(3) - 12.0 * x);
        let (a, b, h) = (0.3, 0.8, 0.5);
        let exact = |x: f64| x.powi(6) / 6.0 - x.powi(4) / 2.0 + x * x / 2.0;
        assert!((hermite_integral(h, p(a), p(b)) - (exact(b) - exact(a))).abs() < 1e-14);
        assert!((hermite_eval(h, 0.37, p(a), p(b)) - p(a + 0.37 * h).0).abs() < 1e-14);
    }

    #[test]
    fn left_asymptotic_consistent() {
        let (q, d) = hm_left_asymptotic(-12.0);
        assert!((q - 6f64.sqrt()).abs() < 2e-4);
        let e = 1e-6;
        let fd = (hm_left_asymptotic(-12.0 + e).0 - hm_left_asymptotic(-12.0 - e).0) / (2.0 * e);
        assert!((fd - d).abs() < 1e-8);
    }

    #[test]
    fn rejects_bad_grids() {
        let mut o = HmOptions::default();
        o.npoints = 100;
        assert!(solve_hm(&o).is_err());
        let mut o = HmOptions::default();
        o.s_min = -3.0;
        assert!(solve_hm(&o).is_err());
    }

    #[test]
    fn hastings_mcleod_values() {
        let sol = solve_hm(&HmOptions::default()).unwrap();
        let p = sol.at(0.0).unwrap();
        assert!((p.q - 0.367_061_551_548_078_4).abs() < 1e-9, "{}", p.q);
        assert!((p.qp + 0.295_372_105_447_550_1).abs() < 1e-8, "{}", p.qp);
        let p6 = sol.at(6.0).unwrap();
        assert!((p6.q - 9.947_694_360_252_89e-6).abs() < 1e-8);
        // Interpolation between nodes against the quartic identity.
        for &x in &[-9.87654, -3.3333, 0.123, 4.5678] {
            let p = sol.at(x).unwrap();
            let r = p.q.powi(4) - p.u - p.qp * p.qp + x * p.q * p.q;
            assert!(r.abs() < 1e-8, "{x} {r}");
        }
        assert!(sol.at(20.0).is_err());
    }
}
