//! Acceptance run: one line per criterion, then a nonzero exit if anything
//! failed that is not on the documented list of known failures.
//!
//! Runs without the libtest harness so that the verdict lines reach the
//! terminal even when cargo captures test output.

use std::process::ExitCode;
use std::time::Instant;

use matchstat::asympt::{
    covariance_poissonized, exponential_regime_check, fit_decay, prop62_check, prop63_check, thm11_expansion,
    thm13_residuals, thm15_residuals, ScalingPoint,
};
use matchstat::combinat::{cov_cor, gkj_table, mc_scaled_covariance};
use matchstat::detkernel::{det_lu, toeplitz_hankel_det, DetOptions};
use matchstat::moments::{sine_kernel_matrix, MomentKind};
use matchstat::opflow::{
    joint_cdf, joint_cdf_poisson, log_joint_cdf, log_lt_cdf, log_nes_marginal_cdf, lt_prop1_quadrature,
    nes_prop1_quadrature, ode_identity_checks, prop1_quadrature,
};
use matchstat::painleve::{airy, default_solution, TwDistribution, TwKind};
use matchstat::walks::{conditional_kj, conditional_kj_exact, karlin_mcgregor_prob, simulate_event_prob};
use rug::{Float, Rational};

/// Criteria that fail as stated, with the reason. Each is discussed in the
/// README; the verdict line still prints FAIL.
const KNOWN_FAILURES: &[(u32, &str)] = &[
    (1, "two printed correlations differ from exact enumeration in one digit"),
    (7, "correction evaluated at x while the lattice abscissa is x_t; O(1/t) lattice term oscillates"),
    (8, "same lattice effect for L_t at x = -1"),
    (9, "F'(x)^2 at x instead of x_t overshoots the measured difference by about 50% at t = 64"),
    (12, "at N = 2 the exact finite-N law sits 2.4 sigma from its N -> infinity limit, so the 3 sigma test against the limit fails"),
];

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

type Outcome = Result<Verdict, matchstat::Error>;

fn opts() -> DetOptions {
    DetOptions::default()
}

fn big_diff(a: &Float, b: &Float) -> f64 {
    Float::with_val(a.prec().max(b.prec()), a - b).abs().to_f64()
}

/// Catalan numbers by the ballot recurrence `C_{n+1} = Σ C_i C_{n−i}`.
fn catalan(n: usize) -> u64 {
    let mut c = vec![1u64];
    for k in 0..n {
        c.push((0..=k).map(|i| c[i] * c[k - i]).sum());
    }
    c[n]
}

/// `|value − printed| ≤ ½·10⁻⁹` (rounded) or `printed` is the truncation.
fn matches_printed(value: f64, printed: f64) -> bool {
    let d = value - printed;
    d.abs() <= 0.5e-9 + 1e-15 || (d.signum() == printed.signum() && d.abs() < 1e-9)
}

fn c1_table() -> Outcome {
    let printed = [
        (3, -0.137777777, -0.418918919),
        (4, -0.129614512, -0.362983698),
        (5, -0.132998516, -0.331342276),
        (6, -0.143259767, -0.309871555),
        (7, -0.151180948, -0.293696032),
    ];
    let start = Instant::now();
    let c2 = cov_cor(2)?;
    let mut ok = c2.covariance == Rational::from((-1, 9)) && c2.correlation == Some(-0.5);
    let mut off = Vec::new();
    for (n, cov, cor) in printed {
        let c = cov_cor(n)?;
        let r = c.correlation.unwrap_or(f64::NAN);
        if !matches_printed(c.covariance_f64(), cov) {
            off.push(format!("cov n={n} printed {cov} exact {:.9}", c.covariance_f64()));
        }
        if !matches_printed(r, cor) {
            off.push(format!("cor n={n} printed {cor} exact {r:.9}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= off.is_empty() && secs < 60.0;
    let gaps = if off.is_empty() { "all printed digits match".to_string() } else { off.join(", ") };
    Ok(verdict(ok, format!("n=2 exact -1/9 and -1/2; {gaps}; {secs:.1}s")))
}

fn c2_counts() -> Outcome {
    let start = Instant::now();
    let mut ok = true;
    for n in 1..=8 {
        let t = gkj_table(n)?;
        let dfact: u64 = (1..=n as u64).map(|i| 2 * i - 1).product();
        ok &= t.g[1][n] == catalan(n) && t.g[n][n] == dfact;
        ok &= (0..=n).all(|k| (0..=n).all(|j| t.g[k][j] == t.g[j][k]));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    Ok(verdict(ok, format!("n = 1..8 Catalan row, symmetry and (2n-1)!!; {secs:.1}s")))
}

fn c3_formulas() -> Outcome {
    let mut worst_det = 0.0f64;
    let mut worst_poisson = 0.0f64;
    let tables = (1..=8).map(gkj_table).collect::<Result<Vec<_>, _>>()?;
    for j in [2usize, 3, 4] {
        for k in [2usize, 3, 4] {
            let m = (j + k + 1) as u32;
            for t in [0.5, 1.0, 2.0] {
                let th = toeplitz_hankel_det(MomentKind::Discrete { m }, t, j, &opts())?;
                let sine = det_lu(sine_kernel_matrix(m, t, j, 512)?);
                worst_det = worst_det.max(big_diff(&th.value, &sine));
            }
            let det = joint_cdf(0.5, k, j, &opts())?;
            let poisson = joint_cdf_poisson(0.5, k, j, &tables, 256)?;
            worst_poisson = worst_poisson.max(big_diff(&det.value, &poisson.value));
        }
    }
    Ok(verdict(
        worst_det < 1e-25 && worst_poisson < 1e-8,
        format!("sine vs Toeplitz-Hankel {worst_det:.1e}; Poisson sum vs determinant at t=0.5 {worst_poisson:.1e}"),
    ))
}

fn c4_flow() -> Outcome {
    let mut worst = 0.0f64;
    for (t, k, j) in [(1.0, 3usize, 2usize), (2.0, 4, 3), (3.0, 5, 5)] {
        let q = prop1_quadrature(t, k, j, &opts())?;
        worst = worst.max(big_diff(&q.value, &log_joint_cdf(t, k, j, &opts())?));
        let q = nes_prop1_quadrature(t, j, &opts())?;
        worst = worst.max(big_diff(&q.value, &log_nes_marginal_cdf(t, j, &opts())?));
        let q = lt_prop1_quadrature(t, k, &opts())?;
        worst = worst.max(big_diff(&q.value, &log_lt_cdf(t, k, &opts())?));
    }
    Ok(verdict(worst < 1e-8, format!("joint, Nes_t and L_t flows vs log determinants, worst {worst:.1e}")))
}

fn c5_identities() -> Outcome {
    let mut ok = true;
    let mut notes = Vec::new();
    for (kind, label) in [(MomentKind::Continuous, "continuous"), (MomentKind::Discrete { m: 8 }, "discrete m=8")] {
        for t in [0.7, 1.5] {
            let r = ode_identity_checks(t, 6, kind, 1e-3, &opts())?;
            ok &= r.pass;
            let ratios: Vec<String> = r.differential.iter().map(|p| format!("{:.2}", p.ratio)).collect();
            notes.push(format!("{label} t={t} halving ratios [{}]", ratios.join(",")));
        }
    }
    Ok(verdict(ok, notes.join("; ")))
}

fn c6_painleve() -> Outcome {
    let start = Instant::now();
    let sol = default_solution()?;
    let goe = TwDistribution::new(TwKind::Goe, sol);
    let gue = TwDistribution::new(TwKind::Gue, sol);
    let (_, var) = goe.mean_variance()?;
    let q6 = (sol.at(6.0)?.q - airy(6.0).0).abs();
    let mut fd = 0.0f64;
    for d in [&goe, &gue] {
        for x in [-3.0, -1.0, 0.0, 1.5] {
            let v = d.eval(x)?;
            let h = 1e-3;
            let (fm, f0, fp) = (d.cdf(x - h)?, d.cdf(x)?, d.cdf(x + h)?);
            let d1 = (fp - fm) / (2.0 * h);
            let d2 = (fp - 2.0 * f0 + fm) / (h * h);
            fd = fd.max((d1 - v.pdf).abs()).max((d2 - v.pdf_prime).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = (var - 1.6077810345).abs() < 1e-6 && sol.quartic_residual < 1e-8 && q6 < 1e-8 && fd < 1e-6 && secs < 120.0;
    Ok(verdict(
        ok,
        format!(
            "GOE variance {var:.10}; quartic residual {:.1e}; |q(6)-Ai(6)| {q6:.1e}; derivative gap {fd:.1e}; {secs:.1}s",
            sol.quartic_residual
        ),
    ))
}

const TGRID: [f64; 4] = [20.0, 40.0, 80.0, 160.0];
const XS: [f64; 3] = [-1.0, 0.0, 1.0];

fn slopes(series: &[Vec<(f64, f64)>]) -> Result<Vec<f64>, matchstat::Error> {
    series.iter().map(|s| fit_decay(s).map(|f| f.0)).collect()
}

fn fmt_slopes(s: &[f64]) -> String {
    s.iter().map(|v| format!("{v:.2}")).collect::<Vec<_>>().join(", ")
}

fn c7_nes() -> Outcome {
    let goe = TwDistribution::new(TwKind::Goe, default_solution()?);
    let mut lit = vec![Vec::new(); XS.len()];
    let mut lattice = vec![Vec::new(); XS.len()];
    for t in TGRID {
        for (i, p) in thm13_residuals(t, &XS, &opts())?.into_iter().enumerate() {
            lit[i].push((t, p.residual));
            // Same expansion with every term at the lattice abscissa.
            let xt = ScalingPoint::new(t, p.x)?.x_t;
            let v = goe.eval(xt)?;
            let alt = v.cdf - (4.0 * v.pdf_prime + xt * xt * v.pdf / 3.0) / (20.0 * t.powf(2.0 / 3.0));
            lattice[i].push((t, p.exact - alt));
        }
    }
    let s = slopes(&lit)?;
    let ok = s.iter().all(|v| (-1.4..=-0.7).contains(v));
    Ok(verdict(
        ok,
        format!("slopes at x = -1, 0, 1: [{}]; with x_t throughout: [{}]", fmt_slopes(&s), fmt_slopes(&slopes(&lattice)?)),
    ))
}

fn c8_lt() -> Outcome {
    let start = Instant::now();
    let mut lit = vec![Vec::new(); XS.len()];
    for t in TGRID {
        for (i, p) in thm15_residuals(t, &XS, &opts())?.into_iter().enumerate() {
            lit[i].push((t, p.residual));
        }
    }
    let s = slopes(&lit)?;
    let ok = s.iter().all(|v| (-1.4..=-0.7).contains(v));
    Ok(verdict(ok, format!("slopes at x = -1, 0, 1: [{}]; {:.0}s", fmt_slopes(&s), start.elapsed().as_secs_f64())))
}

fn c9_joint() -> Outcome {
    let goe = TwDistribution::new(TwKind::Goe, default_solution()?);
    let pts = [16.0, 32.0, 64.0].map(|t| thm11_expansion(t, 0.0, 0.0, &opts()));
    let pts = pts.into_iter().collect::<Result<Vec<_>, _>>()?;
    let (slope, _) = fit_decay(&pts.iter().map(|p| (p.t, p.residual)).collect::<Vec<_>>())?;
    let last = &pts[2];
    let ratio = last.correction / last.measured();
    let xt = ScalingPoint::new(64.0, 0.0)?.x_t;
    let lattice_ratio = goe.pdf(xt)?.powi(2) / 64f64.powf(2.0 / 3.0) / last.measured();
    let ok = slope <= -0.7 && (ratio - 1.0).abs() <= 0.3;
    Ok(verdict(
        ok,
        format!("residual slope {slope:.2}; correction/measured at t=64 {ratio:.3} (at x_t: {lattice_ratio:.3})"),
    ))
}

fn c10_verblunsky() -> Outcome {
    let mut p62 = Vec::new();
    let mut p63 = Vec::new();
    for t in [20.0, 40.0, 80.0] {
        let n = (2.0 * t) as usize;
        p62.push((t, prop62_check(t, n, n + 1, &opts())?.residual));
        p63.push((t, prop63_check(t, n, &opts())?.residual));
    }
    let (s62, _) = fit_decay(&p62)?;
    let (s63, _) = fit_decay(&p63)?;
    let e = exponential_regime_check(20.0, 0.5, &opts())?;
    let biggest = e.points.iter().map(|p| p.2).fold(0.0, f64::max);
    let window = -1.8..=-0.9;
    let ok = window.contains(&s62) && window.contains(&s63) && biggest < 1e-6;
    Ok(verdict(ok, format!("slopes {s62:.2} (discrete), {s63:.2} (continuous); max |pi| at n >= 3t {biggest:.1e}")))
}

fn c11_covariance() -> Outcome {
    let gaps = [10.0, 20.0, 40.0]
        .map(|t| covariance_poissonized(t, &opts()).map(|c| (c.covariance - 0.25).abs()))
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?;
    let ok = gaps.windows(2).all(|w| w[1] < w[0]);
    Ok(verdict(ok, format!("|Cov - 1/4| at t = 10, 20, 40: {:.5}, {:.5}, {:.5}", gaps[0], gaps[1], gaps[2])))
}

fn c12_walks() -> Outcome {
    let t = 0.4;
    let reps = 2_000_000;
    let mut ok = true;
    let mut notes = Vec::new();
    for (walkers, seed) in [(2usize, 11u64), (3, 12)] {
        let mc = simulate_event_prob(t, walkers, reps, seed)?;
        let exact = karlin_mcgregor_prob(t, walkers, &opts())?;
        let z = mc.z_score(exact);
        ok &= z <= 3.0;
        let law = conditional_kj(t, walkers, reps, seed + 100)?;
        let mut worst = 0.0f64;
        let mut worst_finite = 0.0f64;
        let mut bias = 0.0f64;
        for k in 1..=2 {
            for j in 1..=2 {
                let emp = law.cdf(k, j);
                let limit = joint_cdf(t, k, j, &opts())?.value_f64();
                let finite = conditional_kj_exact(t, walkers, k, j, &opts())?;
                worst = worst.max(emp.z_score(limit));
                worst_finite = worst_finite.max(emp.z_score(finite));
                bias = bias.max((finite - limit).abs() / emp.stderr);
            }
        }
        ok &= worst <= 3.0;
        notes.push(format!(
            "N={walkers}: event z {z:.2}, (K,J) worst z {worst:.2} vs G, {worst_finite:.2} vs finite-N law \
             (finite-N minus limit up to {bias:.1} sigma)"
        ));
    }
    Ok(verdict(ok, notes.join("; ")))
}

fn c13_sampler() -> Outcome {
    let e = mc_scaled_covariance(500, 2000, 2024)?;
    Ok(verdict(
        e.estimate < 0.0 && e.estimate.abs() < 0.2,
        format!("scaled covariance {:.4} +/- {:.4}", e.estimate, e.stderr),
    ))
}

fn main() -> ExitCode {
    // Honour `cargo test -- <filter>` loosely: skip when filtered to other tests.
    let args: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    if !args.is_empty() && !args.iter().any(|a| "acceptance".contains(a.as_str())) {
        return ExitCode::SUCCESS;
    }
    let criteria: [(u32, &str, fn() -> Outcome); 13] = [
        (1, "exact covariance table", c1_table),
        (2, "count invariants", c2_counts),
        (3, "determinant forms", c3_formulas),
        (4, "flow quadrature", c4_flow),
        (5, "orthogonal polynomial identities", c5_identities),
        (6, "Painleve II and Tracy-Widom", c6_painleve),
        (7, "Nes_t expansion decay", c7_nes),
        (8, "L_t expansion decay", c8_lt),
        (9, "joint law correction", c9_joint),
        (10, "Verblunsky regimes", c10_verblunsky),
        (11, "Poissonized covariance trend", c11_covariance),
        (12, "walks against exact laws", c12_walks),
        (13, "sampler sanity", c13_sampler),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let v = run().unwrap_or_else(|e| verdict(false, format!("error: {e}")));
        let known = KNOWN_FAILURES.iter().find(|(k, _)| *k == id).map(|(_, why)| *why);
        let tag = match (v.pass, known) {
            (true, _) => "PASS".to_string(),
            (false, Some(why)) => format!("FAIL (known: {why})"),
            (false, None) => {
                unexpected.push(id);
                "FAIL".to_string()
            }
        };
        println!(
            "criterion {id:>2} {name}: {tag} | {} [{:.1}s]",
            v.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("unexpected failures: {unexpected:?}");
        ExitCode::FAILURE
    }
}
