//! Property tests: statistics against brute force, table and moment
//! symmetries, route agreement and the Tracy–Widom identities.

use std::sync::OnceLock;

use matchstat::asympt::s_of_gamma;
use matchstat::combinat::{
    depoissonization_check, gkj_table, joint_histogram, mc_scaled_covariance_with, sample_matching, Matching,
    StatTable,
};
use matchstat::detkernel::{opuc, toeplitz_det, toeplitz_hankel_det, DetOptions};
use matchstat::moments::{h_continuous, h_discrete, MomentKind, MomentSequence};
use matchstat::opflow::{joint_cdf, log_joint_cdf, nes_marginal_cdf, prop1_quadrature};
use matchstat::painleve::{default_solution, TwDistribution, TwKind};
use matchstat::Exec;
use proptest::prelude::*;
use rug::Float;

fn tables() -> &'static [StatTable] {
    static T: OnceLock<Vec<StatTable>> = OnceLock::new();
    T.get_or_init(|| (1..=8).map(|n| gkj_table(n).unwrap()).collect())
}

fn rel(a: &Float, b: &Float) -> f64 {
    let d = Float::with_val(a.prec(), a - b).abs();
    (d / Float::with_val(a.prec(), b.abs_ref())).to_f64()
}

/// Largest subset of arcs that pairwise satisfy `rel`, by exhausting subsets.
fn max_clique(arcs: &[(u32, u32)], rel: impl Fn((u32, u32), (u32, u32)) -> bool) -> usize {
    let n = arcs.len();
    (0u32..1 << n)
        .filter(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
            idx.iter().all(|&a| idx.iter().all(|&b| a >= b || rel(arcs[a], arcs[b]) || rel(arcs[b], arcs[a])))
        })
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap_or(0)
}

fn crosses(a: (u32, u32), b: (u32, u32)) -> bool {
    a.0 < b.0 && b.0 < a.1 && a.1 < b.1
}

fn nests(a: (u32, u32), b: (u32, u32)) -> bool {
    a.0 < b.0 && b.1 < a.1
}

fn longest_decreasing(seq: &[u32]) -> usize {
    let mut best = vec![1usize; seq.len()];
    for i in 0..seq.len() {
        for j in 0..i {
            if seq[j] > seq[i] {
                best[i] = best[i].max(best[j] + 1);
            }
        }
    }
    best.into_iter().max().unwrap_or(0)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn statistics_match_brute_force(n in 1usize..=6, seed in any::<u64>()) {
        let m = sample_matching(n, seed).unwrap();
        prop_assert_eq!(m.cro(), max_clique(m.arcs(), crosses));
        prop_assert_eq!(m.nes(), max_clique(m.arcs(), nests));
        prop_assert_eq!(2 * m.nes(), longest_decreasing(&m.involution()));
    }

    #[test]
    fn reflection_preserves_statistics(n in 1usize..=8, seed in any::<u64>()) {
        // i ↦ 2n+1−i maps crossings to crossings and nestings to nestings.
        let m = sample_matching(n, seed).unwrap();
        let top = 2 * n as u32 + 1;
        let r = Matching::new(m.arcs().iter().map(|&(a, b)| (top - b, top - a))).unwrap();
        prop_assert_eq!((r.cro(), r.nes()), (m.cro(), m.nes()));
    }

    #[test]
    fn table_invariants(n in 1usize..=8, k in 0usize..10, j in 0usize..10) {
        let t = &tables()[n - 1];
        prop_assert_eq!(t.get(k, j), t.get(j, k));
        prop_assert!(t.get(k, j) <= t.get(k + 1, j));
        prop_assert!(t.get(k, j) <= t.get(k, j + 1));
        prop_assert_eq!(t.total(), (1..=n as u64).map(|i| 2 * i - 1).product::<u64>());
    }

    #[test]
    fn depoissonization_sandwich(n in 4usize..=8, k in 1usize..=4, j in 1usize..=4) {
        let c = depoissonization_check(tables(), n, k, j, 1.0);
        prop_assert!(c.holds, "{:?}", c);
    }

    #[test]
    fn moment_symmetries(m in 2u32..12, t in 0.0f64..4.0, l in 0i64..30) {
        let d = MomentSequence::new(MomentKind::Discrete { m }, t, m as usize, 192).unwrap();
        prop_assert_eq!(d.get(l), d.get(-l));
        prop_assert_eq!(d.get(l), d.get(l + 2 * m as i64));
        let c = MomentSequence::new(MomentKind::Continuous, t, 30, 192).unwrap();
        prop_assert_eq!(c.get(l), c.get(-l));
    }

    #[test]
    fn joint_below_marginals(t in 0.1f64..4.0, k in 0usize..6, j in 0usize..6) {
        let o = DetOptions::default();
        let joint = joint_cdf(t, k, j, &o).unwrap().value_f64();
        let mk = nes_marginal_cdf(t, k, &o).unwrap().value_f64();
        let mj = nes_marginal_cdf(t, j, &o).unwrap().value_f64();
        prop_assert!(joint <= mk.min(mj) * (1.0 + 1e-14) + 1e-300);
        prop_assert!((0.0..=1.0).contains(&joint));
    }

    #[test]
    fn certified_values_are_stable(t in 0.0f64..6.0, n in 1usize..12) {
        let o = DetOptions::default().with_tol_bits(90);
        let a = toeplitz_det(MomentKind::Continuous, t, n, &o).unwrap();
        prop_assert!(a.agreed_bits >= 90);
        // A run started at twice the precision reproduces the value.
        let b = toeplitz_det(MomentKind::Continuous, t, n, &o.with_start_prec(2 * a.prec_bits)).unwrap();
        prop_assert!(rel(&a.value, &b.value) < 2f64.powi(-90));
    }

    #[test]
    fn sampler_is_exec_independent(n in 1usize..40, seed in any::<u64>()) {
        let a = mc_scaled_covariance_with(n.max(2), 20, seed, Exec::Sequential).unwrap();
        let b = mc_scaled_covariance_with(n.max(2), 20, seed, Exec::Parallel).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn tracy_widom_identities(x in -6.0f64..4.0) {
        let sol = default_solution().unwrap();
        let p = sol.at(x).unwrap();
        let goe = TwDistribution::new(TwKind::Goe, sol);
        let v = goe.eval(x).unwrap();
        // (log F)′ = (q − u)/2.
        prop_assert!((v.pdf / v.cdf - 0.5 * (p.q - p.u)).abs() < 1e-6);
        // 20 E F = −4F″ − x²F′/3.
        let e = goe.correction(x).unwrap();
        prop_assert!((20.0 * e * v.cdf + 4.0 * v.pdf_prime + x * x * v.pdf / 3.0).abs() < 1e-6);
        let gue = TwDistribution::new(TwKind::Gue, sol).eval(x).unwrap();
        let lhs = (p.u * p.u - p.q * p.q - x * x * p.u / 6.0) * gue.cdf;
        prop_assert!((lhs - gue.pdf_prime - x * x * gue.pdf / 6.0).abs() < 1e-6);
    }

    #[test]
    fn s_of_gamma_expansion(t in 20.0f64..400.0, d in -0.05f64..0.05) {
        let gamma = 1.0 + d;
        let y = 2.0 * t.powf(2.0 / 3.0) * d;
        let approx = y - y * y / (60.0 * t.powf(2.0 / 3.0));
        let s = s_of_gamma(t, gamma).unwrap();
        prop_assert!((s - approx).abs() <= 2.0 * t.powf(2.0 / 3.0) * d.abs().powi(3) + 1e-12);
    }
}

#[test]
fn route_agreement_grid() {
    let o = DetOptions::default();
    for (t, k, j) in [(0.5, 1, 1), (1.0, 2, 3), (2.0, 3, 2), (2.5, 1, 4)] {
        let q = prop1_quadrature(t, k, j, &o).unwrap();
        let d = log_joint_cdf(t, k, j, &o).unwrap();
        assert!(Float::with_val(200, &q.value - &d).abs() < 1e-8);
    }
}

#[test]
fn fourier_aliasing() {
    let lhs = h_discrete(1, 3, 1.0, 256).unwrap();
    let mut rhs = Float::with_val(256, 0);
    for n in -20i64..=20 {
        rhs += h_continuous(1 + 6 * n, 1.0, 256).unwrap();
    }
    assert!(Float::with_val(256, &lhs - &rhs).abs() < 1e-30);
}

#[test]
fn determinants_as_products_of_norms() {
    let o = DetOptions::default();
    for kind in [MomentKind::Continuous, MomentKind::Discrete { m: 7 }] {
        for t in [0.5, 1.0, 2.0] {
            let seq = opuc(kind, t, 11, &o).unwrap().value;
            for j in 1..=5usize {
                let mut tj = Float::with_val(400, 1);
                for n in 0..j {
                    tj *= &seq.norms[n];
                }
                assert!(rel(&tj, &toeplitz_det(kind, t, j, &o).unwrap().value) < 1e-25);
                let mut hj = Float::with_val(400, 1);
                for n in 1..=j {
                    let one_minus = Float::with_val(400, 1) - &seq.pi0[2 * n];
                    hj *= Float::with_val(400, &seq.norms[2 * n] / one_minus);
                }
                assert!(rel(&hj, &toeplitz_hankel_det(kind, t, j, &o).unwrap().value) < 1e-25, "{kind:?} t={t} j={j}");
            }
        }
    }
}

#[test]
fn discrete_verblunsky_tend_to_continuous() {
    let o = DetOptions::default();
    let cont = opuc(MomentKind::Continuous, 1.0, 6, &o).unwrap().value;
    let disc = opuc(MomentKind::Discrete { m: 200 }, 1.0, 6, &o).unwrap().value;
    for n in 0..=6 {
        let d = Float::with_val(400, &cont.pi0[n] - &disc.pi0[n]).abs();
        assert!(d < 1e-20, "n = {n}");
    }
}

#[test]
fn histogram_exec_independent() {
    assert_eq!(joint_histogram(7, Exec::Sequential).unwrap(), joint_histogram(7, Exec::Parallel).unwrap());
}

#[test]
fn hastings_mcleod_integral_relations() {
    // u′ = q² and u″ = 2qq′ by centred differences on the grid.
    let sol = default_solution().unwrap();
    let h = 1e-3;
    for s in [-8.0, -3.0, 0.0, 2.5, 6.0] {
        let (a, b, c) = (sol.at(s - h).unwrap(), sol.at(s).unwrap(), sol.at(s + h).unwrap());
        let d1 = (c.u - a.u) / (2.0 * h);
        let d2 = (c.u - 2.0 * b.u + a.u) / (h * h);
        assert!((d1 - b.q * b.q).abs() < 1e-7, "s = {s}");
        assert!((d2 - 2.0 * b.q * b.qp).abs() < 1e-5, "s = {s}");
    }
}
