//! Non-intersecting continuous-time simple random walks.
//!
//! Walker `i` starts at `−i` and jumps `±1` at rate 1 each. Conditioned on
//! every walker returning home at time `t` while the walkers stay strictly
//! ordered above the floor `−N+1`, the height `K = max X₀` and the depth `J`
//! (number of top walkers that moved) have the joint law of the maximal
//! crossing and nesting of a Poissonized matching.

use rand::Rng;
use rug::Float;
use serde::Serialize;

use crate::combinat::replica_rng;
use crate::detkernel::{toeplitz_hankel_det, toeplitz_hankel_minors, DetOptions};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::moments::MomentKind;

/// Replicas per RNG stream. Fixed so that results do not depend on the
/// number of workers.
const CHUNK: usize = 1 << 16;

pub const MAX_WALKERS: usize = 4;
pub const MAX_REPS: usize = 100_000_000;

/// Monte Carlo proportion with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub accepted: usize,
}

impl MCEstimate {
    fn proportion(hits: usize, trials: usize, reps: usize, accepted: usize) -> Self {
        let p = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        MCEstimate {
            mean: p,
            stderr: (p * (1.0 - p) / trials.max(1) as f64).sqrt(),
            reps,
            accepted,
        }
    }

    /// `|mean − target|` in units of the standard error; a zero error with
    /// an exact hit counts as zero.
    pub fn z_score(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if d == 0.0 {
            0.0
        } else {
            d / self.stderr
        }
    }
}

/// Outcome of one replica.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Replica {
    Rejected,
    Accepted { k: usize, j: usize },
}

fn check(t: f64, walkers: usize, reps: usize) -> Result<()> {
    if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
        return Err(Error::Validation(format!("t must lie in [0, 1], got {t}")));
    }
    if walkers == 0 || walkers > MAX_WALKERS {
        return Err(Error::Validation(format!("N must lie in 1..={MAX_WALKERS}, got {walkers}")));
    }
    if reps == 0 || reps > MAX_REPS {
        return Err(Error::Validation(format!("reps must lie in 1..={MAX_REPS}, got {reps}")));
    }
    Ok(())
}

/// Simulates one replica of `walkers` walkers on `[0, t]`.
pub fn simulate_replica<R: Rng + ?Sized>(t: f64, walkers: usize, rng: &mut R) -> Replica {
    // (time, walker, step) for every jump.
    let mut events: Vec<(f64, usize, i64)> = Vec::new();
    for i in 0..walkers {
        let mut clock = 0.0;
        let mut net = 0i64;
        let start = events.len();
        loop {
            // Total jump rate 2.
            clock += -(1.0 - rng.random::<f64>()).ln() / 2.0;
            if clock > t {
                break;
            }
            let step = if rng.random::<bool>() { 1 } else { -1 };
            net += step;
            events.push((clock, i, step));
        }
        if net != 0 {
            return Replica::Rejected;
        }
        debug_assert!(events[start..].windows(2).all(|w| w[0].0 < w[1].0));
    }
    events.sort_by(|a, b| a.0.total_cmp(&b.0));
    let floor = -(walkers as i64) + 1;
    let mut pos: Vec<i64> = (0..walkers as i64).map(|i| -i).collect();
    let mut height = 0i64;
    let mut depth = 0usize;
    for &(_, i, step) in &events {
        pos[i] += step;
        let above_ok = i == 0 || pos[i - 1] > pos[i];
        let below_ok = if i + 1 < walkers { pos[i] > pos[i + 1] } else { pos[i] >= floor };
        if !(above_ok && below_ok) {
            return Replica::Rejected;
        }
        if i == 0 {
            height = height.max(pos[0]);
        }
        depth = depth.max(i + 1);
    }
    debug_assert!(depth <= walkers);
    Replica::Accepted {
        k: height as usize,
        j: depth,
    }
}

/// Runs `reps` replicas; stream `c` of `seed` drives replicas
/// `c·CHUNK … (c+1)·CHUNK − 1`.
fn run(t: f64, walkers: usize, reps: usize, seed: u64, exec: Exec) -> Vec<Vec<u64>> {
    let chunks = reps.div_ceil(CHUNK);
    let size = walkers + 2;
    let parts = exec.map_range(chunks, |c| {
        let mut rng = replica_rng(seed, c as u64);
        let mut counts = vec![vec![0u64; size + 1]; size + 1];
        let mut rejected = 0u64;
        let n = CHUNK.min(reps - c * CHUNK);
        for _ in 0..n {
            match simulate_replica(t, walkers, &mut rng) {
                Replica::Rejected => rejected += 1,
                Replica::Accepted { k, j } => counts[k.min(size)][j] += 1,
            }
        }
        counts[0].push(rejected);
        counts
    });
    let mut total = vec![vec![0u64; size + 1]; size + 1];
    let mut rejected = 0u64;
    for mut p in parts {
        rejected += p[0].pop().unwrap();
        for (a, b) in total.iter_mut().zip(&p) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
    total[0].push(rejected);
    total
}

/// Estimate of `P(𝔄_N ∩ 𝔅_N)`: all walkers home at `t`, ordered
/// throughout and never below `−N+1`.
pub fn simulate_event_prob(t: f64, walkers: usize, reps: usize, seed: u64) -> Result<MCEstimate> {
    simulate_event_prob_with(t, walkers, reps, seed, Exec::default())
}

pub fn simulate_event_prob_with(t: f64, walkers: usize, reps: usize, seed: u64, exec: Exec) -> Result<MCEstimate> {
    check(t, walkers, reps)?;
    let law = run(t, walkers, reps, seed, exec);
    let accepted = reps - *law[0].last().unwrap() as usize;
    Ok(MCEstimate::proportion(accepted, reps, reps, accepted))
}

/// Empirical joint law of `(K, J)` among accepted replicas.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KJLaw {
    pub t: f64,
    pub walkers: usize,
    pub reps: usize,
    pub accepted: usize,
    /// `counts[k][j]`; heights above `N + 1` are pooled into the last row.
    pub counts: Vec<Vec<u64>>,
}

impl KJLaw {
    /// Empirical `P{K ≤ k, J ≤ j | 𝔄_N ∩ 𝔅_N}`.
    pub fn cdf(&self, k: usize, j: usize) -> MCEstimate {
        let hits: u64 = self
            .counts
            .iter()
            .take(k + 1)
            .map(|row| row.iter().take(j + 1).sum::<u64>())
            .sum();
        MCEstimate::proportion(hits as usize, self.accepted, self.reps, self.accepted)
    }

    pub fn max_depth(&self) -> usize {
        self.counts
            .iter()
            .flat_map(|row| row.iter().enumerate().filter(|(_, &c)| c > 0).map(|(j, _)| j))
            .max()
            .unwrap_or(0)
    }
}

pub fn conditional_kj(t: f64, walkers: usize, reps: usize, seed: u64) -> Result<KJLaw> {
    conditional_kj_with(t, walkers, reps, seed, Exec::default())
}

pub fn conditional_kj_with(t: f64, walkers: usize, reps: usize, seed: u64, exec: Exec) -> Result<KJLaw> {
    check(t, walkers, reps)?;
    let mut counts = run(t, walkers, reps, seed, exec);
    let accepted = reps - counts[0].pop().unwrap() as usize;
    if accepted < 100 {
        return Err(Error::InsufficientAcceptance {
            accepted: accepted as u64,
            reps: reps as u64,
        });
    }
    let law = KJLaw {
        t,
        walkers,
        reps,
        accepted,
        counts,
    };
    assert!(law.max_depth() <= walkers, "depth above the number of walkers");
    Ok(law)
}

/// Estimate of `P{Z(t) = 0}` for a single free walker, whose exact value is
/// `e^{−2t} I₀(2t)`.
pub fn return_probability(t: f64, reps: usize, seed: u64) -> Result<MCEstimate> {
    check(t, 1, reps)?;
    let chunks = reps.div_ceil(CHUNK);
    let hits: usize = Exec::default()
        .map_range(chunks, |c| {
            let mut rng = replica_rng(seed, c as u64);
            (0..CHUNK.min(reps - c * CHUNK))
                .filter(|_| {
                    let mut clock = 0.0;
                    let mut net = 0i64;
                    loop {
                        clock += -(1.0 - rng.random::<f64>()).ln() / 2.0;
                        if clock > t {
                            return net == 0;
                        }
                        net += if rng.random::<bool>() { 1 } else { -1 };
                    }
                })
                .count()
        })
        .into_iter()
        .sum();
    Ok(MCEstimate::proportion(hits, reps, reps, hits))
}

/// Exact `P(𝔄_N ∩ 𝔅_N) = e^{−2tN} det[φ_{a−b} − φ_{a+b}]_{a,b=1}^N`,
/// `φ_a = I_a(2t)`.
pub fn karlin_mcgregor_prob(t: f64, walkers: usize, opts: &DetOptions) -> Result<f64> {
    let det = toeplitz_hankel_det(MomentKind::Continuous, t, walkers, opts)?;
    let prec = det.value.prec();
    let damp = Float::with_val(prec, -2.0 * t * walkers as f64).exp();
    Ok(Float::with_val(prec, &det.value * damp).to_f64())
}

/// Exact finite-`N` conditional law
/// `P{K ≤ k, J ≤ j | 𝔄_N ∩ 𝔅_N} = det[h_{a−b} − h_{a+b}]_{1..j} / det[φ_{a−b} − φ_{a+b}]_{1..N}`
/// with `h` the moments on the `2(j+k+1)`-th roots of unity, for `j ≤ N`.
pub fn conditional_kj_exact(t: f64, walkers: usize, k: usize, j: usize, opts: &DetOptions) -> Result<f64> {
    if j > walkers {
        return Err(Error::Validation(format!("j = {j} exceeds N = {walkers}")));
    }
    let denom = toeplitz_hankel_det(MomentKind::Continuous, t, walkers, opts)?;
    if j == 0 {
        return Ok(Float::with_val(denom.value.prec(), 1 / &denom.value).to_f64());
    }
    let m = MomentKind::Discrete { m: (j + k + 1) as u32 };
    let num = toeplitz_hankel_minors(m, t, j, opts)?;
    Ok(Float::with_val(num.prec_bits, &num.value[j - 1] / &denom.value).to_f64())
}

/// Exchangeability of `(K, J)` by a randomisation test: under the null each
/// observation is equally likely to appear as `(k, j)` or `(j, k)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetryTest {
    /// `Σ_{k<j} (n_kj − n_jk)² / (n_kj + n_jk)`.
    pub statistic: f64,
    pub p_value: f64,
    pub permutations: usize,
}

fn bowker(pairs: &[(u64, u64)]) -> f64 {
    pairs
        .iter()
        .filter(|(a, b)| a + b > 0)
        .map(|&(a, b)| {
            let d = a as f64 - b as f64;
            d * d / (a + b) as f64
        })
        .sum()
}

fn binomial_half<R: Rng + ?Sized>(n: u64, rng: &mut R) -> u64 {
    let mut left = n;
    let mut hits = 0u64;
    while left >= 64 {
        hits += rng.random::<u64>().count_ones() as u64;
        left -= 64;
    }
    if left > 0 {
        hits += (rng.random::<u64>() & ((1u64 << left) - 1)).count_ones() as u64;
    }
    hits
}

pub fn symmetry_test(counts: &[Vec<u64>], permutations: usize, seed: u64) -> Result<SymmetryTest> {
    if permutations == 0 {
        return Err(Error::Validation("permutations must be positive".into()));
    }
    let size = counts.len().max(counts.iter().map(Vec::len).max().unwrap_or(0));
    let at = |k: usize, j: usize| counts.get(k).and_then(|r| r.get(j)).copied().unwrap_or(0);
    let mut pairs = Vec::new();
    for k in 0..size {
        for j in k + 1..size {
            pairs.push((at(k, j), at(j, k)));
        }
    }
    let observed = bowker(&pairs);
    let mut rng = replica_rng(seed, 0);
    let mut extreme = 0usize;
    for _ in 0..permutations {
        let shuffled: Vec<(u64, u64)> = pairs
            .iter()
            .map(|&(a, b)| {
                let x = binomial_half(a + b, &mut rng);
                (x, a + b - x)
            })
            .collect();
        if bowker(&shuffled) >= observed {
            extreme += 1;
        }
    }
    Ok(SymmetryTest {
        statistic: observed,
        p_value: (extreme + 1) as f64 / (permutations + 1) as f64,
        permutations,
    })
}
