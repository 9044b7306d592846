use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;

use super::matching::Matching;

/// Deterministic generator for replica `stream` of a run seeded by `seed`.
///
/// ChaCha8 is counter based: each `(seed, stream)` pair addresses an
/// independent keystream, so replicas draw the same numbers whatever the
/// thread layout.
pub fn replica_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform random matching of `[2n]`, reproducible from `seed`.
pub fn sample_matching(n: usize, seed: u64) -> Result<Matching> {
    if n == 0 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    Ok(sample_matching_with(n, &mut replica_rng(seed, 0)))
}

/// Pairs the smallest free point with a uniformly chosen other free point
/// until nothing is left. Every matching arises from exactly one sequence of
/// choices, each with probability `1/(2n−1)!!`.
pub fn sample_matching_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Matching {
    let size = 2 * n;
    // `pool` holds the free points in arbitrary order, `pos` its inverse.
    let mut pool: Vec<u32> = (1..=size as u32).collect();
    let mut pos: Vec<usize> = (0..size).collect();
    let mut taken = vec![false; size + 1];
    let mut arcs = Vec::with_capacity(n);
    let remove = |pool: &mut Vec<u32>, pos: &mut Vec<usize>, x: u32| {
        let i = pos[x as usize - 1];
        let last = *pool.last().unwrap();
        pool.swap_remove(i);
        if last != x {
            pos[last as usize - 1] = i;
        }
    };
    for p in 1..=size as u32 {
        if taken[p as usize] {
            continue;
        }
        remove(&mut pool, &mut pos, p);
        let q = pool[rng.random_range(0..pool.len())];
        remove(&mut pool, &mut pos, q);
        taken[p as usize] = true;
        taken[q as usize] = true;
        arcs.push((p, q));
    }
    Matching::from_sorted_unchecked(arcs)
}

/// Statistics centred and scaled as `(stat − √(2n)) / (½(2n)^{1/6})`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledStats {
    pub cro_scaled: f64,
    pub nes_scaled: f64,
}

impl ScaledStats {
    pub fn new(n: usize, cro: usize, nes: usize) -> Self {
        ScaledStats {
            cro_scaled: scale(n, cro as f64),
            nes_scaled: scale(n, nes as f64),
        }
    }

    pub fn of(m: &Matching) -> Self {
        Self::new(m.n(), m.cro(), m.nes())
    }

    /// Recovers the integer statistics `(cro, nes)`.
    pub fn unscale(&self, n: usize) -> (usize, usize) {
        (unscale(n, self.cro_scaled), unscale(n, self.nes_scaled))
    }
}

/// Scale factor `½(2n)^{1/6}`.
pub fn scale_factor(n: usize) -> f64 {
    0.5 * (2.0 * n as f64).powf(1.0 / 6.0)
}

fn scale(n: usize, x: f64) -> f64 {
    (x - (2.0 * n as f64).sqrt()) / scale_factor(n)
}

fn unscale(n: usize, y: f64) -> usize {
    (y * scale_factor(n) + (2.0 * n as f64).sqrt()).round() as usize
}

/// Monte Carlo estimate with a standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CovEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// Sample covariance of the scaled statistics over `reps` independent
/// uniform matchings, with a jackknife standard error.
pub fn mc_scaled_covariance(n: usize, reps: usize, seed: u64) -> Result<CovEstimate> {
    mc_scaled_covariance_with(n, reps, seed, Exec::default())
}

pub fn mc_scaled_covariance_with(n: usize, reps: usize, seed: u64, exec: Exec) -> Result<CovEstimate> {
    if n == 0 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    if reps < 2 {
        return Err(Error::Validation("reps must be at least 2".into()));
    }
    let samples = exec.map_range(reps, |r| {
        let m = sample_matching_with(n, &mut replica_rng(seed, r as u64));
        let s = ScaledStats::of(&m);
        (s.cro_scaled, s.nes_scaled)
    });
    let (estimate, stderr) = covariance_jackknife(&samples);
    Ok(CovEstimate {
        estimate,
        stderr,
        reps,
    })
}

/// Unbiased sample covariance and its jackknife standard error. The
/// leave-one-out replicates use the plug-in (divide by count) covariance so
/// that two observations already give a finite error.
pub fn covariance_jackknife(xy: &[(f64, f64)]) -> (f64, f64) {
    let r = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / r;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / r;
    let c: Vec<(f64, f64)> = xy.iter().map(|&(x, y)| (x - mx, y - my)).collect();
    let sxy: f64 = c.iter().map(|&(x, y)| x * y).sum();
    let estimate = sxy / (r - 1.0);
    // Removing observation i shifts the centred sums by known amounts.
    let leave_out: Vec<f64> = c
        .iter()
        .map(|&(x, y)| {
            let k = r - 1.0;
            let sx = -x;
            let sy = -y;
            ((sxy - x * y) - sx * sy / k) / k
        })
        .collect();
    let mean = leave_out.iter().sum::<f64>() / r;
    let var = leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (r - 1.0) / r;
    (estimate, var.sqrt())
}
