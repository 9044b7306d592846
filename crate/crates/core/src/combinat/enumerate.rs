use crate::error::{Error, Result};
use crate::exec::Exec;

use super::matching::{cro_sorted, nes_sorted, Matching};

/// Largest `n` accepted by the exhaustive routines: `(2·9−1)!! ≈ 3.4·10⁷`.
pub const MAX_ENUM_N: usize = 9;

pub(crate) fn check_capacity(n: usize, max: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::Validation("n must be at least 1".into()));
    }
    if n > max {
        return Err(Error::Capacity(format!(
            "n = {n} exceeds the exhaustive-enumeration limit {max}"
        )));
    }
    Ok(())
}

/// `(2n−1)!!`, the number of complete matchings of `[2n]`.
pub fn double_factorial_odd(n: usize) -> u64 {
    (1..=n as u64).map(|i| 2 * i - 1).product()
}

/// Streams every matching of `[2n]` exactly once, in canonical order: the
/// smallest free point is paired with each larger free point in turn, then
/// the rest is matched recursively.
pub fn enumerate_matchings(n: usize) -> Result<MatchingIter> {
    check_capacity(n, MAX_ENUM_N)?;
    Ok(MatchingIter {
        n,
        choices: vec![0; n],
        done: false,
    })
}

#[derive(Debug, Clone)]
pub struct MatchingIter {
    n: usize,
    // choices[l] picks the partner of the smallest free point at depth l
    // among the 2(n-l)-1 remaining points.
    choices: Vec<usize>,
    done: bool,
}

impl MatchingIter {
    fn decode(&self) -> Matching {
        let mut free: Vec<u32> = (1..=2 * self.n as u32).collect();
        let mut arcs = Vec::with_capacity(self.n);
        for &c in &self.choices {
            let a = free.remove(0);
            let b = free.remove(c);
            arcs.push((a, b));
        }
        Matching::from_sorted_unchecked(arcs)
    }
}

impl Iterator for MatchingIter {
    type Item = Matching;

    fn next(&mut self) -> Option<Matching> {
        if self.done {
            return None;
        }
        let current = self.decode();
        let mut level = self.n;
        loop {
            if level == 0 {
                self.done = true;
                break;
            }
            level -= 1;
            let limit = 2 * (self.n - level) - 1;
            self.choices[level] += 1;
            if self.choices[level] < limit {
                break;
            }
            self.choices[level] = 0;
        }
        Some(current)
    }
}

/// Joint histogram `counts[c][e]` = number of matchings of `[2n]` with
/// `cro = c` and `nes = e`, by exhaustive enumeration. The 2n−1 choices for
/// the partner of point 1 are independent subtrees and run under `exec`.
pub fn joint_histogram(n: usize, exec: Exec) -> Result<Vec<Vec<u64>>> {
    check_capacity(n, MAX_ENUM_N)?;
    let full: u32 = ((1u64 << (2 * n)) - 1) as u32;
    let parts = exec.map_range(2 * n - 1, |first| {
        let mut hist = vec![vec![0u64; n + 1]; n + 1];
        let partner_bit = 1u32 << (first + 1);
        let mut arcs = Vec::with_capacity(n);
        arcs.push((1u32, first as u32 + 2));
        walk(full & !1 & !partner_bit, &mut arcs, &mut hist);
        hist
    });
    let mut total = vec![vec![0u64; n + 1]; n + 1];
    for part in parts {
        for (row, prow) in total.iter_mut().zip(part) {
            for (v, p) in row.iter_mut().zip(prow) {
                *v += p;
            }
        }
    }
    Ok(total)
}

// `free` is a bitmask over points 1..=2n (bit i-1 <=> point i).
fn walk(free: u32, arcs: &mut Vec<(u32, u32)>, hist: &mut [Vec<u64>]) {
    if free == 0 {
        hist[cro_sorted(arcs)][nes_sorted(arcs)] += 1;
        return;
    }
    let lo = free.trailing_zeros();
    let mut rest = free & !(1 << lo);
    while rest != 0 {
        let hi = rest.trailing_zeros();
        rest &= rest - 1;
        arcs.push((lo + 1, hi + 1));
        walk(free & !(1 << lo) & !(1 << hi), arcs, hist);
        arcs.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_match_double_factorial() {
        assert_eq!(enumerate_matchings(1).unwrap().count(), 1);
        assert_eq!(enumerate_matchings(2).unwrap().count(), 3);
        assert_eq!(enumerate_matchings(4).unwrap().count(), 105);
        assert_eq!(enumerate_matchings(7).unwrap().count(), 135_135);
        assert_eq!(double_factorial_odd(7), 135_135);
    }

    #[test]
    fn n_one_is_single_arc() {
        let all: Vec<_> = enumerate_matchings(1).unwrap().collect();
        assert_eq!(all[0].arcs(), &[(1, 2)]);
    }

    #[test]
    fn canonical_order_is_lexicographic_and_distinct() {
        let all: Vec<_> = enumerate_matchings(3).unwrap().collect();
        assert_eq!(all.len(), 15);
        assert_eq!(all[0].arcs(), &[(1, 2), (3, 4), (5, 6)]);
        assert!(all.windows(2).all(|w| w[0].arcs() < w[1].arcs()));
    }

    #[test]
    fn capacity_guard() {
        assert!(matches!(enumerate_matchings(10), Err(Error::Capacity(_))));
        assert!(matches!(enumerate_matchings(0), Err(Error::Validation(_))));
    }

    #[test]
    fn histogram_agrees_with_stream() {
        for n in 1..=5 {
            let hist = joint_histogram(n, Exec::Sequential).unwrap();
            let mut from_stream = vec![vec![0u64; n + 1]; n + 1];
            for m in enumerate_matchings(n).unwrap() {
                from_stream[m.cro()][m.nes()] += 1;
            }
            assert_eq!(hist, from_stream);
            assert_eq!(hist, joint_histogram(n, Exec::Parallel).unwrap());
        }
    }
}
