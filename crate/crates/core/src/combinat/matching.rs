use serde::Serialize;

use crate::error::{Error, Result};

/// A complete matching of `{1, …, 2n}` stored as arcs `(opener, closer)`,
/// sorted by opener. The sorted form is the canonical one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Matching {
    n: usize,
    arcs: Vec<(u32, u32)>,
}

impl Matching {
    /// Builds a matching from arcs in any order, validating that the `2n`
    /// endpoints are exactly `1..=2n`.
    pub fn new(arcs: impl IntoIterator<Item = (u32, u32)>) -> Result<Self> {
        let mut arcs: Vec<(u32, u32)> = arcs
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        let n = arcs.len();
        if n == 0 {
            return Err(Error::Validation("a matching needs at least one arc".into()));
        }
        let mut seen = vec![false; 2 * n + 1];
        for &(a, b) in &arcs {
            if a == b {
                return Err(Error::Validation(format!("arc ({a},{b}) is a loop")));
            }
            for p in [a, b] {
                let p = p as usize;
                if p == 0 || p > 2 * n {
                    return Err(Error::Validation(format!("endpoint {p} outside 1..={}", 2 * n)));
                }
                if seen[p] {
                    return Err(Error::Validation(format!("endpoint {p} used twice")));
                }
                seen[p] = true;
            }
        }
        arcs.sort_unstable();
        Ok(Matching { n, arcs })
    }

    /// Arcs already sorted by opener and known to be valid.
    pub(crate) fn from_sorted_unchecked(arcs: Vec<(u32, u32)>) -> Self {
        debug_assert!(arcs.windows(2).all(|w| w[0].0 < w[1].0));
        Matching { n: arcs.len(), arcs }
    }

    /// Builds the matching from a partner table over `1..=2n` (index 0 unused).
    pub fn from_partners(partner: &[u32]) -> Result<Self> {
        let arcs = partner
            .iter()
            .enumerate()
            .skip(1)
            .filter(|&(i, &p)| (i as u32) < p)
            .map(|(i, &p)| (i as u32, p));
        let m = Self::new(arcs)?;
        if 2 * m.n + 1 != partner.len() {
            return Err(Error::Validation("partner table is not an involution".into()));
        }
        for &(a, b) in &m.arcs {
            if partner[b as usize] != a {
                return Err(Error::Validation("partner table is not an involution".into()));
            }
        }
        Ok(m)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn arcs(&self) -> &[(u32, u32)] {
        &self.arcs
    }

    /// The fixed-point-free involution of `[2n]` pairing the endpoints of
    /// each arc, as the sequence `σ(1), …, σ(2n)`.
    pub fn involution(&self) -> Vec<u32> {
        let mut sigma = vec![0u32; 2 * self.n];
        for &(a, b) in &self.arcs {
            sigma[a as usize - 1] = b;
            sigma[b as usize - 1] = a;
        }
        sigma
    }

    /// Maximal crossing number.
    pub fn cro(&self) -> usize {
        cro_sorted(&self.arcs)
    }

    /// Maximal nesting number.
    pub fn nes(&self) -> usize {
        nes_sorted(&self.arcs)
    }
}

/// Length of the longest strictly increasing subsequence.
pub(crate) fn lis_len(seq: impl IntoIterator<Item = u32>) -> usize {
    let mut tails: Vec<u32> = Vec::new();
    for x in seq {
        let pos = tails.partition_point(|&v| v < x);
        if pos == tails.len() {
            tails.push(x);
        } else {
            tails[pos] = x;
        }
    }
    tails.len()
}

/// Maximal crossing of arcs sorted by opener.
///
/// An `r`-crossing `i_1 < … < i_r < j_1 < … < j_r` consists of arcs that all
/// straddle the separator `p = j_1` (opener `< p <=` closer) and whose closers
/// increase with their openers. Conversely any such chain among the arcs that
/// straddle a common `p` satisfies `i_r < p <= j_1`, so it is an `r`-crossing.
/// Hence the maximal crossing is the maximum over closers `p` of the longest
/// increasing run of closers among the straddling arcs. This is the
/// rectangle-restricted down/right path picture of the permutation matrix.
pub(crate) fn cro_sorted(arcs: &[(u32, u32)]) -> usize {
    let mut best = 0;
    for &(_, p) in arcs {
        let chain = lis_len(
            arcs.iter()
                .take_while(|&&(o, _)| o < p)
                .filter(|&&(_, c)| c >= p)
                .map(|&(_, c)| c),
        );
        best = best.max(chain);
    }
    best
}

/// Maximal nesting of arcs sorted by opener: the longest strictly decreasing
/// run of closers.
pub(crate) fn nes_sorted(arcs: &[(u32, u32)]) -> usize {
    // Strictly decreasing closers == strictly increasing negated closers.
    lis_len(arcs.iter().map(|&(_, c)| u32::MAX - c))
}
