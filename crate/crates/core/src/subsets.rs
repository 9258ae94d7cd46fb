//! Exhaustive subset scans over integer-scaled games.
//!
//! Scanning `2^k` subsets with rational sums is dominated by gcd work, so the
//! exhaustive routines first multiply every quantity by the least common
//! denominator `D` of `tau`, the endowments and the lower bounds. Totals,
//! bounds and intervention amounts are then plain integers and are divided
//! back by `D` only for the final answer.

use std::ops::{ControlFlow, Range};

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::model::GameInstance;
use crate::rational::{common_denominator, Rational};

/// Masks per parallel work unit.
const CHUNK_BITS: usize = 12;

/// Largest number of agents a bitmask scan accepts.
pub const MAX_SCAN_AGENTS: usize = 62;

pub(crate) struct ScaledGame {
    scale: BigInt,
    pub tau: BigInt,
    pub endowment: Vec<BigInt>,
    pub lower: Vec<BigInt>,
    pub upper: Vec<BigInt>,
}

impl ScaledGame {
    pub fn new(game: &GameInstance) -> Self {
        let bounds = game.all_bounds();
        let scale = common_denominator(
            std::iter::once(game.tau())
                .chain(game.agents().iter().map(|a| &a.endowment))
                .chain(bounds.iter().map(|b| &b.lower)),
        );
        let to_int = |q: &Rational| {
            let scaled = q * &scale;
            debug_assert!(scaled.is_integer());
            scaled.to_integer()
        };
        Self {
            tau: to_int(game.tau()),
            endowment: game.agents().iter().map(|a| to_int(&a.endowment)).collect(),
            lower: bounds.iter().map(|b| to_int(&b.lower)).collect(),
            upper: bounds.iter().map(|b| to_int(&b.upper)).collect(),
            scale,
        }
    }

    pub fn unscale(&self, value: &BigInt) -> Rational {
        Rational::new(value.clone(), self.scale.clone())
    }

    /// Scaled endowments of `agents`, in that order.
    pub fn weights(&self, agents: &[usize]) -> Vec<BigInt> {
        agents.iter().map(|&i| self.endowment[i].clone()).collect()
    }
}

/// Calls `visit(mask, sum)` for each mask in `range`, ascending, where `sum`
/// is the total weight of the mask's set bits. Consecutive masks share all
/// but (amortised) two bits, so the sum is updated incrementally.
pub(crate) fn scan_range<F>(weights: &[BigInt], range: Range<u64>, mut visit: F) -> ControlFlow<()>
where
    F: FnMut(u64, &BigInt) -> ControlFlow<()>,
{
    let mut sum: BigInt = weights
        .iter()
        .enumerate()
        .filter(|(b, _)| range.start >> b & 1 == 1)
        .map(|(_, w)| w)
        .sum();
    for mask in range {
        visit(mask, &sum)?;
        let carry = (!mask).trailing_zeros() as usize;
        for w in &weights[..carry.min(weights.len())] {
            sum -= w;
        }
        if let Some(w) = weights.get(carry) {
            sum += w;
        }
    }
    ControlFlow::Continue(())
}

/// Splits `0..2^k` into contiguous chunks, evaluates `work` on each in
/// parallel, and returns the per-chunk results in ascending mask order.
pub(crate) fn par_chunks<R, F>(k: usize, work: F) -> Vec<R>
where
    R: Send,
    F: Fn(Range<u64>) -> R + Sync,
{
    assert!(
        k <= MAX_SCAN_AGENTS,
        "subset scan over {k} agents is out of reach"
    );
    let total = 1u64 << k;
    let chunk = 1u64 << CHUNK_BITS.min(k);
    (0..total / chunk)
        .into_par_iter()
        .map(|c| work(c * chunk..(c + 1) * chunk))
        .collect()
}

/// Agent indices named by the set bits of a mask over `agents`.
pub(crate) fn expand(mask: u64, agents: &[usize]) -> Vec<usize> {
    agents
        .iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, &i)| i)
        .collect()
}

/// For a nonempty mask over `agents`: the largest `maxed[i]` and the
/// smallest `minned[i]` among its members.
pub(crate) fn member_extremes<'a>(
    mask: u64,
    agents: &[usize],
    maxed: &'a [BigInt],
    minned: &'a [BigInt],
) -> (&'a BigInt, &'a BigInt) {
    let mut members = agents
        .iter()
        .enumerate()
        .filter(|(b, _)| mask >> b & 1 == 1)
        .map(|(_, &i)| i);
    let first = members.next().expect("nonempty mask");
    members.fold((&maxed[first], &minned[first]), |(hi, lo), i| {
        (hi.max(&maxed[i]), lo.min(&minned[i]))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    #[test]
    fn incremental_sums_match_direct_sums() {
        let weights: Vec<BigInt> = [3, 5, 7, 11, 13].iter().map(|&w| BigInt::from(w)).collect();
        for start in [0u64, 1, 7, 12] {
            let mut seen = Vec::new();
            let _ = scan_range(&weights, start..32, |mask, sum| {
                let direct: BigInt = expand(mask, &[0, 1, 2, 3, 4])
                    .iter()
                    .map(|&i| &weights[i])
                    .sum();
                assert_eq!(sum, &direct, "mask {mask:#b}");
                seen.push(mask);
                ControlFlow::Continue(())
            });
            assert_eq!(seen, (start..32).collect::<Vec<_>>());
        }
    }

    #[test]
    fn early_stop() {
        let weights = vec![BigInt::from(1); 4];
        let mut count = 0;
        let flow = scan_range(&weights, 0..16, |mask, _| {
            count += 1;
            if mask == 5 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        assert_eq!(flow, ControlFlow::Break(()));
        assert_eq!(count, 6);
    }

    #[test]
    fn chunks_cover_range_in_order() {
        let ranges = par_chunks(14, |r| r);
        assert_eq!(ranges.first().unwrap().start, 0);
        assert_eq!(ranges.last().unwrap().end, 1 << 14);
        assert!(ranges.windows(2).all(|w| w[0].end == w[1].start));
        assert_eq!(par_chunks(3, |r| r), vec![0..8]);
    }

    proptest! {
        #[test]
        fn scaling_is_exact(game in fixtures::arb_game(8)) {
            let scaled = ScaledGame::new(&game);
            prop_assert_eq!(&scaled.unscale(&scaled.tau), game.tau());
            for (i, b) in game.all_bounds().iter().enumerate() {
                prop_assert_eq!(&scaled.unscale(&scaled.endowment[i]), game.endowment(i));
                prop_assert_eq!(&scaled.unscale(&scaled.lower[i]), &b.lower);
                prop_assert_eq!(&scaled.unscale(&scaled.upper[i]), &b.upper);
            }
        }
    }
}
