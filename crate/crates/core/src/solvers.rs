//! Polynomial-time equilibrium construction for two tractable regimes.
//!
//! * Low endowment-to-reward ratio (`e_i/m_i <= tau` for every agent): any
//!   minimal coalition is a cooperative equilibrium, so one exists iff the
//!   grand coalition reaches `tau`.
//! * Balanced instances (all minimal coalitions share one size `k`): start
//!   from the `k` richest agents and swap out members whose lower bound
//!   exceeds the running total.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use thiserror::Error;

use crate::model::{Coalition, GameInstance, ModelError};
use crate::rational::Rational;
use crate::subsets::{par_chunks, scan_range, ScaledGame};

/// Largest instance [`decide_balanced`] will check for balancedness.
pub const MAX_VERIFY_AGENTS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("ordering must list every agent exactly once")]
    NotAPermutation,
    #[error("agent {}: e/m = {ratio} exceeds tau = {tau}", .index + 1)]
    RatioAboveThreshold {
        index: usize,
        ratio: Rational,
        tau: Rational,
    },
    #[error("total endowment {total} is below tau = {tau}")]
    InsufficientEndowment { total: Rational, tau: Rational },
    #[error("instance is not balanced: minimal coalitions of sizes {sizes:?}")]
    NotBalanced { sizes: Vec<usize> },
    #[error("balancedness check is limited to {MAX_VERIFY_AGENTS} agents, got {n}")]
    TooLargeToVerify { n: usize },
}

/// A coalition meeting `tau` that falls short after removing any member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinimalityCertificate {
    pub coalition: Coalition,
    /// `(j, e(S \ {j}))` for every member `j`; each total is below `tau`.
    pub removable_check: Vec<(usize, Rational)>,
}

impl MinimalityCertificate {
    /// Re-checks both minimality conditions against `game`.
    pub fn verify(&self, game: &GameInstance) -> bool {
        let tau = game.tau();
        self.coalition.total() >= tau
            && self.removable_check.len() == self.coalition.len()
            && self.removable_check.iter().all(|(j, rest)| {
                self.coalition.contains(*j)
                    && *rest == self.coalition.total() - game.endowment(*j)
                    && rest < tau
            })
    }
}

/// Agents by descending endowment, ties by ascending index.
pub fn descending_endowment_order(game: &GameInstance) -> Vec<usize> {
    let mut order: Vec<usize> = (0..game.len()).collect();
    order.sort_by(|&a, &b| game.endowment(b).cmp(game.endowment(a)).then(a.cmp(&b)));
    order
}

/// Adds agents in `order` until the total reaches `tau`, then sweeps the
/// chosen agents in reverse and drops any whose removal keeps the total at
/// or above `tau`. `Ok(None)` when even everyone together falls short.
pub fn find_minimal_coalition(
    game: &GameInstance,
    order: &[usize],
) -> Result<Option<MinimalityCertificate>, SolverError> {
    check_permutation(game, order)?;
    let tau = game.tau();
    let mut chosen = Vec::new();
    let mut total = Rational::default();
    for &i in order {
        if &total >= tau {
            break;
        }
        total += game.endowment(i);
        chosen.push(i);
    }
    if &total < tau {
        return Ok(None);
    }
    // Greedy accumulation can overshoot: with e = (1, 5), tau = 5 it picks
    // both agents although agent 2 alone suffices.
    for pos in (0..chosen.len()).rev() {
        let rest = &total - game.endowment(chosen[pos]);
        if &rest >= tau {
            total = rest;
            chosen.remove(pos);
        }
    }
    let coalition = Coalition::new(game, chosen)?;
    let removable_check = coalition
        .members()
        .iter()
        .map(|&j| (j, coalition.total() - game.endowment(j)))
        .collect();
    let certificate = MinimalityCertificate {
        coalition,
        removable_check,
    };
    debug_assert!(certificate.verify(game));
    Ok(Some(certificate))
}

fn check_permutation(game: &GameInstance, order: &[usize]) -> Result<(), SolverError> {
    let mut seen = vec![false; game.len()];
    for &i in order {
        game.check_index(i)?;
        if std::mem::replace(&mut seen[i], true) {
            return Err(SolverError::NotAPermutation);
        }
    }
    if order.len() != game.len() {
        return Err(SolverError::NotAPermutation);
    }
    Ok(())
}

/// Checks `e_i/m_i <= tau` for every agent.
pub fn check_low_ratio(game: &GameInstance) -> Result<(), SolverError> {
    for (index, agent) in game.agents().iter().enumerate() {
        let ratio = &agent.endowment / &agent.reward_level;
        if &ratio > game.tau() {
            return Err(SolverError::RatioAboveThreshold {
                index,
                ratio,
                tau: game.tau().clone(),
            });
        }
    }
    Ok(())
}

/// A cooperative equilibrium for a low-ratio instance, built in index order.
/// `Ok(None)` iff the total endowment is below `tau`.
pub fn solve_low_ratio(game: &GameInstance) -> Result<Option<Coalition>, SolverError> {
    let order: Vec<usize> = (0..game.len()).collect();
    solve_low_ratio_with_order(game, &order)
}

/// As [`solve_low_ratio`], accumulating agents in `order`.
pub fn solve_low_ratio_with_order(
    game: &GameInstance,
    order: &[usize],
) -> Result<Option<Coalition>, SolverError> {
    check_low_ratio(game)?;
    Ok(find_minimal_coalition(game, order)?.map(|c| c.coalition))
}

/// Outcome of the balanced-instance search with its bookkeeping.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BalancedRun {
    pub coalition: Option<Coalition>,
    /// Size shared by all minimal coalitions.
    pub minimal_size: usize,
    /// Agents swapped out, in order; never more than `n - minimal_size`
    /// swaps complete.
    pub removed: Vec<usize>,
}

/// Decides whether a balanced instance has a cooperative equilibrium and
/// returns one if so. With `verify_balanced`, balancedness is first checked
/// exhaustively (at most [`MAX_VERIFY_AGENTS`] agents); without it, an
/// unbalanced instance gets an unspecified but well-formed answer.
pub fn decide_balanced(
    game: &GameInstance,
    verify_balanced: bool,
) -> Result<Option<Coalition>, SolverError> {
    decide_balanced_traced(game, verify_balanced).map(|run| run.coalition)
}

pub fn decide_balanced_traced(
    game: &GameInstance,
    verify_balanced: bool,
) -> Result<BalancedRun, SolverError> {
    if verify_balanced {
        let sizes = minimal_coalition_sizes(game)?;
        if sizes.len() > 1 {
            return Err(SolverError::NotBalanced {
                sizes: sizes.into_iter().collect(),
            });
        }
    }
    let order = descending_endowment_order(game);
    let minimal = find_minimal_coalition(game, &order)?.ok_or_else(|| {
        SolverError::InsufficientEndowment {
            total: game.total_endowment(),
            tau: game.tau().clone(),
        }
    })?;
    let size = minimal.coalition.len();
    let lower: Vec<Rational> = game.all_bounds().into_iter().map(|b| b.lower).collect();

    let mut current: Vec<usize> = order[..size].to_vec();
    let mut pool = order[size..].iter().copied();
    let mut total = game.sum_of(&current);
    let mut removed = Vec::new();
    loop {
        let Some(pos) = current.iter().position(|&i| lower[i] > total) else {
            let coalition = Coalition::new(game, current)?;
            return Ok(BalancedRun {
                coalition: Some(coalition),
                minimal_size: size,
                removed,
            });
        };
        let Some(next) = pool.next() else {
            return Ok(BalancedRun {
                coalition: None,
                minimal_size: size,
                removed,
            });
        };
        let out = current.remove(pos);
        total -= game.endowment(out);
        total += game.endowment(next);
        current.push(next);
        removed.push(out);
        debug_assert!(removed.len() <= game.len() - size);
    }
}

/// Sizes of all minimal coalitions, by exhaustive scan.
pub fn minimal_coalition_sizes(game: &GameInstance) -> Result<BTreeSet<usize>, SolverError> {
    let n = game.len();
    if n > MAX_VERIFY_AGENTS {
        return Err(SolverError::TooLargeToVerify { n });
    }
    let scaled = ScaledGame::new(game);
    let agents: Vec<usize> = (0..n).collect();
    let weights = scaled.weights(&agents);
    let sizes = par_chunks(n, |range| {
        let mut sizes = BTreeSet::new();
        let _ = scan_range(&weights, range, |mask, sum| {
            if mask != 0 && sum >= &scaled.tau {
                let smallest: &BigInt = (0..n)
                    .filter(|b| mask >> b & 1 == 1)
                    .map(|b| &weights[b])
                    .min()
                    .expect("nonempty mask");
                if sum - smallest < scaled.tau {
                    sizes.insert(mask.count_ones() as usize);
                }
            }
            ControlFlow::Continue(())
        });
        sizes
    });
    Ok(sizes.into_iter().flatten().collect())
}
