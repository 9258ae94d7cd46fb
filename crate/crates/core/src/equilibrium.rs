//! Best responses, the cooperative-equilibrium test, and exhaustive
//! enumeration.
//!
//! Two independent routes decide whether a profile `S` is a cooperative Nash
//! equilibrium:
//!
//! * the interval characterization: every member `i` needs
//!   `max{tau, e_i/m_i} <= e(S) < tau + e_i` ([`is_cooperative_ne`]);
//! * direct unilateral-deviation checks on the utilities
//!   ([`deviation_check`]).
//!
//! Both treat indifference as "no profitable deviation": an agent whose
//! utility is unchanged by leaving still counts as a willing member. The one
//! place the routes differ is a member with zero endowment, who is always
//! indifferent. Such agents are never counted as members of a cooperative
//! equilibrium, so [`certify_by_deviation`] rejects them explicitly.

use std::fmt;
use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::model::{utility_at, Coalition, GameInstance, ModelError};
use crate::rational::Rational;
use crate::subsets::{expand, par_chunks, scan_range, ScaledGame};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EquilibriumError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("a cooperative equilibrium needs at least one participating agent")]
    EmptyCoalition,
    #[error("agent {} is already among the other participants", .index + 1)]
    AlreadyParticipating { index: usize },
}

/// Which route certified an [`EquilibriumReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Certification {
    Characterization,
    DeviationCheck,
}

/// Distance of `e(S)` from one member's interval ends.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MemberSlack {
    pub agent: usize,
    /// `e(S) - l_i`, non-negative in an equilibrium.
    pub above_lower: Rational,
    /// `u_i - e(S)`, positive in an equilibrium.
    pub below_upper: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EquilibriumReport {
    pub coalition: Coalition,
    pub certified_by: Certification,
    pub slack: Vec<MemberSlack>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BoundSide {
    /// `e(S) < max{tau, e_i/m_i}`: the member would rather keep its endowment
    /// or the project fails.
    Lower,
    /// `e(S) >= tau + e_i`: the project succeeds without the member.
    Upper,
}

impl fmt::Display for BoundSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundSide::Lower => "lower",
            BoundSide::Upper => "upper",
        })
    }
}

/// First member (by index) whose interval excludes `e(S)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Rejection {
    pub agent: usize,
    pub side: BoundSide,
    pub total: Rational,
    pub bound: Rational,
}

impl fmt::Display for Rejection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.side {
            BoundSide::Lower => write!(
                f,
                "agent {}: total {} is below the lower bound {}",
                self.agent + 1,
                self.total,
                self.bound
            ),
            BoundSide::Upper => write!(
                f,
                "agent {}: total {} reaches the upper bound {}",
                self.agent + 1,
                self.total,
                self.bound
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accepted(EquilibriumReport),
    Rejected(Rejection),
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted(_))
    }
}

/// Whether agent `i` should join when exactly `others` participate:
/// joining must make the project succeed (`e(S₋ᵢ) < tau <= e(S₋ᵢ) + e_i`)
/// and be worth the endowment (`(1 - m_i)/m_i · e_i <= e(S₋ᵢ)`).
/// Indifference counts as joining.
pub fn best_response_is_participate(
    game: &GameInstance,
    others: &Coalition,
    i: usize,
) -> Result<bool, EquilibriumError> {
    game.check_index(i)?;
    check_members(game, others)?;
    if others.contains(i) {
        return Err(EquilibriumError::AlreadyParticipating { index: i });
    }
    let before = others.total();
    let tau = game.tau();
    let pivotal = before < tau && tau <= &(before + game.endowment(i));
    let m = game.reward_level(i);
    let worth_it = (Rational::one() - m) / m * game.endowment(i) <= *before;
    Ok(pivotal && worth_it)
}

/// Interval test for a nonempty profile.
pub fn is_cooperative_ne(
    game: &GameInstance,
    coalition: &Coalition,
) -> Result<Verdict, EquilibriumError> {
    check_members(game, coalition)?;
    if coalition.is_empty() {
        return Err(EquilibriumError::EmptyCoalition);
    }
    let total = coalition.total();
    for &i in coalition.members() {
        let b = game.bounds(i)?;
        if total < &b.lower {
            return Ok(Verdict::Rejected(Rejection {
                agent: i,
                side: BoundSide::Lower,
                total: total.clone(),
                bound: b.lower,
            }));
        }
        if total >= &b.upper {
            return Ok(Verdict::Rejected(Rejection {
                agent: i,
                side: BoundSide::Upper,
                total: total.clone(),
                bound: b.upper,
            }));
        }
    }
    Ok(Verdict::Accepted(report(
        game,
        coalition,
        Certification::Characterization,
    )))
}

/// Nash condition straight from the utilities: no member gains by leaving
/// and no outsider gains by joining. Any profile, including the empty one.
pub fn deviation_check(game: &GameInstance, coalition: &Coalition) -> bool {
    // Recomputed rather than trusting the cached total.
    let total = game.sum_of(coalition.members());
    (0..game.len()).all(|i| {
        let member = coalition.contains(i);
        let current = utility_at(game, &total, member, i);
        let deviated = if member {
            utility_at(game, &(&total - game.endowment(i)), false, i)
        } else {
            utility_at(game, &(&total + game.endowment(i)), true, i)
        };
        current >= deviated
    })
}

/// Certifies `coalition` through [`deviation_check`] alone. Returns `None`
/// unless the profile is a successful Nash equilibrium whose members all
/// hold a positive endowment.
pub fn certify_by_deviation(
    game: &GameInstance,
    coalition: &Coalition,
) -> Option<EquilibriumReport> {
    let success = !coalition.is_empty() && coalition.total() >= game.tau();
    let positive = coalition
        .members()
        .iter()
        .all(|&i| !game.endowment(i).is_zero());
    (success && positive && deviation_check(game, coalition))
        .then(|| report(game, coalition, Certification::DeviationCheck))
}

fn report(
    game: &GameInstance,
    coalition: &Coalition,
    certified_by: Certification,
) -> EquilibriumReport {
    let total = coalition.total();
    let slack = coalition
        .members()
        .iter()
        .map(|&i| {
            let b = game.bounds(i).expect("members were range-checked");
            MemberSlack {
                agent: i,
                above_lower: total - &b.lower,
                below_upper: &b.upper - total,
            }
        })
        .collect();
    EquilibriumReport {
        coalition: coalition.clone(),
        certified_by,
        slack,
    }
}

fn check_members(game: &GameInstance, coalition: &Coalition) -> Result<(), ModelError> {
    match coalition.members().last() {
        Some(&i) => game.check_index(i),
        None => Ok(()),
    }
}

/// Every cooperative equilibrium, ordered by ascending bitmask, at most
/// `limit` of them. Exponential in the number of admissible agents;
/// inadmissible agents are never members and are skipped.
pub fn enumerate_cooperative_ne(game: &GameInstance, limit: Option<usize>) -> Vec<Coalition> {
    let admissible = game.admissible_agents();
    let scaled = ScaledGame::new(game);
    let weights = scaled.weights(&admissible);
    let max_weight = weights.iter().max().cloned().unwrap_or_default();
    let ceiling = &scaled.tau + &max_weight;

    let accepts = |mask: u64, sum: &BigInt| -> bool {
        if mask == 0 || sum < &scaled.tau || sum >= &ceiling {
            return false;
        }
        admissible
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .all(|(_, &i)| &scaled.lower[i] <= sum && sum < &scaled.upper[i])
    };

    let masks: Vec<u64> = match limit {
        Some(limit) => {
            let mut found = Vec::new();
            if limit > 0 {
                let _ = scan_range(&weights, 0..1u64 << admissible.len(), |mask, sum| {
                    if accepts(mask, sum) {
                        found.push(mask);
                        if found.len() == limit {
                            return ControlFlow::Break(());
                        }
                    }
                    ControlFlow::Continue(())
                });
            }
            found
        }
        None => par_chunks(admissible.len(), |range| {
            let mut found = Vec::new();
            let _ = scan_range(&weights, range, |mask, sum| {
                if accepts(mask, sum) {
                    found.push(mask);
                }
                ControlFlow::Continue(())
            });
            found
        })
        .into_iter()
        .flatten()
        .collect(),
    };
    masks
        .into_iter()
        .map(|mask| Coalition::from_sorted_unchecked(game, expand(mask, &admissible)))
        .collect()
}

/// Brute force over all `2^n` profiles with [`deviation_check`]: every
/// nonempty successful Nash equilibrium, ascending bitmask. Independent of
/// the interval characterization; meant as a test oracle for small `n`.
pub fn enumerate_by_deviation_check(game: &GameInstance) -> Vec<Coalition> {
    let n = game.len();
    assert!(n <= crate::subsets::MAX_SCAN_AGENTS);
    (1..1u64 << n)
        .map(|mask| Coalition::from_mask(game, mask))
        .filter(|s| s.total() >= game.tau() && deviation_check(game, s))
        .collect()
}
