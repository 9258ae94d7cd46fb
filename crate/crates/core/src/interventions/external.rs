use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{BoundViolation, PlanViolation};
use crate::equilibrium::BoundSide;
use crate::model::{AgentBounds, Coalition, GameInstance};
use crate::rational::Rational;
use crate::subsets::{expand, member_extremes, par_chunks, scan_range, ScaledGame};

/// Coalition `S` plus an external amount `delta` added to `e(S)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExternalPlan {
    pub coalition: Coalition,
    pub delta: Rational,
}

impl ExternalPlan {
    pub fn new(coalition: Coalition, delta: Rational) -> Self {
        Self { coalition, delta }
    }

    /// Nobody contributes; the intervention pays the whole threshold.
    pub fn fallback(game: &GameInstance) -> Self {
        Self::new(Coalition::empty(), game.tau().clone())
    }

    pub fn cost(&self) -> &Rational {
        &self.delta
    }
}

/// `Ok` iff `S` is a cooperative equilibrium once `delta` is added: every
/// member needs `l_i <= e(S) + delta < u_i`; with no members the external
/// amount alone must reach `tau`.
pub fn check_external(game: &GameInstance, plan: &ExternalPlan) -> Result<(), PlanViolation> {
    if plan.delta.is_negative() {
        return Err(PlanViolation::NegativeAmount(plan.delta.clone()));
    }
    if plan.coalition.is_empty() {
        return if &plan.delta >= game.tau() {
            Ok(())
        } else {
            Err(PlanViolation::EmptyBelowThreshold {
                delta: plan.delta.clone(),
                tau: game.tau().clone(),
            })
        };
    }
    let funded = plan.coalition.total() + &plan.delta;
    for &i in plan.coalition.members() {
        let b = game.bounds(i).map_err(|_| PlanViolation::UnknownAgent(i))?;
        check_interval(i, &b, &funded, &b.upper)?;
    }
    Ok(())
}

pub(super) fn check_interval(
    i: usize,
    bounds: &AgentBounds,
    funded: &Rational,
    upper: &Rational,
) -> Result<(), PlanViolation> {
    if funded < &bounds.lower {
        return Err(PlanViolation::Bound(BoundViolation {
            agent: i,
            side: BoundSide::Lower,
            funded: funded.clone(),
            bound: bounds.lower.clone(),
        }));
    }
    if funded >= upper {
        return Err(PlanViolation::Bound(BoundViolation {
            agent: i,
            side: BoundSide::Upper,
            funded: funded.clone(),
            bound: upper.clone(),
        }));
    }
    Ok(())
}

pub fn validate_external(game: &GameInstance, plan: &ExternalPlan) -> bool {
    check_external(game, plan).is_ok()
}

/// Per-level candidate of the external planner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalCandidate {
    /// Agent whose lower bound sets the target `e(S) + delta`.
    pub level_agent: usize,
    pub level: Rational,
    /// Members in admission order (non-increasing endowment).
    pub admitted: Vec<usize>,
    pub plan: ExternalPlan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExternalSearch {
    pub plan: ExternalPlan,
    /// One entry per admissible agent, by ascending level.
    pub candidates: Vec<ExternalCandidate>,
    /// Index into `candidates` of the chosen plan; `None` for the fallback.
    pub chosen: Option<usize>,
}

/// Additive-approximation planner; the returned `delta` is at most
/// `max(max_i e_i, optimum)`.
pub fn plan_external(game: &GameInstance) -> ExternalPlan {
    plan_external_traced(game).plan
}

/// Targets `e(S) + delta = l_i` for each admissible agent `i` in ascending
/// order of `l_i`. For each target, agents `k` with `l_k <= l_i < u_k` are
/// admitted richest first while the total stays at or below the target, and
/// the gap is paid externally. The cheapest target wins (earliest on ties);
/// the all-external plan `(∅, tau)` is considered last.
pub fn plan_external_traced(game: &GameInstance) -> ExternalSearch {
    let bounds = game.all_bounds();
    let mut levels = game.admissible_agents();
    levels.sort_by(|&a, &b| bounds[a].lower.cmp(&bounds[b].lower).then(a.cmp(&b)));
    let mut by_endowment = levels.clone();
    by_endowment.sort_by(|&a, &b| game.endowment(b).cmp(game.endowment(a)).then(a.cmp(&b)));

    let candidates: Vec<ExternalCandidate> = levels
        .iter()
        .map(|&i| {
            let level = &bounds[i].lower;
            let mut admitted = Vec::new();
            let mut total = Rational::zero();
            for &k in by_endowment
                .iter()
                .filter(|&&k| &bounds[k].lower <= level && level < &bounds[k].upper)
            {
                let next = &total + game.endowment(k);
                if &next > level {
                    break;
                }
                total = next;
                admitted.push(k);
            }
            let delta = level - &total;
            let mut members = admitted.clone();
            members.sort_unstable();
            ExternalCandidate {
                level_agent: i,
                level: level.clone(),
                plan: ExternalPlan::new(Coalition::from_sorted_unchecked(game, members), delta),
                admitted,
            }
        })
        .collect();

    let mut chosen: Option<usize> = None;
    for (pos, c) in candidates.iter().enumerate() {
        if chosen.is_none_or(|best| c.plan.delta < candidates[best].plan.delta) {
            chosen = Some(pos);
        }
    }
    let fallback = ExternalPlan::fallback(game);
    if chosen.is_some_and(|best| fallback.delta < candidates[best].plan.delta) {
        chosen = None;
    }
    let plan = chosen.map_or(fallback, |best| candidates[best].plan.clone());
    ExternalSearch {
        plan,
        candidates,
        chosen,
    }
}

/// Exact minimum external investment by scanning every coalition of
/// admissible agents. For a fixed nonempty `S` the cheapest valid amount is
/// `max(0, max_{i∈S} l_i - e(S))`, available iff
/// `max_{i∈S} l_i < min_{i∈S} u_i` and `e(S) < min_{i∈S} u_i`. The empty
/// coalition costs `tau`. Ties go to the smaller coalition bitmask.
pub fn oracle_external(game: &GameInstance) -> ExternalPlan {
    let admissible = game.admissible_agents();
    let scaled = ScaledGame::new(game);
    let weights = scaled.weights(&admissible);

    let best_in = |range| {
        let mut best: Option<(BigInt, u64)> = None;
        let _ = scan_range(&weights, range, |mask, sum| {
            let delta = if mask == 0 {
                scaled.tau.clone()
            } else {
                let (max_lower, min_upper) =
                    member_extremes(mask, &admissible, &scaled.lower, &scaled.upper);
                if max_lower >= min_upper || sum >= min_upper {
                    return ControlFlow::Continue(());
                }
                if sum >= max_lower {
                    BigInt::zero()
                } else {
                    max_lower - sum
                }
            };
            if best.as_ref().is_none_or(|(d, _)| &delta < d) {
                best = Some((delta, mask));
            }
            ControlFlow::Continue(())
        });
        best
    };

    let (delta, mask) = par_chunks(admissible.len(), best_in)
        .into_iter()
        .flatten()
        .reduce(|best, next| if next.0 < best.0 { next } else { best })
        .expect("the empty coalition is always a candidate");
    ExternalPlan::new(
        Coalition::from_sorted_unchecked(game, expand(mask, &admissible)),
        scaled.unscale(&delta),
    )
}
