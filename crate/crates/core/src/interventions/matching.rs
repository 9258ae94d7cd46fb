use std::ops::ControlFlow;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::external::check_interval;
use super::{rho_bar, ExternalPlan, InterventionError, Objective, PlanViolation};
use crate::model::{Coalition, GameInstance};
use crate::rational::Rational;
use crate::subsets::{expand, member_extremes, par_chunks, scan_range, ScaledGame};

/// Coalition `S` whose contributions are matched at rate `rho`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MatchingPlan {
    pub coalition: Coalition,
    pub rate: Rational,
}

impl MatchingPlan {
    pub fn new(coalition: Coalition, rate: Rational) -> Self {
        Self { coalition, rate }
    }

    /// `rho · e(S)`
    pub fn cost(&self) -> Rational {
        &self.rate * self.coalition.total()
    }

    fn objective(&self, objective: Objective) -> Rational {
        match objective {
            Objective::Cost => self.cost(),
            Objective::Rate => self.rate.clone(),
        }
    }
}

/// `Ok` iff `rho < rho_bar`, `S` is nonempty, and every member satisfies
/// `l_i <= (1 + rho)·e(S) < tau + (1 + rho)·e_i`.
pub fn check_matching(game: &GameInstance, plan: &MatchingPlan) -> Result<(), PlanViolation> {
    if plan.rate.is_negative() {
        return Err(PlanViolation::NegativeAmount(plan.rate.clone()));
    }
    let cap = rho_bar(game);
    if plan.rate >= cap {
        return Err(PlanViolation::OverBudget {
            rate: plan.rate.clone(),
            cap,
        });
    }
    if plan.coalition.is_empty() {
        return Err(PlanViolation::EmptyCoalition);
    }
    let multiplier = Rational::one() + &plan.rate;
    let funded = &multiplier * plan.coalition.total();
    for &i in plan.coalition.members() {
        let b = game.bounds(i).map_err(|_| PlanViolation::UnknownAgent(i))?;
        let upper = game.tau() + &multiplier * game.endowment(i);
        check_interval(i, &b, &funded, &upper)?;
    }
    Ok(())
}

pub fn validate_matching(game: &GameInstance, plan: &MatchingPlan) -> bool {
    check_matching(game, plan).is_ok()
}

/// Per-level candidate of the matching planner.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingCandidate {
    pub level_agent: usize,
    pub level: Rational,
    /// Members in admission order (non-increasing endowment).
    pub admitted: Vec<usize>,
    pub plan: MatchingPlan,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MatchingSearch {
    /// `None` when the best candidate breaks the budget cap.
    pub plan: Option<MatchingPlan>,
    /// Candidates by ascending level; levels that admit nobody are absent.
    pub candidates: Vec<MatchingCandidate>,
    /// Index into `candidates` of the objective-minimising candidate.
    pub chosen: Option<usize>,
}

/// Additive-approximation planner for matching funds. With `rho_bar >= 1`
/// and some valid plan in existence, the cost is at most
/// `max(max_i e_i, optimal cost)` and the rate at most `max(1, rho*)`.
pub fn plan_matching(game: &GameInstance, objective: Objective) -> Option<MatchingPlan> {
    plan_matching_traced(game, objective).plan
}

/// Targets `(1 + rho)·e(S) = l_i` for every agent `i` by ascending `l_i`.
/// Agents with `l_k <= l_i` are admitted richest first; admission stops when
/// the next agent would push `e(S)` above the target, or when the rate that
/// target would need leaves that agent at or beyond its upper bound. The
/// best candidate under `objective` wins (earliest level on ties) and is
/// returned only if its rate is below `rho_bar`.
pub fn plan_matching_traced(game: &GameInstance, objective: Objective) -> MatchingSearch {
    let bounds = game.all_bounds();
    let tau = game.tau();
    let mut levels: Vec<usize> = (0..game.len()).collect();
    levels.sort_by(|&a, &b| bounds[a].lower.cmp(&bounds[b].lower).then(a.cmp(&b)));
    let mut by_endowment: Vec<usize> = (0..game.len()).collect();
    by_endowment.sort_by(|&a, &b| game.endowment(b).cmp(game.endowment(a)).then(a.cmp(&b)));

    let mut candidates = Vec::new();
    for &i in &levels {
        let level = &bounds[i].lower;
        let mut admitted = Vec::new();
        let mut total = Rational::zero();
        let mut rate = None;
        for &k in by_endowment.iter().filter(|&&k| &bounds[k].lower <= level) {
            let next = &total + game.endowment(k);
            if &next > level {
                break;
            }
            // Only zero endowments remain; no rate can be derived from them.
            if next.is_zero() {
                break;
            }
            let multiplier = level / &next;
            if level >= &(tau + &multiplier * game.endowment(k)) {
                break;
            }
            total = next;
            rate = Some(multiplier - Rational::one());
            admitted.push(k);
        }
        let Some(rate) = rate else { continue };
        let mut members = admitted.clone();
        members.sort_unstable();
        candidates.push(MatchingCandidate {
            level_agent: i,
            level: level.clone(),
            plan: MatchingPlan::new(Coalition::from_sorted_unchecked(game, members), rate),
            admitted,
        });
    }

    let mut chosen: Option<(usize, Rational)> = None;
    for (pos, c) in candidates.iter().enumerate() {
        let value = c.plan.objective(objective);
        if chosen.as_ref().is_none_or(|(_, best)| &value < best) {
            chosen = Some((pos, value));
        }
    }
    let chosen = chosen.map(|(pos, _)| pos);
    let cap = rho_bar(game);
    let plan = chosen
        .map(|pos| &candidates[pos].plan)
        .filter(|p| p.rate < cap)
        .cloned();
    MatchingSearch {
        plan,
        candidates,
        chosen,
    }
}

/// Exact optimum under `objective` by scanning every nonempty coalition of
/// agents with positive endowment. For a fixed `S`, the cheapest valid rate
/// is `max(0, max_{i∈S} l_i / e(S) - 1)`; `S` is feasible iff that rate is
/// below `rho_bar` and the matched total stays below every member's upper
/// bound. Ties go to the smaller coalition bitmask.
pub fn oracle_matching(game: &GameInstance, objective: Objective) -> Option<MatchingPlan> {
    // A zero-endowment member would need (1 + rho)·e(S) < tau, impossible
    // once the project is funded.
    let agents: Vec<usize> = (0..game.len())
        .filter(|&i| !game.endowment(i).is_zero())
        .collect();
    let scaled = ScaledGame::new(game);
    let weights = scaled.weights(&agents);
    let max_m = game.max_reward_level();
    let (cap_numer, cap_denom) = (max_m.numer(), max_m.denom());

    let best_in = |range| {
        let mut best: Option<(Rational, u64)> = None;
        let _ = scan_range(&weights, range, |mask, sum| {
            if mask == 0 {
                return ControlFlow::Continue(());
            }
            let (max_lower, min_endowment) =
                member_extremes(mask, &agents, &scaled.lower, &scaled.endowment);
            // Matched total (1 + rho)·e(S) at the cheapest rate.
            let funded: &BigInt = max_lower.max(sum);
            // rho < rho_bar  <=>  funded · max_m < e(S)
            if funded * cap_numer >= sum * cap_denom {
                return ControlFlow::Continue(());
            }
            // funded < tau + funded · e_min / e(S)
            if (funded - &scaled.tau) * sum >= funded * min_endowment {
                return ControlFlow::Continue(());
            }
            let value = match objective {
                Objective::Cost => Rational::from_integer(funded - sum),
                Objective::Rate => Rational::new(funded.clone(), sum.clone()),
            };
            if best.as_ref().is_none_or(|(v, _)| &value < v) {
                best = Some((value, mask));
            }
            ControlFlow::Continue(())
        });
        best
    };

    let (_, mask) = par_chunks(agents.len(), best_in)
        .into_iter()
        .flatten()
        .reduce(|best, next| if next.0 < best.0 { next } else { best })?;
    let coalition = Coalition::from_sorted_unchecked(game, expand(mask, &agents));
    let max_lower = coalition
        .members()
        .iter()
        .map(|&i| game.bounds(i).expect("member in range").lower)
        .max()
        .expect("nonempty");
    let rate = if &max_lower > coalition.total() {
        max_lower / coalition.total() - Rational::one()
    } else {
        Rational::zero()
    };
    Some(MatchingPlan::new(coalition, rate))
}

/// Re-expresses a valid external plan as a matching plan of equal cost:
/// `rho = delta / e(S)`. Requires a nonempty coalition and
/// `delta < rho_bar · e(S)`.
pub fn external_to_matching(
    game: &GameInstance,
    plan: &ExternalPlan,
) -> Result<MatchingPlan, InterventionError> {
    super::check_external(game, plan).map_err(InterventionError::InvalidPlan)?;
    if plan.coalition.is_empty() {
        return Err(InterventionError::EmptyCoalition);
    }
    let limit = rho_bar(game) * plan.coalition.total();
    if plan.delta >= limit {
        return Err(InterventionError::OverBudget {
            delta: plan.delta.clone(),
            limit,
        });
    }
    let converted = MatchingPlan::new(plan.coalition.clone(), &plan.delta / plan.coalition.total());
    debug_assert!(validate_matching(game, &converted));
    Ok(converted)
}
