//! Minimum-cost interventions that make cooperation an equilibrium.
//!
//! Two levers are available. An *external investment* `delta` is added to
//! the funded total before the threshold test; its cost is `delta`. A
//! *matching fund* at rate `rho` turns contributions `e(S)` into
//! `(1 + rho)·e(S)`; its cost is `rho·e(S)`, and the rate must stay below
//! `rho_bar = 1/max m_i - 1`.
//!
//! Exact optimisation is NP-hard for both, so each lever comes with a
//! polynomial planner carrying an additive guarantee (at most the largest
//! endowment above the optimum) and an exhaustive oracle for small games.

mod external;
mod matching;

use std::fmt;

use num_traits::One;
use thiserror::Error;

use crate::equilibrium::BoundSide;
use crate::model::GameInstance;
use crate::rational::Rational;

pub use external::{
    check_external, oracle_external, plan_external, plan_external_traced, validate_external,
    ExternalCandidate, ExternalPlan, ExternalSearch,
};
pub use matching::{
    check_matching, external_to_matching, oracle_matching, plan_matching, plan_matching_traced,
    validate_matching, MatchingCandidate, MatchingPlan, MatchingSearch,
};

/// What a matching-fund search minimises.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Objective {
    /// `rho · e(S)`
    #[default]
    Cost,
    /// `rho`
    Rate,
}

/// Budget cap on the matching rate: `1 / max_i m_i - 1`.
pub fn rho_bar(game: &GameInstance) -> Rational {
    game.max_reward_level().recip() - Rational::one()
}

/// Why a plan fails to make its coalition an equilibrium.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Error)]
pub enum PlanViolation {
    #[error("intervention amount {0} is negative")]
    NegativeAmount(Rational),
    #[error("empty coalition needs delta >= tau = {tau}, got {delta}")]
    EmptyBelowThreshold { delta: Rational, tau: Rational },
    #[error("matching funds need at least one contributor")]
    EmptyCoalition,
    #[error("rate {rate} is not below the budget cap {cap}")]
    OverBudget { rate: Rational, cap: Rational },
    #[error("agent {} does not exist", .0 + 1)]
    UnknownAgent(usize),
    #[error("{0}")]
    Bound(BoundViolation),
}

/// A member whose interval excludes the funded total.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BoundViolation {
    pub agent: usize,
    pub side: BoundSide,
    pub funded: Rational,
    pub bound: Rational,
}

impl fmt::Display for BoundViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let relation = match self.side {
            BoundSide::Lower => "is below the lower bound",
            BoundSide::Upper => "reaches the upper bound",
        };
        write!(
            f,
            "agent {}: funded total {} {relation} {}",
            self.agent + 1,
            self.funded,
            self.bound
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InterventionError {
    #[error("external plan is not valid: {0}")]
    InvalidPlan(PlanViolation),
    #[error("cannot convert an external plan with an empty coalition")]
    EmptyCoalition,
    #[error("delta {delta} is not below rho_bar * e(S) = {limit}")]
    OverBudget { delta: Rational, limit: Rational },
}
