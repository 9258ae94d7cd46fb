//! Exact solvers for pivotal participation games.
//!
//! Each agent either contributes its whole endowment `e_i` or nothing; the
//! project succeeds when contributions reach the threshold `tau`, and then
//! every agent receives `m_i` times the funded total. The crate decides and
//! enumerates cooperative Nash equilibria, solves the low-ratio and balanced
//! special cases in polynomial time, plans external-investment and
//! matching-fund interventions, and compiles PARTITION instances into
//! equilibrium-existence stress instances.
//!
//! All arithmetic is exact ([`Rational`]); there are no tolerances.

pub mod cli;
pub mod document;
pub mod equilibrium;
pub mod hardness;
pub mod instances;
pub mod interventions;
pub mod model;
pub mod rational;
pub mod solvers;
pub mod subsets;

#[cfg(test)]
pub(crate) mod fixtures;

pub use equilibrium::{
    best_response_is_participate, certify_by_deviation, deviation_check,
    enumerate_by_deviation_check, enumerate_cooperative_ne, is_cooperative_ne, BoundSide,
    Certification, EquilibriumError, EquilibriumReport, MemberSlack, Rejection, Verdict,
};
pub use model::{bounds, utility, Agent, AgentBounds, Coalition, GameInstance, ModelError};
pub use rational::{parse_rational, Rational};
