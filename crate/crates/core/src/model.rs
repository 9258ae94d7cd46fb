//! Game instances, coalitions, utilities and per-agent bounds.
//!
//! Agents are addressed by 0-based index inside the library. Documents and
//! the command line use 1-based positions; conversion happens at that
//! boundary only.

use std::fmt;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::rational::{is_strictly_between_zero_and_one, Rational};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("threshold tau must be positive, got {0}")]
    NonPositiveThreshold(Rational),
    #[error("instance has no agents")]
    NoAgents,
    #[error("agent {}: {field} {value} {reason}", .index + 1)]
    InvalidAgent {
        index: usize,
        field: &'static str,
        value: Rational,
        reason: &'static str,
    },
    #[error("agent index {} out of range for {n} agents", .index + 1)]
    AgentOutOfRange { index: usize, n: usize },
    #[error("agent {} listed twice in coalition", .index + 1)]
    DuplicateMember { index: usize },
    #[error("agent positions are 1-based, got 0")]
    ZeroPosition,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Agent {
    pub endowment: Rational,
    pub reward_level: Rational,
}

impl Agent {
    pub fn new(endowment: Rational, reward_level: Rational) -> Self {
        Self {
            endowment,
            reward_level,
        }
    }
}

/// A validated instance `(e, m, tau)`: `tau > 0`, `e_i >= 0`, `0 < m_i < 1`,
/// at least one agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GameInstance {
    tau: Rational,
    agents: Vec<Agent>,
}

impl GameInstance {
    pub fn new(tau: Rational, agents: Vec<Agent>) -> Result<Self, ModelError> {
        if !tau.is_positive() {
            return Err(ModelError::NonPositiveThreshold(tau));
        }
        if agents.is_empty() {
            return Err(ModelError::NoAgents);
        }
        for (index, agent) in agents.iter().enumerate() {
            if agent.endowment.is_negative() {
                return Err(ModelError::InvalidAgent {
                    index,
                    field: "endowment",
                    value: agent.endowment.clone(),
                    reason: "must be non-negative",
                });
            }
            if !is_strictly_between_zero_and_one(&agent.reward_level) {
                return Err(ModelError::InvalidAgent {
                    index,
                    field: "reward_level",
                    value: agent.reward_level.clone(),
                    reason: "must lie strictly between 0 and 1",
                });
            }
        }
        Ok(Self { tau, agents })
    }

    /// Builds an instance from parallel endowment / reward-level slices.
    pub fn from_parts(
        tau: Rational,
        endowments: &[Rational],
        reward_levels: &[Rational],
    ) -> Result<Self, ModelError> {
        assert_eq!(
            endowments.len(),
            reward_levels.len(),
            "endowment and reward-level lists differ in length"
        );
        let agents = endowments
            .iter()
            .zip(reward_levels)
            .map(|(e, m)| Agent::new(e.clone(), m.clone()))
            .collect();
        Self::new(tau, agents)
    }

    pub fn tau(&self) -> &Rational {
        &self.tau
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    pub fn len(&self) -> usize {
        self.agents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.agents.is_empty()
    }

    pub fn endowment(&self, i: usize) -> &Rational {
        &self.agents[i].endowment
    }

    pub fn reward_level(&self, i: usize) -> &Rational {
        &self.agents[i].reward_level
    }

    pub fn check_index(&self, i: usize) -> Result<(), ModelError> {
        if i < self.len() {
            Ok(())
        } else {
            Err(ModelError::AgentOutOfRange {
                index: i,
                n: self.len(),
            })
        }
    }

    pub fn total_endowment(&self) -> Rational {
        self.agents.iter().map(|a| &a.endowment).sum()
    }

    pub fn max_endowment(&self) -> Rational {
        self.agents
            .iter()
            .map(|a| &a.endowment)
            .max()
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn max_reward_level(&self) -> &Rational {
        self.agents
            .iter()
            .map(|a| &a.reward_level)
            .max()
            .expect("instances have at least one agent")
    }

    /// `(l_i, u_i)` for agent `i`; see [`AgentBounds`].
    pub fn bounds(&self, i: usize) -> Result<AgentBounds, ModelError> {
        self.check_index(i)?;
        Ok(AgentBounds::of(&self.tau, &self.agents[i]))
    }

    /// Bounds of every agent, in index order.
    pub fn all_bounds(&self) -> Vec<AgentBounds> {
        self.agents
            .iter()
            .map(|a| AgentBounds::of(&self.tau, a))
            .collect()
    }

    /// Indices of agents with `l_i < u_i`.
    pub fn admissible_agents(&self) -> Vec<usize> {
        self.all_bounds()
            .iter()
            .enumerate()
            .filter(|(_, b)| b.is_admissible())
            .map(|(i, _)| i)
            .collect()
    }

    /// Sum of the endowments of `members` (no range check).
    pub(crate) fn sum_of<'a>(&self, members: impl IntoIterator<Item = &'a usize>) -> Rational {
        members
            .into_iter()
            .map(|&i| &self.agents[i].endowment)
            .sum()
    }
}

/// Participation interval for one agent: a member `i` of a cooperative
/// equilibrium needs `lower <= e(S) < upper`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AgentBounds {
    /// `max{tau, e_i / m_i}`
    pub lower: Rational,
    /// `tau + e_i`
    pub upper: Rational,
}

impl AgentBounds {
    pub fn of(tau: &Rational, agent: &Agent) -> Self {
        let ratio = &agent.endowment / &agent.reward_level;
        let lower = if &ratio > tau { ratio } else { tau.clone() };
        Self {
            lower,
            upper: tau + &agent.endowment,
        }
    }

    pub fn is_admissible(&self) -> bool {
        self.lower < self.upper
    }

    /// `lower <= total < upper`.
    pub fn contains(&self, total: &Rational) -> bool {
        &self.lower <= total && total < &self.upper
    }
}

/// A set of participating agents together with its total endowment `e(S)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Coalition {
    members: Vec<usize>,
    total: Rational,
}

impl Coalition {
    pub fn empty() -> Self {
        Self {
            members: Vec::new(),
            total: Rational::zero(),
        }
    }

    /// Validates indices against `game`; duplicates are rejected.
    pub fn new(
        game: &GameInstance,
        members: impl IntoIterator<Item = usize>,
    ) -> Result<Self, ModelError> {
        let mut members: Vec<usize> = members.into_iter().collect();
        for &i in &members {
            game.check_index(i)?;
        }
        members.sort_unstable();
        if let Some(w) = members.windows(2).find(|w| w[0] == w[1]) {
            return Err(ModelError::DuplicateMember { index: w[0] });
        }
        let total = game.sum_of(&members);
        Ok(Self { members, total })
    }

    /// Coalition whose members are the set bits of `mask`.
    pub fn from_mask(game: &GameInstance, mask: u64) -> Self {
        let members: Vec<usize> = (0..64).filter(|b| mask >> b & 1 == 1).collect();
        assert!(
            members.last().is_none_or(|&i| i < game.len()),
            "mask {mask:#b} names agents beyond n = {}",
            game.len()
        );
        let total = game.sum_of(&members);
        Self { members, total }
    }

    /// Every agent of `game`.
    pub fn grand(game: &GameInstance) -> Self {
        Self {
            members: (0..game.len()).collect(),
            total: game.total_endowment(),
        }
    }

    pub(crate) fn from_sorted_unchecked(game: &GameInstance, members: Vec<usize>) -> Self {
        debug_assert!(members.windows(2).all(|w| w[0] < w[1]));
        let total = game.sum_of(&members);
        Self { members, total }
    }

    /// Sorted member indices.
    pub fn members(&self) -> &[usize] {
        &self.members
    }

    /// `e(S)`.
    pub fn total(&self) -> &Rational {
        &self.total
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    /// Bitmask of members; `None` if some index is 64 or more.
    pub fn mask(&self) -> Option<u64> {
        self.members
            .iter()
            .try_fold(0u64, |acc, &i| (i < 64).then(|| acc | 1 << i))
    }

    /// `S ∪ {i}`; unchanged if already a member.
    pub fn with(&self, game: &GameInstance, i: usize) -> Self {
        match self.members.binary_search(&i) {
            Ok(_) => self.clone(),
            Err(pos) => {
                let mut members = self.members.clone();
                members.insert(pos, i);
                Self {
                    members,
                    total: &self.total + game.endowment(i),
                }
            }
        }
    }

    /// `S \ {i}`; unchanged if not a member.
    pub fn without(&self, game: &GameInstance, i: usize) -> Self {
        match self.members.binary_search(&i) {
            Ok(pos) => {
                let mut members = self.members.clone();
                members.remove(pos);
                Self {
                    members,
                    total: &self.total - game.endowment(i),
                }
            }
            Err(_) => self.clone(),
        }
    }

    /// 1-based positions, as used in documents and on the command line.
    pub fn positions(&self) -> Vec<usize> {
        self.members.iter().map(|i| i + 1).collect()
    }

    /// Builds a coalition from 1-based positions.
    pub fn from_positions(game: &GameInstance, positions: &[usize]) -> Result<Self, ModelError> {
        let members = positions
            .iter()
            .map(|&p| p.checked_sub(1).ok_or(ModelError::ZeroPosition))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(game, members)
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, p) in self.positions().iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str("}")
    }
}

/// `U_i(S) = e_i·1[i ∉ S] + m_i·e(S)·1[e(S) >= tau]`.
pub fn utility(
    game: &GameInstance,
    coalition: &Coalition,
    i: usize,
) -> Result<Rational, ModelError> {
    game.check_index(i)?;
    Ok(utility_at(
        game,
        coalition.total(),
        coalition.contains(i),
        i,
    ))
}

/// Utility of agent `i` given the funded total and its own membership.
pub(crate) fn utility_at(
    game: &GameInstance,
    total: &Rational,
    member: bool,
    i: usize,
) -> Rational {
    let kept = if member {
        Rational::zero()
    } else {
        game.endowment(i).clone()
    };
    if total >= game.tau() {
        kept + game.reward_level(i) * total
    } else {
        kept
    }
}

/// `(l_i, u_i)` for agent `i`.
pub fn bounds(game: &GameInstance, i: usize) -> Result<AgentBounds, ModelError> {
    game.bounds(i)
}
