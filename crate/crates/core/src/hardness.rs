//! PARTITION instances compiled into pivotal participation games.
//!
//! Values `c_1 <= ... <= c_2T` become agents with `e_i = N + M + 2c_i`
//! (`M = 100·Σc`, `N = 100·M·T`) plus two anchor agents with endowments
//! `N + 1` and `N`. With `tau = 1 + (N + 1) + ½Σe_i` and every
//! `m_i = e_i / (tau + N - 1)`, the game has a cooperative equilibrium iff
//! some `T` values sum to `½Σc`, and every equilibrium contains both anchors
//! plus such a half.

use num_bigint::BigInt;
use thiserror::Error;

use crate::equilibrium::{is_cooperative_ne, EquilibriumError, Rejection, Verdict};
use crate::model::{Agent, Coalition, GameInstance};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HardnessError {
    #[error("PARTITION needs an even, nonzero number of values, got {0}")]
    OddOrEmpty(usize),
    #[error("value {} is {value}; values must be at least 1", .index + 1)]
    NonPositiveValue { index: usize, value: i64 },
    #[error("coalition is not an equilibrium of the generated game: {0}")]
    NotAnEquilibrium(Rejection),
    #[error(transparent)]
    Equilibrium(#[from] EquilibriumError),
    #[error("positions do not describe the {expected} generated value agents")]
    MalformedPositions { expected: usize },
}

/// `2T` positive integers, kept sorted ascending. `positions[k]` is the
/// caller's 0-based index of the `k`-th smallest value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionInstance {
    values: Vec<u64>,
    positions: Vec<usize>,
}

impl PartitionInstance {
    pub fn new(values: &[i64]) -> Result<Self, HardnessError> {
        if values.is_empty() || !values.len().is_multiple_of(2) {
            return Err(HardnessError::OddOrEmpty(values.len()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, &v)| v < 1) {
            return Err(HardnessError::NonPositiveValue { index, value });
        }
        let mut positions: Vec<usize> = (0..values.len()).collect();
        positions.sort_by_key(|&k| (values[k], k));
        Ok(Self {
            values: positions.iter().map(|&k| values[k] as u64).collect(),
            positions,
        })
    }

    /// Sorted values.
    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn positions(&self) -> &[usize] {
        &self.positions
    }

    /// `T`, half the number of values.
    pub fn half_len(&self) -> usize {
        self.values.len() / 2
    }

    pub fn total(&self) -> u64 {
        self.values.iter().sum()
    }
}

/// Construction constants kept for decoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionMeta {
    pub t: usize,
    pub m: BigInt,
    pub n: BigInt,
    pub tau: Rational,
    /// Caller's 0-based value index for each of the first `2T` agents.
    pub positions: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReductionArtifact {
    pub game: GameInstance,
    pub meta: ReductionMeta,
}

pub fn gen_from_partition(p: &PartitionInstance) -> ReductionArtifact {
    let t = p.half_len();
    let m = BigInt::from(100u64) * BigInt::from(p.total());
    let n = BigInt::from(100u64) * &m * BigInt::from(t);
    let mut endowments: Vec<BigInt> = p
        .values
        .iter()
        .map(|&c| &n + &m + BigInt::from(2 * c))
        .collect();
    endowments.push(&n + 1u32);
    endowments.push(n.clone());

    let value_total: BigInt = endowments[..2 * t].iter().sum();
    let tau = Rational::from_integer(BigInt::from(1u32) + &endowments[2 * t])
        + Rational::new(value_total, BigInt::from(2u32));
    let denominator = &tau + Rational::from_integer(&n - 1u32);
    let agents = endowments
        .into_iter()
        .map(|e| {
            let e = Rational::from_integer(e);
            let reward = &e / &denominator;
            Agent::new(e, reward)
        })
        .collect();
    let game = GameInstance::new(tau.clone(), agents).expect("construction yields a valid game");
    ReductionArtifact {
        game,
        meta: ReductionMeta {
            t,
            m,
            n,
            tau,
            positions: p.positions.clone(),
        },
    }
}

/// Caller-facing (0-based, ascending) indices of the values chosen by an
/// equilibrium `coalition` of the generated game.
pub fn extract_partition(
    art: &ReductionArtifact,
    coalition: &Coalition,
) -> Result<Vec<usize>, HardnessError> {
    let value_agents = 2 * art.meta.t;
    if art.meta.positions.len() != value_agents || art.game.len() != value_agents + 2 {
        return Err(HardnessError::MalformedPositions {
            expected: value_agents,
        });
    }
    if let Verdict::Rejected(rejection) = is_cooperative_ne(&art.game, coalition)? {
        return Err(HardnessError::NotAnEquilibrium(rejection));
    }
    let mut chosen: Vec<usize> = coalition
        .members()
        .iter()
        .filter(|&&i| i < value_agents)
        .map(|&i| art.meta.positions[i])
        .collect();
    chosen.sort_unstable();
    Ok(chosen)
}
