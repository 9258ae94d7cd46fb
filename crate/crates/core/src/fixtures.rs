//! Test-only helpers: named instances and proptest strategies.

pub use crate::instances::*;

use proptest::prelude::*;

use crate::model::{Agent, GameInstance};
use crate::rational::{ratio, Rational};

/// Non-negative rational with a small denominator, at most `max`.
pub fn arb_endowment(max: i64) -> impl Strategy<Value = Rational> {
    (1i64..=4).prop_flat_map(move |d| (0..=max * d).prop_map(move |n| ratio(n, d)))
}

pub fn arb_reward_level() -> impl Strategy<Value = Rational> {
    (2i64..=12).prop_flat_map(|d| (1..d).prop_map(move |n| ratio(n, d)))
}

/// Games with `1..=max_n` agents, endowments in `[0, 20]`, and a threshold
/// in `(0, 1.2 * sum(e)]` (or `(0, 5]` when every endowment is zero).
pub fn arb_game(max_n: usize) -> impl Strategy<Value = GameInstance> {
    prop::collection::vec((arb_endowment(20), arb_reward_level()), 1..=max_n).prop_flat_map(
        |pairs| {
            let total: Rational = pairs.iter().map(|(e, _)| e).sum();
            let cap = (total * ratio(6, 5)).ceil().to_integer();
            let cap: i64 = i64::try_from(cap).unwrap().max(5);
            (1i64..=4 * cap).prop_map(move |t| {
                let agents = pairs
                    .iter()
                    .map(|(e, m)| Agent::new(e.clone(), m.clone()))
                    .collect();
                GameInstance::new(ratio(t, 4), agents).unwrap()
            })
        },
    )
}

/// Integer endowments `1..=6` with reward levels over a small denominator
/// set: many exact boundary hits.
pub fn arb_tight_game(max_n: usize) -> impl Strategy<Value = GameInstance> {
    prop::collection::vec((1i64..=6, 1i64..=4), 1..=max_n).prop_flat_map(|pairs| {
        let total: i64 = pairs.iter().map(|(e, _)| e).sum();
        (1i64..=total).prop_map(move |tau| {
            let agents = pairs
                .iter()
                .map(|&(e, k)| Agent::new(ratio(e, 1), ratio(k, 5)))
                .collect();
            GameInstance::new(ratio(tau, 1), agents).unwrap()
        })
    })
}
