//! Seeded instance generators and independent oracles shared by the
//! integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use pivotal::interventions::{validate_matching, MatchingPlan, Objective};
use pivotal::{Agent, Coalition, GameInstance, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    ratio(n, 1)
}

/// Rational in `[0, max]` over a denominator in `1..=6`.
pub fn endowment(rng: &mut ChaCha8Rng, max: i64) -> Rational {
    let d = rng.gen_range(1..=6);
    ratio(rng.gen_range(0..=max * d), d)
}

/// Rational strictly inside `(0, 1)` over a denominator in `2..=20`.
pub fn reward_level(rng: &mut ChaCha8Rng) -> Rational {
    let d = rng.gen_range(2..=20);
    ratio(rng.gen_range(1..d), d)
}

/// `1..=max_n` agents, `e_i` in `[0, 20]`, `m_i` in `(0, 1)`, and
/// `tau` in `(0, 1.2 * sum(e)]`. Redraws when every endowment is zero.
pub fn random_game(rng: &mut ChaCha8Rng, max_n: usize) -> GameInstance {
    loop {
        let n = rng.gen_range(1..=max_n);
        let agents: Vec<Agent> = (0..n)
            .map(|_| Agent::new(endowment(rng, 20), reward_level(rng)))
            .collect();
        let total: Rational = agents.iter().map(|a| &a.endowment).sum();
        if total.is_zero() {
            continue;
        }
        // tau = 1.2 * total * k / 240 with k in 1..=240
        let k = rng.gen_range(1..=240);
        let tau = total * ratio(6, 5) * ratio(k, 240);
        return GameInstance::new(tau, agents).expect("generated game is valid");
    }
}

pub fn has_zero_endowment(game: &GameInstance) -> bool {
    game.agents().iter().any(|a| a.endowment.is_zero())
}

/// Cheapest valid rate for `s`, searched only through the validator over
/// the rates at which some member's lower bound is met with equality.
pub fn cheapest_rate_by_validation(game: &GameInstance, s: &Coalition) -> Option<MatchingPlan> {
    if s.total().is_zero() {
        return None;
    }
    let mut rates = vec![Rational::zero()];
    for &i in s.members() {
        let r = game.bounds(i).unwrap().lower / s.total() - Rational::one();
        if r > Rational::zero() {
            rates.push(r);
        }
    }
    rates
        .into_iter()
        .map(|r| MatchingPlan::new(s.clone(), r))
        .filter(|p| validate_matching(game, p))
        .min_by(|a, b| a.rate.cmp(&b.rate))
}

/// Every nonempty coalition with its cheapest valid matching plan, by
/// ascending bitmask.
pub fn matching_scan(game: &GameInstance) -> Vec<MatchingPlan> {
    (1..1u64 << game.len())
        .filter_map(|mask| cheapest_rate_by_validation(game, &Coalition::from_mask(game, mask)))
        .collect()
}

pub fn objective_value(plan: &MatchingPlan, objective: Objective) -> Rational {
    match objective {
        Objective::Cost => plan.cost(),
        Objective::Rate => plan.rate.clone(),
    }
}

/// Whether some `len/2` of `values` sum to half the total.
pub fn has_equal_halves(values: &[i64]) -> bool {
    let t = values.len() / 2;
    let total: i64 = values.iter().sum();
    (0..1u32 << values.len()).any(|mask| {
        mask.count_ones() as usize == t
            && 2 * values
                .iter()
                .enumerate()
                .filter(|(b, _)| mask >> b & 1 == 1)
                .map(|(_, v)| v)
                .sum::<i64>()
                == total
    })
}
