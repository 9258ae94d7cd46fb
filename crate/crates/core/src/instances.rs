//! Small named instances used throughout the test suites and the README.

use crate::model::GameInstance;
use crate::rational::{int, ratio, Rational};

fn build(tau: Rational, endowments: &[Rational], reward_levels: &[Rational]) -> GameInstance {
    GameInstance::from_parts(tau, endowments, reward_levels).expect("named instance is valid")
}

/// `e = (2,2,2,9)`, `m = (1/5,1/5,1/5,1/2)`, `tau = 10`: enough endowment,
/// yet no cooperative equilibrium.
pub fn free_rider() -> GameInstance {
    build(
        int(10),
        &[int(2), int(2), int(2), int(9)],
        &[ratio(1, 5), ratio(1, 5), ratio(1, 5), ratio(1, 2)],
    )
}

/// Fifteen agents with reward level `7/20` and `tau = 12`: agents 1..=10
/// hold 2, agents 11..=15 hold 5.
pub fn two_tier() -> GameInstance {
    let endowments: Vec<Rational> = (0..15).map(|i| int(if i < 10 { 2 } else { 5 })).collect();
    let reward_levels = vec![ratio(7, 20); 15];
    build(int(12), &endowments, &reward_levels)
}

/// `tau = 11`, `e = (3,3,3)`, `m = (1/5,1/5,1/5)`: every agent is
/// inadmissible without intervention.
pub fn priced_out() -> GameInstance {
    build(
        int(11),
        &[int(3), int(3), int(3)],
        &[ratio(1, 5), ratio(1, 5), ratio(1, 5)],
    )
}

/// `tau = 9`, `e = (4,4,4)`, `m = (4/11,4/11,4/11)`: cooperative without
/// help, broken by `delta = 2` or `rho = 1/4`.
pub fn overshoot() -> GameInstance {
    build(
        int(9),
        &[int(4), int(4), int(4)],
        &[ratio(4, 11), ratio(4, 11), ratio(4, 11)],
    )
}
