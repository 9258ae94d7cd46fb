//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use common::*;
use pivotal::hardness::{extract_partition, gen_from_partition, PartitionInstance};
use pivotal::instances::{free_rider, overshoot, priced_out, two_tier};
use pivotal::interventions::{
    check_matching, oracle_external, oracle_matching, plan_external, plan_matching,
    plan_matching_traced, rho_bar, validate_external, validate_matching, ExternalPlan,
    MatchingPlan, Objective,
};
use pivotal::solvers::{
    decide_balanced_traced, minimal_coalition_sizes, solve_low_ratio_with_order,
};
use pivotal::{
    certify_by_deviation, enumerate_by_deviation_check, enumerate_cooperative_ne,
    is_cooperative_ne, utility, Agent, Coalition, GameInstance, Rational,
};

const CORPUS_SEED: u64 = 0x5eed_0006;
const CORPUS_SIZE: usize = 1000;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn coalition(game: &GameInstance, members: &[usize]) -> Coalition {
    Coalition::new(game, members.iter().copied()).unwrap()
}

fn corpus() -> Vec<GameInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(CORPUS_SEED);
    (0..CORPUS_SIZE)
        .map(|_| random_game(&mut rng, 10))
        .collect()
}

fn free_rider_reproduction() -> Outcome {
    let start = Instant::now();
    let game = free_rider();
    let found = enumerate_cooperative_ne(&game, None);
    let reward = utility(&game, &Coalition::grand(&game), 3).unwrap();
    let elapsed = start.elapsed();
    outcome(
        found.is_empty() && reward == ratio(15, 2) && within(elapsed, Duration::from_secs(1)),
        format!(
            "{} equilibria, U_4(all) = {reward}, {elapsed:.2?}",
            found.len()
        ),
    )
}

fn two_tier_reproduction() -> Outcome {
    let start = Instant::now();
    let game = two_tier();
    let found = enumerate_cooperative_ne(&game, None);
    let elapsed = start.elapsed();
    let small = |s: &Coalition| s.members().iter().all(|&i| i < 10);
    let large = |s: &Coalition| s.members().iter().all(|&i| i >= 10);
    let six_small = found.iter().filter(|s| small(s) && s.len() == 6).count();
    let three_large = found.iter().filter(|s| large(s) && s.len() == 3).count();
    let mixed = found.iter().filter(|s| !small(s) && !large(s)).count();
    outcome(
        found.len() == 220
            && six_small == 210
            && three_large == 10
            && mixed == 0
            && within(elapsed, Duration::from_secs(5)),
        format!(
            "{} equilibria: {six_small} six-small, {three_large} three-large, {mixed} mixed, {elapsed:.2?}",
            found.len()
        ),
    )
}

fn intervention_pair() -> Outcome {
    let start = Instant::now();
    let game = priced_out();
    let oe = oracle_external(&game);
    let om = oracle_matching(&game, Objective::Cost);
    let pe = plan_external(&game);
    let pm = plan_matching(&game, Objective::Cost);
    let elapsed = start.elapsed();
    let expected = MatchingPlan::new(Coalition::grand(&game), ratio(2, 3));
    let pass = oe.delta == int(11)
        && om.as_ref() == Some(&expected)
        && om.as_ref().is_some_and(|p| p.cost() == int(6))
        && pe.delta == int(11)
        && pm.as_ref().is_some_and(|p| p.cost() == int(6))
        && within(elapsed, Duration::from_secs(1));
    outcome(
        pass,
        format!(
            "oracle delta {}, oracle matching {:?}, plan delta {}, plan matching cost {:?}, {elapsed:.2?}",
            oe.delta,
            om.map(|p| (p.coalition.to_string(), p.rate.to_string(), p.cost().to_string())),
            pe.delta,
            pm.map(|p| p.cost().to_string()),
        ),
    )
}

fn overshoot_examples() -> Outcome {
    let game = overshoot();
    let base = validate_external(&game, &ExternalPlan::new(Coalition::grand(&game), int(0)));
    let external_rejected = (0..8u64)
        .filter(|&m| {
            !validate_external(
                &game,
                &ExternalPlan::new(Coalition::from_mask(&game, m), int(2)),
            )
        })
        .count();
    let matching_rejected = (0..8u64)
        .filter(|&m| {
            !validate_matching(
                &game,
                &MatchingPlan::new(Coalition::from_mask(&game, m), ratio(1, 4)),
            )
        })
        .count();
    outcome(
        base && external_rejected == 8 && matching_rejected == 8,
        format!(
            "delta 0 with {{1,2,3}} valid: {base}; delta 2 rejected for {external_rejected}/8; rate 1/4 rejected for {matching_rejected}/8"
        ),
    )
}

/// The rate-optimal plan ({1,4}, 7/11) is required as stated. It does not
/// satisfy the participation interval of agent 1, so this part fails.
fn free_rider_matching() -> Outcome {
    let game = free_rider();
    let scan = matching_scan(&game);
    let best = |objective| {
        scan.iter()
            .min_by(|a, b| objective_value(a, objective).cmp(&objective_value(b, objective)))
            .cloned()
    };

    let by_rate = oracle_matching(&game, Objective::Rate);
    let required_rate = MatchingPlan::new(coalition(&game, &[0, 3]), ratio(7, 11));
    let rate_ok = by_rate.as_ref() == Some(&required_rate);
    let required_violation = check_matching(&game, &required_rate)
        .err()
        .map(|v| v.to_string())
        .unwrap_or_else(|| "valid".into());

    let by_cost = oracle_matching(&game, Objective::Cost);
    let cost_ok = by_cost == best(Objective::Cost);

    // The trace candidate ({4}, 1/9) must not win; the scan decides.
    let trace = plan_matching_traced(&game, Objective::Cost);
    let hand_trace = MatchingPlan::new(coalition(&game, &[3]), ratio(1, 9));
    let reconciled = !validate_matching(&game, &hand_trace)
        && trace.candidates.iter().all(|c| c.plan != hand_trace)
        && trace.plan == best(Objective::Cost)
        && trace.plan.as_ref().is_some_and(|p| {
            p.coalition.members() == [0, 1, 2] && p.rate == ratio(2, 3) && p.cost() == int(4)
        });

    let show = |p: &Option<MatchingPlan>| {
        p.as_ref()
            .map(|p| format!("({}, {})", p.coalition, p.rate))
            .unwrap_or_else(|| "none".into())
    };
    outcome(
        rate_ok && cost_ok && reconciled,
        format!(
            "rate oracle {} (scan {}), required ({{1,4}}, 7/11): {required_violation}; cost oracle {} matches scan: {cost_ok}; planner reconciled: {reconciled}",
            show(&by_rate),
            show(&best(Objective::Rate)),
            show(&by_cost),
        ),
    )
}

fn oracle_equivalence() -> Outcome {
    let start = Instant::now();
    let games = corpus();
    let results: Vec<(bool, bool, usize)> = games
        .par_iter()
        .map(|game| {
            let characterized = enumerate_cooperative_ne(game, None);
            let deviating = enumerate_by_deviation_check(game);
            // Zero-endowment agents are indifferent members; they are
            // excluded from cooperative equilibria by definition.
            let positive: Vec<Coalition> = deviating
                .iter()
                .filter(|s| s.members().iter().all(|&i| !game.endowment(i).is_zero()))
                .cloned()
                .collect();
            let zero_only = deviating.len() - positive.len();
            let agree = characterized == positive
                && characterized
                    .iter()
                    .all(|s| certify_by_deviation(game, s).is_some());
            (agree, has_zero_endowment(game), zero_only)
        })
        .collect();
    let elapsed = start.elapsed();
    let discrepancies = results.iter().filter(|r| !r.0).count();
    let strict: Vec<_> = results.iter().filter(|r| !r.1).collect();
    let strict_discrepancies = strict.iter().filter(|r| !r.0).count();
    let with_zero = results.len() - strict.len();
    let zero_member_profiles: usize = results.iter().map(|r| r.2).sum();
    let nonempty = games
        .iter()
        .filter(|g| !enumerate_cooperative_ne(g, Some(1)).is_empty())
        .count();
    outcome(
        discrepancies == 0 && within(elapsed, Duration::from_secs(120)),
        format!(
            "{} instances ({nonempty} with equilibria): {discrepancies} discrepancies; {} zero-free compared strictly ({strict_discrepancies} discrepancies); {with_zero} with zero endowments, {zero_member_profiles} indifferent zero-member profiles excluded; {elapsed:.2?}",
            results.len(),
            strict.len(),
        ),
    )
}

fn approximation_bounds() -> Outcome {
    let start = Instant::now();
    let games = corpus();
    let guaranteed = AtomicUsize::new(0);
    let violations: Vec<String> = games
        .par_iter()
        .enumerate()
        .flat_map_iter(|(k, game)| {
            let mut bad = Vec::new();
            let max_e = game.max_endowment();
            let pe = plan_external(game);
            let oe = oracle_external(game);
            if !validate_external(game, &pe) || !validate_external(game, &oe) {
                bad.push(format!("instance {k}: invalid external plan"));
            }
            if pe.delta > max_e.clone().max(oe.delta.clone()) {
                bad.push(format!(
                    "instance {k}: plan delta {} vs oracle {}",
                    pe.delta, oe.delta
                ));
            }
            let pm = plan_matching(game, Objective::Cost);
            let om = oracle_matching(game, Objective::Cost);
            for plan in pm.iter().chain(om.iter()) {
                if !validate_matching(game, plan) {
                    bad.push(format!("instance {k}: invalid matching plan"));
                }
            }
            if rho_bar(game) >= Rational::one() {
                if let Some(om) = &om {
                    guaranteed.fetch_add(1, Ordering::Relaxed);
                    match &pm {
                        None => bad.push(format!("instance {k}: planner found no matching plan")),
                        Some(pm) => {
                            if pm.cost() > max_e.clone().max(om.cost()) {
                                bad.push(format!("instance {k}: matching cost {}", pm.cost()));
                            }
                            if pm.rate > Rational::one().max(om.rate.clone()) {
                                bad.push(format!("instance {k}: matching rate {}", pm.rate));
                            }
                        }
                    }
                }
            }
            bad
        })
        .collect();
    let elapsed = start.elapsed();
    outcome(
        violations.is_empty(),
        format!(
            "{} instances ({} under the matching guarantee), {} violations{}; {elapsed:.2?}",
            games.len(),
            guaranteed.into_inner(),
            violations.len(),
            violations
                .first()
                .map(|v| format!(" (first: {v})"))
                .unwrap_or_default()
        ),
    )
}

/// Low-ratio game: `tau` in `(max e, sum e]` and `m_i >= e_i / tau`.
fn low_ratio_game(rng: &mut ChaCha8Rng) -> GameInstance {
    loop {
        let n = rng.gen_range(2..=10);
        let e: Vec<Rational> = (0..n).map(|_| endowment(rng, 20)).collect();
        let total: Rational = e.iter().sum();
        let max = e.iter().max().unwrap().clone();
        if max >= total {
            continue;
        }
        let k = rng.gen_range(1..=100);
        let tau = &max + (&total - &max) * ratio(k, 100);
        let agents = e
            .into_iter()
            .map(|e| {
                let floor = &e / &tau;
                let d = rng.gen_range(2..=20);
                let m = &floor + (Rational::one() - &floor) * ratio(rng.gen_range(0..d), d);
                let m = if m.is_zero() { ratio(1, d) } else { m };
                Agent::new(e, m)
            })
            .collect();
        return GameInstance::new(tau, agents).unwrap();
    }
}

/// Every minimal coalition has exactly `k` members: endowments lie in
/// `[b, b + spread]` with `(k - 1)·max e < tau <= k·min e`.
fn balanced_game(rng: &mut ChaCha8Rng) -> GameInstance {
    loop {
        let n = rng.gen_range(1..=12);
        let k = rng.gen_range(1..=n);
        let base = rng.gen_range(4..=20i64);
        let spread = if k == 1 {
            base
        } else {
            (base - 1) / (k as i64 - 1)
        };
        let e: Vec<i64> = (0..n).map(|_| base + rng.gen_range(0..=spread)).collect();
        let lo = (k as i64 - 1) * e.iter().max().unwrap();
        let hi = k as i64 * e.iter().min().unwrap();
        if lo >= hi {
            continue;
        }
        // tau in (lo, hi] over quarters
        let tau = ratio(4 * lo + rng.gen_range(1..=4 * (hi - lo)), 4);
        let agents = e
            .iter()
            .map(|&e| Agent::new(int(e), reward_level(rng)))
            .collect();
        return GameInstance::new(tau, agents).unwrap();
    }
}

fn special_cases() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_0008);
    let mut low_failures = 0;
    for _ in 0..500 {
        let game = low_ratio_game(&mut rng);
        for _ in 0..5 {
            let mut order: Vec<usize> = (0..game.len()).collect();
            order.shuffle(&mut rng);
            let accepted = match solve_low_ratio_with_order(&game, &order) {
                Ok(Some(s)) => is_cooperative_ne(&game, &s).is_ok_and(|v| v.is_accepted()),
                _ => false,
            };
            if !accepted {
                low_failures += 1;
            }
        }
    }

    let mut balanced_failures = 0;
    let mut with_equilibrium = 0;
    let mut sizes = BTreeSet::new();
    for _ in 0..300 {
        let game = balanced_game(&mut rng);
        let minimal = minimal_coalition_sizes(&game).unwrap();
        sizes.extend(minimal.iter().copied());
        let run = decide_balanced_traced(&game, true);
        let exists = !enumerate_cooperative_ne(&game, Some(1)).is_empty();
        with_equilibrium += usize::from(exists);
        let agree = minimal.len() == 1
            && run.is_ok_and(|run| match run.coalition {
                Some(s) => exists && is_cooperative_ne(&game, &s).is_ok_and(|v| v.is_accepted()),
                None => !exists,
            });
        if !agree {
            balanced_failures += 1;
        }
    }
    outcome(
        low_failures == 0 && balanced_failures == 0,
        format!(
            "low ratio: 500 instances x 5 orders, {low_failures} failures; balanced: 300 instances (minimal sizes {sizes:?}, {with_equilibrium} with equilibria), {balanced_failures} disagreements"
        ),
    )
}

fn reduction_round_trip() -> Outcome {
    let start = Instant::now();
    let mut inputs: Vec<Vec<i64>> = Vec::new();
    for t in 1..=3u32 {
        let len = 2 * t;
        for code in 0..6usize.pow(len) {
            inputs.push(
                (0..len)
                    .map(|k| (code / 6usize.pow(k) % 6 + 1) as i64)
                    .collect(),
            );
        }
    }
    let failures: Vec<String> = inputs
        .par_iter()
        .filter_map(|values| {
            let art = gen_from_partition(&PartitionInstance::new(values).unwrap());
            let found = enumerate_cooperative_ne(&art.game, None);
            if found.is_empty() == has_equal_halves(values) {
                return Some(format!("{values:?}: existence mismatch"));
            }
            let t = values.len() / 2;
            let total: i64 = values.iter().sum();
            for s in &found {
                let decoded = match extract_partition(&art, s) {
                    Ok(d) => d,
                    Err(e) => return Some(format!("{values:?}: {e}")),
                };
                let sum: i64 = decoded.iter().map(|&k| values[k]).sum();
                if decoded.len() != t || 2 * sum != total {
                    return Some(format!("{values:?}: decoded {decoded:?}"));
                }
            }
            None
        })
        .collect();
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && within(elapsed, Duration::from_secs(120)),
        format!(
            "{} PARTITION inputs, {} failures{}; {elapsed:.2?}",
            inputs.len(),
            failures.len(),
            failures
                .first()
                .map(|f| format!(" (first: {f})"))
                .unwrap_or_default()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("free-rider instance", free_rider_reproduction),
        ("two-tier instance", two_tier_reproduction),
        ("priced-out intervention pair", intervention_pair),
        ("overshooting interventions", overshoot_examples),
        ("free-rider matching optima", free_rider_matching),
        ("oracle equivalence", oracle_equivalence),
        ("approximation bounds", approximation_bounds),
        ("special cases", special_cases),
        ("reduction round trip", reduction_round_trip),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        let verdict = if result.pass { "PASS" } else { "FAIL" };
        println!("criterion {} [{name}]: {verdict}: {}", k + 1, result.detail);
        failed += usize::from(!result.pass);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
