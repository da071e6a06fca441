//! Randomized invariants over configs and strategy profiles.

use proptest::prelude::*;

use crowdsense::agents::{agent_utility, AcceptPolicy, BidStrategy};
use crowdsense::analysis::{closed_form_homogeneous_utilities, opt_star};
use crowdsense::equilibrium::{check_pce, StrategyGrid};
use crowdsense::mechanism::ExtendedMoney;
use crowdsense::{run_game, GameConfig, Money, StrategyProfile};

fn money(v: u64) -> Money {
    Money::from_units(v)
}

prop_compose! {
    fn arb_config()(
        m in 2usize..=5,
        n in 1u32..=4,
        budget in 0u64..=600,
    )(
        thresholds in proptest::collection::vec(0u64..=30, m),
        m in Just(m),
        n in Just(n),
        budget in Just(budget),
    ) -> GameConfig {
        let _ = m;
        GameConfig::new(money(budget), n, thresholds.into_iter().map(money).collect()).unwrap()
    }
}

fn arb_bid(n: u32) -> impl Strategy<Value = BidStrategy> {
    prop_oneof![
        Just(BidStrategy::Honest),
        (0u64..=100).prop_map(|v| BidStrategy::ConstantBid(money(v))),
        (1..=n + 1, 0u64..=100)
            .prop_map(|(until, high)| BidStrategy::OverbidUntil { until, high: money(high) }),
        proptest::collection::vec(0u64..=100, n as usize)
            .prop_map(|bids| BidStrategy::Scripted(bids.into_iter().map(money).collect())),
    ]
}

fn arb_accept(n: u32) -> impl Strategy<Value = AcceptPolicy> {
    prop_oneof![
        Just(AcceptPolicy::ThresholdAccept),
        (1..=n + 1).prop_map(AcceptPolicy::RejectUntil),
        proptest::collection::vec(any::<bool>(), n as usize).prop_map(AcceptPolicy::Scripted),
    ]
}

prop_compose! {
    fn arb_game()(config in arb_config())(
        strategies in proptest::collection::vec(
            (arb_bid(config.rounds()), arb_accept(config.rounds())),
            config.num_agents(),
        ),
        config in Just(config),
    ) -> (GameConfig, StrategyProfile) {
        (config, StrategyProfile::new(strategies))
    }
}

/// Exhaustive packing optimum on small configs: best task count over all
/// per-agent task allocations 0..=N paying each agent her threshold per task.
fn brute_force_opt(config: &GameConfig) -> u64 {
    fn go(thresholds: &[Money], n: u64, remaining: Money) -> u64 {
        match thresholds.split_first() {
            None => 0,
            Some((t, rest)) => {
                let mut best = 0;
                for k in 0..=n {
                    let cost = t.mul_int(k);
                    match remaining.checked_sub(cost) {
                        Some(left) => best = best.max(k + go(rest, n, left)),
                        None => break,
                    }
                }
                best
            }
        }
    }
    go(config.true_thresholds(), config.rounds() as u64, config.budget())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn payments_never_exceed_budget((config, profile) in arb_game()) {
        let transcript = run_game(&config, &profile).unwrap();
        prop_assert!(transcript.final_budget_used() <= config.budget());
        prop_assert_eq!(transcript.total_payments(), transcript.final_budget_used());
    }

    #[test]
    fn utilities_sum_to_budget_used((config, profile) in arb_game()) {
        let transcript = run_game(&config, &profile).unwrap();
        let total: Money = (1..=config.num_agents())
            .map(|m| agent_utility(&transcript, m))
            .sum();
        prop_assert_eq!(total, transcript.final_budget_used());
    }

    #[test]
    fn transcripts_are_deterministic((config, profile) in arb_game()) {
        let a = run_game(&config, &profile).unwrap();
        let b = run_game(&config, &profile).unwrap();
        prop_assert_eq!(a.outcomes(), b.outcomes());
        prop_assert_eq!(a.final_budget_used(), b.final_budget_used());
    }

    #[test]
    fn prices_respect_budget_smoothing((config, profile) in arb_game()) {
        let transcript = run_game(&config, &profile).unwrap();
        let n = config.rounds();
        let mut used = Money::zero();
        for outcome in transcript.outcomes() {
            let remaining = config.budget().checked_sub(used).unwrap();
            let rounds_left = n - outcome.round + 1;
            prop_assert!(outcome.price <= remaining.div_int(rounds_left));
            used += outcome.payments.values().copied().sum::<Money>();
        }
    }

    #[test]
    fn calibrated_thresholds_never_increase((config, profile) in arb_game()) {
        // Re-run round by round and watch the calibrated vector.
        let mut state = crowdsense::mechanism::MechanismState::new(config.clone());
        let mut prev: Option<Vec<ExtendedMoney>> = None;
        let agents: Vec<_> = (1..=config.num_agents())
            .map(|m| crowdsense::agents::AgentProfile {
                index: m,
                true_threshold: config.threshold_of(m),
            })
            .collect();
        while !state.is_finished() {
            let round = state.round();
            let bids: Vec<Money> = agents
                .iter()
                .map(|a| {
                    crowdsense::agents::make_bid(
                        profile.bid_strategy(a.index),
                        a,
                        round,
                        state.outcomes(),
                    )
                })
                .collect();
            state
                .run_round(&bids, |m, offer, r| {
                    crowdsense::agents::decide_accept(
                        profile.accept_policy(m),
                        &agents[m - 1],
                        offer,
                        r,
                    )
                })
                .unwrap();
            let calibrated = state.calibrated().to_vec();
            if let Some(prev) = &prev {
                for (now, before) in calibrated.iter().zip(prev) {
                    prop_assert!(now <= before);
                }
            }
            prev = Some(calibrated);
        }
    }

    #[test]
    fn packing_optimum_matches_brute_force(config in arb_config()) {
        prop_assert_eq!(opt_star(&config), brute_force_opt(&config));
    }

    #[test]
    fn packing_optimum_is_monotone_in_budget(config in arb_config(), extra in 0u64..=100) {
        let bigger = GameConfig::new(
            config.budget() + money(extra),
            config.rounds(),
            config.true_thresholds().to_vec(),
        ).unwrap();
        let base = opt_star(&config);
        prop_assert!(opt_star(&bigger) >= base);
        prop_assert!(base <= (config.num_agents() as u64) * config.rounds() as u64);
    }

    #[test]
    fn closed_form_matches_honest_homogeneous_simulation(
        t in 0u64..=30,
        m in 2usize..=5,
        n in 1u32..=4,
        budget in 0u64..=700,
    ) {
        let config = GameConfig::new(money(budget), n, vec![money(t); m]).unwrap();
        let transcript = run_game(&config, &StrategyProfile::honest(m)).unwrap();
        let simulated: Vec<Money> = (1..=m).map(|i| agent_utility(&transcript, i)).collect();
        prop_assert_eq!(simulated, closed_form_homogeneous_utilities(money(budget), n, m, money(t)));
    }

    #[test]
    fn equilibrium_verdict_is_scale_invariant(
        budget in 0u64..=40,
        t1 in 1u64..=20,
        t2 in 1u64..=20,
        scale in 2u64..=9,
    ) {
        let config = GameConfig::new(money(budget), 1, vec![money(t1), money(t2)]).unwrap();
        let scaled = GameConfig::new(
            money(budget * scale), 1, vec![money(t1 * scale), money(t2 * scale)],
        ).unwrap();
        let grid = StrategyGrid::default_for(&config);
        let scaled_grid = StrategyGrid::bids(
            grid.bid_levels().iter().map(|b| b.mul_int(scale)).collect(),
        ).unwrap();
        let honest = StrategyProfile::honest(2);
        let a = check_pce(&config, &honest, &grid).unwrap();
        let b = check_pce(&scaled, &honest, &scaled_grid).unwrap();
        prop_assert_eq!(a.is_pce, b.is_pce);
    }
}
