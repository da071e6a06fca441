//! Agent models: bidding strategies, acceptance policies, per-agent utility,
//! and the equilibrium strategy profiles used by the regret analysis.
//!
//! Strategies are pure functions of (agent, round, public history), so a
//! profile is an immutable value that can be shared across parallel game
//! evaluations.

use crate::analysis::{detect_case, Theorem3Case};
use crate::error::{Error, Result};
use crate::mechanism::{AgentId, GameConfig, GameTranscript, RoundOutcome};
use crate::money::Money;

/// An agent's public identity and private participation threshold.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AgentProfile {
    pub index: AgentId,
    pub true_threshold: Money,
}

/// How an agent bids each round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BidStrategy {
    /// Bid the true threshold every round.
    Honest,
    /// Bid a fixed value every round.
    ConstantBid(Money),
    /// Bid `high` in rounds before `until`, then fall back to honesty.
    OverbidUntil { until: u32, high: Money },
    /// One bid per round, length N.
    Scripted(Vec<Money>),
}

/// When an agent accepts an offer. Accepting below the true threshold
/// contradicts the threshold semantics, so every policy is intersected with
/// `offer >= true_threshold`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum AcceptPolicy {
    /// Accept iff the offer meets the true threshold.
    ThresholdAccept,
    /// Reject everything before round `r`, threshold-accept from round `r` on.
    RejectUntil(u32),
    /// One decision per round, length N; still never accepts below threshold.
    Scripted(Vec<bool>),
}

/// One (bid, accept) pair per agent.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrategyProfile {
    strategies: Vec<(BidStrategy, AcceptPolicy)>,
}

impl StrategyProfile {
    pub fn new(strategies: Vec<(BidStrategy, AcceptPolicy)>) -> Self {
        StrategyProfile { strategies }
    }

    /// Everyone bids truthfully and threshold-accepts.
    pub fn honest(num_agents: usize) -> Self {
        StrategyProfile {
            strategies: vec![(BidStrategy::Honest, AcceptPolicy::ThresholdAccept); num_agents],
        }
    }

    pub fn strategies(&self) -> &[(BidStrategy, AcceptPolicy)] {
        &self.strategies
    }

    pub fn num_agents(&self) -> usize {
        self.strategies.len()
    }

    pub fn bid_strategy(&self, m: AgentId) -> &BidStrategy {
        &self.strategies[m - 1].0
    }

    pub fn accept_policy(&self, m: AgentId) -> &AcceptPolicy {
        &self.strategies[m - 1].1
    }

    /// Returns a copy with agent `m`'s strategy replaced (deviation probing).
    pub fn with_strategy(&self, m: AgentId, strategy: (BidStrategy, AcceptPolicy)) -> Self {
        let mut strategies = self.strategies.clone();
        strategies[m - 1] = strategy;
        StrategyProfile { strategies }
    }

    /// Checks the profile against a config: M strategies, scripted vectors of
    /// length N.
    pub fn validate(&self, config: &GameConfig) -> Result<()> {
        if self.strategies.len() != config.num_agents() {
            return Err(Error::Protocol(format!(
                "profile has {} strategies for {} agents",
                self.strategies.len(),
                config.num_agents()
            )));
        }
        let n = config.rounds() as usize;
        for (idx, (bid, accept)) in self.strategies.iter().enumerate() {
            if let BidStrategy::Scripted(bids) = bid {
                if bids.len() != n {
                    return Err(Error::Protocol(format!(
                        "agent {} scripted bids have length {}, want {n}",
                        idx + 1,
                        bids.len()
                    )));
                }
            }
            if let AcceptPolicy::Scripted(decisions) = accept {
                if decisions.len() != n {
                    return Err(Error::Protocol(format!(
                        "agent {} scripted decisions have length {}, want {n}",
                        idx + 1,
                        decisions.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// The bid agent `agent` submits in `round` given the public history so far.
pub fn make_bid(
    strategy: &BidStrategy,
    agent: &AgentProfile,
    round: u32,
    _history: &[RoundOutcome],
) -> Money {
    match strategy {
        BidStrategy::Honest => agent.true_threshold,
        BidStrategy::ConstantBid(v) => *v,
        BidStrategy::OverbidUntil { until, high } => {
            if round < *until {
                *high
            } else {
                agent.true_threshold
            }
        }
        BidStrategy::Scripted(bids) => bids[(round - 1) as usize],
    }
}

/// Whether `agent` accepts `offer` in `round`. Never true below the true
/// threshold, whatever the policy says.
pub fn decide_accept(policy: &AcceptPolicy, agent: &AgentProfile, offer: Money, round: u32) -> bool {
    let meets_threshold = offer >= agent.true_threshold;
    meets_threshold
        && match policy {
            AcceptPolicy::ThresholdAccept => true,
            AcceptPolicy::RejectUntil(r) => round >= *r,
            AcceptPolicy::Scripted(decisions) => decisions[(round - 1) as usize],
        }
}

/// Total remuneration agent `m` earned across the game.
pub fn agent_utility(transcript: &GameTranscript, m: AgentId) -> Money {
    transcript
        .outcomes()
        .iter()
        .filter_map(|o| o.payments.get(&m).copied())
        .sum()
}

/// Number of tasks agent `m` accepted (the tie-break metric: at equal profit
/// agents prefer fewer tasks).
pub fn tasks_taken(transcript: &GameTranscript, m: AgentId) -> u64 {
    transcript
        .outcomes()
        .iter()
        .filter(|o| o.accepted.contains(&m))
        .count() as u64
}

/// The equilibrium profile for a homogeneous game (all thresholds equal
/// `t_star`). Below `MNT*` honesty is the equilibrium; at or above it every
/// agent bids `B/(MN)` so each collects `B/M` in total.
pub fn equilibrium_profile_homogeneous(config: &GameConfig, t_star: Money) -> StrategyProfile {
    let m = config.num_agents();
    let n = config.rounds();
    let mn = m as u64 * n as u64;
    if config.budget() >= t_star.mul_int(mn) {
        let bid = t_star.max(config.budget().div_int(mn as u32));
        StrategyProfile::new(vec![
            (BidStrategy::ConstantBid(bid), AcceptPolicy::ThresholdAccept);
            m
        ])
    } else {
        StrategyProfile::honest(m)
    }
}

/// The strategic profile for a heterogeneous game, one per regret-bound case
/// (thresholds sorted ascending; "first i agents" means the i cheapest).
///
/// - B/N <= T(2): the cheapest agent bids T(2), everyone else is honest.
/// - i*T(i+1) < B/N <= (i+1)*T(i+1): the first i+1 agents bid T(i+1).
/// - i*T(i) < B/N <= i*T(i+1): the first i agents bid B/(iN).
/// - B/N > M*T(M): everyone bids B/(MN).
pub fn equilibrium_profile_heterogeneous(config: &GameConfig) -> StrategyProfile {
    let m = config.num_agents();
    let (sorted, case) = detect_case(config);
    let threshold_accept = AcceptPolicy::ThresholdAccept;
    let mut strategies = vec![(BidStrategy::Honest, threshold_accept.clone()); m];
    let mut assign = |pos: usize, bid: Money| {
        // pos is 1-based position in sorted threshold order
        let agent = sorted.order[pos - 1];
        strategies[agent - 1] = (BidStrategy::ConstantBid(bid), threshold_accept.clone());
    };
    match case {
        Theorem3Case::Homogeneous => {
            return equilibrium_profile_homogeneous(config, config.true_thresholds()[0]);
        }
        Theorem3Case::Case1 => assign(1, sorted.values[1]),
        Theorem3Case::Case2 { i } => {
            let level = sorted.values[i];
            for pos in 1..=i + 1 {
                assign(pos, level);
            }
        }
        Theorem3Case::Case3 { i } => {
            let bid = config.budget().div_int((i as u32) * config.rounds());
            for pos in 1..=i {
                assign(pos, bid);
            }
        }
        Theorem3Case::Case4 => {
            let bid = config.budget().div_int(m as u32 * config.rounds());
            for pos in 1..=m {
                assign(pos, bid);
            }
        }
        Theorem3Case::NotCovered => {}
    }
    StrategyProfile::new(strategies)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanism::run_game;

    fn money(v: u64) -> Money {
        Money::from_units(v)
    }

    fn agent(idx: AgentId, t: u64) -> AgentProfile {
        AgentProfile { index: idx, true_threshold: money(t) }
    }

    fn config(b: u64, n: u32, thresholds: &[u64]) -> GameConfig {
        GameConfig::new(money(b), n, thresholds.iter().map(|&t| money(t)).collect()).unwrap()
    }

    #[test]
    fn honest_bids_the_threshold() {
        let a = agent(1, 40);
        assert_eq!(make_bid(&BidStrategy::Honest, &a, 1, &[]), money(40));
        assert_eq!(make_bid(&BidStrategy::Honest, &a, 7, &[]), money(40));
    }

    #[test]
    fn overbid_until_switches_back() {
        let a = agent(1, 40);
        let s = BidStrategy::OverbidUntil { until: 3, high: money(500) };
        assert_eq!(make_bid(&s, &a, 2, &[]), money(500));
        assert_eq!(make_bid(&s, &a, 3, &[]), money(40));
    }

    #[test]
    fn scripted_bid_lookup() {
        let a = agent(1, 40);
        let s = BidStrategy::Scripted(vec![money(20), money(20), money(30)]);
        assert_eq!(make_bid(&s, &a, 3, &[]), money(30));
    }

    #[test]
    fn threshold_accept_boundary_is_inclusive() {
        let a = agent(1, 30);
        assert!(!decide_accept(&AcceptPolicy::ThresholdAccept, &a, money(20), 1));
        assert!(decide_accept(&AcceptPolicy::ThresholdAccept, &a, money(30), 1));
    }

    #[test]
    fn reject_until_holds_out() {
        let a = agent(1, 10);
        assert!(!decide_accept(&AcceptPolicy::RejectUntil(3), &a, money(50), 2));
        assert!(decide_accept(&AcceptPolicy::RejectUntil(3), &a, money(50), 3));
    }

    #[test]
    fn no_policy_accepts_below_threshold() {
        let a = agent(1, 30);
        assert!(!decide_accept(&AcceptPolicy::Scripted(vec![true]), &a, money(20), 1));
        assert!(!decide_accept(&AcceptPolicy::RejectUntil(1), &a, money(29), 1));
    }

    #[test]
    fn utilities_and_task_counts_from_hand_trace() {
        let cfg = config(45, 3, &[10, 10]);
        let t = run_game(&cfg, &StrategyProfile::honest(2)).unwrap();
        assert_eq!(agent_utility(&t, 1), money(30));
        assert_eq!(agent_utility(&t, 2), money(10));
        assert_eq!(tasks_taken(&t, 1), 3);
        assert_eq!(tasks_taken(&t, 2), 1);
    }

    #[test]
    fn zero_budget_means_zero_everything() {
        let cfg = config(0, 3, &[10, 10]);
        let t = run_game(&cfg, &StrategyProfile::honest(2)).unwrap();
        assert_eq!(agent_utility(&t, 1), Money::zero());
        assert_eq!(tasks_taken(&t, 1), 0);
        assert_eq!(tasks_taken(&t, 2), 0);
    }

    #[test]
    fn homogeneous_profile_cases() {
        // Case 3 region (30 < 45 < 60): honest.
        let p = equilibrium_profile_homogeneous(&config(45, 3, &[10, 10]), money(10));
        assert_eq!(p, StrategyProfile::honest(2));

        // Case 2 (100 >= MNT* = 40): all bid B/(MN) = 25.
        let p = equilibrium_profile_homogeneous(&config(100, 2, &[10, 10]), money(10));
        for m in 1..=2 {
            assert_eq!(p.bid_strategy(m), &BidStrategy::ConstantBid(money(25)));
        }

        // Case 1 (20 <= NT* = 30): honest.
        let p = equilibrium_profile_homogeneous(&config(20, 3, &[10, 10]), money(10));
        assert_eq!(p, StrategyProfile::honest(2));
    }

    #[test]
    fn heterogeneous_profile_case1() {
        // B/N = 20 <= T(2) = 40: agent 1 bids 40, agent 2 honest.
        let p = equilibrium_profile_heterogeneous(&config(100, 5, &[20, 40]));
        assert_eq!(p.bid_strategy(1), &BidStrategy::ConstantBid(money(40)));
        assert_eq!(p.bid_strategy(2), &BidStrategy::Honest);
    }

    #[test]
    fn heterogeneous_profile_case2() {
        // B/N = 60, i = 1: T(2) = 40 < 60 <= 2*T(2) = 80 -> both bid 40.
        let p = equilibrium_profile_heterogeneous(&config(300, 5, &[20, 40]));
        assert_eq!(p.bid_strategy(1), &BidStrategy::ConstantBid(money(40)));
        assert_eq!(p.bid_strategy(2), &BidStrategy::ConstantBid(money(40)));
    }

    #[test]
    fn heterogeneous_profile_case4() {
        // B/N = 600 > 5 * 100: everyone bids B/(MN) = 120.
        let p = equilibrium_profile_heterogeneous(&config(3000, 5, &[20, 40, 50, 70, 100]));
        for m in 1..=5 {
            assert_eq!(p.bid_strategy(m), &BidStrategy::ConstantBid(money(120)));
        }
    }

    #[test]
    fn case4_simulation_matches_appendix_totals() {
        let cfg = config(3000, 5, &[20, 40, 50, 70, 100]);
        let p = equilibrium_profile_heterogeneous(&cfg);
        let t = run_game(&cfg, &p).unwrap();
        assert_eq!(t.collected(), 25);
        for m in 1..=5 {
            assert_eq!(agent_utility(&t, m), money(600));
        }
    }

    #[test]
    fn utilities_sum_to_budget_used() {
        let cfg = config(300, 5, &[20, 40]);
        let p = equilibrium_profile_heterogeneous(&cfg);
        let t = run_game(&cfg, &p).unwrap();
        let sum: Money = (1..=2).map(|m| agent_utility(&t, m)).sum();
        assert_eq!(sum, t.final_budget_used());
    }
}
