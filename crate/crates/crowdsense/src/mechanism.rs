//! The per-round pricing/selection/settlement mechanism.
//!
//! Each round the crowdsourcer calibrates its running threshold estimates
//! from the incoming bids, offers a single price capped by the smoothed
//! remaining budget, selects the cheapest agents (ties broken by index, the
//! deliberate bias that gives colluders an incentive to defect) and pays
//! every acceptor the round price.

use std::collections::{BTreeMap, BTreeSet};

use crate::agents::{decide_accept, make_bid, AgentProfile, StrategyProfile};
use crate::error::{Error, Result};
use crate::money::Money;

/// 1-based agent index.
pub type AgentId = usize;

/// A money amount extended with `+∞`, the initial calibrated threshold of an
/// agent that has not bid yet. `Infinite` compares greater than any finite
/// value.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum ExtendedMoney {
    Finite(Money),
    Infinite,
}

impl ExtendedMoney {
    pub fn finite(self) -> Option<Money> {
        match self {
            ExtendedMoney::Finite(v) => Some(v),
            ExtendedMoney::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, ExtendedMoney::Infinite)
    }
}

/// Immutable description of one game: budget, horizon and the agents'
/// private thresholds (indexed 1..M, in no particular order).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameConfig {
    budget: Money,
    rounds: u32,
    true_thresholds: Vec<Money>,
}

impl GameConfig {
    pub fn new(budget: Money, rounds: u32, true_thresholds: Vec<Money>) -> Result<Self> {
        if rounds < 1 {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        if true_thresholds.len() < 2 {
            return Err(Error::Config(format!(
                "need at least 2 agents, got {}",
                true_thresholds.len()
            )));
        }
        Ok(GameConfig { budget, rounds, true_thresholds })
    }

    pub fn budget(&self) -> Money {
        self.budget
    }

    pub fn rounds(&self) -> u32 {
        self.rounds
    }

    pub fn num_agents(&self) -> usize {
        self.true_thresholds.len()
    }

    pub fn true_thresholds(&self) -> &[Money] {
        &self.true_thresholds
    }

    pub fn threshold_of(&self, m: AgentId) -> Money {
        self.true_thresholds[m - 1]
    }

    pub fn is_homogeneous(&self) -> bool {
        self.true_thresholds.iter().all(|t| *t == self.true_thresholds[0])
    }
}

/// What happened in one round.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RoundOutcome {
    pub round: u32,
    pub price: Money,
    pub capacity: usize,
    /// Selected agents in offer order: calibrated threshold asc, index asc.
    pub selected: Vec<AgentId>,
    pub accepted: BTreeSet<AgentId>,
    pub payments: BTreeMap<AgentId, Money>,
}

/// Complete record of a finished game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameTranscript {
    config: GameConfig,
    outcomes: Vec<RoundOutcome>,
    final_budget_used: Money,
}

impl GameTranscript {
    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn outcomes(&self) -> &[RoundOutcome] {
        &self.outcomes
    }

    pub fn final_budget_used(&self) -> Money {
        self.final_budget_used
    }

    /// Total accepted tasks, the crowdsourcer's objective.
    pub fn collected(&self) -> u64 {
        self.outcomes.iter().map(|o| o.accepted.len() as u64).sum()
    }

    pub fn total_payments(&self) -> Money {
        self.outcomes
            .iter()
            .flat_map(|o| o.payments.values().copied())
            .sum()
    }
}

/// Mutable state of a game in progress.
#[derive(Clone, Debug)]
pub struct MechanismState {
    config: GameConfig,
    round: u32,
    budget_used: Money,
    calibrated: Vec<ExtendedMoney>,
    outcomes: Vec<RoundOutcome>,
}

impl MechanismState {
    /// Fresh game: round 1, nothing spent, every calibrated threshold at +∞.
    pub fn new(config: GameConfig) -> Self {
        let m = config.num_agents();
        MechanismState {
            config,
            round: 1,
            budget_used: Money::zero(),
            calibrated: vec![ExtendedMoney::Infinite; m],
            outcomes: Vec::new(),
        }
    }

    pub fn config(&self) -> &GameConfig {
        &self.config
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn budget_used(&self) -> Money {
        self.budget_used
    }

    pub fn calibrated(&self) -> &[ExtendedMoney] {
        &self.calibrated
    }

    pub fn outcomes(&self) -> &[RoundOutcome] {
        &self.outcomes
    }

    pub fn is_finished(&self) -> bool {
        self.round > self.config.rounds()
    }

    pub fn remaining_budget(&self) -> Money {
        self.config
            .budget()
            .checked_sub(self.budget_used)
            .expect("budget_used exceeds budget")
    }

    /// Rounds still to play including the current one: `N - n + 1`.
    pub fn rounds_left(&self) -> u32 {
        self.config.rounds() - self.round + 1
    }

    /// Elementwise `min(bid, previous calibrated)`. Does not mutate.
    pub fn calibrate(&self, bids: &[Money]) -> Result<Vec<ExtendedMoney>> {
        if bids.len() != self.config.num_agents() {
            return Err(Error::Protocol(format!(
                "expected {} bids, got {}",
                self.config.num_agents(),
                bids.len()
            )));
        }
        Ok(bids
            .iter()
            .zip(&self.calibrated)
            .map(|(&bid, &prev)| ExtendedMoney::Finite(bid).min(prev))
            .collect())
    }

    /// Round price: the minimum over all calibrated thresholds and the
    /// smoothed remaining budget `(B - B_used) / (N - n + 1)`.
    pub fn compute_price(&self, calibrated: &[ExtendedMoney]) -> Money {
        let budget_term = self.remaining_budget().div_int(self.rounds_left());
        calibrated
            .iter()
            .filter_map(|c| c.finite())
            .min()
            .map_or(budget_term, |c| c.min(budget_term))
    }

    /// Number of agents affordable this round:
    /// `floor((B - B_used) / (price * (N - n + 1)))`, clamped to `[0, M]`.
    /// A zero price means zero-cost offers, which go to everyone.
    pub fn capacity(&self, price: Money) -> usize {
        let m = self.config.num_agents();
        if price.is_zero() {
            return m;
        }
        let span_cost = price.mul_int(self.rounds_left() as u64);
        match self.remaining_budget().div_floor(span_cost) {
            Some(k) if k >= m as i128 => m,
            Some(k) => k.max(0) as usize,
            None => m,
        }
    }

    /// Pays `price` to every acceptor, lowers their calibrated thresholds to
    /// the paid price and charges the budget. Selection guarantees the spend
    /// fits; exceeding the budget here is an internal invariant violation.
    pub fn settle(
        &mut self,
        price: Money,
        selected: &[AgentId],
        accepted: &BTreeSet<AgentId>,
    ) -> Result<BTreeMap<AgentId, Money>> {
        let mut payments = BTreeMap::new();
        for &m in accepted {
            if !selected.contains(&m) {
                return Err(Error::Protocol(format!(
                    "agent {m} accepted without being selected"
                )));
            }
            payments.insert(m, price);
            self.calibrated[m - 1] = ExtendedMoney::Finite(price);
            self.budget_used += price;
        }
        if self.budget_used > self.config.budget() {
            return Err(Error::Invariant(format!(
                "settlement overshot the budget: used {} > {}",
                self.budget_used,
                self.config.budget()
            )));
        }
        Ok(payments)
    }

    /// Plays one full round: calibrate, price, capacity, select, query each
    /// selected agent in order, settle. Advances the round counter; the game
    /// always lasts exactly N rounds even when nobody is selected.
    pub fn run_round(
        &mut self,
        bids: &[Money],
        mut accept_decider: impl FnMut(AgentId, Money, u32) -> bool,
    ) -> Result<RoundOutcome> {
        let n = self.round;
        if n > self.config.rounds() {
            return Err(Error::Protocol(format!("round {n} is past the horizon")));
        }
        self.calibrated = self.calibrate(bids)?;
        let price = self.compute_price(&self.calibrated);
        let k = self.capacity(price);
        let selected = select(&self.calibrated, k);
        let mut accepted = BTreeSet::new();
        for &m in &selected {
            if accept_decider(m, price, n) {
                accepted.insert(m);
            }
        }
        let payments = self.settle(price, &selected, &accepted)?;
        let outcome = RoundOutcome { round: n, price, capacity: k, selected, accepted, payments };
        self.outcomes.push(outcome.clone());
        self.round += 1;
        Ok(outcome)
    }

    pub fn into_transcript(self) -> GameTranscript {
        GameTranscript {
            final_budget_used: self.budget_used,
            config: self.config,
            outcomes: self.outcomes,
        }
    }
}

/// Stable sort of all agents by (calibrated threshold asc, index asc); the
/// first `k` are selected. At equal bids the lower index always wins.
pub fn select(calibrated: &[ExtendedMoney], k: usize) -> Vec<AgentId> {
    let mut order: Vec<AgentId> = (1..=calibrated.len()).collect();
    order.sort_by_key(|&m| calibrated[m - 1]);
    order.truncate(k.min(calibrated.len()));
    order
}

/// Plays a full N-round game with every agent following `profile`.
/// Deterministic strategies give a bit-identical transcript on replay.
pub fn run_game(config: &GameConfig, profile: &StrategyProfile) -> Result<GameTranscript> {
    profile.validate(config)?;
    let agents: Vec<AgentProfile> = (1..=config.num_agents())
        .map(|m| AgentProfile { index: m, true_threshold: config.threshold_of(m) })
        .collect();
    let mut state = MechanismState::new(config.clone());
    for n in 1..=config.rounds() {
        let bids: Vec<Money> = agents
            .iter()
            .map(|a| make_bid(profile.bid_strategy(a.index), a, n, state.outcomes()))
            .collect();
        state.run_round(&bids, |m, offer, round| {
            decide_accept(profile.accept_policy(m), &agents[m - 1], offer, round)
        })?;
    }
    Ok(state.into_transcript())
}
