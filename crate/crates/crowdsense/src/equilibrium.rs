//! Exhaustive verification of the cooperative-equilibrium claims on
//! desk-scale games: subgame Nash enumeration, best utilities, and PCE
//! membership with a concrete deviation witness when it fails.
//!
//! The strategy space is restricted to constant-bid strategies over a finite
//! grid (the proofs argue via constant-bid deviations), so everything is
//! checked by brute force.

use std::fmt;

use crate::agents::{agent_utility, tasks_taken, AcceptPolicy, BidStrategy, StrategyProfile};
use crate::error::{Error, Result};
use crate::mechanism::{run_game, AgentId, GameConfig};
use crate::money::Money;

/// Cap on enumerated opponent profiles per subgame.
const MAX_PROFILES: u128 = 1_000_000;

/// Finite restriction of the strategy space: constant bids drawn from
/// `bid_levels`, combined with each acceptance policy.
#[derive(Clone, Debug)]
pub struct StrategyGrid {
    bid_levels: Vec<Money>,
    accept_policies: Vec<AcceptPolicy>,
}

impl StrategyGrid {
    pub fn new(bid_levels: Vec<Money>, accept_policies: Vec<AcceptPolicy>) -> Result<Self> {
        if bid_levels.is_empty() || accept_policies.is_empty() {
            return Err(Error::Config("strategy grid must be non-empty".into()));
        }
        if !bid_levels.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("bid levels must be strictly ascending".into()));
        }
        Ok(StrategyGrid { bid_levels, accept_policies })
    }

    pub fn bids(bid_levels: Vec<Money>) -> Result<Self> {
        StrategyGrid::new(bid_levels, vec![AcceptPolicy::ThresholdAccept])
    }

    /// Default grid: all distinct true thresholds plus the two budget levels
    /// `B/(MN)` and `B/N` that appear in the equilibrium constructions.
    pub fn default_for(config: &GameConfig) -> Self {
        let mn = config.num_agents() as u32 * config.rounds();
        let mut levels: Vec<Money> = config.true_thresholds().to_vec();
        levels.push(config.budget().div_int(mn));
        levels.push(config.budget().div_int(config.rounds()));
        levels.sort();
        levels.dedup();
        StrategyGrid { bid_levels: levels, accept_policies: vec![AcceptPolicy::ThresholdAccept] }
    }

    pub fn bid_levels(&self) -> &[Money] {
        &self.bid_levels
    }

    /// All grid strategies, in a fixed deterministic order.
    pub fn strategies(&self) -> Vec<(BidStrategy, AcceptPolicy)> {
        self.bid_levels
            .iter()
            .flat_map(|&bid| {
                self.accept_policies
                    .iter()
                    .map(move |p| (BidStrategy::ConstantBid(bid), p.clone()))
            })
            .collect()
    }
}

/// Per-agent outcome of a PCE check.
#[derive(Clone, Debug)]
pub struct EquilibriumReport {
    pub profile: StrategyProfile,
    pub utilities: Vec<Money>,
    pub best_utilities: Vec<Money>,
    pub is_pce: bool,
    pub witness_deviation: Option<Witness>,
}

/// A profitable deviation: `agent` can reach `utility` (above her profile
/// utility) by playing `strategy` while the others settle into a subgame
/// Nash equilibrium.
#[derive(Clone, Debug)]
pub struct Witness {
    pub agent: AgentId,
    pub strategy: (BidStrategy, AcceptPolicy),
    pub utility: Money,
}

impl fmt::Display for EquilibriumReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "agent  utility  best_utility  cooperative")?;
        for (idx, (u, b)) in self.utilities.iter().zip(&self.best_utilities).enumerate() {
            writeln!(
                f,
                "{:<5}  {:<7}  {:<12}  {}",
                idx + 1,
                u.to_string(),
                b.to_string(),
                u >= b
            )?;
        }
        writeln!(f, "pce: {}", self.is_pce)?;
        if let Some(w) = &self.witness_deviation {
            let bid = match &w.strategy.0 {
                BidStrategy::ConstantBid(v) => v.to_string(),
                other => format!("{other:?}"),
            };
            writeln!(f, "witness: agent {} bids {} and earns {}", w.agent, bid, w.utility)?;
        }
        Ok(())
    }
}

/// Runs the game under `profile` and returns each agent's utility.
pub fn evaluate_profile(config: &GameConfig, profile: &StrategyProfile) -> Result<Vec<Money>> {
    let transcript = run_game(config, profile)?;
    Ok((1..=config.num_agents())
        .map(|m| agent_utility(&transcript, m))
        .collect())
}

fn payoff(config: &GameConfig, profile: &StrategyProfile, m: AgentId) -> Result<(Money, u64)> {
    let transcript = run_game(config, profile)?;
    Ok((agent_utility(&transcript, m), tasks_taken(&transcript, m)))
}

/// Whether (utility, tasks) `b` beats `a` for the agent: strictly more
/// money, or the same money for strictly fewer tasks.
fn improves(a: (Money, u64), b: (Money, u64)) -> bool {
    b.0 > a.0 || (b.0 == a.0 && b.1 < a.1)
}

/// Enumerates all pure-strategy profiles of the agents other than `i` (with
/// agent `i` pinned to `s_i`) in which no single opponent has an improving
/// grid deviation.
pub fn subgame_nash(
    config: &GameConfig,
    i: AgentId,
    s_i: &(BidStrategy, AcceptPolicy),
    grid: &StrategyGrid,
) -> Result<Vec<StrategyProfile>> {
    let m = config.num_agents();
    let others: Vec<AgentId> = (1..=m).filter(|&j| j != i).collect();
    let strategies = grid.strategies();
    let g = strategies.len() as u128;
    let total = g.checked_pow(others.len() as u32).unwrap_or(u128::MAX);
    if total > MAX_PROFILES {
        return Err(Error::SearchSpace { profiles: total, cap: MAX_PROFILES });
    }

    let mut equilibria = Vec::new();
    let mut assignment = vec![0usize; others.len()];
    loop {
        let mut profile = StrategyProfile::honest(m).with_strategy(i, s_i.clone());
        for (slot, &j) in others.iter().enumerate() {
            profile = profile.with_strategy(j, strategies[assignment[slot]].clone());
        }

        let mut is_nash = true;
        'outer: for &j in &others {
            let current = payoff(config, &profile, j)?;
            for alt in &strategies {
                if *alt == profile.strategies()[j - 1] {
                    continue;
                }
                let deviated = profile.with_strategy(j, alt.clone());
                if improves(current, payoff(config, &deviated, j)?) {
                    is_nash = false;
                    break 'outer;
                }
            }
        }
        if is_nash {
            equilibria.push(profile);
        }

        // mixed-radix increment
        let mut carry = true;
        for slot in assignment.iter_mut() {
            if carry {
                *slot += 1;
                if *slot == strategies.len() {
                    *slot = 0;
                } else {
                    carry = false;
                }
            }
        }
        if carry {
            break;
        }
    }
    Ok(equilibria)
}

/// `U*_i`: the highest utility agent `i` can reach with any grid strategy
/// while the other agents settle into a Nash equilibrium of the induced
/// subgame. Strategies whose subgame has no pure equilibrium contribute
/// nothing. Also returns the achieving strategy for witness reporting.
pub fn best_utility_with_witness(
    config: &GameConfig,
    i: AgentId,
    grid: &StrategyGrid,
) -> Result<(Money, Option<(BidStrategy, AcceptPolicy)>)> {
    let mut best = Money::zero();
    let mut arg = None;
    for s_i in grid.strategies() {
        for profile in subgame_nash(config, i, &s_i, grid)? {
            let (u, _) = payoff(config, &profile, i)?;
            if arg.is_none() || u > best {
                best = u;
                arg = Some(s_i.clone());
            }
        }
    }
    Ok((best, arg))
}

/// `U*_i` alone.
pub fn best_utility(config: &GameConfig, i: AgentId, grid: &StrategyGrid) -> Result<Money> {
    best_utility_with_witness(config, i, grid).map(|(u, _)| u)
}

/// Checks whether `profile` is a perfect cooperative equilibrium: every
/// agent's utility under the profile is at least her best utility. When it
/// is not, the report carries one concrete profitable deviation.
pub fn check_pce(
    config: &GameConfig,
    profile: &StrategyProfile,
    grid: &StrategyGrid,
) -> Result<EquilibriumReport> {
    let utilities = evaluate_profile(config, profile)?;
    let mut best_utilities = Vec::with_capacity(utilities.len());
    let mut witness = None;
    for i in 1..=config.num_agents() {
        let (u_star, arg) = best_utility_with_witness(config, i, grid)?;
        if utilities[i - 1] < u_star && witness.is_none() {
            witness = arg.map(|strategy| Witness { agent: i, strategy, utility: u_star });
        }
        best_utilities.push(u_star);
    }
    let is_pce = utilities.iter().zip(&best_utilities).all(|(u, b)| u >= b);
    Ok(EquilibriumReport {
        profile: profile.clone(),
        utilities,
        best_utilities,
        is_pce,
        witness_deviation: witness,
    })
}
