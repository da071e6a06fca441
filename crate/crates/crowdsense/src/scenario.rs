//! Scenario-driven experiment harness: TOML scenario files, surge-rate
//! ingestion, budget and fleet sweeps, and plot-ready CSV emission.
//!
//! Money values in scenario files are written as integers or as decimal
//! strings (e.g. `"2.5"`); floats are rejected to keep arithmetic exact.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use num::rational::Ratio;
use num::{ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::agents::{
    equilibrium_profile_heterogeneous, equilibrium_profile_homogeneous, AcceptPolicy, BidStrategy,
    StrategyProfile,
};
use crate::analysis::{data_fraction, regret_with_bound, RegretReport};
use crate::error::{Error, Result};
use crate::mechanism::{run_game, GameConfig};
use crate::money::Money;

/// CSV header for every emitted report stream.
pub const CSV_HEADER: &str =
    "budget,rounds,agents,opt_star,collected,regret,bound,bound_case,fraction,profile";

/// Fraction of OPT* the BEACON baseline reportedly collects on the synthetic
/// budget sweep; an external reference value, never computed here.
pub const BEACON_REFERENCE_FRACTION: &str = "0.4663";

#[derive(Deserialize)]
#[serde(untagged)]
enum MoneyLit {
    Int(i64),
    Str(String),
}

impl MoneyLit {
    fn to_money(&self) -> Result<Money> {
        match self {
            MoneyLit::Int(v) if *v >= 0 => Ok(Money::from_units(*v as u64)),
            MoneyLit::Int(v) => Err(Error::Scenario(format!("negative money value {v}"))),
            MoneyLit::Str(s) => Money::parse_decimal(s)
                .map_err(|e| Error::Scenario(format!("bad money literal: {e}"))),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    from: MoneyLit,
    to: MoneyLit,
    step: MoneyLit,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFleetSweep {
    from: usize,
    to: usize,
    #[serde(default = "one")]
    step: usize,
}

fn one() -> usize {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawThresholds {
    values: Option<Vec<MoneyLit>>,
    homogeneous: Option<MoneyLit>,
    agents: Option<usize>,
    surge_file: Option<String>,
    base_fare: Option<MoneyLit>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawProfile {
    Named(String),
    Explicit(Vec<RawAgentStrategy>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAgentStrategy {
    bid: RawBid,
    accept: Option<RawAccept>,
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawBid {
    Honest,
    Constant { value: MoneyLit },
    OverbidUntil { round: u32, high: MoneyLit },
    Scripted { bids: Vec<MoneyLit> },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawAccept {
    Threshold,
    RejectUntil { round: u32 },
    Scripted { decisions: Vec<bool> },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    rounds: u32,
    budget: Option<MoneyLit>,
    budget_sweep: Option<RawSweep>,
    thresholds: RawThresholds,
    profile: Option<RawProfile>,
    fleet_sweep: Option<RawFleetSweep>,
    #[allow(dead_code)]
    seed: Option<u64>,
}

/// Which budgets a scenario covers.
#[derive(Clone, Debug)]
pub enum BudgetSpec {
    Single(Money),
    Sweep { from: Money, to: Money, step: Money },
}

/// Named or per-agent strategy profile.
#[derive(Clone, Debug)]
pub enum ProfileKind {
    Honest,
    Equilibrium,
    Explicit(Vec<(BidStrategy, AcceptPolicy)>),
}

impl ProfileKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProfileKind::Honest => "honest",
            ProfileKind::Equilibrium => "equilibrium",
            ProfileKind::Explicit(_) => "explicit",
        }
    }
}

/// A validated scenario ready to run.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub rounds: u32,
    pub budgets: BudgetSpec,
    pub thresholds: Vec<Money>,
    pub profile: ProfileKind,
    pub fleet_sweep: Option<(usize, usize, usize)>,
}

/// One emitted CSV row.
#[derive(Clone, Debug)]
pub struct ReportRow {
    pub budget: Money,
    pub rounds: u32,
    pub agents: usize,
    pub report: RegretReport,
    pub profile_label: String,
}

impl Scenario {
    /// Reads and validates a scenario file; surge files resolve relative to
    /// the scenario's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let content = fs::read_to_string(path)?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Scenario::parse(&content, base)
    }

    pub fn parse(content: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawScenario = toml::from_str(content)
            .map_err(|e| Error::Scenario(format!("invalid scenario file: {e}")))?;

        let budgets = match (&raw.budget, &raw.budget_sweep) {
            (Some(b), None) => BudgetSpec::Single(b.to_money()?),
            (None, Some(s)) => {
                let step = s.step.to_money()?;
                if step.is_zero() {
                    return Err(Error::Scenario("sweep step must be positive".into()));
                }
                BudgetSpec::Sweep { from: s.from.to_money()?, to: s.to.to_money()?, step }
            }
            _ => {
                return Err(Error::Scenario(
                    "exactly one of budget and budget_sweep is required".into(),
                ))
            }
        };

        let t = &raw.thresholds;
        let thresholds = match (&t.values, &t.homogeneous, &t.surge_file) {
            (Some(values), None, None) => {
                values.iter().map(MoneyLit::to_money).collect::<Result<Vec<_>>>()?
            }
            (None, Some(level), None) => {
                let m = t.agents.ok_or_else(|| {
                    Error::Scenario("homogeneous thresholds require an agent count".into())
                })?;
                vec![level.to_money()?; m]
            }
            (None, None, Some(file)) => {
                let base_fare = t
                    .base_fare
                    .as_ref()
                    .ok_or_else(|| Error::Scenario("surge_file requires base_fare".into()))?
                    .to_money()?;
                let content = fs::read_to_string(base_dir.join(file))?;
                ingest_surge(&content, base_fare)?
            }
            _ => {
                return Err(Error::Scenario(
                    "exactly one threshold source is required (values | homogeneous | surge_file)"
                        .into(),
                ))
            }
        };

        let profile = match raw.profile {
            None => ProfileKind::Honest,
            Some(RawProfile::Named(name)) => match name.as_str() {
                "honest" => ProfileKind::Honest,
                "equilibrium" => ProfileKind::Equilibrium,
                other => {
                    return Err(Error::Scenario(format!(
                        "unknown profile {other:?}; use honest, equilibrium or per-agent tables"
                    )))
                }
            },
            Some(RawProfile::Explicit(specs)) => {
                let strategies = specs
                    .iter()
                    .map(|spec| {
                        let bid = match &spec.bid {
                            RawBid::Honest => BidStrategy::Honest,
                            RawBid::Constant { value } => BidStrategy::ConstantBid(value.to_money()?),
                            RawBid::OverbidUntil { round, high } => BidStrategy::OverbidUntil {
                                until: *round,
                                high: high.to_money()?,
                            },
                            RawBid::Scripted { bids } => BidStrategy::Scripted(
                                bids.iter().map(MoneyLit::to_money).collect::<Result<Vec<_>>>()?,
                            ),
                        };
                        let accept = match &spec.accept {
                            None | Some(RawAccept::Threshold) => AcceptPolicy::ThresholdAccept,
                            Some(RawAccept::RejectUntil { round }) => AcceptPolicy::RejectUntil(*round),
                            Some(RawAccept::Scripted { decisions }) => {
                                AcceptPolicy::Scripted(decisions.clone())
                            }
                        };
                        Ok((bid, accept))
                    })
                    .collect::<Result<Vec<_>>>()?;
                ProfileKind::Explicit(strategies)
            }
        };

        let fleet_sweep = match raw.fleet_sweep {
            None => None,
            Some(f) => {
                if f.step == 0 || f.from < 2 || f.to < f.from {
                    return Err(Error::Scenario("invalid fleet_sweep range".into()));
                }
                Some((f.from, f.to, f.step))
            }
        };

        Ok(Scenario { rounds: raw.rounds, budgets, thresholds, profile, fleet_sweep })
    }

    pub fn budgets(&self) -> Vec<Money> {
        match &self.budgets {
            BudgetSpec::Single(b) => vec![*b],
            BudgetSpec::Sweep { from, to, step } => {
                let mut out = Vec::new();
                let mut b = *from;
                while b <= *to {
                    out.push(b);
                    b += *step;
                }
                out
            }
        }
    }

    pub fn build_profile(&self, config: &GameConfig) -> Result<StrategyProfile> {
        match &self.profile {
            ProfileKind::Honest => Ok(StrategyProfile::honest(config.num_agents())),
            ProfileKind::Equilibrium => {
                if config.is_homogeneous() {
                    Ok(equilibrium_profile_homogeneous(config, config.true_thresholds()[0]))
                } else {
                    Ok(equilibrium_profile_heterogeneous(config))
                }
            }
            ProfileKind::Explicit(strategies) => {
                let profile = StrategyProfile::new(strategies.clone());
                profile.validate(config)?;
                Ok(profile)
            }
        }
    }

    /// Builds the game config for one sweep point.
    pub fn config_at(&self, budget: Money, num_agents: usize) -> Result<GameConfig> {
        if num_agents > self.thresholds.len() {
            return Err(Error::Scenario(format!(
                "fleet of {num_agents} agents exceeds the {} available thresholds",
                self.thresholds.len()
            )));
        }
        GameConfig::new(budget, self.rounds, self.thresholds[..num_agents].to_vec())
    }

    /// Runs the scenario: one row per fleet size when a fleet sweep is
    /// configured, otherwise one row per budget.
    pub fn run(&self) -> Result<Vec<ReportRow>> {
        match self.fleet_sweep {
            Some((from, to, step)) => {
                let budget = match self.budgets {
                    BudgetSpec::Single(b) => b,
                    BudgetSpec::Sweep { .. } => {
                        return Err(Error::Scenario(
                            "fleet_sweep requires a single fixed budget".into(),
                        ))
                    }
                };
                (from..=to)
                    .step_by(step)
                    .map(|m| self.run_point(budget, m))
                    .collect()
            }
            None => self
                .budgets()
                .into_iter()
                .map(|b| self.run_point(b, self.thresholds.len()))
                .collect(),
        }
    }

    fn run_point(&self, budget: Money, num_agents: usize) -> Result<ReportRow> {
        let config = self.config_at(budget, num_agents)?;
        let profile = self.build_profile(&config)?;
        let transcript = run_game(&config, &profile)?;
        Ok(ReportRow {
            budget,
            rounds: self.rounds,
            agents: num_agents,
            report: regret_with_bound(&config, &transcript),
            profile_label: self.profile.label().to_string(),
        })
    }
}

/// Parses a `vehicle_id,surge_rate` table into per-vehicle thresholds:
/// `base_fare * mean surge rate`, vehicles in first-appearance order.
pub fn ingest_surge(content: &str, base_fare: Money) -> Result<Vec<Money>> {
    let mut lines = content
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty());
    let (header_line, header) = lines
        .next()
        .ok_or(Error::Parse { line: 1, msg: "empty surge file".into() })?;
    if header != "vehicle_id,surge_rate" {
        return Err(Error::Parse {
            line: header_line,
            msg: format!("expected header vehicle_id,surge_rate, got {header:?}"),
        });
    }

    let mut order: Vec<String> = Vec::new();
    let mut rates: Vec<(Ratio<i128>, u64)> = Vec::new();
    for (line, text) in lines {
        let (id, rate_text) = text
            .split_once(',')
            .ok_or_else(|| Error::Parse { line, msg: format!("expected 2 fields in {text:?}") })?;
        let rate = Money::parse_decimal(rate_text.trim())
            .map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        let slot = match order.iter().position(|v| v == id.trim()) {
            Some(p) => p,
            None => {
                order.push(id.trim().to_string());
                rates.push((Ratio::zero(), 0));
                rates.len() - 1
            }
        };
        rates[slot].0 += rate.as_ratio();
        rates[slot].1 += 1;
    }
    if order.is_empty() {
        return Err(Error::Parse { line: header_line, msg: "surge file has no data rows".into() });
    }
    rates
        .into_iter()
        .map(|(sum, count)| {
            let mean = sum / Ratio::from_integer(count as i128);
            let threshold = base_fare.as_ratio() * mean;
            Money::ratio(*threshold.numer(), *threshold.denom())
        })
        .collect()
}

/// Deterministic synthetic surge table: `vehicles` rows with surge rates
/// uniform in `[min_surge, max_surge]`, rounded to two decimals. A stand-in
/// for real ride-sharing data, clearly synthetic.
pub fn synthetic_surge_csv(vehicles: usize, min_surge: f64, max_surge: f64, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = String::from("vehicle_id,surge_rate\n");
    for v in 1..=vehicles {
        let surge = rng.gen_range(min_surge..=max_surge);
        let _ = writeln!(out, "car{v},{:.2}", (surge * 100.0).round() / 100.0);
    }
    out
}

/// Renders rows as CSV. Budget sweeps may append a summary comment with the
/// mean collected fraction next to the externally reported baseline figure.
pub fn to_csv(rows: &[ReportRow], with_summary: bool) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    let mut fraction_sum = Ratio::<i128>::zero();
    for row in rows {
        let fraction = data_fraction(&row.report);
        fraction_sum += fraction;
        let bound = row.report.bound.map(|b| b.to_string()).unwrap_or_default();
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{:.6},{}",
            row.budget,
            row.rounds,
            row.agents,
            row.report.opt_star,
            row.report.collected,
            row.report.regret,
            bound,
            row.report.bound_case.label(),
            fraction.to_f64().unwrap_or(f64::NAN),
            row.profile_label,
        );
    }
    if with_summary && !rows.is_empty() {
        let mean = fraction_sum / Ratio::from_integer(rows.len() as i128);
        let _ = writeln!(
            out,
            "# summary rows={} mean_fraction={:.6} external_reference=beacon_mean_fraction:{}",
            rows.len(),
            mean.to_f64().unwrap_or(f64::NAN),
            BEACON_REFERENCE_FRACTION,
        );
    }
    out
}
