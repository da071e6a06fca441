//! Budget-feasible reverse-auction simulator for vehicular crowd sensing.
//!
//! A platform with a fixed monetary budget buys sensing tasks from a fleet of
//! self-interested vehicles over a sequence of rounds. Each round the
//! mechanism calibrates the standing bids, posts a single price, caps how
//! many offers it can honor, and pays every vehicle that accepts. The crate
//! provides:
//!
//! - [`mechanism`]: the round-by-round protocol over exact rational money,
//! - [`agents`]: bid strategies, acceptance policies, and closed-form
//!   equilibrium profiles,
//! - [`analysis`]: offline optima, regret, performance bounds, and the
//!   monotone-selection check,
//! - [`equilibrium`]: exhaustive verification that a profile is a collusion-
//!   proof equilibrium over a finite strategy grid,
//! - [`scenario`]: TOML-driven experiments with CSV output, used by the
//!   `crowdsense` binary.

pub mod agents;
pub mod analysis;
pub mod equilibrium;
pub mod error;
pub mod mechanism;
pub mod money;
pub mod scenario;

pub use agents::{AcceptPolicy, AgentProfile, BidStrategy, StrategyProfile};
pub use analysis::{RegretReport, Theorem3Case};
pub use equilibrium::{EquilibriumReport, StrategyGrid};
pub use error::{Error, Result};
pub use mechanism::{run_game, ExtendedMoney, GameConfig, GameTranscript, RoundOutcome};
pub use money::Money;
pub use scenario::Scenario;
