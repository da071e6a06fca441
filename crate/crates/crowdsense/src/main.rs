use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crowdsense::equilibrium::{check_pce, StrategyGrid};
use crowdsense::scenario::{synthetic_surge_csv, to_csv, BudgetSpec, ProfileKind, Scenario};
use crowdsense::{analysis, Error, Money, Result};

#[derive(Parser)]
#[command(name = "crowdsense", version, about = "Budgeted reverse-auction simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, ValueEnum)]
enum ProfileArg {
    Honest,
    Equilibrium,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML)
    scenario: PathBuf,
    /// Override the scenario's strategy profile
    #[arg(long, value_enum)]
    profile: Option<ProfileArg>,
    /// Write CSV here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run each configured point once and emit one CSV row per point
    Simulate(ScenarioArgs),
    /// Run the configured budget or fleet sweep with a trailing summary line
    Sweep(ScenarioArgs),
    /// Exhaustively verify the scenario's profile as a cooperative equilibrium
    PceCheck(ScenarioArgs),
    /// Analytic oracles evaluated on a scenario
    Oracle {
        #[command(subcommand)]
        oracle: OracleCommand,
    },
    /// Generate a synthetic surge-rate table (clearly synthetic stand-in data)
    GenSurge {
        /// Number of vehicles
        #[arg(long, default_value_t = 50)]
        vehicles: usize,
        /// Smallest surge rate
        #[arg(long, default_value_t = 1.0)]
        min_surge: f64,
        /// Largest surge rate
        #[arg(long, default_value_t = 3.0)]
        max_surge: f64,
        /// RNG seed
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum OracleCommand {
    /// Offline optimum: tasks a budget-constrained omniscient buyer collects
    OptStar(ScenarioArgs),
}

fn load(args: &ScenarioArgs) -> Result<Scenario> {
    let mut scenario = Scenario::load(&args.scenario)?;
    match args.profile {
        Some(ProfileArg::Honest) => scenario.profile = ProfileKind::Honest,
        Some(ProfileArg::Equilibrium) => scenario.profile = ProfileKind::Equilibrium,
        None => {}
    }
    Ok(scenario)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, content)?,
        None => print!("{content}"),
    }
    Ok(())
}

fn single_budget(scenario: &Scenario) -> Result<Money> {
    match scenario.budgets {
        BudgetSpec::Single(b) => Ok(b),
        BudgetSpec::Sweep { .. } => Err(Error::Config(
            "this command needs a single fixed budget, not a sweep".into(),
        )),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(args) => {
            let scenario = load(&args)?;
            let rows = scenario.run()?;
            emit(&args.out, &to_csv(&rows, false))
        }
        Command::Sweep(args) => {
            let scenario = load(&args)?;
            let rows = scenario.run()?;
            emit(&args.out, &to_csv(&rows, true))
        }
        Command::PceCheck(args) => {
            let scenario = load(&args)?;
            let budget = single_budget(&scenario)?;
            let config = scenario.config_at(budget, scenario.thresholds.len())?;
            let profile = scenario.build_profile(&config)?;
            let grid = StrategyGrid::default_for(&config);
            let report = check_pce(&config, &profile, &grid)?;
            emit(&args.out, &format!("{report}"))
        }
        Command::Oracle { oracle: OracleCommand::OptStar(args) } => {
            let scenario = load(&args)?;
            let budget = single_budget(&scenario)?;
            let config = scenario.config_at(budget, scenario.thresholds.len())?;
            let opt = analysis::opt_star(&config);
            emit(&args.out, &format!("opt_star={opt}\n"))
        }
        Command::GenSurge { vehicles, min_surge, max_surge, seed, out } => {
            if vehicles == 0 || !(min_surge >= 0.0 && max_surge >= min_surge) {
                return Err(Error::Config("need vehicles >= 1 and 0 <= min_surge <= max_surge".into()));
            }
            emit(&out, &synthetic_surge_csv(vehicles, min_surge, max_surge, seed))
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err @ Error::Invariant(_)) => {
            eprintln!("invariant violation: {err}");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(1)
        }
    }
}
