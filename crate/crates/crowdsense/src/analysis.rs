//! Analytic oracles: the packing optimum OPT*, regret reports, the
//! closed-form homogeneous utilities, the heterogeneous regret-bound
//! evaluator and the selected-count monotonicity check.

use num::rational::Ratio;
use num::Zero;

use crate::mechanism::{AgentId, GameConfig, GameTranscript};
use crate::money::Money;

/// Which regret-bound case a configuration falls in (thresholds sorted
/// ascending, `x = B/N`):
///
/// - `Case1`: `x <= T(2)`
/// - `Case2 { i }`: `i*T(i+1) < x <= (i+1)*T(i+1)`
/// - `Case3 { i }`: `i*T(i) < x <= i*T(i+1)`
/// - `Case4`: `x > M*T(M)`
///
/// `Homogeneous` short-circuits all of the above (the mechanism has zero
/// regret there), and `NotCovered` flags a config no interval matched.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theorem3Case {
    Homogeneous,
    Case1,
    Case2 { i: usize },
    Case3 { i: usize },
    Case4,
    NotCovered,
}

/// Threshold vector sorted ascending, stable by agent index.
#[derive(Clone, Debug)]
pub struct SortedThresholds {
    /// `order[p]` is the agent holding sorted position p (0-based).
    pub order: Vec<AgentId>,
    /// Threshold values in ascending order.
    pub values: Vec<Money>,
}

impl SortedThresholds {
    pub fn of(config: &GameConfig) -> Self {
        let mut order: Vec<AgentId> = (1..=config.num_agents()).collect();
        order.sort_by_key(|&m| config.threshold_of(m));
        let values = order.iter().map(|&m| config.threshold_of(m)).collect();
        SortedThresholds { order, values }
    }
}

/// Classifies a config by the half-open budget intervals of the regret
/// theorem, scanning i = 1..M-1. The intervals tile the budget axis, so
/// `NotCovered` should be unreachable; it is reported rather than patched.
pub fn detect_case(config: &GameConfig) -> (SortedThresholds, Theorem3Case) {
    let sorted = SortedThresholds::of(config);
    if config.is_homogeneous() {
        return (sorted, Theorem3Case::Homogeneous);
    }
    let m = config.num_agents();
    let x = config.budget().div_int(config.rounds());
    if x <= sorted.values[1] {
        return (sorted, Theorem3Case::Case1);
    }
    if x > sorted.values[m - 1].mul_int(m as u64) {
        return (sorted, Theorem3Case::Case4);
    }
    for i in 1..m {
        let t_i = sorted.values[i - 1];
        let t_next = sorted.values[i];
        let lo3 = t_i.mul_int(i as u64);
        let hi3 = t_next.mul_int(i as u64);
        if lo3 < x && x <= hi3 {
            return (sorted, Theorem3Case::Case3 { i });
        }
        let hi2 = t_next.mul_int(i as u64 + 1);
        if hi3 < x && x <= hi2 {
            return (sorted, Theorem3Case::Case2 { i });
        }
    }
    (sorted, Theorem3Case::NotCovered)
}

/// Maximum number of tasks collectable with known truthful thresholds: buy N
/// tasks at each threshold level, cheapest first, plus a partial block at the
/// first level the budget cannot fill. Greedy is optimal here because every
/// task has unit value and a constant per-agent unit cost.
pub fn opt_star(config: &GameConfig) -> u64 {
    let n = config.rounds() as u64;
    let mut remaining = config.budget();
    let mut count = 0u64;
    let mut thresholds = config.true_thresholds().to_vec();
    thresholds.sort();
    for t in thresholds {
        if t.is_zero() {
            count += n;
            continue;
        }
        let k = remaining
            .div_floor(t)
            .expect("nonzero threshold")
            .clamp(0, n as i128) as u64;
        count += k;
        remaining = remaining
            .checked_sub(t.mul_int(k))
            .expect("greedy never overspends");
    }
    count
}

/// The summation form of the packing optimum, kept as a cross-check for the
/// greedy oracle. Terms run over i = 0..M-1 (the printed i = M term divides
/// by a nonexistent threshold and is dropped); negative numerators clamp to
/// zero and zero-threshold levels contribute N free tasks.
pub fn opt_star_formula(config: &GameConfig) -> u64 {
    let n = config.rounds() as i128;
    let sorted = SortedThresholds::of(config);
    let budget = config.budget().as_ratio();
    let mut total = 0i128;
    let mut prefix = Ratio::zero();
    for t in &sorted.values {
        let numer = budget - prefix * Ratio::from_integer(n);
        let t = t.as_ratio();
        let term = if numer < Ratio::zero() {
            0
        } else if t.is_zero() {
            n
        } else {
            (numer / t).floor().to_integer().min(n)
        };
        total += term;
        prefix += t;
    }
    total as u64
}

/// Per-agent utilities under honest homogeneous play, evaluated in closed
/// form: `U_m = min(N, floor((B - sum of earlier utilities)/T*)) * T*`.
/// A zero threshold means all tasks are free and all utilities are zero.
pub fn closed_form_homogeneous_utilities(
    budget: Money,
    rounds: u32,
    num_agents: usize,
    t_star: Money,
) -> Vec<Money> {
    if t_star.is_zero() {
        return vec![Money::zero(); num_agents];
    }
    let mut used = Money::zero();
    (0..num_agents)
        .map(|_| {
            let remaining = budget.checked_sub(used).expect("utilities exceed budget");
            let k = remaining
                .div_floor(t_star)
                .expect("nonzero threshold")
                .clamp(0, rounds as i128) as u64;
            let u = t_star.mul_int(k);
            used += u;
            u
        })
        .collect()
}

/// Which bound case a `RegretReport` carries.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundCase {
    Case1BudgetLeT2,
    Case2Mid,
    Case3ITi,
    Case4Large,
    Homogeneous,
    NoBoundApplicable,
}

impl BoundCase {
    pub fn label(self) -> &'static str {
        match self {
            BoundCase::Case1BudgetLeT2 => "case1_budget_le_t2",
            BoundCase::Case2Mid => "case2_mid",
            BoundCase::Case3ITi => "case3_i_ti",
            BoundCase::Case4Large => "case4_large",
            BoundCase::Homogeneous => "homogeneous",
            BoundCase::NoBoundApplicable => "not_applicable",
        }
    }
}

/// Regret summary of one game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegretReport {
    pub opt_star: u64,
    pub collected: u64,
    /// `OPT* - collected`; non-negative whenever the mechanism cannot beat
    /// the informed optimum.
    pub regret: i64,
    pub bound: Option<u64>,
    pub bound_case: BoundCase,
}

/// Regret without a bound evaluation.
pub fn regret(config: &GameConfig, transcript: &GameTranscript) -> RegretReport {
    let opt = opt_star(config);
    let collected = transcript.collected();
    RegretReport {
        opt_star: opt,
        collected,
        regret: opt as i64 - collected as i64,
        bound: None,
        bound_case: BoundCase::NoBoundApplicable,
    }
}

/// Regret with the heterogeneous bound attached.
pub fn regret_with_bound(config: &GameConfig, transcript: &GameTranscript) -> RegretReport {
    let mut report = regret(config, transcript);
    let (bound, case) = theorem3_bound(config);
    report.bound = bound;
    report.bound_case = case;
    report
}

/// Evaluates the regret upper bound: `OPT*` minus the guaranteed collection
/// term of the matching case. Homogeneous configs are bounded by zero.
///
/// For very small budgets the Case-1 guarantee `ceil(B/T(2))` can exceed
/// `OPT*` (the cheapest agent cannot even be paid once); the theorem is
/// vacuous there and the bound is reported as not applicable rather than
/// clamped.
pub fn theorem3_bound(config: &GameConfig) -> (Option<u64>, BoundCase) {
    let opt = opt_star(config) as i128;
    let (sorted, case) = detect_case(config);
    let n = config.rounds() as i128;
    let m = config.num_agents() as i128;
    let b = config.budget();
    let (guaranteed, bound_case) = match case {
        Theorem3Case::Homogeneous => return (Some(0), BoundCase::Homogeneous),
        Theorem3Case::NotCovered => return (None, BoundCase::NoBoundApplicable),
        Theorem3Case::Case1 => {
            let t2 = sorted.values[1];
            let g = b.div_ceil(t2).unwrap_or(0);
            (g, BoundCase::Case1BudgetLeT2)
        }
        Theorem3Case::Case2 { i } => {
            let t_next = sorted.values[i];
            let spent = t_next.mul_int(i as u64 * n as u64);
            let leftover = b.checked_sub(spent).expect("case 2 implies B > iNT(i+1)");
            let g = i as i128 * n + leftover.div_floor(t_next).expect("nonzero threshold");
            (g, BoundCase::Case2Mid)
        }
        Theorem3Case::Case3 { i } => (i as i128 * n, BoundCase::Case3ITi),
        Theorem3Case::Case4 => (m * n, BoundCase::Case4Large),
    };
    let bound = opt - guaranteed;
    if bound < 0 {
        (None, BoundCase::NoBoundApplicable)
    } else {
        (Some(bound as u64), bound_case)
    }
}

/// True iff the number of selected agents never decreases across rounds.
pub fn lemma1_check(transcript: &GameTranscript) -> bool {
    transcript
        .outcomes()
        .windows(2)
        .all(|w| w[0].selected.len() <= w[1].selected.len())
}

/// Fraction of the informed optimum the mechanism collected, in [0, 1].
/// An empty optimum counts as fully collected (nothing to collect).
pub fn data_fraction(report: &RegretReport) -> Ratio<i128> {
    if report.opt_star == 0 {
        return Ratio::from_integer(1);
    }
    Ratio::new(report.collected as i128, report.opt_star as i128)
}
