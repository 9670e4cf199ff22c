//! Steepest descent on the maximum regret.
//!
//! Each iteration solves a linear program for the direction `x'` that
//! minimizes `max_{i in K(x)} Df^δ_i(x, x')`, then moves a fixed fraction
//! `ε = δ / (δ + 2)` of the way towards it. The loop stops as soon as the
//! maximum regret is at most `0.5 + δ`.

use std::ops::Range;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::game::PolymatrixGame;
use crate::lp::{solve_lp, LinearProgram, LpError};
use crate::profile::{ProfileError, StrategyProfile};
use crate::regret::{max_df_over, regret_report, RegretReport};

/// Slack on the stopping test `f <= 0.5 + δ`.
pub const TARGET_TOL: f64 = 1e-9;
/// Slack on the analytical bounds checked at runtime.
pub const BOUND_TOL: f64 = 1e-7;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("delta must lie in (0, 0.5], got {0}")]
    InvalidDelta(f64),
    #[error("the solver needs a normalized game")]
    NotNormalized,
    #[error("invalid start profile: {0}")]
    Profile(#[from] ProfileError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(
        "iteration {iteration}: steepest-descent value {w_star} exceeds the half-mixture bound 0.5 at regret {max_regret}"
    )]
    StationaryAboveTarget {
        iteration: usize,
        max_regret: f64,
        w_star: f64,
    },
}

pub fn check_delta(delta: f64) -> Result<(), SolveError> {
    if delta > 0.0 && delta <= 0.5 {
        Ok(())
    } else {
        Err(SolveError::InvalidDelta(delta))
    }
}

/// `ε = δ / (δ + 2)`.
pub fn step_size(delta: f64) -> f64 {
    delta / (delta + 2.0)
}

/// `ceil(((δ + 2) / δ)^2) + 2`, the iteration bound plus a margin of two.
pub fn default_max_iterations(delta: f64) -> usize {
    let ratio = (delta + 2.0) / delta;
    // absorb rounding so that exact squares such as 21^2 do not round up
    (ratio * ratio - 1e-9).ceil() as usize + 2
}

#[derive(Debug, Clone, PartialEq)]
pub enum StartProfile {
    Uniform,
    Random(u64),
    Explicit(StrategyProfile),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentConfig {
    delta: f64,
    pub start: StartProfile,
    pub max_iterations: usize,
    pub diagnostics: bool,
}

impl DescentConfig {
    pub fn new(delta: f64) -> Result<Self, SolveError> {
        check_delta(delta)?;
        Ok(Self {
            delta,
            start: StartProfile::Uniform,
            max_iterations: default_max_iterations(delta),
            diagnostics: false,
        })
    }

    pub fn with_start(mut self, start: StartProfile) -> Self {
        self.start = start;
        self
    }

    pub fn with_diagnostics(mut self, on: bool) -> Self {
        self.diagnostics = on;
        self
    }

    pub fn with_max_iterations(mut self, max_iterations: usize) -> Self {
        self.max_iterations = max_iterations;
        self
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> f64 {
        step_size(self.delta)
    }

    fn start_profile(&self, game: &PolymatrixGame) -> Result<StrategyProfile, SolveError> {
        let counts = game.strategy_counts();
        Ok(match &self.start {
            StartProfile::Uniform => StrategyProfile::uniform(counts),
            StartProfile::Random(seed) => {
                StrategyProfile::random(counts, &mut ChaCha8Rng::seed_from_u64(*seed))
            }
            StartProfile::Explicit(p) => {
                p.check_shape(counts)?;
                p.clone()
            }
        })
    }
}

/// Where each group of LP variables lives.
#[derive(Debug, Clone, PartialEq)]
pub struct LpLayout {
    /// Column range of each player's `x'_i` block.
    pub blocks: Vec<Range<usize>>,
    /// `(player, column)` of the `l_i` variable of each player in `K(x)`.
    pub l_vars: Vec<(usize, usize)>,
    pub w: usize,
    pub max_regret_set: Vec<usize>,
}

/// Builds the steepest-descent LP at `x`. `report` must describe `x`.
///
/// Variables: the `x'` blocks (each a probability vector), one free `l_i` per
/// `i in K(x)`, and a free `w`. Minimize `w` subject to
/// `pays(x')_i[k] <= l_i` for `k` in the δ-best responses of `i` at `x`, and
/// `l_i - u(x_i, x') - u(x'_i, x) + u_i(x) <= w`.
pub fn build_steepest_descent_lp(
    game: &PolymatrixGame,
    x: &StrategyProfile,
    report: &RegretReport,
) -> (LinearProgram, LpLayout) {
    let counts = game.strategy_counts();
    let mut blocks = Vec::with_capacity(counts.len());
    let mut next = 0;
    for &m in counts {
        blocks.push(next..next + m);
        next += m;
    }
    let max_regret_set = report.max_regret_set();
    let l_vars: Vec<(usize, usize)> = max_regret_set
        .iter()
        .enumerate()
        .map(|(k, &i)| (i, next + k))
        .collect();
    let w = next + l_vars.len();
    let total = w + 1;

    let mut lp = LinearProgram::new("steepest-descent", total);
    for block in &blocks {
        for c in block.clone() {
            lp.set_bounds(c, 0.0, 1.0);
        }
        let mut row = vec![0.0; total];
        row[block.clone()].iter_mut().for_each(|a| *a = 1.0);
        lp.add_eq(row, 1.0);
    }
    for &(_, l) in &l_vars {
        lp.set_free(l);
    }
    lp.set_free(w);
    lp.set_objective(w, 1.0);

    for &(i, l) in &l_vars {
        // pays(x')_i[k] - l_i <= 0
        for &k in &report.delta_best_responses[i] {
            let mut row = vec![0.0; total];
            for nb in game.neighbors(i) {
                let a = game.payoff_matrix(i, nb);
                let block = blocks[nb.player].start;
                for (q, &coef) in a.row(k).iter().enumerate() {
                    row[block + q] += coef;
                }
            }
            row[l] = -1.0;
            lp.add_le(row, 0.0);
        }
        // l_i - x_i^T A_ij x'_j (summed over j) - pays(x)_i . x'_i - w <= -u_i(x)
        let mut row = vec![0.0; total];
        row[l] = 1.0;
        row[w] = -1.0;
        let xi = x.strategy(i);
        for nb in game.neighbors(i) {
            let a = game.payoff_matrix(i, nb);
            let block = blocks[nb.player].start;
            for (q, col) in a.columns().into_iter().enumerate() {
                row[block + q] -= col.iter().zip(xi).map(|(a, p)| a * p).sum::<f64>();
            }
        }
        for (k, &p) in report.payoff_vectors[i].iter().enumerate() {
            row[blocks[i].start + k] -= p;
        }
        lp.add_le(row, -report.payoffs[i]);
    }

    let layout = LpLayout {
        blocks,
        l_vars,
        w,
        max_regret_set,
    };
    (lp, layout)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Direction {
    /// `Q(x)`.
    pub profile: StrategyProfile,
    /// Optimal LP value, `max_{i in K(x)} Df^δ_i(x, Q(x))`.
    pub w_star: f64,
}

pub fn steepest_descent_direction(
    game: &PolymatrixGame,
    x: &StrategyProfile,
    delta: f64,
) -> Result<Direction, SolveError> {
    let report = regret_report(game, x, delta);
    direction_from_report(game, x, &report)
}

fn direction_from_report(
    game: &PolymatrixGame,
    x: &StrategyProfile,
    report: &RegretReport,
) -> Result<Direction, SolveError> {
    let (lp, layout) = build_steepest_descent_lp(game, x, report);
    let solution = solve_lp(&lp)?.into_optimal(&lp)?;
    let strategies = layout
        .blocks
        .iter()
        .map(|block| {
            let raw: Vec<f64> = solution.values[block.clone()]
                .iter()
                .map(|&p| p.max(0.0))
                .collect();
            let total: f64 = raw.iter().sum();
            raw.into_iter().map(|p| p / total).collect()
        })
        .collect();
    Ok(Direction {
        profile: StrategyProfile::from_raw(strategies),
        w_star: solution.objective,
    })
}

/// `(1 - ε) x + ε x'`.
pub fn step(x: &StrategyProfile, xp: &StrategyProfile, epsilon: f64) -> StrategyProfile {
    x.mix(xp, epsilon)
}

/// `[f_new - f] - [ε (D - f) + ε² (1 - D)]`; never positive in exact
/// arithmetic when `D` is the maximum of `Df^δ_i` over all players.
pub fn gain_bound_residual(f: f64, f_new: f64, d: f64, epsilon: f64) -> f64 {
    (f_new - f) - (epsilon * (d - f) + epsilon * epsilon * (1.0 - d))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub iteration: usize,
    pub f_before: f64,
    pub f_after: f64,
    /// LP optimum, so that `Df^δ(x, Q(x)) = w_star - f_before`.
    pub w_star: f64,
    /// `max_{i in K(x)} Df^δ_i(x, Q(x))`, recomputed outside the LP.
    pub d_max_regret_set: f64,
    /// `D = max_i Df^δ_i(x, Q(x))` over all players.
    pub d_all: f64,
    pub gain_bound_residual: f64,
    /// `D - f > -δ`: the per-iteration decrease is not guaranteed.
    pub stationary: bool,
    pub max_regret_set: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    TargetReached,
    MaxIterations,
}

impl Termination {
    pub fn as_str(self) -> &'static str {
        match self {
            Termination::TargetReached => "target-reached",
            Termination::MaxIterations => "max-iterations",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub profile: StrategyProfile,
    pub report: RegretReport,
    pub iterations: usize,
    pub traces: Vec<IterationTrace>,
    pub termination: Termination,
}

impl SolveResult {
    pub fn max_regret(&self) -> f64 {
        self.report.max_regret()
    }
}

/// Runs the descent from the configured start until `f <= 0.5 + δ` or the
/// iteration budget runs out.
pub fn solve(game: &PolymatrixGame, config: &DescentConfig) -> Result<SolveResult, SolveError> {
    if !game.is_normalized() {
        return Err(SolveError::NotNormalized);
    }
    let delta = config.delta;
    let epsilon = config.epsilon();
    let target = 0.5 + delta + TARGET_TOL;
    let mut x = config.start_profile(game)?;
    let mut report = regret_report(game, &x, delta);
    let mut traces = Vec::new();
    let mut iterations = 0;

    let termination = loop {
        let f = report.max_regret();
        if f <= target {
            break Termination::TargetReached;
        }
        if iterations >= config.max_iterations {
            break Termination::MaxIterations;
        }
        let direction = direction_from_report(game, &x, &report)?;
        // the half-mixture direction has value <= 0.5, so the optimum must too
        if direction.w_star > 0.5 + BOUND_TOL {
            return Err(SolveError::StationaryAboveTarget {
                iteration: iterations,
                max_regret: f,
                w_star: direction.w_star,
            });
        }
        let next = step(&x, &direction.profile, epsilon);
        let next_report = regret_report(game, &next, delta);
        if config.diagnostics {
            let all: Vec<usize> = (0..game.player_count()).collect();
            let k = report.max_regret_set();
            let d_all = max_df_over(game, &report, &x, &direction.profile, &all);
            let d_k = max_df_over(game, &report, &x, &direction.profile, &k);
            let f_new = next_report.max_regret();
            traces.push(IterationTrace {
                iteration: iterations,
                f_before: f,
                f_after: f_new,
                w_star: direction.w_star,
                d_max_regret_set: d_k,
                d_all,
                gain_bound_residual: gain_bound_residual(f, f_new, d_all, epsilon),
                stationary: d_all - f > -delta,
                max_regret_set: k,
            });
        }
        x = next;
        report = next_report;
        iterations += 1;
    };

    Ok(SolveResult {
        profile: x,
        report,
        iterations,
        traces,
        termination,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StationarityCertificate {
    /// `max_{i in K(x)} Df^δ_i(x, (x̄ + x) / 2)` with `x̄` a pure best response
    /// profile against `x`.
    pub witness: f64,
    pub max_regret: f64,
    /// `witness <= 0.5 + BOUND_TOL`.
    pub certified: bool,
}

/// Evaluates the half-mixture direction towards a best-response profile.
/// In a normalized game the witness never exceeds 0.5, so every
/// δ-stationary point has regret at most `0.5 + δ`.
pub fn stationarity_certificate(
    game: &PolymatrixGame,
    x: &StrategyProfile,
    delta: f64,
) -> StationarityCertificate {
    let report = regret_report(game, x, delta);
    let choices: Vec<usize> = report.best_responses.iter().map(|br| br[0]).collect();
    let best = StrategyProfile::pure(game.strategy_counts(), &choices)
        .expect("best responses index valid strategies");
    let half = x.mix(&best, 0.5);
    let witness = max_df_over(game, &report, x, &half, &report.max_regret_set());
    StationarityCertificate {
        witness,
        max_regret: report.max_regret(),
        certified: witness <= 0.5 + BOUND_TOL,
    }
}
