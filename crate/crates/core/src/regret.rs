//! Best responses, regrets, and the δ-best-response directional derivative
//! used as the descent gradient.

use serde::Serialize;

use crate::game::{dot, PolymatrixGame};
use crate::profile::StrategyProfile;

/// Inclusive tolerance for best-response and δ-best-response membership.
pub const TIE_TOL: f64 = 1e-9;
/// Inclusive tolerance for membership in the max-regret set.
pub const MAX_REGRET_SET_TOL: f64 = 1e-9;

fn vec_max(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

/// Indices within `delta + TIE_TOL` of the maximum of `pays`.
pub fn near_max_indices(pays: &[f64], delta: f64) -> Vec<usize> {
    let threshold = vec_max(pays) - delta - TIE_TOL;
    pays.iter()
        .enumerate()
        .filter(|(_, &p)| p >= threshold)
        .map(|(k, _)| k)
        .collect()
}

/// `max_k pays(x)_i[k]`.
pub fn best_response_payoff(game: &PolymatrixGame, profile: &StrategyProfile, player: usize) -> f64 {
    vec_max(&game.payoff_vector(profile, player))
}

pub fn pure_best_responses(
    game: &PolymatrixGame,
    profile: &StrategyProfile,
    player: usize,
) -> Vec<usize> {
    near_max_indices(&game.payoff_vector(profile, player), 0.0)
}

/// Pure strategies whose payoff is within `delta` of the best-response payoff.
/// `delta = 0` gives the pure best responses.
pub fn delta_best_responses(
    game: &PolymatrixGame,
    profile: &StrategyProfile,
    player: usize,
    delta: f64,
) -> Vec<usize> {
    near_max_indices(&game.payoff_vector(profile, player), delta)
}

/// Everything the solver needs to know about one profile.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegretReport {
    pub delta: f64,
    /// `pays(x)_i` for every player.
    pub payoff_vectors: Vec<Vec<f64>>,
    pub payoffs: Vec<f64>,
    pub best_response_payoffs: Vec<f64>,
    /// `f_i = best_response_payoff - payoff`.
    pub regrets: Vec<f64>,
    pub best_responses: Vec<Vec<usize>>,
    pub delta_best_responses: Vec<Vec<usize>>,
}

impl RegretReport {
    /// `f(x) = max_i f_i(x)`.
    pub fn max_regret(&self) -> f64 {
        vec_max(&self.regrets)
    }

    /// `K(x)`: players whose regret is within `MAX_REGRET_SET_TOL` of the max.
    pub fn max_regret_set(&self) -> Vec<usize> {
        let f = self.max_regret();
        self.regrets
            .iter()
            .enumerate()
            .filter(|(_, &r)| r >= f - MAX_REGRET_SET_TOL)
            .map(|(i, _)| i)
            .collect()
    }
}

pub fn regret_report(game: &PolymatrixGame, profile: &StrategyProfile, delta: f64) -> RegretReport {
    let n = game.player_count();
    let mut report = RegretReport {
        delta,
        payoff_vectors: Vec::with_capacity(n),
        payoffs: Vec::with_capacity(n),
        best_response_payoffs: Vec::with_capacity(n),
        regrets: Vec::with_capacity(n),
        best_responses: Vec::with_capacity(n),
        delta_best_responses: Vec::with_capacity(n),
    };
    for i in 0..n {
        let pays = game.payoff_vector(profile, i);
        let u = dot(profile.strategy(i), &pays);
        let brp = vec_max(&pays);
        report.payoffs.push(u);
        report.best_response_payoffs.push(brp);
        report.regrets.push(brp - u);
        report.best_responses.push(near_max_indices(&pays, 0.0));
        report.delta_best_responses.push(near_max_indices(&pays, delta));
        report.payoff_vectors.push(pays);
    }
    report
}

/// `Df^δ_i(x, x')`: the δ-best-response set and `u_i(x)` are taken at `x`,
/// the inner maximum at `x'`.
///
/// `max_{k in Br^δ_i(x)} pays(x')_i[k] - u(x_i, x') - u(x'_i, x) + u_i(x)`
pub fn df_delta_i(
    game: &PolymatrixGame,
    x: &StrategyProfile,
    xp: &StrategyProfile,
    player: usize,
    delta: f64,
) -> f64 {
    let pays_x = game.payoff_vector(x, player);
    let pays_xp = game.payoff_vector(xp, player);
    df_delta_i_from_vectors(&pays_x, &pays_xp, x.strategy(player), xp.strategy(player), delta)
}

pub(crate) fn df_delta_i_from_vectors(
    pays_x: &[f64],
    pays_xp: &[f64],
    xi: &[f64],
    xpi: &[f64],
    delta: f64,
) -> f64 {
    let inner = near_max_indices(pays_x, delta)
        .into_iter()
        .map(|k| pays_xp[k])
        .fold(f64::NEG_INFINITY, f64::max);
    inner - dot(xi, pays_xp) - dot(xpi, pays_x) + dot(xi, pays_x)
}

/// `Df^δ(x, x') = max_{i in K(x)} Df^δ_i(x, x') - f(x)`.
pub fn df_delta(game: &PolymatrixGame, x: &StrategyProfile, xp: &StrategyProfile, delta: f64) -> f64 {
    let report = regret_report(game, x, delta);
    max_df_over(game, &report, x, xp, &report.max_regret_set()) - report.max_regret()
}

/// `max_{i in players} Df^δ_i(x, x')`, reusing the payoff vectors at `x`
/// stored in `report`.
pub fn max_df_over(
    game: &PolymatrixGame,
    report: &RegretReport,
    x: &StrategyProfile,
    xp: &StrategyProfile,
    players: &[usize],
) -> f64 {
    players
        .iter()
        .map(|&i| {
            let pays_xp = game.payoff_vector(xp, i);
            df_delta_i_from_vectors(
                &report.payoff_vectors[i],
                &pays_xp,
                x.strategy(i),
                xp.strategy(i),
                report.delta,
            )
        })
        .fold(f64::NEG_INFINITY, f64::max)
}
