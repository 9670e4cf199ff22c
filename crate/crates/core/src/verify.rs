//! Independent equilibrium checks.
//!
//! Regrets here are recomputed directly from the edge matrices with
//! compensated summation in a fixed order (ascending neighbor index,
//! ascending strategy index). Nothing in this module calls into the
//! solver's regret code.

use serde::Serialize;
use thiserror::Error;

use crate::bayesian::{bayesian_regret, BayesianError, BayesianGame};
use crate::game::PolymatrixGame;
use crate::profile::StrategyProfile;

/// Slack on every `f <= ε` verdict.
pub const VERIFY_TOL: f64 = 1e-7;
/// Largest probability grid `brute_force_min_regret` will enumerate.
pub const MAX_GRID_POINTS: u128 = 10_000_000;

/// Neumaier's compensated sum.
#[derive(Debug, Default, Clone, Copy)]
struct CompensatedSum {
    sum: f64,
    carry: f64,
}

impl CompensatedSum {
    fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(self) -> f64 {
        self.sum + self.carry
    }
}

/// Regret of `player` at `profile`, from scratch.
pub fn independent_regret(game: &PolymatrixGame, profile: &StrategyProfile, player: usize) -> f64 {
    let m = game.strategy_count(player);
    let mut pays = vec![CompensatedSum::default(); m];
    for nb in game.neighbors(player) {
        let a = game.payoff_matrix(player, nb);
        let xj = profile.strategy(nb.player);
        for (k, acc) in pays.iter_mut().enumerate() {
            for (q, &prob) in xj.iter().enumerate() {
                acc.add(a[[k, q]] * prob);
            }
        }
    }
    let pays: Vec<f64> = pays.into_iter().map(CompensatedSum::value).collect();
    let mut best = f64::NEG_INFINITY;
    let mut current = CompensatedSum::default();
    for (k, &v) in pays.iter().enumerate() {
        if v > best {
            best = v;
        }
        current.add(profile.strategy(player)[k] * v);
    }
    if m == 0 {
        return 0.0;
    }
    best - current.value()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub pass: bool,
    pub max_regret: f64,
    /// Lowest-indexed player attaining the maximum regret.
    pub worst_player: usize,
    pub regrets: Vec<f64>,
}

/// Checks `f(profile) <= epsilon + VERIFY_TOL`.
pub fn verify_epsilon_ne(game: &PolymatrixGame, profile: &StrategyProfile, epsilon: f64) -> Verdict {
    let regrets: Vec<f64> = (0..game.player_count())
        .map(|i| independent_regret(game, profile, i))
        .collect();
    let mut worst_player = 0;
    for (i, &r) in regrets.iter().enumerate() {
        if r > regrets[worst_player] {
            worst_player = i;
        }
    }
    let max_regret = regrets[worst_player];
    Verdict {
        pass: max_regret <= epsilon + VERIFY_TOL,
        max_regret,
        worst_player,
        regrets,
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VerifyError {
    #[error("grid step {0} does not divide 1 into a whole number of parts")]
    BadStep(f64),
    #[error("probability grid has about {points} points, limit is {limit}")]
    GridTooLarge { points: u128, limit: u128 },
    #[error(transparent)]
    Bayesian(#[from] BayesianError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridMinimum {
    pub profile: StrategyProfile,
    pub max_regret: f64,
    pub points: u128,
}

fn binomial(n: u128, k: u128) -> u128 {
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

/// All ways to split `parts` units over `m` strategies, in lexicographic order.
fn compositions(parts: usize, m: usize) -> Vec<Vec<usize>> {
    fn rec(left: usize, slots: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if slots == 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(left - k, slots - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(parts, m, &mut Vec::with_capacity(m), &mut out);
    out
}

/// Exhaustive minimum of the maximum regret over the product of per-player
/// probability grids with spacing `grid_step`. Ties keep the first profile in
/// lexicographic order.
pub fn brute_force_min_regret(game: &PolymatrixGame, grid_step: f64) -> Result<GridMinimum, VerifyError> {
    if !(grid_step > 0.0 && grid_step <= 1.0) {
        return Err(VerifyError::BadStep(grid_step));
    }
    let parts = (1.0 / grid_step).round();
    if (parts * grid_step - 1.0).abs() > 1e-9 {
        return Err(VerifyError::BadStep(grid_step));
    }
    let parts = parts as usize;
    let mut points: u128 = 1;
    for &m in game.strategy_counts() {
        let per_player = binomial((parts + m - 1) as u128, (m - 1) as u128);
        points = points.saturating_mul(per_player);
        if points > MAX_GRID_POINTS {
            return Err(VerifyError::GridTooLarge {
                points,
                limit: MAX_GRID_POINTS,
            });
        }
    }
    let grids: Vec<Vec<Vec<f64>>> = game
        .strategy_counts()
        .iter()
        .map(|&m| {
            compositions(parts, m)
                .into_iter()
                .map(|c| c.into_iter().map(|k| k as f64 / parts as f64).collect())
                .collect()
        })
        .collect();

    let n = game.player_count();
    let mut odometer = vec![0usize; n];
    let mut best: Option<(f64, Vec<usize>)> = None;
    loop {
        let profile =
            StrategyProfile::from_raw(odometer.iter().zip(&grids).map(|(&k, g)| g[k].clone()).collect());
        let f = (0..n)
            .map(|i| independent_regret(game, &profile, i))
            .fold(f64::NEG_INFINITY, f64::max);
        if best.as_ref().is_none_or(|(b, _)| f < *b) {
            best = Some((f, odometer.clone()));
        }
        // last player varies fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                let (max_regret, idx) = best.expect("grid is never empty");
                let profile = StrategyProfile::from_raw(
                    idx.iter().zip(&grids).map(|(&k, g)| g[k].clone()).collect(),
                );
                return Ok(GridMinimum {
                    profile,
                    max_regret,
                    points,
                });
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < grids[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesianVerdict {
    pub pass: bool,
    pub max_regret: f64,
    pub row_regrets: Vec<f64>,
    pub col_regrets: Vec<f64>,
}

/// Every type's regret is at most `epsilon + VERIFY_TOL`.
pub fn verify_bayesian(
    game: &BayesianGame,
    x: &[Vec<f64>],
    y: &[Vec<f64>],
    epsilon: f64,
) -> Result<BayesianVerdict, VerifyError> {
    let r = bayesian_regret(game, x, y)?;
    let max_regret = r.max();
    Ok(BayesianVerdict {
        pass: max_regret <= epsilon + VERIFY_TOL,
        max_regret,
        row_regrets: r.row,
        col_regrets: r.col,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::EdgeGame;
    use ndarray::array;

    fn matching_pennies() -> PolymatrixGame {
        let e = EdgeGame::new(0, 1, array![[1.0, 0.0], [0.0, 1.0]], array![[0.0, 1.0], [1.0, 0.0]]);
        PolymatrixGame::with_normalized_flag(vec![2, 2], vec![e], true).unwrap()
    }

    fn coordination() -> PolymatrixGame {
        let a = array![[1.0, 0.0], [0.0, 1.0]];
        PolymatrixGame::with_normalized_flag(vec![2, 2], vec![EdgeGame::new(0, 1, a.clone(), a)], true)
            .unwrap()
    }

    #[test]
    fn compensated_sum_recovers_lost_bits() {
        let mut s = CompensatedSum::default();
        for x in [1.0, 1e100, 1.0, -1e100] {
            s.add(x);
        }
        assert_eq!(s.value(), 2.0);
    }

    #[test]
    fn exact_equilibrium_passes_at_zero() {
        let v = verify_epsilon_ne(&matching_pennies(), &StrategyProfile::uniform(&[2, 2]), 0.0);
        assert!(v.pass);
        assert_eq!(v.max_regret, 0.0);
    }

    #[test]
    fn miscoordination_fails() {
        let x = StrategyProfile::pure(&[2, 2], &[0, 1]).unwrap();
        let v = verify_epsilon_ne(&coordination(), &x, 0.6);
        assert!(!v.pass);
        assert_eq!(v.max_regret, 1.0);
        assert_eq!(v.worst_player, 0);
    }

    #[test]
    fn grid_finds_mixed_equilibrium() {
        let g = brute_force_min_regret(&matching_pennies(), 0.1).unwrap();
        assert_eq!(g.max_regret, 0.0);
        assert_eq!(g.profile.strategy(0), &[0.5, 0.5]);
        assert_eq!(g.profile.strategy(1), &[0.5, 0.5]);
        assert_eq!(g.points, 121);
    }

    #[test]
    fn grid_finds_pure_coordination() {
        let g = brute_force_min_regret(&coordination(), 0.5).unwrap();
        assert_eq!(g.max_regret, 0.0);
        let s0 = g.profile.strategy(0);
        assert!(s0 == [1.0, 0.0] || s0 == [0.0, 1.0]);
        assert_eq!(g.profile.strategy(0), g.profile.strategy(1));
    }

    #[test]
    fn grid_refuses_huge_and_bad_steps() {
        assert!(matches!(
            brute_force_min_regret(&matching_pennies(), 0.3),
            Err(VerifyError::BadStep(_))
        ));
        let big = PolymatrixGame::new(vec![6; 4], vec![]).unwrap();
        assert!(matches!(
            brute_force_min_regret(&big, 0.01),
            Err(VerifyError::GridTooLarge { .. })
        ));
    }

    #[test]
    fn compositions_are_lexicographic() {
        assert_eq!(
            compositions(2, 2),
            vec![vec![0, 2], vec![1, 1], vec![2, 0]]
        );
        assert_eq!(compositions(3, 3).len() as u128, binomial(5, 2));
    }
}
