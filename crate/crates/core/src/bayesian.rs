//! Two-player Bayesian games and their reduction to bipartite polymatrix
//! games: one polymatrix player per type, one edge per (row type, column
//! type) pair, edge payoffs weighted by the conditional type probabilities.

use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

use crate::game::{EdgeGame, GameError, PolymatrixGame};
use crate::profile::StrategyProfile;

/// Tolerance on `sum p = 1` and on the conditional consistency identities.
pub const DISTRIBUTION_TOL: f64 = 1e-9;
const DEGENERATE_RANGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BayesianError {
    #[error("all dimensions must be positive, got m={m} n={n} k1={k1} k2={k2}")]
    EmptyDimension { m: usize, n: usize, k1: usize, k2: usize },
    #[error("type distribution has shape {found:?}, expected {expected:?}")]
    DistributionShape {
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("type probability p[{i}][{j}] = {value} is negative or not finite")]
    BadProbability { i: usize, j: usize, value: f64 },
    #[error("type probabilities sum to {0}, expected 1")]
    BadTotal(f64),
    #[error("expected {expected} payoff matrices for the {which} player, found {found}")]
    MatrixCount {
        which: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("{which}[{i}][{j}] has shape {found:?}, expected {expected:?}")]
    MatrixShape {
        which: &'static str,
        i: usize,
        j: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    #[error("{which}[{i}][{j}] has payoff {value} outside [0, 1]")]
    PayoffRange {
        which: &'static str,
        i: usize,
        j: usize,
        value: f64,
    },
    #[error("the game must be rescaled before it is reduced")]
    NotRescaled,
    #[error("row strategies: expected {expected_types} types with {expected_len} entries each")]
    RowStrategies {
        expected_types: usize,
        expected_len: usize,
    },
    #[error("column strategies: expected {expected_types} types with {expected_len} entries each")]
    ColStrategies {
        expected_types: usize,
        expected_len: usize,
    },
    #[error(transparent)]
    Game(#[from] GameError),
}

/// A two-player Bayesian game. `row_payoffs[i * n + j]` and
/// `col_payoffs[i * n + j]` are the `k1 x k2` matrices of type pair `(i, j)`;
/// the column player's payoff is `y^T C^T x`.
#[derive(Debug, Clone, PartialEq)]
pub struct BayesianGame {
    row_types: usize,
    col_types: usize,
    row_strategies: usize,
    col_strategies: usize,
    p: Array2<f64>,
    row_payoffs: Vec<Array2<f64>>,
    col_payoffs: Vec<Array2<f64>>,
    rescaled: bool,
}

impl BayesianGame {
    /// Validates a raw game: `p` is a joint distribution and every payoff
    /// lies in `[0, 1]`.
    pub fn new(
        p: Array2<f64>,
        row_payoffs: Vec<Array2<f64>>,
        col_payoffs: Vec<Array2<f64>>,
        strategies: (usize, usize),
    ) -> Result<Self, BayesianError> {
        let (m, n) = p.dim();
        let (k1, k2) = strategies;
        if m == 0 || n == 0 || k1 == 0 || k2 == 0 {
            return Err(BayesianError::EmptyDimension { m, n, k1, k2 });
        }
        for ((i, j), &value) in p.indexed_iter() {
            if !(value.is_finite() && value >= 0.0) {
                return Err(BayesianError::BadProbability { i, j, value });
            }
        }
        let total = p.sum();
        if (total - 1.0).abs() > DISTRIBUTION_TOL {
            return Err(BayesianError::BadTotal(total));
        }
        for (which, mats) in [("R", &row_payoffs), ("C", &col_payoffs)] {
            if mats.len() != m * n {
                return Err(BayesianError::MatrixCount {
                    which,
                    expected: m * n,
                    found: mats.len(),
                });
            }
            for (idx, mat) in mats.iter().enumerate() {
                let (i, j) = (idx / n, idx % n);
                if mat.dim() != (k1, k2) {
                    return Err(BayesianError::MatrixShape {
                        which,
                        i,
                        j,
                        expected: (k1, k2),
                        found: mat.dim(),
                    });
                }
                if let Some(&value) = mat.iter().find(|z| !(0.0..=1.0).contains(*z)) {
                    return Err(BayesianError::PayoffRange { which, i, j, value });
                }
            }
        }
        Ok(Self {
            row_types: m,
            col_types: n,
            row_strategies: k1,
            col_strategies: k2,
            p,
            row_payoffs,
            col_payoffs,
            rescaled: false,
        })
    }

    pub fn row_types(&self) -> usize {
        self.row_types
    }

    pub fn col_types(&self) -> usize {
        self.col_types
    }

    pub fn row_strategies(&self) -> usize {
        self.row_strategies
    }

    pub fn col_strategies(&self) -> usize {
        self.col_strategies
    }

    pub fn type_distribution(&self) -> &Array2<f64> {
        &self.p
    }

    /// `R_ij`, `k1 x k2`.
    pub fn row_payoff(&self, i: usize, j: usize) -> &Array2<f64> {
        &self.row_payoffs[i * self.col_types + j]
    }

    /// `C_ij`, `k1 x k2`.
    pub fn col_payoff(&self, i: usize, j: usize) -> &Array2<f64> {
        &self.col_payoffs[i * self.col_types + j]
    }

    pub fn is_rescaled(&self) -> bool {
        self.rescaled
    }

    /// Expected payoff vector of row type `i` over its pure strategies:
    /// `sum_j p^R_i(j) R_ij y_j`. Zero for a dropped type.
    pub fn row_payoff_vector(&self, view: &TypeDistributionView, i: usize, y: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.row_strategies];
        for j in 0..self.col_types {
            let w = view.row_conditional(i, j);
            if w == 0.0 {
                continue;
            }
            let r = self.row_payoff(i, j);
            for (acc, row) in out.iter_mut().zip(r.rows()) {
                *acc += w * row.iter().zip(&y[j]).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }

    /// Expected payoff vector of column type `j`: `sum_i p^C_j(i) C_ij^T x_i`.
    pub fn col_payoff_vector(&self, view: &TypeDistributionView, j: usize, x: &[Vec<f64>]) -> Vec<f64> {
        let mut out = vec![0.0; self.col_strategies];
        for i in 0..self.row_types {
            let w = view.col_conditional(i, j);
            if w == 0.0 {
                continue;
            }
            let c = self.col_payoff(i, j);
            for (b, acc) in out.iter_mut().enumerate() {
                *acc += w * c.column(b).iter().zip(&x[i]).map(|(a, p)| a * p).sum::<f64>();
            }
        }
        out
    }

    /// Max and min expected payoff of row type `i` over pure strategies of
    /// both sides (the column player may use a different pure strategy per
    /// type).
    pub fn row_type_extremes(&self, view: &TypeDistributionView, i: usize) -> (f64, f64) {
        let mut best = vec![0.0; self.row_strategies];
        let mut worst = vec![0.0; self.row_strategies];
        for j in 0..self.col_types {
            let w = view.row_conditional(i, j);
            if w == 0.0 {
                continue;
            }
            for (a, row) in self.row_payoff(i, j).rows().into_iter().enumerate() {
                best[a] += row.iter().map(|z| w * z).fold(f64::NEG_INFINITY, f64::max);
                worst[a] += row.iter().map(|z| w * z).fold(f64::INFINITY, f64::min);
            }
        }
        extremes(&best, &worst)
    }

    /// Column-type counterpart of [`row_type_extremes`](Self::row_type_extremes).
    pub fn col_type_extremes(&self, view: &TypeDistributionView, j: usize) -> (f64, f64) {
        let mut best = vec![0.0; self.col_strategies];
        let mut worst = vec![0.0; self.col_strategies];
        for i in 0..self.row_types {
            let w = view.col_conditional(i, j);
            if w == 0.0 {
                continue;
            }
            let c = self.col_payoff(i, j);
            for (b, col) in c.columns().into_iter().enumerate() {
                best[b] += col.iter().map(|z| w * z).fold(f64::NEG_INFINITY, f64::max);
                worst[b] += col.iter().map(|z| w * z).fold(f64::INFINITY, f64::min);
            }
        }
        extremes(&best, &worst)
    }
}

fn extremes(best: &[f64], worst: &[f64]) -> (f64, f64) {
    (
        best.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        worst.iter().copied().fold(f64::INFINITY, f64::min),
    )
}

/// Marginal and conditional type probabilities.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeDistributionView {
    pub row_marginals: Vec<f64>,
    pub col_marginals: Vec<f64>,
    /// `m x n`, entry `(i, j)` is `p^R_i(j) = p_ij / p^R_i` (zero for dropped
    /// row types).
    pub row_conditionals: Vec<Vec<f64>>,
    /// `m x n`, entry `(i, j)` is `p^C_j(i) = p_ij / p^C_j` (zero for dropped
    /// column types).
    pub col_conditionals: Vec<Vec<f64>>,
    pub dropped_row_types: Vec<usize>,
    pub dropped_col_types: Vec<usize>,
}

impl TypeDistributionView {
    pub fn row_conditional(&self, i: usize, j: usize) -> f64 {
        self.row_conditionals[i][j]
    }

    pub fn col_conditional(&self, i: usize, j: usize) -> f64 {
        self.col_conditionals[i][j]
    }

    pub fn surviving_row_types(&self) -> Vec<usize> {
        (0..self.row_marginals.len())
            .filter(|i| !self.dropped_row_types.contains(i))
            .collect()
    }

    pub fn surviving_col_types(&self) -> Vec<usize> {
        (0..self.col_marginals.len())
            .filter(|j| !self.dropped_col_types.contains(j))
            .collect()
    }
}

/// Marginals by row/column sums; types with zero marginal are dropped.
pub fn type_views(game: &BayesianGame) -> TypeDistributionView {
    let (m, n) = game.p.dim();
    let row_marginals: Vec<f64> = (0..m).map(|i| game.p.row(i).sum()).collect();
    let col_marginals: Vec<f64> = (0..n).map(|j| game.p.column(j).sum()).collect();
    let mut row_conditionals = vec![vec![0.0; n]; m];
    let mut col_conditionals = vec![vec![0.0; n]; m];
    for i in 0..m {
        for j in 0..n {
            let pij = game.p[[i, j]];
            if row_marginals[i] > 0.0 {
                row_conditionals[i][j] = pij / row_marginals[i];
            }
            if col_marginals[j] > 0.0 {
                col_conditionals[i][j] = pij / col_marginals[j];
            }
        }
    }
    TypeDistributionView {
        dropped_row_types: (0..m).filter(|&i| row_marginals[i] <= 0.0).collect(),
        dropped_col_types: (0..n).filter(|&j| col_marginals[j] <= 0.0).collect(),
        row_marginals,
        col_marginals,
        row_conditionals,
        col_conditionals,
    }
}

/// Rescales each surviving type so that its expected payoff over pure
/// strategies spans exactly `[0, 1]`: every entry `z` of type `i`'s matrices
/// becomes `(z - pmin) / (pmax - pmin)`. Constant-payoff types get zero
/// matrices; dropped types are left untouched.
pub fn rescale_bayesian(game: &BayesianGame) -> BayesianGame {
    let view = type_views(game);
    let (m, n) = (game.row_types, game.col_types);
    let mut out = game.clone();
    for i in view.surviving_row_types() {
        let (pmax, pmin) = game.row_type_extremes(&view, i);
        for j in 0..n {
            let mat = &mut out.row_payoffs[i * n + j];
            *mat = affine(mat, pmax, pmin);
        }
    }
    for j in view.surviving_col_types() {
        let (pmax, pmin) = game.col_type_extremes(&view, j);
        for i in 0..m {
            let mat = &mut out.col_payoffs[i * n + j];
            *mat = affine(mat, pmax, pmin);
        }
    }
    out.rescaled = true;
    out
}

fn affine(mat: &Array2<f64>, pmax: f64, pmin: f64) -> Array2<f64> {
    if pmax - pmin <= DEGENERATE_RANGE * pmax.abs().max(1.0) {
        Array2::zeros(mat.dim())
    } else {
        mat.mapv(|z| (z - pmin) / (pmax - pmin))
    }
}

/// Which Bayesian type a polymatrix player stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "side", content = "type", rename_all = "lowercase")]
pub enum TypeRef {
    Row(usize),
    Col(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReductionMap {
    /// Polymatrix player index of each row type, `None` if dropped.
    pub row_players: Vec<Option<usize>>,
    /// Polymatrix player index of each column type, `None` if dropped.
    pub col_players: Vec<Option<usize>>,
    /// Inverse map, indexed by polymatrix player.
    pub players: Vec<TypeRef>,
}

impl ReductionMap {
    /// Splits a polymatrix profile into per-type strategies. Dropped types
    /// get the uniform strategy.
    pub fn split_profile(
        &self,
        profile: &StrategyProfile,
        row_strategies: usize,
        col_strategies: usize,
    ) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let pick = |slot: &Option<usize>, k: usize| match slot {
            Some(p) => profile.strategy(*p).to_vec(),
            None => vec![1.0 / k as f64; k],
        };
        (
            self.row_players.iter().map(|s| pick(s, row_strategies)).collect(),
            self.col_players.iter().map(|s| pick(s, col_strategies)).collect(),
        )
    }

    /// Assembles a polymatrix profile from per-type strategies.
    pub fn join_profile(&self, x: &[Vec<f64>], y: &[Vec<f64>]) -> StrategyProfile {
        let strategies = self
            .players
            .iter()
            .map(|t| match *t {
                TypeRef::Row(i) => x[i].clone(),
                TypeRef::Col(j) => y[j].clone(),
            })
            .collect();
        StrategyProfile::from_raw(strategies)
    }
}

/// Complete bipartite polymatrix game over the surviving types. Row type
/// `i`'s matrix against column type `j` is `p^R_i(j) R_ij`; column type
/// `j`'s matrix is `(p^C_j(i) C_ij)^T`. The result is flagged normalized.
pub fn reduce_to_polymatrix(
    game: &BayesianGame,
) -> Result<(PolymatrixGame, ReductionMap), BayesianError> {
    if !game.rescaled {
        return Err(BayesianError::NotRescaled);
    }
    let view = type_views(game);
    let rows = view.surviving_row_types();
    let cols = view.surviving_col_types();
    let mut row_players = vec![None; game.row_types];
    let mut col_players = vec![None; game.col_types];
    let mut players = Vec::with_capacity(rows.len() + cols.len());
    let mut counts = Vec::with_capacity(rows.len() + cols.len());
    for &i in &rows {
        row_players[i] = Some(players.len());
        players.push(TypeRef::Row(i));
        counts.push(game.row_strategies);
    }
    for &j in &cols {
        col_players[j] = Some(players.len());
        players.push(TypeRef::Col(j));
        counts.push(game.col_strategies);
    }
    let mut edges = Vec::with_capacity(rows.len() * cols.len());
    for &i in &rows {
        for &j in &cols {
            let r_star = game.row_payoff(i, j) * view.row_conditional(i, j);
            let c_star = game.col_payoff(i, j) * view.col_conditional(i, j);
            edges.push(EdgeGame::new(
                row_players[i].unwrap(),
                col_players[j].unwrap(),
                r_star,
                c_star.reversed_axes(),
            ));
        }
    }
    let poly = PolymatrixGame::with_normalized_flag(counts, edges, true)?;
    Ok((
        poly,
        ReductionMap {
            row_players,
            col_players,
            players,
        },
    ))
}

/// Per-type regrets: best pure deviation payoff minus current expected payoff.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BayesianRegrets {
    pub row: Vec<f64>,
    pub col: Vec<f64>,
}

impl BayesianRegrets {
    pub fn max(&self) -> f64 {
        self.row
            .iter()
            .chain(&self.col)
            .copied()
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Regret of every type under `(x, y)`. Dropped types report zero.
pub fn bayesian_regret(
    game: &BayesianGame,
    x: &[Vec<f64>],
    y: &[Vec<f64>],
) -> Result<BayesianRegrets, BayesianError> {
    if x.len() != game.row_types || x.iter().any(|s| s.len() != game.row_strategies) {
        return Err(BayesianError::RowStrategies {
            expected_types: game.row_types,
            expected_len: game.row_strategies,
        });
    }
    if y.len() != game.col_types || y.iter().any(|s| s.len() != game.col_strategies) {
        return Err(BayesianError::ColStrategies {
            expected_types: game.col_types,
            expected_len: game.col_strategies,
        });
    }
    let view = type_views(game);
    let regret = |pays: Vec<f64>, s: &[f64]| {
        let best = pays.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        best - pays.iter().zip(s).map(|(a, b)| a * b).sum::<f64>()
    };
    let row = (0..game.row_types)
        .map(|i| {
            if view.dropped_row_types.contains(&i) {
                0.0
            } else {
                regret(game.row_payoff_vector(&view, i, y), &x[i])
            }
        })
        .collect();
    let col = (0..game.col_types)
        .map(|j| {
            if view.dropped_col_types.contains(&j) {
                0.0
            } else {
                regret(game.col_payoff_vector(&view, j, x), &y[j])
            }
        })
        .collect();
    Ok(BayesianRegrets { row, col })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn single(r: Array2<f64>, c: Array2<f64>) -> BayesianGame {
        BayesianGame::new(array![[1.0]], vec![r], vec![c], (2, 2)).unwrap()
    }

    #[test]
    fn uniform_type_views() {
        let z = Array2::zeros((1, 1));
        let g = BayesianGame::new(
            array![[0.25, 0.25], [0.25, 0.25]],
            vec![z.clone(); 4],
            vec![z; 4],
            (1, 1),
        )
        .unwrap();
        let v = type_views(&g);
        assert_eq!(v.row_marginals, vec![0.5, 0.5]);
        assert_eq!(v.col_marginals, vec![0.5, 0.5]);
        assert!(v.row_conditionals.iter().flatten().all(|&c| c == 0.5));
        assert!(v.col_conditionals.iter().flatten().all(|&c| c == 0.5));
    }

    #[test]
    fn single_type_views() {
        let g = single(Array2::zeros((2, 2)), Array2::zeros((2, 2)));
        let v = type_views(&g);
        assert_eq!(v.row_marginals, vec![1.0]);
        assert_eq!(v.row_conditionals, vec![vec![1.0]]);
        assert_eq!(v.col_conditionals, vec![vec![1.0]]);
    }

    #[test]
    fn zero_marginal_types_are_dropped() {
        let z = Array2::zeros((1, 1));
        let g = BayesianGame::new(array![[0.5, 0.5], [0.0, 0.0]], vec![z.clone(); 4], vec![z; 4], (1, 1))
            .unwrap();
        let v = type_views(&g);
        assert_eq!(v.dropped_row_types, vec![1]);
        assert!(v.dropped_col_types.is_empty());
        assert_eq!(v.surviving_row_types(), vec![0]);
    }

    #[test]
    fn invalid_games_are_rejected() {
        let z = Array2::zeros((2, 2));
        assert!(matches!(
            BayesianGame::new(array![[0.5]], vec![z.clone()], vec![z.clone()], (2, 2)),
            Err(BayesianError::BadTotal(_))
        ));
        assert!(matches!(
            BayesianGame::new(array![[1.0]], vec![z.clone() + 2.0], vec![z.clone()], (2, 2)),
            Err(BayesianError::PayoffRange { which: "R", .. })
        ));
        assert!(matches!(
            BayesianGame::new(array![[1.0]], vec![z.clone()], vec![Array2::zeros((2, 3))], (2, 2)),
            Err(BayesianError::MatrixShape { which: "C", .. })
        ));
    }

    #[test]
    fn single_type_rescale_is_identity_when_range_is_unit() {
        let r = array![[0.0, 1.0], [0.5, 0.5]];
        let g = single(r.clone(), array![[1.0, 0.0], [0.0, 1.0]]);
        let s = rescale_bayesian(&g);
        assert_eq!(s.row_payoff(0, 0), &r);
        assert!(s.is_rescaled());
    }

    #[test]
    fn constant_type_rescales_to_zero() {
        let g = single(Array2::from_elem((2, 2), 0.3), array![[1.0, 0.0], [0.0, 1.0]]);
        let s = rescale_bayesian(&g);
        assert_eq!(s.row_payoff(0, 0), &Array2::<f64>::zeros((2, 2)));
    }

    #[test]
    fn type_extremes_sum_weighted_maxima() {
        let r = array![[1.0, 0.0]];
        let g = BayesianGame::new(
            array![[0.25, 0.25], [0.25, 0.25]],
            vec![r.clone(), r.clone(), r.clone(), r],
            vec![Array2::zeros((1, 2)); 4],
            (1, 2),
        )
        .unwrap();
        let v = type_views(&g);
        assert_eq!(g.row_type_extremes(&v, 0), (1.0, 0.0));
    }

    #[test]
    fn reduction_sizes() {
        let g = single(array![[0.0, 1.0], [1.0, 0.0]], array![[1.0, 0.0], [0.0, 1.0]]);
        assert!(matches!(reduce_to_polymatrix(&g), Err(BayesianError::NotRescaled)));
        let s = rescale_bayesian(&g);
        let (poly, map) = reduce_to_polymatrix(&s).unwrap();
        assert_eq!(poly.player_count(), 2);
        assert_eq!(poly.edges().len(), 1);
        assert_eq!(poly.edges()[0].payoffs_u, *s.row_payoff(0, 0));
        assert_eq!(poly.edges()[0].payoffs_v, s.col_payoff(0, 0).t().to_owned());
        assert_eq!(map.players, vec![TypeRef::Row(0), TypeRef::Col(0)]);
    }

    #[test]
    fn matching_pennies_uniform_has_no_regret() {
        let g = single(array![[1.0, 0.0], [0.0, 1.0]], array![[0.0, 1.0], [1.0, 0.0]]);
        let s = rescale_bayesian(&g);
        let u = vec![vec![0.5, 0.5]];
        let r = bayesian_regret(&s, &u, &u).unwrap();
        assert_eq!(r.row, vec![0.0]);
        assert_eq!(r.col, vec![0.0]);
    }

    #[test]
    fn best_responding_type_has_no_regret() {
        let g = single(array![[1.0, 0.0], [0.0, 1.0]], array![[0.0, 1.0], [1.0, 0.0]]);
        // row best-responds to column's pure 1 by playing 1
        let r = bayesian_regret(&g, &[vec![0.0, 1.0]], &[vec![0.0, 1.0]]).unwrap();
        assert_eq!(r.row, vec![0.0]);
        assert_eq!(r.col, vec![1.0]);
    }
}
