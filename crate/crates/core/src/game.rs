//! Polymatrix games: an undirected interaction graph with one bimatrix game
//! per edge, per-player payoff normalization, and expected payoff evaluation.
//!
//! Each edge stores both payoff matrices once. `payoffs_u` is indexed
//! `[strategy of u, strategy of v]` and `payoffs_v` is indexed
//! `[strategy of v, strategy of u]`, so from either endpoint the matrix rows
//! belong to the owner.

use std::fmt;

use ndarray::Array2;
use serde::Serialize;
use thiserror::Error;

use crate::profile::StrategyProfile;

/// Tolerance for the normalized-game invariant (max payoff 1, min payoff 0).
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Payoff ranges at or below this are treated as constant.
const DEGENERATE_RANGE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeGame {
    pub u: usize,
    pub v: usize,
    /// `m_u x m_v`, payoffs to `u`.
    pub payoffs_u: Array2<f64>,
    /// `m_v x m_u`, payoffs to `v`.
    pub payoffs_v: Array2<f64>,
}

impl EdgeGame {
    pub fn new(u: usize, v: usize, payoffs_u: Array2<f64>, payoffs_v: Array2<f64>) -> Self {
        Self {
            u,
            v,
            payoffs_u,
            payoffs_v,
        }
    }

    /// The matrix whose rows are `player`'s strategies.
    pub fn matrix_for(&self, player: usize) -> Option<&Array2<f64>> {
        if player == self.u {
            Some(&self.payoffs_u)
        } else if player == self.v {
            Some(&self.payoffs_v)
        } else {
            None
        }
    }
}

/// One broken structural rule of a polymatrix game.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NoPlayers,
    NoStrategies {
        player: usize,
    },
    SelfLoop {
        edge: usize,
        player: usize,
    },
    EndpointOutOfRange {
        edge: usize,
        endpoint: usize,
    },
    DuplicateEdge {
        edge: usize,
        first: usize,
    },
    ShapeMismatch {
        edge: usize,
        owner: usize,
        expected: (usize, usize),
        found: (usize, usize),
    },
    NonFinitePayoff {
        edge: usize,
        owner: usize,
    },
    NotNormalized {
        player: usize,
        max: f64,
        min: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoPlayers => write!(f, "game has no players"),
            Violation::NoStrategies { player } => {
                write!(f, "player {player}: no strategies")
            }
            Violation::SelfLoop { edge, player } => {
                write!(f, "edge {edge}: self-loop on player {player}")
            }
            Violation::EndpointOutOfRange { edge, endpoint } => {
                write!(f, "edge {edge}: endpoint {endpoint} out of range")
            }
            Violation::DuplicateEdge { edge, first } => {
                write!(f, "edge {edge}: duplicate of edge {first}")
            }
            Violation::ShapeMismatch {
                edge,
                owner,
                expected,
                found,
            } => write!(
                f,
                "edge {edge}: shape mismatch for player {owner}'s matrix, expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Violation::NonFinitePayoff { edge, owner } => {
                write!(f, "edge {edge}: non-finite payoff in player {owner}'s matrix")
            }
            Violation::NotNormalized { player, max, min } => write!(
                f,
                "player {player}: flagged normalized but payoff range is [{min}, {max}]"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("invalid polymatrix game: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

/// Structural checks on raw parts: endpoints, self-loops, duplicates, shapes.
pub fn validate_parts(strategy_counts: &[usize], edges: &[EdgeGame]) -> Vec<Violation> {
    let n = strategy_counts.len();
    let mut out = Vec::new();
    if n == 0 {
        out.push(Violation::NoPlayers);
    }
    for (player, &m) in strategy_counts.iter().enumerate() {
        if m == 0 {
            out.push(Violation::NoStrategies { player });
        }
    }
    let mut seen: std::collections::HashMap<(usize, usize), usize> = Default::default();
    for (idx, e) in edges.iter().enumerate() {
        let mut in_range = true;
        for endpoint in [e.u, e.v] {
            if endpoint >= n {
                out.push(Violation::EndpointOutOfRange {
                    edge: idx,
                    endpoint,
                });
                in_range = false;
            }
        }
        if e.u == e.v {
            out.push(Violation::SelfLoop {
                edge: idx,
                player: e.u,
            });
            continue;
        }
        let key = (e.u.min(e.v), e.u.max(e.v));
        if let Some(&first) = seen.get(&key) {
            out.push(Violation::DuplicateEdge { edge: idx, first });
        } else {
            seen.insert(key, idx);
        }
        if !in_range {
            continue;
        }
        for (owner, other, m) in [(e.u, e.v, &e.payoffs_u), (e.v, e.u, &e.payoffs_v)] {
            let expected = (strategy_counts[owner], strategy_counts[other]);
            if m.dim() != expected {
                out.push(Violation::ShapeMismatch {
                    edge: idx,
                    owner,
                    expected,
                    found: m.dim(),
                });
            }
            if m.iter().any(|z| !z.is_finite()) {
                out.push(Violation::NonFinitePayoff { edge: idx, owner });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Neighbor {
    pub player: usize,
    pub edge: usize,
}

/// Per-player data of the affine payoff transformation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerScaling {
    pub pmax: f64,
    pub pmin: f64,
    /// `1 / (pmax - pmin)`, zero for degenerate players.
    pub scale: f64,
    /// `pmin / degree`, subtracted from every entry before scaling.
    pub shift: f64,
    pub degree: usize,
    pub degenerate: bool,
}

impl PlayerScaling {
    /// Maps a total raw payoff of this player to its normalized value.
    pub fn normalize_payoff(&self, raw: f64) -> f64 {
        if self.degenerate {
            0.0
        } else {
            self.scale * (raw - self.pmin)
        }
    }

    /// Inverse of [`normalize_payoff`](Self::normalize_payoff) for
    /// non-degenerate players.
    pub fn raw_payoff(&self, normalized: f64) -> f64 {
        if self.degenerate {
            self.pmin
        } else {
            normalized * (self.pmax - self.pmin) + self.pmin
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NormalizationRecord {
    pub players: Vec<PlayerScaling>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PolymatrixGame {
    strategy_counts: Vec<usize>,
    edges: Vec<EdgeGame>,
    adjacency: Vec<Vec<Neighbor>>,
    normalized: bool,
}

impl PolymatrixGame {
    /// A raw (not normalized) game.
    pub fn new(strategy_counts: Vec<usize>, edges: Vec<EdgeGame>) -> Result<Self, GameError> {
        Self::with_normalized_flag(strategy_counts, edges, false)
    }

    /// Builds a game carrying the given `normalized` flag. A game flagged as
    /// normalized must satisfy the payoff-range invariant.
    pub fn with_normalized_flag(
        strategy_counts: Vec<usize>,
        edges: Vec<EdgeGame>,
        normalized: bool,
    ) -> Result<Self, GameError> {
        let violations = validate_parts(&strategy_counts, &edges);
        if !violations.is_empty() {
            return Err(GameError::Invalid(violations));
        }
        let game = Self::assemble(strategy_counts, edges, normalized);
        let violations = game.validate();
        if !violations.is_empty() {
            return Err(GameError::Invalid(violations));
        }
        Ok(game)
    }

    fn assemble(strategy_counts: Vec<usize>, edges: Vec<EdgeGame>, normalized: bool) -> Self {
        let mut adjacency = vec![Vec::new(); strategy_counts.len()];
        for (idx, e) in edges.iter().enumerate() {
            adjacency[e.u].push(Neighbor {
                player: e.v,
                edge: idx,
            });
            adjacency[e.v].push(Neighbor {
                player: e.u,
                edge: idx,
            });
        }
        for list in &mut adjacency {
            list.sort_by_key(|nb| nb.player);
        }
        Self {
            strategy_counts,
            edges,
            adjacency,
            normalized,
        }
    }

    /// All invariant violations, including the normalized payoff range when
    /// the game is flagged normalized. Empty for a well-formed game.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = validate_parts(&self.strategy_counts, &self.edges);
        if out.is_empty() && self.normalized {
            for player in 0..self.player_count() {
                let (max, min) = self.payoff_extremes(player);
                let unit = (max - 1.0).abs() <= NORMALIZATION_TOL && min.abs() <= NORMALIZATION_TOL;
                let zero = max.abs() <= NORMALIZATION_TOL && min.abs() <= NORMALIZATION_TOL;
                if !(unit || zero) {
                    out.push(Violation::NotNormalized { player, max, min });
                }
            }
        }
        out
    }

    pub fn player_count(&self) -> usize {
        self.strategy_counts.len()
    }

    pub fn strategy_counts(&self) -> &[usize] {
        &self.strategy_counts
    }

    pub fn strategy_count(&self, player: usize) -> usize {
        self.strategy_counts[player]
    }

    pub fn edges(&self) -> &[EdgeGame] {
        &self.edges
    }

    /// Neighbors of `player`, sorted by neighbor index.
    pub fn neighbors(&self, player: usize) -> &[Neighbor] {
        &self.adjacency[player]
    }

    pub fn degree(&self, player: usize) -> usize {
        self.adjacency[player].len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// `A_ij`: the matrix of `player` against `neighbor`.
    pub fn payoff_matrix(&self, player: usize, neighbor: &Neighbor) -> &Array2<f64> {
        self.edges[neighbor.edge]
            .matrix_for(player)
            .expect("adjacency refers to an incident edge")
    }

    /// Largest and smallest payoff `player` can get over pure profiles:
    /// the best (worst) row of the sum of per-edge row maxima (minima).
    /// Isolated players get `(0, 0)`.
    pub fn payoff_extremes(&self, player: usize) -> (f64, f64) {
        let m = self.strategy_counts[player];
        let mut best = vec![0.0; m];
        let mut worst = vec![0.0; m];
        for nb in self.neighbors(player) {
            let a = self.payoff_matrix(player, nb);
            for (p, row) in a.rows().into_iter().enumerate() {
                best[p] += row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                worst[p] += row.iter().copied().fold(f64::INFINITY, f64::min);
            }
        }
        if self.degree(player) == 0 {
            return (0.0, 0.0);
        }
        let pmax = best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let pmin = worst.iter().copied().fold(f64::INFINITY, f64::min);
        (pmax, pmin)
    }

    /// Applies `T_i(z) = (z - pmin_i / deg(i)) / (pmax_i - pmin_i)` to every
    /// entry of every matrix owned by player `i`. Constant-payoff players get
    /// all-zero matrices.
    pub fn normalize(&self) -> (PolymatrixGame, NormalizationRecord) {
        let players: Vec<PlayerScaling> = (0..self.player_count())
            .map(|i| {
                let (pmax, pmin) = self.payoff_extremes(i);
                let degree = self.degree(i);
                let degenerate = degree == 0 || pmax - pmin <= DEGENERATE_RANGE * pmax.abs().max(1.0);
                let (scale, shift) = if degenerate {
                    (0.0, 0.0)
                } else {
                    (1.0 / (pmax - pmin), pmin / degree as f64)
                };
                PlayerScaling {
                    pmax,
                    pmin,
                    scale,
                    shift,
                    degree,
                    degenerate,
                }
            })
            .collect();
        let transform = |owner: usize, m: &Array2<f64>| -> Array2<f64> {
            let s = &players[owner];
            if s.degenerate {
                Array2::zeros(m.dim())
            } else {
                m.mapv(|z| s.scale * (z - s.shift))
            }
        };
        let edges = self
            .edges
            .iter()
            .map(|e| EdgeGame {
                u: e.u,
                v: e.v,
                payoffs_u: transform(e.u, &e.payoffs_u),
                payoffs_v: transform(e.v, &e.payoffs_v),
            })
            .collect();
        let game = Self::assemble(self.strategy_counts.clone(), edges, true);
        (game, NormalizationRecord { players })
    }

    /// `pays(x)_i = sum_{j in N(i)} A_ij x_j`: payoff of each pure strategy of
    /// `player` against the rest of the profile.
    pub fn payoff_vector(&self, profile: &StrategyProfile, player: usize) -> Vec<f64> {
        let mut pays = vec![0.0; self.strategy_counts[player]];
        for nb in self.neighbors(player) {
            let a = self.payoff_matrix(player, nb);
            let xj = profile.strategy(nb.player);
            for (acc, row) in pays.iter_mut().zip(a.rows()) {
                *acc += row.iter().zip(xj).map(|(a, x)| a * x).sum::<f64>();
            }
        }
        pays
    }

    /// `u_i(x) = x_i^T pays(x)_i`.
    pub fn payoff(&self, profile: &StrategyProfile, player: usize) -> f64 {
        self.payoff_against(profile.strategy(player), profile, player)
    }

    /// `alt^T pays(x)_i`. `alt` may be any vector of length `m_i`, including a
    /// signed difference of two strategies.
    pub fn payoff_against(&self, alt: &[f64], profile: &StrategyProfile, player: usize) -> f64 {
        dot(alt, &self.payoff_vector(profile, player))
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
