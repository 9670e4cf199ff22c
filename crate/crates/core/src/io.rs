//! Versioned JSON file formats.
//!
//! * `polymatrix-v1`: players, edges with both payoff matrices (rows belong
//!   to the matrix owner), optional `normalized` flag.
//! * `bayes2p-v1`: dimensions, joint type distribution `p`, and per type
//!   pair matrices `R` and `C`.
//!
//! Numbers are written in the shortest form that parses back to the same
//! `f64`, so every file round-trips bit for bit.

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::bayesian::{BayesianError, BayesianGame, ReductionMap};
use crate::descent::{IterationTrace, SolveResult};
use crate::game::{EdgeGame, GameError, PolymatrixGame};
use crate::profile::{ProfileError, StrategyProfile};

pub const GAME_FORMAT: &str = "polymatrix-v1";
pub const BAYES_FORMAT: &str = "bayes2p-v1";

#[derive(Debug, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format tag `{found}`, expected `{expected}`")]
    Format { expected: &'static str, found: String },
    #[error("field `{path}`: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Bayesian(#[from] BayesianError),
    #[error("profile: {0}")]
    Profile(#[from] ProfileError),
}

fn field(path: impl Into<String>, message: impl Into<String>) -> IoError {
    IoError::Field {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlayerEntry {
    pub strategies: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeEntry {
    pub u: usize,
    pub v: usize,
    pub payoffs_u: Vec<Vec<f64>>,
    pub payoffs_v: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameFileV1 {
    pub format: String,
    pub players: Vec<PlayerEntry>,
    pub edges: Vec<EdgeEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub normalized: Option<bool>,
}

fn to_rows(m: &Array2<f64>) -> Vec<Vec<f64>> {
    m.rows().into_iter().map(|r| r.to_vec()).collect()
}

fn from_rows(rows: &[Vec<f64>], path: &str) -> Result<Array2<f64>, IoError> {
    let cols = rows.first().map_or(0, Vec::len);
    for (r, row) in rows.iter().enumerate() {
        if row.len() != cols {
            return Err(field(
                format!("{path}[{r}]"),
                format!("row has {} entries, expected {cols}", row.len()),
            ));
        }
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Array2::from_shape_vec((rows.len(), cols), flat).map_err(|e| field(path, e.to_string()))
}

impl GameFileV1 {
    pub fn from_game(game: &PolymatrixGame) -> Self {
        GameFileV1 {
            format: GAME_FORMAT.to_string(),
            players: game
                .strategy_counts()
                .iter()
                .map(|&m| PlayerEntry { strategies: m })
                .collect(),
            edges: game
                .edges()
                .iter()
                .map(|e| EdgeEntry {
                    u: e.u,
                    v: e.v,
                    payoffs_u: to_rows(&e.payoffs_u),
                    payoffs_v: to_rows(&e.payoffs_v),
                })
                .collect(),
            normalized: Some(game.is_normalized()),
        }
    }

    pub fn into_game(self) -> Result<PolymatrixGame, IoError> {
        if self.format != GAME_FORMAT {
            return Err(IoError::Format {
                expected: GAME_FORMAT,
                found: self.format,
            });
        }
        let counts = self.players.iter().map(|p| p.strategies).collect();
        let edges = self
            .edges
            .iter()
            .enumerate()
            .map(|(k, e)| {
                Ok(EdgeGame::new(
                    e.u,
                    e.v,
                    from_rows(&e.payoffs_u, &format!("edges[{k}].payoffs_u"))?,
                    from_rows(&e.payoffs_v, &format!("edges[{k}].payoffs_v"))?,
                ))
            })
            .collect::<Result<Vec<_>, IoError>>()?;
        Ok(PolymatrixGame::with_normalized_flag(
            counts,
            edges,
            self.normalized.unwrap_or(false),
        )?)
    }
}

pub fn parse_game(text: &str) -> Result<PolymatrixGame, IoError> {
    serde_json::from_str::<GameFileV1>(text)?.into_game()
}

pub fn write_game(game: &PolymatrixGame) -> String {
    to_json(&GameFileV1::from_game(game))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesDims {
    pub m: usize,
    pub n: usize,
    pub k1: usize,
    pub k2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BayesFileV1 {
    pub format: String,
    pub dims: BayesDims,
    pub p: Vec<Vec<f64>>,
    #[serde(rename = "R")]
    pub r: Vec<Vec<Vec<Vec<f64>>>>,
    #[serde(rename = "C")]
    pub c: Vec<Vec<Vec<Vec<f64>>>>,
}

impl BayesFileV1 {
    pub fn from_game(game: &BayesianGame) -> Self {
        let (m, n) = (game.row_types(), game.col_types());
        let grid = |get: &dyn Fn(usize, usize) -> Vec<Vec<f64>>| -> Vec<Vec<Vec<Vec<f64>>>> {
            (0..m).map(|i| (0..n).map(|j| get(i, j)).collect()).collect()
        };
        BayesFileV1 {
            format: BAYES_FORMAT.to_string(),
            dims: BayesDims {
                m,
                n,
                k1: game.row_strategies(),
                k2: game.col_strategies(),
            },
            p: to_rows(game.type_distribution()),
            r: grid(&|i, j| to_rows(game.row_payoff(i, j))),
            c: grid(&|i, j| to_rows(game.col_payoff(i, j))),
        }
    }

    pub fn into_game(self) -> Result<BayesianGame, IoError> {
        if self.format != BAYES_FORMAT {
            return Err(IoError::Format {
                expected: BAYES_FORMAT,
                found: self.format,
            });
        }
        let BayesDims { m, n, k1, k2 } = self.dims;
        let p = from_rows(&self.p, "p")?;
        if p.dim() != (m, n) {
            return Err(field("p", format!("shape {:?} does not match dims ({m}, {n})", p.dim())));
        }
        let mats = |name: &str, grid: &[Vec<Vec<Vec<f64>>>]| -> Result<Vec<Array2<f64>>, IoError> {
            if grid.len() != m {
                return Err(field(name, format!("{} row types, expected {m}", grid.len())));
            }
            let mut out = Vec::with_capacity(m * n);
            for (i, row) in grid.iter().enumerate() {
                if row.len() != n {
                    return Err(field(
                        format!("{name}[{i}]"),
                        format!("{} column types, expected {n}", row.len()),
                    ));
                }
                for (j, rows) in row.iter().enumerate() {
                    let path = format!("{name}[{i}][{j}]");
                    let mat = from_rows(rows, &path)?;
                    if mat.dim() != (k1, k2) {
                        return Err(field(path, format!("shape {:?}, expected ({k1}, {k2})", mat.dim())));
                    }
                    out.push(mat);
                }
            }
            Ok(out)
        };
        let r = mats("R", &self.r)?;
        let c = mats("C", &self.c)?;
        Ok(BayesianGame::new(p, r, c, (k1, k2))?)
    }
}

pub fn parse_bayesian(text: &str) -> Result<BayesianGame, IoError> {
    serde_json::from_str::<BayesFileV1>(text)?.into_game()
}

pub fn write_bayesian(game: &BayesianGame) -> String {
    to_json(&BayesFileV1::from_game(game))
}

/// Reads a profile from either a bare array of strategy vectors or any JSON
/// object with a `profile` field (such as a solve output).
pub fn parse_profile(text: &str) -> Result<StrategyProfile, IoError> {
    let value: Value = serde_json::from_str(text)?;
    let inner = match value {
        Value::Object(mut obj) => obj
            .remove("profile")
            .ok_or_else(|| field("profile", "missing"))?,
        other => other,
    };
    let strategies: Vec<Vec<f64>> = serde_json::from_value(inner)?;
    Ok(StrategyProfile::new(strategies)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveOutput<'a> {
    pub delta: f64,
    pub termination: &'static str,
    pub iterations: usize,
    pub max_regret: f64,
    pub regrets: &'a [f64],
    pub profile: &'a [Vec<f64>],
}

pub fn write_solve_result(result: &SolveResult, delta: f64) -> String {
    to_json(&SolveOutput {
        delta,
        termination: result.termination.as_str(),
        iterations: result.iterations,
        max_regret: result.max_regret(),
        regrets: &result.report.regrets,
        profile: result.profile.strategies(),
    })
}

pub fn write_traces(traces: &[IterationTrace]) -> String {
    to_json(&traces)
}

pub fn write_reduction_map(map: &ReductionMap) -> String {
    to_json(map)
}
