//! Seeded random instances.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use ndarray::Array2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::bayesian::{BayesianError, BayesianGame};
use crate::game::{EdgeGame, GameError, PolymatrixGame};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Topology {
    Complete,
    Cycle,
    Star,
    /// Complete bipartite between players `0..n/2` and `n/2..n`.
    Bipartite,
    /// Erdős–Rényi: each pair independently with the given probability.
    Gnp(f64),
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Complete => write!(f, "complete"),
            Topology::Cycle => write!(f, "cycle"),
            Topology::Star => write!(f, "star"),
            Topology::Bipartite => write!(f, "bipartite"),
            Topology::Gnp(p) => write!(f, "gnp({p})"),
        }
    }
}

impl FromStr for Topology {
    type Err = GenerateError;

    /// Accepts `complete`, `cycle`, `star`, `bipartite`, `gnp(P)` and `gnp:P`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || GenerateError::Topology(s.to_string());
        match s {
            "complete" => Ok(Topology::Complete),
            "cycle" => Ok(Topology::Cycle),
            "star" => Ok(Topology::Star),
            "bipartite" => Ok(Topology::Bipartite),
            _ => {
                let p = s
                    .strip_prefix("gnp(")
                    .and_then(|r| r.strip_suffix(')'))
                    .or_else(|| s.strip_prefix("gnp:"))
                    .ok_or_else(bad)?;
                let p: f64 = p.trim().parse().map_err(|_| bad())?;
                if !(0.0..=1.0).contains(&p) {
                    return Err(GenerateError::EdgeProbability(p));
                }
                Ok(Topology::Gnp(p))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GenerateError {
    #[error("unknown topology `{0}` (expected complete, cycle, star, bipartite or gnp(P))")]
    Topology(String),
    #[error("edge probability {0} is outside [0, 1]")]
    EdgeProbability(f64),
    #[error("need at least 2 players, got {0}")]
    TooFewPlayers(usize),
    #[error("strategy range {lo}..={hi} is empty or contains 0")]
    StrategyRange { lo: usize, hi: usize },
    #[error("all Bayesian dimensions must be at least 1")]
    BayesianDimension,
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Bayesian(#[from] BayesianError),
}

fn uniform_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Array2<f64> {
    Array2::from_shape_simple_fn((rows, cols), || rng.gen::<f64>())
}

/// Raw game with i.i.d. uniform `[0, 1)` payoffs. Deterministic in `seed`.
pub fn generate_polymatrix(
    topology: Topology,
    players: usize,
    strategies: RangeInclusive<usize>,
    seed: u64,
) -> Result<PolymatrixGame, GenerateError> {
    if players < 2 {
        return Err(GenerateError::TooFewPlayers(players));
    }
    let (lo, hi) = (*strategies.start(), *strategies.end());
    if lo == 0 || lo > hi {
        return Err(GenerateError::StrategyRange { lo, hi });
    }
    if let Topology::Gnp(p) = topology {
        if !(0.0..=1.0).contains(&p) {
            return Err(GenerateError::EdgeProbability(p));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts: Vec<usize> = (0..players).map(|_| rng.gen_range(lo..=hi)).collect();
    let n = players;
    let pairs: Vec<(usize, usize)> = match topology {
        Topology::Complete => (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect(),
        Topology::Cycle => {
            let mut v: Vec<_> = (0..n - 1).map(|i| (i, i + 1)).collect();
            if n > 2 {
                v.push((n - 1, 0));
            }
            v
        }
        Topology::Star => (1..n).map(|j| (0, j)).collect(),
        Topology::Bipartite => {
            let half = n / 2;
            (0..half)
                .flat_map(|i| (half..n).map(move |j| (i, j)))
                .collect()
        }
        Topology::Gnp(p) => {
            let mut v = Vec::new();
            for i in 0..n {
                for j in i + 1..n {
                    if rng.gen::<f64>() < p {
                        v.push((i, j));
                    }
                }
            }
            v
        }
    };
    let edges = pairs
        .into_iter()
        .map(|(u, v)| {
            let a = uniform_matrix(&mut rng, counts[u], counts[v]);
            let b = uniform_matrix(&mut rng, counts[v], counts[u]);
            EdgeGame::new(u, v, a, b)
        })
        .collect();
    Ok(PolymatrixGame::new(counts, edges)?)
}

/// Raw Bayesian game: positive type weights normalized to a joint
/// distribution, payoffs i.i.d. uniform `[0, 1)`.
pub fn generate_bayesian(
    row_types: usize,
    col_types: usize,
    row_strategies: usize,
    col_strategies: usize,
    seed: u64,
) -> Result<BayesianGame, GenerateError> {
    if row_types == 0 || col_types == 0 || row_strategies == 0 || col_strategies == 0 {
        return Err(GenerateError::BayesianDimension);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = Array2::from_shape_simple_fn((row_types, col_types), || 1.0 - rng.gen::<f64>());
    let p = &weights / weights.sum();
    let count = row_types * col_types;
    let r = (0..count)
        .map(|_| uniform_matrix(&mut rng, row_strategies, col_strategies))
        .collect();
    let c = (0..count)
        .map(|_| uniform_matrix(&mut rng, row_strategies, col_strategies))
        .collect();
    Ok(BayesianGame::new(p, r, c, (row_strategies, col_strategies))?)
}
