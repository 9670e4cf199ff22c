//! Mixed strategy profiles: one probability vector per player.

use rand::Rng;
use thiserror::Error;

/// Entries in `[-PROBABILITY_CLAMP, 0)` are read as zero on ingestion.
pub const PROBABILITY_CLAMP: f64 = 1e-12;
/// Allowed deviation of a strategy's total mass from 1 on ingestion.
pub const PROBABILITY_SUM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProfileError {
    #[error("player {player} has an empty strategy vector")]
    Empty { player: usize },
    #[error("player {player}, strategy {index}: probability {value} is not finite")]
    NonFinite { player: usize, index: usize, value: f64 },
    #[error("player {player}, strategy {index}: probability {value} is negative")]
    Negative { player: usize, index: usize, value: f64 },
    #[error("player {player}: probabilities sum to {sum}, expected 1")]
    BadSum { player: usize, sum: f64 },
    #[error("profile has {found} players, game has {expected}")]
    PlayerCount { expected: usize, found: usize },
    #[error("player {player}: strategy has length {found}, expected {expected}")]
    StrategyLength {
        player: usize,
        expected: usize,
        found: usize,
    },
    #[error("player {player}: pure strategy {index} out of range")]
    PureOutOfRange { player: usize, index: usize },
}

/// A mixed strategy for every player.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyProfile {
    strategies: Vec<Vec<f64>>,
}

impl StrategyProfile {
    /// Ingest externally supplied strategies. Tiny negatives are clamped and
    /// each vector is rescaled to sum to exactly one.
    pub fn new(strategies: Vec<Vec<f64>>) -> Result<Self, ProfileError> {
        let mut strategies = strategies;
        for (player, s) in strategies.iter_mut().enumerate() {
            if s.is_empty() {
                return Err(ProfileError::Empty { player });
            }
            for (index, p) in s.iter_mut().enumerate() {
                if !p.is_finite() {
                    return Err(ProfileError::NonFinite {
                        player,
                        index,
                        value: *p,
                    });
                }
                if *p < -PROBABILITY_CLAMP {
                    return Err(ProfileError::Negative {
                        player,
                        index,
                        value: *p,
                    });
                }
                if *p < 0.0 {
                    *p = 0.0;
                }
            }
            let sum: f64 = s.iter().sum();
            if (sum - 1.0).abs() > PROBABILITY_SUM_TOL {
                return Err(ProfileError::BadSum { player, sum });
            }
            s.iter_mut().for_each(|p| *p /= sum);
        }
        Ok(Self { strategies })
    }

    /// Wraps vectors that are already valid distributions (convex combinations
    /// of valid profiles, grid points). No clamping or renormalization.
    pub(crate) fn from_raw(strategies: Vec<Vec<f64>>) -> Self {
        Self { strategies }
    }

    pub fn uniform(strategy_counts: &[usize]) -> Self {
        let strategies = strategy_counts
            .iter()
            .map(|&m| vec![1.0 / m as f64; m])
            .collect();
        Self { strategies }
    }

    /// Every player puts all mass on the given pure strategy.
    pub fn pure(strategy_counts: &[usize], choices: &[usize]) -> Result<Self, ProfileError> {
        if strategy_counts.len() != choices.len() {
            return Err(ProfileError::PlayerCount {
                expected: strategy_counts.len(),
                found: choices.len(),
            });
        }
        let mut strategies = Vec::with_capacity(choices.len());
        for (player, (&m, &k)) in strategy_counts.iter().zip(choices).enumerate() {
            if k >= m {
                return Err(ProfileError::PureOutOfRange { player, index: k });
            }
            let mut s = vec![0.0; m];
            s[k] = 1.0;
            strategies.push(s);
        }
        Ok(Self { strategies })
    }

    /// Independent uniform weights in (0, 1], normalized per player.
    pub fn random<R: Rng + ?Sized>(strategy_counts: &[usize], rng: &mut R) -> Self {
        let strategies = strategy_counts
            .iter()
            .map(|&m| {
                let w: Vec<f64> = (0..m).map(|_| 1.0 - rng.gen::<f64>()).collect();
                let total: f64 = w.iter().sum();
                w.into_iter().map(|x| x / total).collect()
            })
            .collect();
        Self { strategies }
    }

    pub fn player_count(&self) -> usize {
        self.strategies.len()
    }

    pub fn strategy(&self, player: usize) -> &[f64] {
        &self.strategies[player]
    }

    pub fn strategies(&self) -> &[Vec<f64>] {
        &self.strategies
    }

    pub fn into_inner(self) -> Vec<Vec<f64>> {
        self.strategies
    }

    /// Checks the shape of the profile against per-player strategy counts.
    pub fn check_shape(&self, strategy_counts: &[usize]) -> Result<(), ProfileError> {
        if self.strategies.len() != strategy_counts.len() {
            return Err(ProfileError::PlayerCount {
                expected: strategy_counts.len(),
                found: self.strategies.len(),
            });
        }
        for (player, (s, &m)) in self.strategies.iter().zip(strategy_counts).enumerate() {
            if s.len() != m {
                return Err(ProfileError::StrategyLength {
                    player,
                    expected: m,
                    found: s.len(),
                });
            }
        }
        Ok(())
    }

    /// Componentwise `(1 - weight) * self + weight * other`.
    pub fn mix(&self, other: &StrategyProfile, weight: f64) -> StrategyProfile {
        let strategies = self
            .strategies
            .iter()
            .zip(&other.strategies)
            .map(|(a, b)| {
                a.iter()
                    .zip(b)
                    .map(|(&p, &q)| (1.0 - weight) * p + weight * q)
                    .collect()
            })
            .collect();
        StrategyProfile { strategies }
    }
}
