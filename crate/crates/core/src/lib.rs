//! Approximate Nash equilibria of polymatrix games by steepest descent on
//! the maximum regret.
//!
//! The solver works on normalized games, where every player's payoff over
//! pure profiles spans exactly `[0, 1]`. From any start it reaches a profile
//! whose maximum regret is at most `0.5 + δ` within `((δ + 2) / δ)^2`
//! iterations, each of which solves one small linear program.
//!
//! ```
//! use polyne::{generate_polymatrix, solve, verify_epsilon_ne, DescentConfig, Topology};
//!
//! let raw = generate_polymatrix(Topology::Cycle, 4, 2..=3, 7).unwrap();
//! let (game, _) = raw.normalize();
//! let config = DescentConfig::new(0.1).unwrap();
//! let result = solve(&game, &config).unwrap();
//! assert!(verify_epsilon_ne(&game, &result.profile, 0.6).pass);
//! ```
//!
//! Two-player Bayesian games are handled by [`bayesian`]: rescale, reduce to
//! a bipartite polymatrix game over types, solve, and map the profile back.

pub mod bayesian;
pub mod descent;
pub mod game;
pub mod generate;
pub mod io;
pub mod lp;
pub mod profile;
pub mod regret;
pub mod verify;

pub use bayesian::{
    bayesian_regret, reduce_to_polymatrix, rescale_bayesian, type_views, BayesianGame,
    ReductionMap, TypeDistributionView,
};
pub use descent::{
    build_steepest_descent_lp, gain_bound_residual, solve, stationarity_certificate, step,
    steepest_descent_direction, DescentConfig, IterationTrace, SolveError, SolveResult,
    StartProfile, Termination,
};
pub use game::{EdgeGame, NormalizationRecord, PolymatrixGame, Violation};
pub use generate::{generate_bayesian, generate_polymatrix, Topology};
pub use lp::{solve_lp, LinearProgram, LpSolution, LpStatus};
pub use profile::StrategyProfile;
pub use regret::{df_delta, df_delta_i, regret_report, RegretReport};
pub use verify::{brute_force_min_regret, verify_bayesian, verify_epsilon_ne};
