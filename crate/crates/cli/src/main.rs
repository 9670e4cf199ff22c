use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use polyne::descent::check_delta;
use polyne::io::{
    parse_bayesian, parse_game, parse_profile, write_bayesian, write_game, write_reduction_map,
    write_solve_result, write_traces,
};
use polyne::{
    generate_bayesian, generate_polymatrix, reduce_to_polymatrix, rescale_bayesian, solve,
    verify_epsilon_ne, DescentConfig, PolymatrixGame, StartProfile, Termination, Topology,
};
use rayon::prelude::*;

const EXIT_ERROR: u8 = 1;
const EXIT_VERIFY_FAILED: u8 = 2;
const EXIT_MAX_ITERATIONS: u8 = 3;

#[derive(Parser)]
#[command(name = "polyne", version, about = "Approximate Nash equilibria of polymatrix games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Start {
    Uniform,
    Random,
}

#[derive(Subcommand)]
enum Command {
    /// Run the descent until the maximum regret is at most 0.5 + delta.
    Solve {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long, value_enum, default_value = "uniform")]
        start: Start,
        /// Seed for `--start random`.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write per-iteration diagnostics here.
        #[arg(long)]
        trace: Option<PathBuf>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Check that a profile is an epsilon-Nash equilibrium.
    Verify {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        profile: PathBuf,
        #[arg(long, allow_negative_numbers = true)]
        epsilon: f64,
    },
    /// Write a seeded random game.
    Generate {
        #[command(subcommand)]
        kind: GenerateKind,
    },
    /// Reduce a two-player Bayesian game to a polymatrix game over types.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
        /// Write the type to player index map here.
        #[arg(long)]
        map: Option<PathBuf>,
    },
    /// Solve a batch of random games and print one CSV row per game.
    Bench {
        #[arg(long)]
        games: usize,
        #[arg(long, allow_negative_numbers = true)]
        delta: f64,
        #[arg(long)]
        topology: Topology,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 6)]
        players: usize,
        #[arg(long, default_value_t = 2)]
        min_strategies: usize,
        #[arg(long, default_value_t = 6)]
        max_strategies: usize,
    },
}

#[derive(Subcommand)]
enum GenerateKind {
    Polymatrix {
        #[arg(long)]
        topology: Topology,
        #[arg(long)]
        players: usize,
        #[arg(long, default_value_t = 2)]
        min_strategies: usize,
        #[arg(long, default_value_t = 6)]
        max_strategies: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    Bayesian {
        /// Number of row-player types.
        #[arg(long)]
        row_types: usize,
        /// Number of column-player types.
        #[arg(long)]
        col_types: usize,
        #[arg(long)]
        row_strategies: usize,
        #[arg(long)]
        col_strategies: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Games without the normalized flag are normalized on load.
fn load_game(path: &Path) -> Result<PolymatrixGame> {
    let game = parse_game(&read(path)?).with_context(|| format!("{}", path.display()))?;
    Ok(if game.is_normalized() {
        game
    } else {
        game.normalize().0
    })
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Solve {
            input,
            delta,
            start,
            seed,
            trace,
            output,
        } => {
            check_delta(delta)?;
            let game = load_game(&input)?;
            let start = match start {
                Start::Uniform => StartProfile::Uniform,
                Start::Random => StartProfile::Random(seed),
            };
            let config = DescentConfig::new(delta)?
                .with_start(start)
                .with_diagnostics(trace.is_some());
            let result = solve(&game, &config)?;
            emit(output.as_deref(), &write_solve_result(&result, delta))?;
            if let Some(path) = trace {
                emit(Some(&path), &write_traces(&result.traces))?;
            }
            eprintln!(
                "{}: f = {:.9} after {} iterations",
                result.termination.as_str(),
                result.max_regret(),
                result.iterations
            );
            Ok(match result.termination {
                Termination::TargetReached => 0,
                Termination::MaxIterations => EXIT_MAX_ITERATIONS,
            })
        }
        Command::Verify {
            input,
            profile,
            epsilon,
        } => {
            if !(epsilon >= 0.0 && epsilon.is_finite()) {
                bail!("epsilon must be a finite non-negative number, got {epsilon}");
            }
            let game = load_game(&input)?;
            let x = parse_profile(&read(&profile)?).with_context(|| format!("{}", profile.display()))?;
            x.check_shape(game.strategy_counts())?;
            let verdict = verify_epsilon_ne(&game, &x, epsilon);
            println!(
                "{} max_regret={:.12} worst_player={} epsilon={epsilon}",
                if verdict.pass { "pass" } else { "fail" },
                verdict.max_regret,
                verdict.worst_player
            );
            Ok(if verdict.pass { 0 } else { EXIT_VERIFY_FAILED })
        }
        Command::Generate { kind } => {
            match kind {
                GenerateKind::Polymatrix {
                    topology,
                    players,
                    min_strategies,
                    max_strategies,
                    seed,
                    output,
                } => {
                    let game = generate_polymatrix(topology, players, min_strategies..=max_strategies, seed)?;
                    emit(output.as_deref(), &write_game(&game))?;
                }
                GenerateKind::Bayesian {
                    row_types,
                    col_types,
                    row_strategies,
                    col_strategies,
                    seed,
                    output,
                } => {
                    let game = generate_bayesian(row_types, col_types, row_strategies, col_strategies, seed)?;
                    emit(output.as_deref(), &write_bayesian(&game))?;
                }
            }
            Ok(0)
        }
        Command::Reduce { input, output, map } => {
            let game = parse_bayesian(&read(&input)?).with_context(|| format!("{}", input.display()))?;
            let (poly, index) = reduce_to_polymatrix(&rescale_bayesian(&game))?;
            emit(Some(&output), &write_game(&poly))?;
            if let Some(path) = map {
                emit(Some(&path), &write_reduction_map(&index))?;
            }
            Ok(0)
        }
        Command::Bench {
            games,
            delta,
            topology,
            seed,
            players,
            min_strategies,
            max_strategies,
        } => {
            check_delta(delta)?;
            let config = DescentConfig::new(delta)?;
            let rows: Vec<Result<String>> = (0..games)
                .into_par_iter()
                .map(|g| {
                    let game_seed = seed.wrapping_add(g as u64);
                    let raw = generate_polymatrix(topology, players, min_strategies..=max_strategies, game_seed)?;
                    let (game, _) = raw.normalize();
                    let clock = Instant::now();
                    let result = solve(&game, &config)?;
                    let ms = clock.elapsed().as_secs_f64() * 1e3;
                    Ok(format!(
                        "{g},{game_seed},{},{},{:.9},{},{},{ms:.3}",
                        game.player_count(),
                        game.edges().len(),
                        result.max_regret(),
                        result.iterations,
                        result.termination.as_str()
                    ))
                })
                .collect();
            println!("game,seed,players,edges,max_regret,iterations,termination,wall_ms");
            for row in rows {
                println!("{}", row?);
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // usage errors share the generic failure code; 2 means "verify failed"
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { EXIT_ERROR } else { 0 });
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
