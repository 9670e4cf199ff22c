//! Acceptance suite. Each test checks one criterion and prints a single
//! `criterion N: PASS|FAIL ...` line; run with `--nocapture` to see them.

use std::sync::OnceLock;

use polyne::descent::{default_max_iterations, step_size, StationarityCertificate};
use polyne::io::{write_solve_result, write_traces};
use polyne::regret::max_df_over;
use polyne::verify::independent_regret;
use polyne::{
    bayesian_regret, brute_force_min_regret, generate_bayesian, generate_polymatrix,
    reduce_to_polymatrix, regret_report, rescale_bayesian, solve, stationarity_certificate,
    steepest_descent_direction, verify_bayesian, verify_epsilon_ne, DescentConfig, PolymatrixGame,
    SolveResult, StartProfile, StrategyProfile, Topology,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const DELTA: f64 = 0.1;
const GUARANTEE_GAMES: u64 = 200;
const VERIFY_EPS: f64 = 0.6;
const VERIFY_SLACK: f64 = 1e-7;
const ITERATION_CAP: usize = 443;
const RESIDUAL_TOL: f64 = 1e-7;
const DECREASE_TOL: f64 = 1e-7;
const CERT_TOL: f64 = 1e-7;
const NORM_TOL: f64 = 1e-9;
const LP_TOL: f64 = 1e-7;
const GRID_STEP: f64 = 0.01;
const GRID_TARGET: f64 = 0.01;
const AGREE_TOL: f64 = 1e-9;
const IDENTITY_TOL: f64 = 1e-9;

fn report(n: u32, pass: bool, detail: String) {
    println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
}

fn random_profile(counts: &[usize], rng: &mut ChaCha8Rng) -> StrategyProfile {
    StrategyProfile::random(counts, rng)
}

struct GuaranteeCase {
    game: PolymatrixGame,
    config: DescentConfig,
}

/// Game `g` of the guarantee suite. Starts rotate through uniform, random
/// mixed and random pure so that the descent actually has work to do.
fn guarantee_case(g: u64) -> GuaranteeCase {
    let seed = 10_000 + g;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let players = rng.gen_range(2..=8usize);
    let topology = [
        Topology::Complete,
        Topology::Cycle,
        Topology::Star,
        Topology::Gnp(0.5),
    ][(g % 4) as usize];
    let raw = generate_polymatrix(topology, players, 2..=6, seed).unwrap();
    let (game, _) = raw.normalize();
    let start = match g % 3 {
        0 => StartProfile::Uniform,
        1 => StartProfile::Random(seed),
        _ => {
            let choices: Vec<usize> = game
                .strategy_counts()
                .iter()
                .map(|&m| rng.gen_range(0..m))
                .collect();
            StartProfile::Explicit(StrategyProfile::pure(game.strategy_counts(), &choices).unwrap())
        }
    };
    let config = DescentConfig::new(DELTA)
        .unwrap()
        .with_start(start)
        .with_diagnostics(true);
    GuaranteeCase { game, config }
}

struct GuaranteeRun {
    case: GuaranteeCase,
    result: SolveResult,
    output: String,
    traces: String,
}

fn run_guarantee_suite() -> Vec<GuaranteeRun> {
    (0..GUARANTEE_GAMES)
        .map(|g| {
            let case = guarantee_case(g);
            let result = solve(&case.game, &case.config).unwrap();
            let output = write_solve_result(&result, DELTA);
            let traces = write_traces(&result.traces);
            GuaranteeRun {
                case,
                result,
                output,
                traces,
            }
        })
        .collect()
}

fn guarantee_runs() -> &'static [GuaranteeRun] {
    static RUNS: OnceLock<Vec<GuaranteeRun>> = OnceLock::new();
    RUNS.get_or_init(run_guarantee_suite)
}

#[test]
fn criterion_1_guarantee() {
    assert_eq!(default_max_iterations(DELTA), ITERATION_CAP);
    let runs = guarantee_runs();
    let mut failures = Vec::new();
    let mut worst = 0.0f64;
    let mut most_iterations = 0;
    let mut total_iterations = 0;
    for (g, run) in runs.iter().enumerate() {
        let verdict = verify_epsilon_ne(&run.case.game, &run.result.profile, VERIFY_EPS);
        worst = worst.max(verdict.max_regret);
        most_iterations = most_iterations.max(run.result.iterations);
        total_iterations += run.result.iterations;
        let ok = run.result.termination == polyne::Termination::TargetReached
            && verdict.max_regret <= VERIFY_EPS + VERIFY_SLACK
            && run.result.iterations <= ITERATION_CAP;
        if !ok {
            failures.push(g);
        }
    }
    report(
        1,
        failures.is_empty(),
        format!(
            "games={} worst_f={worst:.6} max_iters={most_iterations} total_iters={total_iterations} failures={failures:?}",
            runs.len()
        ),
    );
    assert!(failures.is_empty(), "games failing the guarantee: {failures:?}");
}

#[test]
fn criterion_2_progress() {
    let runs = guarantee_runs();
    let factor = 1.0 - step_size(DELTA).powi(2);
    let mut iterations = 0;
    let mut non_stationary = 0;
    let mut worst_residual = f64::NEG_INFINITY;
    let mut worst_decrease = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for (g, run) in runs.iter().enumerate() {
        for t in &run.result.traces {
            iterations += 1;
            worst_residual = worst_residual.max(t.gain_bound_residual);
            if t.gain_bound_residual > RESIDUAL_TOL {
                bad.push((g, t.iteration, "residual"));
            }
            if !t.stationary {
                non_stationary += 1;
                let excess = t.f_after - factor * t.f_before;
                worst_decrease = worst_decrease.max(excess);
                if excess > DECREASE_TOL {
                    bad.push((g, t.iteration, "decrease"));
                }
            }
        }
    }
    let pass = bad.is_empty() && iterations > 0;
    report(
        2,
        pass,
        format!(
            "iterations={iterations} non_stationary={non_stationary} worst_residual={worst_residual:.3e} worst_decrease_excess={worst_decrease:.3e} violations={bad:?}"
        ),
    );
    assert!(iterations > 0, "no descent iterations were exercised");
    assert!(bad.is_empty(), "progress violations: {bad:?}");
}

#[test]
fn criterion_3_stationarity_certificate() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for k in 0..100u64 {
        let players = rng.gen_range(2..=8usize);
        let topology = [Topology::Complete, Topology::Cycle, Topology::Star, Topology::Gnp(0.5)]
            [(k % 4) as usize];
        let (game, _) = generate_polymatrix(topology, players, 2..=6, 30_000 + k)
            .unwrap()
            .normalize();
        let x = random_profile(game.strategy_counts(), &mut rng);
        let StationarityCertificate { witness, .. } = stationarity_certificate(&game, &x, DELTA);
        worst = worst.max(witness);
        if witness > 0.5 + CERT_TOL {
            bad.push(k);
        }
    }
    report(3, bad.is_empty(), format!("pairs=100 worst_witness={worst:.6} failures={bad:?}"));
    assert!(bad.is_empty());
}

/// Max and min of `player`'s total payoff over every pure profile.
fn pure_profile_extremes(game: &PolymatrixGame, player: usize) -> (f64, f64) {
    let counts = game.strategy_counts();
    let mut choice = vec![0usize; counts.len()];
    let (mut hi, mut lo) = (f64::NEG_INFINITY, f64::INFINITY);
    loop {
        let x = StrategyProfile::pure(counts, &choice).unwrap();
        let u = game.payoff(&x, player);
        hi = hi.max(u);
        lo = lo.min(u);
        let mut pos = counts.len();
        loop {
            if pos == 0 {
                return (hi, lo);
            }
            pos -= 1;
            choice[pos] += 1;
            if choice[pos] < counts[pos] {
                break;
            }
            choice[pos] = 0;
        }
    }
}

#[test]
fn criterion_4_normalization() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    let mut worst = 0.0f64;
    let mut bad = Vec::new();
    for k in 0..100u64 {
        let players = rng.gen_range(2..=6usize);
        let topology = [Topology::Complete, Topology::Cycle, Topology::Star, Topology::Gnp(0.5)]
            [(k % 4) as usize];
        let raw = generate_polymatrix(topology, players, 2..=4, 40_000 + k).unwrap();
        let (game, record) = raw.normalize();
        for (i, scaling) in record.players.iter().enumerate() {
            if scaling.degenerate {
                continue;
            }
            let (hi, lo) = pure_profile_extremes(&game, i);
            checked += 1;
            worst = worst.max((hi - 1.0).abs()).max(lo.abs());
            if (hi - 1.0).abs() > NORM_TOL || lo.abs() > NORM_TOL {
                bad.push((k, i));
            }
        }
    }
    report(
        4,
        bad.is_empty() && checked > 0,
        format!("games=100 players_checked={checked} worst_deviation={worst:.3e} failures={bad:?}"),
    );
    assert!(checked > 0 && bad.is_empty());
}

#[test]
fn criterion_5_lp_optimality() {
    let runs = guarantee_runs();
    let iterated: Vec<&GuaranteeRun> = runs.iter().filter(|r| r.result.iterations > 0).collect();
    assert!(!iterated.is_empty(), "no run iterated");
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut worst = f64::NEG_INFINITY;
    let mut bad = Vec::new();
    for s in 0..30 {
        let run = iterated[s % iterated.len()];
        let t = rng.gen_range(0..run.result.iterations);
        // replay the descent up to iteration t
        let prefix = run.case.config.clone().with_max_iterations(t).with_diagnostics(false);
        let x = solve(&run.case.game, &prefix).unwrap().profile;
        let direction = steepest_descent_direction(&run.case.game, &x, DELTA).unwrap();
        assert_eq!(direction.w_star, run.result.traces[t].w_star);
        let rep = regret_report(&run.case.game, &x, DELTA);
        let k = rep.max_regret_set();
        for _ in 0..100 {
            let z = random_profile(run.case.game.strategy_counts(), &mut rng);
            let value = max_df_over(&run.case.game, &rep, &x, &z, &k);
            worst = worst.max(direction.w_star - value);
            if direction.w_star > value + LP_TOL {
                bad.push((s, t));
            }
        }
    }
    report(
        5,
        bad.is_empty(),
        format!("iterations=30 candidates=3000 worst_gap={worst:.3e} failures={bad:?}"),
    );
    assert!(bad.is_empty());
}

#[test]
fn criterion_6_oracle_agreement() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst_grid = 0.0f64;
    let mut worst_gap = 0.0f64;
    let mut bad = Vec::new();
    for k in 0..20u64 {
        let (game, _) = generate_polymatrix(Topology::Complete, 2, 2..=2, 60_000 + k)
            .unwrap()
            .normalize();
        assert_eq!(game.edges().len(), 1);
        let grid = brute_force_min_regret(&game, GRID_STEP).unwrap();
        worst_grid = worst_grid.max(grid.max_regret);
        if grid.max_regret > GRID_TARGET {
            bad.push((k, "grid"));
        }
        for _ in 0..1000 {
            let x = random_profile(game.strategy_counts(), &mut rng);
            let rep = regret_report(&game, &x, DELTA);
            for i in 0..2 {
                let gap = (rep.regrets[i] - independent_regret(&game, &x, i)).abs();
                worst_gap = worst_gap.max(gap);
                if gap > AGREE_TOL {
                    bad.push((k, "agreement"));
                }
            }
        }
    }
    report(
        6,
        bad.is_empty(),
        format!("games=20 worst_grid_f={worst_grid:.6} worst_regret_gap={worst_gap:.3e} failures={bad:?}"),
    );
    assert!(bad.is_empty());
}

#[test]
fn criterion_7_bayesian() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst_identity = 0.0f64;
    let mut worst_end_to_end = 0.0f64;
    let mut bad = Vec::new();
    for k in 0..50u64 {
        let (m, n) = (rng.gen_range(1..=4usize), rng.gen_range(1..=4usize));
        let (k1, k2) = (rng.gen_range(2..=4usize), rng.gen_range(2..=4usize));
        let raw = generate_bayesian(m, n, k1, k2, 70_000 + k).unwrap();
        let game = rescale_bayesian(&raw);
        let (poly, map) = reduce_to_polymatrix(&game).unwrap();

        for _ in 0..20 {
            let x: Vec<Vec<f64>> = (0..m)
                .map(|_| random_profile(&[k1], &mut rng).into_inner().remove(0))
                .collect();
            let y: Vec<Vec<f64>> = (0..n)
                .map(|_| random_profile(&[k2], &mut rng).into_inner().remove(0))
                .collect();
            let bayes = bayesian_regret(&game, &x, &y).unwrap();
            let rep = regret_report(&poly, &map.join_profile(&x, &y), DELTA);
            for (i, slot) in map.row_players.iter().enumerate() {
                let p = slot.expect("generated distributions have full support");
                worst_identity = worst_identity.max((bayes.row[i] - rep.regrets[p]).abs());
            }
            for (j, slot) in map.col_players.iter().enumerate() {
                let p = slot.expect("generated distributions have full support");
                worst_identity = worst_identity.max((bayes.col[j] - rep.regrets[p]).abs());
            }
        }
        if worst_identity > IDENTITY_TOL {
            bad.push((k, "identity"));
        }

        let result = solve(&poly, &DescentConfig::new(DELTA).unwrap()).unwrap();
        let (x, y) = map.split_profile(&result.profile, k1, k2);
        let verdict = verify_bayesian(&game, &x, &y, VERIFY_EPS).unwrap();
        worst_end_to_end = worst_end_to_end.max(verdict.max_regret);
        if !verdict.pass {
            bad.push((k, "end-to-end"));
        }
    }
    report(
        7,
        bad.is_empty(),
        format!(
            "games=50 worst_identity_gap={worst_identity:.3e} worst_bne_regret={worst_end_to_end:.6} failures={bad:?}"
        ),
    );
    assert!(bad.is_empty());
}

#[test]
fn criterion_8_determinism() {
    let first = guarantee_runs();
    let second = run_guarantee_suite();
    let dir = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("acceptance-determinism");
    std::fs::create_dir_all(&dir).unwrap();
    let mut bad = Vec::new();
    for (g, (a, b)) in first.iter().zip(&second).enumerate() {
        let mut files = Vec::new();
        for (tag, run) in [("a", a), ("b", b)] {
            let path = dir.join(format!("game{g:03}-{tag}.json"));
            std::fs::write(&path, format!("{}{}", run.output, run.traces)).unwrap();
            files.push(std::fs::read(&path).unwrap());
        }
        if a.result.iterations != b.result.iterations || files[0] != files[1] {
            bad.push(g);
        }
    }
    report(
        8,
        bad.is_empty(),
        format!("games={} mismatches={bad:?}", first.len()),
    );
    assert!(bad.is_empty());
}
