use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const PENNIES: &str = r#"{
  "format": "polymatrix-v1",
  "players": [{"strategies": 2}, {"strategies": 2}],
  "edges": [{"u": 0, "v": 1,
             "payoffs_u": [[1, 0], [0, 1]],
             "payoffs_v": [[0, 1], [1, 0]]}]
}"#;

fn polyne(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyne"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn path(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_string_lossy().into_owned()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let p = path(dir, name);
    std::fs::write(&p, text).unwrap();
    p
}

fn read(p: &str) -> String {
    std::fs::read_to_string(Path::new(p)).unwrap()
}

#[test]
fn solve_matching_pennies_from_uniform() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "pennies.json", PENNIES);
    let out_path = path(&dir, "out.json");
    let out = polyne(&["solve", "--input", &game, "--delta", "0.1", "--start", "uniform", "--output", &out_path]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&out_path);
    assert!(text.contains("\"iterations\": 0"), "{text}");
    assert!(text.contains("\"termination\": \"target-reached\""));
}

#[test]
fn solve_then_verify_passes_at_target() {
    let dir = TempDir::new().unwrap();
    let game = path(&dir, "game.json");
    let gen = polyne(&[
        "generate", "polymatrix", "--topology", "gnp(0.5)", "--players", "6", "--seed", "3", "--output", &game,
    ]);
    assert_eq!(code(&gen), 0);
    let sol = path(&dir, "sol.json");
    let trace = path(&dir, "trace.json");
    let out = polyne(&[
        "solve", "--input", &game, "--delta", "0.1", "--start", "random", "--seed", "9", "--output", &sol,
        "--trace", &trace,
    ]);
    assert_eq!(code(&out), 0);
    assert!(read(&trace).starts_with('['));
    let v = polyne(&["verify", "--input", &game, "--profile", &sol, "--epsilon", "0.6"]);
    assert_eq!(code(&v), 0);
    let stdout = String::from_utf8_lossy(&v.stdout);
    assert!(stdout.starts_with("pass") && stdout.contains("worst_player="), "{stdout}");
}

#[test]
fn verify_fails_with_exit_two() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "pennies.json", PENNIES);
    let profile = write(&dir, "pure.json", "[[1, 0], [1, 0]]");
    let v = polyne(&["verify", "--input", &game, "--profile", &profile, "--epsilon", "0.5"]);
    assert_eq!(code(&v), 2);
    assert!(String::from_utf8_lossy(&v.stdout).contains("max_regret=1.0"));
}

#[test]
fn bad_delta_and_malformed_input_exit_one() {
    let dir = TempDir::new().unwrap();
    let game = write(&dir, "pennies.json", PENNIES);
    for delta in ["0", "0.6", "-1"] {
        let out = polyne(&["solve", "--input", &game, "--delta", delta]);
        assert_eq!(code(&out), 1, "delta {delta}");
    }
    let broken = write(&dir, "broken.json", "{\n  \"format\": \"polymatrix-v1\",\n  \"players\": [\n");
    let out = polyne(&["solve", "--input", &broken, "--delta", "0.1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line"));

    let bad_shape = write(
        &dir,
        "shape.json",
        &PENNIES.replace("\"payoffs_v\": [[0, 1], [1, 0]]", "\"payoffs_v\": [[0, 1]]"),
    );
    let out = polyne(&["solve", "--input", &bad_shape, "--delta", "0.1"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("shape mismatch"));
}

#[test]
fn reduce_single_type_game() {
    let dir = TempDir::new().unwrap();
    let bayes = path(&dir, "bayes.json");
    let gen = polyne(&[
        "generate", "bayesian", "--row-types", "1", "--col-types", "1", "--row-strategies", "2",
        "--col-strategies", "3", "--seed", "4", "--output", &bayes,
    ]);
    assert_eq!(code(&gen), 0);
    let game = path(&dir, "reduced.json");
    let map = path(&dir, "map.json");
    let out = polyne(&["reduce", "--input", &bayes, "--output", &game, "--map", &map]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&game);
    assert_eq!(text.matches("\"strategies\"").count(), 2);
    assert_eq!(text.matches("\"payoffs_u\"").count(), 1);
    assert!(read(&map).contains("\"players\""));
    let out = polyne(&["solve", "--input", &game, "--delta", "0.1"]);
    assert_eq!(code(&out), 0);
}

#[test]
fn outputs_are_byte_identical_on_rerun() {
    let dir = TempDir::new().unwrap();
    let mut files = Vec::new();
    for run in 0..2 {
        let game = path(&dir, &format!("game{run}.json"));
        let sol = path(&dir, &format!("sol{run}.json"));
        polyne(&[
            "generate", "polymatrix", "--topology", "complete", "--players", "5", "--seed", "11", "--output", &game,
        ]);
        polyne(&["solve", "--input", &game, "--delta", "0.2", "--start", "random", "--seed", "1", "--output", &sol]);
        files.push((read(&game), read(&sol)));
    }
    assert_eq!(files[0], files[1]);
}

#[test]
fn bench_rows_follow_game_order() {
    let out = polyne(&["bench", "--games", "12", "--delta", "0.1", "--topology", "cycle", "--seed", "5"]);
    assert_eq!(code(&out), 0);
    let stdout = String::from_utf8_lossy(&out.stdout);
    let lines: Vec<&str> = stdout.lines().collect();
    assert_eq!(lines[0], "game,seed,players,edges,max_regret,iterations,termination,wall_ms");
    assert_eq!(lines.len(), 13);
    for (g, line) in lines[1..].iter().enumerate() {
        assert!(line.starts_with(&format!("{g},")), "{line}");
        assert!(line.contains("target-reached"));
    }
}
