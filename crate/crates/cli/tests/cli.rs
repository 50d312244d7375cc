use std::path::{Path, PathBuf};
use std::process::Command;

use anchorlab::games::{classical_value_exact, DEFAULT_ANCHOR};
use anchorlab::Game;
use anchorlab_cli::{exec_with, load_game, CSV_HEADER};

fn fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/chsh.json")
}

fn run(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["anchorlab"];
    argv.extend_from_slice(args);
    let mut out = Vec::new();
    let code = exec_with(argv, &mut out);
    (code, String::from_utf8(out).unwrap())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn classical_value_of_chsh() {
    let (code, out) = run(&["value", "--game", path(&fixture()), "--mode", "classical"]);
    assert_eq!(code, 0);
    assert_eq!(out.trim(), "0.75");
}

#[test]
fn value_report_carries_a_winning_strategy() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("v.json");
    let (code, _) = run(&["value", "--game", path(&fixture()), "--out", path(&report)]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["value"], 0.75);
    assert_eq!(v["strategy"]["g"].as_array().unwrap().len(), 2);
}

#[test]
fn single_repetition_is_the_identity() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    assert_eq!(run(&["repeat", "--game", path(&fixture()), "-k", "1", "--out", path(&g)]).0, 0);
    let back = load_game(&g).unwrap();
    let orig = load_game(&fixture()).unwrap();
    assert_eq!(back.sizes(), orig.sizes());
    assert_eq!(back.q(), orig.q());
    let (nx, ny, na, nb) = orig.sizes();
    for i in 0..nx * ny * na * nb {
        let (x, y, a, b) = (i / (ny * na * nb), i / (na * nb) % ny, i / nb % na, i % nb);
        assert_eq!(back.wins(x, y, a, b), orig.wins(x, y, a, b));
    }
}

#[test]
fn zero_mass_anchor_keeps_the_value() {
    let dir = tempfile::tempdir().unwrap();
    let g = dir.path().join("g.json");
    let (code, _) = run(&["anchor", "--game", path(&fixture()), "--side", "y", "--zeta", "0", "--out", path(&g)]);
    assert_eq!(code, 0);
    let anchored = load_game(&g).unwrap();
    let star = anchored.y_labels().iter().position(|l| l == DEFAULT_ANCHOR).unwrap();
    assert!((0..2).all(|x| anchored.q_at(x, star) == 0.0));
    assert_eq!(classical_value_exact(&anchored).unwrap().0, 0.75);
    let (code, out) = run(&["value", "--game", path(&g)]);
    assert_eq!((code, out.trim()), (0, "0.75"));
}

#[test]
fn anchor_without_out_prints_the_game() {
    let (code, out) = run(&["anchor", "--game", path(&fixture()), "--zeta", "0.3", "--side", "both"]);
    assert_eq!(code, 0);
    let g = Game::from_json(&out).unwrap();
    assert_eq!(g.sizes(), (3, 3, 2, 2));
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"x": ["0"], "y": ["0"], "a": ["0"], "b": ["0"], "q": [[0.5]], "win": []}"#).unwrap();
    let missing = dir.path().join("missing.json");
    assert_eq!(run(&["value", "--game", path(&missing)]).0, 2);
    assert_eq!(run(&["value", "--game", path(&bad)]).0, 2);
    assert_eq!(run(&["anchor", "--game", path(&fixture()), "--zeta", "1"]).0, 2);
    assert_eq!(run(&["anchor", "--game", path(&fixture()), "--zeta", "0.1", "--side", "z"]).0, 2);
    assert_eq!(run(&["repeat", "--game", path(&fixture()), "-k", "0"]).0, 2);
    assert_eq!(run(&["decay", "--game", path(&fixture()), "--kmax", "4"]).0, 2);
    assert_eq!(run(&["verify", "--suite", "nothing"]).0, 2);
    assert_eq!(run(&["verify", "--trials", "0", "--seed", "x"]).0, 2);
    assert_eq!(run(&["breaker", "--game", path(&fixture())]).0, 2);
    assert_eq!(run(&["frobnicate"]).0, 2);
}

#[test]
fn battery_violations_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let (code, out) = run(&["verify", "--suite", "breaker", "--trials", "3", "--tol", "-1", "--out", path(&report)]);
    assert_eq!(code, 1);
    assert!(out.contains("FAIL"));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["facts"]["BREAKER_MARGINAL"]["violations"], 3);
}

#[test]
fn verify_passes_and_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("r.json");
    let (code, out) = run(&["verify", "--suite", "classical", "--trials", "20", "--seed", "3", "--out", path(&report)]);
    assert_eq!(code, 0, "{out}");
    assert_eq!(out.lines().count(), 8);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(v["seed"], 3);
    assert_eq!(v["facts"].as_object().unwrap().len(), 7);
}

#[test]
fn breaker_checks_pass_on_anchored_chsh() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("b.json");
    let (code, out) = run(&["breaker", "--game", path(&fixture()), "--zeta", "0.2", "--out", path(&report)]);
    assert_eq!(code, 0, "{out}");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    let closed = v["mismatch_closed_form"].as_f64().unwrap();
    let zeta: f64 = 0.2;
    assert!((closed - (1.0 - zeta).powf(2.0 / 3.0) * (1.0 - (1.0 - zeta).powf(1.0 / 3.0))).abs() <= 1e-15);
    assert!(v["marginal_gap"].as_f64().unwrap() <= 1e-12);
}

#[test]
fn decay_on_an_all_accepting_game_is_flat() {
    let dir = tempfile::tempdir().unwrap();
    let g = Game::from_fn(
        vec!["0".into(), "1".into()],
        vec!["0".into()],
        vec!["0".into(), "1".into()],
        vec!["0".into()],
        vec![0.5, 0.5],
        |_, _, _, _| true,
    )
    .unwrap();
    let file = dir.path().join("all.json");
    std::fs::write(&file, g.to_json()).unwrap();
    let (code, out) = run(&["decay", "--game", path(&file), "--kmax", "3", "--restarts", "2"]);
    assert_eq!(code, 0);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some(CSV_HEADER));
    for (k, line) in lines.enumerate() {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(f[0], (k + 1).to_string());
        assert_eq!(&f[1..3], &["1.0000000000", "1.0000000000"]);
    }
}

#[test]
fn decay_bound_column_on_an_anchored_game() {
    let dir = tempfile::tempdir().unwrap();
    let anchored = dir.path().join("a.json");
    assert_eq!(run(&["anchor", "--game", path(&fixture()), "--zeta", "0.2", "--out", path(&anchored)]).0, 0);
    let csv = dir.path().join("d.csv");
    let (code, _) = run(&["decay", "--game", path(&anchored), "--kmax", "2", "--restarts", "4", "--constant", "0.5", "--out", path(&csv)]);
    assert_eq!(code, 0);
    let text = std::fs::read_to_string(csv).unwrap();
    let rows: Vec<Vec<f64>> = text.lines().skip(1).map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 2);
    // Classical column nonincreasing, entangled at least the product floor,
    // bound column (1 − (1−ω)⁵)^{c·ζ²·k / log₂ 4}.
    assert!(rows[1][1] <= rows[0][1]);
    assert!(rows[1][2] >= rows[0][2].powi(2) - 1e-6);
    for (k, r) in rows.iter().enumerate() {
        let expected = (1.0 - (1.0 - rows[0][2]).powi(5)).powf(0.5 * 0.04 * (k + 1) as f64 / 2.0);
        assert!((r[6] - expected).abs() <= 1e-9, "{} vs {expected}", r[6]);
    }
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_anchorlab");
    let ok = Command::new(bin).args(["value", "--game", path(&fixture())]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&ok.stdout).trim(), "0.75");
    let bad = Command::new(bin).args(["value", "--game", "/nonexistent.json"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
