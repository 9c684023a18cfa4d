use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use voi_cli::problem::{GeneratorBlock, ProblemFile};
use voi_core::{DecisionProblem, Distribution};

fn voi(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_voi"))
        .args(args)
        .env_remove("VOI_ENUM_CAP")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let path = dir.path().join(name);
    fs::write(&path, body).unwrap();
    path
}

fn ident2(dir: &TempDir) -> PathBuf {
    write(
        dir,
        "ident2.json",
        r#"{"name":"ident2","prior":[0.5,0.5],"utilities":[[1,0],[0,1]],
            "state_labels":["left","right"],"action_labels":["go_left","go_right"],
            "generator":{"kind":"negative_entropy","reference":[0.5,0.5]}}"#,
    )
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn shannon_curve_csv_spans_half_to_one() {
    let dir = TempDir::new().unwrap();
    let problem = ident2(&dir);
    let out_path = dir.path().join("curve.csv");
    let out = voi(&[
        "curve", "--problem", s(&problem), "--type", "shannon", "--branch", "upper",
        "--lambda", "0:0.7:50", "--out", s(&out_path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = fs::read_to_string(&out_path).unwrap();
    assert_eq!(text.lines().next().unwrap(), "lambda,value,beta,converged");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 50);
    let values: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert_eq!(values[0], 0.5);
    assert!((values[49] - 1.0).abs() < 1e-12);
    assert!(values.windows(2).all(|w| w[1] >= w[0]));
    assert!(rows.iter().all(|r| r[3] == "true"));
    assert_eq!(rows[49][2], "inf");
}

#[test]
fn csv_and_json_carry_identical_numbers() {
    let dir = TempDir::new().unwrap();
    let problem = ident2(&dir);
    let csv = voi(&["curve", "--problem", s(&problem), "--type", "shannon", "--lambda", "0:0.6:7"]);
    let json = voi(&[
        "curve", "--problem", s(&problem), "--type", "shannon", "--lambda", "0:0.6:7", "--format", "json",
    ]);
    assert_eq!(code(&csv), 0);
    assert_eq!(code(&json), 0);
    let json_text = stdout(&json);
    let doc: serde_json::Value = serde_json::from_str(&json_text).unwrap();
    assert_eq!(doc["problem"], "ident2");
    assert_eq!(doc["type"], "shannon");
    assert_eq!(doc["branch"], "upper");
    let points = doc["points"].as_array().unwrap();
    for (row, point) in csv_rows(&stdout(&csv)).iter().zip(points) {
        assert_eq!(row[1].parse::<f64>().unwrap(), point["value"].as_f64().unwrap());
        assert!(json_text.contains(&format!("\"value\": {}", row[1])));
        let mantissa = row[1].split('e').next().unwrap().replace(['.', '-'], "");
        assert_eq!(mantissa.len(), 17);
    }
}

#[test]
fn s_curve_has_signed_sections() {
    let dir = TempDir::new().unwrap();
    let problem = ident2(&dir);
    let out = voi(&["curve", "--problem", s(&problem), "--type", "shannon", "--branch", "s", "--lambda", "0:0.7:8"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "branch,lambda,value,beta,converged");
    let rows = csv_rows(&text);
    assert_eq!(rows.len(), 16);
    let lower: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "lower").collect();
    let upper: Vec<&Vec<String>> = rows.iter().filter(|r| r[0] == "upper").collect();
    assert_eq!((lower.len(), upper.len()), (8, 8));
    assert!(lower.iter().all(|r| r[1].parse::<f64>().unwrap() <= 0.0));
    assert!(upper.iter().all(|r| r[1].parse::<f64>().unwrap() >= 0.0));
    let keys: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(keys.windows(2).all(|w| w[0] <= w[1]));
    // Mirror symmetry of the identity problem.
    let v = |r: &Vec<String>| r[2].parse::<f64>().unwrap();
    assert!((v(lower[0]) - 0.0).abs() < 1e-12);
    assert!((v(upper[7]) - 1.0).abs() < 1e-12);
}

#[test]
fn deterministic_and_bregman_curves() {
    let dir = TempDir::new().unwrap();
    let problem = ident2(&dir);
    for kind in ["boltzmann", "hartley", "bregman"] {
        let out = voi(&["curve", "--problem", s(&problem), "--type", kind, "--branch", "s", "--lambda", "0:1:5"]);
        assert_eq!(code(&out), 0, "{kind}: {}", String::from_utf8_lossy(&out.stderr));
        assert_eq!(csv_rows(&stdout(&out)).len(), 10);
    }
    let out = voi(&["curve", "--problem", s(&problem), "--type", "hartley", "--lambda", "0:0.7:8"]);
    let values: Vec<f64> = csv_rows(&stdout(&out)).iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(values[..7].iter().all(|&v| v == 0.5));
    assert_eq!(values[7], 1.0);
}

#[test]
fn input_errors_exit_two() {
    let dir = TempDir::new().unwrap();
    let problem = ident2(&dir);
    let bad_grid = voi(&["curve", "--problem", s(&problem), "--type", "shannon", "--lambda", "0:0:1"]);
    assert_eq!(code(&bad_grid), 2);
    let malformed = write(&dir, "bad.json", r#"{"name":"x","prior":[0.5,0.6],"utilities":[[1,0],[0,1]]}"#);
    let out = voi(&["curve", "--problem", s(&malformed), "--type", "shannon", "--lambda", "0:1:3"]);
    assert_eq!(code(&out), 2);
    let garbage = write(&dir, "garbage.json", "{not json");
    assert_eq!(code(&voi(&["validate", s(&garbage)])), 2);
    assert_eq!(code(&voi(&["validate", "/nonexistent/problem.json"])), 2);
    let out = voi(&["curve", "--problem", s(&problem), "--type", "nonsense", "--lambda", "0:1:3"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn validate_reports_shape() {
    let dir = TempDir::new().unwrap();
    let out = voi(&["validate", s(&ident2(&dir))]);
    assert_eq!(code(&out), 0);
    assert!(stdout(&out).contains("2 states, 2 actions"));
}

#[test]
fn paradox_reports() {
    let out = voi(&["paradox", "allais_gain"]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("EU(P) = 100\n"));
    assert!(text.contains("EU(Q) = 100\n"));
    assert!(text.contains("H(P) = 0.636514"));
    assert!(text.contains("H(Q) = 0\n"));
    assert!(text.contains("indifferent"));

    let out = voi(&["paradox", "allais_loss", "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["eu_p"].as_f64().unwrap() + 100.0).abs() < 1e-9);
    assert_eq!(doc["eu_q"].as_f64().unwrap(), -100.0);
    assert_eq!(doc["verdict"], "indifferent");

    let doc: serde_json::Value = serde_json::from_str(&stdout(&voi(&["paradox", "ellsberg", "--json"]))).unwrap();
    assert_eq!(doc["eu_p"].as_f64().unwrap(), 50.0);
    assert_eq!(doc["eu_q"].as_f64().unwrap(), 50.0);

    let out = voi(&["paradox", "st_petersburg", "--n", "10", "--json"]);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!((doc["eu_p"].as_f64().unwrap() - 10.00978).abs() < 1e-5);

    assert_eq!(code(&voi(&["paradox", "no_such_thing"])), 2);
    assert_eq!(code(&voi(&["paradox", "st_petersburg"])), 2);
}

#[test]
fn oracle_agreement_and_negative_control() {
    let dir = TempDir::new().unwrap();
    let problem = ident2(&dir);
    let out = voi(&["oracle", "--problem", s(&problem), "--type", "shannon", "--lambda", "0.2", "--resolution", "2000"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    assert_eq!(text.lines().next().unwrap(), "target,oracle_value,solver_value,abs_diff,resolution,elapsed");
    let row = &csv_rows(&text)[0];
    assert!(row[3].parse::<f64>().unwrap() <= 1e-3);
    assert_eq!(row[4], "2000");

    for kind in ["boltzmann", "hartley"] {
        let out = voi(&["oracle", "--problem", s(&problem), "--type", kind, "--lambda", "0,0.3,0.6931471805599453,1"]);
        assert_eq!(code(&out), 0);
        assert!(csv_rows(&stdout(&out)).iter().all(|r| r[3].parse::<f64>().unwrap() == 0.0));
    }

    let out = voi(&["oracle", "--problem", s(&problem), "--type", "bregman", "--branch", "lower", "--lambda", "0:0.5:4"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let loose = voi(&[
        "oracle", "--problem", s(&problem), "--type", "shannon", "--lambda", "0.2", "--resolution", "500",
        "--solver-tol", "0.5",
    ]);
    assert_eq!(code(&loose), 5);
}

#[test]
fn enumeration_cap_from_environment() {
    let dir = TempDir::new().unwrap();
    let problem = ident2(&dir);
    let run = |cap: &str| {
        Command::new(env!("CARGO_BIN_EXE_voi"))
            .args(["curve", "--problem", s(&problem), "--type", "boltzmann", "--lambda", "0:1:3"])
            .env("VOI_ENUM_CAP", cap)
            .output()
            .unwrap()
    };
    assert_eq!(code(&run("3")), 4);
    assert_eq!(code(&run("4")), 0);
    assert_eq!(code(&run("lots")), 2);
}

#[test]
fn problem_files_round_trip() {
    let dir = TempDir::new().unwrap();
    let prob = DecisionProblem::new(
        Distribution::new(vec![0.125, 0.375, 0.5]).unwrap(),
        vec![vec![1.5, -2.25, 0.1], vec![0.3, 0.0, -1e-7], vec![7.0, 1.0 / 3.0, 2.0]],
    )
    .unwrap()
    .with_labels(
        vec!["x".into(), "y".into(), "z".into()],
        vec!["p".into(), "q".into(), "r".into()],
    )
    .unwrap();
    let mut file = ProblemFile::from_problem("round", &prob);
    file.generator = Some(GeneratorBlock {
        kind: "squared_euclidean".into(),
        reference: None,
    });
    let path = dir.path().join("round.json");
    file.save(&path).unwrap();
    let back = ProblemFile::load(&path).unwrap();
    assert_eq!(back, file);
    assert_eq!(back.to_problem().unwrap(), prob);
    assert_eq!(code(&voi(&["validate", s(&path)])), 0);
}
