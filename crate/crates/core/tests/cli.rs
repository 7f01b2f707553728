use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use shadowgb::cli::load_model;
use shadowgb::data::read_features;
use shadowgb::Outcome;
use tempfile::TempDir;

fn shadowgb(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shadowgb"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Writes a small seeded dataset and returns its path.
fn synth(dir: &TempDir, kind: &str, n: usize) -> PathBuf {
    let path = dir.path().join(format!("{kind}.csv"));
    let out = shadowgb(&[
        "synth",
        "--kind",
        kind,
        "--n",
        &n.to_string(),
        "--noise",
        "0.1",
        "--seed",
        "3",
        "--out",
        s(&path),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    path
}

#[test]
fn fit_then_predict_matches_in_process_model() {
    let dir = TempDir::new().unwrap();
    let data = synth(&dir, "moons", 300);
    let model = dir.path().join("model.json");
    let fit = shadowgb(&[
        "fit",
        "--dataset",
        s(&data),
        "--header",
        "--model-path",
        s(&model),
    ]);
    assert_eq!(code(&fit), 0, "{}", String::from_utf8_lossy(&fit.stderr));

    let queries = dir.path().join("queries.csv");
    fs::write(&queries, "0.0,0.5\n1.0,-0.4\n0.5,0.25\n40.0,40.0\n").unwrap();
    let out = shadowgb(&[
        "predict",
        "--model-path",
        s(&model),
        "--queries",
        s(&queries),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);

    let clf = load_model(&model).unwrap();
    let rows = read_features(fs::File::open(&queries).unwrap(), false).unwrap();
    for (i, (line, q)) in lines.iter().zip(&rows).enumerate() {
        let p = clf.predict_raw(q).unwrap();
        let label = match p.outcome {
            Outcome::Certain(l) => clf.label_names()[l].clone(),
            Outcome::Uncertain => "UNCERTAIN".to_string(),
        };
        assert_eq!(*line, format!("{i},{label},{}", p.region.as_str()));
    }
    // far outside every ball
    assert!(lines[3].ends_with(",UNCERTAIN,UNE"), "{}", lines[3]);
}

#[test]
fn fit_writes_trace_next_to_model() {
    let dir = TempDir::new().unwrap();
    let data = synth(&dir, "rings", 200);
    let model = dir.path().join("m.json");
    let out = shadowgb(&[
        "fit",
        "--dataset",
        s(&data),
        "--header",
        "--model-path",
        s(&model),
        "--trace",
    ]);
    assert_eq!(code(&out), 0);
    let trace = fs::read_to_string(dir.path().join("m.json.trace.jsonl")).unwrap();
    assert!(trace.lines().count() > 0);
    for line in trace.lines() {
        serde_json::from_str::<serde_json::Value>(line).unwrap();
    }
}

#[test]
fn run_writes_report_and_per_rate_metrics() {
    let dir = TempDir::new().unwrap();
    let data = synth(&dir, "blobs", 240);
    let out_dir = dir.path().join("report");
    let out = shadowgb(&[
        "run",
        "--dataset",
        s(&data),
        "--header",
        "--noise",
        "0,0.2",
        "--folds",
        "3",
        "--trace",
        "--out",
        s(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let summary = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        summary.lines().filter(|l| l.starts_with("noise=")).count(),
        2
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["runs"].as_array().unwrap().len(), 2);
    for tag in ["0", "0_2"] {
        let csv = fs::read_to_string(out_dir.join(format!("metrics_noise_{tag}.csv"))).unwrap();
        // header, three folds, mean row
        assert_eq!(csv.lines().count(), 5);
        assert!(csv.lines().last().unwrap().starts_with("mean,"));
        let trace = fs::read_to_string(out_dir.join(format!("trace_noise_{tag}.jsonl"))).unwrap();
        assert!(!trace.is_empty());
    }
}

#[test]
fn sweep_is_deterministic_and_recommends_a_grid_value() {
    let dir = TempDir::new().unwrap();
    let data = synth(&dir, "moons", 200);
    let args = [
        "sweep-theta",
        "--dataset",
        s(&data),
        "--header",
        "--noise",
        "0.1",
        "--folds",
        "3",
        "--thetas",
        "0.3,0.5,0.7",
    ];
    let first = shadowgb(&args);
    let second = shadowgb(&args);
    assert_eq!(
        code(&first),
        0,
        "{}",
        String::from_utf8_lossy(&first.stderr)
    );
    assert_eq!(first.stdout, second.stdout);
    let text = String::from_utf8(first.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert!(lines[0].starts_with("theta,"));
    let best: f64 = lines[4]
        .strip_prefix("recommended_theta,")
        .unwrap()
        .parse()
        .unwrap();
    assert!([0.3, 0.5, 0.7].contains(&best));
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let dir = TempDir::new().unwrap();
    let data = synth(&dir, "moons", 150);
    let config = dir.path().join("run.toml");
    fs::write(
        &config,
        format!(
            "dataset = {:?}\nheader = true\nfolds = 3\nnoise = [0.1]\n\n[model]\ntheta = 0.4\n",
            s(&data)
        ),
    )
    .unwrap();
    let out = shadowgb(&["run", "--config", s(&config), "--folds", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let json = &text[text.find('{').unwrap()..];
    let report: serde_json::Value = serde_json::from_str(json).unwrap();
    assert_eq!(report["config"]["fold_count"], 4);
    assert_eq!(report["config"]["model"]["generation"]["theta"], 0.4);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let data = synth(&dir, "moons", 120);
    let missing = dir.path().join("absent.csv");

    // unreadable input is a runtime failure
    assert_eq!(code(&shadowgb(&["run", "--dataset", s(&missing)])), 1);
    // bad values and bad usage are configuration errors
    assert_eq!(
        code(&shadowgb(&[
            "run",
            "--dataset",
            s(&data),
            "--header",
            "--noise",
            "1.5"
        ])),
        2
    );
    assert_eq!(code(&shadowgb(&["run", "--no-such-flag"])), 2);
    assert_eq!(
        code(&shadowgb(&[
            "run",
            "--dataset",
            s(&data),
            "--header",
            "--theta",
            "1.2"
        ])),
        2
    );

    let config = dir.path().join("empty.toml");
    fs::write(
        &config,
        format!("dataset = {:?}\nheader = true\nthetas = []\n", s(&data)),
    )
    .unwrap();
    assert_eq!(code(&shadowgb(&["sweep-theta", "--config", s(&config)])), 2);

    let bad_key = dir.path().join("typo.toml");
    fs::write(&bad_key, "datset = \"x.csv\"\n").unwrap();
    assert_eq!(code(&shadowgb(&["run", "--config", s(&bad_key)])), 2);

    let model = dir.path().join("model.json");
    assert_eq!(
        code(&shadowgb(&[
            "fit",
            "--dataset",
            s(&data),
            "--header",
            "--model-path",
            s(&model)
        ])),
        0
    );
    let wide = dir.path().join("wide.csv");
    fs::write(&wide, "0.1,0.2,0.3\n").unwrap();
    assert_eq!(
        code(&shadowgb(&[
            "predict",
            "--model-path",
            s(&model),
            "--queries",
            s(&wide)
        ])),
        2
    );

    let corrupt = dir.path().join("corrupt.json");
    fs::write(&corrupt, "{\"format\": \"something else\"").unwrap();
    let narrow = dir.path().join("narrow.csv");
    fs::write(&narrow, "0.1,0.2\n").unwrap();
    assert_eq!(
        code(&shadowgb(&[
            "predict",
            "--model-path",
            s(&corrupt),
            "--queries",
            s(&narrow)
        ])),
        1
    );
}
