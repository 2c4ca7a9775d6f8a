use std::path::Path;
use std::process::{Command, Output};

use eddeg_core::models::MatrixFile;
use eddeg_core::Mat;
use serde_json::Value;

fn eddeg(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eddeg"))
        .env_remove("EDDEG_SEED")
        .args(args)
        .output()
        .unwrap()
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_matrix(dir: &Path, name: &str, rows: usize, cols: usize, data: &[f64]) -> String {
    let path = dir.join(name);
    let m = Mat::from_row_slice(rows, cols, data);
    std::fs::write(
        &path,
        serde_json::to_string(&MatrixFile::from_mat(&m)).unwrap(),
    )
    .unwrap();
    path.display().to_string()
}

fn objectives(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| r["objective"].as_f64().unwrap())
        .collect()
}

fn matrix(v: &Value) -> Vec<f64> {
    v["matrix"]["data"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

#[test]
fn degree_examples() {
    let cases: [(&[&str], u64); 3] = [
        (&["--model", "flag", "--n", "4", "--ks", "1,2"], 12),
        (&["--model", "stiefel", "--n", "5", "--k", "2"], 4),
        (
            &[
                "--model", "schubert", "--n", "6", "--k", "1", "--l", "2", "--m", "4",
            ],
            3,
        ),
    ];
    for (args, expected) in cases {
        let mut full = vec!["degree"];
        full.extend_from_slice(args);
        let v = json(&eddeg(&full));
        assert_eq!(v["ed_degree"].as_u64(), Some(expected), "{args:?}");
    }
    let v = json(&eddeg(&[
        "degree", "--model", "schubert", "--n", "6", "--k", "1", "--l", "2", "--m", "4",
    ]));
    assert_eq!(v["dimension"].as_u64(), Some(2));
}

#[test]
fn degree_csv() {
    let out = eddeg(&[
        "degree",
        "--model",
        "grassmann",
        "--n",
        "5",
        "--k",
        "2",
        "--format",
        "csv",
    ]);
    assert!(out.status.success());
    assert_eq!(
        String::from_utf8(out.stdout).unwrap(),
        "model,ed_degree,dimension\ngrassmann,10,6\n"
    );
}

#[test]
fn invalid_descriptors_exit_2() {
    for args in [
        &["degree", "--model", "grassmann", "--n", "3", "--k", "3"][..],
        &["degree", "--model", "flag", "--n", "4"],
        &[
            "degree", "--model", "schubert", "--n", "4", "--k", "2", "--l", "1", "--m", "3",
        ],
        &["degree", "--model", "sphere", "--n", "3"],
        &[
            "certify",
            "--model",
            "grassmann",
            "--n",
            "3",
            "--k",
            "1",
            "--trials",
            "0",
        ],
    ] {
        assert_eq!(eddeg(args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn oversized_enumeration_exits_3() {
    let out = eddeg(&[
        "enumerate",
        "--model",
        "stiefel",
        "--n",
        "30",
        "--k",
        "30",
        "--seed",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(3));
    let ks = (1..40).map(|i| i.to_string()).collect::<Vec<_>>().join(",");
    let out = eddeg(&["degree", "--model", "flag", "--n", "40", "--ks", &ks]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn enumerate_grassmann_diagonal_anchor() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_matrix(dir.path(), "a.json", 2, 2, &[5.0, 0.0, 0.0, 2.0]);
    let v = json(&eddeg(&[
        "enumerate",
        "--model",
        "grassmann",
        "--n",
        "2",
        "--k",
        "1",
        "--anchor",
        &a,
    ]));
    assert!(close(&objectives(&v), &[10.0, 13.0], 1e-12));
    assert_eq!(v[0]["label"], "{1}");
}

#[test]
fn enumerate_flag_identity_names_predicate() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_matrix(
        dir.path(),
        "a.json",
        3,
        3,
        &[1., 0., 0., 0., 1., 0., 0., 0., 1.],
    );
    let out = eddeg(&[
        "enumerate",
        "--model",
        "flag",
        "--n",
        "3",
        "--ks",
        "1",
        "--anchor",
        &a,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("distinct-eigenvalues(A)"));
}

#[test]
fn enumerate_circle() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_matrix(dir.path(), "a.json", 2, 1, &[3.0, 4.0]);
    let v = json(&eddeg(&[
        "enumerate",
        "--model",
        "stiefel",
        "--n",
        "2",
        "--k",
        "1",
        "--anchor",
        &a,
    ]));
    assert!(close(&objectives(&v), &[8.0, 18.0], 1e-12));
    assert_eq!(v[0]["label"], "+");
}

#[test]
fn enumerate_is_sorted_by_objective() {
    let v = json(&eddeg(&[
        "enumerate",
        "--model",
        "flag",
        "--n",
        "4",
        "--ks",
        "1,2",
        "--seed",
        "9",
    ]));
    let obj = objectives(&v);
    assert_eq!(obj.len(), 12);
    assert!(obj.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn nearest_examples() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_matrix(
        dir.path(),
        "f.json",
        3,
        3,
        &[3., 0., 0., 0., 2., 0., 0., 0., 1.],
    );
    let v = json(&eddeg(&[
        "nearest", "--model", "flag", "--n", "3", "--ks", "1,2", "--bs", "2,1,0", "--anchor", &a,
    ]));
    assert!(close(
        &matrix(&v),
        &[2., 0., 0., 0., 1., 0., 0., 0., 0.],
        1e-12
    ));

    let a = write_matrix(dir.path(), "g.json", 2, 2, &[5.0, 0.0, 0.0, 2.0]);
    let v = json(&eddeg(&[
        "nearest",
        "--model",
        "grassmann",
        "--n",
        "2",
        "--k",
        "1",
        "--anchor",
        &a,
    ]));
    assert!(close(&matrix(&v), &[1.0, 0.0, 0.0, 0.0], 1e-12));

    let a = write_matrix(dir.path(), "s.json", 2, 1, &[3.0, 4.0]);
    let v = json(&eddeg(&[
        "nearest", "--model", "stiefel", "--n", "2", "--k", "1", "--anchor", &a,
    ]));
    assert!(close(&matrix(&v), &[0.6, 0.8], 1e-12));
    assert_eq!(v["label"], "+");
}

#[test]
fn nearest_matches_first_enumerated_record() {
    for args in [
        &[
            "--model",
            "grassmann",
            "--n",
            "5",
            "--k",
            "2",
            "--seed",
            "4",
        ][..],
        &[
            "--model", "stiefel", "--n", "4", "--k", "3", "--B-seed", "2", "--seed", "4",
        ],
        &[
            "--model", "schubert", "--n", "7", "--k", "1", "--l", "3", "--m", "5", "--seed", "4",
        ],
    ] {
        let nearest = json(&eddeg(&[&["nearest"][..], args].concat()));
        let listed = json(&eddeg(&[&["enumerate"][..], args].concat()));
        assert_eq!(nearest["label"], listed[0]["label"]);
        assert!(close(&matrix(&nearest), &matrix(&listed[0]), 1e-10));
    }
}

#[test]
fn nearest_rejects_unordered_parameters() {
    let out = eddeg(&[
        "nearest",
        "--model",
        "grassmann",
        "--n",
        "3",
        "--k",
        "1",
        "--a-val",
        "0",
        "--b-val",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("order"));
}

#[test]
fn certify_grassmann_counts() {
    let v = json(&eddeg(&[
        "certify",
        "--model",
        "grassmann",
        "--n",
        "5",
        "--k",
        "2",
        "--trials",
        "10",
        "--seed",
        "1",
    ]));
    assert_eq!(v["pass"], true);
    let trials = v["trials"].as_array().unwrap();
    assert_eq!(trials.len(), 10);
    for (i, t) in trials.iter().enumerate() {
        assert_eq!(t["count_enumerated"], 10);
        assert_eq!(t["degree_formula"], 10);
        assert_eq!(t["trial_seed"].as_u64(), Some(2 + i as u64));
    }
    assert!(v["tool_version"].as_str().unwrap().starts_with("eddeg "));
    assert!(v["tolerances"]["stationarity"].as_f64().is_some());
}

#[test]
fn certify_stiefel_is_independent_of_b() {
    let mut seen = Vec::new();
    for b_seed in ["3", "4"] {
        let v = json(&eddeg(&[
            "certify", "--model", "stiefel", "--n", "4", "--k", "2", "--B-seed", b_seed,
            "--trials", "5",
        ]));
        assert_eq!(v["pass"], true);
        for t in v["trials"].as_array().unwrap() {
            seen.push((t["degree_formula"].as_u64(), t["count_enumerated"].as_u64()));
        }
    }
    assert!(seen.iter().all(|s| *s == (Some(4), Some(4))));
}

#[test]
fn certify_schubert_counts() {
    let v = json(&eddeg(&[
        "certify", "--model", "schubert", "--n", "7", "--k", "1", "--l", "3", "--m", "5",
        "--trials", "5",
    ]));
    assert_eq!(v["pass"], true);
    assert!(v["trials"]
        .as_array()
        .unwrap()
        .iter()
        .all(|t| t["count_enumerated"] == 6));
}

#[test]
fn certify_with_oracle_reports_matches() {
    let v = json(&eddeg(&[
        "certify", "--model", "flag", "--n", "4", "--ks", "1,2", "--trials", "2", "--oracle",
        "--starts", "200",
    ]));
    for t in v["trials"].as_array().unwrap() {
        assert_eq!(t["oracle"]["starts"], 200);
        assert_eq!(t["oracle"]["complete"], true);
    }
}

#[test]
fn tight_tolerance_fails_with_exit_1() {
    let out = eddeg(&[
        "certify",
        "--model",
        "grassmann",
        "--n",
        "6",
        "--k",
        "3",
        "--trials",
        "2",
        "--tol-stat",
        "1e-30",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["pass"], false);
}

#[test]
fn env_seed_overrides_flag() {
    let run = |env: Option<&str>, seed: &str| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_eddeg"));
        cmd.env_remove("EDDEG_SEED");
        if let Some(e) = env {
            cmd.env("EDDEG_SEED", e);
        }
        cmd.args([
            "certify",
            "--model",
            "grassmann",
            "--n",
            "4",
            "--k",
            "2",
            "--seed",
            seed,
        ])
        .output()
        .unwrap()
        .stdout
    };
    assert_eq!(run(Some("9"), "1"), run(None, "9"));
    assert_ne!(run(None, "1"), run(None, "9"));
}

#[test]
fn certify_is_byte_identical_across_runs() {
    let args = [
        "certify", "--model", "schubert", "--n", "6", "--k", "1", "--l", "2", "--m", "4",
        "--trials", "3", "--seed", "5",
    ];
    let first = eddeg(&args);
    assert_eq!(first.stdout, eddeg(&args).stdout);
    // text carries 17 significant digits
    let text = String::from_utf8(first.stdout).unwrap();
    assert!(text.contains("\"max_membership_residual\": "));
    let line = text
        .lines()
        .find(|l| l.contains("min_pairwise_distance"))
        .unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap();
    assert_eq!(
        mantissa.trim_start_matches('-').replace('.', "").len(),
        17,
        "{number}"
    );
}

#[test]
fn certify_csv_and_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.csv");
    let out = eddeg(&[
        "certify",
        "--model",
        "grassmann",
        "--n",
        "4",
        "--k",
        "1",
        "--trials",
        "3",
        "--format",
        "csv",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("trial_seed,anchor,degree_formula,count_enumerated"));
    assert!(lines[1].starts_with("1,sampled:1,4,4,"));
}

#[test]
fn user_file_degeneracy_is_not_resampled() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_matrix(
        dir.path(),
        "a.json",
        3,
        3,
        &[1., 0., 0., 0., 1., 0., 0., 0., 1.],
    );
    let out = eddeg(&[
        "certify",
        "--model",
        "grassmann",
        "--n",
        "3",
        "--k",
        "1",
        "--anchor",
        &a,
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!String::from_utf8_lossy(&out.stderr).contains("resample"));
}

#[test]
fn malformed_matrix_file_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"rows": 2, "cols": 2, "data": [1, 2, 3]}"#).unwrap();
    let out = eddeg(&[
        "enumerate",
        "--model",
        "grassmann",
        "--n",
        "2",
        "--k",
        "1",
        "--anchor",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = eddeg(&[
        "enumerate",
        "--model",
        "grassmann",
        "--n",
        "2",
        "--k",
        "1",
        "--anchor",
        "/nonexistent.json",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
