use std::process::{Command, Output};

use ouldp::concentration::ci_bound;
use ouldp::CiQuery;
use serde_json::Value;

fn ouldp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ouldp"))
        .args(args)
        .env_remove("OULDP_WORKERS")
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

fn csv(out: &Output) -> Vec<Vec<String>> {
    String::from_utf8_lossy(&out.stdout)
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

#[test]
fn rate_at_truth_is_zero_on_border() {
    let out = ouldp(&["rate", "--theta", "-1", "--z", "-1"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["rate"], 0.0);
    assert_eq!(v["branch"], "border");
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["seed"], 0);
}

#[test]
fn corollary_bound_at_reference_point() {
    let v = json(&ouldp(&[
        "ci-bound",
        "--theta",
        "0",
        "--T",
        "10",
        "--x",
        "1",
        "--method",
        "corollary",
    ]));
    let bound = v["bound"].as_f64().unwrap();
    assert_eq!(format!("{bound:.3}"), "0.194");
}

#[test]
fn malformed_number_and_unknown_flag_are_usage_errors() {
    for args in [
        &["rate", "--theta", "-1", "--z", "abc"][..],
        &["rate", "--theta", "-1", "--w", "1"],
        &["nonsense"],
    ] {
        let out = ouldp(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn domain_violation_emits_error_json() {
    let out = ouldp(&["laplace-bound", "--theta", "0", "--T", "1", "--b", "0.5"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json(&out);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["command"], "laplace-bound");
    assert_eq!(v["error"]["kind"], "domain");
    assert!(v["error"]["message"].as_str().unwrap().contains("b < 0"));
}

#[test]
fn every_command_carries_schema_version() {
    let runs: &[&[&str]] = &[
        &[
            "simulate", "--theta", "0.5", "--T", "1", "--paths", "2", "--seed", "3",
        ],
        &["mle", "--T", "2", "--x-t", "1", "--s-t", "0.5"],
        &[
            "cgf", "--theta", "-1", "--a", "0.1", "--b", "-0.2", "--T", "5",
        ],
        &[
            "cgf", "--theta", "-1", "--a", "0.1", "--b", "-0.2", "--limit",
        ],
        &["rate", "--theta", "1", "--x", "0.5", "--y", "2"],
        &["legendre", "--theta", "0", "--x", "0.5", "--y", "1"],
        &["contract", "--theta", "1", "--z", "-2"],
        &["ci-bound", "--theta", "1", "--T", "5", "--x", "1"],
        &["laplace-bound", "--theta", "1", "--T", "1", "--b", "-0.5"],
        &[
            "mc-tail",
            "--theta",
            "0",
            "--T",
            "1",
            "--event",
            "mle-ge",
            "--threshold",
            "0",
            "--paths",
            "200",
        ],
        &[
            "ldp-slope",
            "--theta",
            "0",
            "--T",
            "1,2",
            "--event",
            "mle-ge",
            "--threshold",
            "0",
            "--paths",
            "200",
        ],
        &["check", "--suite", "corollary"],
    ];
    for args in runs {
        let out = ouldp(args);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let v = json(&out);
        assert_eq!(v["schema_version"], 1, "{args:?}");
        assert_eq!(v["command"], args[0]);
        assert!(v["params"].is_object());
    }
}

#[test]
fn legendre_matches_closed_form_from_cli() {
    let v = json(&ouldp(&[
        "legendre", "--theta", "-1", "--x", "1", "--y", "1",
    ]));
    assert!((v["rate"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert_eq!(v["closed_form"], 1.0);
}

#[test]
fn sweep_hits_truth() {
    let out = ouldp(&["sweep", "rate", "--theta", "-1", "--z", "-3..1 x 9"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(&out);
    assert_eq!(rows[0], ["z", "rate", "branch"]);
    assert_eq!(rows.len(), 10);
    let truth = rows
        .iter()
        .find(|r| r[0].parse::<f64>() == Ok(-1.0))
        .expect("z = −1 row");
    assert_eq!(truth[1].parse::<f64>().unwrap(), 0.0);
    assert_eq!(truth[2], "border");
}

#[test]
fn one_point_sweep_reproduces_single_shot() {
    let single = json(&ouldp(&[
        "ci-bound", "--theta", "0.1", "--T", "5", "--x", "0.5",
    ]));
    let rows = csv(&ouldp(&[
        "sweep",
        "ci-bound",
        "--theta",
        "0.1..0.1 x 1",
        "--T",
        "5",
        "--x",
        "0.5",
    ]));
    assert_eq!(rows.len(), 2);
    for (j, key) in rows[0].iter().enumerate().skip(1) {
        let want = single[key.as_str()].as_f64().unwrap();
        assert_eq!(rows[1][j], format!("{want:.11e}"), "{key}");
    }
}

#[test]
fn sweep_ci_bound_matches_library_on_concentration_grid() {
    let out = ouldp(&[
        "sweep",
        "ci-bound",
        "--theta",
        "{-2,-1,-0.1,0,0.1,1,2}",
        "--T",
        "{1,5,10,20}",
        "--x",
        "{0.25,0.5,1,2}",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv(&out);
    assert_eq!(
        rows[0],
        ["theta", "T", "x", "bound", "log_bound", "y_star", "h_value"]
    );
    assert_eq!(rows.len(), 1 + 7 * 4 * 4);
    let mut expected_order = Vec::new();
    for th in [-2.0, -1.0, -0.1, 0.0, 0.1, 1.0, 2.0] {
        for t in [1.0, 5.0, 10.0, 20.0] {
            for x in [0.25, 0.5, 1.0, 2.0] {
                expected_order.push((th, t, x));
            }
        }
    }
    for (row, &(th, t, x)) in rows[1..].iter().zip(&expected_order) {
        let cell: Vec<f64> = row.iter().map(|c| c.parse().unwrap()).collect();
        assert_eq!((cell[0], cell[1], cell[2]), (th, t, x));
        let r = ci_bound(&CiQuery::new(th, t, x).unwrap()).unwrap();
        for (got, want) in cell[3..]
            .iter()
            .zip([r.bound, r.log_bound, r.y_star, r.h_value])
        {
            assert!(
                close(*got, want, 1e-11),
                "θ={th} T={t} x={x}: {got} vs {want}"
            );
        }
    }
}

#[test]
fn sweep_records_domain_errors_and_continues() {
    let rows = csv(&ouldp(&[
        "sweep",
        "laplace-bound",
        "--theta",
        "0",
        "--T",
        "1",
        "--b",
        "-1..1 x 3",
    ]));
    assert_eq!(rows.len(), 4);
    assert!(rows[1][1].parse::<f64>().unwrap() > 0.0);
    assert_eq!(rows[2][1..], ["nan", "nan", "nan"]);
}

#[test]
fn sweep_writes_csv_file_and_summary() {
    let path = std::env::temp_dir().join(format!("ouldp-sweep-{}.csv", std::process::id()));
    let p = path.to_str().unwrap();
    let out = ouldp(&[
        "sweep",
        "contract",
        "--theta",
        "1",
        "--z",
        "-3..-1 x 5",
        "--csv",
        p,
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = json(&out);
    assert_eq!(summary["rows"], 5);
    assert_eq!(summary["failed_cells"], 0);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::remove_file(&path).unwrap();
    assert!(text.starts_with("z,rate,branch,closed_form\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn sweep_rejects_unsupported_target() {
    assert_eq!(
        ouldp(&["sweep", "simulate", "--theta", "0"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ouldp(&["sweep", "rate", "--theta", "0", "--z", "0..1"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn monte_carlo_is_identical_across_worker_counts() {
    let base = [
        "mc-tail",
        "--theta",
        "-0.5",
        "--T",
        "4",
        "--event",
        "abs-dev-ge",
        "--threshold",
        "0.5",
    ];
    let extra = ["--paths", "3000", "--seed", "17"];
    let runs: Vec<Value> = ["1", "2", "5"]
        .iter()
        .map(|w| {
            let mut args = base.to_vec();
            args.extend(extra);
            args.extend(["--workers", w]);
            json(&ouldp(&args))
        })
        .collect();
    assert_eq!(runs[0], runs[1]);
    assert_eq!(runs[0], runs[2]);
    let env = Command::new(env!("CARGO_BIN_EXE_ouldp"))
        .args(base)
        .args(extra)
        .env("OULDP_WORKERS", "3")
        .output()
        .unwrap();
    assert_eq!(json(&env), runs[0]);
}

#[test]
fn simulate_is_reproducible_with_seed() {
    let args = [
        "simulate", "--theta", "1", "--T", "2", "--paths", "3", "--seed", "9",
    ];
    let (a, b) = (json(&ouldp(&args)), json(&ouldp(&args)));
    assert_eq!(a, b);
    assert_eq!(a["paths"].as_array().unwrap().len(), 3);
    assert_eq!(a["n_steps"], 1000);
}

#[test]
fn failed_check_exits_one() {
    // far too few paths for the tolerance
    let out = ouldp(&["check", "--suite", "ldp-slopes", "--paths", "100"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}
