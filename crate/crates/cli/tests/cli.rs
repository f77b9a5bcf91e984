use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use proptest::prelude::*;
use serde_json::Value;

use pqcm_cli::config::{A2Config, MachineConfig, StateRef, StatesConfig};
use pqcm_cli::{Format, RunConfig};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pqcm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pqcm"))
        .args(args)
        .env_remove("PQCM_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn cfg(name: &str) -> String {
    configs().join(name).display().to_string()
}

/// `quantity -> value` from a two-column JSON table.
fn lookup(table: &Value, quantity: &str) -> Value {
    table
        .as_array()
        .unwrap()
        .iter()
        .find(|r| r["quantity"] == quantity)
        .unwrap_or_else(|| panic!("no {quantity}"))["value"]
        .clone()
}

#[test]
fn feasibility_orthogonal_pair() {
    let o = pqcm(&[
        "feasibility",
        "--states",
        &cfg("orthogonal.states"),
        "-M",
        "2",
        "--gamma",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(lookup(&v["feasibility"], "verdict"), "feasible");
    assert_eq!(lookup(&v["feasibility"], "min_eigenvalue").as_f64(), Some(0.0));
}

#[test]
fn feasibility_max_uniform() {
    let o = pqcm(&[
        "feasibility",
        "--states",
        &cfg("overlap.states"),
        "-M",
        "2",
        "--max-uniform",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let g = lookup(&v["feasibility"], "gamma_max").as_f64().unwrap();
    assert!((g - 0.58578644).abs() < 1e-8, "{g}");
}

#[test]
fn feasibility_exit_codes() {
    let o = pqcm(&[
        "feasibility",
        "--states",
        &cfg("dependent.states"),
        "-M",
        "2",
        "--max-uniform",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("linearly dependent"), "{}", stderr(&o));

    let o = pqcm(&[
        "feasibility",
        "--states",
        &cfg("overlap.states"),
        "-M",
        "2",
        "--gamma",
        "0.9",
    ]);
    assert_eq!(o.status.code(), Some(2));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(lookup(&v["feasibility"], "verdict"), "infeasible");

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.states");
    std::fs::write(&bad, "# header\n2\n1 0 0 0\n1 0 0\n").unwrap();
    let o = pqcm(&[
        "feasibility",
        "--states",
        bad.to_str().unwrap(),
        "-M",
        "2",
        "--gamma",
        "0.1",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.states:4:"), "{}", stderr(&o));

    let o = pqcm(&["feasibility", "--states", &cfg("overlap.states"), "-M", "2"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn construct_orthogonal_pair_is_deterministic_cloner() {
    let o = pqcm(&[
        "construct",
        "--states",
        &cfg("orthogonal.states"),
        "-M",
        "2",
        "--gamma",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for q in ["residual_clone_action", "residual_trace_preservation"] {
        assert!(lookup(&v["summary"], q).as_f64().unwrap() < 1e-10);
    }
    for row in v["kraus"].as_array().unwrap() {
        if row["operator"] == "fail" {
            assert!(row["re"].as_f64().unwrap().abs() < 1e-12);
            assert!(row["im"].as_f64().unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn construct_feasible_and_infeasible() {
    let o = pqcm(&[
        "construct",
        "--states",
        &cfg("trine.states"),
        "-M",
        "3",
        "--max-uniform",
    ]);
    assert_eq!(o.status.code(), Some(1), "three qubit states are dependent");

    let o = pqcm(&[
        "construct",
        "--states",
        &cfg("overlap.states"),
        "-M",
        "3",
        "--gamma",
        "0.3,0.4",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    for q in ["residual_clone_action", "residual_trace_preservation"] {
        assert!(lookup(&v["summary"], q).as_f64().unwrap() < 1e-9);
    }
    // Success operator maps C^2 into (C^2)^⊗3, failure operator stays 2x2.
    let rows = v["kraus"].as_array().unwrap();
    assert_eq!(rows.iter().filter(|r| r["operator"] == "success").count(), 16);
    assert_eq!(rows.iter().filter(|r| r["operator"] == "fail").count(), 4);

    let o = pqcm(&[
        "construct",
        "--states",
        &cfg("overlap.states"),
        "-M",
        "2",
        "--gamma",
        "0.9",
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("min eigenvalue -1.57"), "{}", stderr(&o));
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn signal_test_seeded_runs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for dir in [&a, &b] {
        let o = pqcm(&[
            "signal-test",
            &cfg("illegal_n2.toml"),
            "--seed",
            "42",
            "--trials",
            "3000",
            "--pairs-per-bit",
            "20",
            "--out",
            dir.path().to_str().unwrap(),
        ]);
        assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    }
    for f in ["tally.json", "stats.json"] {
        assert_eq!(read(a.path(), f), read(b.path(), f));
    }
}

/// Parses a `scope,quantity,value,stderr` CSV into comparable tuples.
fn csv_stats(text: &str) -> Vec<(String, String, Option<f64>, Option<f64>)> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.records()
        .map(|rec| {
            let rec = rec.unwrap();
            let num = |s: &str| {
                if s.is_empty() {
                    None
                } else {
                    Some(s.parse::<f64>().unwrap())
                }
            };
            (rec[0].to_string(), rec[1].to_string(), num(&rec[2]), num(&rec[3]))
        })
        .collect()
}

fn json_stats(text: &str) -> Vec<(String, String, Option<f64>, Option<f64>)> {
    let v: Value = serde_json::from_str(text).unwrap();
    v.as_array()
        .unwrap()
        .iter()
        .map(|r| {
            (
                r["scope"].as_str().unwrap().to_string(),
                r["quantity"].as_str().unwrap().to_string(),
                r["value"].as_f64(),
                r["stderr"].as_f64(),
            )
        })
        .collect()
}

#[test]
fn csv_and_json_agree() {
    let dir = tempfile::tempdir().unwrap();
    for (config, tag) in [("illegal_n2.toml", "i"), ("legal_n2.toml", "l")] {
        for fmt in ["csv", "json"] {
            let out = dir.path().join(format!("{tag}-{fmt}"));
            let o = pqcm(&[
                "signal-test",
                &cfg(config),
                "--trials",
                "2000",
                "--pairs-per-bit",
                "10",
                "--format",
                fmt,
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
        }
        let csv = csv_stats(&read(&dir.path().join(format!("{tag}-csv")), "stats.csv"));
        let json = json_stats(&read(&dir.path().join(format!("{tag}-json")), "stats.json"));
        assert!(!csv.is_empty());
        assert_eq!(csv, json);

        let tally_csv = read(&dir.path().join(format!("{tag}-csv")), "tally.csv");
        let tally_json: Value =
            serde_json::from_str(&read(&dir.path().join(format!("{tag}-json")), "tally.json")).unwrap();
        let mut r = csv::Reader::from_reader(tally_csv.as_bytes());
        let headers = r.headers().unwrap().clone();
        for (rec, row) in r.records().zip(tally_json.as_array().unwrap()) {
            let rec = rec.unwrap();
            for (h, cell) in headers.iter().zip(rec.iter()) {
                match &row[h] {
                    Value::String(s) => assert_eq!(s, cell),
                    other => assert_eq!(other.as_u64().unwrap().to_string(), cell),
                }
            }
        }
    }
}

#[test]
fn signal_test_config_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "trials = 10\nmu = 2\n[states]\ninline = [[1,0,0,0],[0,0,1,0]]\n[machine]\nkind = \"illegal\"\n",
    )
    .unwrap();
    let o = pqcm(&["signal-test", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("mu"), "{}", stderr(&o));

    std::fs::write(&path, "trials = \n").unwrap();
    let o = pqcm(&["signal-test", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("parse error"), "{}", stderr(&o));

    let o = pqcm(&["signal-test", "/nonexistent/config.toml"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn invalid_thread_cap_is_rejected() {
    let o = Command::new(env!("CARGO_BIN_EXE_pqcm"))
        .args([
            "feasibility",
            "--states",
            &cfg("orthogonal.states"),
            "-M",
            "2",
            "--gamma",
            "1",
        ])
        .env("PQCM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

fn finite() -> impl Strategy<Value = f64> {
    prop::num::f64::NORMAL | prop::num::f64::ZERO | prop::num::f64::SUBNORMAL
}

fn amplitudes() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(finite(), 2..8)
}

fn run_config() -> impl Strategy<Value = RunConfig> {
    let states = (
        prop::option::of("[a-z][a-z0-9_/]{0,12}\\.states"),
        prop::option::of(prop::collection::vec(amplitudes(), 1..4)),
        prop::option::of(prop::collection::vec(1usize..9, 0..4)),
    )
        .prop_map(|(file, inline, bob)| StatesConfig {
            file: file.map(PathBuf::from),
            inline,
            bob,
        });
    let a2 = prop_oneof![
        Just(A2Config::Fourier),
        (1usize..9).prop_map(|i| A2Config::Target {
            state: StateRef::Index(i)
        }),
        amplitudes().prop_map(|v| A2Config::Target {
            state: StateRef::Amplitudes(v)
        }),
        prop::collection::vec(amplitudes(), 1..4).prop_map(|vectors| A2Config::Basis { vectors }),
    ];
    let machine = prop_oneof![
        prop::option::of(finite()).prop_map(|gamma| MachineConfig::Legal { gamma }),
        prop::option::of(prop::collection::vec(1usize..9, 0..5))
            .prop_map(|clonable| MachineConfig::Illegal { clonable }),
    ];
    (
        (any::<u64>(), any::<u64>(), 0usize..1000, 1usize..1000, any::<bool>()),
        prop::option::of("[a-z][a-z0-9_]{0,10}"),
        prop::option::of(0usize..10_000),
        states,
        a2,
        machine,
    )
        .prop_map(
            |((seed, trials, mu, pairs_per_bit, csv), out, message_bits, states, a2, machine)| RunConfig {
                seed,
                trials,
                mu,
                pairs_per_bit,
                format: if csv { Format::Csv } else { Format::Json },
                out: out.map(PathBuf::from),
                message_bits,
                states,
                a2,
                machine,
            },
        )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn config_round_trips_through_toml(config in run_config()) {
        let text = config.to_toml().unwrap();
        let back = RunConfig::from_toml(&text).unwrap();
        prop_assert_eq!(back, config, "{}", text);
    }
}
