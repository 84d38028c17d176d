mod common;

use std::process::{Command, Output};

use common::{bin, config_path, run_config};
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().unwrap()
}

fn cfg(name: &str) -> String {
    config_path(name).to_str().unwrap().to_string()
}

#[test]
fn constant_spectrum_exits_zero() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = run(&["spectrum", "--config", &cfg("spectrum_constant.json"), "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(r["schema_version"], "schauder-lab.report/1");
    assert_eq!(r["command"], "spectrum");
    assert_eq!(r["input_hash"].as_str().unwrap().len(), 64);
    let spectrum = &r["result"]["spectrum"];
    assert_eq!(spectrum["shape"], "annulus");
    assert_eq!(spectrum["r_in"], 2.0);
    assert_eq!(spectrum["r_out"], 2.0);
    // wall time lives in the sidecar, not the report
    let timing = dir.path().join("r.json.timing.json");
    let t: Value = serde_json::from_slice(&std::fs::read(timing).unwrap()).unwrap();
    assert!(t["wall_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn constant_commutant_exits_two() {
    let o = run(&["commutant-cert", "--config", &cfg("commutant_constant.json")]);
    assert_eq!(o.status.code(), Some(2));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["pass"], false);
}

#[test]
fn bad_configs_exit_one_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"weights\": {\"kind\": \"constant\", \"c\": \"two\"}\n}\n").unwrap();
    let o = run(&["spectrum", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("weights") && msg.contains(":2:"), "{msg}");

    std::fs::write(&bad, "{\"weights\": {\"kind\": \"constant\", \"c\": 1.0}").unwrap();
    assert_eq!(run(&["spectrum", "--config", bad.to_str().unwrap()]).status.code(), Some(1));

    // config written for another subcommand
    let o = run(&["kernel", "--config", &cfg("spectrum_constant.json")]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("command"));

    let o = run(&["spectrum", "--config", dir.path().join("missing.json").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));

    let o = run(&["spectrum", "--config", &cfg("spectrum_constant.json"), "--window", "5:1"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn csv_without_table_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let o = run(&["case2", "--config", &cfg("case2.json"), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn basisconst_csv_has_128_rows() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = run(&["basisconst", "--config", &cfg("basisconst_example35.json"), "--csv", csv.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "running_max").unwrap();
    let running: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(running.len(), 128);
    assert!(running.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn flags_override_config() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("b.csv");
    let o = run(&[
        "basisconst",
        "--config",
        &cfg("basisconst_example35.json"),
        "--max-k",
        "10",
        "--window",
        "0:40",
        "--threads",
        "2",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["result"]["basis_constants"]["window"]["hi"], 40);
    assert_eq!(std::fs::read_to_string(csv).unwrap().lines().count(), 11);

    // a different seed changes the input hash
    let a: Value = serde_json::from_slice(&run(&["uncond", "--config", &cfg("uncond_example35.json"), "--max-k", "14", "--seed", "1"]).stdout).unwrap();
    let b: Value = serde_json::from_slice(&run(&["uncond", "--config", &cfg("uncond_example35.json"), "--max-k", "14", "--seed", "2"]).stdout).unwrap();
    assert_ne!(a["input_hash"], b["input_hash"]);
    assert_eq!(a["result"]["unconditional"]["seed"], 1);
}

#[test]
fn every_shipped_config_runs() {
    let expected = [
        ("spectrum", "spectrum_constant.json", None),
        ("kernel", "kernel_gap.json", Some(true)),
        ("index-cert", "index_cert_gap.json", Some(true)),
        ("case1", "case1.json", Some(true)),
        ("case2", "case2.json", Some(true)),
        ("case3", "case3.json", Some(true)),
        ("case4-design", "case4_design.json", Some(true)),
        ("exclusion", "exclusion.json", Some(true)),
        ("commutant-cert", "commutant_dyadic.json", Some(true)),
        ("commutant-cert", "commutant_constant.json", Some(false)),
        ("rosenblum-cert", "rosenblum.json", Some(true)),
        ("basisconst", "basisconst_example35.json", None),
        ("uncond", "uncond_example35.json", None),
        ("blowup", "blowup_onb.json", Some(true)),
        ("example35-growth", "example35_growth.json", Some(true)),
        ("disturb", "disturb_identity.json", Some(true)),
        ("disturb", "disturb_scalar.json", Some(true)),
        ("disturb", "disturb_patch.json", Some(true)),
    ];
    for (cmd, file, pass) in expected {
        assert_eq!(run_config(cmd, file).pass, pass, "{file}");
    }
    let shipped = std::fs::read_dir(config_path("")).unwrap().count();
    assert_eq!(shipped, expected.len());
}

#[test]
fn help_lists_every_subcommand() {
    let o = run(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    let help = String::from_utf8_lossy(&o.stdout);
    for cmd in [
        "spectrum",
        "kernel",
        "index-cert",
        "case1",
        "case2",
        "case3",
        "case4-design",
        "exclusion",
        "commutant-cert",
        "rosenblum-cert",
        "basisconst",
        "uncond",
        "blowup",
        "example35-growth",
        "disturb",
    ] {
        assert!(help.contains(cmd), "{cmd}");
    }
}
