// SPDX-License-Identifier: Apache-2.0
//! The `aieda` binary end to end.

use std::path::Path;
use std::process::{Command, Output};

fn aieda(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aieda"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn gen_sine(dir: &Path) {
    let o = aieda(
        dir,
        &[
            "gen", "--kind", "sine", "--freq", "1000", "--sr", "8000", "--dur", "1.0", "--out",
            "s.wav",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}

const PIPELINE: &str = r#"{"sample_rate":8000,"bit_width":7,"preemphasis_k":5,"fft_size":32,"hop":16,
    "window":"csd2","mel_shape":"rectangular","n_mel":8,"n_mfcc":8,"mode":"fixed"}"#;

#[test]
fn gen_writes_one_second_at_8k() {
    let d = tempfile::tempdir().unwrap();
    gen_sine(d.path());
    let s = kws_core::signal::read_wav(d.path().join("s.wav")).unwrap();
    assert_eq!(s.len(), 8000);
    assert_eq!(s.sample_rate(), 8000.0);
}

#[test]
fn mfcc_csv_has_499_rows_of_8() {
    let d = tempfile::tempdir().unwrap();
    gen_sine(d.path());
    std::fs::write(d.path().join("pipeline.json"), PIPELINE).unwrap();
    let args = [
        "mfcc",
        "--in",
        "s.wav",
        "--config",
        "pipeline.json",
        "--mode",
        "fixed",
        "--out",
        "m.csv",
    ];
    let o = aieda(d.path(), &args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("m.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "c0,c1,c2,c3,c4,c5,c6,c7");
    assert_eq!(lines.len() - 1, 499);
    assert!(lines[1..]
        .iter()
        .all(|l| l.split(',').count() == 8 && l.split(',').all(|v| v.parse::<f64>().is_ok())));

    // identical inputs give identical bytes
    let o = aieda(
        d.path(),
        &[
            "mfcc",
            "--in",
            "s.wav",
            "--config",
            "pipeline.json",
            "--mode",
            "fixed",
            "--out",
            "m2.csv",
        ],
    );
    assert_eq!(code(&o), 0);
    assert_eq!(
        std::fs::read(d.path().join("m2.csv")).unwrap(),
        csv.as_bytes()
    );
}

#[test]
fn mfcc_json_echoes_config() {
    let d = tempfile::tempdir().unwrap();
    gen_sine(d.path());
    std::fs::write(d.path().join("pipeline.json"), PIPELINE).unwrap();
    let o = aieda(
        d.path(),
        &[
            "mfcc",
            "--in",
            "s.wav",
            "--config",
            "pipeline.json",
            "--mode",
            "float",
            "--out",
            "m.json",
        ],
    );
    assert_eq!(code(&o), 0);
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("m.json")).unwrap()).unwrap();
    assert_eq!(v["config"]["mode"], "float");
    assert_eq!(v["config"]["fft_size"], 32);
    assert_eq!(v["frames"].as_array().unwrap().len(), 499);
}

#[test]
fn usage_and_input_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    let o = aieda(d.path(), &["mfcc", "--bogus"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    let o = aieda(d.path(), &["mfcc", "--in", "missing.wav"]);
    assert_eq!(code(&o), 2);
    std::fs::write(d.path().join("bad.wav"), b"RIFF....WAVE").unwrap();
    assert_eq!(code(&aieda(d.path(), &["mfcc", "--in", "bad.wav"])), 2);
    assert_eq!(code(&aieda(d.path(), &[])), 2);
}

#[test]
fn mismatched_rate_is_bad_input() {
    let d = tempfile::tempdir().unwrap();
    let o = aieda(
        d.path(),
        &["gen", "--sr", "16000", "--dur", "0.1", "--out", "s.wav"],
    );
    assert_eq!(code(&o), 0);
    std::fs::write(d.path().join("pipeline.json"), PIPELINE).unwrap();
    let o = aieda(
        d.path(),
        &["mfcc", "--in", "s.wav", "--config", "pipeline.json"],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn compare_reports_three_stages() {
    let d = tempfile::tempdir().unwrap();
    gen_sine(d.path());
    let o = aieda(d.path(), &["compare", "--in", "s.wav", "--out", "c.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("c.json")).unwrap()).unwrap();
    for stage in ["post_fft", "post_mel", "post_dct"] {
        assert!(v[stage]["max_abs"].as_f64().unwrap() >= 0.0, "{stage}");
        assert!(v[stage]["relative"].as_f64().unwrap() > 0.0, "{stage}");
    }
    let o = aieda(
        d.path(),
        &["compare", "--in", "s.wav", "--max-rel-error", "0"],
    );
    assert_eq!(code(&o), 1);
}

fn write_flow(dir: &Path, statuses: &[&str], budget: u32) {
    let reports: Vec<String> = statuses
        .iter()
        .map(|s| {
            if *s == "pass" {
                r#"{"status":"pass"}"#.to_string()
            } else {
                format!(r#"{{"status":"{s}","failures":["x"]}}"#)
            }
        })
        .collect();
    std::fs::write(
        dir.join("scenario.json"),
        format!("[{}]", reports.join(",")),
    )
    .unwrap();
    let cfg = format!(
        r#"{{"workdir":"ws","stages":{{"rtl":{{"adapter":{{"kind":"mock","scenario":"scenario.json"}},"budget":{budget}}}}}}}"#
    );
    std::fs::write(dir.join("flow.json"), cfg).unwrap();
}

#[test]
fn flow_run_and_resume() {
    let d = tempfile::tempdir().unwrap();
    write_flow(d.path(), &["fail", "fail", "pass"], 5);
    let o = aieda(
        d.path(),
        &[
            "flow",
            "run",
            "--config",
            "flow.json",
            "--checkpoint",
            "cp.json",
            "--result",
            "r.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: serde_json::Value =
        serde_json::from_slice(&std::fs::read(d.path().join("r.json")).unwrap()).unwrap();
    assert_eq!(r["status"], "success");
    assert_eq!(r["history"].as_array().unwrap().len(), 3);

    // resuming a finished flow reproduces its result
    let o = aieda(
        d.path(),
        &[
            "flow",
            "resume",
            "--config",
            "flow.json",
            "--checkpoint",
            "cp.json",
            "--result",
            "r2.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(
        std::fs::read(d.path().join("r.json")).unwrap(),
        std::fs::read(d.path().join("r2.json")).unwrap()
    );

    let o = aieda(
        d.path(),
        &[
            "flow",
            "resume",
            "--config",
            "flow.json",
            "--checkpoint",
            "none.json",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn flow_failures_and_bad_config() {
    let d = tempfile::tempdir().unwrap();
    write_flow(d.path(), &["fail", "fail", "pass"], 2);
    let o = aieda(d.path(), &["flow", "run", "--config", "flow.json"]);
    assert_eq!(code(&o), 1);
    let r: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["status"], "failed");

    let e = tempfile::tempdir().unwrap();
    write_flow(e.path(), &["pass"], 0);
    let o = aieda(e.path(), &["flow", "run", "--config", "flow.json"]);
    assert_eq!(code(&o), 2);
    assert!(!e.path().join("ws").exists());
}

#[test]
fn dse_bundled_report() {
    let d = tempfile::tempdir().unwrap();
    let o = aieda(d.path(), &["dse", "--jobs", "4", "--out", "report.json"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r: kws_core::dse::DseReport =
        serde_json::from_slice(&std::fs::read(d.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(r.decisions.len(), 6);
    assert!(r.chosen_point.is_some());

    std::fs::write(d.path().join("dse.json"), r#"{"sample_rates":[4000.0]}"#).unwrap();
    let o = aieda(
        d.path(),
        &["dse", "--config", "dse.json", "--out", "partial.json"],
    );
    assert_eq!(code(&o), 1);
    let r: kws_core::dse::DseReport =
        serde_json::from_slice(&std::fs::read(d.path().join("partial.json")).unwrap()).unwrap();
    assert!(r.error.is_some() && r.chosen_point.is_none());

    std::fs::write(d.path().join("bad.json"), r#"{"nope":1}"#).unwrap();
    assert_eq!(code(&aieda(d.path(), &["dse", "--config", "bad.json"])), 2);
}
