use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::{json, Value};

fn vldp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vldp"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("run vldp")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = vldp(dir, args);
    assert!(
        out.status.success(),
        "vldp {args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

struct Survey {
    dir: tempfile::TempDir,
}

impl Survey {
    /// Issuer, registry, request, and `holders` credentials with the
    /// given ages, all smokers.
    fn new(mechanism: Value, attribute: &str, kind: &str, ages: &[i64]) -> Self {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path();
        ok(
            d,
            &["issuer-keygen", "--id", "gov", "--seed", "1", "--out", "issuer.json"],
        );
        ok(d, &["registry", "--issuer", "issuer.json", "--out", "registry.json"]);
        let config = json!({
            "survey_id": "cli-test",
            "attribute": attribute,
            "attribute_kind": kind,
            "mechanism": mechanism,
            "challenge": format!("{:064x}", 0xC0FFEE),
            "trusted_issuers": ["gov"],
        });
        fs::write(d.join("survey.json"), config.to_string()).unwrap();
        ok(d, &["request", "--config", "survey.json", "--out", "request.json"]);
        for (i, age) in ages.iter().enumerate() {
            let keys = format!("keys{i}.json");
            let cred = format!("cred{i}.json");
            let seed = (10 + i).to_string();
            let age = format!("age={age}");
            ok(d, &["keygen", "--seed", &seed, "--out", &keys]);
            ok(
                d,
                &[
                    "issue",
                    "--issuer",
                    "issuer.json",
                    "--keys",
                    &keys,
                    "--attr",
                    "smoker=1",
                    "--attr",
                    &age,
                    "--seed",
                    &seed,
                    "--out",
                    &cred,
                ],
            );
            ok(
                d,
                &[
                    "respond",
                    "--request",
                    "request.json",
                    "--credential",
                    &cred,
                    "--keys",
                    &keys,
                    "--out",
                    "responses.jsonl",
                ],
            );
        }
        Survey { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn input(&self) -> [&'static str; 6] {
        [
            "--request",
            "request.json",
            "--registry",
            "registry.json",
            "--responses",
            "responses.jsonl",
        ]
    }
}

#[test]
fn rr_survey_end_to_end() {
    let s = Survey::new(json!({"kind": "rr"}), "smoker", "binary", &[30, 40, 50]);
    let d = s.dir.path();
    let lines = fs::read_to_string(s.path("responses.jsonl")).unwrap();
    assert_eq!(lines.lines().count(), 3);

    let mut verify = vec!["verify"];
    verify.extend(s.input());
    let verdicts = ok(d, &verify);
    assert_eq!(verdicts.lines().count(), 3);
    assert!(verdicts.lines().all(|l| l.contains("\"accept\"")));

    let mut agg = vec!["aggregate"];
    agg.extend(s.input());
    let result: Value = serde_json::from_str(&ok(d, &agg)).unwrap();
    assert_eq!(result["accepted"], 3);
    assert_eq!(result["rejected"], 0);
    let hist = result["histogram"].as_array().unwrap();
    assert_eq!(hist.len(), 2);
    assert_eq!(hist[0].as_u64().unwrap() + hist[1].as_u64().unwrap(), 3);
}

#[test]
fn tampered_response_exits_one() {
    let params = json!({"kind": "exponential", "epsilon": {"num": 10, "den": 1}, "l": 0, "u": 128, "d": 20});
    let s = Survey::new(params, "age", "numeric", &[50]);
    let d = s.dir.path();
    let line = fs::read_to_string(s.path("responses.jsonl")).unwrap();
    let mut r: Value = serde_json::from_str(line.trim()).unwrap();
    let out = r["output"].as_i64().unwrap();
    r["output"] = json!((out + 1) % 128);
    fs::write(s.path("responses.jsonl"), format!("{line}{r}\n")).unwrap();

    let mut verify = vec!["verify"];
    verify.extend(s.input());
    let result = vldp(d, &verify);
    assert_eq!(result.status.code(), Some(1));
    let stdout = String::from_utf8(result.stdout).unwrap();
    let verdicts: Vec<Value> = stdout.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(verdicts[0]["verdict"], "accept");
    assert_eq!(verdicts[1]["reason"], "output_mismatch");
}

#[test]
fn responses_are_deterministic() {
    let a = Survey::new(json!({"kind": "rr"}), "smoker", "binary", &[30]);
    let b = Survey::new(json!({"kind": "rr"}), "smoker", "binary", &[30]);
    assert_eq!(
        fs::read_to_string(a.path("responses.jsonl")).unwrap(),
        fs::read_to_string(b.path("responses.jsonl")).unwrap()
    );
}

#[test]
fn stats_report_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("params.json"),
        json!({"epsilon": {"num": 10, "den": 1}, "l": 0, "u": 128, "d": 20}).to_string(),
    )
    .unwrap();
    let out = ok(
        d,
        &[
            "stats",
            "--config",
            "params.json",
            "--value",
            "50",
            "--exact",
            "--chi2",
            "--samples",
            "10000",
            "--seed",
            "3",
            "--histogram-csv",
            "hist.csv",
        ],
    );
    let report: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(report["exact_mode"], 50);
    assert_eq!(report["exact"].as_array().unwrap().len(), 128);
    assert_eq!(report["chi2"]["samples"], 10_000);
    assert!(report["chi2"]["fit"]["p_value"].as_f64().unwrap() > 0.0);
    assert!(report["delta_ledger"]["total"].as_f64().unwrap() > 0.0);
    let csv = fs::read_to_string(d.join("hist.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("value,count"));
    assert_eq!(csv.lines().count(), 129);
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(vldp(dir.path(), &["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        vldp(dir.path(), &["request", "--config", "missing.json"]).status.code(),
        Some(2)
    );
    fs::write(dir.path().join("bad.json"), "{\"kind\": 1}").unwrap();
    assert_eq!(
        vldp(dir.path(), &["request", "--config", "bad.json"]).status.code(),
        Some(2)
    );
}
