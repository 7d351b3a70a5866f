use std::process::{Command, Output};

use serde_json::Value;

const HALF_LINE: &str = r#"{"q":1,"p":1,"m":[1],"n":[1],"a":[0],"b":[0],"t":0.5,"intervals":[[0,"inf"]]}"#;
const PQ22: &str = r#"{"q":2,"p":2,"m":[1,1],"n":[1,1],"a":[-1,1],"b":[-0.5,0.5],"t":0.5,"intervals":[[-1,0.5],[1,2]]}"#;

fn nibm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nibm")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

#[test]
fn kstar_range_emits_csv() {
    let out = nibm(&["kstar", "--x", "4..8"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "x,kstar,M,equations,bound");
    let ks: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(ks, ["3", "4", "4", "5", "5"]);
}

#[test]
fn probability_on_half_line() {
    let out = nibm(&["prob", "--config", HALF_LINE, "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["result"]["probability"], 0.5);
    assert_eq!(v["manifest"]["subcommand"], "prob");
    assert!(v.get("timestamp_unix").is_none());
}

#[test]
fn config_errors_exit_two() {
    let bad = HALF_LINE.replace("\"t\":0.5", "\"t\":0.5,\"tt\":1");
    assert_eq!(nibm(&["prob", "--config", &bad]).status.code(), Some(2));
    assert_eq!(nibm(&["prob"]).status.code(), Some(2));
    assert_eq!(nibm(&["prob", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(nibm(&["no-such-command"]).status.code(), Some(2));
    let decreasing = HALF_LINE.replace("\"q\":1,\"p\":1,\"m\":[1]", "\"q\":2,\"p\":1,\"m\":[1,0]");
    assert_eq!(nibm(&["prob", "--config", &decreasing]).status.code(), Some(2));
}

#[test]
fn size_ceiling_exits_three() {
    let big = r#"{"q":1,"p":1,"m":[21],"n":[21],"a":[0],"b":[0],"t":0.5}"#;
    assert_eq!(nibm(&["prob", "--config", big]).status.code(), Some(3));
}

#[test]
fn desk_suite_passes() {
    let out = nibm(&["verify-all", "--suite", "desk", "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let reports = v["result"]["reports"].as_array().unwrap();
    assert!(reports.len() >= 40);
    assert_eq!(v["result"]["failed"], 0);
    assert_eq!(v["passed"], true);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["virasoro", "--config", PQ22, "--no-timestamp"];
    let (a, b) = (nibm(&args), nibm(&args));
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let h = json(&a)["content_hash"].as_str().unwrap().to_string();
    assert_eq!(h.len(), 64);
    let other = nibm(&["virasoro", "--config", PQ22, "--k", "0", "--no-timestamp"]);
    assert_ne!(json(&other)["content_hash"].as_str().unwrap(), h);
    assert!(json(&nibm(&["virasoro", "--config", PQ22]))["timestamp_unix"].is_u64());
}

#[test]
fn impossible_tolerance_exits_one() {
    let out = nibm(&["virasoro", "--config", PQ22, "--tol", "1e-300"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(json(&out)["passed"], false);
}

#[test]
fn identity_subcommands_run() {
    for cmd in ["hirota", "ratios", "lemma"] {
        let out = nibm(&[cmd, "--config", PQ22, "--no-timestamp"]);
        assert_eq!(out.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&out.stdout));
    }
    let n2 = r#"{"q":2,"p":1,"m":[1,1],"n":[2],"a":[-1,1],"b":[0],"t":0.5,"intervals":[[-1,1]]}"#;
    let out = nibm(&["prop1", "--config", n2, "--no-timestamp"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(json(&out)["result"]["reports"].as_array().unwrap().len(), 3);
}

#[test]
fn sampler_is_seeded() {
    let cfg = r#"{"q":1,"p":1,"m":[1],"n":[1],"a":[0],"b":[0],"t":0.5,"intervals":[[-0.3,0.3]],
                 "chain":{"chains":2,"steps":20000,"burn_in":1000}}"#;
    let a = nibm(&["sample", "--config", cfg, "--seed", "4", "--no-timestamp"]);
    let b = nibm(&["sample", "--config", cfg, "--seed", "4", "--no-timestamp"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let v = json(&a);
    assert_eq!(v["result"]["chain"]["seed"], 4);
    assert_eq!(v["result"]["estimate"]["sign_flips"], 0);
}

#[test]
fn sample_dump_writes_states() {
    let dir = std::env::temp_dir().join(format!("nibm-dump-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("states.csv");
    let cfg = r#"{"q":2,"p":2,"m":[1,1],"n":[1,1],"a":[-1,1],"b":[-0.5,0.5],"t":0.5,"intervals":[[-1,1]],
                 "chain":{"chains":2,"steps":5000,"burn_in":500}}"#;
    let out = nibm(&["sample", "--config", cfg, "--dump", path.to_str().unwrap(), "--thin", "50"]);
    assert!(matches!(out.status.code(), Some(0) | Some(1)));
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("chain,index,x0,x1\n"));
    assert_eq!(text.lines().count(), 1 + 2 * 90);
    std::fs::remove_dir_all(dir).unwrap();
}

#[test]
fn appendix_subcommands() {
    let v = json(&nibm(&["appendix", "hermite", "--j", "2"]));
    assert_eq!(v["result"]["p"]["coeffs"], serde_json::json!(["1", "0", "1"]));
    let v = json(&nibm(&["appendix", "x", "--z", "1", "--m2", "1"]));
    assert!((v["result"]["log_x"].as_f64().unwrap() - (std::f64::consts::E - 1.0).ln()).abs() < 1e-14);
    let v = json(&nibm(&["appendix", "taur", "--m1", "2", "--m2", "2", "--at", "0.3", "--bt", "0.2"]));
    assert!(v["result"]["logmag_diff"].as_f64().unwrap() < 1e-10);
    let v = json(&nibm(&["appendix", "conjecture", "--m1", "1", "--m2", "3", "--at", "0.4", "--bt", "0.3"]));
    assert!(v["result"]["entry00_rel"].as_f64().unwrap() < 1e-9);
    let v = json(&nibm(&["appendix", "asymptotic", "--coef-a", "-1", "--coef-b", "1", "--m2s", "1000,10000"]));
    assert_eq!(v["result"].as_array().unwrap().len(), 2);
    let out = nibm(&["appendix", "conjecture-table", "--m1", "1", "--coef-a", "-1", "--coef-b", "1", "--m2s", "20,40"]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("m2,exact_log_tau,conjecture_variant,log_ratio\n"));
    assert_eq!(text.lines().count(), 5);
    assert_eq!(nibm(&["appendix", "conjecture", "--m1", "9", "--m2", "3", "--at", "0.4", "--bt", "0.3"]).status.code(), Some(2));
}

#[test]
fn census_counts_are_exact_strings() {
    let v = json(&nibm(&["census", "--p", "2", "--q", "2", "--k", "3"]));
    assert_eq!(v["result"]["equations"], "120");
    assert_eq!(v["result"]["unknown_bound"], "112");
    assert_eq!(v["result"]["balanced"], true);
}

#[test]
fn out_flag_writes_file() {
    let path = std::env::temp_dir().join(format!("nibm-out-{}.json", std::process::id()));
    let out = nibm(&["census", "--p", "2", "--q", "2", "--k", "2", "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["result"]["balanced"], false);
    std::fs::remove_file(path).unwrap();
}
