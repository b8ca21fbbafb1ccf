use std::path::{Path, PathBuf};
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_chainforge"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("chainforge-cli-{}-{tag}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    dir
}

fn run(sub: &str, cfg: &Path, out: &Path, extra: &[&str]) -> i32 {
    let status = bin()
        .args([sub, "--config"])
        .arg(cfg)
        .args(["--seed", "5", "--out"])
        .arg(out)
        .args(extra)
        .output()
        .expect("binary runs")
        .status;
    status.code().expect("exited normally")
}

#[test]
fn every_sample_config_passes() {
    for sub in ["flatnorm", "localize", "fill-disk", "avoid-ball", "fill-domain"] {
        let out = scratch(sub);
        assert_eq!(run(sub, &config(&format!("{sub}.json")), &out, &[]), 0, "{sub}");
        for f in ["summary.json", "rows.jsonl", "rows.csv", "outputs.jsonl"] {
            assert!(out.join(f).exists(), "{sub}: {f}");
        }
        let _ = std::fs::remove_dir_all(out);
    }
}

#[test]
fn injected_fault_exits_two() {
    for sub in ["flatnorm", "fill-disk", "fill-domain"] {
        let out = scratch(&format!("fault-{sub}"));
        assert_eq!(run(sub, &config(&format!("{sub}.json")), &out, &["--inject-fault"]), 2, "{sub}");
        let _ = std::fs::remove_dir_all(out);
    }
}

#[test]
fn config_errors_exit_three() {
    let out = scratch("config");
    let bad = out.with_extension("json");
    std::fs::write(&bad, r#"{"generator": {"kind": "spiral"}}"#).unwrap();
    assert_eq!(run("fill-disk", &bad, &out, &[]), 3);
    // A config written for another pipeline.
    assert_eq!(run("fill-disk", &config("localize.json"), &out, &[]), 3);
    assert_eq!(run("localize", &config("localize.json"), &out, &["--dim-cap", "1"]), 3);
    assert_eq!(run("flatnorm", &out.join("missing.json"), &out, &[]), 3);
    let _ = std::fs::remove_file(bad);
}

#[test]
fn outputs_are_identical_across_thread_counts() {
    let a = scratch("t1");
    let b = scratch("t3");
    assert_eq!(run("fill-disk", &config("fill-disk.json"), &a, &["--threads", "1"]), 0);
    assert_eq!(run("fill-disk", &config("fill-disk.json"), &b, &["--threads", "3"]), 0);
    for f in ["summary.json", "rows.jsonl", "rows.csv", "outputs.jsonl"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let _ = std::fs::remove_dir_all(a);
    let _ = std::fs::remove_dir_all(b);
}

#[test]
fn flatnorm_reads_an_input_chain() {
    let out = scratch("input");
    let chain = out.with_extension("chain.json");
    std::fs::write(&chain, r#"{"dim": 2, "zero": [[0.8, 0.0], [-0.8, 0.0]]}"#).unwrap();
    let st = bin()
        .args(["flatnorm", "--config"])
        .arg(config("flatnorm.json"))
        .arg("--input")
        .arg(&chain)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap()
        .status;
    assert!(st.success());
    let line = std::fs::read_to_string(out.join("outputs.jsonl")).unwrap();
    let first: serde_json::Value = serde_json::from_str(line.lines().next().unwrap()).unwrap();
    // Matching the two points costs their distance; dropping them costs 2.
    assert!((first["output"]["value"].as_f64().unwrap() - 1.6).abs() < 1e-12);
    let _ = std::fs::remove_file(chain);
    let _ = std::fs::remove_dir_all(out);
}
