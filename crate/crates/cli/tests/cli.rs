use std::path::Path;
use std::process::{Command, Output};

fn vps(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vps"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("failed to launch vps")
}

fn ok(out: &Path, args: &[&str]) -> Output {
    let o = vps(out, args);
    assert!(
        o.status.success(),
        "vps {args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    o
}

fn data_rows(path: &Path) -> usize {
    std::fs::read_to_string(path).unwrap().lines().count() - 1
}

#[test]
fn gen_case2_writes_seven_blocks() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "--case", "2", "--n", "40"]);
    assert_eq!(data_rows(&dir.path().join("case2.csv")), 280);
    assert!(dir.path().join("case2.meta").exists());
    let manifest = std::fs::read_to_string(dir.path().join("gen_manifest.txt")).unwrap();
    assert!(manifest.contains("artifact.case2.csv = sha256:"));
    assert!(manifest.contains("config.train.epochs = 500"));
}

#[test]
fn gen_rerun_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        ok(d.path(), &["--seed", "5", "gen", "--case", "1", "--n", "300"]);
    }
    for name in ["case1.csv", "case1.meta"] {
        assert_eq!(
            std::fs::read(a.path().join(name)).unwrap(),
            std::fs::read(b.path().join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn gen_zero_rows_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = vps(dir.path(), &["gen", "--case", "1", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_net_spec_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["gen", "--case", "1", "--n", "100"]);
    let data = dir.path().join("case1.csv");
    let o = vps(dir.path(), &["train", "--data", data.to_str().unwrap(), "--net", "9,,9"]);
    assert_eq!(o.status.code(), Some(4), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn missing_data_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.csv");
    let o = vps(dir.path(), &["train", "--data", missing.to_str().unwrap(), "--net", "4"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn train_then_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["--seed", "3", "gen", "--case", "1", "--n", "3000"]);
    let data = out.join("case1.csv");
    let data = data.to_str().unwrap();
    let train_args = ["--seed", "3", "train", "--data", data, "--net", "5,7,5", "--epochs", "40"];
    ok(out, &train_args);

    let model = out.join("model.vpsm");
    let text = std::fs::read_to_string(&model).unwrap();
    assert!(text.contains("hidden = 5,7,5"));
    let report = std::fs::read_to_string(out.join("train_report.csv")).unwrap();
    assert!(report.starts_with("epoch,train_loss,val_loss\n"));

    // Same seeds give the same model file.
    let again = tempfile::tempdir().unwrap();
    ok(again.path(), &train_args);
    assert_eq!(std::fs::read(again.path().join("model.vpsm")).unwrap(), text.as_bytes());

    let o = ok(out, &["eval", "--model", model.to_str().unwrap(), "--data", data]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("epsilon"));
    let trace = out.join("trace.csv");
    assert_eq!(data_rows(&trace), 3000);
    assert!(std::fs::read_to_string(&trace).unwrap().starts_with("sno,Vtarget,Vobserved,normerror\n"));

    // Training-data epsilon stays within twice the validation epsilon.
    let eval_eps: f64 = std::fs::read_to_string(out.join("epsilon.csv"))
        .unwrap()
        .lines()
        .nth(1)
        .and_then(|l| l.strip_prefix("vp,"))
        .unwrap()
        .parse()
        .unwrap();
    let manifest = std::fs::read_to_string(out.join("train_manifest.txt")).unwrap();
    let val_eps: f64 = manifest
        .lines()
        .find_map(|l| l.strip_prefix("val_epsilon.vp = "))
        .expect("val_epsilon in manifest")
        .parse()
        .unwrap();
    assert!(eval_eps <= 2.0 * val_eps, "{eval_eps} vs {val_eps}");
}

#[test]
fn eval_rejects_mismatched_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["gen", "--case", "2", "--n", "50"]);
    ok(out, &["gen", "--case", "1", "--n", "200"]);
    let c2 = out.join("case2.csv");
    ok(
        out,
        &["train", "--data", c2.to_str().unwrap(), "--net", "4", "--epochs", "2"],
    );
    let model = out.join("model.vpsm");
    let c1 = out.join("case1.csv");
    let o = vps(
        out,
        &["eval", "--model", model.to_str().unwrap(), "--data", c1.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(5), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn eval_on_labeled_log_writes_zone_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    ok(out, &["gen", "--case", "2", "--n", "200"]);
    ok(out, &["gen", "--case", "2", "--testlog", "--n", "20"]);
    let c2 = out.join("case2.csv");
    ok(out, &["train", "--data", c2.to_str().unwrap(), "--net", "4", "--epochs", "3"]);
    let log = out.join("case2_testlog.csv");
    ok(
        out,
        &[
            "eval",
            "--model",
            out.join("model.vpsm").to_str().unwrap(),
            "--data",
            log.to_str().unwrap(),
        ],
    );
    assert_eq!(data_rows(&out.join("trace.csv")), 140);
    let zones = std::fs::read_to_string(out.join("zone_summary.csv")).unwrap();
    assert_eq!(zones.lines().count(), 1 + 7 * 2, "{zones}");
}

#[test]
fn small_reproduce_writes_sweep_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path();
    let o = ok(
        out,
        &["reproduce", "--case", "2", "--n", "100", "--epochs", "2", "--seeds", "1,2"],
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.starts_with("spec,eps_Vp,eps_Vs,n_seeds\n"), "{stdout}");
    let case_dir = out.join("case2");
    assert_eq!(data_rows(&case_dir.join("sweep.csv")), 5);
    let manifest = std::fs::read_to_string(case_dir.join("manifest.txt")).unwrap();
    assert!(manifest.contains("artifact.sweep.csv = sha256:"));
    assert!(manifest.contains("artifact.corpus.csv = sha256:"));
    assert!(case_dir.join("zone_summary.csv").exists());
    assert!(case_dir.join("trace.csv").exists());
}

#[test]
fn table_prints_all_laws() {
    let dir = tempfile::tempdir().unwrap();
    let o = ok(dir.path(), &["table"]);
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 21);
    assert!(text.contains("dolomite,vp_rho,1,,-0.137,1.843"));
    let o = ok(dir.path(), &["table", "--mode", "corrected"]);
    assert!(String::from_utf8(o.stdout).unwrap().contains("dolomite,vp_rho,1,,0.137,1.843"));
}
