use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use apdg::study::{emit_outputs, StudyKind, StudyResult};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_apdg"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("apdg-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).env_remove("APDG_THREADS").output().unwrap()
}

fn status(out: &Path, study: &str) -> String {
    let text = fs::read_to_string(out.join(format!("{study}_summary.json"))).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["status"].as_str().unwrap().to_string()
}

#[test]
fn maxwellian_run_is_deterministic_and_passes() {
    let root = scratch("maxw");
    let (a, b) = (root.join("a"), root.join("b"));
    let ra = run(&["maxwellian", "--seed", "3", "--threads", "1"], &a);
    let rb = run(&["maxwellian", "--seed", "3", "--threads", "1"], &b);
    assert_eq!(ra.status.code(), Some(0), "{}", String::from_utf8_lossy(&ra.stderr));
    assert_eq!(rb.status.code(), Some(0));
    let csv_a = fs::read(a.join("maxwellian.csv")).unwrap();
    assert_eq!(csv_a, fs::read(b.join("maxwellian.csv")).unwrap());
    assert_eq!(
        fs::read(a.join("maxwellian_summary.json")).unwrap(),
        fs::read(b.join("maxwellian_summary.json")).unwrap()
    );
    assert_eq!(status(&a, "maxwellian"), "pass");

    let text = String::from_utf8(csv_a).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("seed,theta,h_v"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 9, "three temperatures times three mesh sizes");
    assert!(rows.iter().all(|r| r.starts_with("3,")));
    assert!(!text.contains('\r'));

    let stdout = String::from_utf8_lossy(&ra.stdout);
    assert!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count() >= 30);
    assert!(!stdout.contains("[FAIL]"));

    let svg = fs::read_to_string(a.join("maxwellian_theta_1_l2_error.svg")).unwrap();
    assert!(svg.starts_with("<svg") || svg.starts_with("<?xml"));
    assert!(svg.contains("<title>theta=1 l2 error: slope = "));
    let svgs = fs::read_dir(&a).unwrap().filter(|e| e.as_ref().unwrap().path().extension().unwrap() == "svg").count();
    assert_eq!(svgs, 9);
    fs::remove_dir_all(root).unwrap();
}

#[test]
fn identities_output_depends_only_on_seed() {
    let root = scratch("ids");
    let r1 = run(&["identities", "--seed", "5", "--threads", "1"], &root.join("a"));
    let r2 = run(&["identities", "--seed", "5", "--threads", "1"], &root.join("b"));
    let r3 = run(&["identities", "--seed", "6", "--threads", "1"], &root.join("c"));
    for r in [&r1, &r2, &r3] {
        assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    }
    let read = |d: &str| fs::read(root.join(d).join("identities.csv")).unwrap();
    assert_eq!(read("a"), read("b"));
    assert_ne!(read("a"), read("c"));
    fs::remove_dir_all(root).unwrap();
}

#[test]
fn exit_code_follows_the_summary() {
    let root = scratch("eps");
    let cfg = root.join("eps.toml");
    fs::write(
        &cfg,
        "[physics]\nt_end = 0.02\n\n[grid]\nn_x = [8]\nn_v = [16]\nbeta = [1]\nepsilon = [1e-2, 1e-3, 1e-4]\n",
    )
    .unwrap();
    let out = root.join("out");
    let r = run(&["eps-sweep", "--config", cfg.to_str().unwrap(), "--threads", "1"], &out);
    let st = status(&out, "eps_sweep");
    let stdout = String::from_utf8_lossy(&r.stdout);
    match st.as_str() {
        "pass" => assert_eq!(r.status.code(), Some(0)),
        "fail" => {
            assert_eq!(r.status.code(), Some(1));
            assert!(stdout.contains("[FAIL]"));
        }
        other => panic!("unexpected status {other}"),
    }
    let text = fs::read_to_string(out.join("eps_sweep.csv")).unwrap();
    assert_eq!(text.lines().count(), 1 + 3);
    fs::remove_dir_all(root).unwrap();
}

#[test]
fn bad_configs_exit_with_two() {
    let root = scratch("bad");
    let unknown = root.join("unknown.toml");
    fs::write(&unknown, "[grid]\nbogus = 1\n").unwrap();
    let wrong_kind = root.join("kind.toml");
    fs::write(&wrong_kind, "kind = \"h_sweep\"\n").unwrap();
    let too_few = root.join("few.toml");
    fs::write(&too_few, "[grid]\nn_x = [8, 16]\n").unwrap();
    for (sub, path) in [("identities", &unknown), ("maxwellian", &wrong_kind), ("h-sweep", &too_few)] {
        let r = run(&[sub, "--config", path.to_str().unwrap()], &root.join("out"));
        assert_eq!(r.status.code(), Some(2), "{sub}: {}", String::from_utf8_lossy(&r.stderr));
        assert!(String::from_utf8_lossy(&r.stderr).starts_with("error:"));
    }
    let r = run(&["maxwellian", "--config", root.join("missing.toml").to_str().unwrap()], &root.join("out"));
    assert_eq!(r.status.code(), Some(2));
    let r = bin().arg("no-such-study").output().unwrap();
    assert!(!r.status.success());
    fs::remove_dir_all(root).unwrap();
}

#[test]
fn empty_result_reports_no_assertions() {
    let dir = scratch("empty");
    let result = StudyResult::new(StudyKind::HSweep, 9, &["seed", "n_x"]);
    let files = emit_outputs(&result, &dir).unwrap();
    assert!(files.plots.is_empty());
    assert_eq!(status(&dir, "h_sweep"), "no assertions");
    assert_eq!(fs::read_to_string(files.csv).unwrap(), "seed,n_x\n");
    fs::remove_dir_all(dir).unwrap();
}
