use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blind-cqec"))
}

fn scratch(tag: &str) -> PathBuf {
    let p = std::env::temp_dir().join(format!("blind-cqec-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&p);
    p
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().expect("binary runs")
}

fn csvs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().ends_with(".csv"))
        .map(|e| {
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

const SMALL: [&str; 6] = ["--dims", "2,4,8", "--set", "sweep-dim.states=4", "--seed", "7"];

#[test]
fn reruns_are_byte_identical_across_worker_counts() {
    let (a, b) = (scratch("det-a"), scratch("det-b"));
    let mut args = vec!["sweep-dim"];
    args.extend(SMALL);
    assert!(run(&args, &a).status.success());
    args.extend(["--workers", "3"]);
    assert!(run(&args, &b).status.success());
    let (ca, cb) = (csvs(&a), csvs(&b));
    assert_eq!(ca.len(), 2);
    assert_eq!(ca, cb);
    let side: serde_json::Value = serde_json::from_str(&fs::read_to_string(a.join("sweep_dim.json")).unwrap()).unwrap();
    assert!(side["version"].as_str().unwrap().starts_with("blind-cqec v"));
    assert_eq!(side["config"]["master_seed"], 7);
    assert!(a.join("manifest.json").exists());
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
}

#[test]
fn seed_changes_random_outputs() {
    let (a, b) = (scratch("seed-a"), scratch("seed-b"));
    let mut args = vec!["sweep-dim"];
    args.extend(SMALL);
    assert!(run(&args, &a).status.success());
    *args.last_mut().unwrap() = "8";
    assert!(run(&args, &b).status.success());
    assert_ne!(csvs(&a), csvs(&b));
    let _ = fs::remove_dir_all(&a);
    let _ = fs::remove_dir_all(&b);
}

#[test]
fn config_errors_exit_with_two() {
    let out = scratch("cfg");
    assert_eq!(run(&["nonsense"], &out).status.code(), Some(2));
    assert_eq!(
        run(&["sweep-dim", "--set", "sweep-dim.states=0"], &out).status.code(),
        Some(2)
    );
    assert_eq!(run(&["sweep-dim", "--set", "bogus.key=1"], &out).status.code(), Some(2));
    assert_eq!(run(&["vqe", "--dims", "2,4"], &out).status.code(), Some(2));
    let cfg = out.with_extension("cfg");
    fs::write(&cfg, "[noise]\np_depolarizing = 1.5\n").unwrap();
    let r = bin()
        .args(["vqe", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(r.status.code(), Some(2));
    let _ = fs::remove_file(&cfg);
    assert!(!out.exists());
}

#[test]
fn check_mode_reports_threshold_failures() {
    let out = scratch("check");
    // The noise sweep carries a criterion that this model does not meet.
    let r = run(&["sweep-noise", "--check"], &out);
    assert_eq!(r.status.code(), Some(1));
    let text = String::from_utf8_lossy(&r.stdout);
    assert!(text.contains("PASS C1") && text.contains("FAIL C2"), "{text}");
    assert!(run(&["sweep-noise"], &out).status.success());
    let r = run(
        &["qem-compare", "--check", "--set", "qem-compare.states=3", "--dims", "4"],
        &out,
    );
    assert_eq!(r.status.code(), Some(0), "{}", String::from_utf8_lossy(&r.stdout));
    let _ = fs::remove_dir_all(&out);
}

#[test]
fn config_file_sections_apply() {
    let out = scratch("file");
    let cfg = out.with_extension("cfg");
    fs::write(&cfg, "master_seed = 3\n[crossover]\ndims = 2, 4\nstates = 2\n").unwrap();
    let r = bin()
        .args(["crossover", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert!(r.status.success());
    let emp = fs::read_to_string(out.join("crossover_empirical.csv")).unwrap();
    assert_eq!(emp.lines().count(), 3);
    let _ = fs::remove_file(&cfg);
    let _ = fs::remove_dir_all(&out);
}
