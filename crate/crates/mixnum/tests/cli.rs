use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mixnum::io::read_waveform;
use serde_json::Value;

fn scenario(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios").join(name)
}

fn mixnum(args: &[&str]) -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_mixnum"));
    cmd.args(args).env_remove("MIXNUM_SEED");
    cmd
}

fn run_ok(cmd: &mut Command) -> Output {
    let out = cmd.output().unwrap();
    assert!(
        out.status.success(),
        "stdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn report(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("report.json")).unwrap()).unwrap()
}

fn single(out: &Path, extra: &[&str]) -> Command {
    let s = scenario("single_bwp.json");
    let mut args = vec!["run", "--scenario", s.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    mixnum(&args)
}

#[test]
fn missing_scenario_is_an_error() {
    let out = mixnum(&["run", "--scenario", "/nonexistent/scenario.json"]).output().unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("/nonexistent/scenario.json"), "{err}");
}

#[test]
fn malformed_and_invalid_scenarios_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let out = mixnum(&["run", "--scenario", bad.to_str().unwrap()]).output().unwrap();
    assert!(!out.status.success());

    let out_dir = dir.path().join("o");
    for set in ["bogus_field=1", "papr_target_db=\"high\"", "bwps.0.num_prbs=0", "method=QUANTUM"] {
        let out = single(&out_dir, &["--set", set]).output().unwrap();
        assert!(!out.status.success(), "{set} was accepted");
    }
    assert!(!out_dir.join("report.json").exists());
}

#[test]
fn run_writes_versioned_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_ok(&mut single(dir.path(), &["--dump-waveform"])).stdout;
    assert!(String::from_utf8_lossy(&stdout).contains("papr@0.001"));
    let ccdf = std::fs::read_to_string(dir.path().join("ccdf.csv")).unwrap();
    assert!(ccdf.starts_with("# mixnum-ccdf v1\npapr_db,probability\n"));
    let psd = std::fs::read_to_string(dir.path().join("psd.csv")).unwrap();
    assert!(psd.starts_with("# mixnum-psd v1\nfreq_hz,db\n"));
    let r = report(dir.path());
    assert_eq!(r["schema"], "mixnum-report v1");
    assert_eq!(r["digest"].as_str().unwrap().len(), 64);
    assert!(r.get("wall_time_s").is_none());

    let samples = r["metrics"]["samples"].as_u64().unwrap() as usize;
    let fs = r["scenario"]["nominal_transform"].as_f64().unwrap() * 15e3 * 4.0;
    let wf = read_waveform(&dir.path().join("waveform.f64"), fs).unwrap();
    assert_eq!(wf.len(), samples);
}

#[test]
fn override_reaches_the_requested_target() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&mut single(dir.path(), &["--set", "papr_target_db=7", "--set", "method=FC_ICEF"]));
    let r = report(dir.path());
    assert_eq!(r["papr_target_db"], 7.0);
    assert_eq!(r["method"], "FC_ICEF");
    let papr = r["metrics"]["papr_at_p_db"].as_f64().unwrap();
    assert!((papr - 7.0).abs() < 0.2, "{papr}");
}

#[test]
fn seed_comes_from_environment_unless_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run_ok(&mut single(&a, &[]));
    run_ok(single(&b, &[]).env("MIXNUM_SEED", "77"));
    run_ok(single(&c, &["--set", "seed=5"]).env("MIXNUM_SEED", "77"));
    let (ra, rb, rc) = (report(&a), report(&b), report(&c));
    assert_eq!(ra["seed"], 1);
    assert_eq!(rb["seed"], 77);
    assert_eq!(rc["seed"], 5);
    assert_ne!(ra["digest"], rb["digest"]);
    assert_ne!(ra["metrics"]["papr_at_p_db"], rb["metrics"]["papr_at_p_db"]);

    let out = single(&a, &[]).env("MIXNUM_SEED", "seven").output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("MIXNUM_SEED"));
}

#[test]
fn outputs_do_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    for method in ["I_ICEF", "FC_ICEF"] {
        let mut dirs = Vec::new();
        for threads in ["1", "3"] {
            let d = dir.path().join(format!("{method}-{threads}"));
            let mut cmd = single(&d, &["--set", &format!("method={method}")]);
            cmd.args(["--threads", threads]);
            run_ok(&mut cmd);
            dirs.push(d);
        }
        for f in ["ccdf.csv", "psd.csv", "report.json"] {
            let a = std::fs::read(dirs[0].join(f)).unwrap();
            let b = std::fs::read(dirs[1].join(f)).unwrap();
            assert!(a == b, "{method}: {f} differs");
        }
    }
}

#[test]
fn sweep_writes_one_row_per_method_and_target() {
    let dir = tempfile::tempdir().unwrap();
    let s = scenario("single_bwp.json");
    run_ok(&mut mixnum(&[
        "sweep",
        "--scenario",
        s.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--targets",
        "6,8",
        "--methods",
        "I_ICEF,FC_ICEF",
    ]));
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(dir.path().join("sweep.csv"))
        .unwrap();
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["method", "target_db", "papr_at_p_db", "mse_bwp0_db", "aclr0_db", "aclr1_db"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let keys: Vec<(String, String)> = rows.iter().map(|r| (r[0].to_string(), r[1].to_string())).collect();
    assert_eq!(
        keys,
        [("I_ICEF", "6.00"), ("I_ICEF", "8.00"), ("FC_ICEF", "6.00"), ("FC_ICEF", "8.00")]
            .map(|(a, b)| (a.to_string(), b.to_string()))
    );

    // a single-cell sweep matches the run summary
    let run_dir = dir.path().join("run");
    run_ok(&mut single(&run_dir, &["--set", "method=FC_ICEF", "--set", "papr_target_db=8"]));
    let papr = report(&run_dir)["metrics"]["papr_at_p_db"].as_f64().unwrap();
    let swept: f64 = rows[3][2].parse().unwrap();
    assert!((papr - swept).abs() < 1e-4);
}

#[test]
fn sweep_rejects_unknown_methods() {
    let s = scenario("single_bwp.json");
    let out = mixnum(&["sweep", "--scenario", s.to_str().unwrap(), "--methods", "FC_ICEF,NOPE"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("NOPE"));
}

#[test]
fn selftest_passes_and_is_repeatable() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let stdout = run_ok(&mut mixnum(&["selftest", "--out", a.to_str().unwrap()])).stdout;
    assert!(!String::from_utf8_lossy(&stdout).contains("FAIL"));
    run_ok(&mut mixnum(&["--threads", "2", "selftest", "--out", b.to_str().unwrap()]));
    assert_eq!(
        std::fs::read(a.join("selftest.json")).unwrap(),
        std::fs::read(b.join("selftest.json")).unwrap()
    );
}

#[test]
fn perturbed_fc_window_fails_selftest() {
    let out = mixnum(&["selftest", "--perturb-fc-window"]).output().unwrap();
    assert!(!out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("FAIL fc_all_pass_reconstruction"), "{stdout}");
    assert_eq!(stdout.matches("FAIL").count(), 1);
}
