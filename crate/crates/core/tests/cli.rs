//! End-to-end runs of the `viscoflow` binary.

use std::fs;
use std::path::Path;
use std::process::Command;

use tempfile::TempDir;

fn viscoflow(args: &[&str]) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_viscoflow"))
        .args(args)
        .output()
        .expect("binary runs")
        .status
        .code()
        .expect("exit code")
}

fn write_cfg(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, body).unwrap();
    p.display().to_string()
}

const SMALL: &str = "flux = burgers\nviscosity = rational\ndata = step\neps = 0.02\nn_cells = 256\nT = 0.3\n";

#[test]
fn usage_and_config_errors_exit_one() {
    assert_eq!(viscoflow(&["--help"]), 0);
    assert_eq!(viscoflow(&["--version"]), 0);
    assert_eq!(viscoflow(&[]), 1);
    assert_eq!(viscoflow(&["solve", "--bogus"]), 1);
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("nope.cfg").display().to_string();
    assert_eq!(viscoflow(&["solve", "--config", &missing]), 1);
    let bad = write_cfg(tmp.path(), "bad.cfg", "colour = blue\n");
    assert_eq!(viscoflow(&["solve", "--config", &bad]), 1);
    let wrong = write_cfg(tmp.path(), "wrong.cfg", "data = step\nhypothesis = F\n");
    assert_eq!(viscoflow(&["solve", "--config", &wrong]), 1);
    let empty = tmp.path().join("empty").display().to_string();
    assert_eq!(viscoflow(&["verify", "--in", &empty, "--report", &format!("{empty}/r.csv")]), 1);
}

#[test]
fn prepare_writes_regularized_data() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("e").display().to_string();
    assert_eq!(viscoflow(&["prepare", "--hypothesis", "E", "--data", "hat", "--eps", "0.02", "--out", &out]), 0);
    for f in ["u0eps.csv", "mollifier_bounds.csv", "run.cfg"] {
        assert!(Path::new(&out).join(f).exists(), "{f}");
    }
    let out = tmp.path().join("f").display().to_string();
    assert_eq!(viscoflow(&["prepare", "--hypothesis", "F", "--data", "sqrt", "--eps", "0.02", "--out", &out]), 0);
    assert!(Path::new(&out).join("w11_bounds.csv").exists());
}

#[test]
fn solve_then_verify_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(tmp.path(), "run.cfg", SMALL);
    let out = tmp.path().join("solve").display().to_string();
    assert_eq!(viscoflow(&["solve", "--config", &cfg, "--out", &out]), 0);
    for f in ["slices.csv", "diagnostics.csv", "estimates.csv", "run.cfg"] {
        assert!(Path::new(&out).join(f).exists(), "{f}");
    }
    let report = tmp.path().join("entropy.csv").display().to_string();
    assert_eq!(viscoflow(&["verify", "--in", &out, "--report", &report]), 0);
    let text = fs::read_to_string(&report).unwrap();
    assert!(text.starts_with("kind,k,testfn_id,residual,tolerance,pass"));
    assert!(!text.contains(",false"));
}

#[test]
fn reference_then_verify_passes() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(tmp.path(), "run.cfg", SMALL);
    let out = tmp.path().join("ref").display().to_string();
    assert_eq!(viscoflow(&["reference", "--config", &cfg, "--out", &out]), 0);
    let report = tmp.path().join("ref_entropy.csv").display().to_string();
    assert_eq!(viscoflow(&["verify", "--in", &out, "--report", &report]), 0);
}

#[test]
fn failed_estimate_exits_two() {
    let tmp = TempDir::new().unwrap();
    // a negative relative tolerance demands the energy bound with 99% to spare
    let cfg = write_cfg(tmp.path(), "run.cfg", &format!("{SMALL}tol_energy = -0.99\n"));
    let out = tmp.path().join("solve").display().to_string();
    assert_eq!(viscoflow(&["solve", "--config", &cfg, "--out", &out]), 2);
    let est = fs::read_to_string(Path::new(&out).join("estimates.csv")).unwrap();
    assert!(est.lines().any(|l| l.contains("energy") && l.ends_with("false")));
    // an absurd entropy tolerance makes verify fail too
    let solved = tmp.path().join("ok").display().to_string();
    let good = write_cfg(tmp.path(), "good.cfg", SMALL);
    assert_eq!(viscoflow(&["solve", "--config", &good, "--out", &solved]), 0);
    let report = tmp.path().join("r.csv").display().to_string();
    assert_eq!(viscoflow(&["verify", "--in", &solved, "--report", &report, "--c-tol=-1"]), 2);
}

#[test]
fn repeated_sweeps_are_bit_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "sweep.cfg",
        "data = step\neps_list = 0.04, 0.02, 0.01\nn_cells = 256\nT = 0.3\n",
    );
    let dirs: Vec<String> = ["a", "b"].iter().map(|d| tmp.path().join(d).display().to_string()).collect();
    let codes: Vec<i32> = dirs.iter().map(|d| viscoflow(&["sweep", "--config", &cfg, "--out", d])).collect();
    assert_eq!(codes[0], codes[1]);
    assert_ne!(codes[0], 1);
    for f in ["sweep_report.csv", "convergence.csv", "slices.csv"] {
        let a = fs::read(Path::new(&dirs[0]).join(f)).unwrap();
        let b = fs::read(Path::new(&dirs[1]).join(f)).unwrap();
        assert!(a == b, "{f} differs");
    }
}
