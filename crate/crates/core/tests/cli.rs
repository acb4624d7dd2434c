use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/default.toml");

fn rhs(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rhs"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

/// The shipped config shrunk to a 4×4 surface and three trials.
fn small_config(dir: &Path) -> String {
    let text = fs::read_to_string(CONFIG)
        .unwrap()
        .replace("experiment.trials = 20", "experiment.trials = 3")
        .replace("experiment.sizes = [4, 8, 12]", "experiment.sizes = [3, 4]")
        .replace("geometry.rows = 8", "geometry.rows = 4")
        .replace("geometry.cols = 8", "geometry.cols = 4");
    let path = dir.join("small.toml");
    fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn pattern_writes_csv_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p");
    let res = rhs(&["pattern", "--config", CONFIG, "--beams", "-3,23", "--quantize", "pin-ideal", "--svg"], &out);
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let csv = fs::read_to_string(out.join("pattern.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("theta_deg,gain_db"));
    for line in csv.lines().skip(1) {
        for field in line.split(',') {
            let decimals = field.split('.').nth(1).unwrap();
            assert_eq!(decimals.len(), 6, "{line}");
        }
    }
    assert!(fs::read_to_string(out.join("pattern.svg")).unwrap().starts_with("<svg"));
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["pattern", "--beams", ""],
        vec!["pattern", "--beams", "10,abc"],
        vec!["pattern", "--beams", "120"],
        vec!["pattern", "--quantize", "half"],
        vec!["sweep", "--seed", "-4"],
    ] {
        let res = rhs(&args, dir.path());
        assert_eq!(res.status.code(), Some(2), "{args:?}");
    }

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "gridcheck.rows = 3\ngridcheck.cols = 3\n").unwrap();
    let res = rhs(&["gridcheck", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let res = rhs(&["pattern", "--config", "/nonexistent/config.toml"], dir.path());
    assert_eq!(res.status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let res = rhs(&["pattern"], &blocker.join("out"));
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn optimize_summary_and_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let res = rhs(&["optimize", "--config", &cfg, "--seed", "11", "--svg"], out);
        assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    }
    for name in ["summary.csv", "convergence.csv", "convergence.svg"] {
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name}");
    }
    let summary = fs::read_to_string(a.join("summary.csv")).unwrap();
    let mut rows = summary.lines();
    assert_eq!(
        rows.next(),
        Some("trial,seed,status,final_rate,baseline_rate,iterations,converged")
    );
    for (t, row) in rows.enumerate() {
        let f: Vec<&str> = row.split(',').collect();
        assert_eq!(f[0], t.to_string());
        assert_eq!(f[1], (11 ^ t as u64).to_string());
        assert_eq!(f[2], "ok");
        let (r, base): (f64, f64) = (f[3].parse().unwrap(), f[4].parse().unwrap());
        assert!(r >= base);
    }

    // Trajectories are nondecreasing per trial.
    let conv = fs::read_to_string(a.join("convergence.csv")).unwrap();
    let mut last: Option<(String, f64)> = None;
    for row in conv.lines().skip(1) {
        let f: Vec<&str> = row.split(',').collect();
        let r: f64 = f[2].parse().unwrap();
        if let Some((t, prev)) = &last {
            if t == f[0] {
                assert!(r >= prev - 1e-6);
            }
        }
        last = Some((f[0].to_string(), r));
    }
}

#[test]
fn different_seed_changes_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert!(rhs(&["optimize", "--config", &cfg, "--seed", "1"], &a).status.success());
    assert!(rhs(&["optimize", "--config", &cfg, "--seed", "2"], &b).status.success());
    assert_ne!(
        fs::read(a.join("summary.csv")).unwrap(),
        fs::read(b.join("summary.csv")).unwrap()
    );
}

#[test]
fn sweep_and_gridcheck_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(dir.path());
    let out = dir.path().join("s");
    let res = rhs(&["sweep", "--config", &cfg, "--svg"], &out);
    assert!(res.status.success());
    let sweep = fs::read_to_string(out.join("sweep.csv")).unwrap();
    let rows: Vec<&str> = sweep.lines().collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("3,") && rows[2].starts_with("4,"));
    assert!(out.join("sweep.svg").exists());

    let res = rhs(&["gridcheck", "--config", &cfg], &out);
    assert!(res.status.success());
    let stdout = String::from_utf8_lossy(&res.stdout);
    assert!(stdout.contains("median ratio"), "{stdout}");
    let csv = fs::read_to_string(out.join("gridcheck.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21);
}
