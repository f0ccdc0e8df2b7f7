//! End-to-end runs of the `capacity-lab` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use capacity_lab::model::binary_entropy;
use tempfile::TempDir;

fn run(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_capacity-lab")).args(args).output().expect("binary runs");
    (out.status.code().expect("exit code"), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path).unwrap().records().map(|r| r.unwrap()).collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn rs_profile_rows_and_exit_status() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "p.toml", "[rs-profile]\nrho = 0.5\nalpha = [0.4, 0.8, 1.0, 1.1]\n");
    let out = dir.path().join("nested/profile.csv");
    let (code, err) = run(&["rs-profile", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(header(&out), "alpha,regime,q1,q0,chi,Sigma,at_margin,status");
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 4);
    let alphas: Vec<f64> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(alphas, vec![0.4, 0.8, 1.0, 1.1]);
    for r in &rows[..2] {
        assert_eq!(&r[1], "subcritical");
        assert_eq!(&r[4], "");
        let sigma: f64 = r[5].parse().unwrap();
        assert!((sigma - binary_entropy(0.5)).abs() < 1e-11);
        assert!(r[6].parse::<f64>().unwrap() < 0.0);
    }
    assert_eq!(&rows[3][1], "supercritical");
    assert!(rows[3][4].parse::<f64>().unwrap() > 0.0);
    assert!(rows[3][5].parse::<f64>().unwrap() < binary_entropy(0.5));
    assert!(rows.iter().all(|r| &r[7] == "ok"));
}

#[test]
fn config_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let empty_grid = write(dir.path(), "a.toml", "[rs-profile]\nrho = 0.5\nalpha = []\n");
    let unknown_key = write(dir.path(), "b.toml", "[rs-profile]\nrho = 0.5\nalpha = 0.3\nbeta = 1\n");
    let guard = write(dir.path(), "c.toml", "[oracle]\nn = 30\nm = 15\np = [5]\ntrials = 2\n");
    let two_rho = write(dir.path(), "d.toml", "[rs-profile]\nrho = [0.3, 0.5]\nalpha = 0.3\n");
    for (cmd, cfg) in [
        ("rs-profile", &empty_grid),
        ("rs-profile", &unknown_key),
        ("rs-profile", &two_rho),
        ("oracle", &guard),
        ("simulate", &guard),
    ] {
        let out = dir.path().join("never.csv");
        let (code, _) = run(&[cmd, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(code, 1, "{cmd} {}", cfg.display());
        assert!(!out.exists());
    }
    assert_eq!(run(&["no-such-command", "--config", guard.to_str().unwrap()]).0, 1);
    assert_eq!(run(&["rs-profile", "--config", "/nonexistent.toml"]).0, 1);
    assert_eq!(run(&["rs-profile"]).0, 1);
}

#[test]
fn failed_rows_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "p.toml", "[solver]\nmax_iter = 1\n[rs-profile]\nrho = 0.5\nalpha = [0.2, 0.6]\n");
    let out = dir.path().join("p.csv");
    let (code, _) = run(&["rs-profile", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code, 2);
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| &r[7] != "ok" && &r[2] == ""));
}

#[test]
fn simulate_is_deterministic_and_seed_sensitive() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "s.toml", "[run]\nseed = 3\n[simulate]\nn = [16]\nalpha = [0.5, 1.0]\ntrials = 6\n");
    let paths: Vec<PathBuf> = ["a.csv", "b.csv", "c.csv"].iter().map(|n| dir.path().join(n)).collect();
    for (p, jobs) in paths.iter().zip(["1", "3", "1"]) {
        let mut args = vec!["simulate", "--config", cfg.to_str().unwrap(), "--out", p.to_str().unwrap(), "--jobs", jobs];
        if p.ends_with("c.csv") {
            args.extend(["--seed", "4"]);
        }
        assert_eq!(run(&args).0, 0);
    }
    let bytes = |p: &PathBuf| fs::read(p).unwrap();
    assert_eq!(bytes(&paths[0]), bytes(&paths[1]));
    assert_ne!(bytes(&paths[0]), bytes(&paths[2]));
    assert_eq!(
        header(&paths[0]),
        "N,P,alpha,ensemble,seed,success,K_final,rho_used,iterations_total,status"
    );
    let rows = read_rows(&paths[0]);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| &r[0] == "16" && &r[3] == "binary"));
    assert_eq!(&rows[0][1], "8");
    assert_eq!(&rows[6][1], "16");

    let agg = dir.path().join("a_aggregate.csv");
    let agg_rows = read_rows(&agg);
    assert_eq!(agg_rows.len(), 2);
    for r in &agg_rows {
        let rate: f64 = r[5].parse().unwrap();
        assert!((0.0..=1.0).contains(&rate));
    }
}

#[test]
fn oracle_rows_respect_inclusion() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "o.toml", "[oracle]\nn = 8\nm = 4\np = [1, 4, 8, 12]\ntrials = 20\n");
    let out = dir.path().join("o.csv");
    assert_eq!(run(&["oracle", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).0, 0);
    assert_eq!(header(&out), "rho,N,M,P,prob_any_subset,prob_fixed_subset");
    let rows = read_rows(&out);
    assert_eq!(&rows[0][4], "1");
    assert_eq!(&rows[0][5], "1");
    for r in &rows {
        assert_eq!(&r[0], "0.5");
        assert!(r[4].parse::<f64>().unwrap() >= r[5].parse::<f64>().unwrap());
    }
}

#[test]
fn at_check_and_capacity_curve_schemas() {
    let dir = TempDir::new().unwrap();
    let cfg = write(
        dir.path(),
        "c.toml",
        "[at-check]\nrho = [0.5]\nalpha = [0.5, 1.2]\n[capacity-curve]\nrho = [0.5]\n",
    );
    let at = dir.path().join("at.csv");
    assert_eq!(run(&["at-check", "--config", cfg.to_str().unwrap(), "--out", at.to_str().unwrap()]).0, 0);
    assert_eq!(header(&at), "rho,alpha,regime,lambda,lambda_hat,at_margin,stable,status");
    assert_eq!(read_rows(&at).len(), 2);

    let cap = dir.path().join("cap.csv");
    assert_eq!(run(&["capacity-curve", "--config", cfg.to_str().unwrap(), "--out", cap.to_str().unwrap()]).0, 0);
    assert_eq!(header(&cap), "rho,alpha_cg,alpha_vs,sigma_residual,status");
    let row = &read_rows(&cap)[0];
    assert_eq!(&row[1], "1");
    assert!(row[2].parse::<f64>().unwrap() > 1.0);
    assert!(row[3].parse::<f64>().unwrap().abs() < 1e-8);
}
