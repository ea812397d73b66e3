//! End-to-end tests of the batch driver: configuration handling, artifact
//! layout, the determinism contract, and the manifest's no-orphan rule.

use csd_cli::{parse_config, run, Command, RunError};
use std::fs;
use std::path::{Path, PathBuf};

fn scratch_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("csd-cli-test-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    dir
}

fn manifest_files(dir: &Path) -> Vec<String> {
    let text = fs::read_to_string(dir.join("manifest")).unwrap();
    text.lines()
        .filter_map(|l| l.strip_prefix("file = "))
        .map(|s| s.to_string())
        .collect()
}

#[test]
fn simulate_writes_trajectory_and_snapshots() {
    let cfg = parse_config(
        "command = simulate\n\
         seed = 3\n\
         grid.n = 32\n\
         grid.dom_half_width = 1.0\n\
         evolution.m = 1.0\n\
         evolution.t_final = 0.25\n\
         evolution.n_steps = 4\n\
         evolution.amplitude = 0.01\n\
         evolution.sobolev = 0.0,0.5\n\
         evolution.snapshots = true\n",
    )
    .unwrap();
    let dir = scratch_dir("simulate");
    run(&cfg, &dir, 1).unwrap();

    let traj = fs::read_to_string(dir.join("trajectory.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next().unwrap(), "t,Q,Hs(0),Hs(0.5)");
    assert_eq!(lines.count(), 5); // 4 steps + initial state

    // Snapshots parse back through the binary field format.
    let listed = manifest_files(&dir);
    let snapshots: Vec<&String> = listed.iter().filter(|f| f.ends_with(".csdf1")).collect();
    assert_eq!(snapshots.len(), 2);
    for snap in snapshots {
        let bytes = fs::read(dir.join(snap)).unwrap();
        match csd_core::io::read_csdf1(&mut bytes.as_slice()).unwrap() {
            csd_core::io::Csdf1::Spinor(psi) => assert_eq!(psi.grid().n, 32),
            _ => panic!("snapshot should hold a spinor"),
        }
    }

    // Every file on disk is referenced by the manifest; nothing is orphaned.
    let mut on_disk: Vec<String> = fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    on_disk.retain(|f| f != "manifest");
    let mut referenced = listed.clone();
    on_disk.sort();
    referenced.sort();
    assert_eq!(on_disk, referenced);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identical_seeds_reproduce_byte_identical_outputs() {
    let text = "command = probe-interaction\nseed = 11\nprobe.samples = 20000\n";
    let cfg = parse_config(text).unwrap();
    let d1 = scratch_dir("det1");
    let d2 = scratch_dir("det2");
    run(&cfg, &d1, 1).unwrap();
    run(&cfg, &d2, 2).unwrap(); // thread count must not matter
    let a = fs::read(d1.join("probes_interaction.csv")).unwrap();
    let b = fs::read(d2.join("probes_interaction.csv")).unwrap();
    assert_eq!(a, b);

    let mut other = parse_config(text).unwrap();
    other.seed = 12;
    let d3 = scratch_dir("det3");
    run(&other, &d3, 1).unwrap();
    let c = fs::read(d3.join("probes_interaction.csv")).unwrap();
    assert_ne!(a, c);
    for d in [d1, d2, d3] {
        fs::remove_dir_all(&d).unwrap();
    }
}

#[test]
fn snapshot_times_key_selects_dump_instants() {
    let cfg = parse_config(
        "command = simulate\n\
         grid.n = 16\n\
         grid.dom_half_width = 1.0\n\
         evolution.m = 0.0\n\
         evolution.t_final = 0.2\n\
         evolution.n_steps = 4\n\
         evolution.amplitude = 0.01\n\
         evolution.snapshot_times = 0.1\n",
    )
    .unwrap();
    let dir = scratch_dir("snaptimes");
    run(&cfg, &dir, 1).unwrap();
    let files = manifest_files(&dir);
    let snaps: Vec<&String> = files.iter().filter(|f| f.ends_with(".csdf1")).collect();
    assert_eq!(snaps.len(), 1);
    assert!(snaps[0].contains("0.1"), "snapshot named {:?}", snaps[0]);
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn picard_reports_iterates() {
    let cfg = parse_config(
        "command = picard\n\
         grid.n = 32\n\
         grid.dom_half_width = 1.0\n\
         evolution.m = 1.0\n\
         evolution.t_final = 0.25\n\
         evolution.n_steps = 4\n\
         evolution.amplitude = 0.001\n\
         picard.n_iter = 3\n",
    )
    .unwrap();
    let dir = scratch_dir("picard");
    run(&cfg, &dir, 1).unwrap();
    let csv = fs::read_to_string(dir.join("picard.csv")).unwrap();
    assert!(csv.starts_with("n,p,q\n"));
    assert_eq!(csv.lines().count(), 5); // header + iterates 0..=3
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn identities_command_emits_table() {
    let cfg = parse_config("command = identities\nseed = 5\n").unwrap();
    let dir = scratch_dir("identities");
    run(&cfg, &dir, 1).unwrap();
    let table = fs::read_to_string(dir.join("identities.txt")).unwrap();
    assert!(table.lines().count() >= 8);
    assert!(table.lines().all(|l| l.starts_with("PASS")));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn probe_command_writes_csv_rows() {
    let cfg = parse_config("command = probe-nullform\nseed = 9\nprobe.trials = 2\n").unwrap();
    let dir = scratch_dir("nullform");
    run(&cfg, &dir, 1).unwrap();
    let csv = fs::read_to_string(dir.join("probes_nullform.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "probe,params,n,min_ratio,max_ratio,bound,slack,seed");
    assert_eq!(csv.lines().count(), 11); // header + ten configurations
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn bilinear_probe_panel_rows() {
    let cfg = parse_config("command = probe-bilinear\nseed = 4\nprobe.trials = 2\n").unwrap();
    let dir = scratch_dir("bilinear");
    run(&cfg, &dir, 1).unwrap();
    let csv = fs::read_to_string(dir.join("probes_bilinear.csv")).unwrap();
    assert_eq!(csv.lines().count(), 21); // header + twenty configurations
    // Slack column stays under the certification limit on every row.
    for row in csv.lines().skip(1) {
        let slack: f64 = row.split(',').nth(6).unwrap().parse().unwrap();
        assert!(slack <= 10.0);
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn binary_reports_exit_categories() {
    let exe = env!("CARGO_BIN_EXE_csd-lab");
    let dir = scratch_dir("bin");
    fs::create_dir_all(&dir).unwrap();

    // Missing config file: io category, exit 3.
    let out = std::process::Command::new(exe)
        .args(["--config", "/nonexistent.cfg", "--output"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    // Bad key: config category, exit 2, message names the key and line.
    let bad = dir.join("bad.cfg");
    fs::write(&bad, "command = identities\nbogus.key = 1\n").unwrap();
    let out = std::process::Command::new(exe)
        .args(["--config"])
        .arg(&bad)
        .args(["--output"])
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("line 2") && stderr.contains("bogus.key"));

    // Good run: exit 0, manifest written, seed flag overrides the file.
    let good = dir.join("good.cfg");
    fs::write(&good, "command = identities\nseed = 1\n").unwrap();
    let out_dir = dir.join("out");
    let out = std::process::Command::new(exe)
        .args(["--config"])
        .arg(&good)
        .args(["--output"])
        .arg(&out_dir)
        .args(["--seed", "99", "--threads", "1"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let manifest = fs::read_to_string(out_dir.join("manifest")).unwrap();
    assert!(manifest.contains("seed = 99"));
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn config_errors_carry_categories() {
    // Unknown command.
    assert!(parse_config("command = explode\n").is_err());
    // Dyadic validation is named.
    let issues = parse_config(
        "command = illposed-sweep\n\
         illposed.lambdas = 16,20\n\
         illposed.eps = 0.1\n\
         illposed.delta = 0.05\n\
         illposed.s = -0.5\n",
    )
    .unwrap_err();
    assert!(issues.iter().any(|i| i.message.contains("illposed.lambdas")));

    // Runtime config errors map to exit code 2, numerical ones to 4.
    assert_eq!(RunError::Config("x".into()).exit_code(), 2);
    assert_eq!(RunError::Io("x".into()).exit_code(), 3);
    assert_eq!(RunError::Numerical("x".into()).exit_code(), 4);

    // A sweep with too few lambdas surfaces as a config-category failure.
    let cfg = parse_config(
        "command = illposed-sweep\n\
         illposed.lambdas = 16,32\n\
         illposed.eps = 0.25\n\
         illposed.delta = 0.05\n\
         illposed.s = -0.5\n",
    )
    .unwrap();
    let dir = scratch_dir("sweep-short");
    let err = run(&cfg, &dir, 1).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    let _ = fs::remove_dir_all(&dir);
}

#[test]
fn sweep_end_to_end_csv_with_fit_footer() {
    let cfg = parse_config(
        "command = illposed-sweep\n\
         illposed.lambdas = 16,32,64,128\n\
         illposed.eps = 0.25\n\
         illposed.delta = 0.05\n\
         illposed.s = -0.5\n\
         illposed.n_quad = 3\n",
    )
    .unwrap();
    let dir = scratch_dir("sweep");
    run(&cfg, &dir, 1).unwrap();
    let csv = fs::read_to_string(dir.join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "lambda,mu,t,phi_hs,L_hs,ratio,c1");
    assert_eq!(lines.len(), 6); // header, four runs, fit footer
    assert!(lines[5].starts_with("fit,"));
    // Per-lambda rows carry positive ratios and constants.
    for row in &lines[1..5] {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7);
        assert!(cols[5].parse::<f64>().unwrap() > 0.0);
        assert!(cols[6].parse::<f64>().unwrap() > 0.0);
    }
    fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn ignored_sections_warn() {
    let cfg = parse_config(
        "command = identities\n\
         evolution.m = 1.0\n\
         illposed.eps = 0.1\n",
    )
    .unwrap();
    assert_eq!(cfg.command, Command::Identities);
    assert_eq!(cfg.warnings.len(), 2);
    let dir = scratch_dir("warn");
    run(&cfg, &dir, 1).unwrap();
    let manifest = fs::read_to_string(dir.join("manifest")).unwrap();
    assert_eq!(manifest.lines().filter(|l| l.contains("note = warning:")).count(), 2);
    fs::remove_dir_all(&dir).unwrap();
}
