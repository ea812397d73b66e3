//! Experiment orchestration: turns a validated [`RunConfig`] into artifacts
//! on disk plus a manifest recording the configuration hash, seed, versions,
//! and wall time. All randomness flows from the single manifest seed, so a
//! repeated run with the same configuration produces byte-identical outputs
//! (the manifest's wall time aside).

use crate::config::{config_hash, Command, RunConfig};
use csd_core::dirac::{
    alpha, projection_product_norm, projection_product_norm_formula, projection_symbol,
    riesz_symbol, Mat2, Sign, BETA,
};
use csd_core::error::CsdError;
use csd_core::estimates::{
    bilinear_constant_probe, bilinear_panel, interaction_probe, nullform_constant_probe,
    nullform_panel, probe_grid, ProbeOutcome, INTERACTION_FLOOR, PROBE_SLACK,
};
use csd_core::evolution::{evolve, linear_flow, picard_sequence, EvolutionConfig};
use csd_core::field::{Rep, ScalarField};
use csd_core::grid::GridSpec;
use csd_core::illposed::lambda_sweep;
use csd_core::io::{
    probe_csv_header, probe_csv_row, sweep_csv, trajectory_csv, write_csdf1_spinor,
};
use csd_core::multipliers::{littlewood_paley, partial_deriv, shells_of_grid};
use csd_core::nonlinearity::{cs_gauss_residual, dirac_current, gauge_potential};
use csd_core::num_complex::Complex64 as C64;
use csd_core::sampling::{rng_for, smooth_random_scalar, smooth_random_spinor};
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

/// Outcome of a successful run.
#[derive(Debug)]
pub struct RunSummary {
    pub files: Vec<PathBuf>,
    pub wall_time: f64,
}

/// Error with a machine-readable category driving the exit code.
#[derive(Debug)]
pub enum RunError {
    Config(String),
    Io(String),
    Numerical(String),
}

impl RunError {
    pub fn category(&self) -> &'static str {
        match self {
            RunError::Config(_) => "config",
            RunError::Io(_) => "io",
            RunError::Numerical(_) => "numerical",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Io(_) => 3,
            RunError::Numerical(_) => 4,
        }
    }
}

impl std::fmt::Display for RunError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let msg = match self {
            RunError::Config(m) | RunError::Io(m) | RunError::Numerical(m) => m,
        };
        write!(f, "error[{}]: {}", self.category(), msg)
    }
}

impl From<CsdError> for RunError {
    fn from(e: CsdError) -> Self {
        match e {
            CsdError::Config(_) | CsdError::Domain(_) => RunError::Config(e.to_string()),
            CsdError::Io(_) | CsdError::Format(_) => RunError::Io(e.to_string()),
            _ => RunError::Numerical(e.to_string()),
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

struct Artifacts<'a> {
    dir: &'a Path,
    files: Vec<PathBuf>,
    notes: Vec<String>,
}

impl Artifacts<'_> {
    fn write(&mut self, name: &str, bytes: &[u8]) -> Result<(), RunError> {
        let path = self.dir.join(name);
        fs::write(&path, bytes)?;
        self.files.push(PathBuf::from(name));
        Ok(())
    }

    fn note(&mut self, msg: impl Into<String>) {
        self.notes.push(msg.into());
    }
}

/// Execute a validated configuration, writing artifacts into `out_dir`.
pub fn run(cfg: &RunConfig, out_dir: &Path, threads: usize) -> Result<RunSummary, RunError> {
    let start = Instant::now();
    fs::create_dir_all(out_dir)?;
    let mut art = Artifacts { dir: out_dir, files: Vec::new(), notes: Vec::new() };
    for w in &cfg.warnings {
        art.note(format!("warning: {w}"));
    }

    match cfg.command {
        Command::Simulate => run_simulate(cfg, &mut art)?,
        Command::Picard => run_picard(cfg, &mut art)?,
        Command::ProbeBilinear => run_probe_bilinear(cfg, &mut art)?,
        Command::ProbeNullform => run_probe_nullform(cfg, &mut art)?,
        Command::ProbeInteraction => run_probe_interaction(cfg, &mut art)?,
        Command::IllposedSweep => run_sweep(cfg, &mut art)?,
        Command::Identities => run_identities(cfg, &mut art)?,
    }

    let wall_time = start.elapsed().as_secs_f64();
    let mut manifest = String::new();
    let _ = writeln!(manifest, "csd-lab manifest");
    let _ = writeln!(manifest, "version = {}", env!("CARGO_PKG_VERSION"));
    let _ = writeln!(manifest, "command = {}", cfg.command.name());
    let _ = writeln!(manifest, "config_hash = {:016x}", config_hash(&cfg.raw));
    let _ = writeln!(manifest, "seed = {}", cfg.seed);
    let _ = writeln!(manifest, "threads = {threads}");
    for f in &art.files {
        let _ = writeln!(manifest, "file = {}", f.display());
    }
    for n in &art.notes {
        let _ = writeln!(manifest, "note = {n}");
    }
    let _ = writeln!(manifest, "wall_time_s = {wall_time:.6}");
    fs::write(out_dir.join("manifest"), manifest)?;
    let mut files = art.files;
    files.push(PathBuf::from("manifest"));
    Ok(RunSummary { files, wall_time })
}

fn spatial_grid(cfg: &RunConfig) -> Result<GridSpec, RunError> {
    let n = cfg.grid.n.ok_or_else(|| RunError::Config("grid.n is required".into()))?;
    let l = cfg
        .grid
        .dom_half_width
        .ok_or_else(|| RunError::Config("grid.dom_half_width is required".into()))?;
    Ok(GridSpec::new(n, l)?)
}

fn evolution_config(cfg: &RunConfig) -> Result<EvolutionConfig, RunError> {
    let e = &cfg.evolution;
    Ok(EvolutionConfig {
        m: e.m.ok_or_else(|| RunError::Config("evolution.m is required".into()))?,
        t_final: e
            .t_final
            .ok_or_else(|| RunError::Config("evolution.t_final is required".into()))?,
        n_steps: e.n_steps.unwrap_or(64),
        n_quad: e.n_quad.unwrap_or(3),
        amplitude: e.amplitude.unwrap_or(1e-3),
        sobolev_indices: e.sobolev.clone().unwrap_or_else(|| vec![0.0, 1.0]),
        nonlinear: true,
        snapshot_times: Vec::new(),
    })
}

fn run_simulate(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let grid = spatial_grid(cfg)?;
    let mut ecfg = evolution_config(cfg)?;
    // Explicit snapshot times win; `snapshots = true` is shorthand for the
    // window endpoints.
    if let Some(times) = &cfg.evolution.snapshot_times {
        ecfg.snapshot_times = times.clone();
    } else if cfg.evolution.snapshots.unwrap_or(false) {
        ecfg.snapshot_times = vec![0.0, ecfg.t_final];
    }
    let snapshots = !ecfg.snapshot_times.is_empty();
    let psi0 = smooth_random_spinor(grid, cfg.seed, ecfg.amplitude);
    let rec = evolve(&psi0, &ecfg)?;
    for w in &rec.warnings {
        art.note(format!("solver: {w}"));
    }
    art.write("trajectory.csv", trajectory_csv(&rec).as_bytes())?;
    if snapshots {
        for (t, snap) in &rec.snapshots {
            let mut buf = Vec::new();
            write_csdf1_spinor(&mut buf, snap)?;
            let name = format!("field_t{t:.6}.csdf1");
            art.write(&name, &buf)?;
        }
    }
    Ok(())
}

fn run_picard(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let grid = spatial_grid(cfg)?;
    let ecfg = evolution_config(cfg)?;
    let n_iter = cfg.picard.n_iter.unwrap_or(6);
    let s = cfg.picard.s.unwrap_or(0.25);
    let psi0 = smooth_random_spinor(grid, cfg.seed, ecfg.amplitude);
    let rec = picard_sequence(&psi0, &ecfg, n_iter, s)?;
    if rec.diverged {
        art.note("picard: difference norms grew three times in a row (reported, not fatal)");
    }
    let mut csv = String::from("n,p,q\n");
    for (n, p) in rec.p.iter().enumerate() {
        if n == 0 {
            let _ = writeln!(csv, "0,{p},");
        } else {
            let _ = writeln!(csv, "{n},{p},{}", rec.q[n - 1]);
        }
    }
    art.write("picard.csv", csv.as_bytes())?;
    Ok(())
}

fn probe_grid_from(cfg: &RunConfig) -> Result<GridSpec, RunError> {
    match (cfg.grid.n, cfg.grid.dom_half_width, cfg.grid.n_t) {
        (Some(n), Some(l), Some(nt)) => Ok(GridSpec::with_time(
            n,
            l,
            nt,
            cfg.grid.t0.unwrap_or(0.0),
            cfg.grid.t1.unwrap_or(2.0 * std::f64::consts::PI),
        )?),
        (None, None, None) => Ok(probe_grid()),
        _ => Err(RunError::Config(
            "probes need either no grid section or a full one (n, dom_half_width, n_t)".into(),
        )),
    }
}

fn run_probe_bilinear(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let grid = probe_grid_from(cfg)?;
    let trials = cfg.probe.trials.unwrap_or(64);
    let mut csv = String::from(probe_csv_header());
    let mut worst: f64 = 0.0;
    for (i, panel_cfg) in bilinear_panel().iter().enumerate() {
        match bilinear_constant_probe(&grid, panel_cfg, trials, cfg.seed.wrapping_add(i as u64))? {
            ProbeOutcome::Ran(rep) => {
                worst = worst.max(rep.slack);
                csv.push_str(&probe_csv_row(&rep));
            }
            ProbeOutcome::Skipped { probe, reason } => {
                art.note(format!("skipped {probe}: {reason}"));
            }
        }
    }
    art.write("probes_bilinear.csv", csv.as_bytes())?;
    art.note(format!("worst slack = {worst:.3} (limit {PROBE_SLACK})"));
    if worst > PROBE_SLACK {
        return Err(RunError::Numerical(format!(
            "bilinear probe slack {worst:.3} exceeds {PROBE_SLACK}"
        )));
    }
    Ok(())
}

fn run_probe_nullform(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let grid = probe_grid_from(cfg)?;
    let trials = cfg.probe.trials.unwrap_or(16);
    let mut csv = String::from(probe_csv_header());
    let mut worst: f64 = 0.0;
    for (i, panel_cfg) in nullform_panel().iter().enumerate() {
        match nullform_constant_probe(&grid, panel_cfg, trials, cfg.seed.wrapping_add(i as u64))? {
            ProbeOutcome::Ran(rep) => {
                worst = worst.max(rep.slack);
                csv.push_str(&probe_csv_row(&rep));
            }
            ProbeOutcome::Skipped { probe, reason } => {
                art.note(format!("skipped {probe}: {reason}"));
            }
        }
    }
    art.write("probes_nullform.csv", csv.as_bytes())?;
    art.note(format!("worst slack = {worst:.3} (limit {PROBE_SLACK})"));
    if worst > PROBE_SLACK {
        return Err(RunError::Numerical(format!(
            "null-form probe slack {worst:.3} exceeds {PROBE_SLACK}"
        )));
    }
    Ok(())
}

fn run_probe_interaction(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let samples = cfg.probe.samples.unwrap_or(100_000);
    let rep = interaction_probe(samples, cfg.seed)?;
    let mut csv = String::from(probe_csv_header());
    csv.push_str(&probe_csv_row(&rep));
    art.write("probes_interaction.csv", csv.as_bytes())?;
    if rep.min_ratio < INTERACTION_FLOOR {
        return Err(RunError::Numerical(format!(
            "interaction ratio {} fell below the floor {INTERACTION_FLOOR}",
            rep.min_ratio
        )));
    }
    Ok(())
}

fn run_sweep(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let il = &cfg.illposed;
    let sweep = lambda_sweep(
        il.lambdas.as_ref().ok_or_else(|| RunError::Config("illposed.lambdas required".into()))?,
        il.eps.ok_or_else(|| RunError::Config("illposed.eps required".into()))?,
        il.delta.ok_or_else(|| RunError::Config("illposed.delta required".into()))?,
        il.s.ok_or_else(|| RunError::Config("illposed.s required".into()))?,
        il.n_quad.unwrap_or(5),
    )?;
    art.write("sweep.csv", sweep_csv(&sweep).as_bytes())?;
    art.note(format!(
        "slope = {:.4}, expected = {:.4}, residual = {:.4}",
        sweep.slope, sweep.expected_slope, sweep.residual
    ));
    Ok(())
}

struct IdentityCheck {
    name: &'static str,
    deviation: f64,
    tolerance: f64,
}

impl IdentityCheck {
    fn passed(&self) -> bool {
        self.deviation <= self.tolerance
    }
}

fn random_freq(rng: &mut ChaCha12Rng) -> [f64; 2] {
    loop {
        let xi = [rng.random::<f64>() * 16.0 - 8.0, rng.random::<f64>() * 16.0 - 8.0];
        if xi[0] * xi[0] + xi[1] * xi[1] > 1e-4 {
            return xi;
        }
    }
}

/// The full algebraic invariant suite, written as a pass/fail table.
fn run_identities(cfg: &RunConfig, art: &mut Artifacts) -> Result<(), RunError> {
    let mut rng = rng_for(cfg.seed, 0);
    let mut checks: Vec<IdentityCheck> = Vec::new();

    // Matrix algebra: anticommutation and Hermiticity, exact.
    let mut dev: f64 = 0.0;
    for j in 1..=2 {
        let a = alpha(j);
        dev = dev.max(BETA.mul(&a).add(&a.mul(&BETA)).max_abs());
        for k in 1..=2 {
            let b = alpha(k);
            let anti = a.mul(&b).add(&b.mul(&a)).scale(C64::new(0.5, 0.0));
            let expect = if j == k { Mat2::identity() } else { Mat2::zero() };
            dev = dev.max(anti.sub(&expect).max_abs());
        }
        dev = dev.max(a.sub(&a.adjoint()).max_abs());
    }
    checks.push(IdentityCheck { name: "matrix anticommutation", deviation: dev, tolerance: 1e-12 });

    // Projection algebra, commutator, and Riesz identities at random
    // frequencies.
    let mut dev_proj: f64 = 0.0;
    let mut dev_comm: f64 = 0.0;
    let mut dev_riesz: f64 = 0.0;
    for _ in 0..1000 {
        let xi = random_freq(&mut rng);
        let r = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
        for s in Sign::BOTH {
            let p = projection_symbol(s, xi)?;
            let q = projection_symbol(s.flip(), xi)?;
            dev_proj = dev_proj.max(p.mul(&p).sub(&p).max_abs());
            dev_proj = dev_proj.max(p.add(&q).sub(&Mat2::identity()).max_abs());
            dev_proj = dev_proj.max(p.mul(&q).max_abs());
            for i in 1..=2 {
                let lhs = alpha(i).mul(&p);
                let rhs = q
                    .mul(&alpha(i))
                    .add(&Mat2::identity().scale(C64::new(s.val() * xi[i - 1] / r, 0.0)));
                dev_comm = dev_comm.max(lhs.sub(&rhs).max_abs());
            }
            for mu in 0..=2 {
                let lhs = alpha(mu).mul(&p);
                let rz = riesz_symbol(s, mu, xi)?;
                let rhs = q.mul(&alpha(mu)).mul(&p).sub(&p.scale(C64::new(rz, 0.0)));
                dev_riesz = dev_riesz.max(lhs.sub(&rhs).max_abs());
            }
        }
    }
    checks.push(IdentityCheck { name: "projection algebra", deviation: dev_proj, tolerance: 1e-12 });
    checks.push(IdentityCheck { name: "commutator identity", deviation: dev_comm, tolerance: 1e-12 });
    checks.push(IdentityCheck {
        name: "riesz projection identity",
        deviation: dev_riesz,
        tolerance: 1e-12,
    });

    // Null-form norm identity.
    let mut dev: f64 = 0.0;
    for _ in 0..2000 {
        let xi1 = random_freq(&mut rng);
        let xi2 = random_freq(&mut rng);
        let s1 = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
        let s2 = if rng.random::<bool>() { Sign::Plus } else { Sign::Minus };
        let a = projection_product_norm(s1, xi1, s2, xi2)?;
        let b = projection_product_norm_formula(s1, xi1, s2, xi2)?;
        dev = dev.max((a - b).abs());
    }
    checks.push(IdentityCheck {
        name: "null-form norm identity",
        deviation: dev,
        tolerance: 1e-12,
    });

    // Transform unitarity and shell partition on a small grid.
    let grid = GridSpec::new(32, 1.0)?;
    let mut dev_pars: f64 = 0.0;
    let mut dev_lp: f64 = 0.0;
    for trial in 0..50 {
        let f = smooth_random_scalar(grid, cfg.seed ^ (trial + 1), 1.0);
        let pos = f.from_fourier()?;
        dev_pars = dev_pars.max((pos.l2_norm() - f.l2_norm()).abs() / f.l2_norm());
        let mut sum = ScalarField::zeros(grid, Rep::Frequency);
        for shell in shells_of_grid(&grid) {
            sum.add_assign(&littlewood_paley(&f, shell)?)?;
        }
        dev_lp = dev_lp.max(sum.sub(&f)?.l2_norm() / f.l2_norm());
    }
    checks.push(IdentityCheck { name: "parseval", deviation: dev_pars, tolerance: 1e-12 });
    checks.push(IdentityCheck { name: "dyadic shell partition", deviation: dev_lp, tolerance: 1e-12 });

    // Gauge structure on random smooth spinors.
    let mut dev_div: f64 = 0.0;
    let mut dev_gauss: f64 = 0.0;
    for trial in 0..10 {
        let psi = smooth_random_spinor(grid, cfg.seed ^ (100 + trial), 1.0);
        let a = gauge_potential(&psi)?;
        let div = partial_deriv(&a.a1.ensure_frequency()?, 0)?
            .add(&partial_deriv(&a.a2.ensure_frequency()?, 1)?)?;
        dev_div = dev_div.max(div.l2_norm());
        let j0 = dirac_current(&psi, &psi, 0)?;
        dev_gauss = dev_gauss.max(cs_gauss_residual(&psi, &a)? / j0.l2_norm());
    }
    checks.push(IdentityCheck { name: "coulomb gauge div A", deviation: dev_div, tolerance: 1e-10 });
    checks.push(IdentityCheck {
        name: "gauss constraint residual",
        deviation: dev_gauss,
        tolerance: 1e-8,
    });

    // Linear charge conservation.
    let psi = smooth_random_spinor(grid, cfg.seed ^ 999, 1.0);
    let q0 = psi.charge();
    let moved = linear_flow(&psi, 1.0, 1.0)?;
    checks.push(IdentityCheck {
        name: "linear charge conservation",
        deviation: (moved.charge() - q0).abs() / q0,
        tolerance: 1e-12,
    });

    let mut table = String::new();
    let mut all_ok = true;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        all_ok &= c.passed();
        let _ = writeln!(
            table,
            "{status}  {:<32} deviation {:>12.3e}  tolerance {:>8.1e}",
            c.name, c.deviation, c.tolerance
        );
    }
    print!("{table}");
    art.write("identities.txt", table.as_bytes())?;
    if !all_ok {
        return Err(RunError::Numerical("one or more identities failed".into()));
    }
    Ok(())
}
