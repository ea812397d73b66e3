//! Strict flat key/value configuration with dotted sections.
//!
//! Lines are `key = value`; `#` starts a comment; blank lines are ignored.
//! Unknown keys are hard errors (a silent typo in an exponent name would
//! corrupt a scaling experiment), and validation reports every problem at
//! once with its line number. Sections that the selected command does not
//! use are ignored with a warning.

use std::fmt;
use std::path::PathBuf;

/// The experiment the run executes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Picard,
    ProbeBilinear,
    ProbeNullform,
    ProbeInteraction,
    IllposedSweep,
    Identities,
}

impl Command {
    pub fn parse(s: &str) -> Option<Command> {
        match s {
            "simulate" => Some(Command::Simulate),
            "picard" => Some(Command::Picard),
            "probe-bilinear" => Some(Command::ProbeBilinear),
            "probe-nullform" => Some(Command::ProbeNullform),
            "probe-interaction" => Some(Command::ProbeInteraction),
            "illposed-sweep" => Some(Command::IllposedSweep),
            "identities" => Some(Command::Identities),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Picard => "picard",
            Command::ProbeBilinear => "probe-bilinear",
            Command::ProbeNullform => "probe-nullform",
            Command::ProbeInteraction => "probe-interaction",
            Command::IllposedSweep => "illposed-sweep",
            Command::Identities => "identities",
        }
    }
}

/// One validation problem, tied to its config line.
#[derive(Debug, Clone)]
pub struct ConfigIssue {
    pub line: usize,
    pub message: String,
}

impl fmt::Display for ConfigIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct GridCfg {
    pub n: Option<usize>,
    pub dom_half_width: Option<f64>,
    pub n_t: Option<usize>,
    pub t0: Option<f64>,
    pub t1: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct EvolutionCfg {
    pub m: Option<f64>,
    pub t_final: Option<f64>,
    pub n_steps: Option<usize>,
    pub n_quad: Option<usize>,
    pub amplitude: Option<f64>,
    pub sobolev: Option<Vec<f64>>,
    pub snapshots: Option<bool>,
    pub snapshot_times: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default)]
pub struct PicardCfg {
    pub n_iter: Option<usize>,
    pub s: Option<f64>,
}

#[derive(Debug, Clone, Default)]
pub struct IllposedCfg {
    pub lambdas: Option<Vec<f64>>,
    pub eps: Option<f64>,
    pub delta: Option<f64>,
    pub s: Option<f64>,
    pub n_quad: Option<usize>,
}

#[derive(Debug, Clone, Default)]
pub struct ProbeCfg {
    pub trials: Option<usize>,
    pub samples: Option<usize>,
}

/// A fully parsed and validated run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub seed: u64,
    pub output_dir: Option<PathBuf>,
    pub grid: GridCfg,
    pub evolution: EvolutionCfg,
    pub picard: PicardCfg,
    pub illposed: IllposedCfg,
    pub probe: ProbeCfg,
    pub warnings: Vec<String>,
    /// Raw text the configuration was parsed from (hashed into the manifest).
    pub raw: String,
}

fn is_dyadic(x: f64) -> bool {
    x > 0.0 && x.log2().fract().abs() < 1e-12
}

struct Parser {
    issues: Vec<ConfigIssue>,
}

impl Parser {
    fn err(&mut self, line: usize, message: impl Into<String>) {
        self.issues.push(ConfigIssue { line, message: message.into() });
    }

    fn parse_f64(&mut self, line: usize, key: &str, v: &str) -> Option<f64> {
        match v.parse::<f64>() {
            Ok(x) if x.is_finite() => Some(x),
            _ => {
                self.err(line, format!("{key}: expected a finite number, got '{v}'"));
                None
            }
        }
    }

    fn parse_usize(&mut self, line: usize, key: &str, v: &str) -> Option<usize> {
        match v.parse::<usize>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(line, format!("{key}: expected a non-negative integer, got '{v}'"));
                None
            }
        }
    }

    fn parse_u64(&mut self, line: usize, key: &str, v: &str) -> Option<u64> {
        match v.parse::<u64>() {
            Ok(x) => Some(x),
            Err(_) => {
                self.err(line, format!("{key}: expected an unsigned integer, got '{v}'"));
                None
            }
        }
    }

    fn parse_bool(&mut self, line: usize, key: &str, v: &str) -> Option<bool> {
        match v {
            "true" => Some(true),
            "false" => Some(false),
            _ => {
                self.err(line, format!("{key}: expected true or false, got '{v}'"));
                None
            }
        }
    }

    fn parse_f64_list(&mut self, line: usize, key: &str, v: &str) -> Option<Vec<f64>> {
        let mut out = Vec::new();
        for tok in v.split(',') {
            match tok.trim().parse::<f64>() {
                Ok(x) if x.is_finite() => out.push(x),
                _ => {
                    self.err(line, format!("{key}: '{}' is not a finite number", tok.trim()));
                    return None;
                }
            }
        }
        if out.is_empty() {
            self.err(line, format!("{key}: empty list"));
            return None;
        }
        Some(out)
    }
}

/// Parse and validate; either a usable config or every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigIssue>> {
    let mut p = Parser { issues: Vec::new() };
    let mut command: Option<(usize, Command)> = None;
    let mut seed: u64 = 0;
    let mut output_dir = None;
    let mut grid = GridCfg::default();
    let mut evolution = EvolutionCfg::default();
    let mut picard = PicardCfg::default();
    let mut illposed = IllposedCfg::default();
    let mut probe = ProbeCfg::default();
    let mut seen: Vec<(String, usize)> = Vec::new();
    let mut touched: Vec<&'static str> = Vec::new();

    for (i, raw_line) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        }
        .trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            p.err(lineno, format!("expected 'key = value', got '{line}'"));
            continue;
        };
        let key = key.trim();
        let value = value.trim();
        if let Some((_, first)) = seen.iter().find(|(k, _)| k == key) {
            p.err(lineno, format!("duplicate key '{key}' (first set on line {first})"));
            continue;
        }
        seen.push((key.to_string(), lineno));

        match key {
            "command" => match Command::parse(value) {
                Some(c) => command = Some((lineno, c)),
                None => p.err(lineno, format!("unknown command '{value}'")),
            },
            "seed" => {
                if let Some(v) = p.parse_u64(lineno, key, value) {
                    seed = v;
                }
            }
            "output_dir" => output_dir = Some(PathBuf::from(value)),
            "grid.n" => grid.n = p.parse_usize(lineno, key, value),
            "grid.dom_half_width" => grid.dom_half_width = p.parse_f64(lineno, key, value),
            "grid.n_t" => grid.n_t = p.parse_usize(lineno, key, value),
            "grid.t0" => grid.t0 = p.parse_f64(lineno, key, value),
            "grid.t1" => grid.t1 = p.parse_f64(lineno, key, value),
            "evolution.m" => evolution.m = p.parse_f64(lineno, key, value),
            "evolution.t_final" => evolution.t_final = p.parse_f64(lineno, key, value),
            "evolution.n_steps" => evolution.n_steps = p.parse_usize(lineno, key, value),
            "evolution.n_quad" => evolution.n_quad = p.parse_usize(lineno, key, value),
            "evolution.amplitude" => evolution.amplitude = p.parse_f64(lineno, key, value),
            "evolution.sobolev" => evolution.sobolev = p.parse_f64_list(lineno, key, value),
            "evolution.snapshots" => evolution.snapshots = p.parse_bool(lineno, key, value),
            "evolution.snapshot_times" => {
                evolution.snapshot_times = p.parse_f64_list(lineno, key, value)
            }
            "picard.n_iter" => picard.n_iter = p.parse_usize(lineno, key, value),
            "picard.s" => picard.s = p.parse_f64(lineno, key, value),
            "illposed.lambdas" => {
                if let Some(ls) = p.parse_f64_list(lineno, key, value) {
                    for l in &ls {
                        if !is_dyadic(*l) {
                            p.err(
                                lineno,
                                format!("illposed.lambdas: {l} is not a dyadic power of two"),
                            );
                        }
                    }
                    illposed.lambdas = Some(ls);
                }
            }
            "illposed.eps" => illposed.eps = p.parse_f64(lineno, key, value),
            "illposed.delta" => illposed.delta = p.parse_f64(lineno, key, value),
            "illposed.s" => illposed.s = p.parse_f64(lineno, key, value),
            "illposed.n_quad" => illposed.n_quad = p.parse_usize(lineno, key, value),
            "probe.trials" => probe.trials = p.parse_usize(lineno, key, value),
            "probe.samples" => probe.samples = p.parse_usize(lineno, key, value),
            other => p.err(lineno, format!("unknown key '{other}'")),
        }
        if let Some(section) = key.split('.').next() {
            if key.contains('.') && !touched.contains(&section_tag(section)) {
                touched.push(section_tag(section));
            }
        }
    }

    let Some((_, command)) = command else {
        p.err(0, "missing required key 'command'");
        return Err(p.issues);
    };

    // Command-specific completeness checks.
    let require = |p: &mut Parser, cond: bool, msg: &str| {
        if !cond {
            p.err(0, msg.to_string());
        }
    };
    match command {
        Command::Simulate | Command::Picard => {
            require(&mut p, grid.n.is_some(), "simulate/picard needs grid.n");
            require(
                &mut p,
                grid.dom_half_width.is_some(),
                "simulate/picard needs grid.dom_half_width",
            );
            require(&mut p, evolution.t_final.is_some(), "needs evolution.t_final");
            require(&mut p, evolution.m.is_some(), "needs evolution.m");
        }
        Command::IllposedSweep => {
            require(&mut p, illposed.lambdas.is_some(), "illposed-sweep needs illposed.lambdas");
            require(&mut p, illposed.eps.is_some(), "illposed-sweep needs illposed.eps");
            require(&mut p, illposed.delta.is_some(), "illposed-sweep needs illposed.delta");
            require(&mut p, illposed.s.is_some(), "illposed-sweep needs illposed.s");
        }
        _ => {}
    }

    // Sections the command ignores produce warnings, not errors.
    let mut warnings = Vec::new();
    let used: &[&str] = match command {
        Command::Simulate => &["grid", "evolution"],
        Command::Picard => &["grid", "evolution", "picard"],
        Command::ProbeBilinear | Command::ProbeNullform => &["grid", "probe"],
        Command::ProbeInteraction => &["probe"],
        Command::IllposedSweep => &["illposed"],
        Command::Identities => &[],
    };
    for t in &touched {
        if !used.contains(t) {
            warnings.push(format!(
                "section '{t}' is not used by command '{}' and was ignored",
                command.name()
            ));
        }
    }

    if !p.issues.is_empty() {
        return Err(p.issues);
    }
    Ok(RunConfig {
        command,
        seed,
        output_dir,
        grid,
        evolution,
        picard,
        illposed,
        probe,
        warnings,
        raw: text.to_string(),
    })
}

fn section_tag(s: &str) -> &'static str {
    match s {
        "grid" => "grid",
        "evolution" => "evolution",
        "picard" => "picard",
        "illposed" => "illposed",
        "probe" => "probe",
        _ => "other",
    }
}

/// FNV-1a hash of the raw configuration text, for the manifest.
pub fn config_hash(text: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}
