//! Command-line frontend: plain-text config parsing, the run manifest, and
//! CSV emission for runs and sweeps.
//!
//! Config schema: one `key = value` per line, `#` starts a comment, unknown
//! keys are errors. Every key is optional and falls back to its default, so
//! an empty file is the default run. The run manifest is written in the same
//! schema (metadata lives in comment lines), so a manifest can be fed back
//! in as a config to reproduce its run exactly.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::engine::{
    collect_rejection_stats, run_simulation, RejectionStats, RoundMetrics, SimConfig,
    ValidationError,
};
use crate::experiments::{
    phase_summary, run_sweep, Phase, SweepError, SweepResult, SweepSpec, SweptParameter,
};
use crate::quality::QualityDistribution;
use crate::Real;

pub const ISSUES_FILE: &str = "issues.csv";
pub const REJECTIONS_FILE: &str = "rejections.csv";
pub const MANIFEST_FILE: &str = "manifest";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SWEEP_SUMMARY_FILE: &str = "sweep_summary.csv";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { key: String, line: usize },
    #[error("line {line}: key `{key}`: {reason}")]
    BadValue { key: String, line: usize, reason: String },
    #[error("line {line}: expected `key = value`")]
    Malformed { line: usize },
    #[error(transparent)]
    Validation(#[from] ValidationError),
    #[error(transparent)]
    Sweep(#[from] SweepError),
    #[error("{0}")]
    BadFlag(String),
}

impl CliError {
    /// 1 for validation failures, 2 for runtime (I/O) failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } => 2,
            _ => 1,
        }
    }
}

/// Flag-level overrides applied on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct ConfigOverrides {
    pub seed: Option<u64>,
}

fn parse_key(config: &mut SimConfig, key: &str, value: &str, line: usize) -> Result<(), CliError> {
    fn num<T: std::str::FromStr>(key: &str, value: &str, line: usize) -> Result<T, CliError>
    where
        T::Err: std::fmt::Display,
    {
        value.parse::<T>().map_err(|e| CliError::BadValue {
            key: key.to_string(),
            line,
            reason: format!("cannot parse `{value}`: {e}"),
        })
    }
    match key {
        "journals" => config.journals = num(key, value, line)?,
        "new_per_round" => config.new_per_round = num(key, value, line)?,
        "capacity" => config.capacity = num(key, value, line)?,
        "referees" => config.referees = num(key, value, line)?,
        "alpha" => config.alpha = num(key, value, line)?,
        "lambda" => config.lambda = num(key, value, line)?,
        "beta" => config.beta = num(key, value, line)?,
        "gamma" => config.gamma_exp = num(key, value, line)?,
        "mean_quality" => config.mean_quality = num(key, value, line)?,
        "high_quality_count" => config.high_quality_count = num(key, value, line)?,
        "bootstrap_theta1" => config.bootstrap_theta1 = num(key, value, line)?,
        "max_rejections" => {
            config.max_rejections = if value == "unlimited" {
                None
            } else {
                Some(num(key, value, line)?)
            }
        }
        "rounds" => config.rounds = num(key, value, line)?,
        "seed" => config.seed = num(key, value, line)?,
        "q_floor" => config.q_floor = num(key, value, line)?,
        _ => return Err(CliError::UnknownKey { key: key.to_string(), line }),
    }
    Ok(())
}

/// Parse config text; defaults fill missing keys, flags override file values,
/// and the full invariant set (including calibration feasibility) is checked.
pub fn parse_config_str(text: &str, overrides: &ConfigOverrides) -> Result<SimConfig, CliError> {
    let mut config = SimConfig::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::Malformed { line: line_no });
        };
        parse_key(&mut config, key.trim(), value.trim(), line_no)?;
    }
    if let Some(seed) = overrides.seed {
        config.seed = seed;
    }
    config.validate()?;
    Ok(config)
}

pub fn parse_config(path: &Path, overrides: &ConfigOverrides) -> Result<SimConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    parse_config_str(&text, overrides)
}

/// Everything needed to reproduce a run, plus the calibration it resolved to.
#[derive(Debug, Clone, PartialEq)]
pub struct RunManifest {
    pub config: SimConfig,
    pub shape: Real,
    pub scale: Real,
    pub achieved_tail_mass: Real,
    pub version: String,
}

impl RunManifest {
    pub fn new(config: SimConfig, dist: &QualityDistribution<Real>) -> Self {
        let tail = dist.tail_mass(config.bootstrap_theta1);
        Self {
            config,
            shape: dist.shape(),
            scale: dist.scale(),
            achieved_tail_mass: tail,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    /// Key-value rendering, parseable by [`parse_config_str`]. Calibration
    /// results and the artifact version ride along as comments. No wall-clock
    /// field: reruns of the same seed must produce byte-identical manifests.
    pub fn render(&self) -> String {
        let c = &self.config;
        let mut out = String::new();
        let _ = writeln!(out, "# prsim run manifest (version {})", self.version);
        let _ = writeln!(out, "# calibrated shape = {}", self.shape);
        let _ = writeln!(out, "# calibrated scale = {}", self.scale);
        let _ = writeln!(out, "# achieved tail mass = {:.6}", self.achieved_tail_mass);
        let _ = writeln!(out, "journals = {}", c.journals);
        let _ = writeln!(out, "new_per_round = {}", c.new_per_round);
        let _ = writeln!(out, "capacity = {}", c.capacity);
        let _ = writeln!(out, "referees = {}", c.referees);
        let _ = writeln!(out, "alpha = {}", c.alpha);
        let _ = writeln!(out, "lambda = {}", c.lambda);
        let _ = writeln!(out, "beta = {}", c.beta);
        let _ = writeln!(out, "gamma = {}", c.gamma_exp);
        let _ = writeln!(out, "mean_quality = {}", c.mean_quality);
        let _ = writeln!(out, "high_quality_count = {}", c.high_quality_count);
        let _ = writeln!(out, "bootstrap_theta1 = {}", c.bootstrap_theta1);
        match c.max_rejections {
            Some(m) => {
                let _ = writeln!(out, "max_rejections = {m}");
            }
            None => {
                let _ = writeln!(out, "max_rejections = unlimited");
            }
        }
        let _ = writeln!(out, "rounds = {}", c.rounds);
        let _ = writeln!(out, "seed = {}", c.seed);
        let _ = writeln!(out, "q_floor = {}", c.q_floor);
        out
    }
}

/// Write via a temp file and rename, so a failure never leaves a partial file.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    let final_path = dir.join(name);
    let tmp_path = dir.join(format!("{name}.tmp"));
    let io_err = |path: &Path, source: std::io::Error| CliError::Io {
        path: path.to_path_buf(),
        source,
    };
    fs::write(&tmp_path, contents).map_err(|e| io_err(&tmp_path, e))?;
    fs::rename(&tmp_path, &final_path).map_err(|e| {
        let _ = fs::remove_file(&tmp_path);
        io_err(&final_path, e)
    })?;
    Ok(())
}

fn issues_csv(metrics: &[RoundMetrics]) -> String {
    let mut out =
        String::from("issue,q1_avg,q2_avg,q3_avg,q4_avg,total_submissions,accepted,abandoned\n");
    for m in metrics {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{},{},{}",
            m.issue,
            m.quartile_avg[0],
            m.quartile_avg[1],
            m.quartile_avg[2],
            m.quartile_avg[3],
            m.total_submissions,
            m.accepted,
            m.abandoned
        );
    }
    out
}

fn rejections_csv(stats: &RejectionStats) -> String {
    let mut out = String::from("rejections_before_acceptance,count\n");
    for (k, &count) in stats.histogram.iter().enumerate() {
        let _ = writeln!(out, "{k},{count}");
    }
    out
}

/// `issues.csv`, `rejections.csv` and `manifest` for one completed run.
pub fn emit_run_csv(
    metrics: &[RoundMetrics],
    stats: &RejectionStats,
    manifest: &RunManifest,
    out_dir: &Path,
) -> Result<(), CliError> {
    write_atomic(out_dir, ISSUES_FILE, &issues_csv(metrics))?;
    write_atomic(out_dir, REJECTIONS_FILE, &rejections_csv(stats))?;
    write_atomic(out_dir, MANIFEST_FILE, &manifest.render())?;
    Ok(())
}

fn sweep_csv(result: &SweepResult) -> String {
    let mut out = String::from(
        "n,replication,seed,q1_avg,q2_avg,q3_avg,q4_avg,mean_rejections,first_time_accept_rate\n",
    );
    for r in &result.rows {
        let _ = writeln!(
            out,
            "{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
            r.n,
            r.replication,
            r.seed,
            r.quartile_avg[0],
            r.quartile_avg[1],
            r.quartile_avg[2],
            r.quartile_avg[3],
            r.mean_rejections,
            r.first_time_accept_rate
        );
    }
    out
}

fn sweep_summary_csv(result: &SweepResult, phases: Option<&[Vec<Phase>; 4]>) -> String {
    let mut out = String::from(
        "n,q1_mean,q1_std,q2_mean,q2_std,q3_mean,q3_std,q4_mean,q4_std,\
         q1_phase,q2_phase,q3_phase,q4_phase\n",
    );
    for agg in &result.aggregates {
        let _ = write!(out, "{}", agg.n);
        for q in 0..4 {
            let _ = write!(out, ",{:.6},{:.6}", agg.quartile_mean[q], agg.quartile_std[q]);
        }
        for q in 0..4 {
            let label = phases
                .and_then(|p| crate::experiments::phase_label_at(&p[q], agg.n))
                .map(|k| k.to_string())
                .unwrap_or_else(|| "n/a".to_string());
            let _ = write!(out, ",{label}");
        }
        out.push('\n');
    }
    out
}

/// `sweep.csv` and `sweep_summary.csv` for a finished sweep.
pub fn emit_sweep_csv(result: &SweepResult, out_dir: &Path) -> Result<(), CliError> {
    // Phase labels need a long enough sweep; short sweeps get n/a labels.
    let phases = phase_summary(result).ok();
    write_atomic(out_dir, SWEEP_FILE, &sweep_csv(result))?;
    write_atomic(out_dir, SWEEP_SUMMARY_FILE, &sweep_summary_csv(result, phases.as_ref()))?;
    Ok(())
}

/// Comma list (`400,600,800`) or inclusive range (`400:5000:200`).
pub fn parse_values(text: &str) -> Result<Vec<u32>, CliError> {
    let bad = |reason: String| CliError::BadFlag(format!("--values: {reason}"));
    if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        if parts.len() != 3 {
            return Err(bad("range form is start:end:step".to_string()));
        }
        let parse = |s: &str| {
            s.trim().parse::<u32>().map_err(|e| bad(format!("cannot parse `{s}`: {e}")))
        };
        let (start, end, step) = (parse(parts[0])?, parse(parts[1])?, parse(parts[2])?);
        if step == 0 {
            return Err(bad("step must be positive".to_string()));
        }
        if end < start {
            return Err(bad("end must not precede start".to_string()));
        }
        Ok((start..=end).step_by(step as usize).collect())
    } else {
        text.split(',')
            .map(|s| s.trim().parse::<u32>().map_err(|e| bad(format!("cannot parse `{s}`: {e}"))))
            .collect()
    }
}

/// `run` subcommand: simulate and emit the three run artifacts.
pub fn run_command(
    config_path: &Path,
    seed: Option<u64>,
    out_dir: &Path,
) -> Result<(), CliError> {
    let config = parse_config(config_path, &ConfigOverrides { seed })?;
    let dist = config.validate()?;
    let output = run_simulation(&config)?;
    let stats = collect_rejection_stats(&output.state);
    let manifest = RunManifest::new(config, &dist);
    emit_run_csv(&output.metrics, &stats, &manifest, out_dir)?;
    println!(
        "wrote {ISSUES_FILE}, {REJECTIONS_FILE}, {MANIFEST_FILE} to {}",
        out_dir.display()
    );
    Ok(())
}

/// `sweep` subcommand: sweep one parameter, emit `sweep.csv` and
/// `sweep_summary.csv`.
pub fn sweep_command(
    config_path: &Path,
    param: &str,
    values: &str,
    replications: u32,
    out_dir: &Path,
) -> Result<(), CliError> {
    let param: SweptParameter = param.parse().map_err(CliError::BadFlag)?;
    let base = parse_config(config_path, &ConfigOverrides::default())?;
    let values = parse_values(values)?;
    let mut spec = SweepSpec::new(base, values);
    spec.param = param;
    spec.replications = replications;
    let result = run_sweep(&spec)?;
    emit_sweep_csv(&result, out_dir)?;
    println!(
        "wrote {SWEEP_FILE}, {SWEEP_SUMMARY_FILE} to {} ({} rows)",
        out_dir.display(),
        result.rows.len()
    );
    Ok(())
}

/// `calibrate` subcommand: solve the tail calibration and print it.
pub fn calibrate_command(mean: f64, high_count: u32, n: u32, theta1: f64) -> Result<(), CliError> {
    let dist = QualityDistribution::calibrate(mean, high_count, n, theta1)
        .map_err(|e| CliError::Validation(ValidationError::Calibration(e)))?;
    println!("shape: {:.9}", dist.shape());
    println!("scale: {:.9}", dist.scale());
    println!("tail_mass: {:.6}", dist.tail_mass(theta1));
    Ok(())
}
