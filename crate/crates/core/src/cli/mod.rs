//! Command-line front end. Exit codes: 0 success, 1 configuration or usage
//! error, 2 failure during a run.

mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{
    convergence_bound, estimate_series, phi_series, relative_error, robustness_bound, robustness_check, AepRuns,
    ConvergenceBound, RobustnessCheck, TheoryParams,
};
use crate::data::{write_idx, IdxFormat};
use crate::defense::DefensePolicy;
use crate::engine::{AttackMode, LearningRate};
use crate::error::{Error, Result};
use crate::scenario::{average_mitigation, mitigation_report, DataSource, ExperimentConfig};

pub use output::{
    write_aep_csv, write_json, write_phi_csv, write_rounds_csv, write_tradeoff_csv, RunSummary, AEP_HEADER, PHI_HEADER,
    ROUNDS_HEADER, TRADEOFF_HEADER,
};

/// Environment variable that overrides the output directory (below `--out`).
pub const OUT_DIR_ENV: &str = "FLWBC_OUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "flwbc",
    version,
    about = "Federated learning poisoning and defense simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Experiment config (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; falls back to $FLWBC_OUT_DIR, then the config, then `out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Overrides `federation.seed`.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one federation; writes rounds.csv and summary.json.
    Run(Common),
    /// Attack-effect analysis; writes aep.csv, phi.csv, rounds.csv with δ norms and,
    /// for FL-WBC with captured trajectories, robustness.json.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        aep: bool,
        /// Needs `federation.capture_trajectories`.
        #[arg(long)]
        phi: bool,
        /// Needs `federation.capture_trajectories`.
        #[arg(long)]
        estimate: bool,
    },
    /// Print the robustness and/or convergence bound as JSON.
    Bound(BoundArgs),
    /// Rerun one config across values of a defense parameter; writes tradeoff.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: SweepParam,
        #[arg(long, value_delimiter = ',', required = true, num_args = 1..)]
        values: Vec<f64>,
    },
    /// Write the config's synthetic dataset as an IDX pair (images.idx, labels.idx).
    GenData {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "f64")]
        format: DataFormat,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepParam {
    /// FL-WBC noise std.
    S,
    /// CDP/LDP noise scale.
    SigmaDp,
    /// CTMA trim fraction.
    Beta,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DataFormat {
    U8,
    F64,
}

#[derive(Debug, Clone, Args)]
pub struct BoundArgs {
    /// Parameter count P.
    #[arg(long)]
    pub params: usize,
    /// Local iterations I.
    #[arg(long)]
    pub iterations: usize,
    /// Devices per round K.
    #[arg(long)]
    pub devices: usize,
    /// FL-WBC noise std.
    #[arg(long, default_value_t = 0.0)]
    pub s: f64,
    /// Constant step size; without it the decaying schedule from --mu/--smoothness is used.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub mu: Option<f64>,
    /// Smoothness L.
    #[arg(long)]
    pub smoothness: Option<f64>,
    /// Λ_t per round, comma separated; one value applies to every round.
    #[arg(long, value_delimiter = ',')]
    pub lambda: Vec<f64>,
    #[arg(long)]
    pub t_adv: Option<usize>,
    /// Last round of the robustness window; enables the robustness bound.
    #[arg(long)]
    pub t_end: Option<usize>,
    /// Total rounds T; enables the convergence bound.
    #[arg(long)]
    pub rounds: Option<usize>,
    /// Gradient norm bound G.
    #[arg(long, default_value_t = 0.0)]
    pub g: f64,
    /// Per-device gradient variance bound, shared by all devices.
    #[arg(long, default_value_t = 0.0)]
    pub sigma: f64,
    /// Number of devices N (uniform weights 1/N).
    #[arg(long, default_value_t = 1)]
    pub num_devices: usize,
    /// Heterogeneity Γ.
    #[arg(long, default_value_t = 0.0)]
    pub heterogeneity: f64,
    /// ‖W_0 − W*‖².
    #[arg(long, default_value_t = 0.0)]
    pub init_dist_sq: f64,
}

/// Parse `args` (including the program name), run, and map the outcome to an exit code.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

pub fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        1
    } else {
        2
    }
}

pub fn execute(cmd: &Command) -> Result<()> {
    match cmd {
        Command::Run(c) => cmd_run(c).map(|_| ()),
        Command::Analyze {
            common,
            aep,
            phi,
            estimate,
        } => cmd_analyze(common, *aep, *phi, *estimate),
        Command::Bound(b) => {
            println!("{}", serde_json::to_string_pretty(&cmd_bound(b)?)?);
            Ok(())
        }
        Command::Sweep { common, param, values } => cmd_sweep(common, *param, values).map(|_| ()),
        Command::GenData { common, format } => cmd_gen_data(common, *format),
    }
}

/// Read and validate the config, applying `--seed`.
pub fn load_config(common: &Common) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(&common.config)
        .map_err(|e| Error::config("config", format!("cannot read {}: {e}", common.config.display())))?;
    let mut cfg: ExperimentConfig = serde_json::from_str(&text)
        .map_err(|e| Error::config("config", format!("{}: {e}", common.config.display())))?;
    if let Some(seed) = common.seed {
        cfg.federation.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

/// `--out`, then `$FLWBC_OUT_DIR`, then `output_dir` from the config, then `out`. Created if missing.
pub fn output_dir(common: &Common, cfg: &ExperimentConfig) -> Result<PathBuf> {
    let dir = common
        .out
        .clone()
        .or_else(|| {
            std::env::var_os(OUT_DIR_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .or_else(|| cfg.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    Ok(dir)
}

/// Returns the output directory.
pub fn cmd_run(common: &Common) -> Result<PathBuf> {
    let cfg = load_config(common)?;
    let dir = output_dir(common, &cfg)?;
    let sim = cfg.build()?;
    let run = sim.run(AttackMode::Configured, false)?;
    write_rounds_csv(&dir.join("rounds.csv"), &run.records)?;
    let outcomes = mitigation_report(&run.records, cfg.malicious_samples, cfg.horizon);
    let summary = RunSummary {
        final_benign_acc: run.records.last().map_or(f64::NAN, |r| r.benign_accuracy),
        mitigation_rounds: &outcomes,
        config: &cfg,
        seed: cfg.federation.seed,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(dir)
}

pub fn cmd_analyze(common: &Common, aep: bool, phi: bool, estimate: bool) -> Result<()> {
    let cfg = load_config(common)?;
    if (phi || estimate) && !cfg.federation.capture_trajectories {
        return Err(Error::config(
            "capture_trajectories",
            "--phi and --estimate replay local trajectories; set federation.capture_trajectories to true",
        ));
    }
    let aep = aep || estimate || !phi;
    let dir = output_dir(common, &cfg)?;
    let capture = cfg.federation.capture_trajectories;
    let sim = cfg.build()?;
    let runs = AepRuns::compute(&sim, cfg.federation.rounds, capture)?;
    if aep {
        let deltas = runs.deltas();
        let estimates = if estimate {
            Some(estimate_series(&sim, &runs.attacked)?)
        } else {
            None
        };
        let rows: Vec<(usize, f64, Option<f64>)> = deltas
            .iter()
            .enumerate()
            .map(|(t, d)| (t, d.norm(), estimates.as_ref().map(|e| relative_error(&e[t], d))))
            .collect();
        write_aep_csv(&dir.join("aep.csv"), &rows)?;
        let mut records = runs.attacked.records.clone();
        for (r, d) in records.iter_mut().zip(&deltas) {
            r.delta_norm = Some(d.norm());
        }
        write_rounds_csv(&dir.join("rounds.csv"), &records)?;
    }
    if phi {
        write_phi_csv(&dir.join("phi.csv"), &phi_series(&sim, &runs.attacked)?)?;
    }
    if capture && cfg.federation.defense.flwbc_s().is_some() {
        match robustness_check(&sim, &runs) {
            Ok(check) => write_json(&dir.join("robustness.json"), &RobustnessSummary::from(&check))?,
            Err(Error::Precondition(msg)) => eprintln!("robustness check skipped: {msg}"),
            Err(e) => return Err(e),
        }
    }
    Ok(())
}

/// Measured drift against the robustness bound, as written to `robustness.json`.
#[derive(Debug, Clone, Serialize)]
pub struct RobustnessSummary {
    pub t_adv: usize,
    pub t_end: usize,
    pub measured: f64,
    pub bound: f64,
    pub ratio: f64,
    pub holds_with_10pct_slack: bool,
}

impl From<&RobustnessCheck> for RobustnessSummary {
    fn from(c: &RobustnessCheck) -> Self {
        Self {
            t_adv: c.t_adv,
            t_end: c.t_end,
            measured: c.measured,
            bound: c.bound,
            ratio: c.measured / c.bound,
            holds_with_10pct_slack: c.holds(0.1),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundReport {
    pub inputs: TheoryParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_adv: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_end: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rounds: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub robustness_bound: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceBound>,
}

fn positive(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be > 0, got {v}")))
    }
}

fn non_negative(field: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v >= 0.0 {
        Ok(v)
    } else {
        Err(Error::config(field, format!("must be >= 0, got {v}")))
    }
}

pub fn cmd_bound(b: &BoundArgs) -> Result<BoundReport> {
    for (name, v) in [
        ("params", b.params),
        ("iterations", b.iterations),
        ("devices", b.devices),
        ("num_devices", b.num_devices),
    ] {
        if v == 0 {
            return Err(Error::config(name, "must be > 0"));
        }
    }
    for (name, v) in [
        ("s", b.s),
        ("g", b.g),
        ("sigma", b.sigma),
        ("heterogeneity", b.heterogeneity),
        ("init_dist_sq", b.init_dist_sq),
    ] {
        non_negative(name, v)?;
    }
    for &l in &b.lambda {
        non_negative("lambda", l)?;
    }
    if b.t_end.is_none() && b.rounds.is_none() {
        return Err(Error::config(
            "t_end",
            "give --t-end for the robustness bound and/or --rounds for convergence",
        ));
    }
    let learning_rate = match (b.eta, b.mu, b.smoothness) {
        (Some(eta), _, _) => LearningRate::Constant(positive("eta", eta)?),
        (None, Some(mu), Some(l)) => LearningRate::Decaying {
            mu: positive("mu", mu)?,
            smoothness: positive("smoothness", l)?,
        },
        _ => return Err(Error::config("eta", "give --eta or both --mu and --smoothness")),
    };
    let n = b.num_devices;
    let tp = TheoryParams {
        p: b.params,
        iterations: b.iterations,
        k: b.devices,
        s: b.s,
        learning_rate,
        lambda: b.lambda.clone(),
        l: b.smoothness.unwrap_or(0.0),
        mu: b.mu.unwrap_or(0.0),
        g: b.g,
        sigma: vec![b.sigma; n],
        heterogeneity: b.heterogeneity,
        weights: vec![1.0 / n as f64; n],
        init_dist_sq: b.init_dist_sq,
    };
    let robustness = match b.t_end {
        Some(t_end) => {
            if b.lambda.is_empty() {
                return Err(Error::config("lambda", "the robustness bound needs --lambda"));
            }
            Some(robustness_bound(&tp, b.t_adv.unwrap_or(0), t_end)?)
        }
        None => None,
    };
    let convergence = match b.rounds {
        Some(t) => {
            positive("mu", tp.mu)?;
            positive("smoothness", tp.l)?;
            Some(convergence_bound(&tp, t)?)
        }
        None => None,
    };
    Ok(BoundReport {
        inputs: tp,
        t_adv: b.t_end.map(|_| b.t_adv.unwrap_or(0)),
        t_end: b.t_end,
        rounds: b.rounds,
        robustness_bound: robustness,
        convergence,
    })
}

/// The config with its defense parameter `param` set to `value`.
pub fn sweep_config(cfg: &ExperimentConfig, param: SweepParam, value: f64) -> Result<ExperimentConfig> {
    let mut out = cfg.clone();
    out.federation.defense = match (param, cfg.federation.defense) {
        (SweepParam::S, _) => DefensePolicy::Flwbc { s: value },
        (SweepParam::Beta, _) => DefensePolicy::Ctma { beta: value },
        (SweepParam::SigmaDp, DefensePolicy::Cdp { clip, .. }) => DefensePolicy::Cdp { clip, sigma_dp: value },
        (SweepParam::SigmaDp, DefensePolicy::Ldp { clip, .. }) => DefensePolicy::Ldp { clip, sigma_dp: value },
        (SweepParam::SigmaDp, _) => {
            return Err(Error::config(
                "param",
                "sigma_dp sweeps need a cdp or ldp defense in the config",
            ))
        }
    };
    out.validate()?;
    Ok(out)
}

/// One row per value: `(value, final benign accuracy, average mitigation rounds)`.
pub fn cmd_sweep(common: &Common, param: SweepParam, values: &[f64]) -> Result<Vec<(f64, f64, Option<f64>)>> {
    let cfg = load_config(common)?;
    let dir = output_dir(common, &cfg)?;
    let configs: Vec<ExperimentConfig> = values
        .iter()
        .map(|&v| sweep_config(&cfg, param, v))
        .collect::<Result<_>>()?;
    let rows: Vec<(f64, f64, Option<f64>)> = configs
        .par_iter()
        .zip(values)
        .map(|(c, &v)| {
            let run = c.build()?.run(AttackMode::Configured, false)?;
            let acc = run.records.last().map_or(f64::NAN, |r| r.benign_accuracy);
            let outcomes = mitigation_report(&run.records, c.malicious_samples, c.horizon);
            Ok((v, acc, average_mitigation(&outcomes)))
        })
        .collect::<Result<_>>()?;
    write_tradeoff_csv(&dir.join("tradeoff.csv"), &rows)?;
    Ok(rows)
}

pub fn cmd_gen_data(common: &Common, format: DataFormat) -> Result<()> {
    let cfg = load_config(common)?;
    if !matches!(cfg.data, DataSource::Synthetic { .. }) {
        return Err(Error::config("data", "gen-data needs a synthetic data source"));
    }
    let dir = output_dir(common, &cfg)?;
    let ds = cfg.load_dataset()?;
    let format = match format {
        DataFormat::U8 => IdxFormat::U8,
        DataFormat::F64 => IdxFormat::F64,
    };
    write_idx(&ds, &dir.join("images.idx"), &dir.join("labels.idx"), format)
}
