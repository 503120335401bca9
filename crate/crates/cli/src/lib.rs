//! Command-line frontend: scenario ingestion, design runs, sweeps,
//! benchmarks and solution validation.

pub mod output;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use isac_ee::baselines::{comm_only, dinkelbach_cross_check, sensing_dominated, DetectionSettings};
use isac_ee::conic::{self, ConicProblem, SolverOptions};
use isac_ee::model::{validate_solution, ModelError, ScenarioConfig, SteeringNormMode};
use isac_ee::pipeline::{design, sweep_point, Design, DesignOptions, PipelineError, SweepParam, SweepRow};
use isac_ee::sca::{self, ScaError, ScaOptions};
use isac_ee::surrogate::{build_subproblem, taylor_coefficients};
use rayon::prelude::*;
use serde_json::{json, Value};
use thiserror::Error;

use output::{metrics_json, round12, write_beampattern, write_convergence, write_json, write_sweep, SolutionFile};

pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INFEASIBLE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{0}")]
    Io(String),
    #[error("{0}")]
    Infeasible(String),
    #[error("{0}")]
    Solver(String),
    /// A stored solution violates the scenario's constraints.
    #[error("{0}")]
    Invalid(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Io(format!("{}: {e}", path.display()))
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Infeasible(_) | CliError::Invalid(_) => EXIT_INFEASIBLE,
            CliError::Solver(_) => EXIT_SOLVER,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        match &e {
            PipelineError::Config(_) => CliError::Config(e.to_string()),
            PipelineError::Sca(inner @ ScaError::InfeasibleScenario { .. }) => CliError::Infeasible(infeasibility_summary(inner)),
            _ => CliError::Solver(e.to_string()),
        }
    }
}

impl From<ScaError> for CliError {
    fn from(e: ScaError) -> Self {
        PipelineError::from(e).into()
    }
}

/// Human-readable infeasibility message including a certificate summary.
fn infeasibility_summary(e: &ScaError) -> String {
    let ScaError::InfeasibleScenario { reason, phase_one_power, certificate } = e else {
        return e.to_string();
    };
    let mut msg = format!("scenario is infeasible: {reason}");
    if let Some(p) = phase_one_power {
        msg.push_str(&format!("\nphase-I minimum transmit power: {p:.6e} W"));
    }
    match certificate {
        Some(conic::Certificate::PrimalInfeasible { y, residual, .. }) => {
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            msg.push_str(&format!(
                "\nphase-I certificate: Farkas ray with b'y = 1, |y| = {norm:.6e}, dual-cone residual {residual:.3e}"
            ));
        }
        Some(other) => msg.push_str(&format!("\nphase-I certificate: {other:?}")),
        None => msg.push_str("\nphase-I certificate: none (power bound exceeded)"),
    }
    msg
}

#[derive(Debug, Parser)]
#[command(name = "isac-ee", version, about = "Energy-efficient transmit beamforming for integrated sensing and communication")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Scenario JSON file.
    #[arg(short = 'c', long = "config")]
    pub config: PathBuf,
    /// Override the steering-vector normalization of the scenario.
    #[arg(long = "steering-mode", value_enum)]
    pub steering_mode: Option<SteeringArg>,
    /// Accepted for interface stability; every computation is deterministic.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Print solver progress to stderr (repeat for more detail).
    #[arg(short = 'v', long = "verbose", action = clap::ArgAction::Count)]
    pub verbose: u8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SteeringArg {
    UnitNorm,
    #[value(name = "paper-1-over-n")]
    PaperOneOverN,
}

impl From<SteeringArg> for SteeringNormMode {
    fn from(a: SteeringArg) -> Self {
        match a {
            SteeringArg::UnitNorm => SteeringNormMode::UnitNorm,
            SteeringArg::PaperOneOverN => SteeringNormMode::PaperOneOverN,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BaselineMode {
    CommOnly,
    Sensing,
    Dinkelbach,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Design beamformers for one scenario and write the reports.
    Solve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        /// Record per-iteration wall time in convergence.csv.
        #[arg(long)]
        timing: bool,
        /// Angle step of beampattern.csv, degrees.
        #[arg(long = "angle-step", default_value_t = 0.5)]
        angle_step: f64,
        /// Also write the first surrogate subproblem as a conic JSON dump.
        #[arg(long = "dump-conic")]
        dump_conic: Option<PathBuf>,
    },
    /// Run the design over a list of parameter values.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        /// gamma_dbm, pmax_dbm or tau_db.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, allow_hyphen_values = true)]
        values: String,
        /// Number of sweep points solved concurrently.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Run a benchmark scheme.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(short = 'o', long = "out")]
        out: PathBuf,
        #[arg(long, value_enum)]
        mode: BaselineMode,
        #[arg(long = "angle-step", default_value_t = 0.5)]
        angle_step: f64,
    },
    /// Re-check a stored solution against a scenario.
    Validate {
        #[command(flatten)]
        common: CommonArgs,
        /// solution.json written by `solve` or `baseline`.
        #[arg(short = 's', long = "solution")]
        solution: PathBuf,
    },
    /// Solve a conic JSON dump and print the outcome.
    Conic {
        dump: PathBuf,
        #[arg(short = 'v', long = "verbose", action = clap::ArgAction::Count)]
        verbose: u8,
    },
}

/// Parses arguments and runs; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve { common, out, timing, angle_step, dump_conic } => {
            cmd_solve(&common, &out, timing, angle_step, dump_conic.as_deref())
        }
        Command::Sweep { common, out, param, values, jobs } => cmd_sweep(&common, &param, &values, &out, jobs),
        Command::Baseline { common, out, mode, angle_step } => cmd_baseline(&common, mode, &out, angle_step),
        Command::Validate { common, solution } => cmd_validate(&common, &solution),
        Command::Conic { dump, verbose } => cmd_conic(&dump, verbose),
    }
}

pub fn load_scenario(common: &CommonArgs) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(&common.config).map_err(|e| CliError::io(&common.config, e))?;
    let mut scenario = ScenarioConfig::from_json(&text)
        .map_err(|e| CliError::Config(format!("{}: {e}", common.config.display())))?;
    if let Some(mode) = common.steering_mode {
        scenario.steering_norm_mode = mode.into();
    }
    Ok(scenario)
}

fn design_options(common: &CommonArgs) -> DesignOptions {
    let solver = SolverOptions { verbosity: common.verbose.saturating_sub(1), ..SolverOptions::default() };
    DesignOptions { sca: ScaOptions { solver, ..ScaOptions::default() } }
}

fn prepare_out(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out).map_err(|e| CliError::io(out, e))
}

fn check_step(step: f64) -> Result<(), CliError> {
    if step > 0.0 && step <= 180.0 {
        Ok(())
    } else {
        Err(CliError::Config(format!("angle step must lie in (0, 180], got {step}")))
    }
}

/// Writes solution.json, convergence.csv, beampattern.csv and metrics.json
/// for a finished design.
fn write_design(
    d: &Design,
    sensing: &ScenarioConfig,
    out: &Path,
    timing: bool,
    angle_step: f64,
    extra: Value,
) -> Result<Value, CliError> {
    let covs = d.beamformers.covariances();
    let total = covs.total();
    // Gains toward the original sensing directions, also for comm-only designs.
    let gains = sensing
        .target_angles
        .iter()
        .map(|&theta| isac_ee::model::beampattern_gain(theta, &total, sensing))
        .collect::<Result<Vec<_>, _>>()?;
    let detection = detection_for(&gains);
    let mut metrics = metrics_json(&d.metrics, &gains, detection);
    let obj = metrics.as_object_mut().expect("metrics is an object");
    obj.insert("status".into(), json!("OPTIMAL"));
    obj.insert(
        "sca".into(),
        json!({
            "iterations": d.sca.log.records.len(),
            "termination": d.sca.log.termination,
            "rejected_steps": d.sca.log.rejected_steps,
            "t": round12(d.sca.solution.t),
            "u": round12(d.sca.solution.u),
            "power_constraint_gap": round12(d.activeness.power),
            "coupling_constraint_gap": round12(d.activeness.coupling),
            "phase_one_power": round12(d.sca.init.phase_one_power),
        }),
    );
    if let Value::Object(more) = extra {
        obj.extend(more);
    }
    SolutionFile::new(&d.beamformers.beams, &d.beamformers.radar, metrics.clone()).write(&out.join("solution.json"))?;
    write_convergence(&out.join("convergence.csv"), &d.sca.init, &d.sca.log, timing)?;
    write_beampattern(&out.join("beampattern.csv"), &total, sensing, angle_step)?;
    write_json(&out.join("metrics.json"), &metrics)?;
    Ok(metrics)
}

fn detection_for(gains: &[f64]) -> Option<f64> {
    let min = gains.iter().copied().reduce(f64::min)?;
    DetectionSettings::default().probability(min).ok()
}

pub fn cmd_solve(
    common: &CommonArgs,
    out: &Path,
    timing: bool,
    angle_step: f64,
    dump_conic: Option<&Path>,
) -> Result<(), CliError> {
    check_step(angle_step)?;
    let scenario = load_scenario(common)?;
    let opts = design_options(common);
    if let Some(path) = dump_conic {
        let problem = first_subproblem(&scenario, &opts.sca)?;
        std::fs::write(path, problem.to_json()).map_err(|e| CliError::io(path, e))?;
    }
    let d = design(&scenario, &opts)?;
    prepare_out(out)?;
    let m = write_design(&d, &scenario, out, timing, angle_step, json!({}))?;
    println!(
        "OPTIMAL  ee {}  ee_prime {}  rate {}  iterations {}",
        m["ee"], m["ee_prime"], m["rate"], d.sca.log.records.len()
    );
    Ok(())
}

/// The surrogate subproblem solved at the first SCA iteration.
pub fn first_subproblem(scenario: &ScenarioConfig, opts: &ScaOptions) -> Result<ConicProblem, CliError> {
    scenario.validate()?;
    let channels = scenario.channels()?;
    let init = sca::initialize(scenario, &channels, opts)?;
    let point = taylor_coefficients(&init.solution.covariances, init.lambda, &channels, &scenario.noise_power)
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let sub = build_subproblem(scenario, &channels, &point).map_err(|e| CliError::Solver(e.to_string()))?;
    Ok(sub.problem)
}

pub fn parse_values(values: &str) -> Result<Vec<f64>, CliError> {
    let parsed = values
        .split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|_| CliError::Config(format!("invalid sweep value '{v}'"))))
        .collect::<Result<Vec<_>, _>>()?;
    if parsed.is_empty() {
        return Err(CliError::Config("sweep needs at least one value".into()));
    }
    if let Some(v) = parsed.iter().find(|v| !v.is_finite()) {
        return Err(CliError::Config(format!("sweep value {v} is not finite")));
    }
    Ok(parsed)
}

pub fn cmd_sweep(common: &CommonArgs, param: &str, values: &str, out: &Path, jobs: usize) -> Result<(), CliError> {
    let param: SweepParam = param.parse()?;
    let values = parse_values(values)?;
    if jobs == 0 {
        return Err(CliError::Config("--jobs must be at least 1".into()));
    }
    let scenario = load_scenario(common)?;
    let opts = design_options(common);
    let detection = DetectionSettings::default();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {jobs} worker threads: {e}")))?;
    let rows: Vec<SweepRow> =
        pool.install(|| values.par_iter().map(|&v| sweep_point(&scenario, param, v, &opts, &detection)).collect());
    prepare_out(out)?;
    write_sweep(&out.join("sweep.csv"), &rows)?;
    for r in &rows {
        println!("{} = {}  {}", param.name(), r.param_value, r.status);
    }
    Ok(())
}

pub fn cmd_baseline(common: &CommonArgs, mode: BaselineMode, out: &Path, angle_step: f64) -> Result<(), CliError> {
    check_step(angle_step)?;
    let scenario = load_scenario(common)?;
    let opts = design_options(common);
    prepare_out(out)?;
    match mode {
        BaselineMode::CommOnly => {
            let d = comm_only(&scenario, &opts)?;
            let m = write_design(&d, &scenario, out, false, angle_step, json!({ "mode": "comm-only" }))?;
            println!("comm-only  ee {}  ee_prime {}", m["ee"], m["ee_prime"]);
        }
        BaselineMode::Sensing => {
            let s = sensing_dominated(&scenario, &opts.sca)?;
            let covs = s.beamformers.covariances();
            let detection = detection_for(&s.gains);
            let mut metrics = metrics_json(&s.metrics, &s.gains, detection);
            let obj = metrics.as_object_mut().expect("metrics is an object");
            obj.insert("status".into(), json!("OPTIMAL"));
            obj.insert("mode".into(), json!("sensing"));
            obj.insert("max_min_gain".into(), round12(s.min_gain));
            SolutionFile::new(&s.beamformers.beams, &s.beamformers.radar, metrics.clone())
                .write(&out.join("solution.json"))?;
            write_beampattern(&out.join("beampattern.csv"), &covs.total(), &scenario, angle_step)?;
            write_json(&out.join("metrics.json"), &metrics)?;
            println!("sensing  max-min gain {}  ee {}", metrics["max_min_gain"], metrics["ee"]);
        }
        BaselineMode::Dinkelbach => {
            let r = dinkelbach_cross_check(&scenario, &opts.sca)?;
            let total = r.covariances.total();
            let gains = scenario
                .target_angles
                .iter()
                .map(|&theta| isac_ee::model::beampattern_gain(theta, &total, &scenario))
                .collect::<Result<Vec<_>, _>>()?;
            let mut metrics = metrics_json(&r.metrics, &gains, detection_for(&gains));
            let obj = metrics.as_object_mut().expect("metrics is an object");
            obj.insert("status".into(), json!("OPTIMAL"));
            obj.insert("mode".into(), json!("dinkelbach"));
            obj.insert("iterations".into(), json!(r.iterations));
            write_beampattern(&out.join("beampattern.csv"), &total, &scenario, angle_step)?;
            write_json(&out.join("metrics.json"), &metrics)?;
            println!("dinkelbach  ee_prime {}", metrics["ee_prime"]);
        }
    }
    Ok(())
}

pub fn cmd_validate(common: &CommonArgs, solution: &Path) -> Result<(), CliError> {
    let scenario = load_scenario(common)?;
    let covs = SolutionFile::read(solution)?.covariances()?;
    if covs.num_users() != scenario.num_users || covs.dim() != scenario.num_antennas {
        return Err(CliError::Config(format!(
            "solution has {} users and {} antennas, scenario has {} and {}",
            covs.num_users(),
            covs.dim(),
            scenario.num_users,
            scenario.num_antennas
        )));
    }
    let channels = scenario.channels()?;
    let report = validate_solution(&covs, &channels, &scenario)?;
    for (k, s) in report.sinr_slack.iter().enumerate() {
        println!("sinr_slack[{k}]        {}", output::fmt_num(*s));
    }
    println!("power_slack           {}", output::fmt_num(report.power_slack));
    for (m, s) in report.beampattern_slack.iter().enumerate() {
        println!("beampattern_slack[{m}] {}", output::fmt_num(*s));
    }
    for (i, e) in report.psd_min_eigenvalues.iter().enumerate() {
        println!("min_eigenvalue[{i}]    {}", output::fmt_num(*e));
    }
    for (k, r) in report.rank_one_ratios.iter().enumerate() {
        println!("rank_one_ratio[{k}]    {}", output::fmt_num(*r));
    }
    if report.passed {
        println!("PASS");
        Ok(())
    } else {
        Err(CliError::Invalid(format!("solution violates constraints: {}", report.violations(&scenario).join("; "))))
    }
}

pub fn cmd_conic(dump: &Path, verbose: u8) -> Result<(), CliError> {
    let text = std::fs::read_to_string(dump).map_err(|e| CliError::io(dump, e))?;
    let problem = ConicProblem::from_json(&text).map_err(|e| CliError::Config(e.to_string()))?;
    let opts = SolverOptions { verbosity: verbose, ..SolverOptions::default() };
    let sol = conic::solve(&problem, &opts).map_err(|e| CliError::Config(e.to_string()))?;
    println!(
        "{}  objective {}  gap {}  iterations {}",
        sol.status,
        output::fmt_num(sol.objective),
        output::fmt_num(sol.gap),
        sol.iterations
    );
    if sol.is_optimal() {
        Ok(())
    } else {
        Err(CliError::Solver(format!("solver status {}", sol.status)))
    }
}
