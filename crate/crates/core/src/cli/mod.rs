//! Command-line front end.
//!
//! Exit status: 0 success, 1 usage error, 2 data or I/O error, 3 numerical
//! failure. Every run that names an output writes `<output>.manifest.json`.

mod commands;
pub mod manifest;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{ArgGroup, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::kalman::InitMode;
use crate::state_space::CovarianceMode;
use manifest::{manifest_path, RunContext};
use output::Format;

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "pitchtrack", version, about = "Kalman-filter kinematics and trajectory VAE for 2D tracking data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Simulate noisy tracks from the Newtonian state-space model.
    Simulate(SimulateArgs),
    /// Filter tracks with fixed covariance parameters and dump states.
    Filter(FilterArgs),
    /// Fit (Q, σ) by maximum likelihood on sliding windows.
    Estimate(EstimateArgs),
    /// k-step-ahead predictions with 95% rectangles.
    Predict(PredictArgs),
    /// Velocity and speed series from the filter.
    Kinematics(KinematicsArgs),
    /// Train, apply or sample the trajectory autoencoder.
    #[command(subcommand)]
    Vae(VaeCommand),
    /// Draw tracks on the pitch.
    Plot(PlotArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Exact,
    Kappa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    LogCholesky,
    Raw,
}

impl From<ModeArg> for CovarianceMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::LogCholesky => CovarianceMode::LogCholesky,
            ModeArg::Raw => CovarianceMode::Raw,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct InputArgs {
    /// Tracking CSV with header `frame,entity_id,x_cm,y_cm`.
    #[arg(long)]
    pub input: PathBuf,
    /// Sampling interval, seconds.
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    #[arg(short = 'o', long)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Args, Debug, Clone)]
pub struct InitOptions {
    /// Diffuse initialization: exact two-matrix recursion or large κ.
    #[arg(long, value_enum, default_value_t = InitArg::Exact)]
    pub init: InitArg,
    /// κ for `--init kappa`.
    #[arg(long, default_value_t = 1e8)]
    pub kappa: f64,
}

impl InitOptions {
    pub fn mode(&self) -> InitMode {
        match self.init {
            InitArg::Exact => InitMode::ExactDiffuse,
            InitArg::Kappa => InitMode::LargeKappa(self.kappa),
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    /// Number of independently simulated entities (1 to 23).
    #[arg(long, default_value_t = 1)]
    pub entities: usize,
    #[arg(long, default_value_t = 100)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Acceleration variance on each axis, (cm/s²)².
    #[arg(long, default_value_t = 400.0)]
    pub q: f64,
    /// Measurement noise standard deviation on each axis, cm.
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Also write true states as CSV (frame, entity_id, x, y, vx, vy).
    #[arg(long)]
    pub truth: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct ModelOptions {
    /// Acceleration variance on each axis, (cm/s²)².
    #[arg(long, default_value_t = 400.0)]
    pub q: f64,
    /// Measurement noise standard deviation on each axis, cm.
    #[arg(long, default_value_t = 10.0)]
    pub sigma: f64,
    /// Model JSON; overrides `--q` and `--sigma`.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct FilterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Only this entity; all entities by default.
    #[arg(long)]
    pub entity: Option<u32>,
    #[command(flatten)]
    pub model: ModelOptions,
    #[command(flatten)]
    pub init: InitOptions,
    /// Sequential scalar updates instead of the batch form.
    #[arg(long)]
    pub univariate: bool,
    /// SVG of observed (red) and filtered (blue) tracks.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct WindowOptions {
    #[arg(long)]
    pub entity: u32,
    /// Samples per fitted window.
    #[arg(long, default_value_t = 10)]
    pub window: usize,
    /// Start each window's optimizer at the previous window's optimum.
    #[arg(long)]
    pub warm_start: bool,
    #[arg(long, value_enum, default_value_t = ModeArg::LogCholesky)]
    pub mode: ModeArg,
    #[command(flatten)]
    pub init: InitOptions,
}

#[derive(Args, Debug, Clone)]
pub struct EstimateArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowOptions,
    /// Fit one model to the whole series instead of sliding windows.
    #[arg(long)]
    pub full_series: bool,
    /// With `--full-series`, write the fitted model as JSON.
    #[arg(long, requires = "full_series")]
    pub model_out: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct PredictArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub window: WindowOptions,
    /// Steps ahead.
    #[arg(long, default_value_t = 5)]
    pub horizon: usize,
    /// SVG with observations (red) and predictions with rectangles (blue).
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Draw every n-th window's prediction in the SVG.
    #[arg(long, default_value_t = 10)]
    pub plot_stride: usize,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Args, Debug, Clone)]
pub struct KinematicsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub entity: u32,
    /// Fixed acceleration variance; with `--sigma` skips the likelihood fit.
    #[arg(long, requires = "sigma")]
    pub q: Option<f64>,
    #[arg(long, requires = "q")]
    pub sigma: Option<f64>,
    /// SVG of the speed series.
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// SVG of velocity arrows on the pitch.
    #[arg(long)]
    pub quiver: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Subcommand, Debug)]
pub enum VaeCommand {
    /// Train on tracking segments or scripted synthetic paths.
    Train(VaeTrainArgs),
    /// Encode and decode tracking segments with zero noise.
    Reconstruct(VaeReconstructArgs),
    /// Decode standard-normal latent draws.
    Generate(VaeGenerateArgs),
}

#[derive(Args, Debug, Clone)]
#[command(group(ArgGroup::new("data").required(true).args(["input", "scripted"])))]
pub struct VaeTrainArgs {
    /// Tracking CSV, cut into gap-free segments of `--length` samples.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Train on this many scripted paths (line, loop, sprint-and-loop).
    #[arg(long)]
    pub scripted: Option<usize>,
    /// Samples per trajectory; the data dimension is twice this.
    #[arg(long, default_value_t = 50)]
    pub length: usize,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    /// Gaussian jitter added to scripted paths, cm.
    #[arg(long, default_value_t = 0.0)]
    pub jitter: f64,
    #[arg(long, default_value_t = 4)]
    pub latent_dim: usize,
    #[arg(long, default_value_t = 32)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.15)]
    pub sigma_x: f64,
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 0.001)]
    pub learning_rate: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-epoch loss table.
    #[arg(long)]
    pub history: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Parameter JSON.
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct VaeReconstructArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Tracking CSV of reconstructions, one entity per segment.
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct VaeGenerateArgs {
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long, default_value_t = 6)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.1)]
    pub dt: f64,
    #[arg(long)]
    pub plot: Option<PathBuf>,
    /// Tracking CSV of generated paths.
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct PlotArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// Entities to draw; all by default.
    #[arg(long, value_delimiter = ',')]
    pub entity: Vec<u32>,
    #[arg(long, default_value = "tracks")]
    pub title: String,
    /// SVG file.
    #[arg(short = 'o', long)]
    pub output: PathBuf,
}

impl Command {
    fn output(&self) -> &PathBuf {
        match self {
            Command::Simulate(a) => &a.out.output,
            Command::Filter(a) => &a.out.output,
            Command::Estimate(a) => &a.out.output,
            Command::Predict(a) => &a.out.output,
            Command::Kinematics(a) => &a.out.output,
            Command::Vae(VaeCommand::Train(a)) => &a.output,
            Command::Vae(VaeCommand::Reconstruct(a)) => &a.output,
            Command::Vae(VaeCommand::Generate(a)) => &a.output,
            Command::Plot(a) => &a.output,
        }
    }
}

pub fn exit_code(err: &Error) -> i32 {
    if err.is_numerical() {
        EXIT_NUMERICAL
    } else {
        EXIT_DATA
    }
}

/// Parses `argv`, runs the command and returns the process exit status.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let command = Cli::command();
    let matches = match command.clone().try_get_matches_from(&argv) {
        Ok(m) => m,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return EXIT_USAGE;
        }
    };
    let argv_strings = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let mut ctx = RunContext::new(argv_strings, &command, &matches);
    let result = commands::dispatch(&cli.command, &mut ctx);
    let (code, message) = match &result {
        Ok(()) => (0, None),
        Err(e) => {
            eprintln!("error: pitchtrack {}: {e}", ctx.command);
            (exit_code(e), Some(e.to_string()))
        }
    };
    let manifest = ctx.finish(code, message);
    let path = manifest_path(cli.command.output());
    let text = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    if let Err(e) = std::fs::write(&path, text + "\n") {
        eprintln!("error: cannot write manifest {}: {e}", path.display());
        if code == 0 {
            return EXIT_DATA;
        }
    }
    code
}
