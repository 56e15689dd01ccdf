mod cmd;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mpi_core::ErrorKind;

#[derive(Parser)]
#[command(name = "mpi-engine", version, about = "Render, edit and evaluate multi-plane image scenes")]
struct Cli {
    /// Worker threads; 0 picks one per core.
    #[arg(long, global = true, default_value_t = 0, env = "MPI_ENGINE_THREADS")]
    threads: usize,

    #[arg(long, global = true, default_value = "warn")]
    log_level: log::LevelFilter,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Render a scene from a target camera.
    Render(RenderArgs),
    /// Depth, inverse depth or disparity from the alpha stack.
    Depth(DepthArgs),
    /// Materialise a hybrid scene into a full MPI.
    Expand(ExpandArgs),
    /// Apply an edit script to the lifted semantic layers.
    Edit(EditArgs),
    /// Score a prediction against ground truth.
    Metrics(MetricsArgs),
    /// Generate a synthetic scene with ground truth.
    Synth(SynthArgs),
    /// Print the default plane set.
    Planes(PlanesArgs),
}

#[derive(Args)]
#[group(id = "pose_source", required = true, multiple = false)]
pub struct PoseArgs {
    /// Pose JSON file: {"rotation": [[..],[..],[..]], "translation": [..]}.
    #[arg(long, group = "pose_source")]
    pub pose: Option<PathBuf>,
    /// Pose JSON given inline.
    #[arg(long, group = "pose_source")]
    pub pose_inline: Option<String>,
    /// Camera moved this many metres to the right.
    #[arg(long, group = "pose_source", allow_negative_numbers = true)]
    pub lateral: Option<f64>,
    /// Camera moved this many metres forward.
    #[arg(long, group = "pose_source", allow_negative_numbers = true)]
    pub forward: Option<f64>,
}

#[derive(Clone, Copy, ValueEnum)]
pub enum Border {
    Transparent,
    Clamp,
}

#[derive(Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[command(flatten)]
    pub pose: PoseArgs,
    /// Target intrinsics JSON; defaults to the reference camera.
    #[arg(long)]
    pub target_intrinsics: Option<PathBuf>,
    /// Output image (.pfm, .png or .raw). `<stem>_transmittance.pfm` is
    /// written alongside.
    #[arg(long)]
    pub out: PathBuf,
    /// Divide by coverage instead of compositing over black.
    #[arg(long)]
    pub normalized: bool,
    #[arg(long, value_enum, default_value = "transparent")]
    pub border: Border,
}

#[derive(Args)]
pub struct DepthArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Composite 1/d instead of d.
    #[arg(long)]
    pub inverse: bool,
    /// Divide by coverage.
    #[arg(long)]
    pub normalized: bool,
    /// Convert to disparity fx·baseline/depth.
    #[arg(long)]
    pub disparity: bool,
    /// Focal length for --disparity; defaults to the scene's fx.
    #[arg(long)]
    pub fx: Option<f64>,
    #[arg(long, default_value_t = mpi_core::mpi::DEFAULT_BASELINE)]
    pub baseline: f64,
    /// Output map (.pfm or .raw).
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct ExpandArgs {
    #[arg(long)]
    pub scene: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct EditArgs {
    #[arg(long)]
    pub scene: PathBuf,
    /// Edit script JSON.
    #[arg(long)]
    pub script: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MetricKind {
    Sem,
    Depth,
    Photo,
}

#[derive(Args)]
pub struct MetricsArgs {
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long, value_enum)]
    pub kind: MetricKind,
    /// Depth window `min:max` for --kind depth.
    #[arg(long, default_value = "1:100")]
    pub range: String,
    /// Class count for --kind sem; defaults to the largest label seen plus one.
    #[arg(long)]
    pub num_classes: Option<usize>,
    /// Ground-truth label excluded from --kind sem.
    #[arg(long, default_value_t = 255)]
    pub ignore: u32,
    /// JSON output file, or `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Synthetic layout JSON.
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct PlanesArgs {
    #[arg(long, default_value_t = 1.0)]
    pub near: f64,
    #[arg(long, default_value_t = 100.0)]
    pub far: f64,
    #[arg(long, default_value_t = 32)]
    pub m: usize,
    /// JSON output file, or `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

/// Errors raised by the front end itself, before the library is involved.
#[derive(Debug)]
pub struct Usage(pub String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<mpi_core::Error>() {
        return match e.kind() {
            ErrorKind::Validation => 2,
            ErrorKind::Numeric => 3,
            ErrorKind::Io => 4,
        };
    }
    if err.downcast_ref::<Usage>().is_some() {
        return 2;
    }
    4
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .filter_level(cli.log_level)
        .format_timestamp(None)
        .init();
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        log::warn!("could not configure the thread pool: {e}");
    }
    let result = match &cli.command {
        Command::Render(a) => cmd::render(a),
        Command::Depth(a) => cmd::depth(a),
        Command::Expand(a) => cmd::expand(a),
        Command::Edit(a) => cmd::edit(a),
        Command::Metrics(a) => cmd::metrics(a),
        Command::Synth(a) => cmd::synth(a),
        Command::Planes(a) => cmd::planes(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
