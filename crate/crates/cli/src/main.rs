//! `steerfiber` command-line front end.
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 runtime error.

mod commands;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use steerfiber::reach::{FiberMode, Gating};

/// Kinematics and reachable-workspace analysis for a tendon-driven
/// notched-sheath laser fiber. Lengths are in mm, angles in degrees, power in
/// W.
#[derive(Debug, Parser)]
#[command(name = "steerfiber", version)]
pub struct Cli {
    /// TOML run configuration (sections sheath, scope, beam, sampling, io);
    /// flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    /// Worker threads for parallel stages (0 = all cores). Results do not
    /// depend on this.
    #[arg(long, global = true, default_value_t = 0, value_name = "COUNT")]
    pub threads: usize,

    /// Log progress to stderr (repeat for more detail).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fiber tip pose and backbone for one actuation state, as JSON.
    Fk(FkArgs),
    /// Bend angle against tendon displacement over the full stroke, as CSV
    /// (dl_mm, phi_deg).
    BendCurve(BendCurveArgs),
    /// Design limits of the sheath as JSON: maximum bend angle (deg), minimum
    /// bend radius (mm), neutral-plane offset (mm), closure displacement (mm).
    Limits(OutArgs),
    /// Reachable-workspace map over an anatomy mesh: colored PLY, JSON
    /// summary and per-face CSV.
    Workspace(WorkspaceArgs),
    /// Least-squares line through measured bends. Input CSV columns dl_mm,
    /// phi_deg; JSON out.
    Fit(FitArgs),
    /// Rigid registration of corresponding fiducials. Input CSVs with
    /// columns x, y, z (mm), matched by row; JSON out.
    Register(RegisterArgs),
    /// Optical power delivered at the fiber tip, as JSON.
    Power(PowerArgs),
    /// Write the bundled synthetic larynx phantom as STL (mm).
    GenPhantom(GenPhantomArgs),
}

#[derive(Debug, Args)]
pub struct OutArgs {
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FkArgs {
    /// Tendon displacement (mm).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub dl: f64,
    /// Axial fiber translation (mm).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub z: f64,
    /// Axial fiber rotation (deg).
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    /// Clamp a displacement beyond notch closure instead of failing.
    #[arg(long)]
    pub clamp: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct BendCurveArgs {
    /// Number of equal displacement intervals from zero to full stroke.
    #[arg(long, default_value_t = 20, value_name = "COUNT")]
    pub steps: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Steerable,
    Straight,
}

impl From<ModeArg> for FiberMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Steerable => FiberMode::Steerable,
            ModeArg::Straight => FiberMode::Straight,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GatingArg {
    /// Beam hit and camera line of sight in the same configuration.
    Joint,
    /// Beam hit in any configuration, camera view in any configuration.
    Pooled,
}

impl From<GatingArg> for Gating {
    fn from(g: GatingArg) -> Self {
        match g {
            GatingArg::Joint => Gating::Joint,
            GatingArg::Pooled => Gating::Pooled,
        }
    }
}

#[derive(Debug, Args)]
pub struct WorkspaceArgs {
    /// Anatomy mesh, binary or ASCII STL (default: bundled phantom).
    #[arg(long, value_name = "PATH")]
    pub mesh: Option<PathBuf>,
    /// Factor applied to mesh coordinates to obtain mm.
    #[arg(long, value_name = "FACTOR")]
    pub scale: Option<f64>,
    /// Number of configurations to sample.
    #[arg(long, value_name = "COUNT")]
    pub n: Option<usize>,
    /// Laser rays cast per configuration.
    #[arg(long, value_name = "COUNT")]
    pub rays: Option<usize>,
    /// Random seed (echoed in the summary).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Whether the tendon is actuated.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// How camera visibility gates laser hits.
    #[arg(long, value_enum)]
    pub gating: Option<GatingArg>,
    /// Extra collision margin around the scope and fiber (mm).
    #[arg(long, value_name = "MM")]
    pub clearance: Option<f64>,
    /// Full beam divergence angle (deg).
    #[arg(long, value_name = "DEG")]
    pub divergence: Option<f64>,
    /// Colored reachability mesh (PLY).
    #[arg(long, value_name = "PATH")]
    pub ply: Option<PathBuf>,
    /// JSON summary (default: stdout when no path is configured).
    #[arg(long, value_name = "PATH")]
    pub summary: Option<PathBuf>,
    /// Per-face CSV: face, area_mm2, laser_hits, reachable.
    #[arg(long, value_name = "PATH")]
    pub faces: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Measured samples, CSV with header dl_mm,phi_deg.
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RegisterArgs {
    /// Points in the source frame, CSV with header x,y,z (mm).
    #[arg(long, value_name = "PATH")]
    pub src: PathBuf,
    /// Corresponding points in the destination frame, same layout and order.
    #[arg(long, value_name = "PATH")]
    pub dst: PathBuf,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Laser source power (W).
    #[arg(long, value_name = "W")]
    pub input_w: f64,
    /// Fiber bend radius (mm, at least 6; `inf` for a straight fiber).
    #[arg(long, value_name = "MM", default_value_t = f64::INFINITY)]
    pub bend_radius: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct GenPhantomArgs {
    /// Destination STL file.
    #[arg(long, value_name = "PATH")]
    pub out: PathBuf,
    /// Write ASCII STL instead of binary.
    #[arg(long)]
    pub ascii: bool,
}

/// Error tagged with the exit code it maps to.
#[derive(Debug)]
pub enum Failure {
    Config(anyhow::Error),
    Runtime(anyhow::Error),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 3,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (kind, err) = match &f {
                Failure::Config(e) => ("configuration error", e),
                Failure::Runtime(e) => ("error", e),
            };
            eprintln!("steerfiber: {kind}: {err:#}");
            ExitCode::from(f.code())
        }
    }
}
