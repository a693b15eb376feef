//! `nesots` command-line driver.

mod commands;
mod io;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "nesots", version, about = "Blue-noise sampling by sliced optimal transport on curved spaces and meshes")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a target measure on the sphere S^d.
    SampleSphere(SphereArgs),
    /// Sample a target measure on the hyperboloid H^d.
    SampleHyperbolic(HyperArgs),
    /// Sample lines through the origin, rotations or affine lines.
    SampleProjective(ProjArgs),
    /// Sample a triangle mesh through a spherical or hyperbolic embedding.
    SampleMesh(MeshArgs),
    /// Spectrum, pair correlation and sliced energy of a point set.
    Analyze(AnalyzeArgs),
}

/// Optimizer flags shared by the sampling commands.
#[derive(Args, Clone)]
pub struct OptArgs {
    /// Output samples.
    #[arg(long)]
    pub n: usize,
    /// Target atoms drawn by built-in generators; must match the file size
    /// for file targets.
    #[arg(long)]
    pub m: Option<usize>,
    /// Iterations (per patch on meshes of genus >= 2).
    #[arg(long = "K", alias = "iterations")]
    pub k: Option<usize>,
    /// Slices per iteration.
    #[arg(long = "L", alias = "batch", default_value_t = 32)]
    pub l: usize,
    #[arg(long, default_value_t = 1.0)]
    pub gamma0: f64,
    /// Per-iteration step multiplier; by default the last step is 5% of the
    /// first.
    #[arg(long)]
    pub decay: Option<f64>,
    /// Weiszfeld smoothing threshold.
    #[arg(long, default_value_t = 1e-7)]
    pub tau: f64,
    /// Ground cost exponent.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub p: u8,
    #[arg(long, value_enum, default_value_t = PoolingArg::Median)]
    pub pooling: PoolingArg,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Seed of built-in target generators; defaults to --seed.
    #[arg(long)]
    pub target_seed: Option<u64>,
    /// Fixed probe slices for the energy trace; 0 disables it.
    #[arg(long, default_value_t = 8)]
    pub trace_probes: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum PoolingArg {
    Mean,
    Median,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum SphereTarget {
    Uniform,
    /// Equal-area strata with one point each (S^2 only).
    Stratified,
    /// Three-lobe von Mises-Fisher mixture (S^2 only).
    Mixture,
    Cap,
}

#[derive(Args)]
pub struct SphereArgs {
    #[command(flatten)]
    pub opt: OptArgs,
    /// Target points file; overrides --builtin.
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SphereTarget::Uniform)]
    pub builtin: SphereTarget,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Cap center, comma separated.
    #[arg(long, default_value = "0,0,1")]
    pub cap_center: String,
    /// Cap angular radius.
    #[arg(long, default_value_t = 0.5)]
    pub cap_angle: f64,
}

#[derive(Args)]
pub struct HyperArgs {
    #[command(flatten)]
    pub opt: OptArgs,
    #[arg(long)]
    pub target: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    /// Time coordinate bound of the built-in uniform ball.
    #[arg(long, default_value_t = 2.0)]
    pub tmax: f64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum ProjMode {
    Points,
    /// Unit quaternions; rotation matrices are written alongside.
    Quaternion,
    /// Affine lines `a x + b y + c = 0` of the plane.
    Lines,
}

#[derive(Args)]
pub struct ProjArgs {
    #[command(flatten)]
    pub opt: OptArgs,
    #[arg(long, value_enum, default_value_t = ProjMode::Points)]
    pub mode: ProjMode,
    /// Target file: unit vectors (points, quaternion) or `a,b,c` rows (lines).
    /// Antipodes are added on ingestion.
    #[arg(long)]
    pub target: Option<PathBuf>,
    /// Dimension of P^d in points mode.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq)]
pub enum DensityOn {
    Vertex,
    Face,
}

#[derive(Args)]
pub struct MeshArgs {
    #[command(flatten)]
    pub opt: OptArgs,
    /// OBJ or PLY mesh.
    #[arg(long)]
    pub mesh: PathBuf,
    /// `id,value` density rows.
    #[arg(long)]
    pub density: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DensityOn::Vertex)]
    pub density_on: DensityOn,
    /// Spherical layout for genus 0: a mesh with the same faces whose
    /// vertices lie on the unit sphere.
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Build a smoothed central projection when no layout is given.
    #[arg(long)]
    pub fallback_embed: bool,
    #[arg(long, default_value_t = 50)]
    pub embed_iters: usize,
    /// Patch rounds N.
    #[arg(long, default_value_t = 500)]
    pub rounds: usize,
    /// Time coordinate threshold of the local layouts.
    #[arg(long, default_value_t = 1.5)]
    pub eps: f64,
    #[arg(long, default_value_t = 16)]
    pub trace_patches: usize,
    #[arg(long, default_value_t = 64)]
    pub patch_probes: usize,
    /// Draw the target from equal-weight strata instead of i.i.d.
    #[arg(long)]
    pub stratified_target: bool,
    /// Conformal factor cache: read when present, written otherwise.
    #[arg(long)]
    pub yamabe_cache: Option<PathBuf>,
}

#[derive(Args)]
pub struct AnalyzeArgs {
    /// Points file.
    #[arg(long, conflicts_with = "samples")]
    pub points: Option<PathBuf>,
    /// Mesh samples file (`faceId,b0,b1,b2,...`); needs --mesh.
    #[arg(long, requires = "mesh")]
    pub samples: Option<PathBuf>,
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    /// Target points for the sliced energy.
    #[arg(long)]
    pub reference: Option<PathBuf>,
    #[arg(long, default_value_t = 32)]
    pub lmax: usize,
    #[arg(long, default_value_t = 64)]
    pub bins: usize,
    /// Largest pcf distance; defaults to pi on spheres and four mean
    /// spacings on meshes.
    #[arg(long)]
    pub rmax: Option<f64>,
    /// Uniform samples drawn for the mesh pcf reference.
    #[arg(long, default_value_t = 2048)]
    pub pcf_reference: usize,
    #[arg(long, default_value_t = 256)]
    pub probes: usize,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(1..=2))]
    pub p: u8,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn error_kind(err: &anyhow::Error) -> &'static str {
    use nesots::Error as E;
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<E>() {
            return match e {
                E::InvalidConfig(_) => "config",
                E::Empty(_) => "empty-input",
                E::Parse(_) => "parse",
                E::Io(_) => "io",
                E::OffManifold(_) => "off-manifold",
                E::UnsupportedGenus(_) => "unsupported-genus",
                E::Mesh(_) => "mesh",
                E::NoConvergence(_) => "no-convergence",
                E::DimensionMismatch { .. } | E::LengthMismatch(..) => "shape",
                _ => "numeric",
            };
        }
        if cause.downcast_ref::<std::io::Error>().is_some() {
            return "io";
        }
        if cause.downcast_ref::<serde_json::Error>().is_some() {
            return "parse";
        }
    }
    "error"
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    ExitCode::from(if kind == "usage" { 2 } else { 1 })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => return fail("usage", e.to_string().trim().to_string()),
    };
    let res = match cli.cmd {
        Cmd::SampleSphere(a) => commands::sample_sphere(&a),
        Cmd::SampleHyperbolic(a) => commands::sample_hyperbolic(&a),
        Cmd::SampleProjective(a) => commands::sample_projective(&a),
        Cmd::SampleMesh(a) => commands::sample_mesh(&a),
        Cmd::Analyze(a) => commands::analyze(&a),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(error_kind(&e), format!("{e:#}")),
    }
}
