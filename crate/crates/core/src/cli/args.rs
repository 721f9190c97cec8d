use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::grassmann::DEFAULT_SEED;

#[derive(Parser, Debug)]
#[command(name = "calibr", version, about = "Numerical checks for constant calibrations on R^n")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Option<Command>,
    /// Run from a JSON config file instead of a subcommand.
    #[arg(long, global = true, conflicts_with_all = ["seed", "format", "output"])]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (falls back to CALIBR_THREADS, then all cores).
    #[arg(long, global = true, env = "CALIBR_THREADS")]
    pub threads: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Report path; stdout when absent.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

/// Everything a run depends on. Reports embed it, and `--config` reads it back.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub format: Option<Format>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Subcommand, Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// List catalogue calibrations or dump one as a form spec.
    Catalogue(CatalogueArgs),
    /// Comass by multistart ascent.
    Comass(ComassArgs),
    /// Sample the φ-Grassmannian.
    Gsample(GsampleArgs),
    /// Span of G(φ), restricted form and ellipticity.
    Reduce(ReduceArgs),
    /// Sign of a form on G(φ).
    Positivity(PositivityArgs),
    /// Cone, convex hull and φ(ξ) = 1 agreement for a mass-one p-vector.
    Lemma25(Lemma25Args),
    /// Mass-norm bracket of a p-vector.
    Massnorm(MassnormArgs),
    /// φ-plurisubharmonicity of a field at probe points.
    Psh(PshArgs),
    /// Residual of the pluriharmonic-mod-d split at a point.
    Modd(ModdArgs),
    /// φ-flatness of the level set through a point.
    Flat(FlatArgs),
    /// Normality by random hyperplane restrictions.
    Normality(NormalityArgs),
    /// φ-positivity and calibration gap of a polyhedral current.
    CurrentCheck(CurrentCheckArgs),
    /// Weak Poisson-Jensen identity on a meshed φ-submanifold.
    Green(GreenArgs),
    /// Maximum-principle checks on a meshed φ-submanifold.
    Maxprinciple(MaxprincipleArgs),
    /// Finite boundary duality (primal atoms vs dual test form).
    Duality(DualityArgs),
    /// Finite Poisson-Jensen duality (Jensen measure vs psh separator).
    Jensen(JensenArgs),
    /// Run the acceptance suite.
    VerifyAll(VerifyAllArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Catalogue(_) => "catalogue",
            Command::Comass(_) => "comass",
            Command::Gsample(_) => "gsample",
            Command::Reduce(_) => "reduce",
            Command::Positivity(_) => "positivity",
            Command::Lemma25(_) => "lemma25",
            Command::Massnorm(_) => "massnorm",
            Command::Psh(_) => "psh",
            Command::Modd(_) => "modd",
            Command::Flat(_) => "flat",
            Command::Normality(_) => "normality",
            Command::CurrentCheck(_) => "current-check",
            Command::Green(_) => "green",
            Command::Maxprinciple(_) => "maxprinciple",
            Command::Duality(_) => "duality",
            Command::Jensen(_) => "jensen",
            Command::VerifyAll(_) => "verify-all",
        }
    }
}

// Every argument struct doubles as the JSON shape of its config section, so
// defaults live in one place: `Default` parses an empty command line.
macro_rules! defaults_from_clap {
    ($($t:ty),*) => {$(
        impl Default for $t {
            fn default() -> Self {
                #[derive(Parser)]
                struct Wrap {
                    #[command(flatten)]
                    inner: $t,
                }
                Wrap::parse_from(["calibr"]).inner
            }
        }
    )*};
}

defaults_from_clap!(
    CatalogueArgs,
    ComassArgs,
    GsampleArgs,
    ReduceArgs,
    PositivityArgs,
    Lemma25Args,
    MassnormArgs,
    PshArgs,
    ModdArgs,
    FlatArgs,
    NormalityArgs,
    CurrentCheckArgs,
    GreenArgs,
    MaxprincipleArgs,
    DualityArgs,
    JensenArgs,
    VerifyAllArgs
);

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CatalogueArgs {
    #[arg(long)]
    pub list: bool,
    /// Selector to dump, e.g. `kaehler:3,2`.
    #[arg(long)]
    pub dump: Option<String>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ComassArgs {
    /// Catalogue selector (`omega4`, `kaehler:3,2`, `lambda:0.5`) or form JSON path.
    #[arg(long)]
    pub cal: Option<String>,
    /// Form spec JSON (any form, not necessarily a calibration).
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long, default_value_t = 64)]
    pub multistarts: usize,
    #[arg(long, default_value_t = 2000)]
    pub max_iter: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GsampleArgs {
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Planes closer than this (radians) are merged.
    #[arg(long, default_value_t = 1e-3)]
    pub dedup_angle: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ReduceArgs {
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 24)]
    pub count: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PositivityArgs {
    /// Form spec JSON to classify.
    #[arg(long)]
    pub form: Option<PathBuf>,
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 24)]
    pub count: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Lemma25Args {
    /// p-vector in form-spec JSON.
    #[arg(long)]
    pub pvector: Option<PathBuf>,
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 24)]
    pub count: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MassnormArgs {
    #[arg(long)]
    pub pvector: Option<PathBuf>,
    /// Seed the decomposition with sampled planes of this calibration.
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 24)]
    pub count: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PshArgs {
    /// `builtin:NAME` or a polynomial JSON path.
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub cal: Option<String>,
    /// `grid:(a..b)^n:k`, `random:N` or `point:x1,…,xn`.
    #[arg(long, default_value = "random:16")]
    pub probes: String,
    #[arg(long, default_value_t = 24)]
    pub count: usize,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModdArgs {
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub cal: Option<String>,
    /// Comma-separated point.
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 24)]
    pub count: usize,
    /// Residual (relative to the Hessian form) counted as zero.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FlatArgs {
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub x: Option<String>,
    #[arg(long, default_value_t = 24)]
    pub samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NormalityArgs {
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 50)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CurrentCheckArgs {
    /// Mesh file, or a generator: `disc:H`, `tilted:THETA,H`, `graph:H`, `cap:HEIGHT,H`.
    #[arg(long)]
    pub mesh: Option<String>,
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    /// Per-simplex φ-values as CSV.
    #[arg(long)]
    pub emit_csv: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GreenModeArg {
    Auto,
    Exact,
    Discrete,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GreenArgs {
    #[arg(long)]
    pub mesh: Option<String>,
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub x_index: usize,
    /// `builtin:set1` or a comma list of fields.
    #[arg(long, default_value = "builtin:set1")]
    pub tests: String,
    #[arg(long, value_enum, default_value_t = GreenModeArg::Auto)]
    pub mode: GreenModeArg,
    /// Largest tangent-plane deviation from G(φ).
    #[arg(long, default_value_t = 1e-9)]
    pub flatness_tol: f64,
    /// Residual accepted as passing.
    #[arg(long, default_value_t = 5e-3)]
    pub tol: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MaxModeArg {
    Bounds,
    Lemma58,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MaxprincipleArgs {
    #[arg(long)]
    pub mesh: Option<String>,
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long)]
    pub field: Option<String>,
    #[arg(long, value_enum, default_value_t = MaxModeArg::Bounds)]
    pub mode: MaxModeArg,
    #[arg(long, default_value_t = 1e-9)]
    pub flatness_tol: f64,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long, default_value_t = 24)]
    pub count: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DualityArgs {
    #[arg(long)]
    pub cal: Option<String>,
    /// JSON list of points.
    #[arg(long)]
    pub sites: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub deg: u32,
    /// JSON `{"atoms": [{"point": …, "plane": [[…], …], "weight": …}]}`.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Mass bound on the primal.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Sampled planes added to the dictionary.
    #[arg(long, default_value_t = 12)]
    pub count: usize,
    /// Batch of random instances (CSV output).
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 4)]
    pub sites_per_instance: usize,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct JensenArgs {
    #[arg(long)]
    pub cal: Option<String>,
    #[arg(long)]
    pub sites: Option<PathBuf>,
    /// Comma-separated 0-based site indices.
    #[arg(long = "K")]
    #[serde(rename = "K")]
    pub k: Option<String>,
    /// 0-based site index.
    #[arg(long)]
    pub x: Option<usize>,
    #[arg(long, default_value_t = 2)]
    pub deg: u32,
    #[arg(long, default_value_t = 12)]
    pub count: usize,
    #[arg(long)]
    pub random: Option<usize>,
    /// Size of K in random instances.
    #[arg(long, default_value_t = 8)]
    pub k_size: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub support_tol: f64,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifyAllArgs {
    /// Comma-separated criterion numbers; all when absent.
    #[arg(long)]
    pub only: Option<String>,
}
