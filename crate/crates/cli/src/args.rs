//! Command-line surface. Parameter structs double as the `[params]` table of
//! a config file: field names are the config keys.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "roelab", version, about = "Seeded experiments on finite metric spaces and their operator algebras")]
pub struct Cli {
    /// TOML config with `command`, `seed` and a `[params]` table; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Report destination; stdout when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Option<Group>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Metric spaces: generation and expansion constants.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Operators: ε-propagation and distance to band operators.
    #[command(subcommand)]
    Oper(OperCmd),
    /// Partial-translation decompositions of bands.
    #[command(subcommand)]
    Translations(TranslationsCmd),
    /// Unitary representations and the band-approximation gap certificate.
    #[command(subcommand)]
    Reps(RepsCmd),
    /// Random subspaces and restricted projection norms.
    #[command(subcommand)]
    Randsub(RandsubCmd),
    /// Block-diagonal projections over expander families.
    #[command(subcommand)]
    Ql(QlCmd),
    /// Property-A kernels and finite-propagation approximation.
    #[command(subcommand)]
    Propa(PropaCmd),
    /// Run a fixed battery of small experiments.
    All(AllParams),
    /// Compare two reports field by field.
    Diff(DiffArgs),
}

#[derive(Debug, Subcommand)]
pub enum SpaceCmd {
    Gen(SpaceGenParams),
    Kappa(SpaceKappaParams),
}

#[derive(Debug, Subcommand)]
pub enum OperCmd {
    EpsProp(EpsPropParams),
    BandDist(BandDistParams),
}

#[derive(Debug, Subcommand)]
pub enum TranslationsCmd {
    Decompose(DecomposeParams),
}

#[derive(Debug, Subcommand)]
pub enum RepsCmd {
    IrrCheck(IrrCheckParams),
    GapCert(GapCertParams),
    TheoremARadius(TheoremARadiusParams),
}

#[derive(Debug, Subcommand)]
pub enum RandsubCmd {
    Mc(McParams),
    Levy(LevyParams),
    Entropy(EntropyParams),
    Agree(AgreeParams),
}

#[derive(Debug, Subcommand)]
pub enum QlCmd {
    Build(QlBuildParams),
    Profile(QlProfileParams),
    Witness(QlWitnessParams),
}

#[derive(Debug, Subcommand)]
pub enum PropaCmd {
    Sz(SzParams),
    Lip(LipParams),
    Rademacher(RademacherParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KappaModeArg {
    Exact,
    Spectral,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EpsModeArg {
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PolicyArg {
    Saturate,
    Strict,
}

/// Writes a space as JSON: `{label, n, metric}`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceGenParams {
    /// Space description, e.g. `regular:64:4:7`, `far:5`, `path:10`.
    #[arg(long, default_value = "regular:16:4:1")]
    pub space: String,
    /// Random d-regular graph on n points seeded by `--seed`; overrides `--space`.
    #[arg(long, num_args = 2, value_names = ["N", "D"])]
    pub regular: Option<Vec<usize>>,
}

/// `{n, radius, kappa: {value, kind, witness}}`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceKappaParams {
    #[arg(long, default_value = "regular:16:4:1")]
    pub space: String,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: KappaModeArg,
    #[arg(short = 'R', default_value_t = 1.0)]
    pub r: f64,
}

/// `{operator, norm, eps, propagation: {lower, upper, exact, witness}}`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsPropParams {
    #[arg(long, default_value = "path:10")]
    pub space: String,
    /// Operator JSON file; a seeded random operator when absent.
    #[arg(long)]
    pub operator: Option<String>,
    /// Band radius of the random operator.
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    /// Norm of the full random perturbation added to the band part.
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(long, default_value_t = 0.05)]
    pub eps: f64,
    #[arg(long, value_enum, default_value = "exact")]
    pub mode: EpsModeArg,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

/// `{operator, norm, distance: {radius, lower, upper, exhaustive, witness}}`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BandDistParams {
    #[arg(long, default_value = "path:10")]
    pub space: String,
    #[arg(long)]
    pub operator: Option<String>,
    #[arg(long, default_value_t = 1.0)]
    pub band: f64,
    #[arg(long, default_value_t = 0.1)]
    pub noise: f64,
    #[arg(short = 'R', default_value_t = 1.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

/// `{n, growth, cap, part_count, verified, decomposition: {R, parts}}`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecomposeParams {
    #[arg(long, default_value = "path:8")]
    pub space: String,
    #[arg(short = 'R', default_value_t = 1.0)]
    pub r: f64,
}

/// `{group, dim, order, structure, homomorphism_error, certificate, trials,
/// max_averaged_norm, bound, slack, holds}`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IrrCheckParams {
    /// `heis:p`, `sym:m` or `perm:m`.
    #[arg(long, default_value = "heis:3")]
    pub group: String,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
}

/// The full certificate report: achieved ε, gap bound and each checked inequality.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GapCertParams {
    #[arg(long, default_value = "heis:5")]
    pub group: String,
    #[arg(long, default_value = "far:5")]
    pub space: String,
    #[arg(short = 'R', default_value_t = 1.0)]
    pub r: f64,
}

/// `{n, threshold, radius}` with `radius = -1` when no radius qualifies.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TheoremARadiusParams {
    #[arg(long, default_value = "heis:67")]
    pub group: String,
    #[arg(long, default_value = "far:67")]
    pub space: String,
}

/// Per-trial restricted projection norms with witness subsets.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McParams {
    #[arg(long, default_value_t = 400)]
    pub d: usize,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    #[arg(long, default_value_t = 0.04)]
    pub delta: f64,
    #[arg(long, default_value_t = 3.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 200)]
    pub trials: usize,
}

/// Median and tail checks for `‖P_E v‖` with `v` uniform on the sphere.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LevyParams {
    #[arg(long, default_value_t = 400)]
    pub d: usize,
    #[arg(long, default_value_t = 0.04)]
    pub delta: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

/// The subset-count entropy bound on a grid of `(d, δ)`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntropyParams {
    #[arg(long, value_delimiter = ',', default_value = "100,200,300,400,500,600,700,800,900,1000")]
    pub d: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.02,0.04,0.1,0.25")]
    pub delta: Vec<f64>,
}

/// Exact against greedy restricted norms over consecutive seeds.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgreeParams {
    #[arg(long, default_value_t = 12)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub n: usize,
    #[arg(long, default_value_t = 0.25)]
    pub delta: f64,
    #[arg(long, default_value_t = 50)]
    pub seeds: usize,
    #[arg(long, default_value_t = 0.05)]
    pub tol: f64,
}

/// Family, schedule and per-member selection summary.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlBuildParams {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub members: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_rejects: usize,
}

/// ε-propagation brackets per ε and the sampled rectangle mechanism check.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlProfileParams {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub members: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_rejects: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.5,0.3,0.2")]
    pub eps: Vec<f64>,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

/// Bounds on the distance from the assembled projection to the band of radius `R`.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QlWitnessParams {
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128")]
    pub members: Vec<usize>,
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, default_value_t = 1.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 3.0)]
    pub c0: f64,
    #[arg(long, default_value_t = 1000)]
    pub max_rejects: usize,
    #[arg(short = 'R', default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1000)]
    pub budget: usize,
}

/// `δ`, `S`, `T`, error, bound and slack for each random contraction.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SzParams {
    /// Interval length.
    #[arg(long = "N", default_value_t = 300)]
    pub n: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub eps: f64,
    #[arg(short = 'R', default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 1)]
    pub contractions: usize,
    #[arg(long, value_enum, default_value = "saturate")]
    pub policy: PolicyArg,
}

/// Commutator estimates on random multipliers and contractions.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LipParams {
    #[arg(long = "N", default_value_t = 200)]
    pub n: usize,
    #[arg(short = 'R', default_value_t = 2.0)]
    pub r: f64,
    #[arg(long, default_value_t = 200)]
    pub instances: usize,
}

/// Moment, truncation, smoothing and reconstruction checks for the Rademacher field.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RademacherParams {
    #[arg(long = "N", default_value_t = 100)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub delta: f64,
    #[arg(short = 'R', default_value_t = 1.0)]
    pub r: f64,
    /// `ε` of the test contraction.
    #[arg(long, default_value_t = 0.25)]
    pub eps: f64,
    #[arg(long, default_value_t = 2000)]
    pub trials: usize,
}

/// One line per battery entry: command, verdict, wall time.
#[derive(Debug, Clone, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AllParams {
    /// Use the reduced sizes.
    #[arg(long, default_value_t = false)]
    pub smoke: bool,
}

#[derive(Debug, Clone, Args)]
pub struct DiffArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
}
