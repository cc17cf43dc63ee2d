//! Config-file schema. Every document is schema-validated with unknown keys
//! rejected, so typos fail loudly before any computation starts.

use std::path::PathBuf;

use anyhow::{bail, Context};
use famvar::{
    BooleanFunction, Distribution, Embedding, LabeledFamily, LossKind,
    PatternFamilySpec,
};
use serde::{Deserialize, Serialize};

/// Where a family comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum FamilySource {
    /// All parities on `n` inputs under the uniform distribution.
    Parity { n: usize },
    /// A `family/v1` manifest on disk.
    Manifest { path: PathBuf },
    /// A selector/shift family built in place.
    Pattern {
        inner: InnerSource,
        big_n: usize,
        mu: MuSource,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InnerSource {
    /// The m-level AND-of-ORs on 4m³ inputs.
    AndOr { m: usize },
    /// Explicit ±1 truth table.
    Table { n: usize, values: Vec<i8> },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuSource {
    Uniform,
    /// Explicit probability table over the inner cube; `normalize` rescales
    /// non-negative weights instead of requiring an exact unit sum.
    Table {
        values: Vec<f64>,
        #[serde(default)]
        normalize: bool,
    },
}

impl FamilySource {
    pub fn load(&self) -> anyhow::Result<LabeledFamily> {
        match self {
            FamilySource::Parity { n } => Ok(LabeledFamily::parity(*n)?),
            FamilySource::Manifest { path } => {
                let bytes = std::fs::read(path)
                    .with_context(|| format!("reading family manifest {}", path.display()))?;
                let manifest: famvar::family::FamilyManifest = serde_json::from_slice(&bytes)
                    .with_context(|| format!("parsing family manifest {}", path.display()))?;
                Ok(LabeledFamily::from_manifest(&manifest)?)
            }
            FamilySource::Pattern { inner, big_n, mu } => {
                let spec = pattern_spec(inner, *big_n, mu)?;
                Ok(famvar::build_pattern_family(spec)?.family)
            }
        }
    }
}

pub fn pattern_spec(
    inner: &InnerSource,
    big_n: usize,
    mu: &MuSource,
) -> anyhow::Result<PatternFamilySpec> {
    let inner_fn: BooleanFunction = match inner {
        InnerSource::AndOr { m } => famvar::mp_function(*m)?,
        InnerSource::Table { n, values } => BooleanFunction::new(*n, values.clone())?,
    };
    let n = inner_fn.dimension();
    let mu_dist = match mu {
        MuSource::Uniform => Distribution::uniform(n)?,
        MuSource::Table { values, normalize } => {
            if *normalize {
                Distribution::normalized(n, values.clone())?
            } else {
                Distribution::new(n, values.clone())?
            }
        }
    };
    Ok(PatternFamilySpec { inner: inner_fn, big_n, mu: mu_dist })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum EmbeddingSource {
    RandomSign { dim: usize, seed: u64 },
    RandomUniform { dim: usize, seed: u64 },
    Coordinate,
    /// JSON file holding one row of reals per cube point.
    File { path: PathBuf },
}

impl EmbeddingSource {
    pub fn load(&self, n: usize) -> anyhow::Result<Embedding> {
        match self {
            EmbeddingSource::RandomSign { dim, seed } => Ok(Embedding::random_sign(n, *dim, *seed)?),
            EmbeddingSource::RandomUniform { dim, seed } => {
                Ok(Embedding::random_uniform(n, *dim, *seed)?)
            }
            EmbeddingSource::Coordinate => Ok(Embedding::coordinate(n)?),
            EmbeddingSource::File { path } => {
                let bytes = std::fs::read(path)
                    .with_context(|| format!("reading embedding {}", path.display()))?;
                let rows: Vec<Vec<f64>> = serde_json::from_slice(&bytes)
                    .with_context(|| format!("parsing embedding {}", path.display()))?;
                Ok(Embedding::new(n, rows)?)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VarianceModeConfig {
    Auto,
    Exact,
    BoundsOnly,
}

impl Default for VarianceModeConfig {
    fn default() -> Self {
        VarianceModeConfig::Auto
    }
}

impl From<VarianceModeConfig> for famvar::VarianceMode {
    fn from(m: VarianceModeConfig) -> Self {
        match m {
            VarianceModeConfig::Auto => famvar::VarianceMode::Auto,
            VarianceModeConfig::Exact => famvar::VarianceMode::Exact,
            VarianceModeConfig::BoundsOnly => famvar::VarianceMode::BoundsOnly,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarianceConfig {
    pub family: FamilySource,
    #[serde(default)]
    pub mode: VarianceModeConfig,
    #[serde(default)]
    pub seed: u64,
}

/// Inputs for the closed-form bound evaluators. Each optional section is
/// evaluated only when present.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundsConfig {
    pub loss: LossKind,
    /// Family variance value (or certified upper bound) to plug in.
    pub var: f64,
    #[serde(default)]
    pub linear: Option<LinearBoundInputs>,
    #[serde(default)]
    pub shallow: Option<ShallowBoundInputs>,
    #[serde(default)]
    pub discrete: Option<DiscreteBoundInputs>,
    #[serde(default)]
    pub csq: Option<CsqBoundInputs>,
    #[serde(default)]
    pub gd: Option<GdBoundInputs>,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinearBoundInputs {
    pub b: f64,
    pub n_embed: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShallowBoundInputs {
    pub k: f64,
    pub r: f64,
    pub n: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscreteBoundInputs {
    pub k: f64,
    pub r: f64,
    pub n: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsqBoundInputs {
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdBoundInputs {
    pub b: f64,
    pub n_params: f64,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub sigma: Option<f64>,
    #[serde(default)]
    pub steps: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainLinearConfig {
    pub family: FamilySource,
    pub embedding: EmbeddingSource,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
    pub step_size: f64,
    pub steps: usize,
    pub radius: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_loss() -> LossKind {
    LossKind::Hinge
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum TableSpec {
    /// Explicit real table over the cube.
    Table { values: Vec<f64> },
    /// The i-th coordinate as a probe.
    Coordinate { index: usize },
    /// A parity over the given 0-based subset.
    Parity { subset: Vec<usize> },
    /// Seeded uniform entries in [−1, 1].
    Random { seed: u64 },
    Zero,
    /// A family member's own function.
    Member { index: usize },
}

impl TableSpec {
    pub fn materialize(&self, family: &LabeledFamily) -> anyhow::Result<Vec<f64>> {
        let n = family.dimension();
        let size = 1usize << n;
        Ok(match self {
            TableSpec::Table { values } => {
                if values.len() != size {
                    bail!("table has {} entries for a dimension-{n} cube", values.len());
                }
                values.clone()
            }
            TableSpec::Coordinate { index } => {
                if *index >= n {
                    bail!("coordinate {index} out of range for dimension {n}");
                }
                (0..size)
                    .map(|x| if (x >> index) & 1 == 1 { -1.0 } else { 1.0 })
                    .collect()
            }
            TableSpec::Parity { subset } => famvar::ParityDescriptor::new(n, subset.clone())?
                .materialize()
                .to_real(),
            TableSpec::Random { seed } => {
                use rand::Rng;
                use rand::SeedableRng;
                let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(*seed);
                (0..size).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()
            }
            TableSpec::Zero => vec![0.0; size],
            TableSpec::Member { index } => {
                let member = family
                    .members()
                    .get(*index)
                    .ok_or_else(|| anyhow::anyhow!("member {index} out of range"))?;
                member.f.to_real()
            }
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerScript {
    pub queries: Vec<TableSpec>,
    pub hypothesis: TableSpec,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsqConfig {
    pub family: FamilySource,
    pub tau: f64,
    #[serde(default = "default_loss")]
    pub loss: LossKind,
    pub max_queries: usize,
    #[serde(default)]
    pub store_tables: bool,
    pub learner: LearnerScript,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSource {
    /// Linear model over the identity embedding.
    CoordinateLinear,
    /// Linear model over a seeded ±1 embedding.
    RandomSignLinear { dim: usize, seed: u64 },
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GdModeConfig {
    Exact,
    Approx,
    Noisy,
}

impl From<GdModeConfig> for famvar::GdMode {
    fn from(m: GdModeConfig) -> Self {
        match m {
            GdModeConfig::Exact => famvar::GdMode::Exact,
            GdModeConfig::Approx => famvar::GdMode::Approx,
            GdModeConfig::Noisy => famvar::GdMode::Noisy,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GdConfig {
    pub family: FamilySource,
    pub model: ModelSource,
    pub mode: GdModeConfig,
    pub eta: f64,
    pub steps: usize,
    #[serde(default)]
    pub delta: f64,
    #[serde(default)]
    pub sigma: f64,
    #[serde(default)]
    pub seed: u64,
    /// Grid pitch for the first-step stuck analysis; defaults to `delta`.
    #[serde(default)]
    pub stuck_delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatternConfig {
    pub inner: InnerSource,
    pub big_n: usize,
    pub mu: MuSource,
    /// Also export the inner-function and mu pattern matrices as CSV.
    #[serde(default)]
    pub emit_matrices: bool,
    /// Also build and export the indicator-coordinate encoded family.
    #[serde(default)]
    pub encode: bool,
    #[serde(default)]
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportConfig {
    /// Result files produced by the other commands.
    pub inputs: Vec<PathBuf>,
    #[serde(default)]
    pub seed: u64,
}
