//! Declarative experiment configuration files.
//!
//! A config file is a TOML document that maps one-to-one onto
//! [`ExperimentSpec`], plus an output directory and a list of algorithm
//! variants to sweep. Unknown keys are rejected; every omitted field takes
//! a documented default (see the README table). Resolution materializes
//! everything the seed determines — per-node noise exponents and per-node
//! `p` — so the emitted manifest parses back to the identical spec.

use serde::Deserialize;

use crate::adapt::{AlgorithmFamily, AlgorithmSpec, DiffusionMode};
use crate::error::{Error, Result};
use crate::sim::{
    draw_p_per_node, AdaptationWeights, CombinationRule, DerivedSeeds, ExperimentSpec, NoiseModel,
    PlantSpec, TopologySpec,
};

/// Largest master seed a TOML manifest can carry (TOML integers are i64).
pub const MAX_MASTER_SEED: u64 = i64::MAX as u64;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfigFile {
    /// Where CSV traces and manifests go. Default `out`.
    #[serde(default = "defaults::out_dir")]
    pub out_dir: String,
    /// Diffusion iterations per run. Default 5000.
    #[serde(default = "defaults::iterations")]
    pub iterations: usize,
    /// Monte-Carlo runs averaged per variant. Default 25.
    #[serde(default = "defaults::runs")]
    pub runs: usize,
    /// Master seed; all streams derive from it. Default 1.
    #[serde(default = "defaults::master_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub topology: TopologyConfig,
    #[serde(default)]
    pub plant: PlantConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    /// Algorithm variants to sweep; at least one.
    pub algorithms: Vec<AlgorithmConfig>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TopologyConfig {
    pub nodes: usize,
    pub target_degree: usize,
    pub combination_rule: CombinationRule,
    pub adaptation_weights: AdaptationWeights,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        Self {
            nodes: 20,
            target_degree: 4,
            combination_rule: CombinationRule::Uniform,
            adaptation_weights: AdaptationWeights::SelfOnly,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlantConfig {
    pub memory_length: usize,
    pub active_count: usize,
}

impl Default for PlantConfig {
    fn default() -> Self {
        Self {
            memory_length: 4,
            active_count: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Gaussian,
    Sas,
}

/// Per-node alpha assignment for alpha-stable noise: one value for all
/// nodes, an explicit list, or a linear ramp over the node index.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum AlphaChoice {
    Fixed(f64),
    PerNode(Vec<f64>),
    Ramp { min: f64, max: f64 },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct NoiseConfig {
    pub kind: NoiseKind,
    /// Gaussian only. Default 0.01.
    pub variance: Option<f64>,
    /// Alpha-stable only: the dispersion. Default 0.01.
    pub scale: Option<f64>,
    /// Alpha-stable only. Default: ramp 1.2 -> 1.8 across nodes.
    pub alpha: Option<AlphaChoice>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            kind: NoiseKind::Gaussian,
            variance: None,
            scale: None,
            alpha: None,
        }
    }
}

/// Per-node exponent choice for the p families: drawn per node from the
/// seeded exponent stream, one shared value, or an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum PChoice {
    Keyword(PKeyword),
    Fixed(f64),
    PerNode(Vec<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PKeyword {
    Random,
}

impl Default for PChoice {
    fn default() -> Self {
        PChoice::Keyword(PKeyword::Random)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmConfig {
    pub family: AlgorithmFamily,
    /// Variant label, used for output file names and figure columns.
    /// Default: family name, plus `-l0` when l0 is enabled.
    #[serde(default)]
    pub name: Option<String>,
    pub mu: f64,
    /// Default 1.0.
    #[serde(default = "defaults::delta")]
    pub delta: f64,
    /// Enable the zero-attraction term. Default false.
    #[serde(default)]
    pub l0: bool,
    /// Zero-attraction strength. Default 0.
    #[serde(default)]
    pub rho: f64,
    /// Attraction-region parameter. Default 10.
    #[serde(default = "defaults::beta")]
    pub beta: f64,
    /// `atc` or `cta`. Default `atc`.
    #[serde(default = "defaults::mode")]
    pub mode: DiffusionMode,
    /// Exponent for dlmp/dllmp. Default `"random"`.
    #[serde(default)]
    pub p: PChoice,
}

mod defaults {
    use crate::adapt::DiffusionMode;

    pub fn out_dir() -> String {
        "out".to_string()
    }
    pub fn iterations() -> usize {
        5000
    }
    pub fn runs() -> usize {
        25
    }
    pub fn master_seed() -> u64 {
        1
    }
    pub fn delta() -> f64 {
        1.0
    }
    pub fn beta() -> f64 {
        10.0
    }
    pub fn mode() -> DiffusionMode {
        DiffusionMode::Atc
    }
}

/// Output of [`resolve`]: one fully-resolved spec per variant, in file
/// order, all sharing the non-algorithm sections.
#[derive(Debug, Clone)]
pub struct ResolvedExperiments {
    pub out_dir: String,
    pub variants: Vec<(String, ExperimentSpec)>,
}

fn resolve_noise(cfg: &NoiseConfig, nodes: usize) -> Result<NoiseModel> {
    match cfg.kind {
        NoiseKind::Gaussian => {
            if cfg.scale.is_some() || cfg.alpha.is_some() {
                return Err(Error::Config(
                    "gaussian noise takes `variance` only, not `scale`/`alpha`".into(),
                ));
            }
            Ok(NoiseModel::Gaussian {
                variance: cfg.variance.unwrap_or(0.01),
            })
        }
        NoiseKind::Sas => {
            if cfg.variance.is_some() {
                return Err(Error::Config(
                    "alpha-stable noise takes `scale`/`alpha`, not `variance`".into(),
                ));
            }
            let scale = cfg.scale.unwrap_or(0.01);
            let alphas = match cfg
                .alpha
                .clone()
                .unwrap_or(AlphaChoice::Ramp { min: 1.2, max: 1.8 })
            {
                AlphaChoice::Fixed(a) => vec![a; nodes],
                AlphaChoice::PerNode(list) => {
                    if list.len() != nodes {
                        return Err(Error::Config(format!(
                            "alpha list has {} entries for {} nodes",
                            list.len(),
                            nodes
                        )));
                    }
                    list
                }
                AlphaChoice::Ramp { min, max } => (0..nodes)
                    .map(|k| {
                        if nodes == 1 {
                            min
                        } else {
                            min + (max - min) * k as f64 / (nodes - 1) as f64
                        }
                    })
                    .collect(),
            };
            Ok(NoiseModel::Sas { scale, alphas })
        }
    }
}

fn resolve_p(
    choice: &PChoice,
    family: AlgorithmFamily,
    master_seed: u64,
    nodes: usize,
) -> Result<Vec<f64>> {
    if !family.uses_p() {
        return Ok(Vec::new());
    }
    match choice {
        PChoice::Keyword(PKeyword::Random) => Ok(draw_p_per_node(master_seed, nodes)),
        PChoice::Fixed(v) => Ok(vec![*v; nodes]),
        PChoice::PerNode(list) => {
            if list.len() != nodes {
                return Err(Error::Config(format!(
                    "p list has {} entries for {} nodes",
                    list.len(),
                    nodes
                )));
            }
            Ok(list.clone())
        }
    }
}

/// Turn a parsed config file into one validated [`ExperimentSpec`] per
/// algorithm variant.
pub fn resolve(cfg: &ExperimentConfigFile) -> Result<ResolvedExperiments> {
    if cfg.algorithms.is_empty() {
        return Err(Error::Config(
            "at least one [[algorithms]] entry is required".into(),
        ));
    }
    if cfg.master_seed > MAX_MASTER_SEED {
        return Err(Error::Config(format!(
            "master_seed must be <= {MAX_MASTER_SEED} so manifests stay valid TOML"
        )));
    }
    let nodes = cfg.topology.nodes;
    let noise = resolve_noise(&cfg.noise, nodes)?;
    let topology = TopologySpec {
        nodes,
        target_degree: cfg.topology.target_degree,
        combination_rule: cfg.topology.combination_rule,
        adaptation_weights: cfg.topology.adaptation_weights,
    };
    let plant = PlantSpec {
        memory_length: cfg.plant.memory_length,
        active_count: cfg.plant.active_count,
    };

    let mut variants = Vec::with_capacity(cfg.algorithms.len());
    for alg in &cfg.algorithms {
        let name = alg.name.clone().unwrap_or_else(|| {
            let mut n = alg.family.name().to_string();
            if alg.l0 {
                n.push_str("-l0");
            }
            n
        });
        if variants.iter().any(|(existing, _)| *existing == name) {
            return Err(Error::Config(format!("duplicate variant name {name:?}")));
        }
        let spec = ExperimentSpec {
            iterations: cfg.iterations,
            runs: cfg.runs,
            master_seed: cfg.master_seed,
            derived_seeds: DerivedSeeds::from_master(cfg.master_seed),
            topology,
            plant,
            noise: noise.clone(),
            algorithm: AlgorithmSpec {
                family: alg.family,
                mu: alg.mu,
                delta: alg.delta,
                p_per_node: resolve_p(&alg.p, alg.family, cfg.master_seed, nodes)?,
                l0_enabled: alg.l0,
                rho: alg.rho,
                beta: alg.beta,
                mode: alg.mode,
            },
        };
        spec.validate()
            .map_err(|e| Error::Config(format!("variant {name:?}: {e}")))?;
        variants.push((name, spec));
    }
    Ok(ResolvedExperiments {
        out_dir: cfg.out_dir.clone(),
        variants,
    })
}

/// Parse a config document, reporting the TOML line/column on failure.
pub fn parse_config(text: &str) -> Result<ExperimentConfigFile> {
    toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
}

/// Parse with `key=value` overrides applied first. Keys are dotted paths
/// (`runs`, `noise.kind`, `algorithms.0.mu`); values are TOML literals,
/// falling back to strings.
pub fn parse_config_with_overrides(
    text: &str,
    overrides: &[(String, String)],
) -> Result<ExperimentConfigFile> {
    if overrides.is_empty() {
        return parse_config(text);
    }
    let mut doc: toml::Value = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
    for (key, raw) in overrides {
        apply_override(&mut doc, key, raw)?;
    }
    ExperimentConfigFile::deserialize(doc).map_err(|e| Error::Config(e.to_string()))
}

fn parse_toml_literal(raw: &str) -> toml::Value {
    let wrapped = format!("v = {raw}");
    match wrapped.parse::<toml::Table>() {
        Ok(mut table) => table.remove("v").unwrap(),
        Err(_) => toml::Value::String(raw.to_string()),
    }
}

/// Set a dotted path inside a TOML document, creating intermediate tables
/// as needed. Numeric segments index into arrays.
pub fn apply_override(doc: &mut toml::Value, key: &str, raw: &str) -> Result<()> {
    let segments: Vec<&str> = key.split('.').collect();
    if segments.iter().any(|s| s.is_empty()) {
        return Err(Error::Config(format!("bad override key {key:?}")));
    }
    let mut node = doc;
    for (pos, segment) in segments.iter().enumerate() {
        let last = pos + 1 == segments.len();
        if let Ok(index) = segment.parse::<usize>() {
            let arr = node
                .as_array_mut()
                .ok_or_else(|| Error::Config(format!("{key:?}: {segment} indexes a non-array")))?;
            let slot = arr
                .get_mut(index)
                .ok_or_else(|| Error::Config(format!("{key:?}: index {index} out of range")))?;
            if last {
                *slot = parse_toml_literal(raw);
                return Ok(());
            }
            node = slot;
        } else {
            let table = node
                .as_table_mut()
                .ok_or_else(|| Error::Config(format!("{key:?}: {segment} is not a table")))?;
            if last {
                table.insert(segment.to_string(), parse_toml_literal(raw));
                return Ok(());
            }
            node = table
                .entry(segment.to_string())
                .or_insert_with(|| toml::Value::Table(toml::Table::new()));
        }
    }
    Ok(())
}

/// Serialize a resolved spec as a manifest document.
pub fn spec_to_manifest(spec: &ExperimentSpec) -> Result<String> {
    toml::to_string_pretty(spec).map_err(|e| Error::Config(format!("manifest: {e}")))
}

/// Parse a manifest back into the spec it was written from.
pub fn spec_from_manifest(text: &str) -> Result<ExperimentSpec> {
    let spec: ExperimentSpec = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    spec.validate()?;
    Ok(spec)
}
