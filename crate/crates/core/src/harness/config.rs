//! Experiment configuration files.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonians::{defected_heisenberg_2d, defected_ising_1d, HamiltonianSpec};
use crate::lindblad::WeightKind;
use crate::replica::SwapMode;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Gap,
    Sweep,
    Mixing,
    Verify,
    Theta,
    Classical,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Gap => "gap",
            Scenario::Sweep => "sweep",
            Scenario::Mixing => "mixing",
            Scenario::Verify => "verify",
            Scenario::Theta => "theta",
            Scenario::Classical => "classical",
        }
    }
}

/// Named model or an explicit Hamiltonian fragment.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum SystemConfig {
    Model(ModelConfig),
    Explicit(serde_json::Value),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    #[serde(rename = "defected_ising_1d")]
    DefectedIsing1d {
        n: usize,
        #[serde(rename = "J")]
        j: f64,
    },
    #[serde(rename = "defected_heisenberg_2d")]
    DefectedHeisenberg2d {
        rows: usize,
        cols: usize,
        #[serde(rename = "A")]
        a: Vec<usize>,
        edge: (usize, usize),
        #[serde(rename = "J")]
        j: f64,
    },
}

impl<'de> Deserialize<'de> for SystemConfig {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(d)?;
        if v.get("model").is_some() {
            ModelConfig::deserialize(v).map(SystemConfig::Model).map_err(serde::de::Error::custom)
        } else {
            Ok(SystemConfig::Explicit(v))
        }
    }
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig::Model(ModelConfig::DefectedIsing1d { n: 3, j: 3.0 })
    }
}

impl SystemConfig {
    /// Hamiltonian at the configured defect strength.
    pub fn build(&self) -> Result<HamiltonianSpec> {
        match self {
            SystemConfig::Model(ModelConfig::DefectedIsing1d { n, j }) => defected_ising_1d(*n, *j),
            SystemConfig::Model(ModelConfig::DefectedHeisenberg2d { rows, cols, a, edge, j }) => {
                defected_heisenberg_2d(*rows, *cols, a, *edge, *j)
            }
            SystemConfig::Explicit(v) => HamiltonianSpec::from_json_value(v),
        }
    }

    /// Hamiltonian with the defect strength replaced by `j`.
    pub fn build_with_j(&self, j: f64) -> Result<HamiltonianSpec> {
        match self {
            SystemConfig::Model(ModelConfig::DefectedIsing1d { n, .. }) => defected_ising_1d(*n, j),
            SystemConfig::Model(ModelConfig::DefectedHeisenberg2d { rows, cols, a, edge, .. }) => {
                defected_heisenberg_2d(*rows, *cols, a, *edge, j)
            }
            SystemConfig::Explicit(_) => self.build()?.with_defect_strength(j),
        }
    }

    pub fn default_j(&self) -> Option<f64> {
        match self {
            SystemConfig::Model(ModelConfig::DefectedIsing1d { j, .. })
            | SystemConfig::Model(ModelConfig::DefectedHeisenberg2d { j, .. }) => Some(*j),
            SystemConfig::Explicit(_) => self.build().ok().and_then(|s| s.defect.map(|d| d.j)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CouplingConfig {
    #[serde(default = "single_site")]
    pub kind: String,
    /// Sites carrying single-site Paulis; all sites when absent.
    #[serde(default)]
    pub sites: Option<Vec<usize>>,
}

fn single_site() -> String {
    "single_site".into()
}

impl Default for CouplingConfig {
    fn default() -> Self {
        Self { kind: single_site(), sites: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReplicaModeName {
    #[serde(rename = "local_A")]
    LocalA,
    #[serde(rename = "global")]
    Global,
    #[serde(rename = "none")]
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReplicaConfig {
    #[serde(default = "local_a")]
    pub mode: ReplicaModeName,
    #[serde(default = "metropolis")]
    pub swap_weight: WeightKind,
    /// Weight of the auxiliary (or second replica) dissipator; defaults to the system weight.
    #[serde(default)]
    pub aux_weight: Option<WeightKind>,
    /// Inverse temperature of the second replica in global mode.
    #[serde(default)]
    pub beta2: Option<f64>,
}

fn local_a() -> ReplicaModeName {
    ReplicaModeName::LocalA
}

fn metropolis() -> WeightKind {
    WeightKind::Metropolis
}

impl Default for ReplicaConfig {
    fn default() -> Self {
        Self { mode: ReplicaModeName::LocalA, swap_weight: WeightKind::Metropolis, aux_weight: None, beta2: None }
    }
}

impl ReplicaConfig {
    pub fn swap_mode(&self, beta: f64) -> Result<SwapMode> {
        Ok(match self.mode {
            ReplicaModeName::LocalA => SwapMode::LocalOnA,
            ReplicaModeName::None => SwapMode::None,
            ReplicaModeName::Global => SwapMode::Global { beta2: self.beta2.unwrap_or(beta) },
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SweepParam {
    #[serde(rename = "J")]
    J,
    #[serde(rename = "beta")]
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub path: Option<String>,
    #[serde(default = "json")]
    pub format: Format,
}

fn json() -> Format {
    Format::Json
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassicalConfig {
    #[serde(default = "four")]
    pub n: usize,
    #[serde(default = "point_two")]
    pub beta2: f64,
}

fn four() -> usize {
    4
}

fn point_two() -> f64 {
    0.2
}

impl Default for ClassicalConfig {
    fn default() -> Self {
        Self { n: 4, beta2: 0.2 }
    }
}

fn one() -> f64 {
    1.0
}

fn seed42() -> u64 {
    42
}

fn default_eps() -> f64 {
    1e-2
}

/// Default superoperator side length allowed before the resource guard trips.
pub const DEFAULT_MAX_DIM: usize = 4096;

fn default_max_dim() -> usize {
    DEFAULT_MAX_DIM
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub system: SystemConfig,
    #[serde(default = "one")]
    pub beta: f64,
    #[serde(default = "metropolis")]
    pub weight: WeightKind,
    #[serde(default)]
    pub couplings: CouplingConfig,
    #[serde(default)]
    pub replica: ReplicaConfig,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
    #[serde(default = "seed42")]
    pub seed: u64,
    /// Trace-distance threshold for the mixing scenario.
    #[serde(default = "default_eps")]
    pub epsilon: f64,
    /// Largest superoperator side length.
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default)]
    pub classical: ClassicalConfig,
    #[serde(default)]
    pub output: Option<OutputConfig>,
}

/// One point of an expanded sweep plan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanPoint {
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub beta: f64,
}

impl ExperimentConfig {
    /// Default configuration for a scenario on the desk-scale defected Ising ring.
    pub fn default_for(scenario: Scenario) -> Self {
        let sweep = matches!(scenario, Scenario::Sweep | Scenario::Classical)
            .then(|| SweepConfig { param: SweepParam::J, values: vec![1.0, 2.0, 3.0, 4.0, 5.0] });
        let system = match scenario {
            Scenario::Mixing => SystemConfig::Explicit(serde_json::json!({
                "n": 2,
                "terms": [
                    {"coeff": -1.0, "paulis": [[0, "Z"], [1, "Z"]]},
                    {"coeff": -0.3, "paulis": [[0, "Z"]]}
                ]
            })),
            _ => SystemConfig::default(),
        };
        let replica = match scenario {
            Scenario::Mixing => ReplicaConfig { mode: ReplicaModeName::None, ..ReplicaConfig::default() },
            _ => ReplicaConfig::default(),
        };
        Self {
            scenario,
            system,
            beta: 1.0,
            weight: WeightKind::Metropolis,
            couplings: CouplingConfig::default(),
            replica,
            sweep,
            seed: 42,
            epsilon: default_eps(),
            max_dim: DEFAULT_MAX_DIM,
            classical: ClassicalConfig::default(),
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::Config(format!("{field}: {msg}")));
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return bad("beta", format!("must be finite and > 0, got {}", self.beta));
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad("epsilon", format!("must lie in (0, 1), got {}", self.epsilon));
        }
        if self.couplings.kind != "single_site" {
            return bad("couplings.kind", format!("unsupported value {:?}, expected \"single_site\"", self.couplings.kind));
        }
        if let Some(s) = &self.sweep {
            if s.values.is_empty() {
                return bad("sweep.values", "must not be empty".into());
            }
            if s.param == SweepParam::Beta && s.values.iter().any(|&b| !(b > 0.0)) {
                return bad("sweep.values", "β values must be > 0".into());
            }
        }
        if self.scenario == Scenario::Mixing && self.sweep.is_some() {
            return bad("sweep", "the mixing scenario runs a single point".into());
        }
        if matches!(self.scenario, Scenario::Sweep) && self.sweep.is_none() {
            return bad("sweep", "required for the sweep scenario".into());
        }
        if let Some(b2) = self.replica.beta2 {
            if !(b2 > 0.0) {
                return bad("replica.beta2", format!("must be > 0, got {b2}"));
            }
        }
        if self.scenario != Scenario::Theta && self.scenario != Scenario::Classical {
            let spec = self.system.build().map_err(|e| Error::Config(format!("system: {e}")))?;
            if let Some(sites) = &self.couplings.sites {
                if let Some(&s) = sites.iter().find(|&&s| s >= spec.n) {
                    return bad("couplings.sites", format!("site {s} out of range for n = {}", spec.n));
                }
            }
        }
        Ok(())
    }

    /// Sweep points, or the single configured point.
    pub fn plan(&self) -> Vec<PlanPoint> {
        let j0 = self.system.default_j();
        match &self.sweep {
            Some(SweepConfig { param: SweepParam::J, values }) => {
                values.iter().map(|&j| PlanPoint { j: Some(j), beta: self.beta }).collect()
            }
            Some(SweepConfig { param: SweepParam::Beta, values }) => {
                values.iter().map(|&b| PlanPoint { j: j0, beta: b }).collect()
            }
            None => vec![PlanPoint { j: j0, beta: self.beta }],
        }
    }

    /// Hamiltonian at a plan point.
    pub fn system_at(&self, p: &PlanPoint) -> Result<HamiltonianSpec> {
        match (p.j, self.system.default_j()) {
            (Some(j), Some(_)) => self.system.build_with_j(j),
            (Some(_), None) => Err(Error::Config("sweep: J requires a system with a defect".into())),
            _ => self.system.build(),
        }
    }
}

/// Parse a configuration from JSON text; errors name the offending field and position.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let inner = e.into_inner();
        Error::Config(format!("{path}: {inner}"))
    })?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config_str(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config_str(r#"{"scenario": "gap"}"#).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.beta, 1.0);
        assert_eq!(cfg.system, SystemConfig::default());
        assert_eq!(cfg.plan().len(), 1);
    }

    #[test]
    fn unknown_scenario_names_the_field() {
        let err = parse_config_str(r#"{"scenario": "anneal"}"#).unwrap_err().to_string();
        assert!(err.contains("scenario"), "{err}");
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn unknown_field_rejected() {
        let err = parse_config_str(r#"{"scenario": "gap", "betta": 2}"#).unwrap_err().to_string();
        assert!(err.contains("betta"), "{err}");
    }

    #[test]
    fn j_sweep_expands_to_five_points() {
        let cfg = parse_config_str(
            r#"{"scenario": "sweep", "system": {"model": "defected_ising_1d", "n": 3, "J": 1},
                "sweep": {"param": "J", "values": [1, 2, 3, 4, 5]}}"#,
        )
        .unwrap();
        let plan = cfg.plan();
        assert_eq!(plan.len(), 5);
        assert_eq!(plan[4].j, Some(5.0));
        let spec = cfg.system_at(&plan[4]).unwrap();
        assert_eq!(spec.defect.unwrap().j, 5.0);
    }

    #[test]
    fn explicit_system_fragment() {
        let cfg = parse_config_str(
            r#"{"scenario": "gap", "system": {"n": 3, "terms": [{"coeff": -2.0, "paulis": [[0, "Z"], [1, "Z"]]},
                {"coeff": -1.0, "paulis": [[1, "Z"], [2, "Z"]]}, {"coeff": -1.0, "paulis": [[2, "Z"], [0, "Z"]]}],
                "partition": {"A": [0, 1]}, "defect": {"edge": [0, 1], "J": 2.0}}}"#,
        )
        .unwrap();
        let spec = cfg.system_at(&PlanPoint { j: Some(4.0), beta: 1.0 }).unwrap();
        assert_eq!(spec, defected_ising_1d(3, 4.0).unwrap());
    }

    #[test]
    fn unknown_model_rejected() {
        let err = parse_config_str(r#"{"scenario": "gap", "system": {"model": "toric", "n": 3}}"#)
            .unwrap_err()
            .to_string();
        assert!(err.contains("system") && err.contains("toric"), "{err}");
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(parse_config_str(r#"{"scenario": "gap", "beta": -1}"#).is_err());
        assert!(parse_config_str(r#"{"scenario": "sweep"}"#).is_err());
        assert!(parse_config_str(r#"{"scenario": "gap", "couplings": {"sites": [7]}}"#).is_err());
        assert!(parse_config_str(r#"{"scenario": "sweep", "sweep": {"param": "h", "values": [1]}}"#).is_err());
    }

    #[test]
    fn default_configs_validate() {
        for s in [Scenario::Gap, Scenario::Sweep, Scenario::Mixing, Scenario::Verify, Scenario::Theta, Scenario::Classical] {
            ExperimentConfig::default_for(s).validate().unwrap();
        }
    }
}
