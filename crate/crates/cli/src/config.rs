//! Run configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};

use popgen_dyn::analysis::{HardyWeinbergTolerances, SelectionTolerances};
use popgen_dyn::equilibria::BoundConfig;
use popgen_dyn::rates::RateFunction;
use popgen_dyn::{
    GenotypeVector, RateModel, ReducedKind, ReducedModel, ScalingMode, SimConfig, TwoPhaseParams, TwoPhaseState,
};

use crate::CliError;

pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub model: ModelSection,
    pub initial: InitialSection,
    #[serde(default)]
    pub sim: SimConfig,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub verify: VerifySection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Full,
    Fast,
    Slow,
}

/// Rate families, weights and, for `full`, the two-phase parameters.
/// A single entry in a rate list is shared by all three genotypes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub kind: ModelKind,
    pub v: [f64; 3],
    pub w: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<RateFunction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu: Option<Vec<RateFunction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<[f64; 3]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_larva: Option<Vec<RateFunction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mu_adult: Option<Vec<RateFunction>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scaling: Option<ScalingMode>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<[f64; 3]>,
    /// Two-phase start; `x0` is placed on the slow manifold instead when these are absent.
    #[serde(rename = "L0", default, skip_serializing_if = "Option::is_none")]
    pub l0: Option<[f64; 3]>,
    #[serde(rename = "A0", default, skip_serializing_if = "Option::is_none")]
    pub a0: Option<[f64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub csv: String,
    pub report: String,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            csv: "trajectory.csv".into(),
            report: "report.json".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckName {
    HardyWeinberg,
    SelectionConvergence,
    RateOrdering,
    SlowManifold,
    Boundedness,
}

impl CheckName {
    pub fn as_str(self) -> &'static str {
        match self {
            CheckName::HardyWeinberg => "hardy_weinberg",
            CheckName::SelectionConvergence => "selection_convergence",
            CheckName::RateOrdering => "rate_ordering",
            CheckName::SlowManifold => "slow_manifold",
            CheckName::Boundedness => "boundedness",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySection {
    pub checks: Vec<CheckName>,
    pub hardy_weinberg: HardyWeinbergTolerances,
    pub selection: SelectionTolerances,
    pub ordering: OrderingSection,
    pub manifold: ManifoldSection,
    pub boundedness: BoundednessSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OrderingSection {
    pub samples: usize,
    pub slack: f64,
}

impl Default for OrderingSection {
    fn default() -> Self {
        OrderingSection {
            samples: 1000,
            slack: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ManifoldSection {
    /// Defaults to the model's own `epsilon`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilons: Option<Vec<f64>>,
    pub horizon: f64,
    pub max_ratio: f64,
    pub record_every: f64,
}

impl Default for ManifoldSection {
    fn default() -> Self {
        ManifoldSection {
            epsilons: None,
            horizon: 10.0,
            max_ratio: 0.7,
            record_every: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BoundednessSection {
    pub slack: f64,
    pub tail_fraction: f64,
    pub grid: BoundConfig,
}

impl Default for BoundednessSection {
    fn default() -> Self {
        BoundednessSection {
            slack: 1e-6,
            tail_fraction: 0.25,
            grid: BoundConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Dot path to a numeric leaf, e.g. `model.mu.2.params.0`.
    pub parameter: String,
    pub values: Vec<f64>,
}

/// Either a reduced model or the two-phase system.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Reduced(ReducedModel),
    TwoPhase(TwoPhaseParams),
}

fn invalid(field: &str, reason: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{field}: {reason}"))
}

fn core_config_error(section: &str, e: popgen_dyn::Error) -> CliError {
    match e {
        popgen_dyn::Error::InvalidParameter { field, reason } => invalid(&format!("{section}.{field}"), reason),
        other => CliError::Config(format!("{section}: {other}")),
    }
}

fn rates3(field: &str, rates: &Option<Vec<RateFunction>>) -> Result<[RateFunction; 3], CliError> {
    let rates = rates
        .as_ref()
        .ok_or_else(|| invalid(field, "is required for this model kind"))?;
    match rates.len() {
        1 => Ok(std::array::from_fn(|_| rates[0].clone())),
        3 => Ok(std::array::from_fn(|i| rates[i].clone())),
        n => Err(invalid(field, format!("expected 1 or 3 rate functions, got {n}"))),
    }
}

fn forbid<T>(field: &str, value: &Option<T>, kind: &str) -> Result<(), CliError> {
    if value.is_some() {
        Err(invalid(field, format!("not allowed for kind = \"{kind}\"")))
    } else {
        Ok(())
    }
}

fn nonnegative(field: &str, x: &[f64; 3]) -> Result<(), CliError> {
    for (i, c) in x.iter().enumerate() {
        if !(c.is_finite() && *c >= 0.0) {
            return Err(invalid(
                &format!("{field}[{i}]"),
                format!("must be finite and nonnegative, got {c}"),
            ));
        }
    }
    Ok(())
}

impl ModelSection {
    pub fn build(&self) -> Result<Model, CliError> {
        match self.kind {
            ModelKind::Fast | ModelKind::Slow => {
                let name = if self.kind == ModelKind::Fast { "fast" } else { "slow" };
                forbid("model.omega", &self.omega, name)?;
                forbid("model.nu", &self.nu, name)?;
                forbid("model.mu_larva", &self.mu_larva, name)?;
                forbid("model.mu_adult", &self.mu_adult, name)?;
                forbid("model.epsilon", &self.epsilon, name)?;
                forbid("model.scaling", &self.scaling, name)?;
                let m = rates3("model.m", &self.m)?;
                let mu = rates3("model.mu", &self.mu)?;
                let rates = RateModel::new(m, mu, self.v, self.w).map_err(|e| core_config_error("model", e))?;
                let kind = if self.kind == ModelKind::Fast {
                    ReducedKind::Fast
                } else {
                    ReducedKind::Slow
                };
                let model = ReducedModel::new(kind, rates).map_err(|e| core_config_error("model", e))?;
                Ok(Model::Reduced(model))
            }
            ModelKind::Full => {
                forbid("model.m", &self.m, "full")?;
                forbid("model.mu", &self.mu, "full")?;
                let p = TwoPhaseParams {
                    omega: self
                        .omega
                        .ok_or_else(|| invalid("model.omega", "is required for kind = \"full\""))?,
                    nu: self
                        .nu
                        .ok_or_else(|| invalid("model.nu", "is required for kind = \"full\""))?,
                    mu_larva: rates3("model.mu_larva", &self.mu_larva)?,
                    mu_adult: rates3("model.mu_adult", &self.mu_adult)?,
                    v: self.v,
                    w: self.w,
                    epsilon: self
                        .epsilon
                        .ok_or_else(|| invalid("model.epsilon", "is required for kind = \"full\""))?,
                    scaling: self.scaling.unwrap_or(ScalingMode::FastAdult),
                };
                p.check().map_err(|e| core_config_error("model", e))?;
                // both reductions must exist for the manifold placement and derived columns
                p.reduce(p.scaling.reduced_kind())
                    .map_err(|e| core_config_error("model", e))?;
                Ok(Model::TwoPhase(p))
            }
        }
    }
}

impl Model {
    /// The reduced model itself, or the reduction matching the scaling mode.
    pub fn reduced(&self) -> Result<ReducedModel, CliError> {
        match self {
            Model::Reduced(m) => Ok(m.clone()),
            Model::TwoPhase(p) => p
                .reduce(p.scaling.reduced_kind())
                .map_err(|e| core_config_error("model", e)),
        }
    }
}

impl InitialSection {
    /// Reduced start state.
    pub fn reduced_start(&self, model: &Model) -> Result<GenotypeVector, CliError> {
        match (model, self.x0) {
            (_, Some(x0)) => {
                nonnegative("initial.x0", &x0)?;
                Ok(GenotypeVector(x0))
            }
            (Model::TwoPhase(p), None) => {
                let s = self.two_phase_start(model)?;
                Ok(p.slow_variable(p.scaling.reduced_kind(), &s))
            }
            (Model::Reduced(_), None) => Err(invalid("initial.x0", "is required")),
        }
    }

    pub fn two_phase_start(&self, model: &Model) -> Result<TwoPhaseState, CliError> {
        let Model::TwoPhase(p) = model else {
            return Err(invalid("initial", "two-phase start requested for a reduced model"));
        };
        match (self.l0, self.a0, self.x0) {
            (Some(l0), Some(a0), None) => {
                nonnegative("initial.L0", &l0)?;
                nonnegative("initial.A0", &a0)?;
                Ok(TwoPhaseState {
                    larvae: GenotypeVector(l0),
                    adults: GenotypeVector(a0),
                })
            }
            (None, None, Some(x0)) => {
                nonnegative("initial.x0", &x0)?;
                p.manifold_state(p.scaling.reduced_kind(), &GenotypeVector(x0))
                    .map_err(CliError::Numerical)
            }
            _ => Err(invalid("initial", "give either x0 or both L0 and A0")),
        }
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Schema checks that do not need any numerical work.
    pub fn validate(&self) -> Result<(), CliError> {
        let model = self.model.build()?;
        self.sim.check().map_err(|e| core_config_error("sim", e))?;
        match &model {
            Model::Reduced(_) => {
                if self.initial.l0.is_some() || self.initial.a0.is_some() {
                    return Err(invalid("initial", "L0/A0 are only allowed for kind = \"full\""));
                }
                self.initial.reduced_start(&model)?;
            }
            Model::TwoPhase(_) => {
                self.initial.two_phase_start(&model)?;
            }
        }
        if self.output.csv.is_empty() {
            return Err(invalid("output.csv", "must not be empty"));
        }
        if self.output.report.is_empty() {
            return Err(invalid("output.report", "must not be empty"));
        }
        let o = &self.verify.ordering;
        if !(o.slack.is_finite() && o.slack > 0.0) {
            return Err(invalid("verify.ordering.slack", "must be finite and positive"));
        }
        let b = &self.verify.boundedness;
        if !(b.tail_fraction > 0.0 && b.tail_fraction <= 1.0) {
            return Err(invalid("verify.boundedness.tail_fraction", "must lie in (0, 1]"));
        }
        let mf = &self.verify.manifold;
        if !(mf.horizon > 0.0 && mf.record_every > 0.0 && mf.max_ratio > 0.0) {
            return Err(invalid(
                "verify.manifold",
                "horizon, record_every and max_ratio must be positive",
            ));
        }
        if let Some(sweep) = &self.sweep {
            if sweep.values.is_empty() {
                return Err(invalid("sweep.values", "must not be empty"));
            }
            if sweep.parameter.is_empty() {
                return Err(invalid("sweep.parameter", "must not be empty"));
            }
        }
        Ok(())
    }
}

/// Replaces the numeric leaf at `path` (dot separated, numeric segments index arrays).
pub fn set_numeric_leaf(root: &mut toml::Value, path: &str, value: f64) -> Result<(), CliError> {
    let mut node = root;
    for seg in path.split('.') {
        node = match node {
            toml::Value::Table(t) => t
                .get_mut(seg)
                .ok_or_else(|| invalid("sweep.parameter", format!("`{path}`: no key `{seg}`")))?,
            toml::Value::Array(a) => {
                let i: usize = seg
                    .parse()
                    .map_err(|_| invalid("sweep.parameter", format!("`{path}`: `{seg}` is not an array index")))?;
                let len = a.len();
                a.get_mut(i)
                    .ok_or_else(|| invalid("sweep.parameter", format!("`{path}`: index {i} out of range ({len})")))?
            }
            _ => {
                return Err(invalid(
                    "sweep.parameter",
                    format!("`{path}`: `{seg}` goes below a scalar"),
                ))
            }
        };
    }
    match node {
        toml::Value::Float(_) | toml::Value::Integer(_) => {
            *node = toml::Value::Float(value);
            Ok(())
        }
        _ => Err(invalid("sweep.parameter", format!("`{path}` is not a numeric leaf"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const NEUTRAL: &str = r#"
[model]
kind = "fast"
v = [1.0, 1.0, 1.0]
w = [1.0, 1.0, 1.0]
m = [{ family = "rational_decay", params = [2.0, 1.0] }]
mu = [{ family = "affine_growth", params = [0.5, 0.5] }]

[initial]
x0 = [1.0, 0.0, 1.0]
"#;

    #[test]
    fn parses_with_defaults() {
        let cfg = RunConfig::from_toml_str(NEUTRAL).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(cfg.sim, SimConfig::default());
        let Model::Reduced(m) = cfg.model.build().unwrap() else {
            panic!()
        };
        assert!(m.is_selectively_neutral());
    }

    #[test]
    fn rejects_unknown_keys() {
        let text = format!("{NEUTRAL}\n[sim]\nt_end = 5.0\nbogus = 1\n");
        let err = RunConfig::from_toml_str(&text).unwrap_err().to_string();
        assert!(err.contains("bogus"), "{err}");
    }

    #[test]
    fn negative_weight_names_the_field() {
        let text = NEUTRAL.replace("v = [1.0, 1.0, 1.0]", "v = [1.0, -1.0, 1.0]");
        let err = RunConfig::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, CliError::Config(_)));
        assert!(err.to_string().contains("model.v"), "{err}");
    }

    #[test]
    fn kind_specific_fields() {
        let text = NEUTRAL.replace("kind = \"fast\"", "kind = \"fast\"\nepsilon = 0.1");
        assert!(RunConfig::from_toml_str(&text)
            .unwrap_err()
            .to_string()
            .contains("model.epsilon"));
        let text = NEUTRAL.replace("kind = \"fast\"", "kind = \"full\"");
        assert!(RunConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn round_trip_is_identity() {
        let cfg = RunConfig::from_toml_str(NEUTRAL).unwrap();
        let again = RunConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
        assert_eq!(cfg, again);
    }

    #[test]
    fn sweep_leaf_replacement() {
        let mut v: toml::Value = toml::from_str(NEUTRAL).unwrap();
        set_numeric_leaf(&mut v, "model.mu.0.params.0", 0.7).unwrap();
        assert_eq!(v["model"]["mu"][0]["params"][0].as_float(), Some(0.7));
        assert!(set_numeric_leaf(&mut v, "model.kind", 1.0).is_err());
        assert!(set_numeric_leaf(&mut v, "model.mu.3", 1.0).is_err());
        assert!(set_numeric_leaf(&mut v, "model.nope", 1.0).is_err());
    }
}
