//! Versioned JSON scenario documents.
//!
//! A document names its building blocks (`states`, `observables`,
//! `hamiltonians`) and then refers to them by name from one section per task
//! (`born`, `evolve`, `interference`, `order_effect`, `uncertainty`,
//! `ensemble`, `market`). Complex numbers are `[re, im]` pairs. Angles and
//! phases are radians unless the top-level `"degrees": true` is set.
//!
//! ```json
//! {
//!   "version": 1,
//!   "degrees": true,
//!   "states": { "psi": { "angle": 0 } },
//!   "observables": { "i": { "angle": 0 }, "j": { "angle": 60 } },
//!   "interference": { "state": "psi", "target": { "observable": "i", "outcome": 1 }, "partition": "j" }
//! }
//! ```
//!
//! Every invariant of the numerical types is checked at load time with the
//! user-input tolerance of 1e-8, and failures name the offending field.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{Hamiltonian, Matrix, Observable, Projector, StateVector, INPUT_TOL};
use crate::market::{AgentKind, AgentPopulation, NewsEntry, NewsSchedule, Scenario};
use crate::Complex64;

pub const CONFIG_VERSION: u64 = 1;

pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_INITIAL_PRICE: f64 = 100.0;
pub const DEFAULT_IMPACT: f64 = 0.05;
pub const DEFAULT_PERIODS: usize = 10;
pub const DEFAULT_ENSEMBLE_COUNT: usize = 10_000;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse { line: usize, column: usize, message: String },

    #[error("unsupported config version {found}; this build reads version {CONFIG_VERSION}")]
    Version { found: u64 },

    #[error("validation error in `{field}`: {message}")]
    Validation { field: String, message: String },
}

fn validation(field: impl Into<String>, message: impl ToString) -> ConfigError {
    ConfigError::Validation { field: field.into(), message: message.to_string() }
}

impl From<serde_json::Error> for ConfigError {
    fn from(e: serde_json::Error) -> Self {
        ConfigError::Parse { line: e.line(), column: e.column(), message: e.to_string() }
    }
}

pub type ComplexPair = [f64; 2];

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub amplitudes: Option<Vec<ComplexPair>>,
    /// Two-level state `cos θ |0⟩ + e^{iφ} sin θ |1⟩`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableSpec {
    /// Two-level basis `(cos θ, e^{iφ} sin θ)`, `(-sin θ, e^{iφ} cos θ)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase: Option<f64>,
    /// Explicit orthonormal eigenvectors.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vectors: Option<Vec<Vec<ComplexPair>>>,
    /// Defaults to `[1, -1]` for the angle form.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSpec {
    /// `rabi` (ω σ_x), `pauli` (x σ_x + y σ_y + z σ_z) or `zero`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub y: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z: Option<f64>,
    /// Dimension for the `zero` preset (default 2).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Explicit matrix, row-major.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexPair>>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BornSection {
    pub state: String,
    pub observable: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    pub state: String,
    pub hamiltonian: String,
    pub observable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TargetSpec {
    pub observable: String,
    pub outcome: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterferenceSection {
    pub state: String,
    pub target: TargetSpec,
    pub partition: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairSection {
    pub state: String,
    pub first: String,
    pub second: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnsembleSection {
    pub state: String,
    pub observable: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<AgentKindSpec>,
    pub count: usize,
    pub state: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKindSpec {
    Quantum,
    Classical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NewsSpec {
    pub hamiltonian: String,
    pub duration: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub observable: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub initial_price: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periods: Option<usize>,
    /// Name of the price observable; the computational-basis ±1 observable when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub price_observable: Option<String>,
    pub populations: Vec<PopulationSpec>,
    /// One entry per period, or a single entry applied every period. Quiet when empty.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub news: Vec<NewsSpec>,
}

/// The on-disk document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigDocument {
    pub version: u64,
    #[serde(default, skip_serializing_if = "is_false")]
    pub degrees: bool,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub states: BTreeMap<String, StateSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub observables: BTreeMap<String, ObservableSpec>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub hamiltonians: BTreeMap<String, HamiltonianSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub born: Option<BornSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub evolve: Option<EvolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub interference: Option<InterferenceSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub order_effect: Option<PairSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uncertainty: Option<PairSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ensemble: Option<EnsembleSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub market: Option<MarketSection>,
}

impl ConfigDocument {
    /// Parses a document, checking the version before the schema.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        match value.get("version") {
            None => return Err(validation("version", "missing version field")),
            Some(v) => match v.as_u64() {
                Some(CONFIG_VERSION) => {}
                Some(found) => return Err(ConfigError::Version { found }),
                None => return Err(validation("version", format!("expected a positive integer, got {v}"))),
            },
        }
        // re-parse from text so schema errors keep their line/column
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config document serializes")
    }

    /// Makes every defaulted market and ensemble parameter explicit.
    pub fn with_defaults(mut self) -> Self {
        if let Some(e) = &mut self.ensemble {
            e.count.get_or_insert(DEFAULT_ENSEMBLE_COUNT);
            e.seed.get_or_insert(DEFAULT_SEED);
        }
        if let Some(m) = &mut self.market {
            m.seed.get_or_insert(DEFAULT_SEED);
            m.initial_price.get_or_insert(DEFAULT_INITIAL_PRICE);
            m.impact.get_or_insert(DEFAULT_IMPACT);
            m.periods.get_or_insert(DEFAULT_PERIODS);
            for (k, p) in m.populations.iter_mut().enumerate() {
                p.name.get_or_insert_with(|| format!("population-{k}"));
                p.kind.get_or_insert(AgentKindSpec::Quantum);
            }
        }
        self
    }
}

/// A resolved building block together with the name it was declared under.
#[derive(Clone, Debug)]
pub struct Named<T> {
    pub name: String,
    pub value: T,
}

#[derive(Clone, Debug)]
pub struct BornTask {
    pub state: Named<StateVector>,
    pub observable: Named<Observable>,
}

#[derive(Clone, Debug)]
pub struct EvolveTask {
    pub state: Named<StateVector>,
    pub hamiltonian: Named<Hamiltonian>,
    pub observable: Named<Observable>,
    pub t: Option<f64>,
    pub grid: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct InterferenceTask {
    pub state: Named<StateVector>,
    pub target_observable: Named<Observable>,
    pub target_outcome: f64,
    pub target: Projector,
    pub partition: Named<Observable>,
}

#[derive(Clone, Debug)]
pub struct PairTask {
    pub state: Named<StateVector>,
    pub first: Named<Observable>,
    pub second: Named<Observable>,
}

#[derive(Clone, Debug)]
pub struct EnsembleTask {
    pub state: Named<StateVector>,
    pub observable: Named<Observable>,
    pub count: usize,
    pub seed: u64,
}

/// A fully validated document. `document` has all defaults filled in, so
/// serializing it reproduces every resolved value exactly.
#[derive(Clone, Debug)]
pub struct Config {
    pub document: ConfigDocument,
    pub born: Option<BornTask>,
    pub evolve: Option<EvolveTask>,
    pub interference: Option<InterferenceTask>,
    pub order_effect: Option<PairTask>,
    pub uncertainty: Option<PairTask>,
    pub ensemble: Option<EnsembleTask>,
    pub market: Option<Scenario>,
}

impl Config {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_owned(), source })?;
        Self::from_json(&text)
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Self::from_document(ConfigDocument::parse(text)?)
    }

    pub fn from_document(document: ConfigDocument) -> Result<Self, ConfigError> {
        let document = document.with_defaults();
        let blocks = Blocks::resolve(&document)?;
        let born = document
            .born
            .as_ref()
            .map(|s| {
                Ok::<_, ConfigError>(BornTask {
                    state: blocks.state("born.state", &s.state)?,
                    observable: blocks.observable("born.observable", &s.observable)?,
                })
            })
            .transpose()?;
        let evolve = document
            .evolve
            .as_ref()
            .map(|s| {
                if let Some(t) = s.t.filter(|t| !t.is_finite()) {
                    return Err(validation("evolve.t", format!("time {t} is not finite")));
                }
                if s.grid == Some(0) {
                    return Err(validation("evolve.grid", "grid needs at least one sample"));
                }
                Ok(EvolveTask {
                    state: blocks.state("evolve.state", &s.state)?,
                    hamiltonian: blocks.hamiltonian("evolve.hamiltonian", &s.hamiltonian)?,
                    observable: blocks.observable("evolve.observable", &s.observable)?,
                    t: s.t,
                    grid: s.grid,
                })
            })
            .transpose()?;
        let interference = document
            .interference
            .as_ref()
            .map(|s| {
                let target_observable = blocks.observable("interference.target.observable", &s.target.observable)?;
                let target = target_observable
                    .value
                    .projector(s.target.outcome)
                    .map_err(|e| validation("interference.target.outcome", e))?;
                Ok::<_, ConfigError>(InterferenceTask {
                    state: blocks.state("interference.state", &s.state)?,
                    target_observable,
                    target_outcome: s.target.outcome,
                    target,
                    partition: blocks.observable("interference.partition", &s.partition)?,
                })
            })
            .transpose()?;
        let pair = |section: &str, s: &PairSection| {
            Ok::<_, ConfigError>(PairTask {
                state: blocks.state(&format!("{section}.state"), &s.state)?,
                first: blocks.observable(&format!("{section}.first"), &s.first)?,
                second: blocks.observable(&format!("{section}.second"), &s.second)?,
            })
        };
        let order_effect = document.order_effect.as_ref().map(|s| pair("order_effect", s)).transpose()?;
        let uncertainty = document.uncertainty.as_ref().map(|s| pair("uncertainty", s)).transpose()?;
        let ensemble = document
            .ensemble
            .as_ref()
            .map(|s| {
                let count = s.count.unwrap_or(DEFAULT_ENSEMBLE_COUNT);
                if count == 0 {
                    return Err(validation("ensemble.count", "count must be at least 1"));
                }
                Ok(EnsembleTask {
                    state: blocks.state("ensemble.state", &s.state)?,
                    observable: blocks.observable("ensemble.observable", &s.observable)?,
                    count,
                    seed: s.seed.unwrap_or(DEFAULT_SEED),
                })
            })
            .transpose()?;
        let market = document.market.as_ref().map(|m| blocks.scenario(m)).transpose()?;

        let config = Config { document, born, evolve, interference, order_effect, uncertainty, ensemble, market };
        config.check_dimensions()?;
        Ok(config)
    }

    fn check_dimensions(&self) -> Result<(), ConfigError> {
        let same = |field: &str, a: usize, b: usize| {
            if a == b {
                Ok(())
            } else {
                Err(validation(field, format!("dimension {b} does not match state dimension {a}")))
            }
        };
        if let Some(t) = &self.born {
            same("born.observable", t.state.value.dim(), t.observable.value.dim())?;
        }
        if let Some(t) = &self.evolve {
            same("evolve.hamiltonian", t.state.value.dim(), t.hamiltonian.value.dim())?;
            same("evolve.observable", t.state.value.dim(), t.observable.value.dim())?;
        }
        if let Some(t) = &self.interference {
            same("interference.target.observable", t.state.value.dim(), t.target_observable.value.dim())?;
            same("interference.partition", t.state.value.dim(), t.partition.value.dim())?;
        }
        for (section, task) in [("order_effect", &self.order_effect), ("uncertainty", &self.uncertainty)] {
            if let Some(t) = task {
                same(&format!("{section}.first"), t.state.value.dim(), t.first.value.dim())?;
                same(&format!("{section}.second"), t.state.value.dim(), t.second.value.dim())?;
            }
        }
        if let Some(t) = &self.ensemble {
            same("ensemble.observable", t.state.value.dim(), t.observable.value.dim())?;
        }
        if let Some(s) = &self.market {
            s.validate().map_err(|e| validation("market", e))?;
        }
        Ok(())
    }

    /// Canonical JSON of the resolved document (defaults explicit).
    pub fn to_json(&self) -> String {
        self.document.to_json()
    }
}

/// Loads a document and returns its validated market scenario.
pub fn load_scenario(path: impl AsRef<Path>) -> Result<Scenario, ConfigError> {
    Config::load(path)?.market.ok_or_else(|| validation("market", "document has no market section"))
}

struct Blocks {
    states: BTreeMap<String, StateVector>,
    observables: BTreeMap<String, Observable>,
    hamiltonians: BTreeMap<String, Hamiltonian>,
}

impl Blocks {
    fn resolve(doc: &ConfigDocument) -> Result<Self, ConfigError> {
        let angle = |x: f64| if doc.degrees { x.to_radians() } else { x };
        let mut states = BTreeMap::new();
        for (name, spec) in &doc.states {
            states.insert(name.clone(), resolve_state(&format!("states.{name}"), spec, angle)?);
        }
        let mut observables = BTreeMap::new();
        for (name, spec) in &doc.observables {
            observables.insert(name.clone(), resolve_observable(&format!("observables.{name}"), spec, angle)?);
        }
        let mut hamiltonians = BTreeMap::new();
        for (name, spec) in &doc.hamiltonians {
            hamiltonians.insert(name.clone(), resolve_hamiltonian(&format!("hamiltonians.{name}"), spec)?);
        }
        Ok(Self { states, observables, hamiltonians })
    }

    fn state(&self, field: &str, name: &str) -> Result<Named<StateVector>, ConfigError> {
        lookup(&self.states, field, name, "state")
    }

    fn observable(&self, field: &str, name: &str) -> Result<Named<Observable>, ConfigError> {
        lookup(&self.observables, field, name, "observable")
    }

    fn hamiltonian(&self, field: &str, name: &str) -> Result<Named<Hamiltonian>, ConfigError> {
        lookup(&self.hamiltonians, field, name, "hamiltonian")
    }

    fn scenario(&self, m: &MarketSection) -> Result<Scenario, ConfigError> {
        let price_observable = match &m.price_observable {
            Some(name) => self.observable("market.price_observable", name)?.value,
            None => Observable::price(),
        };
        if m.populations.is_empty() {
            return Err(validation("market.populations", "at least one population is required"));
        }
        let populations = m
            .populations
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let field = format!("market.populations[{k}]");
                let state = self.state(&format!("{field}.state"), &p.state)?.value;
                let kind = match p.kind.unwrap_or(AgentKindSpec::Quantum) {
                    AgentKindSpec::Quantum => AgentKind::Quantum,
                    AgentKindSpec::Classical => AgentKind::Classical,
                };
                let name = p.name.clone().unwrap_or_else(|| format!("population-{k}"));
                AgentPopulation::new(name, p.count, state, kind).map_err(|e| validation(format!("{field}.count"), e))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let news = if m.news.is_empty() {
            NewsSchedule::quiet(price_observable.dim())
        } else {
            let entries = m
                .news
                .iter()
                .enumerate()
                .map(|(k, n)| {
                    let field = format!("market.news[{k}]");
                    if !(n.duration.is_finite() && n.duration >= 0.0) {
                        return Err(validation(format!("{field}.duration"), "duration must be finite and >= 0"));
                    }
                    Ok(NewsEntry {
                        hamiltonian: self.hamiltonian(&format!("{field}.hamiltonian"), &n.hamiltonian)?.value,
                        duration: n.duration,
                        observable: n
                            .observable
                            .as_ref()
                            .map(|o| self.observable(&format!("{field}.observable"), o).map(|x| x.value))
                            .transpose()?,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            NewsSchedule::new(entries).map_err(|e| validation("market.news", e))?
        };
        let scenario = Scenario {
            seed: m.seed.unwrap_or(DEFAULT_SEED),
            populations,
            news,
            price_observable,
            impact: m.impact.unwrap_or(DEFAULT_IMPACT),
            initial_price: m.initial_price.unwrap_or(DEFAULT_INITIAL_PRICE),
            periods: m.periods.unwrap_or(DEFAULT_PERIODS),
        };
        scenario.validate().map_err(|e| validation("market", e))?;
        Ok(scenario)
    }
}

fn lookup<T: Clone>(map: &BTreeMap<String, T>, field: &str, name: &str, kind: &str) -> Result<Named<T>, ConfigError> {
    map.get(name)
        .map(|v| Named { name: name.to_string(), value: v.clone() })
        .ok_or_else(|| validation(field, format!("no {kind} named `{name}`")))
}

fn complex(pairs: &[ComplexPair]) -> Vec<Complex64> {
    pairs.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

fn resolve_state(field: &str, spec: &StateSpec, angle: impl Fn(f64) -> f64) -> Result<StateVector, ConfigError> {
    match (&spec.amplitudes, spec.angle) {
        (Some(amps), None) => {
            if spec.phase.is_some() {
                return Err(validation(format!("{field}.phase"), "phase only applies to the angle form"));
            }
            StateVector::from_normalized(complex(amps), INPUT_TOL).map_err(|e| validation(format!("{field}.amplitudes"), e))
        }
        (None, Some(theta)) => Ok(StateVector::from_angle(angle(theta), angle(spec.phase.unwrap_or(0.0)))),
        _ => Err(validation(field, "give exactly one of `amplitudes` or `angle`")),
    }
}

fn resolve_observable(field: &str, spec: &ObservableSpec, angle: impl Fn(f64) -> f64) -> Result<Observable, ConfigError> {
    match (&spec.vectors, spec.angle) {
        (None, Some(theta)) => {
            let phase = angle(spec.phase.unwrap_or(0.0));
            let values = match spec.eigenvalues.as_deref() {
                None => [1.0, -1.0],
                Some(&[a, b]) => [a, b],
                Some(_) => return Err(validation(format!("{field}.eigenvalues"), "angle form takes exactly 2 eigenvalues")),
            };
            if values.iter().any(|v| !v.is_finite()) {
                return Err(validation(format!("{field}.eigenvalues"), "eigenvalues must be finite"));
            }
            Ok(Observable::rotated_with_values(angle(theta), phase, values))
        }
        (Some(vectors), None) => {
            if spec.phase.is_some() {
                return Err(validation(format!("{field}.phase"), "phase only applies to the angle form"));
            }
            let eigenvalues = spec
                .eigenvalues
                .clone()
                .ok_or_else(|| validation(format!("{field}.eigenvalues"), "explicit vectors need eigenvalues"))?;
            let basis = vectors
                .iter()
                .enumerate()
                .map(|(k, v)| {
                    StateVector::from_normalized(complex(v), INPUT_TOL)
                        .map_err(|e| validation(format!("{field}.vectors[{k}]"), e))
                })
                .collect::<Result<Vec<_>, _>>()?;
            Observable::new(basis, eigenvalues).map_err(|e| validation(format!("{field}.vectors"), e))
        }
        _ => Err(validation(field, "give exactly one of `vectors` or `angle`")),
    }
}

fn resolve_hamiltonian(field: &str, spec: &HamiltonianSpec) -> Result<Hamiltonian, ConfigError> {
    let real = |name: &str, v: Option<f64>| -> Result<f64, ConfigError> {
        let v = v.unwrap_or(0.0);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(validation(format!("{field}.{name}"), "must be finite"))
        }
    };
    match (&spec.preset, &spec.matrix) {
        (Some(preset), None) => match preset.as_str() {
            "rabi" => Ok(Hamiltonian::rabi(real("omega", spec.omega)?)),
            "pauli" => Ok(Hamiltonian::pauli(real("x", spec.x)?, real("y", spec.y)?, real("z", spec.z)?)),
            "zero" => {
                let d = spec.dim.unwrap_or(2);
                if d < 2 {
                    return Err(validation(format!("{field}.dim"), "dimension must be at least 2"));
                }
                Ok(Hamiltonian::zero(d))
            }
            other => Err(validation(
                format!("{field}.preset"),
                format!("unknown preset `{other}` (expected rabi, pauli or zero)"),
            )),
        },
        (None, Some(rows)) => {
            let d = rows.len();
            if d < 2 {
                return Err(validation(format!("{field}.matrix"), "matrix must be at least 2x2"));
            }
            if let Some(k) = rows.iter().position(|r| r.len() != d) {
                return Err(validation(format!("{field}.matrix[{k}]"), format!("row has {} entries, expected {d}", rows[k].len())));
            }
            let m = Matrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j][0], rows[i][j][1]));
            for i in 0..d {
                for j in i..d {
                    let dev = (m[(i, j)] - m[(j, i)].conj()).norm();
                    if dev > INPUT_TOL {
                        return Err(validation(
                            format!("{field}.matrix[{i}][{j}]"),
                            format!("not Hermitian: differs from conj(matrix[{j}][{i}]) by {dev:e}"),
                        ));
                    }
                }
            }
            Hamiltonian::new(m).map_err(|e| validation(format!("{field}.matrix"), e))
        }
        _ => Err(validation(field, "give exactly one of `preset` or `matrix`")),
    }
}
