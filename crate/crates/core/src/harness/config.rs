use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::epidemic::{
    chain_complement_classes, chain_event_classes, detect, enumerate_chain_outcomes, ChainParams,
    EdgeTimeProb, Graph, NodeTimeProb, ResidualMode, SIModel, SentinelSchedule,
};
use crate::error::{Error, Result};
use crate::estimators::{group_classes, JackknifeForm, ProbabilityClass};
use crate::oracle::MAX_TUPLES;
use crate::sample_space::EstimatorId;

use super::supports_simulation;

/// The toy chain with optional sentinel tests; the default schedule is the
/// single test `(L, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChainSpec {
    pub length: u32,
    pub horizon: u32,
    pub p1: f64,
    pub p2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sentinels: Option<Vec<(usize, u32)>>,
}

impl ChainSpec {
    pub fn params(&self) -> Result<ChainParams> {
        ChainParams::new(self.length, self.horizon, self.p1, self.p2)
    }
}

/// A network read from an edge list with constant importation and
/// transmission probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub edges: PathBuf,
    pub schedule: PathBuf,
    pub horizon: u32,
    pub p1: f64,
    pub p2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelSpec {
    Chain(ChainSpec),
    Network(NetworkSpec),
}

fn default_estimators() -> Vec<EstimatorId> {
    vec![EstimatorId::Pi0, EstimatorId::Pi1, EstimatorId::Pi2]
}

fn default_grid() -> Vec<u64> {
    vec![10]
}

fn default_reps() -> u64 {
    1000
}

fn default_level() -> f64 {
    0.01
}

fn default_budget() -> u64 {
    10_000_000
}

/// Everything a run needs. Serialized as JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelSpec,
    #[serde(default = "default_estimators")]
    pub estimators: Vec<EstimatorId>,
    #[serde(default = "default_grid")]
    pub n_grid: Vec<u64>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub jackknife: JackknifeForm,
    /// Test level for the hypothesis test.
    #[serde(default = "default_level")]
    pub level: f64,
    /// Size `m` of the estimated event, if it cannot be enumerated.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event_size: Option<u64>,
    /// Simulations used to approximate `π` when it has no exact value.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pilot_reps: Option<u64>,
    /// Largest outcome space enumerated for exact reference values.
    #[serde(default = "default_budget")]
    pub enumeration_budget: u64,
}

impl ExperimentConfig {
    /// The toy chain `L = 10, T = 20` with the shipped defaults
    /// `p1 = 0.1, p2 = 0.5`.
    pub fn default_chain() -> Self {
        Self {
            model: ModelSpec::Chain(ChainSpec {
                length: 10,
                horizon: 20,
                p1: 0.1,
                p2: 0.5,
                sentinels: None,
            }),
            estimators: default_estimators(),
            n_grid: default_grid(),
            reps: default_reps(),
            seed: 1,
            output: None,
            jackknife: JackknifeForm::default(),
            level: default_level(),
            event_size: None,
            pilot_reps: None,
            enumeration_budget: default_budget(),
        }
    }

    pub fn from_json(text: &str, label: &Path) -> Result<Self> {
        let mut config: Self =
            serde_json::from_str(text).map_err(|e| Error::parse(label, e.to_string()))?;
        if let (ModelSpec::Network(net), Some(dir)) = (&mut config.model, label.parent()) {
            net.edges = dir.join(&net.edges);
            net.schedule = dir.join(&net.schedule);
        }
        config.validate()?;
        Ok(config)
    }

    /// Reads a JSON config; relative network paths resolve against its directory.
    pub fn load<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        Self::from_json(&std::fs::read_to_string(path)?, path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.n_grid.is_empty() || self.n_grid.contains(&0) {
            return Err(Error::Config("n grid must be nonempty with n >= 1".into()));
        }
        if self.estimators.is_empty() {
            return Err(Error::Config("no estimators selected".into()));
        }
        if let Some(id) = self.estimators.iter().find(|id| !supports_simulation(**id)) {
            return Err(Error::Config(format!(
                "{id} is not available for simulated epidemics"
            )));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "level {} outside (0, 1)",
                self.level
            )));
        }
        if self.enumeration_budget > MAX_TUPLES {
            return Err(Error::Config(format!(
                "enumeration budget above {MAX_TUPLES}"
            )));
        }
        if let ModelSpec::Chain(c) = &self.model {
            c.params()?;
        }
        Ok(())
    }

    pub fn resolve_model(&self) -> Result<ResolvedModel> {
        match &self.model {
            ModelSpec::Chain(spec) => {
                let params = spec.params()?;
                let model = SIModel::chain(&params);
                let schedule = SentinelSchedule::new(
                    spec.sentinels
                        .clone()
                        .unwrap_or_else(|| vec![(params.length as usize, params.horizon)]),
                );
                schedule.check_against(&model)?;
                Ok(ResolvedModel {
                    model,
                    schedule,
                    chain: Some(params),
                })
            }
            ModelSpec::Network(spec) => {
                let graph = Graph::read_edge_list(&spec.edges)?;
                let model = SIModel::new(
                    graph,
                    NodeTimeProb::Constant(spec.p1),
                    EdgeTimeProb::Constant(spec.p2),
                    spec.horizon,
                )?;
                let schedule = SentinelSchedule::read_csv(&spec.schedule)?;
                schedule.check_against(&model)?;
                Ok(ResolvedModel {
                    model,
                    schedule,
                    chain: None,
                })
            }
        }
    }
}

/// A model ready to simulate, with its sentinel schedule.
#[derive(Debug, Clone)]
pub struct ResolvedModel {
    pub model: SIModel,
    pub schedule: SentinelSchedule,
    pub chain: Option<ChainParams>,
}

impl ResolvedModel {
    /// Probability classes of `{detected}` and `{not detected}` when the
    /// outcome space is known exactly (chain models within `budget`).
    pub fn detection_classes(
        &self,
        budget: u64,
    ) -> Result<Option<(Vec<ProbabilityClass>, Vec<ProbabilityClass>)>> {
        let Some(params) = self.chain else {
            return Ok(None);
        };
        let end_test = [(params.length as usize, params.horizon)];
        if self.schedule.tests == end_test {
            return Ok(Some((
                chain_event_classes(&params),
                chain_complement_classes(&params),
            )));
        }
        let outcomes =
            match enumerate_chain_outcomes(&params, params.horizon, ResidualMode::Expanded, budget)
            {
                Ok(o) => o,
                Err(Error::BudgetExceeded { .. }) => return Ok(None),
                Err(e) => return Err(e),
            };
        let (mut hit, mut miss) = (Vec::new(), Vec::new());
        for (outcome, p) in outcomes {
            let t = outcome.to_trajectory(&params, params.horizon)?;
            if detect(&t, &self.schedule) {
                hit.push((p, p));
            } else {
                miss.push((p, p));
            }
        }
        Ok(Some((group_classes(hit), group_classes(miss))))
    }
}
