//! Discrete-time SI epidemics on networks with exact trajectory probabilities.
//!
//! Every node starts susceptible. At step `t` a susceptible node `v` becomes
//! infected with probability
//! `1 - (1 - p1(v, t)) · Π_{u ~ v infected at t-1} (1 - p2(u, v, t))`;
//! infected nodes stay infected. Updates are synchronous: the state at `t`
//! depends only on the state at `t - 1`. At `t = 0` only importation acts.
//! The simulator multiplies up the probability of every realized change and
//! non-change, so each trajectory carries its exact path probability.

mod chain;
mod hypergeometric;

use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::sample_space::OutcomeId;

pub use chain::{
    chain_complement_classes, chain_complement_prob, chain_event_cardinality, chain_event_classes,
    chain_outcome_prob, chain_pi_2f1, chain_pi_analytic, enumerate_chain_outcomes, ChainOutcome,
    ChainParams, ResidualMode,
};
pub use hypergeometric::hyp2f1;

/// Undirected simple graph on nodes `0..node_count`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<usize>>,
}

impl Graph {
    pub fn new(node_count: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut sets = vec![BTreeSet::new(); node_count];
        for &(u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::InvalidModel(format!(
                    "edge ({u}, {v}) references a node outside 0..{node_count}"
                )));
            }
            if u == v {
                return Err(Error::InvalidModel(format!("self-loop at node {u}")));
            }
            sets[u].insert(v);
            sets[v].insert(u);
        }
        Ok(Self {
            adjacency: sets.into_iter().map(|s| s.into_iter().collect()).collect(),
        })
    }

    /// Path `0 - 1 - … - length`.
    pub fn chain(length: usize) -> Self {
        let edges: Vec<_> = (0..length).map(|v| (v, v + 1)).collect();
        Self::new(length + 1, &edges).expect("chain edges are valid")
    }

    /// Parses `u v` lines; nodes are `0..=max id`. Blank lines and `#`
    /// comments are skipped.
    pub fn parse_edge_list(text: &str, label: &Path) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let ids = line
                .split(|c: char| c.is_whitespace() || c == ',')
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<usize>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::parse(label, format!("line {}: {e}", i + 1)))?;
            let [u, v] = ids[..] else {
                return Err(Error::parse(
                    label,
                    format!("line {}: expected `u v`", i + 1),
                ));
            };
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            edges.push((u, v));
        }
        let n = max_id.map_or(0, |m| m + 1);
        Self::new(n, &edges)
    }

    pub fn read_edge_list<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        Self::parse_edge_list(&std::fs::read_to_string(path)?, path)
    }

    pub fn node_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }
}

/// Importation probability `p1(v, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum NodeTimeProb {
    Constant(f64),
    Table {
        default: f64,
        entries: HashMap<(usize, u32), f64>,
    },
}

impl NodeTimeProb {
    pub fn get(&self, v: usize, t: u32) -> f64 {
        match self {
            NodeTimeProb::Constant(p) => *p,
            NodeTimeProb::Table { default, entries } => *entries.get(&(v, t)).unwrap_or(default),
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            NodeTimeProb::Constant(p) => vec![*p],
            NodeTimeProb::Table { default, entries } => std::iter::once(*default)
                .chain(entries.values().copied())
                .collect(),
        }
    }
}

/// Transmission probability `p2(source, target, t)` along an edge.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeTimeProb {
    Constant(f64),
    Table {
        default: f64,
        entries: HashMap<(usize, usize, u32), f64>,
    },
}

impl EdgeTimeProb {
    pub fn get(&self, source: usize, target: usize, t: u32) -> f64 {
        match self {
            EdgeTimeProb::Constant(p) => *p,
            EdgeTimeProb::Table { default, entries } => {
                *entries.get(&(source, target, t)).unwrap_or(default)
            }
        }
    }

    fn values(&self) -> Vec<f64> {
        match self {
            EdgeTimeProb::Constant(p) => vec![*p],
            EdgeTimeProb::Table { default, entries } => std::iter::once(*default)
                .chain(entries.values().copied())
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SIModel {
    pub graph: Graph,
    pub importation: NodeTimeProb,
    pub transmission: EdgeTimeProb,
    /// Last simulated step `T`; steps run over `0..=T`.
    pub horizon: u32,
}

impl SIModel {
    pub fn new(
        graph: Graph,
        importation: NodeTimeProb,
        transmission: EdgeTimeProb,
        horizon: u32,
    ) -> Result<Self> {
        let bad = importation
            .values()
            .into_iter()
            .chain(transmission.values())
            .find(|p| !(0.0..=1.0).contains(p));
        if let Some(p) = bad {
            return Err(Error::InvalidModel(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        Ok(Self {
            graph,
            importation,
            transmission,
            horizon,
        })
    }

    /// The toy chain: node 0 seeded at `t = 0` with probability `p1`, constant
    /// transmission `p2`, no other importation.
    pub fn chain(params: &ChainParams) -> Self {
        let mut entries = HashMap::new();
        entries.insert((0, 0), params.p1);
        Self {
            graph: Graph::chain(params.length as usize),
            importation: NodeTimeProb::Table {
                default: 0.0,
                entries,
            },
            transmission: EdgeTimeProb::Constant(params.p2),
            horizon: params.horizon,
        }
    }
}

/// Realized infection matrix over steps `0..=T` with its log-probability.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    node_count: usize,
    horizon: u32,
    /// Row-major by time: `infected[t * node_count + v]`.
    infected: Vec<bool>,
    logp: f64,
}

impl Trajectory {
    pub(crate) fn from_first_infections(
        node_count: usize,
        horizon: u32,
        first: &[Option<u32>],
        logp: f64,
    ) -> Self {
        let mut infected = vec![false; node_count * (horizon as usize + 1)];
        for (v, t0) in first.iter().enumerate() {
            if let Some(t0) = *t0 {
                for t in t0..=horizon {
                    infected[t as usize * node_count + v] = true;
                }
            }
        }
        Self {
            node_count,
            horizon,
            infected,
            logp,
        }
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn horizon(&self) -> u32 {
        self.horizon
    }

    pub fn is_infected(&self, v: usize, t: u32) -> bool {
        v < self.node_count && t <= self.horizon && self.infected[t as usize * self.node_count + v]
    }

    pub fn first_infection(&self, v: usize) -> Option<u32> {
        (0..=self.horizon).find(|&t| self.is_infected(v, t))
    }

    /// Natural log of the path probability.
    pub fn logp(&self) -> f64 {
        self.logp
    }

    pub fn probability(&self) -> f64 {
        self.logp.exp()
    }

    /// Canonical encoding: node count and horizon (little-endian `u32`),
    /// then the infection matrix bit-packed row-major, least significant
    /// bit first.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + self.infected.len().div_ceil(8));
        out.extend_from_slice(&(self.node_count as u32).to_le_bytes());
        out.extend_from_slice(&self.horizon.to_le_bytes());
        for chunk in self.infected.chunks(8) {
            let byte = chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, &b)| acc | ((b as u8) << i));
            out.push(byte);
        }
        out
    }

    /// Outcome handle: the first eight bytes of the SHA-256 of [`Self::encode`].
    pub fn outcome_id(&self) -> OutcomeId {
        let digest = Sha256::digest(self.encode());
        let mut head = [0u8; 8];
        head.copy_from_slice(&digest[..8]);
        OutcomeId(u64::from_le_bytes(head))
    }

    /// One line per time step, one `0`/`1` per node.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for t in 0..=self.horizon {
            let _ = write!(s, "{t}:");
            for v in 0..self.node_count {
                s.push(if self.is_infected(v, t) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// SI monotonicity: no node recovers.
    pub fn is_monotone(&self) -> bool {
        (0..self.node_count).all(|v| {
            (1..=self.horizon).all(|t| !self.is_infected(v, t - 1) || self.is_infected(v, t))
        })
    }
}

/// Simulates one trajectory, accumulating the log-probability of every
/// realized transition. Nodes with zero hazard contribute a factor of one and
/// consume no randomness.
pub fn simulate<R: Rng + ?Sized>(model: &SIModel, rng: &mut R) -> Trajectory {
    let n = model.graph.node_count();
    let horizon = model.horizon;
    let mut infected = vec![false; n * (horizon as usize + 1)];
    let mut logp = 0.0;
    for t in 0..=horizon {
        let row = t as usize * n;
        for v in 0..n {
            if t > 0 && infected[row - n + v] {
                infected[row + v] = true;
                continue;
            }
            let mut log_survival = (-model.importation.get(v, t)).ln_1p();
            if t > 0 {
                for &u in model.graph.neighbors(v) {
                    if infected[row - n + u] {
                        log_survival += (-model.transmission.get(u, v, t)).ln_1p();
                    }
                }
            }
            if log_survival == 0.0 {
                continue;
            }
            let hazard = -log_survival.exp_m1();
            if log_survival == f64::NEG_INFINITY {
                infected[row + v] = true;
            } else if rng.random::<f64>() < hazard {
                infected[row + v] = true;
                logp += hazard.ln();
            } else {
                logp += log_survival;
            }
        }
    }
    Trajectory {
        node_count: n,
        horizon,
        infected,
        logp,
    }
}

/// Scheduled infection tests `(node, time)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SentinelSchedule {
    pub tests: Vec<(usize, u32)>,
}

impl SentinelSchedule {
    pub fn new(tests: Vec<(usize, u32)>) -> Self {
        Self { tests }
    }

    pub fn check_against(&self, model: &SIModel) -> Result<()> {
        for &(node, time) in &self.tests {
            if node >= model.graph.node_count() || time > model.horizon {
                return Err(Error::InvalidModel(format!(
                    "sentinel test ({node}, {time}) is outside the model"
                )));
            }
        }
        Ok(())
    }

    /// Parses `node,time` lines, with an optional header.
    pub fn parse_csv(text: &str, label: &Path) -> Result<Self> {
        let mut tests = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut fields = line.split(',').map(str::trim);
            let (Some(a), Some(b), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(Error::parse(
                    label,
                    format!("line {}: expected `node,time`", i + 1),
                ));
            };
            match (a.parse::<usize>(), b.parse::<u32>()) {
                (Ok(node), Ok(time)) => tests.push((node, time)),
                _ if tests.is_empty() && a.parse::<f64>().is_err() => continue,
                _ => {
                    return Err(Error::parse(label, format!("line {}: bad number", i + 1)));
                }
            }
        }
        Ok(Self { tests })
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        Self::parse_csv(&std::fs::read_to_string(path)?, path)
    }
}

/// `true` iff some scheduled test finds its node infected.
pub fn detect(trajectory: &Trajectory, schedule: &SentinelSchedule) -> bool {
    schedule
        .tests
        .iter()
        .any(|&(node, time)| trajectory.is_infected(node, time))
}
