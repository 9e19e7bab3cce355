//! Finite probability spaces, events and probability-annotated samples.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const WEIGHT_SUM_TOLERANCE: f64 = 1e-12;

/// Opaque outcome handle.
///
/// Toy distributions number their outcomes `0..len`; simulated trajectories
/// hash their canonical encoding to a handle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeId(pub u64);

impl fmt::Display for OutcomeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u64> for OutcomeId {
    fn from(v: u64) -> Self {
        OutcomeId(v)
    }
}

/// A finite outcome set with probability weights summing to one.
#[derive(Debug, Clone)]
pub struct DiscreteDistribution {
    outcomes: Vec<OutcomeId>,
    weights: Vec<f64>,
    index: HashMap<OutcomeId, usize>,
}

impl DiscreteDistribution {
    pub fn new<I>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (OutcomeId, f64)>,
    {
        let mut outcomes = Vec::new();
        let mut weights = Vec::new();
        let mut index = HashMap::new();
        for (id, w) in entries {
            if !(w.is_finite() && (0.0..=1.0).contains(&w)) {
                return Err(Error::InvalidDistribution(format!(
                    "weight {w} of outcome {id} is outside [0, 1]"
                )));
            }
            if index.insert(id, outcomes.len()).is_some() {
                return Err(Error::InvalidDistribution(format!(
                    "duplicate outcome {id}"
                )));
            }
            outcomes.push(id);
            weights.push(w);
        }
        if outcomes.is_empty() {
            return Err(Error::InvalidDistribution("no outcomes".into()));
        }
        let total = crate::numeric::compensated_sum(weights.iter().copied());
        if (total - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(Error::InvalidDistribution(format!(
                "weights sum to {total}, not 1"
            )));
        }
        Ok(Self {
            outcomes,
            weights,
            index,
        })
    }

    /// Outcomes numbered `0..weights.len()`.
    pub fn from_weights(weights: &[f64]) -> Result<Self> {
        Self::new(
            weights
                .iter()
                .enumerate()
                .map(|(i, &w)| (OutcomeId(i as u64), w)),
        )
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[OutcomeId] {
        &self.outcomes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn iter(&self) -> impl Iterator<Item = (OutcomeId, f64)> + '_ {
        self.outcomes
            .iter()
            .copied()
            .zip(self.weights.iter().copied())
    }

    pub fn weight(&self, id: OutcomeId) -> Option<f64> {
        self.index.get(&id).map(|&i| self.weights[i])
    }

    pub fn contains(&self, id: OutcomeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn position(&self, id: OutcomeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Draws `n` i.i.d. outcomes from `self`, annotating each with its weight.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<ProbabilitySample> {
        self.sample_for(None, n, rng)
    }

    /// Draws `n` i.i.d. outcomes from `self` used as the sampling distribution,
    /// annotating `x` with the probability under `target` (or `self` when
    /// `target` is `None`) and `y` with the sampling probability.
    pub fn sample_for<R: Rng + ?Sized>(
        &self,
        target: Option<&DiscreteDistribution>,
        n: usize,
        rng: &mut R,
    ) -> Result<ProbabilitySample> {
        let picker = WeightedIndex::new(&self.weights)
            .map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        let mut draws = Vec::with_capacity(n);
        for _ in 0..n {
            let i = picker.sample(rng);
            let id = self.outcomes[i];
            let draw = match target {
                None => Draw::new(id, self.weights[i]),
                Some(t) => {
                    let x = t.weight(id).ok_or_else(|| {
                        Error::InvalidDistribution(format!("outcome {id} missing from target"))
                    })?;
                    Draw::with_sampling(id, x, self.weights[i])
                }
            };
            draws.push(draw);
        }
        ProbabilitySample::new(draws)
    }

    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        let rows = read_numeric_rows(file, path, 2, 2)?;
        let entries = rows
            .into_iter()
            .map(|(id, vals)| (id, vals[0]))
            .collect::<Vec<_>>();
        Self::new(entries)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["outcome_id", "p"])?;
        for (id, p) in self.iter() {
            w.write_record([id.to_string(), p.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// A subset of outcomes with its known cardinality `m`.
///
/// `members` normally lists the whole event. Events over very large or
/// implicit outcome spaces (simulated trajectories) may list only the members
/// that matter for a given sample, as long as every observed outcome lying in
/// the event is listed; `m` then carries the true cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Event {
    members: BTreeSet<OutcomeId>,
    cardinality: u64,
}

impl Event {
    pub fn new<I: IntoIterator<Item = OutcomeId>>(members: I) -> Self {
        let members: BTreeSet<_> = members.into_iter().collect();
        let cardinality = members.len() as u64;
        Self {
            members,
            cardinality,
        }
    }

    /// An event whose listed members are a subset of the full event of size `m`.
    pub fn with_cardinality<I: IntoIterator<Item = OutcomeId>>(members: I, m: u64) -> Result<Self> {
        let members: BTreeSet<_> = members.into_iter().collect();
        if (members.len() as u64) > m {
            return Err(Error::InvalidEvent(format!(
                "{} listed members exceed declared cardinality {m}",
                members.len()
            )));
        }
        Ok(Self {
            members,
            cardinality: m,
        })
    }

    pub fn contains(&self, id: OutcomeId) -> bool {
        self.members.contains(&id)
    }

    /// Known cardinality `m = |A|`.
    pub fn cardinality(&self) -> u64 {
        self.cardinality
    }

    pub fn members(&self) -> impl Iterator<Item = OutcomeId> + '_ {
        self.members.iter().copied()
    }

    pub fn is_empty(&self) -> bool {
        self.cardinality == 0
    }

    /// `true` when every member is listed.
    pub fn is_fully_listed(&self) -> bool {
        self.members.len() as u64 == self.cardinality
    }

    pub fn check_against(&self, dist: &DiscreteDistribution) -> Result<()> {
        if let Some(id) = self.members.iter().find(|id| !dist.contains(**id)) {
            return Err(Error::InvalidEvent(format!(
                "member {id} is not an outcome of the distribution"
            )));
        }
        Ok(())
    }

    /// `Ω ∖ A` within `dist`.
    pub fn complement(&self, dist: &DiscreteDistribution) -> Self {
        Self::new(
            dist.outcomes()
                .iter()
                .copied()
                .filter(|id| !self.contains(*id)),
        )
    }

    /// Weights under `dist` of the listed members.
    pub fn weights_in<'a>(
        &'a self,
        dist: &'a DiscreteDistribution,
    ) -> impl Iterator<Item = f64> + 'a {
        self.members.iter().filter_map(|id| dist.weight(*id))
    }
}

/// One draw: an outcome and its probability under the target `p` (`x`) and,
/// for importance sampling, under the sampling distribution `p'` (`y`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Draw {
    pub outcome: OutcomeId,
    pub x: f64,
    pub y: Option<f64>,
}

impl Draw {
    pub fn new(outcome: OutcomeId, x: f64) -> Self {
        Self {
            outcome,
            x,
            y: None,
        }
    }

    pub fn with_sampling(outcome: OutcomeId, x: f64, y: f64) -> Self {
        Self {
            outcome,
            x,
            y: Some(y),
        }
    }

    /// Likelihood ratio `x / y`, or 1 when no sampling probability is attached.
    pub fn ratio(&self) -> f64 {
        match self.y {
            Some(y) => self.x / y,
            None => 1.0,
        }
    }
}

fn valid_probability(v: f64) -> bool {
    v > 0.0 && v <= 1.0
}

/// Ordered i.i.d. draws with attached probabilities.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ProbabilitySample {
    draws: Vec<Draw>,
}

impl ProbabilitySample {
    pub fn new(draws: Vec<Draw>) -> Result<Self> {
        for d in &draws {
            if !valid_probability(d.x) {
                return Err(Error::InvalidSample(format!(
                    "outcome {} has probability {} outside (0, 1]",
                    d.outcome, d.x
                )));
            }
            if let Some(y) = d.y {
                if !valid_probability(y) {
                    return Err(Error::InvalidSample(format!(
                        "outcome {} has sampling probability {y} outside (0, 1]",
                        d.outcome
                    )));
                }
            }
        }
        Ok(Self { draws })
    }

    pub fn draws(&self) -> &[Draw] {
        &self.draws
    }

    /// Sample size `n`.
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    /// Number `k` of draws falling in `event`.
    pub fn count_in(&self, event: &Event) -> usize {
        self.draws
            .iter()
            .filter(|d| event.contains(d.outcome))
            .count()
    }

    /// Distinct observed outcomes `O`, in order of first occurrence.
    pub fn observed_set(&self) -> Result<Vec<Draw>> {
        let mut seen: HashMap<OutcomeId, usize> = HashMap::new();
        let mut out: Vec<Draw> = Vec::new();
        for d in &self.draws {
            match seen.get(&d.outcome) {
                Some(&i) => {
                    let first = &out[i];
                    if first.x != d.x || first.y != d.y {
                        return Err(Error::InconsistentAnnotation {
                            outcome: d.outcome.0,
                        });
                    }
                }
                None => {
                    seen.insert(d.outcome, out.len());
                    out.push(*d);
                }
            }
        }
        Ok(out)
    }

    /// Splits into (draws in `event`, draws outside), preserving relative order.
    pub fn event_split(&self, event: &Event) -> (ProbabilitySample, ProbabilitySample) {
        let (inside, outside): (Vec<Draw>, Vec<Draw>) =
            self.draws.iter().partition(|d| event.contains(d.outcome));
        (
            ProbabilitySample { draws: inside },
            ProbabilitySample { draws: outside },
        )
    }

    pub fn has_sampling_probabilities(&self) -> bool {
        self.draws.iter().all(|d| d.y.is_some())
    }

    /// Reads `outcome_id,x[,y]` lines; a header line is optional.
    pub fn read_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)?;
        Self::read_csv_from(file, path)
    }

    pub fn read_csv_from<R: Read>(reader: R, label: &Path) -> Result<Self> {
        let rows = read_numeric_rows(reader, label, 2, 3)?;
        let draws = rows
            .into_iter()
            .map(|(id, vals)| Draw {
                outcome: id,
                x: vals[0],
                y: vals.get(1).copied(),
            })
            .collect();
        Self::new(draws)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().flexible(true).from_writer(out);
        for d in &self.draws {
            match d.y {
                Some(y) => {
                    w.write_record([d.outcome.to_string(), d.x.to_string(), y.to_string()])?
                }
                None => w.write_record([d.outcome.to_string(), d.x.to_string()])?,
            }
        }
        w.flush()?;
        Ok(())
    }
}

impl FromIterator<Draw> for std::result::Result<ProbabilitySample, Error> {
    fn from_iter<I: IntoIterator<Item = Draw>>(iter: I) -> Self {
        ProbabilitySample::new(iter.into_iter().collect())
    }
}

/// Parses headerless-or-headed CSV rows of `id,value[,value]`.
fn read_numeric_rows<R: Read>(
    reader: R,
    label: &Path,
    min_fields: usize,
    max_fields: usize,
) -> Result<Vec<(OutcomeId, Vec<f64>)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(|f| f.is_empty()) {
            continue;
        }
        if line == 0 && record.get(0).is_some_and(|f| f.parse::<u64>().is_err()) {
            continue;
        }
        if record.len() < min_fields || record.len() > max_fields {
            return Err(Error::parse(
                label,
                format!(
                    "line {}: expected {min_fields}..={max_fields} fields",
                    line + 1
                ),
            ));
        }
        let id = record[0]
            .parse::<u64>()
            .map_err(|e| Error::parse(label, format!("line {}: {e}", line + 1)))?;
        let vals = record
            .iter()
            .skip(1)
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| Error::parse(label, format!("line {}: {e}", line + 1)))
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push((OutcomeId(id), vals));
    }
    Ok(rows)
}

/// Which estimator produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorId {
    Pi0,
    Pi0Max,
    Pi1,
    Pi1Dual,
    Pi1Combined,
    Pi1Cv,
    Mu1,
    Pi2,
    Pi0Is,
    Pi1Is,
    Pi2Is,
}

impl EstimatorId {
    pub const ALL: [EstimatorId; 11] = [
        EstimatorId::Pi0,
        EstimatorId::Pi0Max,
        EstimatorId::Pi1,
        EstimatorId::Pi1Dual,
        EstimatorId::Pi1Combined,
        EstimatorId::Pi1Cv,
        EstimatorId::Mu1,
        EstimatorId::Pi2,
        EstimatorId::Pi0Is,
        EstimatorId::Pi1Is,
        EstimatorId::Pi2Is,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EstimatorId::Pi0 => "pi0",
            EstimatorId::Pi0Max => "pi0_max",
            EstimatorId::Pi1 => "pi1",
            EstimatorId::Pi1Dual => "pi1_dual",
            EstimatorId::Pi1Combined => "pi1_combined",
            EstimatorId::Pi1Cv => "pi1_cv",
            EstimatorId::Mu1 => "mu1",
            EstimatorId::Pi2 => "pi2",
            EstimatorId::Pi0Is => "pi0_is",
            EstimatorId::Pi1Is => "pi1_is",
            EstimatorId::Pi2Is => "pi2_is",
        }
    }
}

impl fmt::Display for EstimatorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for EstimatorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EstimatorId::ALL
            .iter()
            .copied()
            .find(|e| e.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown estimator `{s}`")))
    }
}

/// Point estimate plus variance estimate and diagnostics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimator: EstimatorId,
    pub estimate: f64,
    /// Absent when the estimator has none; may be negative for `pi1`, whose
    /// variance estimate is unbiased but not sign-constrained.
    pub variance_estimate: Option<f64>,
    pub n: usize,
    pub k: usize,
    pub notes: Vec<String>,
}

impl EstimateReport {
    pub(crate) fn new(estimator: EstimatorId, estimate: f64, n: usize, k: usize) -> Self {
        Self {
            estimator,
            estimate,
            variance_estimate: None,
            n,
            k,
            notes: Vec::new(),
        }
    }

    pub(crate) fn with_variance(mut self, v: f64) -> Self {
        self.variance_estimate = Some(v);
        self
    }

    pub(crate) fn note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }
}
