//! Domain types: feature schemas, workers, populations, teams, and the
//! per-feature aggregate count vectors that make team scores cheap to
//! maintain under membership changes.

mod discretize;
mod io;

pub use discretize::{discretize, DiscretizeOutput};
pub use io::{
    load_population, load_schema, load_teams_csv, save_population, save_schema, save_teams_csv,
    TeamRecord,
};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// How two values of a feature are compared for agreement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Agreement {
    /// Categorical identity: equal symbol indices agree.
    Exact,
    /// Numeric, to be discretized into `B` equal-width intervals.
    Bins,
    /// Numeric, to be discretized at the local minima of a kernel density
    /// estimate of the observed values.
    KdeBins,
    /// Numeric: values within `gamma` of each other agree.
    Threshold,
    /// Like `Threshold`, but conflict triangles are weighted by the average
    /// absolute difference of the disagreeing pairs.
    Weighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Categorical,
    Numeric,
}

/// One attribute column: its comparison semantics and, for categorical
/// features, the ordered list of admissible symbols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    pub agreement: Agreement,
    /// Bin count for `Bins` agreement.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    /// Agreement threshold for `Threshold` / `Weighted`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    /// Admissible symbols, in index order (categorical only).
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub values: Vec<String>,
}

impl FeatureSpec {
    pub fn categorical(name: impl Into<String>, values: &[&str]) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Categorical,
            agreement: Agreement::Exact,
            bins: None,
            gamma: None,
            values: values.iter().map(|s| s.to_string()).collect(),
        }
    }

    pub fn numeric(name: impl Into<String>, agreement: Agreement) -> Self {
        FeatureSpec {
            name: name.into(),
            kind: FeatureKind::Numeric,
            agreement,
            bins: None,
            gamma: None,
            values: Vec::new(),
        }
    }

    pub fn with_bins(mut self, bins: usize) -> Self {
        self.bins = Some(bins);
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    /// Index of `symbol`, appending it to the admissible list when unseen.
    pub fn symbol_index_or_insert(&mut self, symbol: &str) -> u32 {
        match self.values.iter().position(|v| v == symbol) {
            Some(i) => i as u32,
            None => {
                self.values.push(symbol.to_string());
                (self.values.len() - 1) as u32
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match self.kind {
            FeatureKind::Categorical => {
                // The value list may start empty; ingestion appends unseen
                // symbols, and population validation keeps indices in range.
                if self.agreement != Agreement::Exact {
                    return Err(Error::Schema(format!(
                        "categorical feature '{}' must use exact agreement",
                        self.name
                    )));
                }
            }
            FeatureKind::Numeric => match self.agreement {
                Agreement::Exact => {
                    return Err(Error::Schema(format!(
                        "numeric feature '{}' cannot use exact agreement",
                        self.name
                    )));
                }
                Agreement::Bins => {
                    if self.bins.unwrap_or(0) < 1 {
                        return Err(Error::Schema(format!(
                            "feature '{}': bins agreement requires bins >= 1",
                            self.name
                        )));
                    }
                }
                Agreement::Threshold | Agreement::Weighted => {
                    let g = self.gamma.unwrap_or(-1.0);
                    if g.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) && g != 0.0 {
                        return Err(Error::Schema(format!(
                            "feature '{}': threshold agreement requires gamma >= 0",
                            self.name
                        )));
                    }
                }
                Agreement::KdeBins => {}
            },
        }
        Ok(())
    }
}

/// Ordered feature declarations; the declaration order is the canonical
/// feature index used everywhere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub features: Vec<FeatureSpec>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self> {
        if features.is_empty() {
            return Err(Error::Schema("schema declares no features".into()));
        }
        for (i, a) in features.iter().enumerate() {
            a.validate()?;
            for b in &features[..i] {
                if a.name == b.name {
                    return Err(Error::Schema(format!(
                        "duplicate feature name '{}'",
                        a.name
                    )));
                }
            }
        }
        Ok(FeatureSchema { features })
    }

    /// Number of features, `m`.
    pub fn m(&self) -> usize {
        self.features.len()
    }

    /// True when every feature compares by discretized identity, i.e. the
    /// aggregate count vectors fully determine all pairwise agreements.
    pub fn all_countable(&self) -> bool {
        self.features
            .iter()
            .all(|f| f.kind == FeatureKind::Categorical)
    }
}

/// A single attribute value: a symbol index into the feature's value list,
/// or a raw real for numeric features.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum AttrValue {
    Cat(u32),
    Num(f64),
}

impl AttrValue {
    pub fn as_cat(&self) -> Option<u32> {
        match self {
            AttrValue::Cat(v) => Some(*v),
            AttrValue::Num(_) => None,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            AttrValue::Num(v) => Some(*v),
            AttrValue::Cat(_) => None,
        }
    }
}

/// One individual: a dense id and an m-dimensional attribute vector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: u32,
    pub attributes: Vec<AttrValue>,
}

/// An indexed roster of workers sharing one schema. Ids are exactly
/// `0..n-1` in roster order.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    schema: FeatureSchema,
    workers: Vec<Worker>,
}

impl Population {
    pub fn new(schema: FeatureSchema, workers: Vec<Worker>) -> Result<Self> {
        if workers.is_empty() {
            return Err(Error::EmptyPopulation);
        }
        for (i, w) in workers.iter().enumerate() {
            if w.id as usize != i {
                return Err(Error::Schema(format!(
                    "worker ids must be dense: expected {i}, found {}",
                    w.id
                )));
            }
            if w.attributes.len() != schema.m() {
                return Err(Error::Schema(format!(
                    "worker {i} has {} attributes, schema declares {}",
                    w.attributes.len(),
                    schema.m()
                )));
            }
            for (f, (value, spec)) in w.attributes.iter().zip(&schema.features).enumerate() {
                match (spec.kind, value) {
                    (FeatureKind::Categorical, AttrValue::Cat(v)) => {
                        if *v as usize >= spec.values.len() {
                            return Err(Error::Schema(format!(
                                "worker {i}, feature {f}: symbol index {v} out of range"
                            )));
                        }
                    }
                    (FeatureKind::Numeric, AttrValue::Num(_)) => {}
                    _ => {
                        return Err(Error::Schema(format!(
                            "worker {i}, feature {f}: value kind does not match schema"
                        )));
                    }
                }
            }
        }
        Ok(Population { schema, workers })
    }

    /// Build from rows of attribute values, assigning ids in row order.
    pub fn from_rows(schema: FeatureSchema, rows: Vec<Vec<AttrValue>>) -> Result<Self> {
        let workers = rows
            .into_iter()
            .enumerate()
            .map(|(i, attributes)| Worker {
                id: i as u32,
                attributes,
            })
            .collect();
        Population::new(schema, workers)
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn workers(&self) -> &[Worker] {
        &self.workers
    }

    pub fn worker(&self, id: u32) -> &Worker {
        &self.workers[id as usize]
    }

    pub fn n(&self) -> usize {
        self.workers.len()
    }

    pub fn m(&self) -> usize {
        self.schema.m()
    }
}

/// Per-feature value-count histogram of a team; `counts[f][v]` is the number
/// of members whose discretized value for feature `f` is `v`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AggregateFeatureVector {
    pub counts: Vec<Vec<u32>>,
}

impl AggregateFeatureVector {
    fn empty(schema: &FeatureSchema) -> Self {
        AggregateFeatureVector {
            counts: schema
                .features
                .iter()
                .map(|f| vec![0; f.values.len()])
                .collect(),
        }
    }

    fn apply(&mut self, worker: &Worker, delta: i64) {
        for (f, value) in worker.attributes.iter().enumerate() {
            let v = value
                .as_cat()
                .expect("aggregates only exist for categorical features")
                as usize;
            let c = &mut self.counts[f][v];
            *c = (*c as i64 + delta) as u32;
        }
    }
}

/// Count the team's discretized values per feature in O(m·|T|).
///
/// Errors with [`Error::AggregatesUndefined`] when any feature uses
/// threshold or weighted agreement (or is otherwise not discretized),
/// since counts cannot represent such agreements.
pub fn build_aggregates(members: &[u32], pop: &Population) -> Result<AggregateFeatureVector> {
    if !pop.schema().all_countable() {
        return Err(Error::AggregatesUndefined);
    }
    let mut agg = AggregateFeatureVector::empty(pop.schema());
    for &id in members {
        agg.apply(pop.worker(id), 1);
    }
    Ok(agg)
}

/// Membership change direction for team deltas.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Delta {
    Add,
    Remove,
}

/// A team: a set of worker ids plus cached aggregate counts when the
/// schema supports them.
///
/// Intended for exclusive ownership by one execution context at a time;
/// scoring reads of distinct teams may run concurrently.
#[derive(Debug, Clone, PartialEq)]
pub struct Team {
    members: Vec<u32>,
    aggregates: Option<AggregateFeatureVector>,
}

impl Team {
    pub fn new(members: Vec<u32>, pop: &Population) -> Team {
        let aggregates = build_aggregates(&members, pop).ok();
        Team {
            members,
            aggregates,
        }
    }

    pub fn members(&self) -> &[u32] {
        &self.members
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    pub fn contains(&self, id: u32) -> bool {
        self.members.contains(&id)
    }

    pub fn aggregates(&self) -> Option<&AggregateFeatureVector> {
        self.aggregates.as_ref()
    }

    /// Add or remove one member, updating the cached aggregates in O(m).
    pub fn apply_member_delta(&mut self, pop: &Population, id: u32, delta: Delta) -> Result<()> {
        match delta {
            Delta::Add => {
                if self.contains(id) {
                    return Err(Error::Precondition(format!("worker {id} already in team")));
                }
                self.members.push(id);
                if let Some(agg) = &mut self.aggregates {
                    agg.apply(pop.worker(id), 1);
                }
            }
            Delta::Remove => {
                let pos = self
                    .members
                    .iter()
                    .position(|&m| m == id)
                    .ok_or_else(|| Error::Precondition(format!("worker {id} not in team")))?;
                self.members.remove(pos);
                if let Some(agg) = &mut self.aggregates {
                    agg.apply(pop.worker(id), -1);
                }
            }
        }
        Ok(())
    }
}

/// A disjoint cover of the population by teams.
#[derive(Debug, Clone, PartialEq)]
pub struct Partitioning {
    pub teams: Vec<Team>,
}

impl Partitioning {
    pub fn from_members(teams: Vec<Vec<u32>>, pop: &Population) -> Partitioning {
        Partitioning {
            teams: teams.into_iter().map(|ms| Team::new(ms, pop)).collect(),
        }
    }

    /// Worker id -> team index lookup.
    pub fn team_of(&self, n: usize) -> Vec<u32> {
        let mut out = vec![u32::MAX; n];
        for (j, t) in self.teams.iter().enumerate() {
            for &id in t.members() {
                out[id as usize] = j as u32;
            }
        }
        out
    }

    /// Check disjointness, coverage, and the target sizes.
    pub fn validate(&self, pop: &Population, sizes: &[usize]) -> Result<()> {
        if self.teams.len() != sizes.len() {
            return Err(Error::Infeasible(format!(
                "{} teams, {} target sizes",
                self.teams.len(),
                sizes.len()
            )));
        }
        let mut seen = vec![false; pop.n()];
        for (j, (team, &target)) in self.teams.iter().zip(sizes).enumerate() {
            if team.size() != target {
                return Err(Error::Infeasible(format!(
                    "team {j} has {} members, target {target}",
                    team.size()
                )));
            }
            for &id in team.members() {
                let slot = seen
                    .get_mut(id as usize)
                    .ok_or_else(|| Error::Precondition(format!("worker {id} out of range")))?;
                if *slot {
                    return Err(Error::Precondition(format!("worker {id} assigned twice")));
                }
                *slot = true;
            }
        }
        if !seen.iter().all(|&s| s) {
            return Err(Error::Precondition(
                "partitioning does not cover the population".into(),
            ));
        }
        Ok(())
    }
}
