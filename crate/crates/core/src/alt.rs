//! Rival faultline measures used for benchmarking: Subgroup Strength and the
//! clustering-based Average Silhouette Width procedure.
//!
//! ASW is deliberately faithful to its three-step recipe — agglomerative
//! pre-clustering under Ward and average linkage, silhouette evaluation of
//! every cluster count, then greedy single-member moves until a local
//! optimum — and is therefore orders of magnitude slower than the
//! conflict-triangle score. That gap is the point of the comparison.

use crate::error::{Error, Result};
use crate::measure::agrees;
use crate::model::{FeatureKind, Population};
use crate::stats::{mean, population_std};

/// A candidate split of a team into `c` labeled clusters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterConfiguration {
    /// Cluster label of each team member (positional, 0..c).
    pub assignment: Vec<usize>,
    pub clusters: usize,
}

/// Subgroup Strength: population standard deviation of the per-dyad counts
/// of features on which the pair agrees.
pub fn ss_score(members: &[u32], pop: &Population) -> Result<f64> {
    if members.len() < 2 {
        return Err(Error::Precondition(
            "subgroup strength needs at least 2 members".into(),
        ));
    }
    let schema = pop.schema();
    let mut overlaps = Vec::with_capacity(members.len() * (members.len() - 1) / 2);
    for (i, &a) in members.iter().enumerate() {
        for &b in &members[i + 1..] {
            let overlap = (0..pop.m())
                .filter(|&f| agrees(pop.worker(a), pop.worker(b), f, schema))
                .count();
            overlaps.push(overlap as f64);
        }
    }
    // Canonical accumulation order keeps the result exactly invariant under
    // member permutations.
    overlaps.sort_by(f64::total_cmp);
    Ok(population_std(&overlaps))
}

/// Indicator encoding for distance-based methods: one 0/1 column per
/// categorical symbol, one standardized column per numeric feature
/// (standardized over the listed members; a constant column becomes zeros).
pub fn indicator_encode(members: &[u32], pop: &Population) -> Vec<Vec<f64>> {
    let schema = pop.schema();
    let mut points = vec![Vec::new(); members.len()];
    for (f, spec) in schema.features.iter().enumerate() {
        match spec.kind {
            FeatureKind::Categorical => {
                for (row, &id) in members.iter().enumerate() {
                    let v = pop.worker(id).attributes[f].as_cat().unwrap() as usize;
                    for j in 0..spec.values.len() {
                        points[row].push(if j == v { 1.0 } else { 0.0 });
                    }
                }
            }
            FeatureKind::Numeric => {
                let raw: Vec<f64> = members
                    .iter()
                    .map(|&id| pop.worker(id).attributes[f].as_num().unwrap())
                    .collect();
                let mu = mean(&raw);
                let sd = population_std(&raw);
                for (row, v) in raw.iter().enumerate() {
                    points[row].push(if sd > 0.0 { (v - mu) / sd } else { 0.0 });
                }
            }
        }
    }
    points
}

fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

#[allow(clippy::needless_range_loop)]
fn distance_matrix(points: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let k = points.len();
    let mut d = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let v = euclidean(&points[i], &points[j]);
            d[i][j] = v;
            d[j][i] = v;
        }
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    Ward,
    Average,
}

/// Agglomerate singletons; record the assignment at every cluster count in
/// `2..=k-1`. Merge ties break on the smallest slot pair.
fn cluster_configurations(dist: &[Vec<f64>], linkage: Linkage) -> Vec<ClusterConfiguration> {
    let k = dist.len();
    let mut clusters: Vec<Vec<usize>> = (0..k).map(|i| vec![i]).collect();
    let mut alive: Vec<bool> = vec![true; k];
    // Ward updates run on squared distances; average linkage on plain ones.
    let mut d: Vec<Vec<f64>> = match linkage {
        Linkage::Ward => dist
            .iter()
            .map(|row| row.iter().map(|&v| v * v).collect())
            .collect(),
        Linkage::Average => dist.to_vec(),
    };

    let mut configs = Vec::new();
    let mut remaining = k;
    while remaining > 2 {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..k {
            if !alive[i] {
                continue;
            }
            for j in i + 1..k {
                if !alive[j] {
                    continue;
                }
                if best.is_none_or(|(bd, _, _)| d[i][j] < bd) {
                    best = Some((d[i][j], i, j));
                }
            }
        }
        let (dij, i, j) = best.expect("at least two clusters alive");
        let (ni, nj) = (clusters[i].len() as f64, clusters[j].len() as f64);
        for c in 0..k {
            if !alive[c] || c == i || c == j {
                continue;
            }
            let nc = clusters[c].len() as f64;
            let merged = match linkage {
                Linkage::Ward => {
                    ((ni + nc) * d[i][c] + (nj + nc) * d[j][c] - nc * dij) / (ni + nj + nc)
                }
                Linkage::Average => (ni * d[i][c] + nj * d[j][c]) / (ni + nj),
            };
            d[i][c] = merged;
            d[c][i] = merged;
        }
        let absorbed = std::mem::take(&mut clusters[j]);
        clusters[i].extend(absorbed);
        alive[j] = false;
        remaining -= 1;

        if (2..k).contains(&remaining) {
            let mut assignment = vec![0usize; k];
            let mut label = 0usize;
            for (slot, members) in clusters.iter().enumerate() {
                if alive[slot] {
                    for &m in members {
                        assignment[m] = label;
                    }
                    label += 1;
                }
            }
            configs.push(ClusterConfiguration {
                assignment,
                clusters: label,
            });
        }
    }
    configs
}

/// Average silhouette width of a configuration. Singleton clusters and
/// all-zero distances score 0 by convention.
#[allow(clippy::needless_range_loop)]
fn average_silhouette(dist: &[Vec<f64>], config: &ClusterConfiguration) -> f64 {
    let k = dist.len();
    let c = config.clusters;
    let mut cluster_members: Vec<Vec<usize>> = vec![Vec::new(); c];
    for (i, &label) in config.assignment.iter().enumerate() {
        cluster_members[label].push(i);
    }
    let mut total = 0.0;
    for i in 0..k {
        let own = config.assignment[i];
        if cluster_members[own].len() == 1 {
            continue; // s(i) = 0
        }
        let a: f64 = cluster_members[own]
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| dist[i][j])
            .sum::<f64>()
            / (cluster_members[own].len() - 1) as f64;
        let b = (0..c)
            .filter(|&other| other != own && !cluster_members[other].is_empty())
            .map(|other| {
                cluster_members[other]
                    .iter()
                    .map(|&j| dist[i][j])
                    .sum::<f64>()
                    / cluster_members[other].len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    total / k as f64
}

/// Greedy refinement: apply the best strictly-improving single-member move
/// until none exists. Ties break on (member index, target label); a move may
/// not empty its source cluster.
fn hill_climb(dist: &[Vec<f64>], config: &mut ClusterConfiguration) -> f64 {
    let k = dist.len();
    let c = config.clusters;
    let mut sizes = vec![0usize; c];
    for &label in &config.assignment {
        sizes[label] += 1;
    }
    let mut current = average_silhouette(dist, config);
    loop {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..k {
            let from = config.assignment[i];
            if sizes[from] == 1 {
                continue;
            }
            for target in 0..c {
                if target == from {
                    continue;
                }
                config.assignment[i] = target;
                let candidate = average_silhouette(dist, config);
                config.assignment[i] = from;
                if candidate > current && best.is_none_or(|(b, _, _)| candidate > b) {
                    best = Some((candidate, i, target));
                }
            }
        }
        match best {
            Some((score, i, target)) => {
                sizes[config.assignment[i]] -= 1;
                sizes[target] += 1;
                config.assignment[i] = target;
                current = score;
            }
            None => return current,
        }
    }
}

/// The ASW faultline measure: best refined silhouette over every clustering
/// configuration produced by Ward and average linkage.
pub fn asw_score(members: &[u32], pop: &Population) -> Result<f64> {
    if members.len() < 3 {
        return Err(Error::Precondition("asw needs at least 3 members".into()));
    }
    let points = indicator_encode(members, pop);
    let dist = distance_matrix(&points);
    let mut best = f64::NEG_INFINITY;
    for linkage in [Linkage::Ward, Linkage::Average] {
        for mut config in cluster_configurations(&dist, linkage) {
            let score = hill_climb(&dist, &mut config);
            best = best.max(score);
        }
    }
    Ok(best)
}
