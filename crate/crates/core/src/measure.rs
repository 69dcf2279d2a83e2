//! Conflict-triangle scoring.
//!
//! A team's faultline potential is the sum, over oriented triangles
//! `<(i,j),k>` in which members `i` and `j` agree on some feature while both
//! disagree with `k`, of the fraction of features for which that triangle is
//! such a conflict. Purely categorical teams are scored in O(mL) from their
//! aggregate count vectors; threshold/weighted features fall back to triple
//! enumeration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    AggregateFeatureVector, Agreement, AttrValue, Delta, FeatureKind, FeatureSchema, Partitioning,
    Population, Team, Worker,
};

/// An oriented conflict triangle: the agreeing pair `(i,j)` with `i < j`,
/// and the apex `k` disagreeing with both.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct OrientedTriangle {
    pub pair: (u32, u32),
    pub apex: u32,
}

impl OrientedTriangle {
    pub fn new(a: u32, b: u32, apex: u32) -> OrientedTriangle {
        OrientedTriangle {
            pair: (a.min(b), a.max(b)),
            apex,
        }
    }
}

/// `counts[x]` = oriented triangles that are conflicts in exactly `x`
/// features; `x` ranges over `0..=m`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignmentHistogram {
    pub counts: Vec<u64>,
}

impl AlignmentHistogram {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// The per-alignment penalty vector `g(0..=m)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PenaltyScheme {
    pub g: Vec<f64>,
}

impl PenaltyScheme {
    /// The scheme `g(x) = x`, under which PCT reduces to `m * CT`.
    pub fn identity(m: usize) -> PenaltyScheme {
        PenaltyScheme {
            g: (0..=m).map(|x| x as f64).collect(),
        }
    }

    /// Shift every coefficient so that `g(0) = 0`.
    pub fn normalized(mut self) -> PenaltyScheme {
        let shift = self.g.first().copied().unwrap_or(0.0);
        for v in &mut self.g {
            *v -= shift;
        }
        self
    }
}

/// Do two workers agree on feature `f`?
///
/// Discretized (categorical) features agree on equal symbol index; threshold
/// and weighted features agree when the absolute difference is within gamma.
/// Numeric `bins`/`kde_bins` features should be discretized before scoring;
/// until then raw equality is used.
pub fn agrees(a: &Worker, b: &Worker, f: usize, schema: &FeatureSchema) -> bool {
    match (&a.attributes[f], &b.attributes[f]) {
        (AttrValue::Cat(x), AttrValue::Cat(y)) => x == y,
        (AttrValue::Num(x), AttrValue::Num(y)) => match schema.features[f].agreement {
            Agreement::Threshold | Agreement::Weighted => {
                (x - y).abs() <= schema.features[f].gamma.unwrap_or(0.0)
            }
            _ => x == y,
        },
        _ => false,
    }
}

fn choose2(r: u64) -> u64 {
    r * r.saturating_sub(1) / 2
}

fn count_from_feature_counts(counts: &[u32], team_size: u64) -> u64 {
    counts
        .iter()
        .map(|&r| choose2(r as u64) * (team_size - r as u64))
        .sum()
}

/// Oriented conflict-triangle count for feature `f`: `sum_v C(r_v,2)(|T|-r_v)`
/// over the aggregate counts, in time proportional to the value-list length.
///
/// For threshold/weighted features (no aggregates) this falls back to triple
/// enumeration; the result is the same count, just O(|T|^3).
pub fn conflict_count_feature(team: &Team, pop: &Population, f: usize) -> u64 {
    match team.aggregates() {
        Some(agg) => count_from_feature_counts(&agg.counts[f], team.size() as u64),
        None => enumerate_conflicts_feature(team.members(), pop, f).len() as u64,
    }
}

/// All oriented conflict triangles of one feature, via O(|T|^3) enumeration.
pub fn enumerate_conflicts_feature(
    members: &[u32],
    pop: &Population,
    f: usize,
) -> Vec<OrientedTriangle> {
    let schema = pop.schema();
    let mut out = Vec::new();
    let k = members.len();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let (wa, wb, wc) = (
                    pop.worker(members[a]),
                    pop.worker(members[b]),
                    pop.worker(members[c]),
                );
                let ab = agrees(wa, wb, f, schema);
                let ac = agrees(wa, wc, f, schema);
                let bc = agrees(wb, wc, f, schema);
                // Exactly one agreeing pair makes a conflict; the triple is
                // oriented by which pair agrees.
                match (ab, ac, bc) {
                    (true, false, false) => out.push(OrientedTriangle::new(wa.id, wb.id, wc.id)),
                    (false, true, false) => out.push(OrientedTriangle::new(wa.id, wc.id, wb.id)),
                    (false, false, true) => out.push(OrientedTriangle::new(wb.id, wc.id, wa.id)),
                    _ => {}
                }
            }
        }
    }
    out
}

/// Per-feature sets of oriented conflict triangles.
pub fn enumerate_conflicts(members: &[u32], pop: &Population) -> Vec<Vec<OrientedTriangle>> {
    (0..pop.m())
        .map(|f| enumerate_conflicts_feature(members, pop, f))
        .collect()
}

fn feature_is_countable(pop: &Population, f: usize) -> bool {
    pop.schema().features[f].kind == FeatureKind::Categorical
}

/// Total oriented conflict incidences across features (the numerator of the
/// team score before dividing by `m`).
fn total_incidences(members: &[u32], pop: &Population) -> u64 {
    let size = members.len() as u64;
    let mut total = 0u64;
    let mut scratch: Vec<u32> = Vec::new();
    for f in 0..pop.m() {
        if feature_is_countable(pop, f) {
            let l = pop.schema().features[f].values.len();
            scratch.clear();
            scratch.resize(l, 0);
            for &id in members {
                let v = pop.worker(id).attributes[f]
                    .as_cat()
                    .expect("categorical value") as usize;
                scratch[v] += 1;
            }
            total += count_from_feature_counts(&scratch, size);
        } else {
            total += enumerate_conflicts_feature(members, pop, f).len() as u64;
        }
    }
    total
}

/// Faultline potential of a team: the sum over distinct oriented conflict
/// triangles of the fraction of features in which each is a conflict.
pub fn ct_score_members(members: &[u32], pop: &Population) -> f64 {
    total_incidences(members, pop) as f64 / pop.m() as f64
}

/// [`ct_score_members`] through a team's cached aggregates when present.
pub fn ct_score(team: &Team, pop: &Population) -> f64 {
    match team.aggregates() {
        Some(agg) => {
            let size = team.size() as u64;
            let total: u64 = agg
                .counts
                .iter()
                .map(|c| count_from_feature_counts(c, size))
                .sum();
            total as f64 / pop.m() as f64
        }
        None => ct_score_members(team.members(), pop),
    }
}

fn score_from_aggregates(agg: &AggregateFeatureVector, size: u64, m: usize) -> f64 {
    let total: u64 = agg
        .counts
        .iter()
        .map(|c| count_from_feature_counts(c, size))
        .sum();
    total as f64 / m as f64
}

/// Apply a membership delta and return the new score, in time proportional
/// to `m` (value-list lengths treated as constant).
pub fn ct_delta(team: &mut Team, pop: &Population, id: u32, delta: Delta) -> Result<f64> {
    if team.aggregates().is_none() {
        return Err(Error::AggregatesUndefined);
    }
    team.apply_member_delta(pop, id, delta)?;
    let agg = team.aggregates().expect("aggregates checked above");
    Ok(score_from_aggregates(agg, team.size() as u64, pop.m()))
}

/// Score of `team + {candidate}` without mutating the team. O(m) per call
/// for categorical teams; otherwise falls back to a full recompute.
pub fn score_with_candidate(team: &Team, pop: &Population, candidate: u32) -> f64 {
    match team.aggregates() {
        Some(agg) => {
            let new_size = team.size() as u64 + 1;
            let worker = pop.worker(candidate);
            let mut total = 0u64;
            for (f, counts) in agg.counts.iter().enumerate() {
                let v = worker.attributes[f].as_cat().expect("categorical value") as usize;
                let base = count_from_feature_counts(counts, new_size);
                // Replace the candidate value's term with its incremented count.
                let r = counts[v] as u64;
                total += base - choose2(r) * (new_size - r) + choose2(r + 1) * (new_size - r - 1);
            }
            total as f64 / pop.m() as f64
        }
        None => {
            let mut members = team.members().to_vec();
            members.push(candidate);
            ct_score_members(&members, pop)
        }
    }
}

/// Weighted faultline potential: each conflict incidence on a `weighted`
/// feature contributes the average absolute difference between the apex and
/// the agreeing pair instead of 1.
pub fn weighted_ct_score(members: &[u32], pop: &Population) -> f64 {
    let schema = pop.schema();
    let mut total = 0.0f64;
    for f in 0..pop.m() {
        let weighted = schema.features[f].agreement == Agreement::Weighted;
        if !weighted && feature_is_countable(pop, f) {
            let size = members.len() as u64;
            let l = schema.features[f].values.len();
            let mut counts = vec![0u32; l];
            for &id in members {
                counts[pop.worker(id).attributes[f].as_cat().unwrap() as usize] += 1;
            }
            total += count_from_feature_counts(&counts, size) as f64;
            continue;
        }
        for t in enumerate_conflicts_feature(members, pop, f) {
            if weighted {
                let (i, j) = t.pair;
                let vi = pop.worker(i).attributes[f].as_num().unwrap();
                let vj = pop.worker(j).attributes[f].as_num().unwrap();
                let vk = pop.worker(t.apex).attributes[f].as_num().unwrap();
                total += ((vi - vk).abs() + (vj - vk).abs()) / 2.0;
            } else {
                total += 1.0;
            }
        }
    }
    total / pop.m() as f64
}

/// Maximum possible conflict-triangle count across all features for a team
/// of size `k`: the two-value balanced split `floor(k/2)/ceil(k/2)` is the
/// worst case per feature. Clamped to 1 for `k < 3`, where no triangle
/// exists, so cost normalization never divides by zero.
pub fn delta_max(k: usize, m: usize) -> f64 {
    if k < 3 {
        return 1.0;
    }
    let half = (k / 2) as u64;
    let other = k as u64 - half;
    (m as u64 * half * other * (k as u64 - 2) / 2) as f64
}

/// Histogram of oriented triangles by the number of features in which each
/// is a conflict. O(m|T|^3).
pub fn alignment_histogram(members: &[u32], pop: &Population) -> AlignmentHistogram {
    let schema = pop.schema();
    let m = pop.m();
    let mut counts = vec![0u64; m + 1];
    let k = members.len();
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                let (wa, wb, wc) = (
                    pop.worker(members[a]),
                    pop.worker(members[b]),
                    pop.worker(members[c]),
                );
                let mut x_ab = 0usize; // <(a,b),c>
                let mut x_ac = 0usize; // <(a,c),b>
                let mut x_bc = 0usize; // <(b,c),a>
                for f in 0..m {
                    let ab = agrees(wa, wb, f, schema);
                    let ac = agrees(wa, wc, f, schema);
                    let bc = agrees(wb, wc, f, schema);
                    match (ab, ac, bc) {
                        (true, false, false) => x_ab += 1,
                        (false, true, false) => x_ac += 1,
                        (false, false, true) => x_bc += 1,
                        _ => {}
                    }
                }
                counts[x_ab] += 1;
                counts[x_ac] += 1;
                counts[x_bc] += 1;
            }
        }
    }
    AlignmentHistogram { counts }
}

/// Penalized faultline potential `sum_{x>=1} g(x) * aligned(x, T)`.
pub fn pct_score(members: &[u32], pop: &Population, g: &PenaltyScheme) -> Result<f64> {
    if g.g.len() != pop.m() + 1 {
        return Err(Error::Precondition(format!(
            "penalty scheme has {} entries, need m+1 = {}",
            g.g.len(),
            pop.m() + 1
        )));
    }
    let hist = alignment_histogram(members, pop);
    Ok(hist
        .counts
        .iter()
        .enumerate()
        .skip(1)
        .map(|(x, &c)| g.g[x] * c as f64)
        .sum())
}

/// Total faultline potential of a partitioning.
pub fn partition_score(partitioning: &Partitioning, pop: &Population) -> f64 {
    partitioning.teams.iter().map(|t| ct_score(t, pop)).sum()
}

/// [`partition_score`] divided by C(n,3), the number of triangles the whole
/// population could host; always in [0,1].
pub fn normalized_partition_score(partitioning: &Partitioning, pop: &Population) -> f64 {
    let n = pop.n() as u64;
    if n < 3 {
        return 0.0;
    }
    let triples = n * (n - 1) * (n - 2) / 6;
    partition_score(partitioning, pop) / triples as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeatureSchema, FeatureSpec};
    use rand::Rng;

    /// Population with m categorical features given per-worker symbol rows.
    pub(crate) fn cat_pop(rows: &[&[&str]]) -> Population {
        let m = rows[0].len();
        let mut specs: Vec<FeatureSpec> = (0..m)
            .map(|f| FeatureSpec::categorical(format!("f{f}"), &[]))
            .collect();
        let data: Vec<Vec<AttrValue>> = rows
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(f, v)| AttrValue::Cat(specs[f].symbol_index_or_insert(v)))
                    .collect()
            })
            .collect();
        Population::from_rows(FeatureSchema::new(specs).unwrap(), data).unwrap()
    }

    fn example_roster() -> Population {
        cat_pop(&[
            &["India", "Male", "CS"],
            &["India", "Male", "Business"],
            &["China", "Male", "Chemistry"],
        ])
    }

    /// Naive oracle: score as the sum over oriented triangles of the
    /// fraction of features in which each is a conflict, straight from the
    /// enumerated per-feature conflict sets. The per-triangle incidence
    /// counts are summed as integers so the result is exact.
    fn oracle_ct(members: &[u32], pop: &Population) -> f64 {
        use std::collections::HashMap;
        let mut per_triangle: HashMap<OrientedTriangle, u64> = HashMap::new();
        for conflicts in enumerate_conflicts(members, pop) {
            for t in conflicts {
                *per_triangle.entry(t).or_insert(0) += 1;
            }
        }
        per_triangle.values().sum::<u64>() as f64 / pop.m() as f64
    }

    fn random_cat_pop(rng: &mut impl Rng, n: usize, m: usize, l: usize) -> Population {
        let symbols: Vec<String> = (0..l).map(|i| format!("v{i}")).collect();
        let symbol_refs: Vec<&str> = symbols.iter().map(|s| s.as_str()).collect();
        let specs: Vec<FeatureSpec> = (0..m)
            .map(|f| FeatureSpec::categorical(format!("f{f}"), &symbol_refs))
            .collect();
        let rows = (0..n)
            .map(|_| {
                (0..m)
                    .map(|_| AttrValue::Cat(rng.gen_range(0..l) as u32))
                    .collect()
            })
            .collect();
        Population::from_rows(FeatureSchema::new(specs).unwrap(), rows).unwrap()
    }

    #[test]
    fn agrees_matches_worked_example() {
        let pop = example_roster();
        let s = pop.schema();
        assert!(agrees(pop.worker(0), pop.worker(1), 0, s));
        assert!(!agrees(pop.worker(0), pop.worker(2), 0, s));
        assert!(agrees(pop.worker(0), pop.worker(2), 1, s));
        assert!(!agrees(pop.worker(0), pop.worker(1), 2, s));
    }

    #[test]
    fn threshold_agreement_is_inclusive() {
        let schema = FeatureSchema::new(vec![
            FeatureSpec::numeric("age", Agreement::Threshold).with_gamma(2.0)
        ])
        .unwrap();
        let pop = Population::from_rows(
            schema,
            vec![
                vec![AttrValue::Num(25.0)],
                vec![AttrValue::Num(27.0)],
                vec![AttrValue::Num(28.0)],
            ],
        )
        .unwrap();
        let s = pop.schema();
        assert!(agrees(pop.worker(0), pop.worker(1), 0, s));
        assert!(!agrees(pop.worker(0), pop.worker(2), 0, s));
    }

    #[test]
    fn zero_gamma_threshold_is_exactness() {
        let schema = FeatureSchema::new(vec![
            FeatureSpec::numeric("x", Agreement::Threshold).with_gamma(0.0)
        ])
        .unwrap();
        let pop = Population::from_rows(
            schema,
            vec![vec![AttrValue::Num(1.5)], vec![AttrValue::Num(1.5)]],
        )
        .unwrap();
        assert!(agrees(pop.worker(0), pop.worker(1), 0, pop.schema()));
    }

    #[test]
    fn conflict_counts_match_enumeration_oracle() {
        // [A,A,B,C] -> 2 and [A,A,B,B] -> 4, frozen from the naive oracle.
        let pop = cat_pop(&[&["A"], &["A"], &["B"], &["C"]]);
        let team = Team::new(vec![0, 1, 2, 3], &pop);
        assert_eq!(conflict_count_feature(&team, &pop, 0), 2);
        assert_eq!(
            enumerate_conflicts_feature(team.members(), &pop, 0).len(),
            2
        );

        let pop = cat_pop(&[&["A"], &["A"], &["B"], &["B"]]);
        let team = Team::new(vec![0, 1, 2, 3], &pop);
        assert_eq!(conflict_count_feature(&team, &pop, 0), 4);
        assert_eq!(
            enumerate_conflicts_feature(team.members(), &pop, 0).len(),
            4
        );
    }

    #[test]
    fn homogeneous_and_diverse_teams_have_no_conflicts() {
        let pop = cat_pop(&[&["A"], &["A"], &["A"], &["A"]]);
        let team = Team::new(vec![0, 1, 2, 3], &pop);
        assert_eq!(conflict_count_feature(&team, &pop, 0), 0);

        let pop = cat_pop(&[&["A"], &["B"], &["C"], &["D"]]);
        let team = Team::new(vec![0, 1, 2, 3], &pop);
        assert_eq!(conflict_count_feature(&team, &pop, 0), 0);
        assert_eq!(ct_score(&team, &pop), 0.0);
    }

    #[test]
    fn fast_count_matches_enumeration_on_random_teams() {
        let mut rng = crate::seed::derive_rng(11, "test-fast-path", 0);
        for _ in 0..1000 {
            let k = rng.gen_range(3..=8);
            let m = rng.gen_range(1..=4);
            let l = rng.gen_range(2..=4);
            let pop = random_cat_pop(&mut rng, k, m, l);
            let members: Vec<u32> = (0..k as u32).collect();
            let team = Team::new(members.clone(), &pop);
            for f in 0..m {
                assert_eq!(
                    conflict_count_feature(&team, &pop, f),
                    enumerate_conflicts_feature(&members, &pop, f).len() as u64
                );
            }
        }
    }

    #[test]
    fn worked_example_conflicts_and_score() {
        let pop = example_roster();
        let members = vec![0, 1, 2];
        let conflicts = enumerate_conflicts(&members, &pop);
        assert_eq!(conflicts[0], vec![OrientedTriangle::new(0, 1, 2)]);
        assert!(conflicts[1].is_empty());
        assert!(conflicts[2].is_empty());

        let team = Team::new(members.clone(), &pop);
        let score = ct_score(&team, &pop);
        assert_eq!(score, 1.0 / 3.0);
        assert_eq!(score, oracle_ct(&members, &pop));
    }

    #[test]
    fn pairs_have_no_triangles() {
        let pop = example_roster();
        let conflicts = enumerate_conflicts(&[0, 1], &pop);
        assert!(conflicts.iter().all(|c| c.is_empty()));
    }

    #[test]
    fn fully_aligned_split_team_scores_four() {
        // k=4, every feature in the pattern [A,A,B,B]: all four oriented
        // triangles are conflicts in every feature, so CT = 4.
        let pop = cat_pop(&[
            &["A", "A", "A"],
            &["A", "A", "A"],
            &["B", "B", "B"],
            &["B", "B", "B"],
        ]);
        let members = vec![0, 1, 2, 3];
        let team = Team::new(members.clone(), &pop);
        assert_eq!(ct_score(&team, &pop), 4.0);
        assert_eq!(oracle_ct(&members, &pop), 4.0);
    }

    #[test]
    fn ct_score_matches_oracle_on_random_teams() {
        let mut rng = crate::seed::derive_rng(13, "test-ct-oracle", 0);
        for _ in 0..300 {
            let k = rng.gen_range(3..=8);
            let m = rng.gen_range(1..=4);
            let pop = random_cat_pop(&mut rng, k, m, 3);
            let members: Vec<u32> = (0..k as u32).collect();
            let team = Team::new(members.clone(), &pop);
            assert_eq!(ct_score(&team, &pop), oracle_ct(&members, &pop));
        }
    }

    #[test]
    fn score_is_invariant_to_member_and_feature_order() {
        let pop = cat_pop(&[
            &["A", "X"],
            &["A", "Y"],
            &["B", "X"],
            &["C", "Y"],
            &["B", "Z"],
        ]);
        let swapped = cat_pop(&[
            &["X", "A"],
            &["Y", "A"],
            &["X", "B"],
            &["Y", "C"],
            &["Z", "B"],
        ]);
        let forward = ct_score_members(&[0, 1, 2, 3, 4], &pop);
        assert_eq!(forward, ct_score_members(&[4, 2, 0, 3, 1], &pop));
        assert_eq!(forward, ct_score_members(&[0, 1, 2, 3, 4], &swapped));
    }

    #[test]
    fn duplicating_a_feature_leaves_score_unchanged() {
        let pop = cat_pop(&[&["A", "X"], &["A", "Y"], &["B", "X"], &["B", "Y"]]);
        let doubled = cat_pop(&[
            &["A", "X", "A", "X"],
            &["A", "Y", "A", "Y"],
            &["B", "X", "B", "X"],
            &["B", "Y", "B", "Y"],
        ]);
        let members = vec![0, 1, 2, 3];
        assert_eq!(
            ct_score_members(&members, &pop),
            ct_score_members(&members, &doubled)
        );
    }

    #[test]
    fn weighted_conflict_uses_average_gap() {
        // Ages [25,26,60] with gamma=5: one conflict triangle weighted
        // (|25-60| + |26-60|)/2 = 34.5; m=1 so the score is 34.5.
        let schema = FeatureSchema::new(vec![
            FeatureSpec::numeric("age", Agreement::Weighted).with_gamma(5.0)
        ])
        .unwrap();
        let pop = Population::from_rows(
            schema,
            vec![
                vec![AttrValue::Num(25.0)],
                vec![AttrValue::Num(26.0)],
                vec![AttrValue::Num(60.0)],
            ],
        )
        .unwrap();
        let members = vec![0, 1, 2];
        assert_eq!(enumerate_conflicts(&members, &pop)[0].len(), 1);
        assert_eq!(weighted_ct_score(&members, &pop), 34.5);
    }

    #[test]
    fn weighted_score_zero_without_conflicts() {
        let schema = FeatureSchema::new(vec![
            FeatureSpec::numeric("age", Agreement::Weighted).with_gamma(50.0)
        ])
        .unwrap();
        let pop = Population::from_rows(
            schema,
            vec![
                vec![AttrValue::Num(25.0)],
                vec![AttrValue::Num(26.0)],
                vec![AttrValue::Num(60.0)],
            ],
        )
        .unwrap();
        assert_eq!(weighted_ct_score(&[0, 1, 2], &pop), 0.0);
    }

    #[test]
    fn threshold_triples_with_two_agreeing_pairs_are_not_conflicts() {
        // 0 agrees with 1, 1 agrees with 2, but 0 and 2 disagree: no
        // orientation has exactly one agreeing pair.
        let schema = FeatureSchema::new(vec![
            FeatureSpec::numeric("x", Agreement::Threshold).with_gamma(1.0)
        ])
        .unwrap();
        let pop = Population::from_rows(
            schema,
            vec![
                vec![AttrValue::Num(0.0)],
                vec![AttrValue::Num(1.0)],
                vec![AttrValue::Num(2.0)],
            ],
        )
        .unwrap();
        assert!(enumerate_conflicts(&[0, 1, 2], &pop)[0].is_empty());
        assert_eq!(ct_score_members(&[0, 1, 2], &pop), 0.0);
    }

    #[test]
    fn delta_tracks_full_recompute() {
        let mut rng = crate::seed::derive_rng(17, "test-delta", 0);
        let pop = random_cat_pop(&mut rng, 30, 3, 3);
        let mut team = Team::new((0..10).collect(), &pop);
        for _ in 0..1000 {
            let add = team.size() < 3 || (rng.gen_bool(0.5) && team.size() < 25);
            let score = if add {
                let outside: Vec<u32> = (0..30u32).filter(|id| !team.contains(*id)).collect();
                let id = outside[rng.gen_range(0..outside.len())];
                let predicted = score_with_candidate(&team, &pop, id);
                let actual = ct_delta(&mut team, &pop, id, Delta::Add).unwrap();
                assert_eq!(predicted, actual);
                actual
            } else {
                let id = team.members()[rng.gen_range(0..team.size())];
                ct_delta(&mut team, &pop, id, Delta::Remove).unwrap()
            };
            assert_eq!(score, ct_score_members(team.members(), &pop));
        }
    }

    #[test]
    fn delta_add_remove_round_trip_restores_score() {
        let pop = cat_pop(&[&["A"], &["A"], &["B"], &["C"]]);
        let mut team = Team::new(vec![0, 1, 2], &pop);
        let before = ct_score(&team, &pop);
        ct_delta(&mut team, &pop, 3, Delta::Add).unwrap();
        let after = ct_delta(&mut team, &pop, 3, Delta::Remove).unwrap();
        assert_eq!(before, after);
    }

    #[test]
    fn adding_identical_member_to_homogeneous_team_keeps_zero() {
        let pop = cat_pop(&[&["A"], &["A"], &["A"], &["A"]]);
        let mut team = Team::new(vec![0, 1, 2], &pop);
        assert_eq!(ct_delta(&mut team, &pop, 3, Delta::Add).unwrap(), 0.0);
    }

    /// Brute-force max conflict count over all single-feature assignments.
    fn oracle_delta_max(k: usize, max_l: usize) -> u64 {
        let mut best = 0;
        let mut assignment = vec![0usize; k];
        loop {
            let mut counts = vec![0u32; max_l];
            for &v in &assignment {
                counts[v] += 1;
            }
            best = best.max(count_from_feature_counts(&counts, k as u64));
            // Odometer over assignments.
            let mut pos = 0;
            loop {
                if pos == k {
                    return best;
                }
                assignment[pos] += 1;
                if assignment[pos] < max_l {
                    break;
                }
                assignment[pos] = 0;
                pos += 1;
            }
        }
    }

    #[test]
    fn delta_max_matches_brute_force() {
        assert_eq!(delta_max(3, 1), 1.0);
        assert_eq!(delta_max(4, 1), 4.0);
        for k in 3..=6 {
            assert_eq!(delta_max(k, 1), oracle_delta_max(k, 4) as f64, "k={k}");
        }
        assert_eq!(delta_max(2, 3), 1.0);
        assert_eq!(delta_max(0, 3), 1.0);
        // The m factor scales linearly.
        assert_eq!(delta_max(5, 3), 3.0 * delta_max(5, 1));
    }

    #[test]
    fn histogram_matches_worked_example() {
        let pop = example_roster();
        let hist = alignment_histogram(&[0, 1, 2], &pop);
        assert_eq!(hist.counts, vec![2, 1, 0, 0]);
        assert_eq!(hist.total(), 3);
    }

    #[test]
    fn histogram_mass_is_three_per_triple() {
        let mut rng = crate::seed::derive_rng(23, "test-hist", 0);
        for _ in 0..50 {
            let k = rng.gen_range(3..=7) as u64;
            let pop = random_cat_pop(&mut rng, k as usize, 3, 3);
            let members: Vec<u32> = (0..k as u32).collect();
            let hist = alignment_histogram(&members, &pop);
            assert_eq!(hist.total(), 3 * k * (k - 1) * (k - 2) / 6);
        }
    }

    #[test]
    fn homogeneous_histogram_is_empty_above_zero() {
        let pop = cat_pop(&[&["A", "B"], &["A", "B"], &["A", "B"], &["A", "B"]]);
        let hist = alignment_histogram(&[0, 1, 2, 3], &pop);
        assert!(hist.counts[1..].iter().all(|&c| c == 0));
    }

    #[test]
    fn identity_scheme_recovers_ct_times_m() {
        let pop = example_roster();
        let members = vec![0, 1, 2];
        let g = PenaltyScheme::identity(3);
        let pct = pct_score(&members, &pop, &g).unwrap();
        assert_eq!(pct, 1.0);
        assert_eq!(pct, 3.0 * ct_score_members(&members, &pop));
    }

    #[test]
    fn zero_scheme_scores_zero() {
        let pop = example_roster();
        let g = PenaltyScheme { g: vec![0.0; 4] };
        assert_eq!(pct_score(&[0, 1, 2], &pop, &g).unwrap(), 0.0);
    }

    #[test]
    fn pct_bounded_by_ct_max_g_m() {
        let mut rng = crate::seed::derive_rng(29, "test-pct-bound", 0);
        for _ in 0..200 {
            let k = rng.gen_range(3..=7);
            let m = rng.gen_range(1..=4);
            let pop = random_cat_pop(&mut rng, k, m, 3);
            let members: Vec<u32> = (0..k as u32).collect();
            let g = PenaltyScheme {
                g: (0..=m).map(|_| rng.gen_range(0.0..2.0)).collect(),
            };
            let pct = pct_score(&members, &pop, &g).unwrap();
            let max_g = g.g.iter().cloned().fold(0.0f64, f64::max);
            let bound = ct_score_members(&members, &pop) * max_g * m as f64;
            assert!(bound >= pct - 1e-9, "bound {bound} < pct {pct}");
        }
    }

    #[test]
    fn penalty_length_mismatch_is_rejected() {
        let pop = example_roster();
        let g = PenaltyScheme { g: vec![0.0, 1.0] };
        assert!(pct_score(&[0, 1, 2], &pop, &g).is_err());
    }

    #[test]
    fn partition_scores_sum_and_normalize() {
        let pop = cat_pop(&[&["A"], &["A"], &["B"], &["B"], &["C"], &["C"]]);
        let homogeneous =
            Partitioning::from_members(vec![vec![0, 1], vec![2, 3], vec![4, 5]], &pop);
        assert_eq!(partition_score(&homogeneous, &pop), 0.0);

        let single = Partitioning::from_members(vec![vec![0, 1, 2, 3, 4, 5]], &pop);
        let whole = Team::new(vec![0, 1, 2, 3, 4, 5], &pop);
        assert_eq!(partition_score(&single, &pop), ct_score(&whole, &pop));
        let normalized = normalized_partition_score(&single, &pop);
        assert!((0.0..=1.0).contains(&normalized));
    }

    #[test]
    fn normalized_score_within_unit_interval_on_random_data() {
        let mut rng = crate::seed::derive_rng(31, "test-norm", 0);
        for _ in 0..50 {
            let n = 12;
            let pop = random_cat_pop(&mut rng, n, 3, 2);
            let mut ids: Vec<u32> = (0..n as u32).collect();
            // Seeded shuffle into teams of 4.
            for i in (1..ids.len()).rev() {
                ids.swap(i, rng.gen_range(0..=i));
            }
            let p = Partitioning::from_members(ids.chunks(4).map(|c| c.to_vec()).collect(), &pop);
            let s = normalized_partition_score(&p, &pop);
            assert!((0.0..=1.0).contains(&s), "normalized {s}");
        }
    }
}
