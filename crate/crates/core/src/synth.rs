//! Seeded benchmark instance generators: triangle-fraction-controlled
//! populations, subgroup team corpora, random fake teams, and the
//! clique-partitioning reduction instance factory.

use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{AttrValue, FeatureSchema, FeatureSpec, Population};
use crate::seed::derive_rng;

fn choose3(x: u64) -> u64 {
    if x < 3 {
        0
    } else {
        x * (x - 1) * (x - 2) / 6
    }
}

/// Achieved triangle-type mix of one generated feature.
#[derive(Debug, Clone, PartialEq)]
pub struct Synth1Feature {
    pub feature: String,
    pub group_sizes: (usize, usize, usize),
    /// All-distinct (all-negative) triangle fraction.
    pub neg_fraction: f64,
    /// All-same (all-positive) triangle fraction.
    pub pos_fraction: f64,
    /// Conflict (one-positive) triangle fraction; the remaining mass.
    pub conflict_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct Synth1Output {
    pub population: Population,
    pub report: Vec<Synth1Feature>,
}

/// Split n into three value groups so the all-negative and all-positive
/// triangle fractions sit as close as possible to the targets (sum of
/// absolute deviations), then assign symbols X/Y/Z to a fresh random
/// permutation of the workers per feature.
///
/// Unreachable targets degrade gracefully: the best split found is used and
/// the achieved fractions are reported.
pub fn synth1(
    n: usize,
    m: usize,
    target_neg_frac: f64,
    target_pos_frac: f64,
    seed: u64,
) -> Result<Synth1Output> {
    if n < 3 {
        return Err(Error::Precondition("synth1 needs n >= 3".into()));
    }
    if m == 0 {
        return Err(Error::Precondition("synth1 needs m >= 1".into()));
    }
    for (name, t) in [("neg", target_neg_frac), ("pos", target_pos_frac)] {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Precondition(format!(
                "target {name} fraction {t} outside [0,1]"
            )));
        }
    }

    let total = choose3(n as u64) as f64;
    let mut best: Option<(f64, (usize, usize, usize))> = None;
    for x in 1..=n {
        for y in 0..=n - x {
            let z = n - x - y;
            let neg = (x as u64 * y as u64 * z as u64) as f64 / total;
            let pos = (choose3(x as u64) + choose3(y as u64) + choose3(z as u64)) as f64 / total;
            let deviation = (neg - target_neg_frac).abs() + (pos - target_pos_frac).abs();
            if best.is_none_or(|(d, _)| deviation < d) {
                best = Some((deviation, (x, y, z)));
            }
        }
    }
    let (_, (x, y, z)) = best.expect("split search covers x = n");
    let neg_fraction = (x as u64 * y as u64 * z as u64) as f64 / total;
    let pos_fraction = (choose3(x as u64) + choose3(y as u64) + choose3(z as u64)) as f64 / total;

    let specs: Vec<FeatureSpec> = (0..m)
        .map(|f| FeatureSpec::categorical(format!("f{f}"), &["X", "Y", "Z"]))
        .collect();
    let mut rows: Vec<Vec<AttrValue>> = vec![Vec::with_capacity(m); n];
    let mut report = Vec::with_capacity(m);
    for f in 0..m {
        let mut rng = derive_rng(seed, "synth1", f as u64);
        let mut ids: Vec<usize> = (0..n).collect();
        for i in (1..n).rev() {
            ids.swap(i, rng.gen_range(0..=i));
        }
        let mut values = vec![0u32; n];
        for (pos, &id) in ids.iter().enumerate() {
            values[id] = if pos < x {
                0
            } else if pos < x + y {
                1
            } else {
                2
            };
        }
        for (id, &v) in values.iter().enumerate() {
            rows[id].push(AttrValue::Cat(v));
        }
        report.push(Synth1Feature {
            feature: format!("f{f}"),
            group_sizes: (x, y, z),
            neg_fraction,
            pos_fraction,
            conflict_fraction: 1.0 - neg_fraction - pos_fraction,
        });
    }
    let population = Population::from_rows(FeatureSchema::new(specs)?, rows)?;
    Ok(Synth1Output { population, report })
}

/// One generated subgroup team: global member ids plus its configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Synth2Team {
    pub members: Vec<u32>,
    pub team_size: usize,
    pub subgroups: usize,
}

#[derive(Debug, Clone)]
pub struct Synth2Output {
    pub population: Population,
    pub teams: Vec<Synth2Team>,
}

pub const SYNTH2_TEAM_SIZES: [usize; 5] = [4, 8, 16, 32, 64];
pub const SYNTH2_TEAMS_PER_CONFIG: usize = 100;

fn synth2_schema() -> FeatureSchema {
    FeatureSchema::new(vec![
        FeatureSpec::categorical("race", &["Asian", "White", "Black", "Native American"]),
        FeatureSpec::categorical("country", &["USA", "China", "England", "France"]),
        FeatureSpec::categorical("education", &["High-school", "Undergraduate", "Graduate"]),
    ])
    .expect("static schema")
}

/// Generate teams of `TS` members split into `SN` completely homogeneous
/// subgroups over Race/Country/Education. Each subgroup's value for a
/// feature is drawn with weight 1/(1 + number of subgroups in the team
/// already holding that value).
///
/// `subgroup_counts = None` uses the powers of two from 1 to each team size.
pub fn synth2(
    team_sizes: &[usize],
    subgroup_counts: Option<&[usize]>,
    teams_per_config: usize,
    seed: u64,
) -> Result<Synth2Output> {
    if team_sizes.is_empty() || teams_per_config == 0 {
        return Err(Error::Precondition(
            "synth2 needs team sizes and a positive team count".into(),
        ));
    }
    let mut configs: Vec<(usize, usize)> = Vec::new();
    for &ts in team_sizes {
        if ts == 0 {
            return Err(Error::Precondition("team size must be positive".into()));
        }
        match subgroup_counts {
            Some(counts) => {
                for &sn in counts {
                    if sn == 0 || sn > ts {
                        return Err(Error::Precondition(format!(
                            "subgroup count {sn} invalid for team size {ts}"
                        )));
                    }
                    configs.push((ts, sn));
                }
            }
            None => {
                let mut sn = 1;
                while sn <= ts {
                    configs.push((ts, sn));
                    sn *= 2;
                }
            }
        }
    }

    let schema = synth2_schema();
    let value_counts: Vec<usize> = schema.features.iter().map(|f| f.values.len()).collect();
    let mut rows: Vec<Vec<AttrValue>> = Vec::new();
    let mut teams = Vec::new();

    for (config_idx, &(ts, sn)) in configs.iter().enumerate() {
        let mut rng = derive_rng(seed, "synth2", config_idx as u64);
        for _ in 0..teams_per_config {
            // Subgroup sizes: as equal as possible, extras to the lowest
            // indexed subgroups.
            let base = ts / sn;
            let extras = ts % sn;
            let mut usage: Vec<Vec<u32>> = value_counts.iter().map(|&l| vec![0; l]).collect();
            let first_id = rows.len() as u32;
            for s in 0..sn {
                let size = base + usize::from(s < extras);
                let mut values = Vec::with_capacity(value_counts.len());
                for (f, &l) in value_counts.iter().enumerate() {
                    let weights: Vec<f64> =
                        (0..l).map(|v| 1.0 / (1.0 + usage[f][v] as f64)).collect();
                    let total: f64 = weights.iter().sum();
                    let mut draw = rng.gen_range(0.0..total);
                    let mut chosen = l - 1;
                    for (v, &w) in weights.iter().enumerate() {
                        if draw < w {
                            chosen = v;
                            break;
                        }
                        draw -= w;
                    }
                    usage[f][chosen] += 1;
                    values.push(AttrValue::Cat(chosen as u32));
                }
                for _ in 0..size {
                    rows.push(values.clone());
                }
            }
            let members: Vec<u32> = (first_id..rows.len() as u32).collect();
            teams.push(Synth2Team {
                members,
                team_size: ts,
                subgroups: sn,
            });
        }
    }
    let population = Population::from_rows(schema, rows)?;
    Ok(Synth2Output { population, teams })
}

/// Reduction instance: given a simple undirected graph H on `nodes`
/// vertices, build one categorical feature per edge of the complement H',
/// in which exactly that edge's endpoints share a value. Any equal-size-k
/// partitioning then scores (k-2) conflict triangles per within-team H'
/// edge.
#[allow(clippy::needless_range_loop)]
pub fn clique_reduction(nodes: usize, edges: &[(u32, u32)], k: usize) -> Result<Population> {
    if nodes < 3 {
        return Err(Error::Precondition(
            "reduction needs at least 3 nodes".into(),
        ));
    }
    if k == 0 || !nodes.is_multiple_of(k) {
        return Err(Error::Infeasible(format!(
            "team size {k} must divide the node count {nodes}"
        )));
    }
    let mut adjacency = vec![vec![false; nodes]; nodes];
    for &(a, b) in edges {
        let (a, b) = (a as usize, b as usize);
        if a >= nodes || b >= nodes || a == b {
            return Err(Error::Precondition(format!("bad edge ({a}, {b})")));
        }
        adjacency[a][b] = true;
        adjacency[b][a] = true;
    }
    let mut complement: Vec<(usize, usize)> = Vec::new();
    for i in 0..nodes {
        for j in i + 1..nodes {
            if !adjacency[i][j] {
                complement.push((i, j));
            }
        }
    }
    if complement.is_empty() {
        return Err(Error::Degenerate(
            "input graph is complete; its complement has no edges, so the reduction yields zero features".into(),
        ));
    }

    let mut specs = Vec::with_capacity(complement.len());
    let mut columns: Vec<Vec<u32>> = Vec::with_capacity(complement.len());
    for &(i, j) in &complement {
        let mut values = vec!["shared".to_string()];
        let mut column = vec![0u32; nodes];
        for w in 0..nodes {
            if w == i || w == j {
                column[w] = 0;
            } else {
                values.push(format!("solo_{w}"));
                column[w] = (values.len() - 1) as u32;
            }
        }
        let value_refs: Vec<&str> = values.iter().map(|s| s.as_str()).collect();
        specs.push(FeatureSpec::categorical(
            format!("edge_{i}_{j}"),
            &value_refs,
        ));
        columns.push(column);
    }
    let rows: Vec<Vec<AttrValue>> = (0..nodes)
        .map(|w| columns.iter().map(|col| AttrValue::Cat(col[w])).collect())
        .collect();
    Population::from_rows(FeatureSchema::new(specs)?, rows)
}

/// `count` uniformly random member sets. `sizes` is either one size for all
/// teams or one per team. Teams may overlap with each other; members within
/// a team never repeat.
pub fn fake_teams(
    pop: &Population,
    count: usize,
    sizes: &[usize],
    seed: u64,
) -> Result<Vec<Vec<u32>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let resolved: Vec<usize> = if sizes.len() == count {
        sizes.to_vec()
    } else if sizes.len() == 1 {
        vec![sizes[0]; count]
    } else {
        return Err(Error::Precondition(format!(
            "{} sizes for {count} fake teams",
            sizes.len()
        )));
    };
    let n = pop.n();
    let mut teams = Vec::with_capacity(count);
    for (t, &size) in resolved.iter().enumerate() {
        if size == 0 || size > n {
            return Err(Error::Precondition(format!(
                "fake team size {size} outside 1..={n}"
            )));
        }
        let mut rng = derive_rng(seed, "fake-teams", t as u64);
        let mut ids: Vec<u32> = (0..n as u32).collect();
        for i in 0..size {
            let pick = rng.gen_range(i..n);
            ids.swap(i, pick);
        }
        let mut members = ids[..size].to_vec();
        members.sort_unstable();
        teams.push(members);
    }
    Ok(teams)
}
