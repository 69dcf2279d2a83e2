//! One function per subcommand. Commands load the population, discretize
//! numeric bin features, run the corresponding library operation, and write
//! plain CSV/JSON artifacts.

use std::fmt::Write as _;
use std::path::Path;
use std::time::Instant;

use faultline::alt::{asw_score, ss_score};
use faultline::measure::{ct_score_members, pct_score, PenaltyScheme};
use faultline::model::{
    discretize, load_population, load_teams_csv, save_population, save_schema, Population,
    TeamRecord,
};
use faultline::partition::{
    clustering_baseline, faultline_splitter, greedy_baseline, MatchingMode, PartitionRun,
    SplitterOptions, TeamSizes,
};
use faultline::penalty::{fit_penalties, FitMode};
use faultline::{Error, Result};
use serde::Serialize;

use crate::output::{ensure_dir, read_to_string, write_file, Sink};
use crate::{Algorithm, CliError, LearnMode, Matching, Measure, PopulationArgs};

type CmdResult = std::result::Result<(), CliError>;

fn load_and_discretize(args: &PopulationArgs) -> Result<Population> {
    let raw = load_population(&args.input, &args.schema)?;
    let out = discretize(&raw)?;
    for warning in &out.warnings {
        eprintln!("warning: {warning}");
    }
    Ok(out.population)
}

fn validate_teams(teams: &[TeamRecord], pop: &Population) -> Result<()> {
    for t in teams {
        for &id in &t.members {
            if id as usize >= pop.n() {
                return Err(Error::Precondition(format!(
                    "team '{}' references worker {id}, population has {}",
                    t.team_id,
                    pop.n()
                )));
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct PartitionSummary<'a> {
    seed: u64,
    algorithm: &'a str,
    matching: &'a str,
    team_sizes: Vec<usize>,
    iterations: usize,
    restarts: usize,
    partition_score: f64,
    normalized_score: f64,
    per_team_ct: Vec<f64>,
    wall_time_us: u128,
}

#[allow(clippy::too_many_arguments)]
pub fn partition(
    population: &PopulationArgs,
    team_size: Option<usize>,
    sizes: Option<Vec<usize>>,
    algorithm: Algorithm,
    matching: Matching,
    seed: u64,
    restarts: usize,
    max_iters: usize,
    threads: usize,
    output: &str,
) -> CmdResult {
    let pop = load_and_discretize(population)?;
    let team_sizes = match (team_size, sizes) {
        (Some(k), None) => TeamSizes::Uniform(k),
        (None, Some(list)) => TeamSizes::Explicit(list),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --team-size and --sizes is required".into(),
            ))
        }
    };
    let opts = SplitterOptions::new(team_sizes, seed)
        .with_matching(match matching {
            Matching::Exact => MatchingMode::Exact,
            Matching::Greedy => MatchingMode::Greedy,
        })
        .with_restarts(restarts)
        .with_max_iters(max_iters)
        .with_threads(threads);

    let started = Instant::now();
    let run: PartitionRun = match algorithm {
        Algorithm::Splitter => faultline_splitter(&pop, &opts)?,
        Algorithm::Greedy => greedy_baseline(&pop, &opts)?,
        Algorithm::Clustering => clustering_baseline(&pop, &opts)?,
    };
    let wall_time_us = started.elapsed().as_micros();

    let mut assignment = String::from("worker_id,team_id\n");
    let team_of = run.partitioning.team_of(pop.n());
    for (worker, team) in team_of.iter().enumerate() {
        writeln!(assignment, "{worker},{team}").expect("string write");
    }
    let sink = Sink::parse(output);
    sink.write("assignment.csv", &assignment)?;
    if matches!(sink, Sink::Stdout) {
        // Stdout mode streams only the assignment CSV.
        return Ok(());
    }
    let output = Path::new(output);

    let summary = PartitionSummary {
        seed,
        algorithm: match algorithm {
            Algorithm::Splitter => "splitter",
            Algorithm::Greedy => "greedy",
            Algorithm::Clustering => "clustering",
        },
        matching: match matching {
            Matching::Exact => "exact",
            Matching::Greedy => "greedy",
        },
        team_sizes: run.partitioning.teams.iter().map(|t| t.size()).collect(),
        iterations: run.iterations,
        restarts: run.restarts,
        partition_score: run.score,
        normalized_score: run.normalized_score,
        per_team_ct: run.per_team_ct,
        wall_time_us,
    };
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Json {
        path: "summary.json".into(),
        source: e,
    })?;
    write_file(&output.join("summary.json"), &(json + "\n"))?;
    Ok(())
}

fn load_penalty(path: &Path, m: usize) -> Result<PenaltyScheme> {
    let text = read_to_string(path)?;
    let scheme: PenaltyScheme = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    if scheme.g.len() != m + 1 {
        return Err(Error::Precondition(format!(
            "penalty scheme has {} entries, need m+1 = {}",
            scheme.g.len(),
            m + 1
        )));
    }
    Ok(scheme)
}

pub fn score(
    population: &PopulationArgs,
    teams_path: &Path,
    measure: Measure,
    penalty: Option<&Path>,
    output: &str,
) -> CmdResult {
    let pop = load_and_discretize(population)?;
    let teams = load_teams_csv(teams_path)?;
    validate_teams(&teams, &pop)?;
    let scheme = match (measure, penalty) {
        (Measure::Pct, Some(path)) => Some(load_penalty(path, pop.m())?),
        (Measure::Pct, None) => {
            return Err(CliError::Usage("--measure pct requires --penalty".into()))
        }
        _ => None,
    };

    let mut csv = String::from("team_id,score\n");
    for t in &teams {
        let score = match measure {
            Measure::Ct => ct_score_members(&t.members, &pop),
            Measure::Ss => ss_score(&t.members, &pop)?,
            Measure::Asw => asw_score(&t.members, &pop)?,
            Measure::Pct => pct_score(&t.members, &pop, scheme.as_ref().expect("checked"))?,
        };
        writeln!(csv, "{},{:.6}", t.team_id, score).expect("string write");
    }
    Sink::parse(output).write("scores.csv", &csv)?;
    Ok(())
}

pub fn measure_compare(
    population: &PopulationArgs,
    teams_path: &Path,
    threads: usize,
    output: &str,
) -> CmdResult {
    let pop = load_and_discretize(population)?;
    let teams = load_teams_csv(teams_path)?;
    validate_teams(&teams, &pop)?;

    let evaluate = |t: &TeamRecord| -> Result<(f64, f64, f64, f64, f64, f64)> {
        let start = Instant::now();
        let ct = ct_score_members(&t.members, &pop);
        let us_ct = start.elapsed().as_secs_f64() * 1e6;
        let start = Instant::now();
        let ss = ss_score(&t.members, &pop)?;
        let us_ss = start.elapsed().as_secs_f64() * 1e6;
        let start = Instant::now();
        let asw = asw_score(&t.members, &pop)?;
        let us_asw = start.elapsed().as_secs_f64() * 1e6;
        Ok((ct, ss, asw, us_ct, us_ss, us_asw))
    };
    let rows: Vec<(f64, f64, f64, f64, f64, f64)> = if threads > 1 {
        // Timings under contention are still representative; scores are
        // unaffected by the evaluation order.
        let chunked: Vec<Result<_>> = std::thread::scope(|scope| {
            let handles: Vec<_> = teams
                .chunks(teams.len().div_ceil(threads))
                .map(|chunk| scope.spawn(move || chunk.iter().map(evaluate).collect::<Vec<_>>()))
                .collect();
            handles
                .into_iter()
                .flat_map(|h| h.join().expect("scoring thread"))
                .collect()
        });
        chunked.into_iter().collect::<Result<Vec<_>>>()?
    } else {
        teams.iter().map(evaluate).collect::<Result<Vec<_>>>()?
    };

    let mut csv = String::from("team_id,ct,ss,asw,us_ct,us_ss,us_asw\n");
    for (t, (ct, ss, asw, us_ct, us_ss, us_asw)) in teams.iter().zip(&rows) {
        writeln!(
            csv,
            "{},{:.6},{:.6},{:.6},{:.3},{:.3},{:.3}",
            t.team_id, ct, ss, asw, us_ct, us_ss, us_asw
        )
        .expect("string write");
    }
    Sink::parse(output).write("measures.csv", &csv)?;
    Ok(())
}

pub fn synth1(n: usize, m: usize, neg: f64, pos: f64, seed: u64, output: &Path) -> CmdResult {
    let out = faultline::synth::synth1(n, m, neg, pos, seed)?;
    ensure_dir(output)?;
    let mut pop_csv = Vec::new();
    save_population(&out.population, &mut pop_csv)?;
    write_file(
        &output.join("population.csv"),
        std::str::from_utf8(&pop_csv).expect("utf8 csv"),
    )?;
    save_schema(out.population.schema(), output.join("schema.json"))?;

    let mut fractions = String::from("feature,x,y,z,neg_achieved,pos_achieved,conflict_achieved\n");
    for f in &out.report {
        writeln!(
            fractions,
            "{},{},{},{},{:.6},{:.6},{:.6}",
            f.feature,
            f.group_sizes.0,
            f.group_sizes.1,
            f.group_sizes.2,
            f.neg_fraction,
            f.pos_fraction,
            f.conflict_fraction
        )
        .expect("string write");
    }
    write_file(&output.join("fractions.csv"), &fractions)?;
    Ok(())
}

pub fn synth2(
    team_sizes: &[usize],
    subgroup_counts: Option<&[usize]>,
    teams_per_config: usize,
    seed: u64,
    output: &Path,
) -> CmdResult {
    let out = faultline::synth::synth2(team_sizes, subgroup_counts, teams_per_config, seed)?;
    ensure_dir(output)?;
    let mut pop_csv = Vec::new();
    save_population(&out.population, &mut pop_csv)?;
    write_file(
        &output.join("population.csv"),
        std::str::from_utf8(&pop_csv).expect("utf8 csv"),
    )?;
    save_schema(out.population.schema(), output.join("schema.json"))?;

    let mut teams = String::from("team_id,members,ts,sn\n");
    for (i, t) in out.teams.iter().enumerate() {
        let members: Vec<String> = t.members.iter().map(|m| m.to_string()).collect();
        writeln!(
            teams,
            "{},{},{},{}",
            i,
            members.join(";"),
            t.team_size,
            t.subgroups
        )
        .expect("string write");
    }
    write_file(&output.join("teams.csv"), &teams)?;
    Ok(())
}

#[derive(Serialize)]
struct FitReport {
    mode: String,
    r_squared: f64,
    training_rows: usize,
    coefficients: Vec<Coefficient>,
}

#[derive(Serialize)]
struct Coefficient {
    alignment: usize,
    g: f64,
}

pub fn learn_penalty(
    population: &PopulationArgs,
    teams_path: &Path,
    mode: LearnMode,
    seed: u64,
    output: &Path,
) -> CmdResult {
    let pop = load_and_discretize(population)?;
    let records = load_teams_csv(teams_path)?;
    validate_teams(&records, &pop)?;
    let teams: Vec<Vec<u32>> = records.iter().map(|t| t.members.clone()).collect();
    let fit = match mode {
        LearnMode::Regression => {
            let outcomes: Vec<f64> = records
                .iter()
                .map(|t| {
                    t.outcome.ok_or_else(|| {
                        Error::Precondition(format!(
                            "team '{}' is missing an outcome (regression mode)",
                            t.team_id
                        ))
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            fit_penalties(&pop, &teams, &outcomes, FitMode::Regression)?
        }
        LearnMode::Classification => {
            fit_penalties(&pop, &teams, &[], FitMode::Classification { seed })?
        }
    };

    ensure_dir(output)?;
    let penalty_json = serde_json::to_string(&fit.scheme).map_err(|e| Error::Json {
        path: "penalty.json".into(),
        source: e,
    })?;
    write_file(&output.join("penalty.json"), &(penalty_json + "\n"))?;

    let report = FitReport {
        mode: match mode {
            LearnMode::Regression => "regression".into(),
            LearnMode::Classification => "classification".into(),
        },
        r_squared: fit.r_squared,
        training_rows: fit.training_rows,
        coefficients: fit
            .scheme
            .g
            .iter()
            .enumerate()
            .map(|(alignment, &g)| Coefficient { alignment, g })
            .collect(),
    };
    let report_json = serde_json::to_string_pretty(&report).map_err(|e| Error::Json {
        path: "fit_report.json".into(),
        source: e,
    })?;
    write_file(&output.join("fit_report.json"), &(report_json + "\n"))?;
    Ok(())
}

pub fn cramers_v(population: &PopulationArgs, output: &str) -> CmdResult {
    let pop = load_and_discretize(population)?;
    let schema = pop.schema();
    let mut columns: Vec<(String, Vec<u32>)> = Vec::new();
    for (f, spec) in schema.features.iter().enumerate() {
        match pop.worker(0).attributes[f].as_cat() {
            Some(_) => {
                let column = pop
                    .workers()
                    .iter()
                    .map(|w| w.attributes[f].as_cat().expect("categorical column"))
                    .collect();
                columns.push((spec.name.clone(), column));
            }
            None => {
                eprintln!(
                    "warning: feature '{}' is numeric with threshold semantics; skipped",
                    spec.name
                );
            }
        }
    }
    if columns.is_empty() {
        return Err(Error::Degenerate("no categorical features to correlate".into()).into());
    }
    let names: Vec<&str> = columns.iter().map(|(n, _)| n.as_str()).collect();
    let mut csv = format!("feature,{}\n", names.join(","));
    for (name_a, col_a) in &columns {
        let mut row = vec![name_a.clone()];
        for (_, col_b) in &columns {
            row.push(format!("{:.6}", faultline::stats::cramers_v(col_a, col_b)?));
        }
        csv.push_str(&row.join(","));
        csv.push('\n');
    }
    Sink::parse(output).write("cramers_v.csv", &csv)?;
    Ok(())
}

fn parse_edges(path: &Path) -> Result<(usize, Vec<(u32, u32)>)> {
    let text = read_to_string(path)?;
    let mut nodes: Option<usize> = None;
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix("nodes") {
            nodes = Some(rest.trim().parse().map_err(|_| {
                Error::cell(
                    lineno + 1,
                    "nodes",
                    format!("bad node count '{}'", rest.trim()),
                )
            })?);
            continue;
        }
        let mut parts = line.split_whitespace();
        let a = parts.next().and_then(|t| t.parse::<u32>().ok());
        let b = parts.next().and_then(|t| t.parse::<u32>().ok());
        match (a, b) {
            (Some(a), Some(b)) => edges.push((a, b)),
            _ => {
                return Err(Error::cell(
                    lineno + 1,
                    "edge",
                    format!("expected 'u v', found '{line}'"),
                ))
            }
        }
    }
    let nodes = nodes.unwrap_or_else(|| {
        edges
            .iter()
            .map(|&(a, b)| a.max(b) as usize + 1)
            .max()
            .unwrap_or(0)
    });
    Ok((nodes, edges))
}

pub fn reduce_clique(edges_path: &Path, k: usize, output: &Path) -> CmdResult {
    let (nodes, edges) = parse_edges(edges_path)?;
    let pop = faultline::synth::clique_reduction(nodes, &edges, k)?;
    ensure_dir(output)?;
    let mut pop_csv = Vec::new();
    save_population(&pop, &mut pop_csv)?;
    write_file(
        &output.join("population.csv"),
        std::str::from_utf8(&pop_csv).expect("utf8 csv"),
    )?;
    save_schema(pop.schema(), output.join("schema.json"))?;
    Ok(())
}
