//! Learning a penalization scheme g(x) from team outcomes, or from
//! discriminating real teams against randomly populated fakes.

use crate::error::{Error, Result};
use crate::measure::{alignment_histogram, partition_score, pct_score, PenaltyScheme};
use crate::model::Population;
use crate::partition::{faultline_splitter_observed, SplitterOptions};
use crate::stats::{mean, population_std, solve_least_squares};
use crate::synth::fake_teams;

/// A training team with its success outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeRecord {
    pub members: Vec<u32>,
    pub outcome: f64,
}

/// Negate success scores (higher success must mean lower dependent value)
/// and z-score to mean 0, population std 1.
pub fn standardize_outcomes(values: &[f64]) -> Result<Vec<f64>> {
    if values.len() < 2 {
        return Err(Error::Precondition("need at least 2 outcomes".into()));
    }
    let negated: Vec<f64> = values.iter().map(|v| -v).collect();
    let sd = population_std(&negated);
    if sd == 0.0 {
        return Err(Error::Degenerate(
            "constant outcomes cannot be standardized".into(),
        ));
    }
    let mu = mean(&negated);
    Ok(negated.iter().map(|v| (v - mu) / sd).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    /// Fit standardized negated outcomes.
    Regression,
    /// Discriminate real teams (success 1) from random fakes (success 0);
    /// fakes match the real teams' count and sizes. The binary labels run
    /// through the same negate-and-standardize step as regression outcomes,
    /// so faultline-heavy fakes carry the higher dependent value and
    /// separated data produces ascending non-negative schemes.
    Classification { seed: u64 },
}

/// A fitted penalty scheme plus its fit report.
#[derive(Debug, Clone)]
pub struct PenaltyFit {
    /// Shifted so g(0) = 0.
    pub scheme: PenaltyScheme,
    pub r_squared: f64,
    pub training_rows: usize,
}

const RIDGE_LAMBDA: f64 = 1e-8;

/// Least-squares fit of the dependent variable on the alignment histogram
/// counts aligned(x, T), x = 0..=m, then shifted so g(0) = 0.
pub fn fit_penalties(
    pop: &Population,
    teams: &[Vec<u32>],
    outcomes: &[f64],
    mode: FitMode,
) -> Result<PenaltyFit> {
    let m = pop.m();
    if teams.len() < m + 2 {
        return Err(Error::Precondition(format!(
            "need at least m+2 = {} training teams, got {}",
            m + 2,
            teams.len()
        )));
    }
    let mut design: Vec<Vec<f64>> = teams
        .iter()
        .map(|members| {
            alignment_histogram(members, pop)
                .counts
                .iter()
                .map(|&c| c as f64)
                .collect()
        })
        .collect();
    let targets: Vec<f64> = match mode {
        FitMode::Regression => {
            if outcomes.len() != teams.len() {
                return Err(Error::Precondition("one outcome per team required".into()));
            }
            standardize_outcomes(outcomes)?
        }
        FitMode::Classification { seed } => {
            let sizes: Vec<usize> = teams.iter().map(|t| t.len()).collect();
            let mut labels = vec![1.0; teams.len()];
            for fake in fake_teams(pop, teams.len(), &sizes, seed)? {
                design.push(
                    alignment_histogram(&fake, pop)
                        .counts
                        .iter()
                        .map(|&c| c as f64)
                        .collect(),
                );
                labels.push(0.0);
            }
            standardize_outcomes(&labels)?
        }
    };
    if design.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::Degenerate(
            "all alignment histograms identical; the design carries no signal".into(),
        ));
    }

    let beta = solve_least_squares(&design, &targets, RIDGE_LAMBDA)?;

    // R^2 of the raw (pre-shift) fit.
    let fitted: Vec<f64> = design
        .iter()
        .map(|row| row.iter().zip(&beta).map(|(a, b)| a * b).sum())
        .collect();
    let target_mean = mean(&targets);
    let ss_res: f64 = targets
        .iter()
        .zip(&fitted)
        .map(|(y, f)| (y - f) * (y - f))
        .sum();
    let ss_tot: f64 = targets
        .iter()
        .map(|y| (y - target_mean) * (y - target_mean))
        .sum();
    let r_squared = if ss_tot > 0.0 {
        1.0 - ss_res / ss_tot
    } else {
        0.0
    };

    Ok(PenaltyFit {
        scheme: PenaltyScheme { g: beta }.normalized(),
        r_squared,
        training_rows: design.len(),
    })
}

/// Run the splitter, recording total CT and total PCT under `g` after every
/// iteration. Restarts run sequentially; the trace concatenates them.
pub fn pct_vs_ct_trace(
    pop: &Population,
    opts: &SplitterOptions,
    g: &PenaltyScheme,
) -> Result<Vec<(f64, f64)>> {
    if g.g.len() != pop.m() + 1 {
        return Err(Error::Precondition(format!(
            "penalty scheme has {} entries, need m+1 = {}",
            g.g.len(),
            pop.m() + 1
        )));
    }
    let mut trace: Vec<(f64, f64)> = Vec::new();
    let mut failure: Option<Error> = None;
    {
        let mut observer = |partitioning: &crate::model::Partitioning| {
            if failure.is_some() {
                return;
            }
            let ct = partition_score(partitioning, pop);
            let mut pct = 0.0f64;
            for team in &partitioning.teams {
                match pct_score(team.members(), pop, g) {
                    Ok(s) => pct += s,
                    Err(e) => {
                        failure = Some(e);
                        return;
                    }
                }
            }
            trace.push((ct, pct));
        };
        faultline_splitter_observed(pop, opts, &mut observer)?;
    }
    match failure {
        Some(e) => Err(e),
        None => Ok(trace),
    }
}
