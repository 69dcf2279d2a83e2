//! Numeric-attribute discretization: equal-width binning and KDE-valley
//! binning. Threshold/weighted features pass through untouched.

use crate::error::{Error, Result};
use crate::model::{Agreement, AttrValue, FeatureKind, FeatureSchema, FeatureSpec, Population};

#[derive(Debug)]
pub struct DiscretizeOutput {
    pub population: Population,
    /// Human-readable notes, e.g. a constant column collapsing to one bin.
    pub warnings: Vec<String>,
}

/// Replace every `bins`/`kde_bins` feature by a categorical feature over its
/// intervals. Applying the result a second time is a no-op.
pub fn discretize(pop: &Population) -> Result<DiscretizeOutput> {
    let mut warnings = Vec::new();
    let mut specs: Vec<FeatureSpec> = Vec::with_capacity(pop.m());
    // Per feature: either pass-through or the bin index of every worker.
    let mut converted: Vec<Option<Vec<u32>>> = Vec::with_capacity(pop.m());

    for (f, spec) in pop.schema().features.iter().enumerate() {
        let mode = spec.agreement;
        if spec.kind != FeatureKind::Numeric
            || !matches!(mode, Agreement::Bins | Agreement::KdeBins)
        {
            specs.push(spec.clone());
            converted.push(None);
            continue;
        }
        let values: Vec<f64> = pop
            .workers()
            .iter()
            .map(|w| {
                w.attributes[f]
                    .as_num()
                    .expect("numeric feature holds numbers")
            })
            .collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Degenerate(format!(
                "feature '{}' holds non-finite values",
                spec.name
            )));
        }
        let (labels, assignment) = match mode {
            Agreement::Bins => {
                let b = spec.bins.unwrap_or(1);
                equal_width_bins(&values, b, &spec.name, &mut warnings)
            }
            Agreement::KdeBins => kde_bins(&values, &spec.name, &mut warnings),
            _ => unreachable!(),
        };
        specs.push(FeatureSpec {
            name: spec.name.clone(),
            kind: FeatureKind::Categorical,
            agreement: Agreement::Exact,
            bins: None,
            gamma: None,
            values: labels,
        });
        converted.push(Some(assignment));
    }

    let rows: Vec<Vec<AttrValue>> = pop
        .workers()
        .iter()
        .map(|w| {
            w.attributes
                .iter()
                .enumerate()
                .map(|(f, value)| match &converted[f] {
                    Some(bins) => AttrValue::Cat(bins[w.id as usize]),
                    None => *value,
                })
                .collect()
        })
        .collect();

    let population = Population::from_rows(FeatureSchema::new(specs)?, rows)?;
    Ok(DiscretizeOutput {
        population,
        warnings,
    })
}

fn interval_label(lo: f64, hi: f64, closed_right: bool) -> String {
    if closed_right {
        format!("[{lo}, {hi}]")
    } else {
        format!("[{lo}, {hi})")
    }
}

fn equal_width_bins(
    values: &[f64],
    b: usize,
    name: &str,
    warnings: &mut Vec<String>,
) -> (Vec<String>, Vec<u32>) {
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if min == max {
        if b > 1 {
            warnings.push(format!(
                "feature '{name}': constant column, collapsing to one bin"
            ));
        }
        return (vec![interval_label(min, max, true)], vec![0; values.len()]);
    }
    let width = (max - min) / b as f64;
    let labels = (0..b)
        .map(|i| {
            let lo = min + i as f64 * width;
            let hi = if i + 1 == b {
                max
            } else {
                min + (i + 1) as f64 * width
            };
            interval_label(lo, hi, i + 1 == b)
        })
        .collect();
    let assignment = values
        .iter()
        .map(|&v| (((v - min) / width) as usize).min(b - 1) as u32)
        .collect();
    (labels, assignment)
}

/// Gaussian KDE with Silverman bandwidth; bins split at the density's local
/// minima on a 512-point grid over [min-3h, max+3h].
fn kde_bins(values: &[f64], name: &str, warnings: &mut Vec<String>) -> (Vec<String>, Vec<u32>) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    let sigma = var.sqrt();
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if sigma == 0.0 {
        warnings.push(format!(
            "feature '{name}': constant column, collapsing to one bin"
        ));
        return (vec![interval_label(min, max, true)], vec![0; values.len()]);
    }
    let h = 1.06 * sigma * n.powf(-0.2);

    const GRID: usize = 512;
    let lo = min - 3.0 * h;
    let hi = max + 3.0 * h;
    let step = (hi - lo) / (GRID - 1) as f64;
    let density: Vec<f64> = (0..GRID)
        .map(|i| {
            let x = lo + i as f64 * step;
            values
                .iter()
                .map(|&v| {
                    let z = (x - v) / h;
                    (-0.5 * z * z).exp()
                })
                .sum::<f64>()
        })
        .collect();

    let mut boundaries: Vec<f64> = Vec::new();
    for i in 1..GRID - 1 {
        if density[i] < density[i - 1] && density[i] < density[i + 1] {
            boundaries.push(lo + i as f64 * step);
        }
    }

    if boundaries.is_empty() {
        return (vec![interval_label(min, max, true)], vec![0; values.len()]);
    }
    let mut labels = Vec::with_capacity(boundaries.len() + 1);
    labels.push(format!("(-inf, {})", boundaries[0]));
    for w in boundaries.windows(2) {
        labels.push(interval_label(w[0], w[1], false));
    }
    labels.push(format!("[{}, inf)", boundaries[boundaries.len() - 1]));
    let assignment = values
        .iter()
        .map(|&v| boundaries.iter().filter(|&&b| b <= v).count() as u32)
        .collect();
    (labels, assignment)
}
