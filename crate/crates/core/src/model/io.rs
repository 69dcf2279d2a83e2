//! Flat-file ingestion and emission: population CSV, schema JSON, and the
//! teams CSV shared by scoring and penalty training.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::model::{AttrValue, FeatureKind, FeatureSchema, Population};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn csv_err(path: &Path, source: csv::Error) -> Error {
    Error::Csv {
        path: path.display().to_string(),
        source,
    }
}

/// Parse a schema JSON file: `{"features":[{"name":..,"kind":..,"agreement":..,..}]}`.
pub fn load_schema(path: impl AsRef<Path>) -> Result<FeatureSchema> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let schema: FeatureSchema = serde_json::from_str(&text).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    // Re-validate through the constructor.
    FeatureSchema::new(schema.features)
}

pub fn save_schema(schema: &FeatureSchema, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(schema).map_err(|e| Error::Json {
        path: path.display().to_string(),
        source: e,
    })?;
    fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

/// Load a population from `csv_path` described by the schema at `schema_path`.
///
/// The CSV needs a header row matching the schema's feature names, plus an
/// optional leading `id` column (ignored; ids are assigned in row order).
/// Unseen categorical symbols are appended to the schema's value list.
pub fn load_population(
    csv_path: impl AsRef<Path>,
    schema_path: impl AsRef<Path>,
) -> Result<Population> {
    let schema = load_schema(schema_path)?;
    load_population_with_schema(csv_path, schema)
}

pub fn load_population_with_schema(
    csv_path: impl AsRef<Path>,
    mut schema: FeatureSchema,
) -> Result<Population> {
    let csv_path = csv_path.as_ref();
    let mut reader = csv::Reader::from_path(csv_path).map_err(|e| csv_err(csv_path, e))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| csv_err(csv_path, e))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();

    let skip_id = headers.first().map(|h| h == "id").unwrap_or(false);
    let data_headers = &headers[usize::from(skip_id)..];

    for h in data_headers {
        if !schema.features.iter().any(|f| f.name == *h) {
            return Err(Error::Schema(format!(
                "unknown column '{h}' not declared in schema"
            )));
        }
    }
    // Column index of each schema feature within the CSV row.
    let mut columns = Vec::with_capacity(schema.m());
    for spec in &schema.features {
        let pos = data_headers
            .iter()
            .position(|h| *h == spec.name)
            .ok_or_else(|| Error::Schema(format!("missing column '{}'", spec.name)))?;
        columns.push(pos + usize::from(skip_id));
    }

    let mut rows: Vec<Vec<AttrValue>> = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(csv_path, e))?;
        let row_no = row_idx + 1;
        let mut attrs = Vec::with_capacity(schema.m());
        for (f, &col) in columns.iter().enumerate() {
            let raw = record
                .get(col)
                .ok_or_else(|| Error::cell(row_no, &schema.features[f].name, "missing value"))?
                .trim();
            let value = match schema.features[f].kind {
                FeatureKind::Categorical => {
                    AttrValue::Cat(schema.features[f].symbol_index_or_insert(raw))
                }
                FeatureKind::Numeric => AttrValue::Num(raw.parse::<f64>().map_err(|_| {
                    Error::cell(
                        row_no,
                        &schema.features[f].name,
                        format!("non-numeric token '{raw}' in numeric column"),
                    )
                })?),
            };
            attrs.push(value);
        }
        rows.push(attrs);
    }
    if rows.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    Population::from_rows(schema, rows)
}

/// Write the population CSV (leading `id` column, then one column per feature).
pub fn save_population<W: Write>(pop: &Population, mut out: W) -> Result<()> {
    let write = |out: &mut W, line: String| -> Result<()> {
        writeln!(out, "{line}").map_err(|e| Error::Io {
            path: "<writer>".into(),
            source: e,
        })
    };
    let mut header = vec!["id".to_string()];
    header.extend(pop.schema().features.iter().map(|f| f.name.clone()));
    write(&mut out, header.join(","))?;
    for w in pop.workers() {
        let mut row = vec![w.id.to_string()];
        for (value, spec) in w.attributes.iter().zip(&pop.schema().features) {
            row.push(match value {
                AttrValue::Cat(v) => spec.values[*v as usize].clone(),
                AttrValue::Num(x) => format!("{x}"),
            });
        }
        write(&mut out, row.join(","))?;
    }
    Ok(())
}

/// One row of a teams CSV: `team_id,members(semicolon-separated)[,outcome]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TeamRecord {
    pub team_id: String,
    pub members: Vec<u32>,
    pub outcome: Option<f64>,
}

pub fn load_teams_csv(path: impl AsRef<Path>) -> Result<Vec<TeamRecord>> {
    let path = path.as_ref();
    let mut reader = csv::Reader::from_path(path).map_err(|e| csv_err(path, e))?;
    let mut teams = Vec::new();
    for (row_idx, record) in reader.records().enumerate() {
        let record = record.map_err(|e| csv_err(path, e))?;
        let row_no = row_idx + 1;
        let team_id = record
            .get(0)
            .ok_or_else(|| Error::cell(row_no, "team_id", "missing value"))?
            .trim()
            .to_string();
        let members = record
            .get(1)
            .ok_or_else(|| Error::cell(row_no, "members", "missing value"))?
            .split(';')
            .filter(|s| !s.trim().is_empty())
            .map(|s| {
                s.trim().parse::<u32>().map_err(|_| {
                    Error::cell(row_no, "members", format!("bad worker id '{}'", s.trim()))
                })
            })
            .collect::<Result<Vec<u32>>>()?;
        if members.is_empty() {
            return Err(Error::cell(row_no, "members", "empty team"));
        }
        let outcome = match record.get(2).map(str::trim) {
            Some("") | None => None,
            Some(raw) => Some(raw.parse::<f64>().map_err(|_| {
                Error::cell(row_no, "outcome", format!("non-numeric token '{raw}'"))
            })?),
        };
        teams.push(TeamRecord {
            team_id,
            members,
            outcome,
        });
    }
    if teams.is_empty() {
        return Err(Error::Degenerate("teams file holds no teams".into()));
    }
    Ok(teams)
}

pub fn save_teams_csv<W: Write>(teams: &[TeamRecord], mut out: W) -> Result<()> {
    let has_outcome = teams.iter().any(|t| t.outcome.is_some());
    let header = if has_outcome {
        "team_id,members,outcome"
    } else {
        "team_id,members"
    };
    writeln!(out, "{header}").map_err(|e| Error::Io {
        path: "<writer>".into(),
        source: e,
    })?;
    for t in teams {
        let members = t
            .members
            .iter()
            .map(|m| m.to_string())
            .collect::<Vec<_>>()
            .join(";");
        let line = match (has_outcome, t.outcome) {
            (true, Some(o)) => format!("{},{},{}", t.team_id, members, o),
            (true, None) => format!("{},{},", t.team_id, members),
            (false, _) => format!("{},{}", t.team_id, members),
        };
        writeln!(out, "{line}").map_err(|e| Error::Io {
            path: "<writer>".into(),
            source: e,
        })?;
    }
    Ok(())
}
