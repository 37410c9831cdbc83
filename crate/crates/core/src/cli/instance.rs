//! CSV instances: a header naming every schema feature, then one data row
//! per instance.

use std::io::Read;

use thiserror::Error;

use crate::schema::{Domain, FeatureSchema, PointInstance, PointValue};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("header: missing feature `{0}`")]
    MissingFeature(String),
    #[error("header column {column}: unknown feature `{name}`")]
    UnknownFeature { column: usize, name: String },
    #[error("header column {column}: feature `{name}` appears twice")]
    DuplicateColumn { column: usize, name: String },
    #[error("row {row}, column {column} (`{feature}`): {reason}")]
    BadValue {
        row: usize,
        column: usize,
        feature: String,
        reason: String,
    },
    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth {
        row: usize,
        found: usize,
        expected: usize,
    },
    #[error("no data row {0}")]
    MissingRow(usize),
}

/// Reads every data row. Rows and columns in errors are 1-based and count
/// the header as row 1.
pub fn load_instances<R: Read>(
    reader: R,
    schema: &FeatureSchema,
) -> Result<Vec<PointInstance>, InstanceError> {
    let mut csv = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = csv.headers()?.clone();
    // Column of each schema feature.
    let mut columns = vec![None; schema.len()];
    for (col, name) in headers.iter().enumerate() {
        let Some(f) = schema.index_of(name) else {
            return Err(InstanceError::UnknownFeature {
                column: col + 1,
                name: name.to_string(),
            });
        };
        if columns[f].replace(col).is_some() {
            return Err(InstanceError::DuplicateColumn {
                column: col + 1,
                name: name.to_string(),
            });
        }
    }
    let columns: Vec<usize> = columns
        .into_iter()
        .enumerate()
        .map(|(f, c)| {
            c.ok_or_else(|| InstanceError::MissingFeature(schema.feature(f).name.clone()))
        })
        .collect::<Result<_, _>>()?;

    let mut out = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let row = i + 2;
        if record.len() != headers.len() {
            return Err(InstanceError::RowWidth {
                row,
                found: record.len(),
                expected: headers.len(),
            });
        }
        let mut values = Vec::with_capacity(schema.len());
        for (f, decl) in schema.features().iter().enumerate() {
            let col = columns[f];
            let raw = &record[col];
            let bad = |reason: String| InstanceError::BadValue {
                row,
                column: col + 1,
                feature: decl.name.clone(),
                reason,
            };
            if raw.is_empty() {
                return Err(bad("empty value".into()));
            }
            let value = match &decl.domain {
                Domain::Categorical(allowed) => {
                    if !allowed.iter().any(|v| v == raw) {
                        return Err(bad(format!("`{raw}` is not a declared value")));
                    }
                    PointValue::Categorical(raw.to_string())
                }
                Domain::Numeric { .. } => {
                    let x: f64 = raw
                        .parse()
                        .ok()
                        .filter(|x: &f64| x.is_finite())
                        .ok_or_else(|| bad(format!("`{raw}` is not a number")))?;
                    let range = decl.numeric_range().expect("numeric domain");
                    if !range.contains(x) {
                        return Err(bad(format!("{x} lies outside {range}")));
                    }
                    PointValue::Numeric(x)
                }
            };
            values.push(value);
        }
        out.push(
            PointInstance::new(schema, values).map_err(|e| InstanceError::BadValue {
                row,
                column: 0,
                feature: String::new(),
                reason: e.to_string(),
            })?,
        );
    }
    Ok(out)
}

/// Reads data row `index` (0-based).
pub fn load_instance<R: Read>(
    reader: R,
    schema: &FeatureSchema,
    index: usize,
) -> Result<PointInstance, InstanceError> {
    load_instances(reader, schema)?
        .into_iter()
        .nth(index)
        .ok_or(InstanceError::MissingRow(index))
}
