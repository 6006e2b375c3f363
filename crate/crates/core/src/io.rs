//! Dataset and ground-truth file formats.
//!
//! CSV: a header row of attribute names, optionally ending in a `label` column of
//! integers. Lines starting with `#` are comments. Values are written in Rust's
//! shortest round-trip decimal form, so save followed by load is bit-exact.
//!
//! JSON: `{"attributes": [...], "points": [[...]], "labels": [...], "subspaces": [[...]]}`
//! where `labels` and `subspaces` are optional.

use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataset::{default_names, AttributeSet, Dataset, Label};
use crate::error::{Error, Result};

/// Column name that marks the trailing ground-truth label column in CSV files.
pub const LABEL_COLUMN: &str = "label";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DataFormat {
    Csv,
    Json,
}

impl DataFormat {
    /// Guesses the format from the file extension (`.json` is JSON, anything else CSV).
    pub fn from_path(path: &Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(e) if e.eq_ignore_ascii_case("json") => DataFormat::Json,
            _ => DataFormat::Csv,
        }
    }
}

impl FromStr for DataFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DataFormat::Csv),
            "json" => Ok(DataFormat::Json),
            _ => Err(Error::Unknown {
                what: "format",
                name: s.to_string(),
            }),
        }
    }
}

/// JSON dataset document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetDoc {
    pub attributes: Vec<String>,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspaces: Option<Vec<AttributeSet>>,
}

/// Ground truth written next to generated datasets.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub subspaces: Option<Vec<AttributeSet>>,
}

impl GroundTruth {
    pub fn of(data: &Dataset) -> Self {
        GroundTruth {
            labels: data.true_labels().map(<[Label]>::to_vec),
            subspaces: data.true_subspaces().map(<[AttributeSet]>::to_vec),
        }
    }
}

pub fn load_dataset(path: &Path, format: DataFormat) -> Result<Dataset> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    match format {
        DataFormat::Csv => parse_csv(&text),
        DataFormat::Json => parse_json(&text),
    }
}

pub fn save_dataset(
    data: &Dataset,
    path: &Path,
    format: DataFormat,
    comment: Option<&str>,
) -> Result<()> {
    let text = match format {
        DataFormat::Csv => to_csv(data, comment),
        DataFormat::Json => to_json(data)?,
    };
    write_file(path, text.as_bytes())
}

pub(crate) fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(bytes).map_err(|e| Error::io(path, e))
}

pub fn parse_json(text: &str) -> Result<Dataset> {
    let doc: DatasetDoc = serde_json::from_str(text)?;
    from_doc(doc)
}

pub fn from_doc(doc: DatasetDoc) -> Result<Dataset> {
    let mut data = Dataset::new(doc.points, doc.attributes)?;
    if let Some(labels) = doc.labels {
        data = data.with_labels(labels)?;
    }
    if let Some(subspaces) = doc.subspaces {
        data = data.with_subspaces(subspaces)?;
    }
    Ok(data)
}

pub fn to_doc(data: &Dataset) -> DatasetDoc {
    DatasetDoc {
        attributes: data.attribute_names().to_vec(),
        points: data.rows().map(<[f64]>::to_vec).collect(),
        labels: data.true_labels().map(<[Label]>::to_vec),
        subspaces: data.true_subspaces().map(<[AttributeSet]>::to_vec),
    }
}

pub fn to_json(data: &Dataset) -> Result<String> {
    Ok(serde_json::to_string(&to_doc(data))?)
}

/// Parses CSV text. Errors carry the 1-based line and column of the offending cell.
pub fn parse_csv(text: &str) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let mut records = reader.records();
    let first = match records.next() {
        Some(r) => r?,
        None => return Err(Error::InvalidDataset("empty CSV".into())),
    };
    let header_is_data = first.iter().all(|f| f.parse::<f64>().is_ok());

    let mut names: Vec<String>;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<Label> = Vec::new();
    let has_label;
    let mut pending = Vec::new();
    if header_is_data {
        names = default_names(first.len());
        has_label = false;
        pending.push(first);
    } else {
        names = first.iter().map(str::to_string).collect();
        has_label = names.last().is_some_and(|n| n == LABEL_COLUMN);
        if has_label {
            names.pop();
        }
    }
    let m = names.len();
    let width = m + usize::from(has_label);

    for record in pending.into_iter().map(Ok).chain(records) {
        let record = record?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() != width {
            return Err(Error::Parse {
                row: line,
                column: record.len().min(width) + 1,
                message: format!("expected {width} fields, found {}", record.len()),
            });
        }
        let mut row = Vec::with_capacity(m);
        for (j, field) in record.iter().take(m).enumerate() {
            let v: f64 = field.parse().map_err(|_| Error::Parse {
                row: line,
                column: j + 1,
                message: format!("{field:?} is not a number"),
            })?;
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: line,
                    column: j + 1,
                    attribute: names[j].clone(),
                    value: field.to_string(),
                });
            }
            row.push(v);
        }
        if has_label {
            let field = &record[m];
            let l: Label = field.parse().map_err(|_| Error::Parse {
                row: line,
                column: m + 1,
                message: format!("label {field:?} is not an integer"),
            })?;
            labels.push(l);
        }
        rows.push(row);
    }

    let data = Dataset::new(rows, names)?;
    if has_label {
        data.with_labels(labels)
    } else {
        Ok(data)
    }
}

pub fn to_csv(data: &Dataset, comment: Option<&str>) -> String {
    let mut out = String::new();
    if let Some(c) = comment {
        for line in c.lines() {
            out.push_str("# ");
            out.push_str(line);
            out.push('\n');
        }
    }
    let labels = data.true_labels();
    out.push_str(&data.attribute_names().join(","));
    if labels.is_some() {
        out.push(',');
        out.push_str(LABEL_COLUMN);
    }
    out.push('\n');
    for (i, row) in data.rows().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                out.push(',');
            }
            // Display for f64 is the shortest string that parses back to the same value.
            out.push_str(&v.to_string());
        }
        if let Some(l) = labels {
            out.push(',');
            out.push_str(&l[i].to_string());
        }
        out.push('\n');
    }
    out
}

pub fn load_truth(path: &Path) -> Result<GroundTruth> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(serde_json::from_str(&text)?)
}
