//! CSV input and output.
//!
//! Data files have a header row. Columns named `label` and `contaminated`
//! (any case) are read as the true cluster and the contamination flag; every
//! other column is a coordinate. A label that is empty or negative marks a
//! point with unknown truth.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::kmedians::Codebook;
use crate::points::PointSet;
use crate::simulation::LabeledDataset;

/// Contents of a data file.
#[derive(Debug, Clone, PartialEq)]
pub struct InputData {
    pub points: PointSet,
    /// Present when the file has a `label` column.
    pub labels: Option<Vec<Option<usize>>>,
    /// Present when the file has a `contaminated` column.
    pub contaminated: Option<Vec<bool>>,
}

impl InputData {
    /// Labels of points flagged as contaminated are dropped.
    pub fn into_dataset(self, provenance: String) -> LabeledDataset {
        let n = self.points.len();
        let contaminated = self.contaminated.unwrap_or_else(|| vec![false; n]);
        let mut true_labels = self.labels.unwrap_or_else(|| vec![None; n]);
        for (l, &c) in true_labels.iter_mut().zip(&contaminated) {
            if c {
                *l = None;
            }
        }
        LabeledDataset {
            points: self.points,
            true_labels,
            contaminated,
            true_centers: None,
            provenance,
        }
    }
}

fn parse_error(row: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        row,
        msg: msg.into(),
    }
}

fn parse_label(field: &str, row: usize) -> Result<Option<usize>> {
    if field.is_empty() {
        return Ok(None);
    }
    let v: i64 = field
        .parse()
        .map_err(|_| parse_error(row, format!("label '{field}' is not an integer")))?;
    Ok(usize::try_from(v).ok())
}

fn parse_flag(field: &str, row: usize) -> Result<bool> {
    match field.to_ascii_lowercase().as_str() {
        "0" | "false" | "" => Ok(false),
        "1" | "true" => Ok(true),
        other => Err(parse_error(row, format!("contaminated flag '{other}' is not 0/1"))),
    }
}

/// Read a data file. Row numbers in errors count the header as row 1.
pub fn read_data(path: &Path) -> Result<InputData> {
    let file = File::open(path)?;
    read_data_from(file)
}

pub fn read_data_from(reader: impl std::io::Read) -> Result<InputData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let header = rdr.headers().map_err(|e| csv_parse_error(e, 1))?.clone();
    if header.is_empty() || header.iter().all(|h| h.is_empty()) {
        return Err(parse_error(1, "missing header row"));
    }
    let mut label_col = None;
    let mut mask_col = None;
    let mut coord_cols = Vec::new();
    for (i, name) in header.iter().enumerate() {
        match name.to_ascii_lowercase().as_str() {
            "label" if label_col.is_none() => label_col = Some(i),
            "contaminated" if mask_col.is_none() => mask_col = Some(i),
            "label" | "contaminated" => {
                return Err(parse_error(1, format!("duplicate column '{name}'")))
            }
            _ => coord_cols.push(i),
        }
    }
    if coord_cols.is_empty() {
        return Err(parse_error(1, "no coordinate columns"));
    }

    let mut data = Vec::new();
    let mut labels = Vec::new();
    let mut mask = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut row = 1;
    loop {
        let more = rdr
            .read_record(&mut record)
            .map_err(|e| csv_parse_error(e, row + 1))?;
        if !more {
            break;
        }
        row = record.position().map_or(row + 1, |p| p.line() as usize);
        for &c in &coord_cols {
            let field = &record[c];
            let v: f64 = field.parse().map_err(|_| {
                parse_error(row, format!("'{field}' in column '{}' is not a number", &header[c]))
            })?;
            if !v.is_finite() {
                return Err(parse_error(row, format!("non-finite value in column '{}'", &header[c])));
            }
            data.push(v);
        }
        if let Some(c) = label_col {
            labels.push(parse_label(&record[c], row)?);
        }
        if let Some(c) = mask_col {
            mask.push(parse_flag(&record[c], row)?);
        }
    }
    if data.is_empty() {
        return Err(parse_error(2, "no data rows"));
    }
    Ok(InputData {
        points: PointSet::from_flat(coord_cols.len(), data)?,
        labels: label_col.map(|_| labels),
        contaminated: mask_col.map(|_| mask),
    })
}

fn csv_parse_error(e: csv::Error, fallback_row: usize) -> Error {
    let row = e
        .position()
        .map_or(fallback_row, |p| p.line() as usize);
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Csv(e),
        _ => parse_error(row, e.to_string()),
    }
}

/// Read one-column (or `index,label`) predicted labels.
pub fn read_labels(path: &Path) -> Result<Vec<usize>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(File::open(path)?);
    let header = rdr.headers().map_err(|e| csv_parse_error(e, 1))?.clone();
    let col = header
        .iter()
        .position(|h| h.eq_ignore_ascii_case("label"))
        .ok_or_else(|| parse_error(1, "labels file needs a 'label' column"))?;
    let mut out = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| csv_parse_error(e, i + 2))?;
        let field = &rec[col];
        out.push(
            field
                .parse()
                .map_err(|_| parse_error(i + 2, format!("label '{field}' is not a cluster index")))?,
        );
    }
    if out.is_empty() {
        return Err(parse_error(2, "no data rows"));
    }
    Ok(out)
}

/// Read a centers file (one center per row, header required).
pub fn read_centers(path: &Path) -> Result<Codebook> {
    let input = read_data(path)?;
    Codebook::new(input.points.rows().map(<[f64]>::to_vec).collect())
}

/// Buffered CSV writer producing `\n`-terminated rows.
pub struct CsvOut {
    out: BufWriter<File>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[String]) -> Result<Self> {
        let mut w = Self {
            out: BufWriter::new(File::create(path)?),
        };
        w.row(header)?;
        Ok(w)
    }

    pub fn row<S: AsRef<str>>(&mut self, fields: &[S]) -> Result<()> {
        let line = fields.iter().map(AsRef::as_ref).collect::<Vec<_>>().join(",");
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}

/// Coordinate column names `x1, …, xd`.
pub fn coordinate_header(d: usize) -> Vec<String> {
    (1..=d).map(|j| format!("x{j}")).collect()
}

fn label_field(label: Option<usize>) -> String {
    label.map_or_else(|| "-1".to_string(), |l| l.to_string())
}

/// Write points with `label` and optionally `contaminated` columns.
pub fn write_dataset(path: &Path, data: &LabeledDataset, with_mask: bool) -> Result<()> {
    let mut header = coordinate_header(data.points.dim());
    header.push("label".into());
    if with_mask {
        header.push("contaminated".into());
    }
    let mut w = CsvOut::create(path, &header)?;
    for (i, row) in data.points.rows().enumerate() {
        let mut fields: Vec<String> = row.iter().map(f64::to_string).collect();
        fields.push(label_field(data.true_labels[i]));
        if with_mask {
            fields.push(if data.contaminated[i] { "1" } else { "0" }.into());
        }
        w.row(&fields)?;
    }
    w.finish()
}

pub fn write_labels(path: &Path, labels: &[usize]) -> Result<()> {
    let mut w = CsvOut::create(path, &["index".into(), "label".into()])?;
    for (i, l) in labels.iter().enumerate() {
        w.row(&[i.to_string(), l.to_string()])?;
    }
    w.finish()
}

pub fn write_centers(path: &Path, codebook: &Codebook) -> Result<()> {
    let mut w = CsvOut::create(path, &coordinate_header(codebook.dim()))?;
    for c in codebook.centers() {
        w.row(&c.iter().map(f64::to_string).collect::<Vec<_>>())?;
    }
    w.finish()
}

/// Write `value` as pretty JSON through a temporary file, so a reader never
/// sees a partial document.
pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let tmp = path.with_extension("json.partial");
    {
        let mut out = BufWriter::new(File::create(&tmp)?);
        serde_json::to_writer_pretty(&mut out, value)?;
        writeln!(out)?;
        out.flush()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}
