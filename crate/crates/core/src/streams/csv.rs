//! CSV ingestion and export.
//!
//! Ingestion makes two passes over the file, each holding one record at a
//! time. The first pass validates every row and collects categorical levels
//! and class labels; the second yields samples. Categorical columns are
//! one-hot expanded in place (levels in first-seen order). Labels are mapped
//! to class indices in first-seen order, except when every label is a
//! non-negative integer literal, in which case the integer is the index.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::sample::Sample;

use super::{DataStream, StreamSchema};

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvOptions {
    /// Header name of the label column.
    pub label: String,
    /// Header names of categorical feature columns. All other feature
    /// columns must be numeric.
    pub categorical: Vec<String>,
    /// Lower bound on the class count (useful when a file does not contain
    /// every class).
    pub min_classes: Option<usize>,
}

#[derive(Debug, Clone)]
enum Column {
    Numeric,
    Categorical(Vec<String>),
    Label,
}

#[derive(Debug, Clone)]
enum LabelMap {
    Integer,
    FirstSeen(HashMap<String, usize>),
}

pub struct CsvStream {
    path: PathBuf,
    schema: StreamSchema,
    columns: Vec<Column>,
    labels: LabelMap,
    rows: u64,
    reader: csv::Reader<File>,
    record: csv::StringRecord,
}

fn open_reader(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(file))
}

fn is_integer_literal(s: &str) -> bool {
    !s.is_empty() && s.len() <= 18 && s.bytes().all(|b| b.is_ascii_digit())
}

impl CsvStream {
    pub fn open(path: impl AsRef<Path>, options: &CsvOptions) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let ingest = |line: u64, message: String| Error::Ingestion {
            path: path.clone(),
            line,
            message,
        };
        let csv_err = |e: csv::Error| {
            let line = e.position().map_or(0, |p| p.line());
            ingest(line, e.to_string())
        };

        let mut reader = open_reader(&path)?;
        let header = reader.headers().map_err(csv_err)?.clone();
        let label_col = header
            .iter()
            .position(|h| h == options.label)
            .ok_or_else(|| ingest(1, format!("no label column named '{}'", options.label)))?;
        for name in &options.categorical {
            if !header.iter().any(|h| h == name) {
                return Err(ingest(1, format!("no categorical column named '{name}'")));
            }
        }
        let mut columns: Vec<Column> = header
            .iter()
            .enumerate()
            .map(|(i, h)| {
                if i == label_col {
                    Column::Label
                } else if options.categorical.iter().any(|c| c == h) {
                    Column::Categorical(Vec::new())
                } else {
                    Column::Numeric
                }
            })
            .collect();

        let mut first_seen: Vec<String> = Vec::new();
        let mut first_seen_index: HashMap<String, usize> = HashMap::new();
        let mut all_integer = true;
        let mut max_integer = 0usize;
        let mut rows = 0u64;
        let mut record = csv::StringRecord::new();
        while reader.read_record(&mut record).map_err(csv_err)? {
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != columns.len() {
                return Err(ingest(
                    line,
                    format!("expected {} fields, found {}", columns.len(), record.len()),
                ));
            }
            for (i, (cell, col)) in record.iter().zip(columns.iter_mut()).enumerate() {
                let cell = cell.trim();
                if cell.is_empty() {
                    return Err(ingest(line, format!("missing value in column '{}'", &header[i])));
                }
                match col {
                    Column::Numeric => {
                        parse_numeric(cell).ok_or_else(|| {
                            ingest(
                                line,
                                format!("non-numeric value '{cell}' in column '{}'", &header[i]),
                            )
                        })?;
                    }
                    Column::Categorical(levels) => {
                        if !levels.iter().any(|l| l == cell) {
                            levels.push(cell.to_string());
                        }
                    }
                    Column::Label => {
                        if !first_seen_index.contains_key(cell) {
                            first_seen_index.insert(cell.to_string(), first_seen.len());
                            first_seen.push(cell.to_string());
                        }
                        if is_integer_literal(cell) {
                            max_integer = max_integer.max(cell.parse::<usize>().unwrap_or(0));
                        } else {
                            all_integer = false;
                        }
                    }
                }
            }
            rows += 1;
        }

        let (labels, n_classes) = if all_integer && rows > 0 {
            (LabelMap::Integer, max_integer + 1)
        } else {
            (LabelMap::FirstSeen(first_seen_index), first_seen.len())
        };
        let n_classes = n_classes.max(options.min_classes.unwrap_or(2)).max(2);
        let n_features = columns
            .iter()
            .map(|c| match c {
                Column::Numeric => 1,
                Column::Categorical(levels) => levels.len(),
                Column::Label => 0,
            })
            .sum();
        let name = path
            .file_stem()
            .map_or_else(|| "csv".to_string(), |s| s.to_string_lossy().into_owned());
        let schema = StreamSchema::new(name, n_features, n_classes)?;
        Ok(Self {
            reader: open_reader(&path)?,
            path,
            schema,
            columns,
            labels,
            rows,
            record: csv::StringRecord::new(),
        })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Number of data rows in the file.
    pub fn rows(&self) -> u64 {
        self.rows
    }

    fn parse_record(&self) -> Result<Sample> {
        let line = self.record.position().map_or(0, |p| p.line());
        let ingest = |message: String| Error::Ingestion {
            path: self.path.clone(),
            line,
            message,
        };
        if self.record.len() != self.columns.len() {
            return Err(ingest("record length changed since the first pass".into()));
        }
        let mut features = Vec::with_capacity(self.schema.n_features);
        let mut label = None;
        for (cell, col) in self.record.iter().zip(&self.columns) {
            let cell = cell.trim();
            match col {
                Column::Numeric => features.push(
                    parse_numeric(cell).ok_or_else(|| ingest(format!("non-numeric value '{cell}'")))?,
                ),
                Column::Categorical(levels) => {
                    let k = levels
                        .iter()
                        .position(|l| l == cell)
                        .ok_or_else(|| ingest(format!("unseen level '{cell}'")))?;
                    features.extend((0..levels.len()).map(|j| if j == k { 1.0 } else { 0.0 }));
                }
                Column::Label => {
                    label = Some(match &self.labels {
                        LabelMap::Integer => cell
                            .parse::<usize>()
                            .map_err(|_| ingest(format!("bad label '{cell}'")))?,
                        LabelMap::FirstSeen(map) => *map
                            .get(cell)
                            .ok_or_else(|| ingest(format!("unseen label '{cell}'")))?,
                    })
                }
            }
        }
        Ok(Sample::new(features, label.expect("label column present")))
    }
}

fn parse_numeric(cell: &str) -> Option<f64> {
    cell.parse::<f64>().ok().filter(|v| v.is_finite())
}

impl DataStream for CsvStream {
    fn schema(&self) -> &StreamSchema {
        &self.schema
    }

    fn next_sample(&mut self) -> Result<Option<Sample>> {
        let more = self.reader.read_record(&mut self.record).map_err(|e| Error::Ingestion {
            path: self.path.clone(),
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        if !more {
            return Ok(None);
        }
        self.parse_record().map(Some)
    }
}

/// Writes `n` samples from `stream` as CSV with header `f0,...,f{d-1},label`.
/// Returns the number of rows written (fewer than `n` if the stream ends).
pub fn write_csv(stream: &mut dyn DataStream, n: u64, path: impl AsRef<Path>) -> Result<u64> {
    let path = path.as_ref();
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    let d = stream.schema().n_features;
    let header: Vec<String> = (0..d).map(|i| format!("f{i}")).chain(["label".into()]).collect();
    writeln!(out, "{}", header.join(",")).map_err(io)?;
    let mut written = 0;
    while written < n {
        let Some(s) = stream.next_sample()? else { break };
        let mut line = String::with_capacity(d * 12);
        for v in &s.features {
            line.push_str(&format!("{v},"));
        }
        line.push_str(&s.label.to_string());
        writeln!(out, "{line}").map_err(io)?;
        written += 1;
    }
    out.flush().map_err(io)?;
    Ok(written)
}
