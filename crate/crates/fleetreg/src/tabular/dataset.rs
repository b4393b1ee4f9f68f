use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// A numeric table: N rows of K features, one target per row, and optionally
/// a generating-cluster label per row. All values are finite; feature names
/// are unique. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub features: Vec<Vec<f64>>,
    pub target: Vec<f64>,
    pub feature_names: Vec<String>,
    pub cluster_labels: Option<Vec<usize>>,
}

impl Dataset {
    pub fn new(
        features: Vec<Vec<f64>>,
        target: Vec<f64>,
        feature_names: Vec<String>,
        cluster_labels: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = features.len();
        if n == 0 {
            return Err(Error::InvalidData("dataset has no rows".into()));
        }
        let k = features[0].len();
        if k == 0 {
            return Err(Error::InvalidData("dataset has no features".into()));
        }
        if target.len() != n {
            return Err(Error::InvalidData(format!(
                "target length {} != row count {n}",
                target.len()
            )));
        }
        if feature_names.len() != k {
            return Err(Error::InvalidData(format!(
                "{} feature names for {k} columns",
                feature_names.len()
            )));
        }
        for (i, name) in feature_names.iter().enumerate() {
            if feature_names[..i].contains(name) {
                return Err(Error::InvalidData(format!("duplicate feature name {name:?}")));
            }
        }
        if let Some(labels) = &cluster_labels {
            if labels.len() != n {
                return Err(Error::InvalidData(format!(
                    "cluster label length {} != row count {n}",
                    labels.len()
                )));
            }
        }
        for (i, row) in features.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidData(format!(
                    "row {i} has {} values, expected {k}",
                    row.len()
                )));
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidData(format!("non-finite feature in row {i}")));
            }
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite target value".into()));
        }
        Ok(Dataset { features, target, feature_names, cluster_labels })
    }

    pub fn n(&self) -> usize {
        self.features.len()
    }

    pub fn k(&self) -> usize {
        self.feature_names.len()
    }

    /// Rows at the given indices, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            features: indices.iter().map(|&i| self.features[i].clone()).collect(),
            target: indices.iter().map(|&i| self.target[i]).collect(),
            feature_names: self.feature_names.clone(),
            cluster_labels: self
                .cluster_labels
                .as_ref()
                .map(|l| indices.iter().map(|&i| l[i]).collect()),
        }
    }

    /// Parse a CSV file. Every column except the target and the optional
    /// label column becomes a feature, in header order. Any non-numeric or
    /// missing cell aborts the load with the offending row and column.
    pub fn load_csv(path: &Path, target_column: &str, label_column: Option<&str>) -> Result<Dataset> {
        let io_err = |source| Error::Io { path: path.to_path_buf(), source };
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(false)
            .from_path(path)
            .map_err(|e| Error::CsvFormat { path: path.to_path_buf(), message: e.to_string() })?;
        let headers: Vec<String> = reader
            .headers()
            .map_err(|e| Error::CsvFormat { path: path.to_path_buf(), message: e.to_string() })?
            .iter()
            .map(str::to_owned)
            .collect();
        for (i, h) in headers.iter().enumerate() {
            if headers[..i].contains(h) {
                return Err(Error::CsvFormat {
                    path: path.to_path_buf(),
                    message: format!("duplicate header {h:?}"),
                });
            }
        }
        let target_idx = headers
            .iter()
            .position(|h| h == target_column)
            .ok_or_else(|| Error::CsvFormat {
                path: path.to_path_buf(),
                message: format!("target column {target_column:?} not in header"),
            })?;
        let label_idx = match label_column {
            Some(name) => Some(headers.iter().position(|h| h == name).ok_or_else(|| {
                Error::CsvFormat {
                    path: path.to_path_buf(),
                    message: format!("label column {name:?} not in header"),
                }
            })?),
            None => None,
        };
        let feature_cols: Vec<usize> = (0..headers.len())
            .filter(|&i| i != target_idx && Some(i) != label_idx)
            .collect();
        if feature_cols.is_empty() {
            return Err(Error::CsvFormat {
                path: path.to_path_buf(),
                message: "no feature columns left after target/label".into(),
            });
        }

        let mut features = Vec::new();
        let mut target = Vec::new();
        let mut labels = Vec::new();
        for (rec_no, record) in reader.records().enumerate() {
            let line = rec_no + 2; // header is line 1
            let record = record.map_err(|e| Error::CsvFormat {
                path: path.to_path_buf(),
                message: format!("line {line}: {e}"),
            })?;
            let cell = |idx: usize| -> Result<f64> {
                let raw = record.get(idx).ok_or_else(|| Error::CsvCell {
                    path: path.to_path_buf(),
                    row: line,
                    column: headers[idx].clone(),
                    message: "missing cell".into(),
                })?;
                let v: f64 = raw.trim().parse().map_err(|_| Error::CsvCell {
                    path: path.to_path_buf(),
                    row: line,
                    column: headers[idx].clone(),
                    message: format!("not a number: {raw:?}"),
                })?;
                if !v.is_finite() {
                    return Err(Error::CsvCell {
                        path: path.to_path_buf(),
                        row: line,
                        column: headers[idx].clone(),
                        message: format!("non-finite value: {raw:?}"),
                    });
                }
                Ok(v)
            };
            features.push(feature_cols.iter().map(|&i| cell(i)).collect::<Result<Vec<_>>>()?);
            target.push(cell(target_idx)?);
            if let Some(li) = label_idx {
                let raw = record.get(li).unwrap_or("");
                let v: usize = raw.trim().parse().map_err(|_| Error::CsvCell {
                    path: path.to_path_buf(),
                    row: line,
                    column: headers[li].clone(),
                    message: format!("not a cluster id: {raw:?}"),
                })?;
                labels.push(v);
            }
        }
        if features.is_empty() {
            return Err(Error::CsvFormat {
                path: path.to_path_buf(),
                message: "no data rows".into(),
            });
        }
        let _ = io_err; // reserved for read paths that surface io::Error directly
        Dataset::new(
            features,
            target,
            feature_cols.iter().map(|&i| headers[i].clone()).collect(),
            label_idx.map(|_| labels),
        )
    }

    /// Render as CSV: feature columns, then "target", then "cluster" when
    /// labels are present. Floats use the shortest representation that parses
    /// back to the identical value, so save/load round-trips exactly.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        for name in &self.feature_names {
            out.push_str(name);
            out.push(',');
        }
        out.push_str("target");
        if self.cluster_labels.is_some() {
            out.push_str(",cluster");
        }
        out.push('\n');
        for i in 0..self.n() {
            for v in &self.features[i] {
                let _ = write!(out, "{v},");
            }
            let _ = write!(out, "{}", self.target[i]);
            if let Some(labels) = &self.cluster_labels {
                let _ = write!(out, ",{}", labels[i]);
            }
            out.push('\n');
        }
        out
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        crate::experiment::write_atomic(path, self.to_csv_string().as_bytes())
    }
}
