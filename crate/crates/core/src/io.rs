//! File formats: telemetry CSVs and JSON matrix documents.
//!
//! CSV schemas (headers are mandatory and checked):
//!
//! * usage:  `home_id,timestamp,airtime_pct` — RFC 3339 timestamps with offset
//! * scans:  `scanner_home_id,sensed_mac,snr_db,timestamp`
//! * macmap: `mac,home_id`
//!
//! Matrices and allocations share one JSON envelope:
//! `{"home_ids": [...], "num_channels": k, "matrix": [[...], ...]}` with
//! row-major nested arrays.

use std::fs;
use std::path::Path;

use chrono::{DateTime, FixedOffset};
use ndarray::Array2;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::estimation::{MacMap, ScanObservation, UsageSample};
use crate::pain::{check_unique_homes, AllocationMode, ChannelAllocation, Neighborhood, PainMatrix};
use crate::{Error, Result};

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn parse_err(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        message: message.into(),
    }
}

fn record_line(record: &csv::StringRecord) -> u64 {
    record.position().map(|p| p.line()).unwrap_or(0)
}

fn open_reader(path: &Path, expected_header: &[&str]) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let headers = reader
        .headers()
        .map_err(|e| parse_err(path, 1, e.to_string()))?;
    let got: Vec<&str> = headers.iter().collect();
    if got != expected_header {
        return Err(parse_err(
            path,
            1,
            format!("expected header `{}`, got `{}`", expected_header.join(","), got.join(",")),
        ));
    }
    Ok(reader)
}

fn parse_timestamp(path: &Path, line: u64, raw: &str) -> Result<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(raw)
        .map_err(|e| parse_err(path, line, format!("bad timestamp `{raw}`: {e}")))
}

fn parse_f64(path: &Path, line: u64, field: &str, raw: &str) -> Result<f64> {
    raw.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("bad {field} `{raw}`")))
}

/// Reads a usage CSV (`home_id,timestamp,airtime_pct`).
pub fn read_usage_csv(path: &Path) -> Result<Vec<UsageSample>> {
    let mut reader = open_reader(path, &["home_id", "timestamp", "airtime_pct"])?;
    let mut samples = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record_line(&record);
        if record.len() != 3 {
            return Err(parse_err(path, line, format!("expected 3 fields, got {}", record.len())));
        }
        let timestamp = parse_timestamp(path, line, &record[1])?;
        let airtime = parse_f64(path, line, "airtime_pct", &record[2])?;
        let sample = UsageSample::new(&record[0], timestamp, airtime)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        samples.push(sample);
    }
    Ok(samples)
}

pub fn write_usage_csv(path: &Path, samples: &[UsageSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    w.write_record(["home_id", "timestamp", "airtime_pct"])
        .map_err(|e| csv_write_err(path, e))?;
    for s in samples {
        w.write_record([
            s.home_id.as_str(),
            &s.timestamp.to_rfc3339(),
            &format_float(s.airtime_pct),
        ])
        .map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a scans CSV (`scanner_home_id,sensed_mac,snr_db,timestamp`).
pub fn read_scans_csv(path: &Path) -> Result<Vec<ScanObservation>> {
    let mut reader = open_reader(path, &["scanner_home_id", "sensed_mac", "snr_db", "timestamp"])?;
    let mut scans = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record_line(&record);
        if record.len() != 4 {
            return Err(parse_err(path, line, format!("expected 4 fields, got {}", record.len())));
        }
        let snr = parse_f64(path, line, "snr_db", &record[2])?;
        let timestamp = parse_timestamp(path, line, &record[3])?;
        let obs = ScanObservation::new(&record[0], &record[1], snr, timestamp)
            .map_err(|e| parse_err(path, line, e.to_string()))?;
        scans.push(obs);
    }
    Ok(scans)
}

pub fn write_scans_csv(path: &Path, scans: &[ScanObservation]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    w.write_record(["scanner_home_id", "sensed_mac", "snr_db", "timestamp"])
        .map_err(|e| csv_write_err(path, e))?;
    for s in scans {
        w.write_record([
            s.scanner_home_id.as_str(),
            s.sensed_mac.as_str(),
            &format_float(s.snr_db),
            &s.timestamp.to_rfc3339(),
        ])
        .map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

/// Reads a MAC map CSV (`mac,home_id`).
pub fn read_macmap_csv(path: &Path) -> Result<MacMap> {
    let mut reader = open_reader(path, &["mac", "home_id"])?;
    let mut map = MacMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            parse_err(path, line, e.to_string())
        })?;
        let line = record_line(&record);
        if record.len() != 2 {
            return Err(parse_err(path, line, format!("expected 2 fields, got {}", record.len())));
        }
        map.insert(&record[0], &record[1])
            .map_err(|e| parse_err(path, line, e.to_string()))?;
    }
    Ok(map)
}

pub fn write_macmap_csv(path: &Path, map: &MacMap) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_write_err(path, e))?;
    w.write_record(["mac", "home_id"])
        .map_err(|e| csv_write_err(path, e))?;
    for (mac, home) in map.iter() {
        w.write_record([mac, home])
            .map_err(|e| csv_write_err(path, e))?;
    }
    w.flush().map_err(|e| io_err(path, e))
}

fn csv_write_err(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io_err(path, io),
        other => Error::invalid("csv output", format!("{other:?}")),
    }
}

fn format_float(v: f64) -> String {
    let mut s = serde_json::Number::from_f64(v)
        .map(|n| n.to_string())
        .unwrap_or_else(|| v.to_string());
    if !s.contains('.') && !s.contains('e') && !s.contains('E') {
        s.push_str(".0");
    }
    s
}

/// Shared JSON envelope for pain matrices and channel allocations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixDocument {
    pub home_ids: Vec<String>,
    pub num_channels: usize,
    pub matrix: Vec<Vec<f64>>,
}

impl MatrixDocument {
    pub fn from_pain(neighborhood: &Neighborhood, matrix: &PainMatrix) -> Result<Self> {
        if neighborhood.num_homes() != matrix.num_homes() {
            return Err(Error::DimensionMismatch {
                left: format!("neighborhood has {} homes", neighborhood.num_homes()),
                right: format!("matrix is {0}x{0}", matrix.num_homes()),
            });
        }
        Ok(MatrixDocument {
            home_ids: neighborhood.home_ids().to_vec(),
            num_channels: neighborhood.num_channels(),
            matrix: matrix.to_rows(),
        })
    }

    pub fn from_allocation(
        neighborhood: &Neighborhood,
        allocation: &ChannelAllocation,
    ) -> Result<Self> {
        if neighborhood.num_homes() != allocation.num_homes() {
            return Err(Error::DimensionMismatch {
                left: format!("neighborhood has {} homes", neighborhood.num_homes()),
                right: format!("allocation has {} home rows", allocation.num_homes()),
            });
        }
        Ok(MatrixDocument {
            home_ids: neighborhood.home_ids().to_vec(),
            num_channels: allocation.num_channels(),
            matrix: allocation
                .values()
                .rows()
                .into_iter()
                .map(|r| r.to_vec())
                .collect(),
        })
    }

    fn to_array(&self) -> Result<Array2<f64>> {
        check_unique_homes(&self.home_ids)?;
        let rows = self.matrix.len();
        if rows != self.home_ids.len() {
            return Err(Error::DimensionMismatch {
                left: format!("document lists {} home ids", self.home_ids.len()),
                right: format!("matrix has {rows} rows"),
            });
        }
        let cols = self.matrix.first().map(|r| r.len()).unwrap_or(0);
        let mut flat = Vec::with_capacity(rows * cols);
        for row in &self.matrix {
            if row.len() != cols {
                return Err(Error::invalid("matrix document", "ragged matrix rows"));
            }
            flat.extend_from_slice(row);
        }
        Array2::from_shape_vec((rows, cols), flat)
            .map_err(|e| Error::invalid("matrix document", e.to_string()))
    }

    /// Interprets the document as a square pain matrix.
    pub fn to_pain(&self) -> Result<(Neighborhood, PainMatrix)> {
        let values = self.to_array()?;
        let neighborhood = Neighborhood::new(self.home_ids.clone(), self.num_channels)?;
        Ok((neighborhood, PainMatrix::new(values)?))
    }

    /// Interprets the document as a channel allocation; rows that are all
    /// exactly 0/1 one-hot give a hard allocation, anything else soft.
    pub fn to_allocation(&self) -> Result<(Neighborhood, ChannelAllocation)> {
        let values = self.to_array()?;
        let neighborhood = Neighborhood::new(self.home_ids.clone(), self.num_channels)?;
        if values.ncols() != self.num_channels {
            return Err(Error::DimensionMismatch {
                left: format!("document declares {} channels", self.num_channels),
                right: format!("matrix has {} columns", values.ncols()),
            });
        }
        let is_hard = values
            .rows()
            .into_iter()
            .all(|r| r.iter().all(|&v| v == 0.0 || v == 1.0) && r.iter().sum::<f64>() == 1.0);
        let mode = if is_hard {
            AllocationMode::Hard
        } else {
            AllocationMode::Soft
        };
        Ok((neighborhood, ChannelAllocation::from_matrix(values, mode)?))
    }
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json_bytes<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)
        .map_err(|e| Error::invalid("json output", e.to_string()))?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<Vec<u8>> {
    let bytes = to_json_bytes(value)?;
    fs::write(path, &bytes).map_err(|e| io_err(path, e))?;
    Ok(bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let bytes = fs::read(path).map_err(|e| io_err(path, e))?;
    serde_json::from_slice(&bytes).map_err(|e| Error::Json {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Hex SHA-256 of a byte string; used for matrix and allocation digests.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        out.push_str(&format!("{b:02x}"));
    }
    out
}
