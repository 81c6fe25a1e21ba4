//! Run records (JSON) and dense series (CSV), written atomically.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use quasiflow_core::flow::SeriesPoint;
use quasiflow_core::Params;
use serde::{Deserialize, Serialize};

use crate::error::CliError;

pub const SCHEMA_VERSION: u32 = 1;

/// Header of every series file.
pub const SERIES_HEADER: [&str; 4] = ["t", "sup_norm", "I", "dt"];

pub const DETERMINISM_NOTE: &str =
    "no randomness: identical arguments and binary give identical records apart from wall_time";

#[derive(Debug, thiserror::Error)]
pub enum RecordError {
    #[error("malformed run record: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("run record has no schema_version")]
    MissingVersion,
    #[error("run record schema_version {found} is not the supported version {expected}")]
    SchemaMismatch { found: u64, expected: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub dim: usize,
    pub p: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub strict: bool,
}

impl From<&Params> for ParamsRecord {
    fn from(p: &Params) -> Self {
        ParamsRecord {
            dim: p.dim,
            p: p.p,
            kappa: p.kappa,
            lambda: p.lambda,
            strict: p.strict,
        }
    }
}

impl ParamsRecord {
    pub fn to_params(&self) -> Result<Params, CliError> {
        let params = if self.strict {
            Params::new(self.dim, self.p, self.kappa, self.lambda)?
        } else {
            Params::exploratory(self.dim, self.p, self.kappa, self.lambda)?
        };
        Ok(params)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub rmax: f64,
    pub nr: usize,
}

/// One evolution inside a bisection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub lambda: f64,
    pub classification: String,
    pub tmax: f64,
    pub t_end: f64,
    pub max_sup_norm: f64,
    pub certificate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub kappa: f64,
    pub lambda_lo: Option<f64>,
    pub lambda_hi: Option<f64>,
    pub error: Option<String>,
}

/// A named pass/fail check with its measured value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRow {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub schema_version: u32,
    pub command: String,
    pub params: ParamsRecord,
    pub grid: GridSpec,
    pub profile: Option<String>,
    pub classification: Option<String>,
    pub scalars: BTreeMap<String, f64>,
    pub runs: Vec<RunRow>,
    pub sweep: Vec<SweepRow>,
    pub checks: Vec<CheckRow>,
    /// Series and profile files, relative to the record's directory.
    pub series_files: Vec<String>,
    pub wall_time: f64,
    pub determinism: String,
}

impl RunRecord {
    pub fn new(command: &str, params: &Params, grid: GridSpec) -> Self {
        RunRecord {
            schema_version: SCHEMA_VERSION,
            command: command.to_owned(),
            params: params.into(),
            grid,
            profile: None,
            classification: None,
            scalars: BTreeMap::new(),
            runs: Vec::new(),
            sweep: Vec::new(),
            checks: Vec::new(),
            series_files: Vec::new(),
            wall_time: 0.0,
            determinism: DETERMINISM_NOTE.to_owned(),
        }
    }

    /// Records a scalar; non-finite values are left out since JSON cannot
    /// carry them.
    pub fn scalar(&mut self, key: &str, value: f64) {
        if value.is_finite() {
            self.scalars.insert(key.to_owned(), value);
        }
    }
}

pub fn serialize_run(record: &RunRecord) -> Result<Vec<u8>, RecordError> {
    let mut bytes = serde_json::to_vec_pretty(record)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn load_run(bytes: &[u8]) -> Result<RunRecord, RecordError> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or(RecordError::MissingVersion)?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(RecordError::SchemaMismatch {
            found,
            expected: SCHEMA_VERSION,
        });
    }
    Ok(serde_json::from_value(value)?)
}

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let wrap = |source: std::io::Error| CliError::Write {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir).map_err(wrap)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(wrap)?;
    tmp.write_all(bytes).map_err(wrap)?;
    tmp.as_file().sync_all().map_err(wrap)?;
    tmp.persist(path).map_err(|e| wrap(e.error))?;
    Ok(())
}

/// CSV text with a header row and one row per entry.
pub fn csv_bytes<const K: usize>(header: [&str; K], rows: impl Iterator<Item = [f64; K]>) -> Vec<u8> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header).expect("writing to memory");
    for row in rows {
        writer
            .write_record(row.iter().map(|v| v.to_string()))
            .expect("writing to memory");
    }
    writer.into_inner().expect("writing to memory")
}

pub fn series_csv(series: &[SeriesPoint]) -> Vec<u8> {
    csv_bytes(
        SERIES_HEADER,
        series.iter().map(|s| [s.t, s.sup_norm, s.energy, s.dt]),
    )
}

/// Reads a numeric CSV with an optional header row into columns.
pub fn read_columns(bytes: &[u8], columns: usize) -> Result<Vec<Vec<f64>>, String> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(bytes);
    let mut out = vec![Vec::new(); columns];
    for (line, row) in reader.records().enumerate() {
        let row = row.map_err(|e| e.to_string())?;
        let parsed: Result<Vec<f64>, _> = row.iter().map(str::parse::<f64>).collect();
        match parsed {
            Ok(values) if values.len() >= columns => {
                for (col, v) in out.iter_mut().zip(values) {
                    col.push(v);
                }
            }
            Ok(values) => {
                return Err(format!(
                    "line {}: expected {columns} columns, found {}",
                    line + 1,
                    values.len()
                ))
            }
            // a non-numeric first row is a header
            Err(_) if line == 0 => {}
            Err(e) => return Err(format!("line {}: {e}", line + 1)),
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> RunRecord {
        let params = Params::new(2, 3.0, 1.0, 0.1).unwrap();
        let mut r = RunRecord::new("shoot", &params, GridSpec { rmax: 15.0, nr: 1500 });
        r.scalar("w0", 1.932558776985123);
        r.scalar("tiny", 1e-300);
        r.scalar("nan", f64::NAN);
        r.runs.push(RunRow {
            lambda: 0.1 + 0.2,
            classification: "Vanish".into(),
            tmax: 200.0,
            t_end: 13.91,
            max_sup_norm: 0.05,
            certificate: None,
        });
        r
    }

    #[test]
    fn round_trip_is_lossless() {
        let r = sample();
        assert!(!r.scalars.contains_key("nan"));
        let back = load_run(&serialize_run(&r).unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(serialize_run(&back).unwrap(), serialize_run(&r).unwrap());
    }

    #[test]
    fn keys_come_in_declaration_order() {
        let text = String::from_utf8(serialize_run(&sample()).unwrap()).unwrap();
        let order = ["schema_version", "command", "params", "grid", "scalars", "wall_time"];
        let pos: Vec<usize> = order.iter().map(|k| text.find(&format!("\"{k}\"")).unwrap()).collect();
        assert!(pos.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn truncated_and_foreign_records_are_rejected() {
        let bytes = serialize_run(&sample()).unwrap();
        assert!(matches!(
            load_run(&bytes[..bytes.len() / 2]),
            Err(RecordError::Parse(_))
        ));
        let mut value: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        value["schema_version"] = 7.into();
        assert!(matches!(
            load_run(&serde_json::to_vec(&value).unwrap()),
            Err(RecordError::SchemaMismatch { found: 7, .. })
        ));
        assert!(matches!(load_run(b"{}"), Err(RecordError::MissingVersion)));
    }

    #[test]
    fn series_header_is_exact() {
        let bytes = series_csv(&[SeriesPoint {
            t: 0.0,
            sup_norm: 1.5,
            energy: -0.25,
            dt: 1e-3,
        }]);
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.starts_with("t,sup_norm,I,dt\n"));
        let cols = read_columns(text.as_bytes(), 4).unwrap();
        assert_eq!(cols[2], vec![-0.25]);
        assert_eq!(cols[3], vec![1e-3]);
    }

    #[test]
    fn atomic_write_replaces_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested").join("a.json");
        write_atomic(&path, b"one").unwrap();
        write_atomic(&path, b"two").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"two");
        assert_eq!(std::fs::read_dir(path.parent().unwrap()).unwrap().count(), 1);
    }

    proptest::proptest! {
        #[test]
        fn finite_scalars_survive_the_round_trip(
            values in proptest::collection::vec(-1e300..1e300f64, 0..20),
            lambda in 0.0..100.0f64,
        ) {
            let params = Params::new(3, 3.0, 0.5, lambda).unwrap();
            let mut r = RunRecord::new("evolve", &params, GridSpec { rmax: 15.0, nr: 100 });
            for (i, v) in values.iter().enumerate() {
                r.scalar(&format!("s{i:02}"), *v);
            }
            let back = load_run(&serialize_run(&r).unwrap()).unwrap();
            proptest::prop_assert_eq!(back, r);
        }
    }
}
