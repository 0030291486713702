//! The results table: one row per (point, observable, seed), frozen columns.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use clustersim::{EngineKind, GateFamily, ObservableEstimate, ObservableId};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const SCHEMA_VERSION: u32 = 1;

pub const COLUMNS: [&str; 13] = [
    "schema_version",
    "alpha",
    "N",
    "p_s",
    "p_u",
    "engine",
    "gate_family",
    "observable",
    "mean_abs",
    "std_error",
    "n_circuits",
    "n_time_samples",
    "master_seed",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub schema_version: u32,
    pub alpha: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub p_s: f64,
    pub p_u: f64,
    pub engine: EngineKind,
    pub gate_family: GateFamily,
    pub observable: ObservableId,
    pub mean_abs: f64,
    pub std_error: f64,
    pub n_circuits: usize,
    pub n_time_samples: usize,
    pub master_seed: u64,
}

/// Identity of a row for merging and resuming.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RowKey {
    pub alpha: usize,
    pub n: usize,
    pub p_s: f64,
    pub p_u: f64,
    pub engine: EngineKind,
    pub observable: ObservableId,
    pub master_seed: u64,
}

impl RowKey {
    fn cmp_key(&self, other: &Self) -> Ordering {
        (self.alpha, self.n)
            .cmp(&(other.alpha, other.n))
            .then(self.p_u.total_cmp(&other.p_u))
            .then(self.p_s.total_cmp(&other.p_s))
            .then((self.engine, self.observable, self.master_seed).cmp(&(
                other.engine,
                other.observable,
                other.master_seed,
            )))
    }
}

impl Eq for RowKey {}

impl PartialOrd for RowKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for RowKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.cmp_key(other)
    }
}

impl Row {
    pub fn from_estimate(
        spec: &clustersim::CircuitSpec,
        engine: EngineKind,
        est: &ObservableEstimate,
    ) -> Self {
        Row {
            schema_version: SCHEMA_VERSION,
            alpha: spec.alpha,
            n: spec.n,
            p_s: spec.p_s,
            p_u: spec.p_u,
            engine,
            gate_family: spec.gate_family,
            observable: est.observable,
            mean_abs: est.mean_abs,
            std_error: est.std_error,
            n_circuits: est.n_circuits,
            n_time_samples: est.n_time_samples,
            master_seed: spec.master_seed,
        }
    }

    pub fn key(&self) -> RowKey {
        RowKey {
            alpha: self.alpha,
            n: self.n,
            p_s: self.p_s,
            p_u: self.p_u,
            engine: self.engine,
            observable: self.observable,
            master_seed: self.master_seed,
        }
    }
}

/// Rows keyed and kept in canonical order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    rows: BTreeMap<RowKey, Row>,
}

impl Table {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &Row> {
        self.rows.values()
    }

    pub fn contains(&self, key: &RowKey) -> bool {
        self.rows.contains_key(key)
    }

    /// Adds a row. An identical duplicate is ignored, a different row with
    /// the same key is an error.
    pub fn insert(&mut self, row: Row) -> CliResult<()> {
        if row.schema_version != SCHEMA_VERSION {
            return Err(CliError::Config(format!("unsupported schema_version {}", row.schema_version)));
        }
        match self.rows.get(&row.key()) {
            Some(old) if *old == row => Ok(()),
            Some(old) => Err(CliError::Config(format!(
                "conflicting rows for alpha={} N={} p_s={} p_u={} engine={} observable={} seed={}: \
                 mean_abs {} vs {}",
                row.alpha,
                row.n,
                row.p_s,
                row.p_u,
                row.engine.as_str(),
                row.observable,
                row.master_seed,
                old.mean_abs,
                row.mean_abs
            ))),
            None => {
                self.rows.insert(row.key(), row);
                Ok(())
            }
        }
    }

    pub fn merge(&mut self, other: &Table) -> CliResult<()> {
        other.rows().try_for_each(|r| self.insert(r.clone()))
    }

    pub fn from_reader<R: std::io::Read>(reader: R, origin: &str) -> CliResult<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let header = rdr.headers().map_err(|e| CliError::Config(format!("{origin}: {e}")))?.clone();
        if header.iter().ne(COLUMNS.iter().copied()) {
            return Err(CliError::Config(format!(
                "{origin}: header {:?} does not match the expected columns {:?}",
                header.iter().collect::<Vec<_>>(),
                COLUMNS
            )));
        }
        let mut table = Table::new();
        for (i, rec) in rdr.deserialize::<Row>().enumerate() {
            let row = rec.map_err(|e| CliError::Config(format!("{origin}: row {}: {e}", i + 1)))?;
            table.insert(row).map_err(|e| CliError::Config(format!("{origin}: {e}")))?;
        }
        Ok(table)
    }

    pub fn read(path: &Path) -> CliResult<Self> {
        let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
        Self::from_reader(file, &path.display().to_string())
    }

    /// Reads `path` if it exists, otherwise returns an empty table.
    pub fn read_or_empty(path: &Path) -> CliResult<Self> {
        if path.exists() {
            Self::read(path)
        } else {
            Ok(Table::new())
        }
    }

    pub fn to_csv(&self) -> CliResult<String> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
        w.write_record(COLUMNS).map_err(|e| CliError::Io(e.to_string()))?;
        for row in self.rows() {
            w.serialize(row).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
    }

    /// Writes through a temporary file and a rename, so readers never see a
    /// partial table.
    pub fn write(&self, path: &Path) -> CliResult<()> {
        let text = self.to_csv()?;
        write_atomic(path, text.as_bytes())
    }
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| CliError::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
}
