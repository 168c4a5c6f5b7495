use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::details::Details;
use crate::dimension::QOrder;
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// A hypothesis of the experiment fails. Whatever could be computed is still
    /// reported, but no improvement is claimed.
    PreconditionUnmet,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Precondition {
    pub name: String,
    pub met: bool,
    pub detail: String,
}

impl Precondition {
    pub fn new(name: &str, met: bool, detail: impl Into<String>) -> Self {
        Precondition {
            name: name.into(),
            met,
            detail: detail.into(),
        }
    }
}

/// One line of table.csv.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub experiment: ExperimentKind,
    /// Number of factors (convolution) or summands (sumset).
    pub n: usize,
    pub m: u32,
    /// Empty for box-counting rows.
    pub q: Option<QOrder>,
    pub exponent: f64,
    /// Exponent gain over the row's baseline at the same m and q.
    pub improvement: Option<f64>,
}

/// One line of sumset.csv.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SumsetCsvRow {
    pub n: usize,
    pub level: u32,
    #[serde(rename = "N_m")]
    pub count: usize,
    pub box_estimate: f64,
    pub is_interval: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub experiment: ExperimentKind,
    pub status: Status,
    pub preconditions: Vec<Precondition>,
    /// The config with defaults and command-line overrides applied.
    pub config: ExperimentConfig,
    pub levels: Vec<u32>,
    pub rows: Vec<TableRow>,
    pub details: Option<Details>,
}

impl Report {
    pub fn new(kind: ExperimentKind, config: &ExperimentConfig) -> Self {
        Report {
            experiment: kind,
            status: Status::Ok,
            preconditions: Vec::new(),
            config: config.clone(),
            levels: config.resolved_levels(kind),
            rows: Vec::new(),
            details: None,
        }
    }

    pub fn require(&mut self, p: Precondition) {
        if !p.met {
            self.status = Status::PreconditionUnmet;
        }
        self.preconditions.push(p);
    }

    pub fn is_ok(&self) -> bool {
        self.status == Status::Ok
    }

    pub fn sumset_rows(&self) -> Option<&[SumsetCsvRow]> {
        match &self.details {
            Some(Details::Sumset(s)) => Some(&s.csv_rows),
            _ => None,
        }
    }

    /// Writes report.json, table.csv and, for SUMSET, sumset.csv into `dir`.
    /// Each file goes to a temporary name first and is renamed into place.
    pub fn write_to(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let json = serde_json::to_vec_pretty(self).map_err(std::io::Error::other)?;
        written.push(write_atomic(dir, "report.json", &json)?);
        written.push(write_atomic(dir, "table.csv", &to_csv(&self.rows)?)?);
        if let Some(rows) = self.sumset_rows() {
            written.push(write_atomic(dir, "sumset.csv", &to_csv(rows)?)?);
        }
        Ok(written)
    }
}

fn to_csv<T: Serialize>(rows: &[T]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(std::io::Error::other)?;
    }
    w.into_inner()
        .map_err(|e| std::io::Error::other(e.to_string()).into())
}

/// Header-only CSV when there are no rows.
fn write_atomic(dir: &Path, name: &str, bytes: &[u8]) -> Result<PathBuf> {
    let target = dir.join(name);
    let tmp = dir.join(format!(".{name}.tmp"));
    {
        let mut f = std::fs::File::create(&tmp)?;
        if bytes.is_empty() && name.ends_with(".csv") {
            f.write_all(csv_header(name).as_bytes())?;
        } else {
            f.write_all(bytes)?;
        }
        f.sync_all()?;
    }
    std::fs::rename(&tmp, &target)?;
    Ok(target)
}

fn csv_header(name: &str) -> &'static str {
    if name == "sumset.csv" {
        "n,level,N_m,box_estimate,is_interval\n"
    } else {
        "experiment,n,m,q,exponent,improvement\n"
    }
}
