//! Energy traces and their CSV / JSON export.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dynamics::Mode;
use crate::error::{KnotError, Result};
use crate::format::{fmt_sig, round_sig};

pub const CSV_HEADER: [&str; 6] = ["step", "simon_energy", "spring_energy", "min_clearance", "mode", "total_length"];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub step: u64,
    pub simon_energy: f64,
    pub spring_energy: f64,
    pub min_clearance: f64,
    pub mode: Mode,
    pub total_length: f64,
}

/// Records with strictly increasing step indices.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnergyTrace {
    records: Vec<TraceRecord>,
}

impl EnergyTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a record; records not newer than the last one are dropped.
    pub fn push(&mut self, record: TraceRecord) -> bool {
        if self.records.last().is_some_and(|last| last.step >= record.step) {
            return false;
        }
        self.records.push(record);
        true
    }

    pub fn extend(&mut self, other: &EnergyTrace) {
        for r in &other.records {
            self.push(*r);
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn energies(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.simon_energy)
    }

    /// Largest relative rise between consecutive records.
    pub fn max_relative_rise(&self) -> f64 {
        self.records
            .windows(2)
            .map(|w| (w[1].simon_energy - w[0].simon_energy) / w[0].simon_energy)
            .fold(0.0, f64::max)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER)?;
        for r in &self.records {
            w.write_record([
                r.step.to_string(),
                fmt_sig(r.simon_energy),
                fmt_sig(r.spring_energy),
                fmt_sig(r.min_clearance),
                r.mode.to_string(),
                fmt_sig(r.total_length),
            ])?;
        }
        w.flush().map_err(|e| KnotError::io("<csv>", e))?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| KnotError::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// JSON array of records, numbers rounded to the printed precision.
    pub fn to_json(&self) -> serde_json::Value {
        let rounded: Vec<TraceRecord> = self
            .records
            .iter()
            .map(|r| TraceRecord {
                simon_energy: round_sig(r.simon_energy),
                spring_energy: round_sig(r.spring_energy),
                min_clearance: round_sig(r.min_clearance),
                total_length: round_sig(r.total_length),
                ..*r
            })
            .collect();
        serde_json::to_value(rounded).expect("trace serialization cannot fail")
    }
}
