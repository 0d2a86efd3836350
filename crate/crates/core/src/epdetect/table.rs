//! Damping tables: effective damping per (stage, layer), serialised as JSON.

use serde::{Deserialize, Serialize};

use super::ep::DampingSchedule;
use crate::error::{Error, Result};

pub const TABLE_SCHEMA: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableEntry {
    /// 1-based detection stage.
    pub stage: usize,
    /// 1-based layer within the stage.
    pub layer: usize,
    /// Effective (post-sigmoid) damping.
    pub damping: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingTable {
    pub schema: u32,
    pub entries: Vec<TableEntry>,
}

impl DampingTable {
    pub fn from_schedules(schedules: &[DampingSchedule]) -> Self {
        let entries = schedules
            .iter()
            .enumerate()
            .flat_map(|(i, s)| {
                s.effective()
                    .into_iter()
                    .enumerate()
                    .map(move |(l, damping)| TableEntry {
                        stage: i + 1,
                        layer: l + 1,
                        damping,
                    })
            })
            .collect();
        Self {
            schema: TABLE_SCHEMA,
            entries,
        }
    }

    /// Per-stage schedules. Every stage must list layers `1..=L` for one
    /// common `L`, and stages must run `1..=I` without gaps.
    pub fn to_schedules(&self) -> Result<Vec<DampingSchedule>> {
        if self.schema != TABLE_SCHEMA {
            return Err(Error::Schema(format!(
                "damping table schema {} (expected {TABLE_SCHEMA})",
                self.schema
            )));
        }
        let stages = self.entries.iter().map(|e| e.stage).max().unwrap_or(0);
        let layers = self.entries.iter().map(|e| e.layer).max().unwrap_or(0);
        if stages == 0 || layers == 0 || self.entries.iter().any(|e| e.stage == 0 || e.layer == 0) {
            return Err(Error::Schema("stages and layers are 1-based and non-empty".into()));
        }
        let mut grid = vec![vec![None; layers]; stages];
        for e in &self.entries {
            let cell = &mut grid[e.stage - 1][e.layer - 1];
            if cell.is_some() {
                return Err(Error::Schema(format!(
                    "duplicate entry for stage {} layer {}",
                    e.stage, e.layer
                )));
            }
            *cell = Some(e.damping);
        }
        grid.into_iter()
            .enumerate()
            .map(|(i, row)| {
                let eff: Option<Vec<f64>> = row.into_iter().collect();
                let eff = eff.ok_or_else(|| Error::Schema(format!("stage {} is missing layers", i + 1)))?;
                DampingSchedule::from_effective(&eff).map_err(|e| Error::Schema(e.to_string()))
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("table serialises")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// Published five-layer schedules for uncoded 8×8 16-QAM in Rayleigh fading,
/// keyed by uncoded Eb/N0 in dB.
pub const REFERENCE_8X8_16QAM: [(f64, [f64; 5]); 5] = [
    (-1.0, [9.4710e-1, 8.8261e-1, 1.4997e-4, 1.2112e-4, 7.1442e-7]),
    (4.0, [9.3378e-1, 9.3475e-1, 5.2261e-3, 1.2744e-5, 6.4718e-7]),
    (9.0, [9.6667e-1, 9.1169e-1, 6.9141e-1, 1.3030e-1, 5.5887e-5]),
    (14.0, [7.1631e-1, 4.8111e-1, 4.2961e-1, 3.4602e-1, 6.1929e-3]),
    (19.0, [3.7582e-1, 2.5697e-1, 2.8293e-1, 1.3048e-1, 8.7179e-2]),
];

/// Reference schedule at the tabulated SNR closest to `eb_n0_db`.
pub fn reference_schedule(eb_n0_db: f64) -> DampingSchedule {
    let (_, eff) = REFERENCE_8X8_16QAM
        .iter()
        .min_by(|a, b| (a.0 - eb_n0_db).abs().total_cmp(&(b.0 - eb_n0_db).abs()))
        .expect("table is non-empty");
    DampingSchedule::from_effective(eff).expect("tabulated values lie in (0, 1)")
}
