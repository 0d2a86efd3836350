//! Per-point error counts, binomial intervals and CSV persistence.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Column order of the results file.
pub const CSV_HEADER: [&str; 7] = ["variant", "snr_db", "bits", "bit_errors", "frames", "frame_errors", "seconds"];

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BerRecord {
    pub variant: String,
    pub snr_db: f64,
    pub bits: u64,
    pub bit_errors: u64,
    pub frames: u64,
    pub frame_errors: u64,
    /// Detection and decoding time spent on this variant.
    pub seconds: f64,
}

impl BerRecord {
    pub fn new(variant: &str, snr_db: f64) -> Self {
        Self {
            variant: variant.to_string(),
            snr_db,
            bits: 0,
            bit_errors: 0,
            frames: 0,
            frame_errors: 0,
            seconds: 0.0,
        }
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.bits as f64
        }
    }

    pub fn fer(&self) -> f64 {
        if self.frames == 0 {
            0.0
        } else {
            self.frame_errors as f64 / self.frames as f64
        }
    }

    /// 95% Wilson score interval of the BER.
    pub fn ci95(&self) -> (f64, f64) {
        wilson_interval(self.bit_errors, self.bits, Z95)
    }

    /// True when the 95% intervals of the two records intersect.
    pub fn overlaps(&self, other: &BerRecord) -> bool {
        let (a0, a1) = self.ci95();
        let (b0, b1) = other.ci95();
        a0 <= b1 && b0 <= a1
    }

    fn check(&self) -> Result<()> {
        if self.bit_errors > self.bits || self.frame_errors > self.frames {
            return Err(Error::Schema(format!("record {} has more errors than trials", self.variant)));
        }
        Ok(())
    }
}

/// Wilson score interval for `k` successes in `n` Bernoulli trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

pub fn write_csv<W: Write>(records: &[BerRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r).map_err(|e| Error::Config(format!("csv: {e}")))?;
    }
    w.flush().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BerRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let header = rd.headers().map_err(|e| Error::Schema(format!("csv: {e}")))?;
    if header.iter().ne(CSV_HEADER) {
        return Err(Error::Schema(format!("unexpected csv header {header:?}")));
    }
    let records = rd
        .deserialize()
        .collect::<std::result::Result<Vec<BerRecord>, _>>()
        .map_err(|e| Error::Schema(format!("csv: {e}")))?;
    records.iter().try_for_each(BerRecord::check)?;
    Ok(records)
}
