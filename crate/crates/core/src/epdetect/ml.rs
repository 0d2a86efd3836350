//! Exhaustive maximum-likelihood detection.

use crate::channel::RealChannelModel;
use crate::error::{Error, Result};
use crate::modem::Constellation;

/// Largest number of candidate vectors the exhaustive search accepts.
pub const ML_SEARCH_LIMIT: u128 = 1 << 20;

/// Real-domain vector minimising `‖y − Hx‖²` over all symbol vectors.
pub fn ml_detect(model: &RealChannelModel, c: &Constellation) -> Result<Vec<f64>> {
    let n = model.n_dims();
    let amps = c.amplitudes();
    let m = amps.len();
    let count = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > ML_SEARCH_LIMIT {
        return Err(Error::SearchTooLarge(count));
    }
    let rows = model.h.nrows();
    let mut idx = vec![0usize; n];
    // residual r = y − Hx, updated incrementally as single digits change
    let mut r: Vec<f64> = (0..rows)
        .map(|i| model.y[i] - (0..n).map(|j| model.h[(i, j)] * amps[0]).sum::<f64>())
        .collect();
    let mut best = (f64::INFINITY, idx.clone());
    loop {
        let d: f64 = r.iter().map(|v| v * v).sum();
        if d < best.0 {
            best = (d, idx.clone());
        }
        let mut pos = 0;
        loop {
            if pos == n {
                return Ok(best.1.iter().map(|&i| amps[i]).collect());
            }
            let old = amps[idx[pos]];
            idx[pos] = (idx[pos] + 1) % m;
            let delta = amps[idx[pos]] - old;
            for (i, ri) in r.iter_mut().enumerate() {
                *ri -= model.h[(i, pos)] * delta;
            }
            if idx[pos] != 0 {
                break;
            }
            pos += 1;
        }
    }
}
