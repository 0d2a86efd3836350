use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::codec::{DecoderKind, TurboCodec};
use crate::error::{Error, Result};

/// Initial value of every extrinsic weight.
pub const INITIAL_WEIGHT: f64 = 0.7;

/// Extrinsic scaling factors, two per turbo iteration (one per constituent
/// decoder).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaledDecoderWeights {
    pub weights: Vec<f64>,
}

impl ScaledDecoderWeights {
    pub fn new(n_iter: usize) -> Self {
        Self::uniform(n_iter, INITIAL_WEIGHT)
    }

    pub fn uniform(n_iter: usize, w: f64) -> Self {
        Self {
            weights: vec![w; 2 * n_iter],
        }
    }

    pub fn n_iter(&self) -> usize {
        self.weights.len() / 2
    }
}

/// One training pair: channel LLRs of a codeword and the reference
/// (log-MAP) posterior LLRs of its message bits.
#[derive(Debug, Clone, PartialEq)]
pub struct FitSample {
    pub channel_llrs: Vec<f64>,
    pub target_posterior: Vec<f64>,
}

/// BPSK over AWGN at the given E_b/N0 (information bit referenced), with the
/// log-MAP posterior after `n_iter` iterations as the target.
pub fn log_map_dataset<R: Rng + ?Sized>(
    codec: &TurboCodec,
    n_frames: usize,
    eb_n0_db: f64,
    n_iter: usize,
    rng: &mut R,
) -> Result<Vec<FitSample>> {
    let reference = codec.with_kind(DecoderKind::LogMap);
    (0..n_frames)
        .map(|_| {
            let channel_llrs = awgn_bpsk_llrs(codec, eb_n0_db, rng)?.1;
            let target_posterior = reference.decode(&channel_llrs, n_iter, None)?.posterior;
            Ok(FitSample {
                channel_llrs,
                target_posterior,
            })
        })
        .collect()
}

/// Random message, its codeword and the BPSK/AWGN channel LLRs.
pub fn awgn_bpsk_llrs<R: Rng + ?Sized>(
    codec: &TurboCodec,
    eb_n0_db: f64,
    rng: &mut R,
) -> Result<(Vec<u8>, Vec<f64>)> {
    let msg: Vec<u8> = (0..codec.k()).map(|_| rng.random_range(0..2u8)).collect();
    let cw = codec.encode(&msg)?;
    let sigma2 = 1.0 / (2.0 * codec.rate() * 10f64.powf(eb_n0_db / 10.0));
    let llrs = cw
        .iter()
        .map(|&b| {
            let s = if b == 0 { 1.0 } else { -1.0 };
            let n: f64 = rng.sample(StandardNormal);
            2.0 * (s + sigma2.sqrt() * n) / sigma2
        })
        .collect();
    Ok((msg, llrs))
}

fn mse(dataset: &[FitSample], codec: &TurboCodec, w: &ScaledDecoderWeights) -> Result<f64> {
    let mut acc = 0.0;
    let mut count = 0usize;
    for s in dataset {
        let out = codec.decode(&s.channel_llrs, w.n_iter(), Some(w))?;
        acc += out
            .posterior
            .iter()
            .zip(&s.target_posterior)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>();
        count += out.posterior.len();
    }
    Ok(acc / count as f64)
}

const GRID: (f64, f64, usize) = (0.0, 1.5, 16);
const GOLDEN_ITERS: usize = 16;
const MAX_SWEEPS: usize = 8;

/// Grid search over `[GRID.0, GRID.1]` followed by golden-section refinement
/// around the best grid point.
fn line_search(mut eval: impl FnMut(f64) -> Result<f64>, start: f64) -> Result<f64> {
    let step = (GRID.1 - GRID.0) / (GRID.2 - 1) as f64;
    let mut best = (start, eval(start)?);
    for i in 0..GRID.2 {
        let v = GRID.0 + step * i as f64;
        let f = eval(v)?;
        if f < best.1 {
            best = (v, f);
        }
    }
    let (mut a, mut b) = ((best.0 - step).max(GRID.0), (best.0 + step).min(GRID.1));
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let (mut fc, mut fd) = (eval(c)?, eval(d)?);
    for _ in 0..GOLDEN_ITERS {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = eval(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = eval(d)?;
        }
    }
    let mid = 0.5 * (a + b);
    Ok(if eval(mid)? < best.1 { mid } else { best.0 })
}

/// Fits the extrinsic weights of a scaled max-log-MAP decoder so that its
/// posteriors approach the dataset targets in mean squared error.
///
/// A shared weight is fitted first; per-weight coordinate sweeps then refine
/// from there until no weight moves by more than 1e-3.
pub fn fit_scaled_weights(
    dataset: &[FitSample],
    codec: &TurboCodec,
    n_iter: usize,
) -> Result<ScaledDecoderWeights> {
    if dataset.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let codec = codec.with_kind(DecoderKind::ScaledMaxLog);
    let shared = line_search(
        |v| mse(dataset, &codec, &ScaledDecoderWeights::uniform(n_iter, v)),
        INITIAL_WEIGHT,
    )?;
    let mut w = ScaledDecoderWeights::uniform(n_iter, shared);
    for _ in 0..MAX_SWEEPS {
        let before = w.clone();
        for h in 0..w.weights.len() {
            let base = w.clone();
            w.weights[h] = line_search(
                |v| {
                    let mut trial = base.clone();
                    trial.weights[h] = v;
                    mse(dataset, &codec, &trial)
                },
                base.weights[h],
            )?;
        }
        let moved = w
            .weights
            .iter()
            .zip(&before.weights)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if moved < 1e-3 {
            break;
        }
    }
    Ok(w)
}
