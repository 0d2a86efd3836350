//! Paired Monte Carlo BER sweeps.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::config::{Detector, ExperimentConfig};
use super::record::BerRecord;
use crate::channel::{to_real, transmit, SnrSpec};
use crate::epdetect::{epnet_detect, jdd_receive, ml_detect, DampingSchedule, JddReceiver};
use crate::error::{Error, Result};
use crate::metaopt::coded_frame;
use crate::modem::{hard_bits, map_bits, uniform_prior};

/// Random stream of one frame at one SNR point. Every variant sees the same
/// stream, so their error counts are paired.
pub fn frame_rng(master: u64, point: usize, frame: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&master.to_le_bytes());
    key[8..16].copy_from_slice(&(point as u64).to_le_bytes());
    key[16..24].copy_from_slice(&frame.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

/// Receiver of one variant at one SNR point.
enum Receiver {
    Ml,
    Ep(DampingSchedule),
    Jdd(Box<JddReceiver>),
}

struct Point {
    index: usize,
    snr: SnrSpec,
    receivers: Vec<Receiver>,
}

/// Bits and bit errors per output stage, plus detector time.
struct Outcome {
    stages: Vec<(u64, u64)>,
    seconds: f64,
}

fn count_errors(a: &[u8], b: &[u8]) -> u64 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u64
}

fn build_point(cfg: &ExperimentConfig, index: usize) -> Result<Point> {
    let snr = cfg.snr(cfg.snr_db[index]);
    let c = cfg.constellation();
    let receivers = cfg
        .variants
        .iter()
        .map(|v| {
            if v.detector == Detector::Ml {
                return Ok(Receiver::Ml);
            }
            let mut schedules = cfg.schedules(v, &snr)?;
            match cfg.codec() {
                None => Ok(Receiver::Ep(schedules.swap_remove(0))),
                Some(codec) => Ok(Receiver::Jdd(Box::new(JddReceiver {
                    codec,
                    constellation: c.clone(),
                    schedules,
                    ep: cfg.ep,
                    decoder_iters: cfg.system.decoder_iters,
                    decoder_weights: cfg.decoder_weights(),
                }))),
            }
        })
        .collect::<Result<_>>()?;
    Ok(Point { index, snr, receivers })
}

fn simulate_frame(cfg: &ExperimentConfig, point: &Point, frame: u64, active: &[bool]) -> Result<Vec<Option<Outcome>>> {
    let mut rng = frame_rng(cfg.seed, point.index, frame);
    let (nt, nr) = (cfg.system.nt, cfg.system.nr);
    let c = cfg.constellation();
    let mut out = Vec::with_capacity(point.receivers.len());
    if let Some(Receiver::Jdd(rx)) = point.receivers.first() {
        let f = coded_frame(rx, nt, nr, cfg.channel, &point.snr, &mut rng)?;
        for (rx, &on) in point.receivers.iter().zip(active) {
            let Receiver::Jdd(rx) = rx else { unreachable!("coded systems use JDD receivers") };
            if !on {
                out.push(None);
                continue;
            }
            let t = Instant::now();
            let stages = jdd_receive(&f.models, rx, rx.schedules.len())?;
            out.push(Some(Outcome {
                stages: stages
                    .iter()
                    .map(|s| (f.message.len() as u64, count_errors(&s.decoder.bits, &f.message)))
                    .collect(),
                seconds: t.elapsed().as_secs_f64(),
            }));
        }
        return Ok(out);
    }
    let bits: Vec<u8> = (0..nt * c.bits_per_symbol()).map(|_| rng.random_range(0..2)).collect();
    let x = map_bits(&bits, &c)?;
    let ch = cfg.channel.sample(nt, nr, &mut rng)?;
    let y = transmit(&x, &ch, &point.snr, &mut rng)?;
    let model = to_real(&ch.effective(&point.snr), &y);
    let prior = uniform_prior(&c, 2 * nt);
    for (rx, &on) in point.receivers.iter().zip(active) {
        if !on {
            out.push(None);
            continue;
        }
        let t = Instant::now();
        let hard = match rx {
            Receiver::Ml => ml_detect(&model, &c)?,
            Receiver::Ep(s) => epnet_detect(&model, &prior, s, &cfg.ep)?.hard,
            Receiver::Jdd(_) => unreachable!("uncoded systems have no decoder"),
        };
        let errors = count_errors(&hard_bits(&hard, &c), &bits);
        out.push(Some(Outcome {
            stages: vec![(bits.len() as u64, errors)],
            seconds: t.elapsed().as_secs_f64(),
        }));
    }
    Ok(out)
}

/// Record label of a variant output: the variant label, suffixed with
/// `@stage` for coded systems.
pub fn record_label(cfg: &ExperimentConfig, variant: usize, stage: usize) -> String {
    let base = cfg.variants[variant].label();
    if cfg.system.k.is_some() {
        format!("{base}@{}", stage + 1)
    } else {
        base
    }
}

/// Runs every variant over the SNR grid.
///
/// Frames are drawn in batches of `cfg.batch` and evaluated on `workers`
/// threads; results are folded in frame order, so the table depends on the
/// seed and batch size only. A record stops accumulating once it reaches
/// the error target or the bit budget. Records are ordered by variant
/// (and stage), then SNR.
pub fn run_sweep(cfg: &ExperimentConfig, workers: usize) -> Result<Vec<BerRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let n_variants = cfg.variants.len();
    let stages = cfg.system.stages;
    let mut table: Vec<Vec<BerRecord>> = vec![Vec::with_capacity(cfg.snr_db.len()); n_variants * stages];
    for index in 0..cfg.snr_db.len() {
        let point = build_point(cfg, index)?;
        let snr_db = cfg.snr_db[index];
        let mut records: Vec<BerRecord> = (0..n_variants * stages)
            .map(|slot| BerRecord::new(&record_label(cfg, slot / stages, slot % stages), snr_db))
            .collect();
        let mut done = vec![false; records.len()];
        let mut next = 0u64;
        loop {
            let active: Vec<bool> = (0..n_variants)
                .map(|v| done[v * stages..(v + 1) * stages].iter().any(|d| !d))
                .collect();
            if !active.iter().any(|&a| a) {
                break;
            }
            let frames: Vec<u64> = (next..next + cfg.batch as u64).collect();
            next += cfg.batch as u64;
            let results: Vec<Result<Vec<Option<Outcome>>>> = pool.install(|| {
                frames
                    .par_iter()
                    .map(|&f| simulate_frame(cfg, &point, f, &active))
                    .collect()
            });
            for result in results {
                for (v, outcome) in result?.into_iter().enumerate() {
                    let Some(o) = outcome else { continue };
                    for (s, &(bits, errors)) in o.stages.iter().enumerate() {
                        let slot = v * stages + s;
                        if done[slot] {
                            continue;
                        }
                        let r = &mut records[slot];
                        r.bits += bits;
                        r.bit_errors += errors;
                        r.frames += 1;
                        r.frame_errors += u64::from(errors > 0);
                        r.seconds += o.seconds;
                        done[slot] = r.bit_errors >= cfg.stopping.min_errors || r.bits >= cfg.stopping.max_bits;
                    }
                }
            }
        }
        for (slot, r) in records.into_iter().enumerate() {
            table[slot].push(r);
        }
    }
    Ok(table.into_iter().flatten().collect())
}
