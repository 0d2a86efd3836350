//! Paired comparison of EPNet hard decisions against exhaustive ML search.

use rand::Rng;
use rayon::prelude::*;

use super::record::BerRecord;
use super::sweep::frame_rng;
use crate::channel::{to_real, transmit, ChannelKind, SnrSpec};
use crate::epdetect::{epnet_detect, ml_detect, DampingSchedule, EpConfig, ML_SEARCH_LIMIT};
use crate::error::{Error, Result};
use crate::modem::{hard_bits, map_bits, uniform_prior, Complex64, Constellation};

#[derive(Debug, Clone)]
pub struct OracleConfig {
    pub nt: usize,
    pub nr: usize,
    pub constellation: Constellation,
    pub channel: ChannelKind,
    pub snr: SnrSpec,
    /// Drop the additive noise (the detectors still assume it).
    pub noiseless: bool,
    pub frames: u64,
    pub seed: u64,
    pub schedule: DampingSchedule,
    pub ep: EpConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub frames: u64,
    /// Fraction of complex symbols on which both detectors agree.
    pub symbol_agreement: f64,
    /// Fraction of frames whose whole symbol vectors agree.
    pub frame_agreement: f64,
    pub epnet: BerRecord,
    pub ml: BerRecord,
}

impl OracleReport {
    /// `epnet.ber() − ml.ber()`.
    pub fn ber_gap(&self) -> f64 {
        self.epnet.ber() - self.ml.ber()
    }
}

struct FrameResult {
    bits: u64,
    ep_errors: u64,
    ml_errors: u64,
    agreeing_symbols: u64,
}

fn run_frame(cfg: &OracleConfig, frame: u64) -> Result<FrameResult> {
    let c = &cfg.constellation;
    let mut rng = frame_rng(cfg.seed, 0, frame);
    let bits: Vec<u8> = (0..cfg.nt * c.bits_per_symbol()).map(|_| rng.random_range(0..2)).collect();
    let x = map_bits(&bits, c)?;
    let ch = cfg.channel.sample(cfg.nt, cfg.nr, &mut rng)?;
    let eff = ch.effective(&cfg.snr);
    let y = if cfg.noiseless {
        eff.matrix() * nalgebra::DVector::<Complex64>::from_vec(x)
    } else {
        transmit(&x, &ch, &cfg.snr, &mut rng)?
    };
    let model = to_real(&eff, &y);
    let ep = epnet_detect(&model, &uniform_prior(c, 2 * cfg.nt), &cfg.schedule, &cfg.ep)?.hard;
    let ml = ml_detect(&model, c)?;
    let agreeing_symbols = (0..cfg.nt)
        .filter(|&i| ep[i] == ml[i] && ep[i + cfg.nt] == ml[i + cfg.nt])
        .count() as u64;
    let count = |hard: &[f64]| {
        hard_bits(hard, c)
            .iter()
            .zip(&bits)
            .filter(|(a, b)| a != b)
            .count() as u64
    };
    Ok(FrameResult {
        bits: bits.len() as u64,
        ep_errors: count(&ep),
        ml_errors: count(&ml),
        agreeing_symbols,
    })
}

/// Runs `frames` paired frames through EPNet and ML detection.
pub fn compare_oracle(cfg: &OracleConfig, workers: usize) -> Result<OracleReport> {
    let candidates = (cfg.constellation.order() as u128).pow(cfg.nt as u32);
    if candidates > ML_SEARCH_LIMIT {
        return Err(Error::SearchTooLarge(candidates));
    }
    if cfg.frames == 0 {
        return Err(Error::Config("oracle comparison needs at least one frame".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let results: Vec<Result<FrameResult>> =
        pool.install(|| (0..cfg.frames).into_par_iter().map(|f| run_frame(cfg, f)).collect());
    let db = cfg.snr.db;
    let (mut epnet, mut ml) = (BerRecord::new("epnet", db), BerRecord::new("ml", db));
    let (mut sym, mut whole) = (0u64, 0u64);
    for r in results {
        let r = r?;
        for (rec, e) in [(&mut epnet, r.ep_errors), (&mut ml, r.ml_errors)] {
            rec.bits += r.bits;
            rec.bit_errors += e;
            rec.frames += 1;
            rec.frame_errors += u64::from(e > 0);
        }
        sym += r.agreeing_symbols;
        whole += u64::from(r.agreeing_symbols == cfg.nt as u64);
    }
    Ok(OracleReport {
        frames: cfg.frames,
        symbol_agreement: sym as f64 / (cfg.frames * cfg.nt as u64) as f64,
        frame_agreement: whole as f64 / cfg.frames as f64,
        epnet,
        ml,
    })
}
