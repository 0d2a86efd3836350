use std::cell::Cell;

use proptest::prelude::*;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use unfoldrx::channel::{ChannelKind, SnrMode};
use unfoldrx::harness::{run_sweep, wilson_interval, BerRecord, Detector, ExperimentConfig, StoppingRule, VariantSpec, Z95};

use super::{check, CASES};
use crate::common::rng;

fn detector(pick: u8, order: usize) -> Detector {
    match pick % 3 {
        0 => Detector::Mmse,
        1 => Detector::Ep { layers: 3, damping: 0.5 },
        _ if order == 4 => Detector::Ml,
        _ => Detector::Ep { layers: 5, damping: 0.2 },
    }
}

fn small_config(seed: u64, snr_db: Vec<f64>, max_bits: u64) -> ExperimentConfig {
    let mut r = rng(seed);
    let nt = r.random_range(1..=2);
    let nr = r.random_range(nt..=3);
    let order = [4, 16][r.random_range(0..2)];
    let variants = vec![VariantSpec::new(detector(r.random(), order))];
    let mut cfg = ExperimentConfig::uncoded(nt, nr, order, ChannelKind::Rayleigh, SnrMode::EsN0, snr_db, variants);
    cfg.stopping = StoppingRule { min_errors: 100, max_bits };
    cfg.batch = r.random_range(4..64);
    cfg.seed = seed;
    cfg
}

fn counts(r: &BerRecord) -> (String, u64, u64, u64, u64) {
    (r.variant.clone(), r.bits, r.bit_errors, r.frames, r.frame_errors)
}

pub fn reproducible() {
    check("reproducible", CASES, (any::<u64>(), -5.0f64..20.0), |(seed, db)| {
        let cfg = small_config(seed, vec![db, db + 5.0], 600);
        let a = run_sweep(&cfg, 1).unwrap();
        let b = run_sweep(&cfg, 1).unwrap();
        prop_assert_eq!(a.iter().map(counts).collect::<Vec<_>>(), b.iter().map(counts).collect::<Vec<_>>());
        Ok(())
    });
}

/// Intervals from Bernoulli counts with known p, and from sweeps over a
/// zero-signal channel whose decisions are independent of the bits
/// (BER exactly 1/2), must contain the true rate about 95% of the time.
pub fn wilson_coverage() {
    let hits = Cell::new(0u32);
    check("Wilson coverage (Bernoulli)", CASES, (any::<u64>(), 1e-3f64..0.5, 100u64..5000), |(seed, p, n)| {
        let k = Binomial::new(n, p).unwrap().sample(&mut rng(seed));
        let (lo, hi) = wilson_interval(k, n, Z95);
        hits.set(hits.get() + u32::from(lo <= p && p <= hi));
        Ok(())
    });
    let bernoulli = f64::from(hits.get()) / f64::from(CASES);

    let hits = Cell::new(0u32);
    check("Wilson coverage (sweep)", CASES, any::<u64>(), |seed| {
        let cfg = small_config(seed, vec![f64::NEG_INFINITY], 400);
        let rec = &run_sweep(&cfg, 1).unwrap()[0];
        let (lo, hi) = rec.ci95();
        hits.set(hits.get() + u32::from(lo <= 0.5 && 0.5 <= hi));
        Ok(())
    });
    let sweep = f64::from(hits.get()) / f64::from(CASES);
    for (what, c) in [("Bernoulli", bernoulli), ("sweep", sweep)] {
        assert!((0.93..=0.975).contains(&c), "{what} coverage {c}");
    }
}

pub fn monotone_trend() {
    check("monotone trend", CASES, (any::<u64>(), -5.0f64..10.0, 2.0f64..6.0), |(seed, start, step)| {
        let grid = vec![start, start + step, start + 2.0 * step];
        let recs = run_sweep(&small_config(seed, grid, 3000), 1).unwrap();
        for w in recs.windows(2) {
            prop_assert!(w[1].ber() <= w[0].ber() || w[1].overlaps(&w[0]), "{:?}", w);
        }
        Ok(())
    });
}
