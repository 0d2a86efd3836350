use proptest::prelude::*;
use rand::Rng;
use unfoldrx::channel::{to_real, transmit, ChannelKind, RealChannelModel, SnrMode, SnrSpec};
use unfoldrx::epdetect::{
    cavity, damp, ep_global_moments, ep_layer, epnet_detect, mmse_detect, DampingSchedule, EpConfig, EpPair,
    PreparedModel,
};
use unfoldrx::modem::{demap_llr, llr_to_prior, map_bits, uniform_prior, Constellation, LlrFrame, SymbolPrior};

use super::{check, CASES};
use crate::common::{close, dense_moments, normal, prior_site, reference_ep_step, rng};

/// A Rayleigh channel use with random dimensions, order and SNR, and either
/// a uniform prior or one built from random bit LLRs of magnitude up to
/// `max_llr`.
fn instance(seed: u64, max_llr: f64) -> (RealChannelModel, SymbolPrior, Constellation) {
    let mut r = rng(seed);
    let nt = r.random_range(1..=4);
    let nr = r.random_range(nt..=6);
    let c = Constellation::new([4, 16, 64][r.random_range(0..3)]).unwrap();
    let snr = SnrSpec::new(SnrMode::EsN0, r.random_range(-5.0..30.0), 1.0, c.order());
    let bits: Vec<u8> = (0..nt * c.bits_per_symbol()).map(|_| r.random_range(0..2)).collect();
    let x = map_bits(&bits, &c).unwrap();
    let ch = ChannelKind::Rayleigh.sample(nt, nr, &mut r).unwrap();
    let y = transmit(&x, &ch, &snr, &mut r).unwrap();
    let model = to_real(&ch.effective(&snr), &y);
    let prior = if r.random_bool(0.3) {
        uniform_prior(&c, 2 * nt)
    } else {
        let llrs = (0..bits.len()).map(|_| r.random_range(-max_llr..max_llr)).collect();
        llr_to_prior(&LlrFrame::new(llrs, c.bits_per_symbol()).unwrap(), &c).unwrap()
    };
    (model, prior, c)
}

pub fn lambda_positive() {
    check("lambda positive", 10 * CASES, (any::<u64>(), 0.0f64..30.0, proptest::collection::vec(-8.0f64..8.0, 1..10)), |(seed, llr, raw)| {
        let (model, prior, _) = instance(seed, llr.max(1e-3));
        let cfg = EpConfig::default();
        let prep = PreparedModel::new(&model);
        let mut pair = EpPair::from_prior(&prior, &cfg);
        for &beta in &raw {
            let out = ep_layer(&prep, &prior, &pair, &cfg).unwrap();
            pair = damp(&pair, &out.candidate, beta);
            prop_assert!(pair.lambda.iter().all(|l| *l > 0.0 && l.is_finite()), "{:?}", pair.lambda);
            prop_assert!(pair.gamma.iter().all(|g| g.is_finite()));
        }
        Ok(())
    });
}

pub fn extrinsic_exclusion() {
    check("extrinsic exclusion", CASES, (any::<u64>(), any::<prop::sample::Index>()), |(seed, pick)| {
        let (model, _, c) = instance(seed, 1.0);
        let cfg = EpConfig::default();
        let dims = model.n_dims();
        let nt = dims / 2;
        let n = pick.index(dims);
        let (h, q) = (c.bits_per_dim(), c.bits_per_symbol());
        let mut r = rng(seed ^ 0x5eed);
        let mut llrs = vec![0.0; nt * q];
        let (sym, off) = if n < nt { (n, 0) } else { (n - nt, h) };
        for j in 0..h {
            llrs[sym * q + off + j] = r.random_range(-10.0..10.0);
        }
        let changed = llr_to_prior(&LlrFrame::new(llrs, q).unwrap(), &c).unwrap();
        let base = mmse_detect(&model, &uniform_prior(&c, dims), &cfg).unwrap();
        let moved = mmse_detect(&model, &changed, &cfg).unwrap();
        prop_assert!(close(base.ext_mean[n], moved.ext_mean[n], 1e-9), "{} vs {}", base.ext_mean[n], moved.ext_mean[n]);
        prop_assert!(close(base.ext_var[n], moved.ext_var[n], 1e-9));
        Ok(())
    });
}

pub fn product_lemma() {
    check("product lemma", CASES, any::<u64>(), |seed| {
        let (model, _, _) = instance(seed, 1.0);
        let mut r = rng(seed ^ 0xfeed);
        let n = model.n_dims();
        let pair = EpPair {
            gamma: (0..n).map(|_| 2.0 * normal(&mut r)).collect(),
            lambda: (0..n).map(|_| r.random_range(0.1..10.0)).collect(),
        };
        let g = ep_global_moments(&pair, &model).unwrap();
        let diag: Vec<f64> = (0..n).map(|i| g.sigma[(i, i)]).collect();
        let (m, v) = cavity(g.mu.as_slice(), &diag, &pair, &EpConfig::default());
        for i in 0..n {
            prop_assert!(close(1.0 / v[i] + pair.lambda[i], 1.0 / diag[i], 1e-10));
            prop_assert!(close(m[i] / v[i] + pair.gamma[i], g.mu[i] / diag[i], 1e-10));
        }
        Ok(())
    });
}

pub fn demap_monotone() {
    let order = prop_oneof![Just(4usize), Just(16), Just(64)];
    check("demap monotone", CASES, (order, any::<u32>(), -2.0f64..2.0, -2.0f64..2.0, 1e-4f64..1.0, 0.01f64..1.0), |(m, label, re, im, v1, shrink)| {
        let c = Constellation::new(m).unwrap();
        let spacing = c.amplitudes()[1] - c.amplitudes()[0];
        let v1 = if m == 4 { v1 } else { v1 * spacing * spacing };
        let v2 = v1 * shrink;
        let q = c.bits_per_symbol();
        if m == 4 {
            let a = demap_llr(&[re, im], &[v1, v1], None, &c).unwrap();
            let b = demap_llr(&[re, im], &[v2, v2], None, &c).unwrap();
            for (x, y) in a.as_slice().iter().zip(b.as_slice()) {
                prop_assert!(y.abs() >= x.abs() - 1e-12, "{x} -> {y}");
            }
        } else {
            let label = label % m as u32;
            let bits: Vec<u8> = (0..q).map(|j| ((label >> j) & 1) as u8).collect();
            let p = map_bits(&bits, &c).unwrap()[0];
            let signed = |v: f64| -> Vec<f64> {
                let l = demap_llr(&[p.re, p.im], &[v, v], None, &c).unwrap();
                l.as_slice().iter().zip(&bits).map(|(l, &b)| if b == 0 { *l } else { -l }).collect()
            };
            for (x, y) in signed(v1).iter().zip(signed(v2)) {
                prop_assert!(y >= x - 1e-12, "{x} -> {y}");
            }
        }
        Ok(())
    });
}

/// Cancellation factor of the cavity precision `1/Σ_nn − Λ_n`, i.e.
/// `max_n 1/(1 − Λ_n Σ_nn)`.
fn cavity_condition(model: &RealChannelModel, pair: &EpPair) -> f64 {
    let (_, sigma) = dense_moments(model, &pair.gamma, &pair.lambda);
    pair.lambda
        .iter()
        .enumerate()
        .map(|(n, l)| 1.0 / (1.0 - l * sigma[(n, n)]))
        .fold(1.0, f64::max)
}

/// Each layer, started from the library's own site, must agree with one
/// reference step; the full trace must equal the layer-by-layer chain.
pub fn reference_trace() {
    check("reference trace", CASES, (any::<u64>(), 1usize..=6), |(seed, layers)| {
        let (model, prior, _) = instance(seed, 4.0);
        let cfg = EpConfig::default();
        let schedule = DampingSchedule::from_effective(&vec![0.2; layers]).unwrap();
        let (raw, d) = (schedule.raw()[0], schedule.effective()[0]);
        let out = epnet_detect(&model, &prior, &schedule, &cfg).unwrap();
        let prep = PreparedModel::new(&model);
        let mut pair = EpPair::from_prior(&prior, &cfg);
        let (g0, l0) = prior_site(&prior, cfg.min_var);
        prop_assert!(g0.iter().zip(&pair.gamma).chain(l0.iter().zip(&pair.lambda)).all(|(a, b)| close(*a, *b, 1e-14)));
        for (l, traced) in out.trace.iter().enumerate() {
            let step = ep_layer(&prep, &prior, &pair, &cfg).unwrap();
            let next = damp(&pair, &step.candidate, raw);
            prop_assert_eq!(&step.cav_mean, traced);
            let (m, g, lam) = reference_ep_step(&model, &prior, &pair.gamma, &pair.lambda, d, cfg.min_var);
            let tol = 1e-12 * cavity_condition(&model, &pair);
            for (name, a, b) in [("cavity mean", &step.cav_mean, &m), ("gamma", &next.gamma, &g), ("lambda", &next.lambda, &lam)] {
                for (x, y) in a.iter().zip(b) {
                    prop_assert!(close(*x, *y, tol), "layer {l} {name}: {x} vs {y} (tolerance {tol:e})");
                }
            }
            pair = next;
        }
        Ok(())
    });
}
