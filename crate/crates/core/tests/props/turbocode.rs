use proptest::prelude::*;
use rand::Rng;
use unfoldrx::turbocode::{
    awgn_bpsk_llrs, bcjr, rsc_encode, DecoderKind, MapAlgorithm, ScaledDecoderWeights, Trellis, TurboCodec,
};

use super::{check, CASES};
use crate::common::{all_close, exhaustive_rsc_map, normal, rng};

fn kind() -> impl Strategy<Value = DecoderKind> {
    prop_oneof![
        Just(DecoderKind::MaxLog),
        Just(DecoderKind::LogMap),
        Just(DecoderKind::ScaledMaxLog)
    ]
}

pub fn termination() {
    check("termination", CASES, (1usize..300, any::<u64>()), |(k, seed)| {
        let mut r = rng(seed);
        let codec = TurboCodec::new(k, DecoderKind::MaxLog).unwrap();
        let msg: Vec<u8> = (0..k).map(|_| r.random_range(0..2)).collect();
        let t = Trellis::new();
        prop_assert_eq!(rsc_encode(&t, &msg).final_state, 0);
        prop_assert_eq!(rsc_encode(&t, &codec.interleaver().interleave(&msg)).final_state, 0);
        prop_assert_eq!(codec.encode(&msg).unwrap().len(), 2 * k + 12);
        Ok(())
    });
}

pub fn log_map_is_exhaustive_map() {
    check("log-MAP vs exhaustive MAP", CASES, (1usize..=8, any::<u64>(), 0.1f64..6.0), |(k, seed, spread)| {
        let mut r = rng(seed);
        let mut draw = |n: usize| (0..n).map(|_| spread * normal(&mut r)).collect::<Vec<f64>>();
        let (sys, par) = (draw(k + 3), draw(k + 3));
        let mut apriori = draw(k);
        apriori.extend([0.0; 3]);
        let out = bcjr(&sys, &par, &apriori, &Trellis::new(), MapAlgorithm::LogMap).unwrap();
        let oracle = exhaustive_rsc_map(&sys, &par, &apriori, k);
        prop_assert!(all_close(&out.posterior[..k], &oracle, 1e-9), "{:?} vs {:?}", &out.posterior[..k], oracle);
        Ok(())
    });
}

/// Paired frame-error comparison over 2000 AWGN frames at 2 dB: each extra
/// iteration may not lose more frames than it gains beyond three standard
/// deviations of the paired difference.
pub fn fer_monotone_in_iterations() {
    let codec = TurboCodec::new(40, DecoderKind::MaxLog).unwrap();
    let iters = [1usize, 2, 3, 4, 6, 8];
    let mut r = rng(2024);
    let mut fails = vec![Vec::new(); iters.len()];
    for _ in 0..2000 {
        let (msg, llrs) = awgn_bpsk_llrs(&codec, 2.0, &mut r).unwrap();
        for (slot, &n) in fails.iter_mut().zip(&iters) {
            slot.push(codec.decode(&llrs, n, None).unwrap().bits != msg);
        }
    }
    for w in 0..iters.len() - 1 {
        let (a, b) = (&fails[w], &fails[w + 1]);
        let lost = a.iter().zip(b).filter(|(x, y)| !**x && **y).count() as f64;
        let gained = a.iter().zip(b).filter(|(x, y)| **x && !**y).count() as f64;
        assert!(
            lost - gained <= 3.0 * (lost + gained).sqrt().max(1.0),
            "iterations {} -> {}: {lost} frames lost, {gained} gained",
            iters[w],
            iters[w + 1]
        );
    }
    let fer = |v: &[bool]| v.iter().filter(|&&f| f).count();
    assert!(fer(&fails[iters.len() - 1]) < fer(&fails[0]));
}

/// Flipping the channel LLRs on the support of a codeword flips the
/// posteriors on the support of its message.
pub fn channel_symmetry() {
    check("channel symmetry", CASES, (1usize..80, any::<u64>(), kind(), 1usize..5), |(k, seed, kind, iters)| {
        let mut r = rng(seed);
        let codec = TurboCodec::new(k, kind).unwrap();
        let msg: Vec<u8> = (0..k).map(|_| r.random_range(0..2)).collect();
        let cw = codec.encode(&msg).unwrap();
        let llrs: Vec<f64> = cw.iter().map(|_| 3.0 * normal(&mut r)).collect();
        let flipped: Vec<f64> = llrs.iter().zip(&cw).map(|(l, &b)| if b == 1 { -l } else { *l }).collect();
        let a = codec.decode(&llrs, iters, None).unwrap();
        let b = codec.decode(&flipped, iters, None).unwrap();
        let expect: Vec<f64> = a.posterior.iter().zip(&msg).map(|(l, &m)| if m == 1 { -l } else { *l }).collect();
        prop_assert!(all_close(&b.posterior, &expect, 1e-9));
        let ext: Vec<f64> = a.extrinsic.iter().zip(&cw).map(|(l, &c)| if c == 1 { -l } else { *l }).collect();
        prop_assert!(all_close(&b.extrinsic, &ext, 1e-9));
        Ok(())
    });
}

pub fn unit_weights_are_max_log() {
    check("unit weights", CASES, (1usize..80, any::<u64>(), 1usize..6), |(k, seed, iters)| {
        let mut r = rng(seed);
        let plain = TurboCodec::new(k, DecoderKind::MaxLog).unwrap();
        let scaled = plain.with_kind(DecoderKind::ScaledMaxLog);
        let llrs: Vec<f64> = (0..plain.codeword_len()).map(|_| 4.0 * normal(&mut r)).collect();
        let a = plain.decode(&llrs, iters, None).unwrap();
        let b = scaled.decode(&llrs, iters, Some(&ScaledDecoderWeights::uniform(iters, 1.0))).unwrap();
        prop_assert_eq!(a, b);
        Ok(())
    });
}
