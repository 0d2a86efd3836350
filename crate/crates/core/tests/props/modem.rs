use proptest::prelude::*;
use unfoldrx::logdomain::sigmoid;
use unfoldrx::modem::{demap_llr, llr_to_prior, map_bits, uniform_prior, Constellation, LlrFrame};

use super::{check, CASES};

fn order() -> impl Strategy<Value = usize> {
    prop_oneof![Just(4usize), Just(16), Just(64)]
}

pub fn demap_round_trip() {
    check("demap round trip", CASES, (order(), any::<u32>()), |(m, label)| {
        let c = Constellation::new(m).unwrap();
        let q = c.bits_per_symbol();
        let bits: Vec<u8> = (0..q).map(|j| ((label >> j) & 1) as u8).collect();
        let x = map_bits(&bits, &c).unwrap()[0];
        let llr = demap_llr(&[x.re, x.im], &[1e-6, 1e-6], None, &c).unwrap();
        for (l, b) in llr.as_slice().iter().zip(&bits) {
            prop_assert_eq!(u8::from(*l < 0.0), *b, "llrs {:?}", llr.as_slice());
        }
        Ok(())
    });
}

pub fn qpsk_prior_marginal() {
    check("QPSK prior marginal", CASES, (-40.0f64..40.0, 0usize..2), |(l, bit)| {
        let c = Constellation::qpsk();
        let mut llrs = vec![0.0; 2];
        llrs[bit] = l;
        let prior = llr_to_prior(&LlrFrame::new(llrs, 2).unwrap(), &c).unwrap();
        let p0: f64 = (0..2)
            .filter(|&i| c.amplitude_bit(i, 0) == 0)
            .map(|i| prior.probs(bit)[i])
            .sum();
        prop_assert!((p0 - sigmoid(l)).abs() < 1e-12, "{p0} vs {}", sigmoid(l));
        let other: f64 = prior.probs(1 - bit).iter().map(|p| (p - 0.5).abs()).sum();
        prop_assert!(other < 1e-15);
        Ok(())
    });
}

pub fn gray_adjacency() {
    check("Gray adjacency", CASES, (order(), any::<u32>()), |(m, label)| {
        let c = Constellation::new(m).unwrap();
        let label = label % m as u32;
        let pts = c.points();
        let dmin = c.amplitudes()[1] - c.amplitudes()[0];
        let p = c.point(label);
        for (other, q) in pts.iter().enumerate() {
            if ((p - q).norm() - dmin).abs() < 1e-9 {
                prop_assert_eq!((label ^ other as u32).count_ones(), 1, "{} vs {}", label, other);
            }
        }
        Ok(())
    });
}

pub fn uniform_prior_variance() {
    check("uniform prior variance", CASES, (order(), 1usize..64), |(m, dims)| {
        let prior = uniform_prior(&Constellation::new(m).unwrap(), dims);
        prop_assert_eq!(prior.n_dims(), dims);
        for (&mu, &v) in prior.mean().iter().zip(prior.var()) {
            prop_assert!(mu.abs() < 1e-15);
            prop_assert!((v - 0.5).abs() < 1e-12, "variance {v}");
        }
        Ok(())
    });
}
