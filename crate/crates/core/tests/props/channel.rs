use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use unfoldrx::channel::{complex_to_real, to_real, transmit, ComplexChannel, SnrMode, SnrSpec};
use unfoldrx::modem::Complex64;

use super::{check, CASES};
use crate::common::{normal, rng};

fn complex_vec(n: usize, r: &mut impl rand::Rng) -> Vec<Complex64> {
    (0..n).map(|_| Complex64::new(normal(r), normal(r))).collect()
}

pub fn real_embedding() {
    let dims = (1usize..9, 1usize..9, any::<u64>(), -3.0f64..3.0, -3.0f64..3.0);
    check("real embedding", CASES, dims, |(nt, nr, seed, a, b)| {
        let mut r = rng(seed);
        let h = DMatrix::from_vec(nr, nt, complex_vec(nr * nt, &mut r));
        let ch = ComplexChannel::new(h.clone()).unwrap();
        let (x1, x2) = (complex_vec(nt, &mut r), complex_vec(nt, &mut r));
        let y = DVector::from_vec(complex_vec(nr, &mut r));
        let m = to_real(&ch, &y);
        let apply = |x: &[Complex64]| &m.h * DVector::from_vec(complex_to_real(x));

        let mixed: Vec<Complex64> = x1.iter().zip(&x2).map(|(p, q)| p * a + q * b).collect();
        let lhs = apply(&mixed);
        let rhs = apply(&x1) * a + apply(&x2) * b;
        prop_assert!((lhs - &rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));

        let hx = &h * DVector::from_column_slice(&x1);
        let direct = DVector::from_vec(complex_to_real(hx.as_slice()));
        prop_assert!((apply(&x1) - &direct).norm() <= 1e-12 * (1.0 + direct.norm()));

        let fro: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((m.h.norm_squared() - 2.0 * fro).abs() <= 1e-10 * (1.0 + fro));
        let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
        prop_assert!((m.y.norm_squared() - ny).abs() <= 1e-12 * (1.0 + ny));
        Ok(())
    });
}

pub fn snr_round_trip() {
    let mode = prop_oneof![Just(SnrMode::EsN0), Just(SnrMode::CodedEbN0), Just(SnrMode::UncodedEbN0)];
    let order = prop_oneof![Just(4usize), Just(16), Just(64)];
    check(
        "SNR round trip",
        CASES,
        (mode.clone(), mode, order, -30.0f64..40.0, 0.05f64..=1.0),
        |(from, via, order, db, rate)| {
            let s = SnrSpec::new(from, db, rate, order);
            let back = s.with_mode(via).with_mode(from);
            prop_assert!((back.db - db).abs() < 1e-12, "{db} -> {}", back.db);
            prop_assert!((s.with_mode(via).es_n0_db() - s.es_n0_db()).abs() < 1e-12);
            Ok(())
        },
    );
}

pub fn noise_variance() {
    check("real noise variance", CASES, any::<u64>(), |seed| {
        let mut r = rng(seed);
        let (nt, nr, uses) = (2, 8, 250);
        let ch = ComplexChannel::new(DMatrix::from_element(nr, nt, Complex64::new(1.0, 0.0))).unwrap();
        let snr = SnrSpec::new(SnrMode::EsN0, 10.0, 1.0, 4);
        let zero = vec![Complex64::new(0.0, 0.0); nt];
        let mut acc = 0.0;
        for _ in 0..uses {
            let y = transmit(&zero, &ch, &snr, &mut r).unwrap();
            acc += to_real(&ch, &y).y.norm_squared();
        }
        let n = (2 * nr * uses) as f64;
        let var = acc / n;
        // Sample variance of n unit-variance/2 Gaussians has sd 0.5·√(2/n).
        prop_assert!((var - 0.5).abs() < 6.0 * 0.5 * (2.0 / n).sqrt(), "variance {var}");
        Ok(())
    });
}
