//! Independent reference implementations and fixtures shared by the
//! integration test targets.

#![allow(dead_code)]

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use unfoldrx::channel::RealChannelModel;
use unfoldrx::metaopt::{meta_train, LstmOptimizerParams, MetaTrainConfig};
use unfoldrx::modem::SymbolPrior;
use unfoldrx::turbocode::{rsc_encode, Trellis};

/// Meta-training budget used wherever a converged optimizer is needed.
pub const META_EPOCHS: usize = 10_000;
pub const META_SEED: u64 = 7;

/// Θ meta-trained for [`META_EPOCHS`] epochs, computed once per test binary.
pub fn trained_theta() -> &'static LstmOptimizerParams {
    static THETA: OnceLock<LstmOptimizerParams> = OnceLock::new();
    THETA.get_or_init(|| {
        let cfg = MetaTrainConfig {
            epochs: META_EPOCHS,
            ..Default::default()
        };
        meta_train(&cfg, &mut ChaCha8Rng::seed_from_u64(META_SEED))
            .expect("meta-training converges")
            .theta
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(StandardNormal)
}

/// `|a − b| ≤ tol · max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

pub fn all_close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&x, &y)| close(x, y, tol))
}

/// Bitwise MAP posteriors of a terminated RSC code by enumerating every
/// message. Inputs cover the `K + 3` trellis steps; LLRs are `ln P0/P1`.
pub fn exhaustive_rsc_map(sys: &[f64], par: &[f64], apriori: &[f64], k: usize) -> Vec<f64> {
    let trellis = Trellis::new();
    let mut num = vec![f64::NEG_INFINITY; k];
    let mut den = vec![f64::NEG_INFINITY; k];
    let half = |l: f64, b: u8| if b == 0 { 0.5 * l } else { -0.5 * l };
    for m in 0..1u32 << k {
        let bits: Vec<u8> = (0..k).map(|i| ((m >> i) & 1) as u8).collect();
        let enc = rsc_encode(&trellis, &bits);
        let u: Vec<u8> = bits.iter().chain(&enc.tail_systematic).copied().collect();
        let p: Vec<u8> = enc.parity.iter().chain(&enc.tail_parity).copied().collect();
        let metric: f64 = (0..u.len())
            .map(|t| half(sys[t] + apriori[t], u[t]) + half(par[t], p[t]))
            .sum();
        for i in 0..k {
            let slot = if bits[i] == 0 { &mut num[i] } else { &mut den[i] };
            *slot = log_add(*slot, metric);
        }
    }
    num.iter().zip(&den).map(|(a, b)| a - b).collect()
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Dense Gaussian posterior `Σ = (HᵀH/σ² + diag Λ)⁻¹`, `μ = Σ(Hᵀy/σ² + γ)`.
pub fn dense_moments(model: &RealChannelModel, gamma: &[f64], lambda: &[f64]) -> (DVector<f64>, DMatrix<f64>) {
    let s2 = model.noise_var;
    let ht = model.h.transpose();
    let a = &ht * &model.h / s2 + DMatrix::from_diagonal(&DVector::from_column_slice(lambda));
    let sigma = a.try_inverse().expect("positive definite");
    let mu = &sigma * (&ht * &model.y / s2 + DVector::from_column_slice(gamma));
    (mu, sigma)
}

/// Cavity `N(m, v)` left after dividing the site `(γ, Λ)` out of the
/// marginal `N(μ, Σ_nn)`.
pub fn dense_cavity(mu: &DVector<f64>, sigma: &DMatrix<f64>, gamma: &[f64], lambda: &[f64]) -> (Vec<f64>, Vec<f64>) {
    (0..mu.len())
        .map(|n| {
            let v = 1.0 / (1.0 / sigma[(n, n)] - lambda[n]);
            (v * (mu[n] / sigma[(n, n)] - gamma[n]), v)
        })
        .unzip()
}

/// Mean and variance of `p(a) N(a; m, v)` by direct enumeration.
pub fn enumerated_moments(amps: &[f64], probs: &[f64], m: f64, v: f64) -> (f64, f64) {
    let e: Vec<f64> = amps.iter().map(|a| -(a - m) * (a - m) / (2.0 * v)).collect();
    let top = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = e.iter().zip(probs).map(|(e, p)| p * (e - top).exp()).collect();
    let z: f64 = w.iter().sum();
    let mean = w.iter().zip(amps).map(|(w, a)| w * a).sum::<f64>() / z;
    let var = w.iter().zip(amps).map(|(w, a)| w * (a - mean) * (a - mean)).sum::<f64>() / z;
    (mean, var)
}

/// One straight-line EP step from the site `(γ, Λ)` with effective damping
/// `d`: dense inverse, clamped cavity, keep-on-negative refinement, then
/// damping. Returns the cavity mean and the damped site.
pub fn reference_ep_step(
    model: &RealChannelModel,
    prior: &SymbolPrior,
    gamma: &[f64],
    lambda: &[f64],
    d: f64,
    eps: f64,
) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = model.n_dims();
    let (mu, sigma) = dense_moments(model, gamma, lambda);
    let mut cav_mean = vec![0.0; n];
    let (mut new_g, mut new_l) = (gamma.to_vec(), lambda.to_vec());
    for i in 0..n {
        let s = sigma[(i, i)];
        let v = 1.0 / (1.0 / s - lambda[i]).clamp(eps, 1.0 / eps);
        let m = v * (mu[i] / s - gamma[i]);
        cav_mean[i] = m;
        let (pm, pv) = enumerated_moments(prior.amplitudes(), prior.probs(i), m, v);
        let pv = pv.max(eps);
        let l = 1.0 / pv - 1.0 / v;
        if l > 0.0 {
            new_l[i] = l;
            new_g[i] = pm / pv - m / v;
        }
    }
    let mix = |new: &[f64], old: &[f64]| new.iter().zip(old).map(|(a, b)| d * a + (1.0 - d) * b).collect();
    (cav_mean, mix(&new_g, gamma), mix(&new_l, lambda))
}

/// Site moment-matched to the prior, `Λ = 1/max(Ṽ, ε)`, `γ = x̃Λ`.
pub fn prior_site(prior: &SymbolPrior, eps: f64) -> (Vec<f64>, Vec<f64>) {
    let lambda: Vec<f64> = prior.var().iter().map(|v| 1.0 / v.max(eps)).collect();
    let gamma = prior.mean().iter().zip(&lambda).map(|(m, l)| m * l).collect();
    (gamma, lambda)
}

/// Random real model `y = Hx + n` with `H` entries `N(0, scale²)` and the
/// given noise variance.
pub fn random_real_model<R: Rng>(rows: usize, cols: usize, scale: f64, noise_var: f64, x: &[f64], rng: &mut R) -> RealChannelModel {
    let h = DMatrix::from_fn(rows, cols, |_, _| scale * normal(rng));
    let noise = DVector::from_fn(rows, |_, _| noise_var.sqrt() * normal(rng));
    let y = &h * DVector::from_column_slice(x) + noise;
    RealChannelModel::new(h, y, noise_var).expect("valid model")
}
