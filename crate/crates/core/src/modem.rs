//! Square M-QAM mapping, symbol priors from bit LLRs and Gaussian-to-LLR
//! soft demapping.
//!
//! Real-valued quantities follow the ordering of the real channel model: for
//! `n` complex symbols, dimensions `0..n` hold the in-phase parts and
//! `n..2n` the quadrature parts.

use nalgebra::Complex;

use crate::error::{Error, Result};
use crate::logdomain::{log_prob_bit, max_star};

pub type Complex64 = Complex<f64>;

/// Square QAM constellation with unit average energy and per-dimension
/// reflected-Gray labelling.
///
/// Bits are MSB first. The first `Q/2` bits of a symbol label the in-phase
/// amplitude, the remaining `Q/2` the quadrature amplitude. Label 0 sits on
/// the largest positive amplitude, so QPSK bits `00` map to `(1 + j)/√2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: usize,
    bits_per_symbol: usize,
    amplitudes: Vec<f64>,
    amp_labels: Vec<u32>,
    label_to_amp: Vec<usize>,
}

impl Constellation {
    pub fn new(order: usize) -> Result<Self> {
        if !matches!(order, 4 | 16 | 64) {
            return Err(Error::UnsupportedOrder(order));
        }
        let bits_per_symbol = order.trailing_zeros() as usize;
        let side = 1usize << (bits_per_symbol / 2);
        let d = (3.0 / (2.0 * (order as f64 - 1.0))).sqrt();
        let amplitudes: Vec<f64> = (0..side)
            .map(|i| (2.0 * i as f64 - (side as f64 - 1.0)) * d)
            .collect();
        let amp_labels: Vec<u32> = (0..side)
            .map(|i| {
                let r = (side - 1 - i) as u32;
                r ^ (r >> 1)
            })
            .collect();
        let mut label_to_amp = vec![0; side];
        for (i, &l) in amp_labels.iter().enumerate() {
            label_to_amp[l as usize] = i;
        }
        Ok(Self {
            order,
            bits_per_symbol,
            amplitudes,
            amp_labels,
            label_to_amp,
        })
    }

    pub fn qpsk() -> Self {
        Self::new(4).expect("QPSK is supported")
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Q = log2(M).
    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn bits_per_dim(&self) -> usize {
        self.bits_per_symbol / 2
    }

    /// The √M real amplitudes shared by I and Q, ascending.
    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Gray label (over `Q/2` bits, MSB first) of amplitude index `i`.
    pub fn amplitude_label(&self, i: usize) -> u32 {
        self.amp_labels[i]
    }

    /// Bit `j` (0 = MSB) of the per-dimension label of amplitude `i`.
    #[inline]
    pub fn amplitude_bit(&self, i: usize, j: usize) -> u8 {
        ((self.amp_labels[i] >> (self.bits_per_dim() - 1 - j)) & 1) as u8
    }

    /// Constellation point for a `Q`-bit label.
    pub fn point(&self, label: u32) -> Complex64 {
        let h = self.bits_per_dim();
        let mask = (1u32 << h) - 1;
        let re = self.amplitudes[self.label_to_amp[(label >> h) as usize]];
        let im = self.amplitudes[self.label_to_amp[(label & mask) as usize]];
        Complex64::new(re, im)
    }

    /// All points indexed by label.
    pub fn points(&self) -> Vec<Complex64> {
        (0..self.order as u32).map(|l| self.point(l)).collect()
    }

    /// Index of the amplitude closest to `x`.
    pub fn nearest_amplitude(&self, x: f64) -> usize {
        let side = self.amplitudes.len();
        let d = self.amplitudes[1] - self.amplitudes[0];
        let pos = (x - self.amplitudes[0]) / d;
        (pos.round().max(0.0) as usize).min(side - 1)
    }

    /// Mean energy over all points.
    pub fn mean_energy(&self) -> f64 {
        self.points().iter().map(|p| p.norm_sqr()).sum::<f64>() / self.order as f64
    }

    /// Writes the bits of amplitude `amp_idx` for one real dimension into `out`.
    fn push_dim_bits(&self, amp_idx: usize, out: &mut [u8]) {
        for (j, b) in out.iter_mut().enumerate() {
            *b = self.amplitude_bit(amp_idx, j);
        }
    }
}

/// Maps `Q`-bit groups onto constellation points.
pub fn map_bits(bits: &[u8], c: &Constellation) -> Result<Vec<Complex64>> {
    let q = c.bits_per_symbol();
    if !bits.len().is_multiple_of(q) {
        return Err(Error::BitLength {
            len: bits.len(),
            bits_per_symbol: q,
        });
    }
    Ok(bits
        .chunks_exact(q)
        .map(|g| {
            let label = g.iter().fold(0u32, |acc, &b| (acc << 1) | u32::from(b & 1));
            c.point(label)
        })
        .collect())
}

/// Hard bit decisions for a real-model vector (`2n` dimensions, `n` symbols).
pub fn hard_bits(x_real: &[f64], c: &Constellation) -> Vec<u8> {
    let n = x_real.len() / 2;
    let h = c.bits_per_dim();
    let mut bits = vec![0u8; n * c.bits_per_symbol()];
    for s in 0..n {
        let base = s * 2 * h;
        c.push_dim_bits(c.nearest_amplitude(x_real[s]), &mut bits[base..base + h]);
        c.push_dim_bits(
            c.nearest_amplitude(x_real[n + s]),
            &mut bits[base + h..base + 2 * h],
        );
    }
    bits
}

/// Per-bit LLRs, `L = ln P(b=0)/P(b=1)`, laid out `[symbol][bit]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrFrame {
    bits_per_symbol: usize,
    llrs: Vec<f64>,
}

impl LlrFrame {
    pub fn new(llrs: Vec<f64>, bits_per_symbol: usize) -> Result<Self> {
        if bits_per_symbol == 0 || !llrs.len().is_multiple_of(bits_per_symbol) {
            return Err(Error::BitLength {
                len: llrs.len(),
                bits_per_symbol,
            });
        }
        Ok(Self {
            bits_per_symbol,
            llrs,
        })
    }

    pub fn n_symbols(&self) -> usize {
        self.llrs.len() / self.bits_per_symbol
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.llrs
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.llrs
    }
}

/// Discrete prior over the real amplitudes, one probability vector per real
/// dimension, with its first two moments.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolPrior {
    amplitudes: Vec<f64>,
    probs: Vec<f64>,
    mean: Vec<f64>,
    var: Vec<f64>,
}

impl SymbolPrior {
    fn from_probs(amplitudes: Vec<f64>, probs: Vec<f64>) -> Self {
        let m = amplitudes.len();
        let n_dims = probs.len() / m;
        let mut mean = Vec::with_capacity(n_dims);
        let mut var = Vec::with_capacity(n_dims);
        for p in probs.chunks_exact(m) {
            let mu: f64 = p.iter().zip(&amplitudes).map(|(p, a)| p * a).sum();
            let second: f64 = p.iter().zip(&amplitudes).map(|(p, a)| p * a * a).sum();
            mean.push(mu);
            var.push((second - mu * mu).max(0.0));
        }
        Self {
            amplitudes,
            probs,
            mean,
            var,
        }
    }

    pub fn n_dims(&self) -> usize {
        self.mean.len()
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    /// Probability vector over the amplitudes for dimension `n`.
    pub fn probs(&self, n: usize) -> &[f64] {
        let m = self.amplitudes.len();
        &self.probs[n * m..(n + 1) * m]
    }

    /// Prior means x̃.
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Prior variances Ṽ.
    pub fn var(&self) -> &[f64] {
        &self.var
    }
}

/// Uniform prior: every amplitude equally likely in every dimension.
pub fn uniform_prior(c: &Constellation, n_dims: usize) -> SymbolPrior {
    let m = c.amplitudes().len();
    SymbolPrior::from_probs(c.amplitudes().to_vec(), vec![1.0 / m as f64; n_dims * m])
}

/// Builds the per-dimension amplitude prior implied by independent bit LLRs.
pub fn llr_to_prior(llr: &LlrFrame, c: &Constellation) -> Result<SymbolPrior> {
    if llr.bits_per_symbol() != c.bits_per_symbol() {
        return Err(Error::Dimension {
            what: "bits per symbol",
            expected: c.bits_per_symbol(),
            got: llr.bits_per_symbol(),
        });
    }
    let n = llr.n_symbols();
    let h = c.bits_per_dim();
    let m = c.amplitudes().len();
    let mut probs = vec![0.0; 2 * n * m];
    for (s, sym) in llr.as_slice().chunks_exact(2 * h).enumerate() {
        for (dim, bit_llrs) in [(s, &sym[..h]), (n + s, &sym[h..])] {
            let p = &mut probs[dim * m..(dim + 1) * m];
            for (i, pi) in p.iter_mut().enumerate() {
                let lp: f64 = bit_llrs
                    .iter()
                    .enumerate()
                    .map(|(j, &l)| log_prob_bit(l, c.amplitude_bit(i, j)))
                    .sum();
                *pi = lp.exp();
            }
            let z: f64 = p.iter().sum();
            p.iter_mut().for_each(|v| *v /= z);
        }
    }
    Ok(SymbolPrior::from_probs(c.amplitudes().to_vec(), probs))
}

/// Extrinsic bit LLRs from per-dimension Gaussian pdfs `N(x; mean, var)`
/// evaluated on the constellation amplitudes.
///
/// Without a prior the symbol sums are unweighted. With a prior, each point
/// is additionally weighted by the prior probability of its *other* bits,
/// which keeps the result extrinsic at bit level.
pub fn demap_llr(
    ext_mean: &[f64],
    ext_var: &[f64],
    prior: Option<&SymbolPrior>,
    c: &Constellation,
) -> Result<LlrFrame> {
    if ext_mean.len() != ext_var.len() || !ext_mean.len().is_multiple_of(2) {
        return Err(Error::Dimension {
            what: "extrinsic moments",
            expected: ext_mean.len(),
            got: ext_var.len(),
        });
    }
    if let Some(p) = prior {
        if p.n_dims() != ext_mean.len() {
            return Err(Error::Dimension {
                what: "prior dimensions",
                expected: ext_mean.len(),
                got: p.n_dims(),
            });
        }
    }
    if let Some(&v) = ext_var.iter().find(|&&v| !(v > 0.0)) {
        return Err(Error::NonPositiveVariance(v));
    }
    let n = ext_mean.len() / 2;
    let h = c.bits_per_dim();
    let amps = c.amplitudes();
    let mut out = vec![0.0; n * c.bits_per_symbol()];
    let mut logw = vec![0.0; amps.len()];
    for dim in 0..2 * n {
        let (s, off) = if dim < n { (dim, 0) } else { (dim - n, h) };
        let (mu, v) = (ext_mean[dim], ext_var[dim]);
        for (w, a) in logw.iter_mut().zip(amps) {
            *w = -(a - mu) * (a - mu) / (2.0 * v);
        }
        for j in 0..h {
            let (mut num, mut den) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
            for (i, &w) in logw.iter().enumerate() {
                let bit = c.amplitude_bit(i, j);
                let w = w + prior.map_or(0.0, |p| other_bits_log_prior(p, c, dim, i, j, bit));
                if bit == 0 {
                    num = max_star(num, w);
                } else {
                    den = max_star(den, w);
                }
            }
            out[s * 2 * h + off + j] = num - den;
        }
    }
    LlrFrame::new(out, c.bits_per_symbol())
}

/// `ln p(a_i) - ln P(b_j = bit)` under a bit-factorised prior.
fn other_bits_log_prior(
    p: &SymbolPrior,
    c: &Constellation,
    dim: usize,
    i: usize,
    j: usize,
    bit: u8,
) -> f64 {
    let probs = p.probs(dim);
    let marginal: f64 = probs
        .iter()
        .enumerate()
        .filter(|(k, _)| c.amplitude_bit(*k, j) == bit)
        .map(|(_, q)| q)
        .sum();
    if probs[i] <= 0.0 || marginal <= 0.0 {
        return f64::NEG_INFINITY;
    }
    probs[i].ln() - marginal.ln()
}
