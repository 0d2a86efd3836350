//! MIMO channel generation, transmission at a target SNR and the real-valued
//! equivalent model.
//!
//! Noise is whitened, `n ~ CN(0, I)`, so each real component has variance
//! [`REAL_NOISE_VAR`]. SNR is set by scaling the transmitted symbols; the
//! receiver works with the scaled (effective) channel.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modem::Complex64;

/// Per-real-component noise variance of the whitened complex noise.
pub const REAL_NOISE_VAR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexChannel {
    h: DMatrix<Complex64>,
}

impl ComplexChannel {
    pub fn new(h: DMatrix<Complex64>) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::Config("channel needs Nr ≥ 1 and Nt ≥ 1".into()));
        }
        if h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite("channel entry"));
        }
        Ok(Self { h })
    }

    pub fn nt(&self) -> usize {
        self.h.ncols()
    }

    pub fn nr(&self) -> usize {
        self.h.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.h
    }

    /// The channel seen by the receiver, `√scale · H`, for the given SNR.
    pub fn effective(&self, snr: &SnrSpec) -> ComplexChannel {
        let s = snr.signal_scale(self.nt(), self.nr()).sqrt();
        Self {
            h: self.h.map(|z| z * s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrMode {
    /// Energy per coded bit, E_b/N0.
    CodedEbN0,
    /// Energy per information bit, E_B/N0.
    UncodedEbN0,
    /// Energy per symbol, E_s/N0.
    EsN0,
}

/// SNR value together with what it is referenced to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnrSpec {
    pub mode: SnrMode,
    pub db: f64,
    pub code_rate: f64,
    pub order: usize,
}

impl SnrSpec {
    pub fn new(mode: SnrMode, db: f64, code_rate: f64, order: usize) -> Self {
        Self {
            mode,
            db,
            code_rate,
            order,
        }
    }

    fn log2m_db(&self) -> f64 {
        10.0 * (self.order as f64).log2().log10()
    }

    fn inv_rate_db(&self) -> f64 {
        10.0 * (1.0 / self.code_rate).log10()
    }

    pub fn es_n0_db(&self) -> f64 {
        match self.mode {
            SnrMode::EsN0 => self.db,
            SnrMode::CodedEbN0 => self.db + self.log2m_db(),
            SnrMode::UncodedEbN0 => self.db - self.inv_rate_db() + self.log2m_db(),
        }
    }

    pub fn eb_n0_db(&self) -> f64 {
        self.es_n0_db() - self.log2m_db()
    }

    pub fn uncoded_eb_n0_db(&self) -> f64 {
        self.eb_n0_db() + self.inv_rate_db()
    }

    /// Re-expresses the same operating point in another mode.
    pub fn with_mode(&self, mode: SnrMode) -> Self {
        let db = match mode {
            SnrMode::EsN0 => self.es_n0_db(),
            SnrMode::CodedEbN0 => self.eb_n0_db(),
            SnrMode::UncodedEbN0 => self.uncoded_eb_n0_db(),
        };
        Self { mode, db, ..*self }
    }

    /// Linear factor on the transmit power so that every receive antenna
    /// sees the requested E_s/N0 (unit-energy symbols, column variance 1/Nr).
    pub fn signal_scale(&self, nt: usize, nr: usize) -> f64 {
        10f64.powf(self.es_n0_db() / 10.0) * nr as f64 / nt as f64
    }
}

fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// I.i.d. Rayleigh channel, entries `CN(0, 1/Nr)`.
pub fn sample_rayleigh<R: Rng + ?Sized>(nt: usize, nr: usize, rng: &mut R) -> ComplexChannel {
    let var = 1.0 / nr as f64;
    let h = DMatrix::from_fn(nr, nt, |_, _| complex_gaussian(rng, var));
    ComplexChannel { h }
}

/// Exponential correlation matrix `R[i,j] = ρ^|i-j|`.
pub fn exponential_correlation(n: usize, rho: f64) -> DMatrix<f64> {
    DMatrix::from_fn(n, n, |i, j| rho.powi((i as i32 - j as i32).abs()))
}

fn symmetric_sqrt(r: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(r);
    let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|v| v.max(0.0).sqrt()));
    &eig.eigenvectors * d * eig.eigenvectors.transpose()
}

/// Kronecker-correlated Rayleigh channel `R_rx^{1/2} H_iid R_tx^{1/2}`.
///
/// Both correlation matrices have unit diagonal, so every column keeps unit
/// average energy.
pub fn sample_correlated<R: Rng + ?Sized>(
    nt: usize,
    nr: usize,
    rho: f64,
    rng: &mut R,
) -> Result<ComplexChannel> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::Correlation(rho));
    }
    let iid = sample_rayleigh(nt, nr, rng);
    if rho == 0.0 {
        return Ok(iid);
    }
    let rx = symmetric_sqrt(exponential_correlation(nr, rho)).map(|v| Complex64::new(v, 0.0));
    let tx = symmetric_sqrt(exponential_correlation(nt, rho)).map(|v| Complex64::new(v, 0.0));
    Ok(ComplexChannel {
        h: rx * iid.h * tx,
    })
}

/// Fading model used when drawing channel matrices.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum ChannelKind {
    Rayleigh,
    /// Kronecker model with exponential correlation `ρ` at both ends.
    Correlated { rho: f64 },
}

impl ChannelKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ChannelKind::Rayleigh => Ok(()),
            ChannelKind::Correlated { rho } if (0.0..1.0).contains(&rho) => Ok(()),
            ChannelKind::Correlated { rho } => Err(Error::Correlation(rho)),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, nt: usize, nr: usize, rng: &mut R) -> Result<ComplexChannel> {
        match *self {
            ChannelKind::Rayleigh => Ok(sample_rayleigh(nt, nr, rng)),
            ChannelKind::Correlated { rho } => sample_correlated(nt, nr, rho, rng),
        }
    }
}

/// `y = √scale · H x + n`, `n ~ CN(0, I)`.
pub fn transmit<R: Rng + ?Sized>(
    x: &[Complex64],
    ch: &ComplexChannel,
    snr: &SnrSpec,
    rng: &mut R,
) -> Result<DVector<Complex64>> {
    if x.len() != ch.nt() {
        return Err(Error::Dimension {
            what: "transmit vector",
            expected: ch.nt(),
            got: x.len(),
        });
    }
    let s = snr.signal_scale(ch.nt(), ch.nr()).sqrt();
    let xv = DVector::from_column_slice(x);
    let mut y = ch.matrix() * xv * Complex64::new(s, 0.0);
    for v in y.iter_mut() {
        *v += complex_gaussian(rng, 1.0);
    }
    Ok(y)
}

/// Real-valued equivalent `y_r = H_r x_r + n_r` with explicit noise variance.
#[derive(Debug, Clone, PartialEq)]
pub struct RealChannelModel {
    pub h: DMatrix<f64>,
    pub y: DVector<f64>,
    pub noise_var: f64,
}

impl RealChannelModel {
    pub fn new(h: DMatrix<f64>, y: DVector<f64>, noise_var: f64) -> Result<Self> {
        if h.nrows() != y.len() {
            return Err(Error::Dimension {
                what: "received vector",
                expected: h.nrows(),
                got: y.len(),
            });
        }
        if !(noise_var > 0.0) {
            return Err(Error::NonPositiveVariance(noise_var));
        }
        Ok(Self { h, y, noise_var })
    }

    /// Number of real unknowns, 2·Nt.
    pub fn n_dims(&self) -> usize {
        self.h.ncols()
    }
}

/// Real embedding `[[Re H, -Im H], [Im H, Re H]]`, `y_r = [Re y; Im y]`.
pub fn to_real(ch: &ComplexChannel, y: &DVector<Complex64>) -> RealChannelModel {
    let (nr, nt) = (ch.nr(), ch.nt());
    let h = ch.matrix();
    let hr = DMatrix::from_fn(2 * nr, 2 * nt, |i, j| {
        let z = h[(i % nr, j % nt)];
        match (i < nr, j < nt) {
            (true, true) | (false, false) => z.re,
            (true, false) => -z.im,
            (false, true) => z.im,
        }
    });
    let yr = DVector::from_fn(2 * nr, |i, _| if i < nr { y[i].re } else { y[i - nr].im });
    RealChannelModel {
        h: hr,
        y: yr,
        noise_var: REAL_NOISE_VAR,
    }
}

/// `[Re x; Im x]`.
pub fn complex_to_real(x: &[Complex64]) -> Vec<f64> {
    x.iter().map(|z| z.re).chain(x.iter().map(|z| z.im)).collect()
}
