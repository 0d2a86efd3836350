//! Diagonal expectation propagation in the real domain, unfolded into layers
//! with one damping factor each.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::linalg;
use crate::channel::RealChannelModel;
use crate::error::{Error, Result};
use crate::logdomain::{logit, sigmoid};
use crate::modem::SymbolPrior;

/// Minimum variance used when no other value is configured.
pub const DEFAULT_MIN_VAR: f64 = 5e-7;

/// Raw (pre-sigmoid) damping parameters, one per layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DampingSchedule {
    raw: Vec<f64>,
}

impl DampingSchedule {
    pub fn from_raw(raw: Vec<f64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::Config("damping schedule needs at least one layer".into()));
        }
        if raw.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("raw damping"));
        }
        Ok(Self { raw })
    }

    /// Builds a schedule from effective dampings in `(0, 1)` via the logit.
    pub fn from_effective(effective: &[f64]) -> Result<Self> {
        if let Some(&e) = effective.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::Config(format!("effective damping {e} outside (0, 1)")));
        }
        Self::from_raw(effective.iter().map(|&e| logit(e)).collect())
    }

    /// `layers` copies of the same effective damping.
    pub fn constant(layers: usize, effective: f64) -> Result<Self> {
        Self::from_effective(&vec![effective; layers])
    }

    pub fn layers(&self) -> usize {
        self.raw.len()
    }

    pub fn raw(&self) -> &[f64] {
        &self.raw
    }

    pub fn effective(&self) -> Vec<f64> {
        self.raw.iter().map(|&b| sigmoid(b)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpConfig {
    /// Floor ε for cavity and module-B variances; cavity precisions are kept
    /// in `[ε, 1/ε]`.
    pub min_var: f64,
}

impl Default for EpConfig {
    fn default() -> Self {
        Self {
            min_var: DEFAULT_MIN_VAR,
        }
    }
}

impl EpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.min_var > 0.0 && self.min_var < 1.0 {
            Ok(())
        } else {
            Err(Error::Config(format!("min_var {} outside (0, 1)", self.min_var)))
        }
    }
}

/// Site parameters: the diagonal Gaussian factor `exp(γᵀx − ½ xᵀ diag(Λ) x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EpPair {
    pub gamma: Vec<f64>,
    pub lambda: Vec<f64>,
}

impl EpPair {
    /// Moment-matched to the prior: `Λ = 1/Ṽ`, `γ = x̃/Ṽ`, with `Ṽ ≥ ε`.
    pub fn from_prior(prior: &SymbolPrior, config: &EpConfig) -> Self {
        let (gamma, lambda) = prior
            .mean()
            .iter()
            .zip(prior.var())
            .map(|(&m, &v)| {
                let v = v.max(config.min_var);
                (m / v, 1.0 / v)
            })
            .unzip();
        Self { gamma, lambda }
    }

    pub fn len(&self) -> usize {
        self.gamma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gamma.is_empty()
    }
}

/// Likelihood terms `HᵀH/σ²` and `Hᵀy/σ²` of one received vector.
#[derive(Debug, Clone)]
pub struct PreparedModel {
    n: usize,
    gram: Vec<f64>,
    hty: Vec<f64>,
}

impl PreparedModel {
    pub fn new(model: &RealChannelModel) -> Self {
        let h = &model.h;
        let n = h.ncols();
        let s = 1.0 / model.noise_var;
        let mut gram = vec![0.0; n * n];
        for i in 0..n {
            let ci = h.column(i);
            for j in 0..=i {
                let v = ci.dot(&h.column(j)) * s;
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
        }
        let hty = (0..n).map(|i| h.column(i).dot(&model.y) * s).collect();
        Self { n, gram, hty }
    }

    pub fn n_dims(&self) -> usize {
        self.n
    }

    fn factor(&self, pair: &EpPair) -> Result<(Vec<f64>, Vec<f64>)> {
        let n = self.n;
        let mut a = self.gram.clone();
        for i in 0..n {
            a[i * n + i] += pair.lambda[i];
        }
        let l = linalg::cholesky(&a, n)?;
        let rhs: Vec<f64> = self.hty.iter().zip(&pair.gamma).map(|(a, b)| a + b).collect();
        let mu = linalg::cholesky_solve(&l, n, &rhs);
        Ok((l, mu))
    }

    /// Global mean and the diagonal of the global covariance.
    pub fn moments_diag(&self, pair: &EpPair) -> Result<(Vec<f64>, Vec<f64>)> {
        let (l, mu) = self.factor(pair)?;
        Ok((mu, linalg::inverse_diagonal(&l, self.n)))
    }
}

/// Global Gaussian approximation `N(μ, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GlobalMoments {
    pub mu: DVector<f64>,
    pub sigma: DMatrix<f64>,
}

/// `Σ = (HᵀH/σ² + diag Λ)⁻¹`, `μ = Σ(Hᵀy/σ² + γ)`.
pub fn ep_global_moments(pair: &EpPair, model: &RealChannelModel) -> Result<GlobalMoments> {
    check_len(pair, model.n_dims())?;
    let prep = PreparedModel::new(model);
    let n = prep.n;
    let (l, mu) = prep.factor(pair)?;
    let sigma = linalg::inverse(&l, n);
    Ok(GlobalMoments {
        mu: DVector::from_vec(mu),
        sigma: DMatrix::from_row_slice(n, n, &sigma),
    })
}

/// Per-dimension cavity (extrinsic) moments after dividing the site factor
/// out of the global marginal.
pub fn cavity(
    mu: &[f64],
    sigma_diag: &[f64],
    pair: &EpPair,
    config: &EpConfig,
) -> (Vec<f64>, Vec<f64>) {
    let eps = config.min_var;
    mu.iter()
        .zip(sigma_diag)
        .zip(pair.gamma.iter().zip(&pair.lambda))
        .map(|((&m, &s), (&g, &lam))| {
            let prec = (1.0 / s - lam).clamp(eps, 1.0 / eps);
            let v = 1.0 / prec;
            (v * (m / s - g), v)
        })
        .unzip()
}

/// Mean and variance of `p̂(x_n) ∝ N(x_n; cavity) p_a(x_n)` over the real
/// amplitudes, plus the index of the most probable amplitude.
pub fn discrete_moments(
    cav_mean: &[f64],
    cav_var: &[f64],
    prior: &SymbolPrior,
    config: &EpConfig,
) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let amps = prior.amplitudes();
    let mut logw = vec![0.0; amps.len()];
    let n = cav_mean.len();
    let (mut mean, mut var, mut map) = (vec![0.0; n], vec![0.0; n], vec![0; n]);
    for d in 0..n {
        let (m, v) = (cav_mean[d], cav_var[d]);
        let mut best = (f64::NEG_INFINITY, 0);
        for (i, (w, (&a, &p))) in logw.iter_mut().zip(amps.iter().zip(prior.probs(d))).enumerate() {
            *w = -(a - m) * (a - m) / (2.0 * v) + p.ln();
            if *w > best.0 {
                best = (*w, i);
            }
        }
        let (mut z, mut s1) = (0.0, 0.0);
        for (w, &a) in logw.iter_mut().zip(amps) {
            *w = (*w - best.0).exp();
            z += *w;
            s1 += *w * a;
        }
        let mu = s1 / z;
        let s2: f64 = logw.iter().zip(amps).map(|(e, a)| e * (a - mu) * (a - mu)).sum();
        mean[d] = mu;
        var[d] = (s2 / z).max(config.min_var);
        map[d] = best.1;
    }
    (mean, var, map)
}

/// Moment-matching update of the site pair. Dimensions whose new precision
/// would be non-positive keep their previous values.
pub fn refine_pair(
    prev: &EpPair,
    cav_mean: &[f64],
    cav_var: &[f64],
    post_mean: &[f64],
    post_var: &[f64],
) -> EpPair {
    let n = prev.len();
    let mut out = prev.clone();
    for d in 0..n {
        let lam = 1.0 / post_var[d] - 1.0 / cav_var[d];
        if lam > 0.0 {
            out.lambda[d] = lam;
            out.gamma[d] = post_mean[d] / post_var[d] - cav_mean[d] / cav_var[d];
        }
    }
    out
}

/// Convex combination `σ(β)·new + (1 − σ(β))·old` of both pair components.
pub fn damp(old: &EpPair, new: &EpPair, beta_raw: f64) -> EpPair {
    let s = sigmoid(beta_raw);
    let mix = |o: &[f64], n: &[f64]| -> Vec<f64> {
        o.iter().zip(n).map(|(o, n)| s * n + (1.0 - s) * o).collect()
    };
    EpPair {
        gamma: mix(&old.gamma, &new.gamma),
        lambda: mix(&old.lambda, &new.lambda),
    }
}

/// Everything one layer computes from its input pair.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerOutput {
    pub mu: Vec<f64>,
    pub sigma_diag: Vec<f64>,
    pub cav_mean: Vec<f64>,
    pub cav_var: Vec<f64>,
    pub post_mean: Vec<f64>,
    pub post_var: Vec<f64>,
    pub map_index: Vec<usize>,
    /// Undamped refined pair.
    pub candidate: EpPair,
}

/// Global moments, cavity, module-B moments and refinement for one layer.
/// Damping is left to the caller.
pub fn ep_layer(
    prep: &PreparedModel,
    prior: &SymbolPrior,
    pair: &EpPair,
    config: &EpConfig,
) -> Result<LayerOutput> {
    let (mu, sigma_diag) = prep.moments_diag(pair)?;
    let (cav_mean, cav_var) = cavity(&mu, &sigma_diag, pair, config);
    let (post_mean, post_var, map_index) = discrete_moments(&cav_mean, &cav_var, prior, config);
    let candidate = refine_pair(pair, &cav_mean, &cav_var, &post_mean, &post_var);
    Ok(LayerOutput {
        mu,
        sigma_diag,
        cav_mean,
        cav_var,
        post_mean,
        post_var,
        map_index,
        candidate,
    })
}

/// State left behind after the last layer.
#[derive(Debug, Clone, PartialEq)]
pub struct EpState {
    /// Damped pair after the last layer.
    pub pair: EpPair,
    pub mu: Vec<f64>,
    pub sigma_diag: Vec<f64>,
    pub cav_mean: Vec<f64>,
    pub cav_var: Vec<f64>,
    pub post_mean: Vec<f64>,
    pub post_var: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpOutput {
    /// Extrinsic mean of the last layer (its cavity mean).
    pub ext_mean: Vec<f64>,
    /// Extrinsic variance of the last layer.
    pub ext_var: Vec<f64>,
    /// Cavity means of layers `1..=L`.
    pub trace: Vec<Vec<f64>>,
    /// Most probable amplitude per real dimension at the last layer.
    pub hard: Vec<f64>,
    pub state: EpState,
}

fn check_len(pair: &EpPair, n: usize) -> Result<()> {
    if pair.len() != n || pair.lambda.len() != n {
        return Err(Error::Dimension {
            what: "EP pair",
            expected: n,
            got: pair.len(),
        });
    }
    Ok(())
}

fn check_prior(prior: &SymbolPrior, n: usize) -> Result<()> {
    if prior.n_dims() != n {
        return Err(Error::Dimension {
            what: "prior dimensions",
            expected: n,
            got: prior.n_dims(),
        });
    }
    Ok(())
}

/// Runs EP layers from an explicit initial pair.
pub fn epnet_detect_from(
    prep: &PreparedModel,
    prior: &SymbolPrior,
    init: EpPair,
    schedule: &DampingSchedule,
    config: &EpConfig,
) -> Result<EpOutput> {
    check_prior(prior, prep.n_dims())?;
    check_len(&init, prep.n_dims())?;
    let mut pair = init;
    let mut trace = Vec::with_capacity(schedule.layers());
    let mut last = None;
    for &beta in schedule.raw() {
        let out = ep_layer(prep, prior, &pair, config)?;
        pair = damp(&pair, &out.candidate, beta);
        trace.push(out.cav_mean.clone());
        last = Some(out);
    }
    let last = last.expect("schedule has at least one layer");
    let amps = prior.amplitudes();
    Ok(EpOutput {
        ext_mean: last.cav_mean.clone(),
        ext_var: last.cav_var.clone(),
        trace,
        hard: last.map_index.iter().map(|&i| amps[i]).collect(),
        state: EpState {
            pair,
            mu: last.mu,
            sigma_diag: last.sigma_diag,
            cav_mean: last.cav_mean,
            cav_var: last.cav_var,
            post_mean: last.post_mean,
            post_var: last.post_var,
        },
    })
}

/// EPNet detection with the site pair initialised from `prior`.
pub fn epnet_detect(
    model: &RealChannelModel,
    prior: &SymbolPrior,
    schedule: &DampingSchedule,
    config: &EpConfig,
) -> Result<EpOutput> {
    config.validate()?;
    let prep = PreparedModel::new(model);
    check_prior(prior, prep.n_dims())?;
    epnet_detect_from(&prep, prior, EpPair::from_prior(prior, config), schedule, config)
}

/// Linear MMSE detection with the prior moments: a single EP layer.
pub fn mmse_detect(
    model: &RealChannelModel,
    prior: &SymbolPrior,
    config: &EpConfig,
) -> Result<EpOutput> {
    let one = DampingSchedule::from_raw(vec![0.0]).expect("one finite layer");
    epnet_detect(model, prior, &one, config)
}
