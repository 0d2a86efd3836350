//! Online training of EPNet damping schedules from locally generated labels.

use rand::Rng;

use super::adam::Adam;
use super::lstm::LstmOptimizerParams;
use super::meta::apply_optimizer;
use crate::channel::{to_real, transmit, ChannelKind, RealChannelModel, SnrSpec};
use crate::epdetect::{
    damp, ep_layer, initial_priors, jdd_stage, modulate_codeword, DampingSchedule, EpConfig, EpPair, FrameLayout,
    JddReceiver, PreparedModel,
};
use crate::error::{Error, Result};
use crate::modem::{map_bits, uniform_prior, Constellation, SymbolPrior};

/// One labelled detection problem.
#[derive(Debug, Clone)]
pub struct TrainingSample {
    pub prep: PreparedModel,
    pub prior: SymbolPrior,
    pub init: EpPair,
    /// Transmitted real-domain vector.
    pub x: Vec<f64>,
}

impl TrainingSample {
    pub fn new(model: &RealChannelModel, prior: SymbolPrior, x: Vec<f64>, config: &EpConfig) -> Result<Self> {
        if prior.n_dims() != model.n_dims() || x.len() != model.n_dims() {
            return Err(Error::Dimension {
                what: "training sample",
                expected: model.n_dims(),
                got: x.len().min(prior.n_dims()),
            });
        }
        Ok(Self {
            prep: PreparedModel::new(model),
            init: EpPair::from_prior(&prior, config),
            prior,
            x,
        })
    }
}

#[derive(Debug, Clone)]
pub struct EpnetDataset {
    pub samples: Vec<TrainingSample>,
    pub config: EpConfig,
}

/// Random uncoded frames with uniform priors.
#[allow(clippy::too_many_arguments)]
pub fn uncoded_dataset<R: Rng + ?Sized>(
    nt: usize,
    nr: usize,
    c: &Constellation,
    channel: ChannelKind,
    snr: &SnrSpec,
    n: usize,
    config: &EpConfig,
    rng: &mut R,
) -> Result<EpnetDataset> {
    let samples = (0..n)
        .map(|_| {
            let ch = channel.sample(nt, nr, rng)?;
            let bits: Vec<u8> = (0..nt * c.bits_per_symbol()).map(|_| rng.random_range(0..2)).collect();
            let x = map_bits(&bits, c)?;
            let y = transmit(&x, &ch, snr, rng)?;
            let model = to_real(&ch.effective(snr), &y);
            TrainingSample::new(&model, uniform_prior(c, 2 * nt), crate::channel::complex_to_real(&x), config)
        })
        .collect::<Result<_>>()?;
    Ok(EpnetDataset {
        samples,
        config: *config,
    })
}

struct Forward {
    /// Pair entering each layer, plus the pair after the last one.
    pairs: Vec<EpPair>,
    candidates: Vec<EpPair>,
    errors: Vec<f64>,
}

fn squared_error(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn forward_from(
    sample: &TrainingSample,
    beta: &[f64],
    first: usize,
    start: EpPair,
    config: &EpConfig,
    keep: bool,
) -> Result<Forward> {
    let mut pair = start;
    let n_layers = beta.len() - first;
    let mut out = Forward {
        pairs: Vec::with_capacity(if keep { n_layers + 1 } else { 0 }),
        candidates: Vec::with_capacity(if keep { n_layers } else { 0 }),
        errors: Vec::with_capacity(n_layers),
    };
    for &b in &beta[first..] {
        let layer = ep_layer(&sample.prep, &sample.prior, &pair, config)?;
        out.errors.push(squared_error(&layer.cav_mean, &sample.x));
        let next = damp(&pair, &layer.candidate, b);
        if keep {
            out.pairs.push(pair);
            out.candidates.push(layer.candidate);
        }
        pair = next;
    }
    if keep {
        out.pairs.push(pair);
    }
    Ok(out)
}

fn check_dataset(dataset: &EpnetDataset) -> Result<()> {
    if dataset.samples.is_empty() {
        Err(Error::EmptyDataset)
    } else {
        Ok(())
    }
}

/// `f_EP(β)`: squared error of the per-layer cavity means, averaged over
/// layers and samples.
pub fn epnet_loss(schedule: &DampingSchedule, dataset: &EpnetDataset) -> Result<f64> {
    check_dataset(dataset)?;
    let beta = schedule.raw();
    let mut total = 0.0;
    for s in &dataset.samples {
        let f = forward_from(s, beta, 0, s.init.clone(), &dataset.config, false)?;
        total += f.errors.iter().sum::<f64>();
    }
    Ok(total / (beta.len() * dataset.samples.len()) as f64)
}

/// `f_EP` and its central finite-difference gradient in the raw damping
/// parameters. Layers before the perturbed one are shared between the
/// baseline and the perturbed runs.
pub fn epnet_loss_and_grad(schedule: &DampingSchedule, dataset: &EpnetDataset, step: f64) -> Result<(f64, Vec<f64>)> {
    check_dataset(dataset)?;
    if !(step > 0.0) {
        return Err(Error::Config(format!("finite-difference step {step} must be positive")));
    }
    let beta = schedule.raw();
    let layers = beta.len();
    let cfg = &dataset.config;
    let mut total = 0.0;
    let mut grad = vec![0.0; layers];
    for s in &dataset.samples {
        let base = forward_from(s, beta, 0, s.init.clone(), cfg, true)?;
        total += base.errors.iter().sum::<f64>();
        for l in 0..layers {
            let mut diff = 0.0;
            for sign in [1.0, -1.0] {
                let start = damp(&base.pairs[l], &base.candidates[l], beta[l] + sign * step);
                let tail = forward_from(s, beta, l + 1, start, cfg, false)?;
                diff += sign * tail.errors.iter().sum::<f64>();
            }
            grad[l] += diff / (2.0 * step);
        }
    }
    let norm = (layers * dataset.samples.len()) as f64;
    grad.iter_mut().for_each(|g| *g /= norm);
    Ok((total / norm, grad))
}

#[derive(Debug, Clone, Copy)]
pub enum OnlineOptimizer<'a> {
    /// Learned optimizer, `steps` updates per epoch from a fresh state.
    Lstm {
        theta: &'a LstmOptimizerParams,
        steps: usize,
    },
    /// One Adam update per epoch.
    Adam { lr: f64 },
}

/// Default multiplier on `f_EP` before it reaches the optimizer.
pub const DEFAULT_LOSS_SCALE: f64 = 2e4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OnlineTrainConfig {
    pub epochs: usize,
    /// Starting raw damping for every layer.
    pub init_raw: f64,
    pub fd_step: f64,
    /// Stop once the loss improved by less than this fraction over
    /// `plateau_window` epochs. A zero window disables early stopping.
    pub plateau_tol: f64,
    pub plateau_window: usize,
    /// The optimizer minimises `loss_scale · f_EP`; reported curves are
    /// unscaled.
    pub loss_scale: f64,
}

impl Default for OnlineTrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            init_raw: 1.0,
            fd_step: 1e-3,
            plateau_tol: 1e-4,
            plateau_window: 10,
            loss_scale: DEFAULT_LOSS_SCALE,
        }
    }
}

#[derive(Debug, Clone)]
pub struct OnlineReport {
    pub schedule: DampingSchedule,
    /// Loss before training followed by the loss after each epoch.
    pub curve: Vec<f64>,
    /// Number of loss-and-gradient evaluations performed.
    pub evaluations: usize,
}

impl OnlineReport {
    pub fn epochs_run(&self) -> usize {
        self.curve.len() - 1
    }
}

/// Scaled loss and gradient at one point.
type Evaluation = (f64, Vec<f64>);

/// Trains one `layers`-deep schedule on `dataset`.
pub fn train_schedule(
    dataset: &EpnetDataset,
    layers: usize,
    optimizer: OnlineOptimizer<'_>,
    config: &OnlineTrainConfig,
) -> Result<OnlineReport> {
    check_dataset(dataset)?;
    let mut beta = DampingSchedule::from_raw(vec![config.init_raw; layers])?.raw().to_vec();
    let scale = config.loss_scale;
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Config(format!("loss scale {scale} must be positive")));
    }
    let mut cache: Option<(Vec<f64>, Evaluation)> = None;
    let mut evaluations = 0;
    let mut eval = |b: &[f64]| -> Result<(f64, Vec<f64>)> {
        if let Some((cb, r)) = &cache {
            if cb.as_slice() == b {
                return Ok(r.clone());
            }
        }
        evaluations += 1;
        let schedule = DampingSchedule::from_raw(b.to_vec())?;
        let (l, g) = epnet_loss_and_grad(&schedule, dataset, config.fd_step)?;
        let r = (l * scale, g.into_iter().map(|g| g * scale).collect::<Vec<_>>());
        cache = Some((b.to_vec(), r.clone()));
        Ok(r)
    };
    let mut curve = vec![eval(&beta)?.0 / scale];
    let mut adam = Adam::new(layers, 0.0);
    if let OnlineOptimizer::Adam { lr } = optimizer {
        adam.lr = lr;
    }
    for epoch in 1..=config.epochs {
        let loss = match optimizer {
            OnlineOptimizer::Lstm { theta, steps } => {
                let traj = apply_optimizer(theta, &mut eval, &beta, steps)?;
                let (b, l) = traj.last();
                beta = b.to_vec();
                l / scale
            }
            OnlineOptimizer::Adam { .. } => {
                let (_, g) = eval(&beta)?;
                let mut next = beta.clone();
                adam.step(&mut next, &g);
                let (l, _) = eval(&next)?;
                if !l.is_finite() {
                    break;
                }
                beta = next;
                l / scale
            }
        };
        curve.push(loss);
        let w = config.plateau_window;
        if w > 0 && epoch >= w {
            let before = curve[epoch - w];
            if before - loss <= config.plateau_tol * before.abs() {
                break;
            }
        }
    }
    Ok(OnlineReport {
        schedule: DampingSchedule::from_raw(beta)?,
        curve,
        evaluations,
    })
}

/// A coded transmission: one real model and one real symbol vector per
/// channel use.
#[derive(Debug, Clone)]
pub struct CodedFrame {
    pub message: Vec<u8>,
    pub models: Vec<RealChannelModel>,
    pub x: Vec<Vec<f64>>,
}

/// Encodes a random message and sends it over `channel`, one fresh
/// realisation per channel use.
pub fn coded_frame<R: Rng + ?Sized>(
    receiver: &JddReceiver,
    nt: usize,
    nr: usize,
    channel: ChannelKind,
    snr: &SnrSpec,
    rng: &mut R,
) -> Result<CodedFrame> {
    let c = &receiver.constellation;
    let message: Vec<u8> = (0..receiver.codec.k()).map(|_| rng.random_range(0..2)).collect();
    let codeword = receiver.codec.encode(&message)?;
    let layout = FrameLayout::new(&receiver.codec, c, nt);
    let mut models = Vec::with_capacity(layout.uses);
    let mut xs = Vec::with_capacity(layout.uses);
    for x in modulate_codeword(&codeword, &layout, c)? {
        let ch = channel.sample(nt, nr, rng)?;
        let y = transmit(&x, &ch, snr, rng)?;
        models.push(to_real(&ch.effective(snr), &y));
        xs.push(crate::channel::complex_to_real(&x));
    }
    Ok(CodedFrame {
        message,
        models,
        x: xs,
    })
}

/// Trains the schedules of every JDD stage in order. Stage `i` is trained
/// on priors produced by the already trained stages `1..i`.
pub fn online_train(
    frames: &[CodedFrame],
    receiver: &JddReceiver,
    optimizer: OnlineOptimizer<'_>,
    config: &OnlineTrainConfig,
) -> Result<Vec<OnlineReport>> {
    if frames.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let mut rx = receiver.clone();
    let mut priors: Vec<Vec<SymbolPrior>> = frames.iter().map(|f| initial_priors(&rx, &f.models)).collect();
    let mut reports = Vec::with_capacity(rx.schedules.len());
    for stage in 0..rx.schedules.len() {
        let samples = frames
            .iter()
            .zip(&priors)
            .flat_map(|(f, p)| f.models.iter().zip(p).zip(&f.x))
            .map(|((m, p), x)| TrainingSample::new(m, p.clone(), x.clone(), &rx.ep))
            .collect::<Result<Vec<_>>>()?;
        let dataset = EpnetDataset {
            samples,
            config: rx.ep,
        };
        let report = train_schedule(&dataset, rx.schedules[stage].layers(), optimizer, config)?;
        rx.schedules[stage] = report.schedule.clone();
        reports.push(report);
        if stage + 1 < rx.schedules.len() {
            priors = frames
                .iter()
                .zip(&priors)
                .map(|(f, p)| Ok(jdd_stage(&f.models, p, &rx.schedules[stage], &rx)?.next_priors))
                .collect::<Result<_>>()?;
        }
    }
    Ok(reports)
}
