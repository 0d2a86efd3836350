//! Online damping training driven by a JSON description of the channel
//! statistics.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::{SystemConfig, CONFIG_SCHEMA};
use crate::channel::{ChannelKind, SnrMode, SnrSpec};
use crate::epdetect::{DampingSchedule, DampingTable, EpConfig, JddReceiver};
use crate::error::{Error, Result};
use crate::metaopt::{
    coded_frame, online_train, train_schedule, uncoded_dataset, LstmOptimizerParams, OnlineOptimizer, OnlineReport,
    OnlineTrainConfig, DEFAULT_LOSS_SCALE,
};
use crate::modem::Constellation;
use crate::turbocode::{ScaledDecoderWeights, TurboCodec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Lstm,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainingConfig {
    pub schema: u32,
    pub system: SystemConfig,
    pub channel: ChannelKind,
    pub snr_mode: SnrMode,
    /// Operating point the labels are generated at.
    pub snr_db: f64,
    /// Labelled channel uses (uncoded) or codewords (coded).
    pub samples: usize,
    #[serde(default = "default_optimizer")]
    pub optimizer: OptimizerKind,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    /// LSTM steps per epoch.
    #[serde(default = "default_steps")]
    pub steps: usize,
    #[serde(default = "default_adam_lr")]
    pub adam_lr: f64,
    #[serde(default = "default_loss_scale")]
    pub loss_scale: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub ep: EpConfig,
}

fn default_optimizer() -> OptimizerKind {
    OptimizerKind::Lstm
}

fn default_epochs() -> usize {
    100
}

fn default_steps() -> usize {
    20
}

fn default_adam_lr() -> f64 {
    0.1
}

fn default_loss_scale() -> f64 {
    DEFAULT_LOSS_SCALE
}

/// Trained schedules with the per-stage training reports.
#[derive(Debug, Clone)]
pub struct TrainingOutcome {
    pub table: DampingTable,
    pub reports: Vec<OnlineReport>,
}

impl TrainingConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Schema(format!("config schema {} (expected {CONFIG_SCHEMA})", self.schema)));
        }
        let s = &self.system;
        Constellation::new(s.order)?;
        if s.nt == 0 || s.nr == 0 || s.layers == 0 || s.stages == 0 {
            return Err(Error::Config("nt, nr, layers and stages must be positive".into()));
        }
        if s.k.is_none() && s.stages != 1 {
            return Err(Error::Config("uncoded systems have a single stage".into()));
        }
        if let Some(k) = s.k {
            TurboCodec::new(k, s.decoder)?;
        }
        self.channel.validate()?;
        self.ep.validate()?;
        if !self.snr_db.is_finite() {
            return Err(Error::Config("snr_db must be finite".into()));
        }
        if self.steps == 0 || !(self.adam_lr > 0.0) || !(self.loss_scale > 0.0) {
            return Err(Error::Config("steps, adam_lr and loss_scale must be positive".into()));
        }
        Ok(())
    }

    fn snr(&self, rate: f64) -> SnrSpec {
        SnrSpec::new(self.snr_mode, self.snr_db, rate, self.system.order)
    }

    fn online_config(&self) -> OnlineTrainConfig {
        OnlineTrainConfig {
            epochs: self.epochs,
            loss_scale: self.loss_scale,
            ..Default::default()
        }
    }
}

/// Generates labels from the configured channel statistics and trains one
/// schedule per stage. `theta` is required for the LSTM optimizer.
pub fn run_online_training(cfg: &TrainingConfig, theta: Option<&LstmOptimizerParams>) -> Result<TrainingOutcome> {
    cfg.validate()?;
    if cfg.samples == 0 {
        return Err(Error::EmptyDataset);
    }
    let optimizer = match (cfg.optimizer, theta) {
        (OptimizerKind::Lstm, Some(theta)) => OnlineOptimizer::Lstm { theta, steps: cfg.steps },
        (OptimizerKind::Lstm, None) => return Err(Error::Config("the LSTM optimizer needs Θ".into())),
        (OptimizerKind::Adam, _) => OnlineOptimizer::Adam { lr: cfg.adam_lr },
    };
    let s = &cfg.system;
    let c = Constellation::new(s.order)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let online = cfg.online_config();
    let reports = match s.k {
        None => {
            let data = uncoded_dataset(s.nt, s.nr, &c, cfg.channel, &cfg.snr(1.0), cfg.samples, &cfg.ep, &mut rng)?;
            vec![train_schedule(&data, s.layers, optimizer, &online)?]
        }
        Some(k) => {
            let codec = TurboCodec::new(k, s.decoder)?;
            let snr = cfg.snr(k as f64 / codec.codeword_len() as f64);
            let rx = JddReceiver {
                codec,
                constellation: c,
                schedules: vec![DampingSchedule::from_raw(vec![cfg.online_config().init_raw; s.layers])?; s.stages],
                ep: cfg.ep,
                decoder_iters: s.decoder_iters,
                decoder_weights: s.decoder_weights.clone().map(|weights| ScaledDecoderWeights { weights }),
            };
            let frames = (0..cfg.samples)
                .map(|_| coded_frame(&rx, s.nt, s.nr, cfg.channel, &snr, &mut rng))
                .collect::<Result<Vec<_>>>()?;
            online_train(&frames, &rx, optimizer, &online)?
        }
    };
    let schedules: Vec<_> = reports.iter().map(|r| r.schedule.clone()).collect();
    Ok(TrainingOutcome {
        table: DampingTable::from_schedules(&schedules),
        reports,
    })
}
