//! Experiment description, loaded from a versioned JSON document.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ChannelKind, SnrMode, SnrSpec};
use crate::epdetect::{DampingSchedule, DampingTable, EpConfig};
use crate::error::{Error, Result};
use crate::modem::Constellation;
use crate::turbocode::{DecoderKind, ScaledDecoderWeights, TurboCodec};

pub const CONFIG_SCHEMA: u32 = 1;

/// Lowest error count accepted by the stopping rule.
pub const MIN_REPORTED_ERRORS: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    pub nt: usize,
    pub nr: usize,
    /// Constellation order M.
    pub order: usize,
    /// Message length of the turbo code. `None` runs uncoded detection.
    #[serde(default)]
    pub k: Option<usize>,
    /// Detection/decoding stages I of the turbo receiver.
    #[serde(default = "one")]
    pub stages: usize,
    /// EP layers L used where a variant does not fix its own depth.
    #[serde(default = "five")]
    pub layers: usize,
    #[serde(default = "default_decoder")]
    pub decoder: DecoderKind,
    #[serde(default = "default_decoder_iters")]
    pub decoder_iters: usize,
    /// Extrinsic weights for the scaled max-log decoder.
    #[serde(default)]
    pub decoder_weights: Option<Vec<f64>>,
}

fn one() -> usize {
    1
}

fn five() -> usize {
    5
}

fn default_decoder() -> DecoderKind {
    DecoderKind::MaxLog
}

fn default_decoder_iters() -> usize {
    6
}

/// Detector of one receiver variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Detector {
    Mmse,
    /// EP with the same damping on every layer.
    Ep { layers: usize, damping: f64 },
    /// EPNet with per-layer damping from a damping-table file, or from the
    /// built-in reference table when no file is given.
    Epnet {
        #[serde(default)]
        table: Option<PathBuf>,
    },
    /// EPNet with inline per-layer effective damping, shared by all stages.
    Schedule { damping: Vec<f64> },
    /// Exhaustive search; uncoded systems only.
    Ml,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariantSpec {
    #[serde(default)]
    pub name: Option<String>,
    #[serde(flatten)]
    pub detector: Detector,
}

impl VariantSpec {
    pub fn new(detector: Detector) -> Self {
        Self { name: None, detector }
    }

    pub fn named(name: &str, detector: Detector) -> Self {
        Self {
            name: Some(name.to_string()),
            detector,
        }
    }

    pub fn label(&self) -> String {
        if let Some(n) = &self.name {
            return n.clone();
        }
        match &self.detector {
            Detector::Mmse => "mmse".into(),
            Detector::Ep { layers, damping } => format!("ep{layers}-{damping}"),
            Detector::Epnet { .. } => "epnet".into(),
            Detector::Schedule { .. } => "schedule".into(),
            Detector::Ml => "ml".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StoppingRule {
    /// A point stops once every variant has seen this many bit errors.
    pub min_errors: u64,
    /// ... or simulated this many bits.
    pub max_bits: u64,
}

impl Default for StoppingRule {
    fn default() -> Self {
        Self {
            min_errors: 200,
            max_bits: 10_000_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema: u32,
    pub system: SystemConfig,
    pub channel: ChannelKind,
    pub snr_mode: SnrMode,
    pub snr_db: Vec<f64>,
    pub variants: Vec<VariantSpec>,
    #[serde(default)]
    pub stopping: StoppingRule,
    #[serde(default)]
    pub seed: u64,
    /// Frames drawn per parallel batch. Results do not depend on the
    /// worker count, only on this value.
    #[serde(default = "default_batch")]
    pub batch: usize,
    #[serde(default)]
    pub ep: EpConfig,
}

fn default_batch() -> usize {
    256
}

impl ExperimentConfig {
    /// Uncoded experiment with default stopping rule and seed 0.
    pub fn uncoded(
        nt: usize,
        nr: usize,
        order: usize,
        channel: ChannelKind,
        snr_mode: SnrMode,
        snr_db: Vec<f64>,
        variants: Vec<VariantSpec>,
    ) -> Self {
        Self {
            schema: CONFIG_SCHEMA,
            system: SystemConfig {
                nt,
                nr,
                order,
                k: None,
                stages: 1,
                layers: 5,
                decoder: default_decoder(),
                decoder_iters: default_decoder_iters(),
                decoder_weights: None,
            },
            channel,
            snr_mode,
            snr_db,
            variants,
            stopping: StoppingRule::default(),
            seed: 0,
            batch: default_batch(),
            ep: EpConfig::default(),
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file. Relative table paths are resolved against the
    /// directory of the file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        for v in &mut cfg.variants {
            if let Detector::Epnet { table: Some(t) } = &mut v.detector {
                if t.is_relative() {
                    *t = base.join(&*t);
                }
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serialises")
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != CONFIG_SCHEMA {
            return Err(Error::Schema(format!("config schema {} (expected {CONFIG_SCHEMA})", self.schema)));
        }
        let s = &self.system;
        if s.nt == 0 || s.nr == 0 {
            return Err(Error::Config("nt and nr must be positive".into()));
        }
        Constellation::new(s.order)?;
        if s.stages == 0 || s.layers == 0 {
            return Err(Error::Config("stages and layers must be positive".into()));
        }
        if s.k.is_none() && s.stages != 1 {
            return Err(Error::Config("uncoded systems have a single stage".into()));
        }
        if let Some(k) = s.k {
            TurboCodec::new(k, s.decoder)?;
            if s.decoder_iters == 0 {
                return Err(Error::Config("decoder_iters must be positive".into()));
            }
            if let Some(w) = &s.decoder_weights {
                if w.len() != 2 * s.decoder_iters {
                    return Err(Error::Config(format!(
                        "{} decoder weights given, {} needed",
                        w.len(),
                        2 * s.decoder_iters
                    )));
                }
            }
        }
        self.channel.validate()?;
        self.ep.validate()?;
        if self.snr_db.is_empty() {
            return Err(Error::Config("SNR grid is empty".into()));
        }
        if self.snr_db.iter().any(|x| x.is_nan()) || self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("SNR grid must be strictly increasing".into()));
        }
        if self.variants.is_empty() {
            return Err(Error::Config("no receiver variants".into()));
        }
        let mut labels: Vec<String> = self.variants.iter().map(VariantSpec::label).collect();
        labels.sort();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Config("variant names must be unique".into()));
        }
        for v in &self.variants {
            match &v.detector {
                Detector::Ep { layers, damping } => {
                    if *layers == 0 || !(*damping > 0.0 && *damping < 1.0) {
                        return Err(Error::Config(format!("variant {}: need layers ≥ 1, damping in (0, 1)", v.label())));
                    }
                }
                Detector::Schedule { damping } => {
                    DampingSchedule::from_effective(damping)
                        .map_err(|e| Error::Config(format!("variant {}: {e}", v.label())))?;
                }
                Detector::Ml if s.k.is_some() => {
                    return Err(Error::Config("ml has no soft output and cannot drive the decoder".into()));
                }
                _ => {}
            }
        }
        if self.stopping.min_errors < MIN_REPORTED_ERRORS {
            return Err(Error::Config(format!(
                "stopping.min_errors must be at least {MIN_REPORTED_ERRORS}"
            )));
        }
        if self.stopping.max_bits == 0 || self.batch == 0 {
            return Err(Error::Config("max_bits and batch must be positive".into()));
        }
        Ok(())
    }

    pub fn constellation(&self) -> Constellation {
        Constellation::new(self.system.order).expect("validated order")
    }

    pub fn code_rate(&self) -> f64 {
        match self.system.k {
            Some(k) => k as f64 / TurboCodec::new(k, self.system.decoder).expect("validated").codeword_len() as f64,
            None => 1.0,
        }
    }

    pub fn snr(&self, db: f64) -> SnrSpec {
        SnrSpec::new(self.snr_mode, db, self.code_rate(), self.system.order)
    }

    pub fn codec(&self) -> Option<TurboCodec> {
        self.system.k.map(|k| TurboCodec::new(k, self.system.decoder).expect("validated"))
    }

    pub fn decoder_weights(&self) -> Option<ScaledDecoderWeights> {
        self.system
            .decoder_weights
            .as_ref()
            .map(|w| ScaledDecoderWeights { weights: w.clone() })
    }

    /// Per-stage schedules of a variant at one SNR point.
    pub fn schedules(&self, variant: &VariantSpec, snr: &SnrSpec) -> Result<Vec<DampingSchedule>> {
        let stages = self.system.stages;
        let sched = match &variant.detector {
            Detector::Mmse => vec![DampingSchedule::from_raw(vec![0.0])?; stages],
            Detector::Ep { layers, damping } => vec![DampingSchedule::constant(*layers, *damping)?; stages],
            Detector::Epnet { table: None } => {
                vec![crate::epdetect::reference_schedule(snr.uncoded_eb_n0_db()); stages]
            }
            Detector::Epnet { table: Some(path) } => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
                let table = DampingTable::from_json(&text)?.to_schedules()?;
                if table.len() < stages {
                    return Err(Error::Config(format!(
                        "{} has {} stages, {stages} needed",
                        path.display(),
                        table.len()
                    )));
                }
                table[..stages].to_vec()
            }
            Detector::Schedule { damping } => vec![DampingSchedule::from_effective(damping)?; stages],
            Detector::Ml => Vec::new(),
        };
        Ok(sched)
    }
}
