//! Joint detection and decoding: EPNet and the turbo decoder exchange
//! extrinsic LLRs over several stages.

use super::ep::{epnet_detect, DampingSchedule, EpConfig};
use crate::channel::RealChannelModel;
use crate::error::{Error, Result};
use crate::modem::{demap_llr, llr_to_prior, map_bits, uniform_prior, Complex64, Constellation, LlrFrame, SymbolPrior};
use crate::turbocode::{ScaledDecoderWeights, TurboCodec, TurboOutput};

/// How one codeword is spread over channel uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FrameLayout {
    pub codeword_len: usize,
    pub bits_per_use: usize,
    pub uses: usize,
}

impl FrameLayout {
    pub fn new(codec: &TurboCodec, c: &Constellation, nt: usize) -> Self {
        let bits_per_use = nt * c.bits_per_symbol();
        let codeword_len = codec.codeword_len();
        Self {
            codeword_len,
            bits_per_use,
            uses: codeword_len.div_ceil(bits_per_use),
        }
    }

    /// Zero bits appended after the codeword to fill the last channel use.
    pub fn filler(&self) -> usize {
        self.uses * self.bits_per_use - self.codeword_len
    }
}

/// Maps a codeword onto per-use symbol vectors, zero-padding the last use.
pub fn modulate_codeword(codeword: &[u8], layout: &FrameLayout, c: &Constellation) -> Result<Vec<Vec<Complex64>>> {
    if codeword.len() != layout.codeword_len {
        return Err(Error::Dimension {
            what: "codeword length",
            expected: layout.codeword_len,
            got: codeword.len(),
        });
    }
    let mut bits = codeword.to_vec();
    bits.resize(layout.uses * layout.bits_per_use, 0);
    bits.chunks(layout.bits_per_use).map(|b| map_bits(b, c)).collect()
}

#[derive(Debug, Clone)]
pub struct JddReceiver {
    pub codec: TurboCodec,
    pub constellation: Constellation,
    /// One schedule per stage.
    pub schedules: Vec<DampingSchedule>,
    pub ep: EpConfig,
    pub decoder_iters: usize,
    pub decoder_weights: Option<ScaledDecoderWeights>,
}

#[derive(Debug, Clone)]
pub struct StageOutput {
    /// Extrinsic detector LLRs for the codeword, filler removed.
    pub detector_llrs: Vec<f64>,
    pub decoder: TurboOutput,
    /// Per-use priors for the next stage.
    pub next_priors: Vec<SymbolPrior>,
}

/// Stage-1 priors: uniform on every use.
pub fn initial_priors(receiver: &JddReceiver, models: &[RealChannelModel]) -> Vec<SymbolPrior> {
    models
        .iter()
        .map(|m| uniform_prior(&receiver.constellation, m.n_dims()))
        .collect()
}

/// One detect → demap → decode → remap pass.
pub fn jdd_stage(
    models: &[RealChannelModel],
    priors: &[SymbolPrior],
    schedule: &DampingSchedule,
    receiver: &JddReceiver,
) -> Result<StageOutput> {
    let c = &receiver.constellation;
    let nt = models.first().map_or(0, |m| m.n_dims() / 2);
    let layout = FrameLayout::new(&receiver.codec, c, nt);
    if models.len() != layout.uses || priors.len() != layout.uses {
        return Err(Error::Dimension {
            what: "channel uses",
            expected: layout.uses,
            got: models.len().min(priors.len()),
        });
    }
    let mut llrs = Vec::with_capacity(layout.uses * layout.bits_per_use);
    for (m, p) in models.iter().zip(priors) {
        let out = epnet_detect(m, p, schedule, &receiver.ep)?;
        llrs.extend(demap_llr(&out.ext_mean, &out.ext_var, None, c)?.into_vec());
    }
    llrs.truncate(layout.codeword_len);
    let decoder = receiver
        .codec
        .decode(&llrs, receiver.decoder_iters, receiver.decoder_weights.as_ref())?;
    let mut apriori = decoder.extrinsic.clone();
    apriori.resize(layout.uses * layout.bits_per_use, 0.0);
    let next_priors = apriori
        .chunks(layout.bits_per_use)
        .map(|chunk| llr_to_prior(&LlrFrame::new(chunk.to_vec(), c.bits_per_symbol())?, c))
        .collect::<Result<_>>()?;
    Ok(StageOutput {
        detector_llrs: llrs,
        decoder,
        next_priors,
    })
}

/// Runs `n_stages` stages and returns the output of each.
pub fn jdd_receive(models: &[RealChannelModel], receiver: &JddReceiver, n_stages: usize) -> Result<Vec<StageOutput>> {
    if n_stages == 0 || n_stages > receiver.schedules.len() {
        return Err(Error::Config(format!(
            "{n_stages} stages requested, {} schedules configured",
            receiver.schedules.len()
        )));
    }
    let mut priors = initial_priors(receiver, models);
    let mut stages = Vec::with_capacity(n_stages);
    for schedule in &receiver.schedules[..n_stages] {
        let out = jdd_stage(models, &priors, schedule, receiver)?;
        priors = out.next_priors.clone();
        stages.push(out);
    }
    Ok(stages)
}
