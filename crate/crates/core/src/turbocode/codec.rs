use serde::{Deserialize, Serialize};

use super::bcjr::{bcjr, MapAlgorithm};
use super::interleaver::Interleaver;
use super::trellis::{rsc_encode, Trellis};
use super::ScaledDecoderWeights;
use crate::error::{Error, Result};

const TAIL: usize = Trellis::MEMORY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DecoderKind {
    MaxLog,
    LogMap,
    /// Max-log-MAP with a trainable weight on every exchanged extrinsic.
    ScaledMaxLog,
}

impl DecoderKind {
    fn algorithm(self) -> MapAlgorithm {
        match self {
            DecoderKind::LogMap => MapAlgorithm::LogMap,
            DecoderKind::MaxLog | DecoderKind::ScaledMaxLog => MapAlgorithm::MaxLog,
        }
    }
}

/// Rate-1/2 parallel concatenated code built from two [`Trellis`] encoders.
///
/// Codeword layout, `V = 2K + 12` bits:
///
/// | bits | content |
/// |------|---------|
/// | `0..K` | systematic bits |
/// | `K..2K` | parity at step `k`: encoder 1 for even `k`, encoder 2 for odd `k` |
/// | `2K..2K+6` | encoder 1 tail, `(x, p)` pairs |
/// | `2K+6..2K+12` | encoder 2 tail, `(x, p)` pairs |
#[derive(Debug, Clone)]
pub struct TurboCodec {
    k: usize,
    interleaver: Interleaver,
    trellis: Trellis,
    kind: DecoderKind,
}

/// Decoder result.
#[derive(Debug, Clone, PartialEq)]
pub struct TurboOutput {
    /// Hard decisions on the message.
    pub bits: Vec<u8>,
    /// Posterior LLRs of the message bits.
    pub posterior: Vec<f64>,
    /// Extrinsic LLR for every transmitted codeword bit, i.e. the decoder's
    /// a-priori feedback to the detector.
    pub extrinsic: Vec<f64>,
}

struct Depunctured {
    sys: Vec<f64>,
    p1: Vec<f64>,
    p2: Vec<f64>,
    tail1: ([f64; TAIL], [f64; TAIL]),
    tail2: ([f64; TAIL], [f64; TAIL]),
}

impl TurboCodec {
    pub fn new(k: usize, kind: DecoderKind) -> Result<Self> {
        if k == 0 {
            return Err(Error::Config("message length must be positive".into()));
        }
        Ok(Self::with_interleaver(Interleaver::for_length(k), kind))
    }

    pub fn with_interleaver(interleaver: Interleaver, kind: DecoderKind) -> Self {
        Self {
            k: interleaver.len(),
            interleaver,
            trellis: Trellis::new(),
            kind,
        }
    }

    pub fn with_kind(&self, kind: DecoderKind) -> Self {
        Self {
            kind,
            ..self.clone()
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn kind(&self) -> DecoderKind {
        self.kind
    }

    pub fn interleaver(&self) -> &Interleaver {
        &self.interleaver
    }

    pub fn trellis(&self) -> &Trellis {
        &self.trellis
    }

    /// Transmitted bits per codeword, V.
    pub fn codeword_len(&self) -> usize {
        2 * self.k + 4 * TAIL
    }

    /// R = K / V.
    pub fn rate(&self) -> f64 {
        self.k as f64 / self.codeword_len() as f64
    }

    pub fn encode(&self, msg: &[u8]) -> Result<Vec<u8>> {
        if msg.len() != self.k {
            return Err(Error::Dimension {
                what: "message length",
                expected: self.k,
                got: msg.len(),
            });
        }
        let c1 = rsc_encode(&self.trellis, msg);
        let c2 = rsc_encode(&self.trellis, &self.interleaver.interleave(msg));
        let mut cw = Vec::with_capacity(self.codeword_len());
        cw.extend_from_slice(msg);
        cw.extend((0..self.k).map(|i| if i % 2 == 0 { c1.parity[i] } else { c2.parity[i] }));
        for c in [&c1, &c2] {
            for t in 0..TAIL {
                cw.push(c.tail_systematic[t]);
                cw.push(c.tail_parity[t]);
            }
        }
        Ok(cw)
    }

    fn depuncture(&self, llrs: &[f64]) -> Depunctured {
        let k = self.k;
        let mut p1 = vec![0.0; k];
        let mut p2 = vec![0.0; k];
        for (i, &l) in llrs[k..2 * k].iter().enumerate() {
            if i % 2 == 0 {
                p1[i] = l;
            } else {
                p2[i] = l;
            }
        }
        let tail = |off: usize| {
            let mut x = [0.0; TAIL];
            let mut p = [0.0; TAIL];
            for t in 0..TAIL {
                x[t] = llrs[off + 2 * t];
                p[t] = llrs[off + 2 * t + 1];
            }
            (x, p)
        };
        Depunctured {
            sys: llrs[..k].to_vec(),
            p1,
            p2,
            tail1: tail(2 * k),
            tail2: tail(2 * k + 2 * TAIL),
        }
    }

    /// Iterative decoding of one codeword.
    ///
    /// `weights` scale the extrinsic LLRs passed between the constituent
    /// decoders, index `2i` for decoder 1 and `2i + 1` for decoder 2 in
    /// iteration `i`. For [`DecoderKind::ScaledMaxLog`] without explicit
    /// weights the default initialisation is used.
    pub fn decode(
        &self,
        llrs: &[f64],
        n_iter: usize,
        weights: Option<&ScaledDecoderWeights>,
    ) -> Result<TurboOutput> {
        if llrs.len() != self.codeword_len() {
            return Err(Error::Dimension {
                what: "codeword LLRs",
                expected: self.codeword_len(),
                got: llrs.len(),
            });
        }
        let default_weights;
        let weights = match (weights, self.kind) {
            (Some(w), _) => Some(w),
            (None, DecoderKind::ScaledMaxLog) => {
                default_weights = ScaledDecoderWeights::new(n_iter);
                Some(&default_weights)
            }
            (None, _) => None,
        };
        if let Some(w) = weights {
            if w.weights.len() != 2 * n_iter {
                return Err(Error::Dimension {
                    what: "decoder weights",
                    expected: 2 * n_iter,
                    got: w.weights.len(),
                });
            }
        }
        let weight = |h: usize| weights.map_or(1.0, |w| w.weights[h]);

        let k = self.k;
        let algo = self.kind.algorithm();
        let d = self.depuncture(llrs);
        let with_tail = |body: &[f64], tail: &[f64; TAIL]| {
            let mut v = Vec::with_capacity(k + TAIL);
            v.extend_from_slice(body);
            v.extend_from_slice(tail);
            v
        };
        let sys1 = with_tail(&d.sys, &d.tail1.0);
        let par1 = with_tail(&d.p1, &d.tail1.1);
        let sys2 = with_tail(&self.interleaver.interleave(&d.sys), &d.tail2.0);
        let par2 = with_tail(&d.p2, &d.tail2.1);

        let mut le2_deint = vec![0.0; k];
        let mut last = None;
        for it in 0..n_iter {
            let mut apriori1 = vec![0.0; k + TAIL];
            apriori1[..k].copy_from_slice(&le2_deint);
            let o1 = bcjr(&sys1, &par1, &apriori1, &self.trellis, algo)?;
            let w1 = weight(2 * it);
            let le1: Vec<f64> = o1.extrinsic[..k].iter().map(|v| w1 * v).collect();
            let mut apriori2 = vec![0.0; k + TAIL];
            apriori2[..k].copy_from_slice(&self.interleaver.interleave(&le1));
            let o2 = bcjr(&sys2, &par2, &apriori2, &self.trellis, algo)?;
            let w2 = weight(2 * it + 1);
            let le2: Vec<f64> = o2.extrinsic[..k].iter().map(|v| w2 * v).collect();
            le2_deint = self.interleaver.deinterleave(&le2);
            last = Some((o1, o2, w1, w2, le1));
        }

        let Some((o1, o2, w1, w2, le1)) = last else {
            return Ok(TurboOutput {
                bits: d.sys.iter().map(|&l| u8::from(l < 0.0)).collect(),
                posterior: d.sys.clone(),
                extrinsic: vec![0.0; self.codeword_len()],
            });
        };
        // both constituent extrinsics enter with their weights, so every
        // weight (including the last) shapes the output
        let sys_ext: Vec<f64> = le1.iter().zip(&le2_deint).map(|(a, b)| a + b).collect();
        let posterior: Vec<f64> = d.sys.iter().zip(&sys_ext).map(|(s, e)| s + e).collect();
        let bits = posterior.iter().map(|&l| u8::from(l < 0.0)).collect();

        // extrinsic w.r.t. the channel: everything the code adds on top of
        // each bit's own observation
        let mut extrinsic = Vec::with_capacity(self.codeword_len());
        extrinsic.extend_from_slice(&sys_ext);
        extrinsic.extend((0..k).map(|i| {
            if i % 2 == 0 {
                w1 * o1.parity_extrinsic[i]
            } else {
                w2 * o2.parity_extrinsic[i]
            }
        }));
        for (o, w) in [(&o1, w1), (&o2, w2)] {
            for t in k..k + TAIL {
                extrinsic.push(w * o.extrinsic[t]);
                extrinsic.push(w * o.parity_extrinsic[t]);
            }
        }
        Ok(TurboOutput {
            bits,
            posterior,
            extrinsic,
        })
    }
}
