//! Rate-1/2 turbo code: 8-state RSC constituents, QPP interleaving,
//! alternating parity puncturing and iterative BCJR decoding (max-log-MAP,
//! log-MAP, and max-log-MAP with trained extrinsic scaling).

mod bcjr;
mod codec;
mod interleaver;
mod scaled;
mod trellis;

pub use bcjr::{bcjr, BcjrOutput, MapAlgorithm};
pub use codec::{DecoderKind, TurboCodec, TurboOutput};
pub use interleaver::Interleaver;
pub use scaled::{
    awgn_bpsk_llrs, fit_scaled_weights, log_map_dataset, FitSample, ScaledDecoderWeights,
    INITIAL_WEIGHT,
};
pub use trellis::{rsc_encode, RscOutput, Trellis};
