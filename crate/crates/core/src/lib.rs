//! Link-level simulation of an unfolded MIMO turbo receiver.
//!
//! The receiver alternates an expectation-propagation detector whose
//! per-layer damping factors are trainable ([`epdetect`]) with a turbo
//! decoder ([`turbocode`]). Damping factors are trained online by a
//! coordinatewise LSTM optimizer ([`metaopt`]); [`harness`] runs Monte Carlo
//! BER sweeps over all of it.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod channel;
pub mod epdetect;
pub mod error;
pub mod harness;
pub mod logdomain;
pub mod metaopt;
pub mod modem;
pub mod turbocode;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/modem-channel.md")]
    mod modem_channel {}
    #[doc = include_str!("../../../book/src/turbo-code.md")]
    mod turbo_code {}
    #[doc = include_str!("../../../book/src/ep-detection.md")]
    mod ep_detection {}
    #[doc = include_str!("../../../book/src/turbo-receiver.md")]
    mod turbo_receiver {}
    #[doc = include_str!("../../../book/src/learned-optimizer.md")]
    mod learned_optimizer {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
