//! Secure-key-rate lower bounds for the two-way LM05 quantum key
//! distribution protocol with weak coherent pulses and decoy states.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`] models the honest two-way fiber link: per-photon-number
//!   yields and error rates, and the gains/QBERs an experiment observes.
//! * [`finite`] turns the observables of a signal and two decoy intensities
//!   into bounds on the single- and double-photon yields and errors.
//! * [`combined`] bounds the single plus double photon yield jointly and
//!   derives an effective gain and error from it.
//! * [`rates`] holds the privacy-amplification functions and the key-rate
//!   formulas (asymptotic, both finite-decoy approaches, non-decoy, BB84).
//! * [`optimize`] maximizes a rate over the signal intensity and locates
//!   cutoff and crossing distances.
//! * [`sampler`] draws finite-statistics observables by Monte-Carlo.
//! * [`cli`] is the command-line front end producing CSV.

// Negated comparisons reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod channel;
pub mod cli;
pub mod combined;
mod error;
pub mod finite;
pub mod optimize;
pub mod rates;
pub mod sampler;

pub use channel::{ChannelParams, IntensitySet, Observables};
pub use combined::CombinedBounds;
pub use error::{Error, Result};
pub use finite::{FiniteBounds, Y1UpperMode};
pub use optimize::{OptimizeSpec, Optimum};
pub use rates::{RateFormula, RatePoint};
pub use sampler::SampleSpec;
