//! Multidimensional index modulation over time slots, antennas and RF mirrors.
//!
//! This crate holds the deterministic and numerical core of the link-level
//! simulator: scheme parametrization and bit budgets, combination ranking,
//! constellations, codeword construction, Rayleigh channel realizations with
//! imperfect estimates, exhaustive maximum-likelihood detection, rate analysis
//! and the single-frame Monte Carlo trial. It is `no_std` (with `alloc`) so the
//! same code can run on targets without an operating system; IO, parallelism
//! and the command line live in the `mdim` companion crate.
#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod channel;
pub mod combinatorics;
pub mod constellation;
pub mod detector;
mod error;
pub mod linalg;
pub mod rate;
pub mod scheme;
pub mod signal;
pub mod trial;

pub use num_complex::Complex64;

pub use channel::{
    corrupt_estimate, draw_channel, snr_to_sigma, transmit, ChannelModel, ChannelRealization, NoiseModel,
};
pub use combinatorics::{binomial, floor_log2_binomial, rank_combination, unrank_combination};
pub use constellation::{Constellation, ConstellationKind};
pub use detector::{metric, ml_complexity, ml_detect, DetectionResult, Detector};
pub use error::{Error, Result};
pub use linalg::CMatrix;
pub use rate::{rate, rate_sweep, rate_sweep_beta, t_opt, RateCurve};
pub use scheme::{bit_budget, partition_bits, BitBudget, Bits, FrameBits, Scheme, SchemeConfig, SlotBits};
pub use signal::{
    build_frame, enumerate_codebook, Codebook, CodebookIter, SlotSignal, TransmitFrame, DEFAULT_CODEBOOK_CAP,
};
pub use trial::{frame_seed, run_frame, FrameOutcome, TrialSetup};
