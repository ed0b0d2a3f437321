//! One Monte Carlo frame: payload, channel, estimate, noise, detection.
//!
//! Every frame draws from its own ChaCha8 stream seeded by [`frame_seed`], so
//! results do not depend on how frames are distributed over workers.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::channel::{corrupt_estimate, draw_channel, transmit, ChannelModel, NoiseModel};
use crate::detector::Detector;
use crate::error::Result;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of frame `frame` at sweep point `point`:
/// `s(s(s(master) ^ point) ^ frame)` with `s` the SplitMix64 step.
pub fn frame_seed(master: u64, point: u64, frame: u64) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ point) ^ frame)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSetup {
    pub n_rx: usize,
    /// Per-dimension noise variance.
    pub sigma_n_sq: f64,
    /// Receiver uses an estimate with error variance equal to the noise variance.
    pub cee: bool,
    pub channel: ChannelModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct FrameOutcome {
    pub bit_errors: u64,
    pub bits: u64,
}

/// Runs a single frame through the link and counts bit errors.
pub fn run_frame(detector: &Detector, setup: &TrialSetup, seed: u64) -> Result<FrameOutcome> {
    let book = detector.codebook();
    let cfg = *book.config();
    let frame_bits = book.budget().frame_bits;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let payload = rng.next_u64() & (book.len() - 1);
    let frame = book.frame(payload);
    let mut ch = draw_channel(&cfg, setup.n_rx, setup.channel, &mut rng);
    if setup.cee {
        ch = corrupt_estimate(&ch, setup.sigma_n_sq, &mut rng)?;
    }
    let noise = NoiseModel {
        sigma_n_sq: setup.sigma_n_sq,
    };
    let y = transmit(&ch, &frame, noise, &mut rng)?;
    let detected = detector.detect(&y, &ch.estimate)?;
    Ok(FrameOutcome {
        bit_errors: (detected.codeword_index ^ payload).count_ones() as u64,
        bits: frame_bits as u64,
    })
}
