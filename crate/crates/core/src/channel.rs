//! Rayleigh fading realizations, the frame-level block-circulant channel,
//! imperfect estimates and AWGN.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::scheme::SchemeConfig;
use crate::signal::TransmitFrame;

/// How channel taps are generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ChannelModel {
    /// i.i.d. CN(0, 1/L) entries per tap.
    #[default]
    Rayleigh,
    /// All-zero channel. Only useful for testing the harness.
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    /// `taps[i]` is `n_rx x (n_tx * 2^m_rf)`.
    pub taps: Vec<CMatrix>,
    /// `(T * n_rx) x (T * n_tx * 2^m_rf)`.
    pub equivalent: CMatrix,
    /// What the receiver believes `equivalent` to be.
    pub estimate: CMatrix,
    /// Per-dimension variance of `equivalent - estimate` entries.
    pub error_variance: f64,
}

impl ChannelRealization {
    pub fn n_rx(&self) -> usize {
        self.taps.first().map_or(0, CMatrix::rows)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    /// Per-dimension noise variance.
    pub sigma_n_sq: f64,
}

impl NoiseModel {
    pub fn from_snr_db(snr_db: f64) -> Self {
        NoiseModel {
            sigma_n_sq: snr_to_sigma(snr_db),
        }
    }
}

/// Per-dimension noise variance for a given `E_s/N_0` in dB, with unit symbol
/// energy and `N_0 = 2 sigma_n^2`. Infinite SNR gives zero noise.
pub fn snr_to_sigma(snr_db: f64) -> f64 {
    libm::pow(10.0, -snr_db / 10.0) / 2.0
}

/// Complex Gaussian sample with per-dimension standard deviation `std`.
#[inline]
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, std: f64) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * std, im * std)
}

/// Places tap `(r - c) mod T` at block `(r, c)` when it exists, zero otherwise.
pub fn block_circulant(t_total: usize, taps: &[CMatrix]) -> CMatrix {
    let (nr, d) = taps.first().map_or((0, 0), CMatrix::shape);
    let mut h = CMatrix::zeros(t_total * nr, t_total * d);
    for r in 0..t_total {
        for c in 0..t_total {
            let lag = (r + t_total - c) % t_total;
            if let Some(tap) = taps.get(lag) {
                h.set_block(r * nr, c * d, tap);
            }
        }
    }
    h
}

/// Draws one quasi-static frame channel with a perfect estimate.
pub fn draw_channel<R: Rng + ?Sized>(
    cfg: &SchemeConfig,
    n_rx: usize,
    model: ChannelModel,
    rng: &mut R,
) -> ChannelRealization {
    let d = cfg.slot_dim();
    let std = libm::sqrt(0.5 / cfg.taps as f64);
    let taps: Vec<CMatrix> = (0..cfg.taps)
        .map(|_| match model {
            ChannelModel::Rayleigh => CMatrix::from_fn(n_rx, d, |_, _| complex_gaussian(rng, std)),
            ChannelModel::Zero => CMatrix::zeros(n_rx, d),
        })
        .collect();
    let equivalent = block_circulant(cfg.t_total, &taps);
    ChannelRealization {
        estimate: equivalent.clone(),
        taps,
        equivalent,
        error_variance: 0.0,
    }
}

/// Returns a copy whose estimate is `equivalent - E`, with `E` i.i.d. complex
/// Gaussian of per-dimension variance `sigma_e_sq` over the full matrix.
pub fn corrupt_estimate<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    sigma_e_sq: f64,
    rng: &mut R,
) -> Result<ChannelRealization> {
    if !(sigma_e_sq >= 0.0 && sigma_e_sq.is_finite()) {
        return Err(Error::InvalidVariance(sigma_e_sq));
    }
    let mut out = ch.clone();
    out.estimate = ch.equivalent.clone();
    out.error_variance = sigma_e_sq;
    if sigma_e_sq > 0.0 {
        let std = libm::sqrt(sigma_e_sq);
        for v in out.estimate.as_mut_slice() {
            *v -= complex_gaussian(rng, std);
        }
    }
    Ok(out)
}

/// `y = H s + n`, using only the nonzero entries of the codeword.
pub fn transmit<R: Rng + ?Sized>(
    ch: &ChannelRealization,
    frame: &TransmitFrame,
    noise: NoiseModel,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    let h = &ch.equivalent;
    if frame.stacked.len() != h.cols() {
        return Err(Error::Shape {
            expected: (h.cols(), 1),
            actual: (frame.stacked.len(), 1),
        });
    }
    if !(noise.sigma_n_sq >= 0.0 && noise.sigma_n_sq.is_finite()) {
        return Err(Error::InvalidVariance(noise.sigma_n_sq));
    }
    let nz: Vec<(usize, Complex64)> = frame
        .stacked
        .iter()
        .enumerate()
        .filter(|(_, x)| x.re != 0.0 || x.im != 0.0)
        .map(|(c, &x)| (c, x))
        .collect();
    let std = libm::sqrt(noise.sigma_n_sq);
    Ok((0..h.rows())
        .map(|r| {
            let row = h.row(r);
            let clean: Complex64 = nz.iter().map(|&(c, x)| row[c] * x).sum();
            if std > 0.0 {
                clean + complex_gaussian(rng, std)
            } else {
                clean
            }
        })
        .collect())
}
