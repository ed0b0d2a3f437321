//! Joint maximum-likelihood detection over every legal frame codeword.
//!
//! The search is exhaustive and returns the codeword minimizing
//! `‖y - Ĥ s‖²`, ties going to the lowest codeword index. Two exact
//! evaluation strategies are used:
//!
//! * when `Ĥ` has no off-diagonal slot blocks (flat channel, perfect
//!   estimate) the metric separates over slots, so each slot's best symbol is
//!   found once and only the activation patterns are searched jointly;
//! * otherwise codewords are walked depth-first over active slots. The
//!   residual is kept for all but the last slot, and the last slot's symbols
//!   are scored through `g = Ĥ_cᴴ r`, which touches only the few nonzero
//!   entries of each candidate.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{norm_sqr, CMatrix};
use crate::scheme::{Bits, SchemeConfig};
use crate::signal::{Codebook, TransmitFrame};

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionResult {
    pub bits: Bits,
    /// `‖y - Ĥ ŝ‖²` at the detected codeword.
    pub metric: f64,
    /// Position of the detected codeword in enumeration order.
    pub codeword_index: u64,
}

fn check_shapes(y: &[Complex64], h: &CMatrix, cols: usize) -> Result<()> {
    if h.rows() != y.len() || h.cols() != cols {
        return Err(Error::Shape {
            expected: (y.len(), cols),
            actual: h.shape(),
        });
    }
    Ok(())
}

/// `‖y - h s‖²` using only the nonzero entries of the codeword.
pub fn metric(y: &[Complex64], h: &CMatrix, frame: &TransmitFrame) -> Result<f64> {
    check_shapes(y, h, frame.stacked.len())?;
    let nz: Vec<(usize, Complex64)> = frame
        .stacked
        .iter()
        .enumerate()
        .filter(|(_, x)| x.re != 0.0 || x.im != 0.0)
        .map(|(c, &x)| (c, x))
        .collect();
    Ok((0..h.rows())
        .map(|r| {
            let row = h.row(r);
            let hs: Complex64 = nz.iter().map(|&(c, x)| row[c] * x).sum();
            (y[r] - hs).norm_sqr()
        })
        .sum())
}

/// Order-of-magnitude ML search cost,
/// `T^(Ta+1) (Nt² M 2^m_rf)^Ta Nr / Ta^(Ta-1)`.
pub fn ml_complexity(cfg: &SchemeConfig, n_rx: usize) -> f64 {
    let t = cfg.t_total as f64;
    let ta = cfg.t_active as f64;
    let inner = (cfg.n_tx * cfg.n_tx) as f64 * cfg.mod_order as f64 * cfg.mirror_states() as f64;
    libm::pow(t, ta + 1.0) * libm::pow(inner, ta) * n_rx as f64 / libm::pow(ta, ta - 1.0)
}

/// Reusable detector for one scheme; holds the codebook tables.
#[derive(Debug, Clone)]
pub struct Detector {
    book: Codebook,
}

impl Detector {
    pub fn new(cfg: &SchemeConfig) -> Result<Self> {
        Ok(Detector {
            book: Codebook::new(cfg)?,
        })
    }

    pub fn codebook(&self) -> &Codebook {
        &self.book
    }

    fn finish(&self, index: u64, y: &[Complex64], h: &CMatrix) -> Result<DetectionResult> {
        let frame = self.book.frame(index);
        Ok(DetectionResult {
            metric: metric(y, h, &frame)?,
            bits: frame.source_bits,
            codeword_index: index,
        })
    }

    pub fn detect(&self, y: &[Complex64], h: &CMatrix) -> Result<DetectionResult> {
        let cfg = self.book.config();
        let d = cfg.slot_dim();
        check_shapes(y, h, cfg.t_total * d)?;
        if !y.len().is_multiple_of(cfg.t_total) {
            return Err(Error::Shape {
                expected: (cfg.t_total, y.len() / cfg.t_total.max(1)),
                actual: (y.len(), 1),
            });
        }
        let index = if is_block_diagonal(h, cfg.t_total, y.len() / cfg.t_total, d) {
            self.search_separable(y, h)
        } else {
            self.search_joint(y, h)
        };
        self.finish(index, y, h)
    }

    /// Walks the codebook one codeword at a time, evaluating [`metric`] directly.
    pub fn detect_reference(&self, y: &[Complex64], h: &CMatrix) -> Result<DetectionResult> {
        let cfg = self.book.config();
        check_shapes(y, h, cfg.t_total * cfg.slot_dim())?;
        let mut best = (f64::INFINITY, 0u64);
        for (i, frame) in self.book.iter().enumerate() {
            let m = metric(y, h, &frame)?;
            if m < best.0 {
                best = (m, i as u64);
            }
        }
        self.finish(best.1, y, h)
    }

    fn search_separable(&self, y: &[Complex64], h: &CMatrix) -> u64 {
        let cfg = self.book.config();
        let t_total = cfg.t_total;
        let d = cfg.slot_dim();
        let nr = y.len() / t_total;
        let alphabet = self.book.alphabet();

        let mut idle = vec![0.0; t_total];
        let mut best = vec![(f64::INFINITY, 0usize); t_total];
        let mut hx = vec![Complex64::new(0.0, 0.0); nr];
        for t in 0..t_total {
            let yt = &y[t * nr..(t + 1) * nr];
            idle[t] = yt.iter().map(|z| z.norm_sqr()).sum();
            for (u, sig) in alphabet.iter().enumerate() {
                for (i, acc) in hx.iter_mut().enumerate() {
                    let row = &h.row(t * nr + i)[t * d..(t + 1) * d];
                    *acc = sig.entries.iter().map(|&(p, x)| row[p] * x).sum();
                }
                let m: f64 = yt.iter().zip(&hx).map(|(a, b)| (a - b).norm_sqr()).sum();
                if m < best[t].0 {
                    best[t] = (m, u);
                }
            }
        }

        let mut chosen = (f64::INFINITY, 0usize);
        for (v, pattern) in self.book.patterns().iter().enumerate() {
            let total: f64 = (0..t_total)
                .map(|t| if pattern.contains(&t) { best[t].0 } else { idle[t] })
                .sum();
            if total < chosen.0 {
                chosen = (total, v);
            }
        }
        let syms: Vec<usize> = self.book.patterns()[chosen.1].iter().map(|&t| best[t].1).collect();
        self.book.join_index(chosen.1, &syms)
    }

    fn search_joint(&self, y: &[Complex64], h: &CMatrix) -> u64 {
        let cfg = self.book.config();
        let t_total = cfg.t_total;
        let d = cfg.slot_dim();
        let rows = y.len();
        let alphabet = self.book.alphabet();
        let n_sym = alphabet.len();

        // responses[t][u] = Ĥ[:, slot t] * x_u and its energy
        let mut responses = vec![Complex64::new(0.0, 0.0); t_total * n_sym * rows];
        let mut energy = vec![0.0; t_total * n_sym];
        for t in 0..t_total {
            for (u, sig) in alphabet.iter().enumerate() {
                let z = &mut responses[(t * n_sym + u) * rows..(t * n_sym + u + 1) * rows];
                for (r, zr) in z.iter_mut().enumerate() {
                    let row = h.row(r);
                    *zr = sig.entries.iter().map(|&(p, x)| row[t * d + p] * x).sum();
                }
                energy[t * n_sym + u] = norm_sqr(z);
            }
        }

        let mut search = JointSearch {
            h,
            d,
            rows,
            n_sym,
            alphabet,
            responses: &responses,
            energy: &energy,
            residuals: vec![vec![Complex64::new(0.0, 0.0); rows]; cfg.t_active],
            g: vec![Complex64::new(0.0, 0.0); d],
            prefix: vec![0; cfg.t_active],
            best: (f64::INFINITY, 0, vec![0; cfg.t_active]),
        };
        for (v, pattern) in self.book.patterns().iter().enumerate() {
            search.residuals[0].copy_from_slice(y);
            search.descend(v, pattern, 0);
        }
        let (_, v, syms) = search.best;
        self.book.join_index(v, &syms)
    }
}

struct JointSearch<'a> {
    h: &'a CMatrix,
    d: usize,
    rows: usize,
    n_sym: usize,
    alphabet: &'a [crate::signal::SlotSignal],
    responses: &'a [Complex64],
    energy: &'a [f64],
    residuals: Vec<Vec<Complex64>>,
    g: Vec<Complex64>,
    prefix: Vec<usize>,
    best: (f64, usize, Vec<usize>),
}

impl JointSearch<'_> {
    fn descend(&mut self, v: usize, pattern: &[usize], depth: usize) {
        let t = pattern[depth];
        if depth + 1 == pattern.len() {
            self.leaves(v, t, depth);
            return;
        }
        for u in 0..self.n_sym {
            let (head, tail) = self.residuals.split_at_mut(depth + 1);
            let start = (t * self.n_sym + u) * self.rows;
            let z = &self.responses[start..start + self.rows];
            for ((next, cur), zr) in tail[0].iter_mut().zip(&head[depth]).zip(z) {
                *next = cur - zr;
            }
            self.prefix[depth] = u;
            self.descend(v, pattern, depth + 1);
        }
    }

    fn leaves(&mut self, v: usize, t: usize, depth: usize) {
        let r = &self.residuals[depth];
        let rr = norm_sqr(r);
        self.g.iter_mut().for_each(|g| *g = Complex64::new(0.0, 0.0));
        for (i, &ri) in r.iter().enumerate() {
            let row = &self.h.row(i)[t * self.d..(t + 1) * self.d];
            for (g, hv) in self.g.iter_mut().zip(row) {
                *g += hv.conj() * ri;
            }
        }
        for u in 0..self.n_sym {
            let cross: f64 = self.alphabet[u]
                .entries
                .iter()
                .map(|&(p, x)| (x.conj() * self.g[p]).re)
                .sum();
            let m = rr - 2.0 * cross + self.energy[t * self.n_sym + u];
            if m < self.best.0 {
                self.prefix[depth] = u;
                self.best = (m, v, self.prefix.clone());
            }
        }
    }
}

fn is_block_diagonal(h: &CMatrix, t_total: usize, nr: usize, d: usize) -> bool {
    (0..h.rows()).all(|r| {
        let slot = r / nr;
        h.row(r)
            .iter()
            .enumerate()
            .all(|(c, v)| c / d == slot || (v.re == 0.0 && v.im == 0.0))
    }) && t_total > 0
}

/// One-shot ML detection; builds the codebook tables on every call.
pub fn ml_detect(cfg: &SchemeConfig, y: &[Complex64], h_est: &CMatrix) -> Result<DetectionResult> {
    Detector::new(cfg)?.detect(y, h_est)
}
