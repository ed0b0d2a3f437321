//! Frame bits to stacked transmit vectors, and codebook enumeration.
//!
//! Slot `t` of a frame occupies entries `t*D .. (t+1)*D` of the stacked vector,
//! with `D = n_tx * 2^m_rf`. Inside a slot, antenna `k` under mirror pattern
//! `p` is entry `k * 2^m_rf + p`. The real part of the symbol is spread over
//! the real-part antenna set and the imaginary part over the imaginary-part
//! set, each scaled by `1/sqrt(n_active)`; overlapping positions add.

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64;

use crate::combinatorics::unrank_combination;
use crate::constellation::Constellation;
use crate::error::{Error, Result};
use crate::scheme::{bit_budget, partition_bits, BitBudget, Bits, SchemeConfig};

/// Largest codebook (in frame bits) that [`enumerate_codebook`] materializes by default.
pub const DEFAULT_CODEBOOK_CAP: usize = 24;

/// Largest per-slot alphabet a [`Codebook`] precomputes.
const MAX_SLOT_BITS: usize = 24;

#[derive(Debug, Clone, PartialEq)]
pub struct SlotSignal {
    pub antenna_real: Vec<usize>,
    pub antenna_imag: Vec<usize>,
    pub map_index: usize,
    pub symbol: Complex64,
    /// Nonzero entries of the slot vector as `(position, value)`, sorted by position.
    pub entries: Vec<(usize, Complex64)>,
}

impl SlotSignal {
    fn new(
        cfg: &SchemeConfig,
        antenna_real: Vec<usize>,
        antenna_imag: Vec<usize>,
        map_index: usize,
        symbol: Complex64,
    ) -> Self {
        let states = cfg.mirror_states();
        let gain = 1.0 / libm::sqrt(cfg.n_active as f64);
        let mut entries: Vec<(usize, Complex64)> = Vec::with_capacity(2 * cfg.n_active);
        let mut add = |pos: usize, v: Complex64| match entries.iter_mut().find(|(p, _)| *p == pos) {
            Some((_, acc)) => *acc += v,
            None => entries.push((pos, v)),
        };
        for &k in &antenna_real {
            add(k * states + map_index, Complex64::new(symbol.re * gain, 0.0));
        }
        for &k in &antenna_imag {
            add(k * states + map_index, Complex64::new(0.0, symbol.im * gain));
        }
        entries.sort_by_key(|&(p, _)| p);
        SlotSignal {
            antenna_real,
            antenna_imag,
            map_index,
            symbol,
            entries,
        }
    }

    /// Dense slot vector of length `n_tx * 2^m_rf`.
    pub fn vector(&self, slot_dim: usize) -> Vec<Complex64> {
        let mut v = vec![Complex64::new(0.0, 0.0); slot_dim];
        for &(p, x) in &self.entries {
            v[p] = x;
        }
        v
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransmitFrame {
    /// Active slot indices (the time-slot activation pattern), sorted.
    pub active_slots: Vec<usize>,
    pub slots: Vec<SlotSignal>,
    /// Length `t_total * n_tx * 2^m_rf`; zero outside active slot blocks.
    pub stacked: Vec<Complex64>,
    pub source_bits: Bits,
}

impl TransmitFrame {
    fn assemble(cfg: &SchemeConfig, active_slots: Vec<usize>, slots: Vec<SlotSignal>, source_bits: Bits) -> Self {
        let d = cfg.slot_dim();
        let mut stacked = vec![Complex64::new(0.0, 0.0); cfg.t_total * d];
        for (&t, slot) in active_slots.iter().zip(&slots) {
            for &(p, x) in &slot.entries {
                stacked[t * d + p] = x;
            }
        }
        TransmitFrame {
            active_slots,
            slots,
            stacked,
            source_bits,
        }
    }

    /// Nonzero entries of the stacked vector as `(column, value)`.
    pub fn nonzeros(&self, slot_dim: usize) -> impl Iterator<Item = (usize, Complex64)> + '_ {
        self.active_slots
            .iter()
            .zip(&self.slots)
            .flat_map(move |(&t, s)| s.entries.iter().map(move |&(p, x)| (t * slot_dim + p, x)))
    }
}

fn field_value(bits: &Bits) -> u128 {
    bits.to_u128().unwrap_or(0)
}

pub fn build_frame(cfg: &SchemeConfig, bits: &Bits) -> Result<TransmitFrame> {
    cfg.validate()?;
    let fields = partition_bits(cfg, bits)?;
    let constellation = Constellation::for_config(cfg)?;
    let active_slots = unrank_combination(cfg.t_total, cfg.t_active, field_value(&fields.time_field))?;
    let slots = fields
        .per_slot
        .iter()
        .map(|f| {
            let real = unrank_combination(cfg.n_tx, cfg.n_active, field_value(&f.antenna_real))?;
            let imag = if cfg.quadrature {
                unrank_combination(cfg.n_tx, cfg.n_active, field_value(&f.antenna_imag))?
            } else {
                real.clone()
            };
            let symbol = constellation.map_symbol(&f.symbol)?;
            Ok(SlotSignal::new(cfg, real, imag, field_value(&f.map) as usize, symbol))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TransmitFrame::assemble(cfg, active_slots, slots, bits.clone()))
}

/// All legal codewords of a scheme, indexed by the integer value of their
/// frame bits. Holds the addressable activation patterns and the per-slot
/// alphabet so codewords can be produced without re-deriving combinations.
#[derive(Debug, Clone)]
pub struct Codebook {
    cfg: SchemeConfig,
    budget: BitBudget,
    patterns: Vec<Vec<usize>>,
    alphabet: Vec<SlotSignal>,
}

impl Codebook {
    pub fn new(cfg: &SchemeConfig) -> Result<Self> {
        cfg.validate()?;
        let budget = bit_budget(cfg);
        if budget.frame_bits > 63 || budget.beta > MAX_SLOT_BITS {
            return Err(Error::CodebookTooLarge {
                frame_bits: budget.frame_bits,
                cap: 63,
            });
        }
        let patterns = (0..1u128 << budget.time_bits)
            .map(|v| unrank_combination(cfg.t_total, cfg.t_active, v))
            .collect::<Result<Vec<_>>>()?;

        let constellation = Constellation::for_config(cfg)?;
        let ant = cfg.antenna_field_bits();
        let imag_bits = if cfg.quadrature { ant } else { 0 };
        let sym_bits = budget.symbol_bits_per_slot;
        let combos = (0..1u128 << ant)
            .map(|v| unrank_combination(cfg.n_tx, cfg.n_active, v))
            .collect::<Result<Vec<_>>>()?;
        let mut alphabet = Vec::with_capacity(1 << budget.beta);
        for u in 0..1usize << budget.beta {
            let sym = u & ((1 << sym_bits) - 1);
            let map = (u >> sym_bits) & ((1 << cfg.m_rf) - 1);
            let imag_field = (u >> (sym_bits + cfg.m_rf)) & ((1 << imag_bits) - 1);
            let real_field = u >> (sym_bits + cfg.m_rf + imag_bits);
            let real = combos[real_field].clone();
            let imag = if cfg.quadrature {
                combos[imag_field].clone()
            } else {
                real.clone()
            };
            alphabet.push(SlotSignal::new(cfg, real, imag, map, constellation.point(sym)));
        }
        Ok(Codebook {
            cfg: *cfg,
            budget,
            patterns,
            alphabet,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.cfg
    }

    pub fn budget(&self) -> &BitBudget {
        &self.budget
    }

    /// Number of codewords, `2^frame_bits`.
    pub fn len(&self) -> u64 {
        1u64 << self.budget.frame_bits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Addressable activation patterns, indexed by time-field value.
    pub fn patterns(&self) -> &[Vec<usize>] {
        &self.patterns
    }

    /// Per-slot alphabet, indexed by the slot's field bits read as one integer.
    pub fn alphabet(&self) -> &[SlotSignal] {
        &self.alphabet
    }

    /// Splits a codeword index into its pattern index and per-slot symbol indices.
    pub fn split_index(&self, index: u64) -> (usize, Vec<usize>) {
        let beta = self.budget.beta;
        let mask = (1u64 << beta) - 1;
        let slots = (0..self.cfg.t_active)
            .map(|k| ((index >> ((self.cfg.t_active - 1 - k) * beta)) & mask) as usize)
            .collect();
        let pattern = (index >> (self.cfg.t_active * beta)) as usize;
        (pattern, slots)
    }

    pub fn join_index(&self, pattern: usize, slots: &[usize]) -> u64 {
        slots
            .iter()
            .fold(pattern as u64, |acc, &u| (acc << self.budget.beta) | u as u64)
    }

    pub fn frame(&self, index: u64) -> TransmitFrame {
        let (pattern, syms) = self.split_index(index);
        let slots = syms.iter().map(|&u| self.alphabet[u].clone()).collect();
        TransmitFrame::assemble(
            &self.cfg,
            self.patterns[pattern].clone(),
            slots,
            Bits::from_u64(index, self.budget.frame_bits),
        )
    }

    pub fn iter(&self) -> CodebookIter<'_> {
        CodebookIter {
            book: self,
            next: 0,
            end: self.len(),
        }
    }
}

/// Streams codewords in increasing bit-string order.
#[derive(Debug, Clone)]
pub struct CodebookIter<'a> {
    book: &'a Codebook,
    next: u64,
    end: u64,
}

impl Iterator for CodebookIter<'_> {
    type Item = TransmitFrame;

    fn next(&mut self) -> Option<TransmitFrame> {
        if self.next >= self.end {
            return None;
        }
        let f = self.book.frame(self.next);
        self.next += 1;
        Some(f)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let n = (self.end - self.next) as usize;
        (n, Some(n))
    }
}

impl ExactSizeIterator for CodebookIter<'_> {}

/// Every codeword in increasing bit-string order; fails above `cap` frame bits.
pub fn enumerate_codebook(cfg: &SchemeConfig, cap: usize) -> Result<Vec<TransmitFrame>> {
    let budget = bit_budget(cfg);
    if budget.frame_bits > cap {
        return Err(Error::CodebookTooLarge {
            frame_bits: budget.frame_bits,
            cap,
        });
    }
    Ok(Codebook::new(cfg)?.iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::ConstellationKind;
    use core::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn cfg(n_tx: usize, n_a: usize, m_rf: usize, t: usize, ta: usize, m: usize, q: bool) -> SchemeConfig {
        SchemeConfig {
            n_tx,
            n_active: n_a,
            m_rf,
            t_total: t,
            t_active: ta,
            mod_order: m,
            taps: 1,
            quadrature: q,
            constellation: ConstellationKind::Psk,
        }
    }

    #[test]
    fn all_zero_bits_place_real_unit_first() {
        let f = build_frame(&cfg(2, 1, 1, 1, 1, 2, false), &"000".parse().unwrap()).unwrap();
        assert_eq!(f.stacked, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        // quadrature BPSK sits on the diagonal: both parts land on antenna 0, pattern 0
        let f = build_frame(&cfg(2, 1, 1, 1, 1, 2, true), &"0000".parse().unwrap()).unwrap();
        assert!((f.stacked[0] - c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!(f.stacked[1..].iter().all(|z| z.norm_sqr() == 0.0));
    }

    #[test]
    fn real_part_goes_to_antenna_and_mirror_slot() {
        let f = build_frame(&cfg(2, 1, 1, 1, 1, 2, false), &"111".parse().unwrap()).unwrap();
        assert_eq!(f.slots[0].symbol, c(-1.0, 0.0));
        assert_eq!(f.stacked[3], c(-1.0, 0.0));
        assert!(f.stacked[..3].iter().all(|z| z.norm_sqr() == 0.0));

        let f = build_frame(&cfg(2, 1, 1, 1, 1, 2, true), &"1011".parse().unwrap()).unwrap();
        let s = &f.slots[0];
        assert_eq!(
            (s.antenna_real.as_slice(), s.antenna_imag.as_slice(), s.map_index),
            (&[1][..], &[0][..], 1)
        );
        // real part at antenna 1 pattern 1 (position 3), imaginary part at antenna 0 pattern 1 (position 1)
        assert!((f.stacked[3] - c(-FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((f.stacked[1] - c(0.0, -FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(f.stacked[0], c(0.0, 0.0));
        assert_eq!(f.stacked[2], c(0.0, 0.0));
    }

    #[test]
    fn quadrature_parts_on_distinct_antennas() {
        // QPSK "00" is (1+j)/sqrt2; antenna_real={0}, antenna_imag={1}
        let f = build_frame(&cfg(2, 1, 0, 1, 1, 4, true), &"0100".parse().unwrap()).unwrap();
        assert!((f.stacked[0] - c(FRAC_1_SQRT_2, 0.0)).norm() < 1e-15);
        assert!((f.stacked[1] - c(0.0, FRAC_1_SQRT_2)).norm() < 1e-15);
    }

    #[test]
    fn overlapping_sets_superpose() {
        let f = build_frame(&cfg(2, 1, 0, 1, 1, 4, true), &"0000".parse().unwrap()).unwrap();
        assert!((f.stacked[0] - c(FRAC_1_SQRT_2, FRAC_1_SQRT_2)).norm() < 1e-15);
        assert_eq!(f.stacked[1], c(0.0, 0.0));
    }

    #[test]
    fn siso_bpsk_codebook() {
        let book = enumerate_codebook(&cfg(1, 1, 0, 1, 1, 2, false), DEFAULT_CODEBOOK_CAP).unwrap();
        let v: Vec<_> = book.iter().map(|f| f.stacked.clone()).collect();
        assert_eq!(v, vec![vec![c(1.0, 0.0)], vec![c(-1.0, 0.0)]]);
    }

    #[test]
    fn codebook_count_and_cap() {
        let c16 = cfg(4, 2, 2, 4, 2, 2, true);
        let book = Codebook::new(&c16).unwrap();
        assert_eq!(book.iter().len(), 65536);
        assert!(matches!(
            enumerate_codebook(&c16, 10),
            Err(Error::CodebookTooLarge {
                frame_bits: 16,
                cap: 10
            })
        ));
    }

    #[test]
    fn codebook_matches_build_frame() {
        for c in [
            cfg(4, 2, 2, 4, 2, 2, true),
            cfg(5, 2, 3, 4, 2, 2, false),
            cfg(3, 2, 0, 4, 2, 8, true),
        ] {
            let book = Codebook::new(&c).unwrap();
            for idx in (0..book.len()).step_by(97) {
                let f = book.frame(idx);
                assert_eq!(build_frame(&c, &f.source_bits).unwrap(), f);
                let (p, s) = book.split_index(idx);
                assert_eq!(book.join_index(p, &s), idx);
            }
        }
    }

    #[test]
    fn tap_and_energy_invariants() {
        let c = cfg(4, 2, 2, 4, 2, 4, true);
        let book = Codebook::new(&c).unwrap();
        let d = c.slot_dim();
        for idx in (0..book.len()).step_by(61) {
            let f = book.frame(idx);
            let tap =
                unrank_combination(4, 2, f.source_bits.0[..2].iter().fold(0u128, |a, &b| a * 2 + b as u128)).unwrap();
            assert_eq!(f.active_slots, tap);
            for t in 0..4 {
                let nz = f.stacked[t * d..(t + 1) * d].iter().any(|z| z.norm_sqr() > 0.0);
                assert_eq!(nz, tap.contains(&t));
            }
            let e: f64 = f.stacked.iter().map(|z| z.norm_sqr()).sum();
            let want: f64 = f.slots.iter().map(|s| s.symbol.norm_sqr()).sum();
            assert!((e - want).abs() < 1e-12);
        }
    }

    #[test]
    fn wrong_length_propagates() {
        assert!(matches!(
            build_frame(&cfg(4, 2, 2, 4, 2, 2, true), &Bits::zeros(15)),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
