//! Scheme parametrization, bit budgets and frame bit layout.
//!
//! A single [`SchemeConfig`] covers every scheme in the family: time-slot
//! indexing (`t_total`, `t_active`), spatial indexing (`n_tx`, `n_active`,
//! optionally quadrature), mirror activation patterns (`m_rf`) and the
//! conventional constellation.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::combinatorics::floor_log2_binomial;
use crate::constellation::ConstellationKind;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SchemeConfig {
    /// Transmit antennas (MBM transmit units).
    pub n_tx: usize,
    /// Active antennas per symbol part.
    pub n_active: usize,
    /// RF mirrors per transmit unit; 0 disables mirror indexing.
    pub m_rf: usize,
    /// Signaling time slots per frame.
    pub t_total: usize,
    /// Active time slots per frame.
    pub t_active: usize,
    /// Constellation size.
    pub mod_order: usize,
    /// Multipath taps.
    pub taps: usize,
    /// Separate antenna selections for the real and imaginary parts.
    pub quadrature: bool,
    pub constellation: ConstellationKind,
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_tx == 0 || self.n_active == 0 {
            return fail(format!(
                "n_tx={} and n_active={} must be positive",
                self.n_tx, self.n_active
            ));
        }
        if self.n_active > self.n_tx {
            return fail(format!("n_active={} exceeds n_tx={}", self.n_active, self.n_tx));
        }
        if self.t_total == 0 || self.t_active == 0 {
            return fail(format!(
                "t_total={} and t_active={} must be positive",
                self.t_total, self.t_active
            ));
        }
        if self.t_active > self.t_total {
            return fail(format!("t_active={} exceeds t_total={}", self.t_active, self.t_total));
        }
        if self.taps == 0 {
            return fail("taps must be positive".into());
        }
        if self.mod_order < 2 || !self.mod_order.is_power_of_two() {
            return fail(format!("mod_order={} is not a power of two >= 2", self.mod_order));
        }
        if self.constellation == ConstellationKind::Qam && !self.mod_order.trailing_zeros().is_multiple_of(2) {
            return fail(format!("QAM needs an even power of two, got {}", self.mod_order));
        }
        if self.m_rf >= usize::BITS as usize / 2 {
            return fail(format!("m_rf={} is too large", self.m_rf));
        }
        Ok(())
    }

    /// Bits selecting one antenna combination.
    pub fn antenna_field_bits(&self) -> usize {
        floor_log2_binomial(self.n_tx, self.n_active) as usize
    }

    pub fn symbol_bits(&self) -> usize {
        self.mod_order.trailing_zeros() as usize
    }

    /// Number of mirror activation patterns, `2^m_rf`.
    pub fn mirror_states(&self) -> usize {
        1 << self.m_rf
    }

    /// Length of one slot's effective transmit vector, `n_tx * 2^m_rf`.
    pub fn slot_dim(&self) -> usize {
        self.n_tx * self.mirror_states()
    }

    /// Channel uses per frame including the cyclic prefix.
    pub fn channel_uses(&self) -> usize {
        self.t_total + self.taps - 1
    }

    pub fn scheme(&self) -> Scheme {
        Scheme::classify(self)
    }
}

/// Named members of the scheme family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Gsm,
    TiGsm,
    GsmMbm,
    TiGsmMbm,
    Gqsm,
    TiGqsm,
    GqsmMbm,
    TiGqsmMbm,
    Mbm,
    TiMbm,
}

impl Scheme {
    pub const ALL: [Scheme; 10] = [
        Scheme::Gsm,
        Scheme::TiGsm,
        Scheme::GsmMbm,
        Scheme::TiGsmMbm,
        Scheme::Gqsm,
        Scheme::TiGqsm,
        Scheme::GqsmMbm,
        Scheme::TiGqsmMbm,
        Scheme::Mbm,
        Scheme::TiMbm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Gsm => "gsm",
            Scheme::TiGsm => "ti-gsm",
            Scheme::GsmMbm => "gsm-mbm",
            Scheme::TiGsmMbm => "ti-gsm-mbm",
            Scheme::Gqsm => "gqsm",
            Scheme::TiGqsm => "ti-gqsm",
            Scheme::GqsmMbm => "gqsm-mbm",
            Scheme::TiGqsmMbm => "ti-gqsm-mbm",
            Scheme::Mbm => "mbm",
            Scheme::TiMbm => "ti-mbm",
        }
    }

    pub fn time_indexed(self) -> bool {
        matches!(
            self,
            Scheme::TiGsm | Scheme::TiGsmMbm | Scheme::TiGqsm | Scheme::TiGqsmMbm | Scheme::TiMbm
        )
    }

    pub fn uses_mirrors(self) -> bool {
        matches!(
            self,
            Scheme::GsmMbm | Scheme::TiGsmMbm | Scheme::GqsmMbm | Scheme::TiGqsmMbm | Scheme::Mbm | Scheme::TiMbm
        )
    }

    /// Single transmit unit, all index bits in the mirror pattern.
    pub fn mirror_only(self) -> bool {
        matches!(self, Scheme::Mbm | Scheme::TiMbm)
    }

    pub fn quadrature(self) -> bool {
        matches!(
            self,
            Scheme::Gqsm | Scheme::TiGqsm | Scheme::GqsmMbm | Scheme::TiGqsmMbm
        )
    }

    pub fn classify(cfg: &SchemeConfig) -> Scheme {
        let ti = !(cfg.t_total == 1 && cfg.t_active == 1);
        let mbm = cfg.m_rf > 0;
        if mbm && cfg.n_tx == 1 && cfg.n_active == 1 {
            return if ti { Scheme::TiMbm } else { Scheme::Mbm };
        }
        match (cfg.quadrature, ti, mbm) {
            (false, false, false) => Scheme::Gsm,
            (false, true, false) => Scheme::TiGsm,
            (false, false, true) => Scheme::GsmMbm,
            (false, true, true) => Scheme::TiGsmMbm,
            (true, false, false) => Scheme::Gqsm,
            (true, true, false) => Scheme::TiGqsm,
            (true, false, true) => Scheme::GqsmMbm,
            (true, true, true) => Scheme::TiGqsmMbm,
        }
    }

    /// Builds a config for this scheme, checking that the parameters match
    /// its structure (no time indexing without `ti-`, no mirrors without `-mbm`,
    /// a single transmit unit for the mirror-only schemes).
    #[allow(clippy::too_many_arguments)]
    pub fn config(
        self,
        n_tx: usize,
        n_active: usize,
        m_rf: usize,
        mod_order: usize,
        constellation: ConstellationKind,
        t_total: usize,
        t_active: usize,
    ) -> Result<SchemeConfig> {
        let cfg = SchemeConfig {
            n_tx,
            n_active,
            m_rf,
            t_total,
            t_active,
            mod_order,
            taps: 1,
            quadrature: self.quadrature(),
            constellation,
        };
        cfg.validate()?;
        if !self.time_indexed() && (t_total != 1 || t_active != 1) {
            return Err(Error::InvalidConfig(format!(
                "{} does not index time slots; needs t_total = t_active = 1",
                self.name()
            )));
        }
        if self.time_indexed() && t_total == 1 {
            return Err(Error::InvalidConfig(format!("{} needs t_total > 1", self.name())));
        }
        if self.uses_mirrors() != (m_rf > 0) {
            return Err(Error::InvalidConfig(format!(
                "{} with m_rf = {m_rf} is inconsistent",
                self.name()
            )));
        }
        if self.mirror_only() && (n_tx != 1 || n_active != 1) {
            return Err(Error::InvalidConfig(format!(
                "{} uses a single transmit unit (n_tx = n_active = 1)",
                self.name()
            )));
        }
        Ok(cfg)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        // accept the QSM/QISM spellings used for the quadrature family
        let norm = lower.replace("qism", "gqsm").replace("ggqsm", "gqsm");
        Scheme::ALL
            .iter()
            .copied()
            .find(|sch| sch.name() == norm)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme '{s}'")))
    }
}

/// Exact bit counts for one frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BitBudget {
    pub time_bits: usize,
    pub antenna_bits_per_slot: usize,
    pub map_bits_per_slot: usize,
    pub symbol_bits_per_slot: usize,
    /// Bits per active slot.
    pub beta: usize,
    pub frame_bits: usize,
}

pub fn bit_budget(cfg: &SchemeConfig) -> BitBudget {
    let time_bits = floor_log2_binomial(cfg.t_total, cfg.t_active) as usize;
    let q = if cfg.quadrature { 2 } else { 1 };
    let antenna_bits_per_slot = q * cfg.antenna_field_bits();
    let map_bits_per_slot = cfg.m_rf;
    let symbol_bits_per_slot = cfg.symbol_bits();
    let beta = antenna_bits_per_slot + map_bits_per_slot + symbol_bits_per_slot;
    BitBudget {
        time_bits,
        antenna_bits_per_slot,
        map_bits_per_slot,
        symbol_bits_per_slot,
        beta,
        frame_bits: time_bits + cfg.t_active * beta,
    }
}

/// A bit string, most significant bit first.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Bits(pub Vec<bool>);

impl Bits {
    pub fn zeros(len: usize) -> Self {
        Bits(alloc::vec![false; len])
    }

    /// The low `len` bits of `value`, MSB first.
    pub fn from_u64(value: u64, len: usize) -> Self {
        Bits((0..len).rev().map(|i| i < 64 && (value >> i) & 1 == 1).collect())
    }

    pub fn from_u128(value: u128, len: usize) -> Self {
        Bits((0..len).rev().map(|i| i < 128 && (value >> i) & 1 == 1).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of the bits read MSB first; `None` beyond 64 bits.
    pub fn to_u64(&self) -> Option<u64> {
        if self.len() > 64 {
            return None;
        }
        Some(self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64))
    }

    pub fn to_u128(&self) -> Option<u128> {
        if self.len() > 128 {
            return None;
        }
        Some(self.0.iter().fold(0u128, |acc, &b| (acc << 1) | b as u128))
    }

    pub fn hamming(&self, other: &Bits) -> usize {
        self.0.iter().zip(&other.0).filter(|(a, b)| a != b).count() + self.len().abs_diff(other.len())
    }

    fn slice(&self, start: usize, len: usize) -> Bits {
        Bits(self.0[start..start + len].to_vec())
    }

    fn extend(&mut self, other: &Bits) {
        self.0.extend_from_slice(&other.0);
    }
}

impl fmt::Display for Bits {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Bits {
    type Err = Error;

    /// Parses `0`/`1` characters, ignoring whitespace.
    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidConfig(format!("invalid bit character '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Bits)
    }
}

/// Fields carried by one active slot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SlotBits {
    pub antenna_real: Bits,
    /// Empty unless the scheme is quadrature.
    pub antenna_imag: Bits,
    pub map: Bits,
    pub symbol: Bits,
}

/// A frame payload split into its index and symbol fields.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameBits {
    pub time_field: Bits,
    pub per_slot: Vec<SlotBits>,
}

impl FrameBits {
    /// Concatenates the fields back in transmission order.
    pub fn join(&self) -> Bits {
        let mut out = self.time_field.clone();
        for slot in &self.per_slot {
            out.extend(&slot.antenna_real);
            out.extend(&slot.antenna_imag);
            out.extend(&slot.map);
            out.extend(&slot.symbol);
        }
        out
    }
}

pub fn partition_bits(cfg: &SchemeConfig, raw: &Bits) -> Result<FrameBits> {
    let budget = bit_budget(cfg);
    if raw.len() != budget.frame_bits {
        return Err(Error::LengthMismatch {
            expected: budget.frame_bits,
            actual: raw.len(),
        });
    }
    let ant = cfg.antenna_field_bits();
    let imag = if cfg.quadrature { ant } else { 0 };
    let mut pos = 0;
    let mut take = |len: usize| {
        let field = raw.slice(pos, len);
        pos += len;
        field
    };
    let time_field = take(budget.time_bits);
    let per_slot = (0..cfg.t_active)
        .map(|_| SlotBits {
            antenna_real: take(ant),
            antenna_imag: take(imag),
            map: take(cfg.m_rf),
            symbol: take(budget.symbol_bits_per_slot),
        })
        .collect();
    Ok(FrameBits { time_field, per_slot })
}
