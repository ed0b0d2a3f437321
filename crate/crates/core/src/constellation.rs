//! Gray-labeled PSK and square QAM with unit average energy.

use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum ConstellationKind {
    #[default]
    Psk,
    Qam,
}

impl fmt::Display for ConstellationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConstellationKind::Psk => "psk",
            ConstellationKind::Qam => "qam",
        })
    }
}

impl FromStr for ConstellationKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "psk" => Ok(ConstellationKind::Psk),
            "qam" => Ok(ConstellationKind::Qam),
            other => Err(Error::InvalidConfig(alloc::format!("unknown constellation '{other}'"))),
        }
    }
}

fn gray(i: usize) -> usize {
    i ^ (i >> 1)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    kind: ConstellationKind,
    /// Points indexed by bit label.
    by_label: Vec<Complex64>,
}

impl Constellation {
    pub fn new(kind: ConstellationKind, order: usize) -> Result<Self> {
        if order < 2 || !order.is_power_of_two() {
            return Err(Error::InvalidConfig(alloc::format!(
                "constellation order {order} is not a power of two >= 2"
            )));
        }
        let by_label = match kind {
            ConstellationKind::Psk => psk(order),
            ConstellationKind::Qam => {
                if !order.trailing_zeros().is_multiple_of(2) {
                    return Err(Error::InvalidConfig(alloc::format!(
                        "square QAM needs an even power of two, got {order}"
                    )));
                }
                qam(order)
            }
        };
        Ok(Constellation { kind, by_label })
    }

    /// Constellation used by a scheme. Quadrature schemes route the real and
    /// imaginary parts over separate antenna sets, so their binary PSK is
    /// rotated onto the diagonal to keep both parts nonzero.
    pub fn for_config(cfg: &crate::scheme::SchemeConfig) -> Result<Self> {
        let mut c = Constellation::new(cfg.constellation, cfg.mod_order)?;
        if cfg.quadrature && cfg.constellation == ConstellationKind::Psk && cfg.mod_order == 2 {
            let rot = Complex64::new(core::f64::consts::FRAC_1_SQRT_2, core::f64::consts::FRAC_1_SQRT_2);
            c.by_label.iter_mut().for_each(|p| *p *= rot);
        }
        Ok(c)
    }

    pub fn kind(&self) -> ConstellationKind {
        self.kind
    }

    pub fn order(&self) -> usize {
        self.by_label.len()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.order().trailing_zeros() as usize
    }

    /// Point carrying bit label `label` (bits read MSB first).
    pub fn point(&self, label: usize) -> Complex64 {
        self.by_label[label]
    }

    pub fn points(&self) -> &[Complex64] {
        &self.by_label
    }

    pub fn map_symbol(&self, bits: &crate::scheme::Bits) -> Result<Complex64> {
        if bits.len() != self.bits_per_symbol() {
            return Err(Error::LengthMismatch {
                expected: self.bits_per_symbol(),
                actual: bits.len(),
            });
        }
        Ok(self.point(bits.to_u64().unwrap_or(0) as usize))
    }
}

/// Position `p` on the circle carries label `gray(p)`. BPSK maps 0 to +1;
/// higher orders are offset by π/M so no point lies on an axis.
fn psk(order: usize) -> Vec<Complex64> {
    let offset = if order == 2 { 0.0 } else { PI / order as f64 };
    let mut by_label = alloc::vec![Complex64::new(0.0, 0.0); order];
    for p in 0..order {
        let phase = offset + 2.0 * PI * p as f64 / order as f64;
        by_label[gray(p)] = Complex64::new(libm::cos(phase), libm::sin(phase));
    }
    // exact axes for BPSK
    if order == 2 {
        by_label[0] = Complex64::new(1.0, 0.0);
        by_label[1] = Complex64::new(-1.0, 0.0);
    }
    by_label
}

/// The first half of the label selects the in-phase level, the second half the
/// quadrature level; each axis is Gray-coded PAM with label 0 on the largest
/// positive level.
fn qam(order: usize) -> Vec<Complex64> {
    let axis_bits = order.trailing_zeros() as usize / 2;
    let side = 1usize << axis_bits;
    let scale = 1.0 / libm::sqrt(2.0 * (order as f64 - 1.0) / 3.0);
    let level = |g: usize| {
        // invert the Gray code to find the level index
        let idx = (0..side).find(|&i| gray(i) == g).unwrap_or(0);
        (side as f64 - 1.0 - 2.0 * idx as f64) * scale
    };
    (0..order)
        .map(|label| Complex64::new(level(label >> axis_bits), level(label & (side - 1))))
        .collect()
}
