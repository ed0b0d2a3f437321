//! Bundled scheme configurations for each figure.
//!
//! Every BER preset carries 16 bits per frame over 4 channel uses (4 bpcu).
//! Time-indexed presets activate 2 of 4 slots, so `2 + 2·β = 16` forces
//! `β = 7`; the single-slot presets need `β = 4`. Where the antenna counts
//! are free, the smallest constellation meeting the
//! budget is used.
//!
//! | id | scheme | Nt | Na | m_rf | M | β |
//! |----|--------|----|----|------|---|---|
//! | gsm | GSM | 5 | 2 | 0 | 2 | 3 + 1 = 4 |
//! | ti-gsm | TI-GSM | 5 | 2 | 0 | 16-QAM | 3 + 4 = 7 |
//! | ti-gsm-mbm | TI-GSM-MBM | 5 | 2 | 3 | 2 | 3 + 3 + 1 = 7 |
//! | ti-mbm | TI-MBM | 1 | 1 | 6 | 2 | 6 + 1 = 7 |
//! | gqsm | GQSM | 3 | 2 | 0 | 4 | 2·1 + 2 = 4 |
//! | ti-gqsm | TI-GQSM | 5 | 2 | 0 | 2 | 2·3 + 1 = 7 |
//! | ti-gqsm-mbm | TI-GQSM-MBM | 4 | 2 | 2 | 2 | 2·2 + 2 + 1 = 7 |
//! | gqsm-mbm | GQSM-MBM | 3 | 2 | 1 | 2 | 2·1 + 1 + 1 = 4 |

use std::fmt;
use std::str::FromStr;

use mdim_core::{ConstellationKind, Scheme, SchemeConfig};

use crate::error::{Error, Result};

pub const BER_N_RX: usize = 4;
pub const FIG7_SNR_DB: f64 = 6.0;
pub const FIG7_N_RX: [usize; 8] = [2, 4, 6, 8, 10, 12, 14, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Figure {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl Figure {
    pub const ALL: [Figure; 6] = [
        Figure::Fig2,
        Figure::Fig3,
        Figure::Fig4,
        Figure::Fig5,
        Figure::Fig6,
        Figure::Fig7,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
            Figure::Fig6 => "fig6",
            Figure::Fig7 => "fig7",
        }
    }

    /// Receiver uses an estimate corrupted at the noise variance.
    pub fn cee(self) -> bool {
        matches!(self, Figure::Fig5 | Figure::Fig6 | Figure::Fig7)
    }

    /// Schemes simulated for this figure; empty for the rate figure.
    pub fn schemes(self) -> &'static [Scheme] {
        match self {
            Figure::Fig2 => &[],
            Figure::Fig3 => &[Scheme::Gsm, Scheme::TiGsm, Scheme::TiMbm, Scheme::TiGsmMbm],
            Figure::Fig4 => &[Scheme::Gqsm, Scheme::TiGqsm, Scheme::TiMbm, Scheme::TiGqsmMbm],
            Figure::Fig5 => &[Scheme::Gsm, Scheme::TiGsm, Scheme::TiGsmMbm],
            Figure::Fig6 => &[Scheme::Gqsm, Scheme::TiGqsm, Scheme::TiGqsmMbm],
            Figure::Fig7 => &[Scheme::TiGqsm, Scheme::GqsmMbm, Scheme::TiGqsmMbm],
        }
    }

    pub fn presets(self) -> Vec<Preset> {
        self.schemes()
            .iter()
            .map(|&s| preset(s).expect("every simulated scheme has a preset"))
            .collect()
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        Figure::ALL
            .into_iter()
            .find(|f| f.id() == t || f.id()[3..] == t)
            .ok_or_else(|| Error::Config(format!("unknown figure '{s}' (expected fig2..fig7)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Preset {
    pub scheme: Scheme,
    pub cfg: SchemeConfig,
    pub n_rx: usize,
}

fn build(
    scheme: Scheme,
    n_tx: usize,
    n_active: usize,
    m_rf: usize,
    mod_order: usize,
    kind: ConstellationKind,
) -> Preset {
    let (t_total, t_active) = if scheme.time_indexed() { (4, 2) } else { (1, 1) };
    let cfg = scheme
        .config(n_tx, n_active, m_rf, mod_order, kind, t_total, t_active)
        .expect("preset table is consistent");
    Preset {
        scheme,
        cfg,
        n_rx: BER_N_RX,
    }
}

/// 4 bpcu preset for `scheme`, or `None` for schemes no figure uses.
pub fn preset(scheme: Scheme) -> Option<Preset> {
    use ConstellationKind::{Psk, Qam};
    Some(match scheme {
        Scheme::Gsm => build(scheme, 5, 2, 0, 2, Psk),
        Scheme::TiGsm => build(scheme, 5, 2, 0, 16, Qam),
        Scheme::TiGsmMbm => build(scheme, 5, 2, 3, 2, Psk),
        Scheme::TiMbm => build(scheme, 1, 1, 6, 2, Psk),
        Scheme::Gqsm => build(scheme, 3, 2, 0, 4, Psk),
        Scheme::TiGqsm => build(scheme, 5, 2, 0, 2, Psk),
        Scheme::TiGqsmMbm => build(scheme, 4, 2, 2, 2, Psk),
        Scheme::GqsmMbm => build(scheme, 3, 2, 1, 2, Psk),
        Scheme::GsmMbm | Scheme::Mbm => return None,
    })
}

/// Every distinct BER preset.
pub fn all_presets() -> Vec<Preset> {
    Scheme::ALL.iter().filter_map(|&s| preset(s)).collect()
}

/// Per-slot bit counts of the rate figure: TI-GQSM, TI-MBM and TI-GQSM-MBM
/// templates over 128 slots with binary symbols.
pub fn fig2_templates() -> Vec<(Scheme, SchemeConfig)> {
    use ConstellationKind::Psk;
    let t = 128;
    [
        (Scheme::TiGqsm, 3, 2, 0),
        (Scheme::TiMbm, 1, 1, 3),
        (Scheme::TiGqsmMbm, 3, 2, 3),
        (Scheme::GqsmMbm, 3, 2, 3),
    ]
    .into_iter()
    .map(|(s, n_tx, n_a, m_rf)| {
        let (tt, ta) = if s.time_indexed() { (t, 1) } else { (1, 1) };
        (
            s,
            s.config(n_tx, n_a, m_rf, 2, Psk, tt, ta)
                .expect("rate template is consistent"),
        )
    })
    .collect()
}
