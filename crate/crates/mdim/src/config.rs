//! Flat TOML run configuration.
//!
//! Every key is optional; missing keys take the defaults of
//! [`RunConfig::default`]. A `[config]` table is also accepted so result
//! metadata files can be fed back in unchanged.
//!
//! ```toml
//! scheme = "ti-gqsm-mbm"
//! n_tx = 4
//! n_active = 2
//! m_rf = 2
//! t_total = 4
//! t_active = 2
//! mod_order = 2
//! constellation = "psk"
//! taps = 1
//! n_rx = 4
//! snr_db = "0:2:20"
//! nr_grid = "2:2:16"
//! nr_snr_db = 6.0
//! cee = false
//! seed = 1
//! max_frames = 2000000
//! target_errors = 200
//! workers = 0
//! ```

use std::path::Path;

use mdim_core::{ChannelModel, ConstellationKind, Scheme, SchemeConfig};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::{CeeMode, Grid, SimPlan, DEFAULT_MAX_FRAMES, DEFAULT_TARGET_ERRORS};
use crate::presets;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: String,
    pub n_tx: usize,
    pub n_active: usize,
    pub m_rf: usize,
    pub t_total: usize,
    pub t_active: usize,
    pub mod_order: usize,
    pub constellation: String,
    pub taps: usize,
    pub n_rx: usize,
    /// SNR grid in dB, `start:step:stop` or a comma list.
    pub snr_db: String,
    /// Receive-antenna grid for N_r sweeps.
    pub nr_grid: String,
    pub nr_snr_db: f64,
    pub cee: bool,
    /// Master seed; kept below 2^63 so it fits a TOML integer.
    pub seed: u64,
    pub max_frames: u64,
    pub target_errors: u64,
    /// 0 uses every available core.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let p = presets::preset(Scheme::TiGqsmMbm).expect("preset exists");
        let mut c = RunConfig {
            scheme: String::new(),
            n_tx: 0,
            n_active: 0,
            m_rf: 0,
            t_total: 0,
            t_active: 0,
            mod_order: 0,
            constellation: String::new(),
            taps: 1,
            n_rx: p.n_rx,
            snr_db: "0:2:20".into(),
            nr_grid: "2:2:16".into(),
            nr_snr_db: presets::FIG7_SNR_DB,
            cee: false,
            seed: 1,
            max_frames: DEFAULT_MAX_FRAMES,
            target_errors: DEFAULT_TARGET_ERRORS,
            workers: 0,
        };
        c.set_scheme(p.scheme, &p.cfg);
        c
    }
}

#[derive(Deserialize)]
struct Wrapped {
    config: RunConfig,
}

impl RunConfig {
    pub fn from_preset(scheme: Scheme) -> Result<Self> {
        let p = presets::preset(scheme).ok_or_else(|| Error::Config(format!("no preset for scheme '{scheme}'")))?;
        let mut c = RunConfig {
            n_rx: p.n_rx,
            ..RunConfig::default()
        };
        c.set_scheme(scheme, &p.cfg);
        Ok(c)
    }

    pub fn set_scheme(&mut self, scheme: Scheme, cfg: &SchemeConfig) {
        self.scheme = scheme.name().into();
        self.n_tx = cfg.n_tx;
        self.n_active = cfg.n_active;
        self.m_rf = cfg.m_rf;
        self.t_total = cfg.t_total;
        self.t_active = cfg.t_active;
        self.mod_order = cfg.mod_order;
        self.constellation = cfg.constellation.to_string();
        self.taps = cfg.taps;
    }

    pub fn parse(text: &str) -> Result<Self> {
        let value: toml::Table = toml::from_str(text)?;
        if value.contains_key("config") {
            Ok(toml::from_str::<Wrapped>(text)
                .map_err(|e| Error::Config(format!("[config] table: {e}")))?
                .config)
        } else {
            Ok(toml::from_str(text)?)
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> Result<String> {
        Ok(toml::to_string(self)?)
    }

    pub fn scheme_kind(&self) -> Result<Scheme> {
        self.scheme.parse().map_err(|e| Error::Config(format!("scheme: {e}")))
    }

    /// Validated scheme configuration; quadrature follows the scheme name.
    pub fn scheme_config(&self) -> Result<SchemeConfig> {
        let scheme = self.scheme_kind()?;
        let kind: ConstellationKind = self
            .constellation
            .parse()
            .map_err(|e| Error::Config(format!("constellation: {e}")))?;
        let mut cfg = scheme
            .config(
                self.n_tx,
                self.n_active,
                self.m_rf,
                self.mod_order,
                kind,
                self.t_total,
                self.t_active,
            )
            .map_err(|e| Error::Config(e.to_string()))?;
        cfg.taps = self.taps;
        cfg.validate().map_err(|e| Error::Config(e.to_string()))?;
        Ok(cfg)
    }

    fn check_seed(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(Error::Config("seed must be below 2^63".into()));
        }
        Ok(())
    }

    fn plan(&self, grid: Grid) -> Result<SimPlan> {
        self.check_seed()?;
        let plan = SimPlan {
            cfg: self.scheme_config()?,
            grid,
            cee: if self.cee {
                CeeMode::EqualNoise
            } else {
                CeeMode::Perfect
            },
            master_seed: self.seed,
            max_frames: self.max_frames,
            target_bit_errors: self.target_errors,
            channel: ChannelModel::Rayleigh,
        };
        plan.validate()?;
        Ok(plan)
    }

    pub fn snr_plan(&self) -> Result<SimPlan> {
        self.plan(Grid::Snr {
            snr_db: parse_grid(&self.snr_db)?,
            n_rx: self.n_rx,
        })
    }

    pub fn nr_plan(&self) -> Result<SimPlan> {
        let n_rx = parse_grid(&self.nr_grid)?
            .into_iter()
            .map(|v| {
                if v >= 1.0 && v.fract() == 0.0 {
                    Ok(v as usize)
                } else {
                    Err(Error::Config(format!(
                        "receive antenna count {v} is not a positive integer"
                    )))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        self.plan(Grid::Nr {
            n_rx,
            snr_db: self.nr_snr_db,
        })
    }

    pub fn worker_count(&self) -> usize {
        if self.workers == 0 {
            std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
        } else {
            self.workers
        }
    }
}

/// Parses `start:step:stop` (inclusive), a comma list, or a single value.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let bad = |what: &str| Error::Config(format!("grid '{text}': {what}"));
    let num = |s: &str| {
        s.trim()
            .parse::<f64>()
            .map_err(|_| bad(&format!("'{}' is not a number", s.trim())))
    };
    let parts: Vec<&str> = text.split(':').collect();
    let values = match parts.len() {
        1 => text
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(num)
            .collect::<Result<Vec<_>>>()?,
        3 => {
            let (start, step, stop) = (num(parts[0])?, num(parts[1])?, num(parts[2])?);
            if step <= 0.0 || !step.is_finite() {
                return Err(bad("step must be positive"));
            }
            let n = ((stop - start) / step + 1e-9).floor();
            if n < 0.0 || !n.is_finite() {
                return Err(bad("range is empty"));
            }
            if n > 1e6 {
                return Err(bad("too many points"));
            }
            (0..=n as usize).map(|i| start + step * i as f64).collect()
        }
        _ => return Err(bad("expected start:step:stop or a comma list")),
    };
    if values.is_empty() {
        return Err(bad("no points"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(bad("values must be finite"));
    }
    Ok(values)
}
