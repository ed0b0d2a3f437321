//! Seeded Monte Carlo BER engine.
//!
//! Frames are processed in fixed batches. A batch is evaluated in parallel,
//! then folded into the running totals in frame order, so the stopping frame
//! and every count are the same for any number of workers.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use mdim_core::{bit_budget, frame_seed, run_frame, snr_to_sigma, ChannelModel, Detector, SchemeConfig, TrialSetup};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Frames evaluated per parallel batch. Part of the result contract: changing
/// it does not change results, only how much work past the stop is discarded.
pub const BATCH: u64 = 256;
pub const DEFAULT_MAX_FRAMES: u64 = 2_000_000;
pub const DEFAULT_TARGET_ERRORS: u64 = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CeeMode {
    #[default]
    Perfect,
    /// Estimate error variance equal to the noise variance.
    EqualNoise,
}

impl CeeMode {
    pub fn name(self) -> &'static str {
        match self {
            CeeMode::Perfect => "perfect",
            CeeMode::EqualNoise => "cee_equal_noise",
        }
    }
}

impl fmt::Display for CeeMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CeeMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "perfect" | "off" | "false" => Ok(CeeMode::Perfect),
            "cee_equal_noise" | "cee" | "on" | "true" => Ok(CeeMode::EqualNoise),
            other => Err(Error::Config(format!("unknown CEE mode '{other}'"))),
        }
    }
}

/// What a sweep varies.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Snr { snr_db: Vec<f64>, n_rx: usize },
    Nr { n_rx: Vec<usize>, snr_db: f64 },
}

impl Grid {
    pub fn len(&self) -> usize {
        match self {
            Grid::Snr { snr_db, .. } => snr_db.len(),
            Grid::Nr { n_rx, .. } => n_rx.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Grid::Snr { .. } => "snr_db",
            Grid::Nr { .. } => "n_rx",
        }
    }

    /// `(snr_db, n_rx, abscissa)` of point `i`.
    pub fn point(&self, i: usize) -> (f64, usize, f64) {
        match self {
            Grid::Snr { snr_db, n_rx } => (snr_db[i], *n_rx, snr_db[i]),
            Grid::Nr { n_rx, snr_db } => (*snr_db, n_rx[i], n_rx[i] as f64),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimPlan {
    pub cfg: SchemeConfig,
    pub grid: Grid,
    pub cee: CeeMode,
    pub master_seed: u64,
    pub max_frames: u64,
    pub target_bit_errors: u64,
    /// Forces the channel; [`ChannelModel::Zero`] is a test hook.
    pub channel: ChannelModel,
}

impl SimPlan {
    pub fn new(cfg: SchemeConfig, grid: Grid) -> Self {
        SimPlan {
            cfg,
            grid,
            cee: CeeMode::Perfect,
            master_seed: 1,
            max_frames: DEFAULT_MAX_FRAMES,
            target_bit_errors: DEFAULT_TARGET_ERRORS,
            channel: ChannelModel::Rayleigh,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.cfg.validate()?;
        if self.grid.is_empty() {
            return Err(Error::Config("empty sweep grid".into()));
        }
        if self.max_frames == 0 {
            return Err(Error::Config("max_frames must be at least 1".into()));
        }
        let bad_nr = match &self.grid {
            Grid::Snr { n_rx, .. } => *n_rx == 0,
            Grid::Nr { n_rx, .. } => n_rx.contains(&0),
        };
        if bad_nr {
            return Err(Error::Config("n_rx must be at least 1".into()));
        }
        Ok(())
    }

    /// Stable hex digest of the configuration and plan.
    pub fn fingerprint(&self) -> String {
        let c = &self.cfg;
        let mut text = format!(
            "n_tx={};n_active={};m_rf={};t_total={};t_active={};mod_order={};taps={};quadrature={};constellation={};",
            c.n_tx, c.n_active, c.m_rf, c.t_total, c.t_active, c.mod_order, c.taps, c.quadrature, c.constellation
        );
        match &self.grid {
            Grid::Snr { snr_db, n_rx } => {
                text += &format!("grid=snr;n_rx={n_rx};snr=");
                for s in snr_db {
                    text += &format!("{:016x},", s.to_bits());
                }
            }
            Grid::Nr { n_rx, snr_db } => {
                text += &format!("grid=nr;snr={:016x};n_rx=", snr_db.to_bits());
                for n in n_rx {
                    text += &format!("{n},");
                }
            }
        }
        text += &format!(
            ";cee={};seed={};max_frames={};target={};channel={:?}",
            self.cee, self.master_seed, self.max_frames, self.target_bit_errors, self.channel
        );
        let digest = Sha256::digest(text.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BerPoint {
    pub abscissa: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub total_bits: u64,
}

impl BerPoint {
    pub fn ber(&self) -> f64 {
        if self.total_bits == 0 {
            0.0
        } else {
            self.bit_errors as f64 / self.total_bits as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub fingerprint: String,
    pub points: Vec<BerPoint>,
    pub wall_seconds: f64,
}

fn pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::Pool(e.to_string()))
}

/// Simulates grid point `index` of `plan` on `workers` threads.
pub fn run_point(plan: &SimPlan, detector: &Detector, index: usize, workers: usize) -> Result<BerPoint> {
    run_point_in(plan, detector, index, &pool(workers)?)
}

fn run_point_in(plan: &SimPlan, detector: &Detector, index: usize, pool: &rayon::ThreadPool) -> Result<BerPoint> {
    let (snr_db, n_rx, abscissa) = plan.grid.point(index);
    let setup = TrialSetup {
        n_rx,
        sigma_n_sq: snr_to_sigma(snr_db),
        cee: plan.cee == CeeMode::EqualNoise,
        channel: plan.channel,
    };
    let mut acc = BerPoint {
        abscissa,
        frames: 0,
        bit_errors: 0,
        total_bits: 0,
    };
    let mut start = 0u64;
    while start < plan.max_frames {
        let end = (start + BATCH).min(plan.max_frames);
        let outcomes: Vec<_> = pool.install(|| {
            (start..end)
                .into_par_iter()
                .map(|f| {
                    run_frame(detector, &setup, frame_seed(plan.master_seed, index as u64, f)).map_err(|source| {
                        Error::Frame {
                            point: index,
                            frame: f,
                            source,
                        }
                    })
                })
                .collect()
        });
        for o in outcomes {
            let o = o?;
            acc.frames += 1;
            acc.bit_errors += o.bit_errors;
            acc.total_bits += o.bits;
            if acc.bit_errors >= plan.target_bit_errors {
                return Ok(acc);
            }
        }
        start = end;
    }
    Ok(acc)
}

/// Runs every grid point, calling `on_point` after each one so callers can
/// persist progress. Points listed in `done` are reused instead of rerun.
pub fn run_sweep_with(
    plan: &SimPlan,
    workers: usize,
    done: &[BerPoint],
    mut on_point: impl FnMut(usize, &BerPoint) -> Result<()>,
) -> Result<SweepResult> {
    plan.validate()?;
    let clock = Instant::now();
    let detector = Detector::new(&plan.cfg)?;
    let pool = pool(workers)?;
    let mut points = Vec::with_capacity(plan.grid.len());
    for i in 0..plan.grid.len() {
        let p = match done.get(i) {
            Some(p) => p.clone(),
            None => {
                let p = run_point_in(plan, &detector, i, &pool)?;
                on_point(i, &p)?;
                p
            }
        };
        points.push(p);
    }
    Ok(SweepResult {
        fingerprint: plan.fingerprint(),
        points,
        wall_seconds: clock.elapsed().as_secs_f64(),
    })
}

pub fn run_sweep(plan: &SimPlan, workers: usize) -> Result<SweepResult> {
    run_sweep_with(plan, workers, &[], |_, _| Ok(()))
}

/// Bits per frame of the plan's scheme.
pub fn frame_bits(cfg: &SchemeConfig) -> u64 {
    bit_budget(cfg).frame_bits as u64
}
