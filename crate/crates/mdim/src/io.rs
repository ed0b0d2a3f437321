//! Result files.
//!
//! A sweep written to `name.csv` produces:
//!
//! * `name.csv`: header
//!   `scheme,config_hash,abscissa_kind,abscissa,frames,bit_errors,total_bits,ber,seed`
//!   and one row per grid point. Floats use the shortest decimal that parses
//!   back to the same value; counts are plain integers.
//! * `name.meta.toml`: a `[run]` table (fingerprint, status, completed
//!   points, wall time) and a `[config]` table holding the resolved
//!   [`RunConfig`]. The file is itself a valid config.
//! * `name.dat`: whitespace-separated columns for gnuplot.
//!
//! While a sweep runs, `status = "partial"`; rerunning with resume enabled
//! picks up after the last completed point if the fingerprint matches.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harness::{BerPoint, SimPlan};

pub const CSV_HEADER: &str = "scheme,config_hash,abscissa_kind,abscissa,frames,bit_errors,total_bits,ber,seed";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub scheme: String,
    pub config_hash: String,
    pub abscissa_kind: String,
    pub abscissa: f64,
    pub frames: u64,
    pub bit_errors: u64,
    pub total_bits: u64,
    pub ber: f64,
    pub seed: u64,
}

impl CsvRow {
    pub fn new(plan: &SimPlan, p: &BerPoint) -> Self {
        CsvRow {
            scheme: plan.cfg.scheme().name().into(),
            config_hash: plan.fingerprint(),
            abscissa_kind: plan.grid.kind().into(),
            abscissa: p.abscissa,
            frames: p.frames,
            bit_errors: p.bit_errors,
            total_bits: p.total_bits,
            ber: p.ber(),
            seed: plan.master_seed,
        }
    }

    pub fn point(&self) -> BerPoint {
        BerPoint {
            abscissa: self.abscissa,
            frames: self.frames,
            bit_errors: self.bit_errors,
            total_bits: self.total_bits,
        }
    }
}

pub fn csv_string(rows: &[CsvRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    if rows.is_empty() {
        return Ok(format!("{CSV_HEADER}\n"));
    }
    let bytes = w.into_inner().map_err(|e| Error::io("csv buffer", e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path)?;
    let header = r.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Config(format!(
            "{}: unexpected header '{header}'",
            path.display()
        )));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub command: String,
    pub fingerprint: String,
    /// `partial` while running, `complete` once every point is written.
    pub status: String,
    pub completed_points: usize,
    pub total_points: usize,
    pub wall_seconds: f64,
    /// Seconds since the Unix epoch when the file was written.
    pub written_unix: u64,
    pub workers: usize,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetaFile {
    pub run: RunMeta,
    pub config: RunConfig,
}

impl MetaFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        Ok(toml::from_str(&text)?)
    }
}

pub fn unix_now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Writes `contents` atomically through a sibling temporary file.
pub fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
    }
    let tmp = path.with_extension("tmp~");
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(format!("writing {}", tmp.display()), e))?;
    f.write_all(contents.as_bytes())
        .and_then(|_| f.sync_all())
        .map_err(|e| Error::io(format!("writing {}", tmp.display()), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(format!("renaming to {}", path.display()), e))
}

/// Sibling paths `(csv, meta, dat)` for an output stem such as `out/fig3.csv`.
pub fn output_paths(out: &Path) -> (PathBuf, PathBuf, PathBuf) {
    let stem = if out.extension().is_some_and(|e| e == "csv") {
        out.with_extension("")
    } else {
        out.to_path_buf()
    };
    let with = |suffix: &str| {
        let mut s = stem.clone().into_os_string();
        s.push(suffix);
        PathBuf::from(s)
    };
    (with(".csv"), with(".meta.toml"), with(".dat"))
}

/// One named BER curve for the gnuplot table.
pub struct Curve<'a> {
    pub label: String,
    pub points: &'a [BerPoint],
}

/// Wide table: first column the abscissa, then one BER column per curve.
/// Abscissas missing from a curve are written as `NaN`, which gnuplot skips.
pub fn gnuplot_table(abscissa_kind: &str, curves: &[Curve<'_>]) -> String {
    let mut xs: Vec<f64> = curves
        .iter()
        .flat_map(|c| c.points.iter().map(|p| p.abscissa))
        .collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    let mut out = format!("# {abscissa_kind}");
    for c in curves {
        out += &format!(" {}", c.label);
    }
    out.push('\n');
    for x in xs {
        out += &format!("{x}");
        for c in curves {
            match c.points.iter().find(|p| p.abscissa == x) {
                Some(p) => out += &format!(" {:e}", p.ber()),
                None => out += " NaN",
            }
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::Grid;
    use mdim_core::Scheme;

    fn plan() -> SimPlan {
        let p = crate::presets::preset(Scheme::Gqsm).unwrap();
        SimPlan::new(
            p.cfg,
            Grid::Snr {
                snr_db: vec![0.0, 2.5],
                n_rx: 4,
            },
        )
    }

    #[test]
    fn csv_header_and_round_trip() {
        let plan = plan();
        let pts = [
            BerPoint {
                abscissa: 0.0,
                frames: 10,
                bit_errors: 7,
                total_bits: 40,
            },
            BerPoint {
                abscissa: 2.5,
                frames: 3,
                bit_errors: 0,
                total_bits: 12,
            },
        ];
        let rows: Vec<CsvRow> = pts.iter().map(|p| CsvRow::new(&plan, p)).collect();
        let text = csv_string(&rows).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert!(text
            .lines()
            .nth(1)
            .unwrap()
            .starts_with(&format!("gqsm,{},snr_db,0.0,10,7,40,0.175,1", plan.fingerprint())));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        write_atomic(&path, &text).unwrap();
        let back = read_csv(&path).unwrap();
        assert_eq!(back, rows);
        assert_eq!(back[1].point(), pts[1]);
    }

    #[test]
    fn empty_csv_has_header() {
        assert_eq!(csv_string(&[]).unwrap(), format!("{CSV_HEADER}\n"));
    }

    #[test]
    fn sibling_paths() {
        let (c, m, d) = output_paths(Path::new("out/fig3.csv"));
        assert_eq!(c, Path::new("out/fig3.csv"));
        assert_eq!(m, Path::new("out/fig3.meta.toml"));
        assert_eq!(d, Path::new("out/fig3.dat"));
        assert_eq!(output_paths(Path::new("run")).0, Path::new("run.csv"));
    }

    #[test]
    fn gnuplot_fills_gaps() {
        let a = [BerPoint {
            abscissa: 0.0,
            frames: 1,
            bit_errors: 1,
            total_bits: 4,
        }];
        let b = [BerPoint {
            abscissa: 2.0,
            frames: 1,
            bit_errors: 0,
            total_bits: 4,
        }];
        let t = gnuplot_table(
            "snr_db",
            &[
                Curve {
                    label: "a".into(),
                    points: &a,
                },
                Curve {
                    label: "b".into(),
                    points: &b,
                },
            ],
        );
        assert_eq!(t, "# snr_db a b\n0 2.5e-1 NaN\n2 NaN 0e0\n");
    }

    #[test]
    fn meta_round_trip() {
        let m = MetaFile {
            run: RunMeta {
                command: "ber".into(),
                fingerprint: "00ff".into(),
                status: "partial".into(),
                completed_points: 1,
                total_points: 3,
                wall_seconds: 0.5,
                written_unix: 1,
                workers: 2,
                version: "0.1.0".into(),
            },
            config: RunConfig::default(),
        };
        let text = toml::to_string(&m).unwrap();
        assert_eq!(toml::from_str::<MetaFile>(&text).unwrap(), m);
        // the metadata file doubles as a config file
        assert_eq!(RunConfig::parse(&text).unwrap(), m.config);
    }
}
