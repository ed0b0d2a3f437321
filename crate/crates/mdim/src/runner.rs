//! Sweeps with on-disk progress.

use std::path::Path;

use crate::config::RunConfig;
use crate::error::Result;
use crate::harness::{run_sweep_with, BerPoint, SimPlan, SweepResult};
use crate::io::{
    csv_string, gnuplot_table, output_paths, read_csv, unix_now, write_atomic, CsvRow, Curve, MetaFile, RunMeta,
};

pub struct Persist<'a> {
    pub out: &'a Path,
    pub resume: bool,
    pub command: &'a str,
}

fn meta(config: &RunConfig, plan: &SimPlan, command: &str, done: usize, wall: f64, workers: usize) -> MetaFile {
    MetaFile {
        run: RunMeta {
            command: command.into(),
            fingerprint: plan.fingerprint(),
            status: if done == plan.grid.len() { "complete" } else { "partial" }.into(),
            completed_points: done,
            total_points: plan.grid.len(),
            wall_seconds: wall,
            written_unix: unix_now(),
            workers,
            version: env!("CARGO_PKG_VERSION").into(),
        },
        config: config.clone(),
    }
}

/// Points already on disk for this exact plan, in grid order.
fn resumable(plan: &SimPlan, csv: &Path, meta_path: &Path) -> Vec<BerPoint> {
    let Ok(m) = MetaFile::load(meta_path) else {
        return Vec::new();
    };
    if m.run.fingerprint != plan.fingerprint() {
        return Vec::new();
    }
    let Ok(rows) = read_csv(csv) else {
        return Vec::new();
    };
    let fp = plan.fingerprint();
    let mut done = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if i >= plan.grid.len() || r.config_hash != fp || r.abscissa != plan.grid.point(i).2 {
            break;
        }
        done.push(r.point());
    }
    done
}

/// Runs `plan`, rewriting the CSV and metadata after every point when
/// `persist` is given. Returns the finished sweep.
pub fn run_persisted(
    config: &RunConfig,
    plan: &SimPlan,
    workers: usize,
    persist: Option<Persist<'_>>,
) -> Result<SweepResult> {
    let Some(persist) = persist else {
        return run_sweep_with(plan, workers, &[], |_, _| Ok(()));
    };
    let (csv, meta_path, dat) = output_paths(persist.out);
    let done = if persist.resume {
        resumable(plan, &csv, &meta_path)
    } else {
        Vec::new()
    };
    let clock = std::time::Instant::now();
    let mut rows: Vec<CsvRow> = done.iter().map(|p| CsvRow::new(plan, p)).collect();
    write_atomic(
        &meta_path,
        &toml::to_string(&meta(config, plan, persist.command, rows.len(), 0.0, workers))?,
    )?;
    let result = run_sweep_with(plan, workers, &done, |_, p| {
        rows.push(CsvRow::new(plan, p));
        write_atomic(&csv, &csv_string(&rows)?)?;
        let m = meta(
            config,
            plan,
            persist.command,
            rows.len(),
            clock.elapsed().as_secs_f64(),
            workers,
        );
        write_atomic(&meta_path, &toml::to_string(&m)?)
    })?;
    let rows: Vec<CsvRow> = result.points.iter().map(|p| CsvRow::new(plan, p)).collect();
    write_atomic(&csv, &csv_string(&rows)?)?;
    let m = meta(config, plan, persist.command, rows.len(), result.wall_seconds, workers);
    write_atomic(&meta_path, &toml::to_string(&m)?)?;
    let label = plan.cfg.scheme().name().to_string();
    write_atomic(
        &dat,
        &gnuplot_table(
            plan.grid.kind(),
            &[Curve {
                label,
                points: &result.points,
            }],
        ),
    )?;
    Ok(result)
}
