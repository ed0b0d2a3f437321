//! Command-line front end.
//!
//! Settings resolve in order: built-in defaults, `--config` file, `--preset`
//! (or a `--scheme` that differs from the file's), then individual flags.
//! The resolved configuration is echoed to stderr and stored next to every
//! result file.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use mdim_core::{
    bit_budget, ml_complexity, rate_sweep, rate_sweep_beta, t_opt, ConstellationKind, RateCurve, Scheme, SchemeConfig,
};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::harness::{BerPoint, SimPlan};
use crate::io::{csv_string, gnuplot_table, write_atomic, CsvRow, Curve};
use crate::presets::{self, Figure};
use crate::runner::{run_persisted, Persist};

#[derive(Debug, Parser)]
#[command(
    name = "mdim",
    version,
    about = "Multidimensional index modulation: rates, ML detection and BER sweeps"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rate versus number of active slots.
    Rate(RateArgs),
    /// Rate-maximizing number of active slots.
    Topt(RateArgs),
    /// BER versus SNR.
    Ber(RunArgs),
    /// BER versus number of receive antennas at fixed SNR.
    Nrsweep(RunArgs),
    /// ML search complexity estimate.
    Complexity(ComplexityArgs),
    /// Runs the bundled presets of one figure.
    ReproduceFigure(FigureArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct SchemeArgs {
    /// Flat TOML config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Start from the bundled 4 bpcu preset of this scheme.
    #[arg(long)]
    pub preset: Option<String>,
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long = "nt")]
    pub n_tx: Option<usize>,
    #[arg(long = "na")]
    pub n_active: Option<usize>,
    #[arg(long = "mrf")]
    pub m_rf: Option<usize>,
    #[arg(long = "T")]
    pub t_total: Option<usize>,
    #[arg(long = "Ta")]
    pub t_active: Option<usize>,
    #[arg(long = "M")]
    pub mod_order: Option<usize>,
    /// psk or qam.
    #[arg(long)]
    pub constellation: Option<String>,
    #[arg(long)]
    pub taps: Option<usize>,
    /// Receive antennas.
    #[arg(long = "nr")]
    pub n_rx: Option<usize>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct SimArgs {
    /// Output CSV path; metadata and gnuplot files are written alongside.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub max_frames: Option<u64>,
    #[arg(long)]
    pub target_errors: Option<u64>,
    /// Receiver uses an estimate with error variance equal to the noise variance.
    #[arg(long)]
    pub cee: bool,
    /// Continue a partial run found at `--out`.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Clone, Args)]
pub struct RateArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Per-slot parameters as `Nt=..,Na=..,mrf=..,M=..[,kind=psk|qam]`.
    #[arg(long)]
    pub beta_config: Option<String>,
    /// Per-slot bit count, instead of a scheme.
    #[arg(long)]
    pub beta: Option<usize>,
    /// Write the table as CSV to this path.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// SNR grid in dB: `start:step:stop` or a comma list.
    #[arg(long)]
    pub snr: Option<String>,
    /// Receive-antenna grid for nrsweep.
    #[arg(long)]
    pub nr_grid: Option<String>,
    /// Fixed SNR in dB for nrsweep.
    #[arg(long)]
    pub nr_snr: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ComplexityArgs {
    #[command(flatten)]
    pub scheme: SchemeArgs,
    /// Tabulate every preset of a figure instead.
    #[arg(long)]
    pub figure: Option<String>,
}

#[derive(Debug, Clone, Args)]
pub struct FigureArgs {
    /// fig2 .. fig7
    pub figure: String,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Config file supplying grids and run controls.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub snr: Option<String>,
    #[arg(long)]
    pub nr_grid: Option<String>,
}

fn parse_scheme(s: &str) -> Result<Scheme> {
    s.parse().map_err(|e| Error::Config(format!("scheme: {e}")))
}

impl SchemeArgs {
    pub fn resolve(&self) -> Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(p) = &self.preset {
            let keep = c.clone();
            c = RunConfig::from_preset(parse_scheme(p)?)?;
            c.snr_db = keep.snr_db;
            c.nr_grid = keep.nr_grid;
            c.nr_snr_db = keep.nr_snr_db;
            c.cee = keep.cee;
            c.seed = keep.seed;
            c.max_frames = keep.max_frames;
            c.target_errors = keep.target_errors;
            c.workers = keep.workers;
        }
        if let Some(s) = &self.scheme {
            let scheme = parse_scheme(s)?;
            if c.scheme_kind().ok() != Some(scheme) {
                if let Some(p) = presets::preset(scheme) {
                    c.set_scheme(scheme, &p.cfg);
                } else {
                    c.scheme = scheme.name().into();
                }
            }
        }
        macro_rules! set {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$f = v; })* };
        }
        set!(
            n_tx,
            n_active,
            m_rf,
            t_total,
            t_active,
            mod_order,
            constellation,
            taps,
            n_rx
        );
        Ok(c)
    }
}

impl SimArgs {
    fn apply(&self, c: &mut RunConfig) {
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.workers {
            c.workers = v;
        }
        if let Some(v) = self.max_frames {
            c.max_frames = v;
        }
        if let Some(v) = self.target_errors {
            c.target_errors = v;
        }
        if self.cee {
            c.cee = true;
        }
    }
}

fn echo(c: &RunConfig) -> Result<()> {
    let mut err = std::io::stderr().lock();
    let _ = writeln!(err, "# resolved configuration");
    for line in c.to_toml()?.lines() {
        let _ = writeln!(err, "# {line}");
    }
    Ok(())
}

/// Parses `Nt=3,Na=2,mrf=3,M=2[,kind=qam]`.
fn parse_beta_config(text: &str, scheme: Scheme, t_total: usize, taps: usize) -> Result<SchemeConfig> {
    let (mut nt, mut na, mut mrf, mut m, mut kind) = (1usize, 1usize, 0usize, 2usize, ConstellationKind::Psk);
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("beta-config entry '{part}' is not key=value")))?;
        let num = || {
            v.trim()
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("beta-config {}: '{}' is not an integer", k.trim(), v.trim())))
        };
        match k.trim().to_ascii_lowercase().as_str() {
            "nt" => nt = num()?,
            "na" => na = num()?,
            "mrf" | "m_rf" => mrf = num()?,
            "m" => m = num()?,
            "kind" | "constellation" => kind = v.parse().map_err(|e| Error::Config(format!("beta-config: {e}")))?,
            other => return Err(Error::Config(format!("beta-config: unknown key '{other}'"))),
        }
    }
    // a two-slot frame passes the structural check; the sweep sets the real T
    let (t, ta) = if scheme.time_indexed() { (2, 1) } else { (1, 1) };
    let mut cfg = scheme
        .config(nt, na, mrf, m, kind, t, ta)
        .map_err(|e| Error::Config(e.to_string()))?;
    if scheme.time_indexed() {
        cfg.t_total = t_total;
    }
    cfg.taps = taps;
    Ok(cfg)
}

/// Rate table for a template. Schemes without time indexing give a constant
/// row for every displayed `t_active`.
pub fn rate_table(scheme: Scheme, template: &SchemeConfig, t_total: usize) -> RateCurve {
    if scheme.time_indexed() {
        let mut cfg = *template;
        cfg.t_total = t_total;
        cfg.t_active = 1;
        rate_sweep(&cfg)
    } else {
        let bits = bit_budget(template).frame_bits;
        let mut curve = rate_sweep_beta(t_total, 0, template.taps);
        curve.t_total = 1;
        for p in &mut curve.points {
            p.frame_bits = bits;
        }
        curve.max_frame_bits = bits;
        curve.argmax = 1;
        curve.first_argmax = 1;
        curve.beta = bit_budget(template).beta;
        curve
    }
}

fn rate_inputs(a: &RateArgs) -> Result<(Scheme, SchemeConfig, usize)> {
    let t_total = a.scheme.t_total.unwrap_or(128);
    let taps = a.scheme.taps.unwrap_or(1);
    if t_total == 0 {
        return Err(Error::Config("T must be at least 1".into()));
    }
    if let Some(text) = &a.beta_config {
        let scheme = parse_scheme(a.scheme.scheme.as_deref().unwrap_or("ti-gqsm-mbm"))?;
        return Ok((scheme, parse_beta_config(text, scheme, t_total, taps)?, t_total));
    }
    let c = a.scheme.resolve()?;
    let cfg = c.scheme_config()?;
    Ok((c.scheme_kind()?, cfg, t_total))
}

fn rate_csv(scheme: Scheme, curve: &RateCurve, t_display: usize) -> String {
    let uses = curve.t_total + curve.taps - 1;
    let mut s = String::from("scheme,t_active,frame_bits,channel_uses,rate,is_argmax\n");
    for p in curve.points.iter().take(t_display) {
        s += &format!(
            "{},{},{},{},{},{}\n",
            scheme.name(),
            p.t_active,
            p.frame_bits,
            uses,
            p.frame_bits as f64 / uses as f64,
            u8::from(p.t_active == curve.argmax && scheme.time_indexed())
        );
    }
    s
}

fn cmd_rate(a: &RateArgs, out: &mut dyn Write) -> Result<()> {
    if let Some(beta) = a.beta {
        let t = a.scheme.t_total.unwrap_or(128);
        let curve = rate_sweep_beta(t, beta, a.scheme.taps.unwrap_or(1));
        writeln!(
            out,
            "# T={t} beta={beta} t_opt={:.4} argmax={}",
            t_opt(t, beta),
            curve.argmax
        )
        .map_err(stdout_err)?;
        let text = rate_csv(Scheme::TiGqsmMbm, &curve, t);
        return emit(&text, a.out.as_deref(), out);
    }
    let (scheme, template, t) = rate_inputs(a)?;
    let curve = rate_table(scheme, &template, t);
    let beta = bit_budget(&template).beta;
    if scheme.time_indexed() {
        writeln!(
            out,
            "# {scheme} T={t} beta={beta} t_opt={:.4} argmax={} max_rate={:.6}",
            t_opt(t, beta),
            curve.argmax,
            curve.max_rate()
        )
        .map_err(stdout_err)?;
    } else {
        writeln!(
            out,
            "# {scheme} beta={beta} rate={} (no time indexing)",
            curve.max_rate()
        )
        .map_err(stdout_err)?;
    }
    emit(&rate_csv(scheme, &curve, t), a.out.as_deref(), out)
}

fn cmd_topt(a: &RateArgs, out: &mut dyn Write) -> Result<()> {
    let t = a.scheme.t_total.unwrap_or(128);
    let beta = match a.beta {
        Some(b) => b,
        None => bit_budget(&rate_inputs(a)?.1).beta,
    };
    let curve = rate_sweep_beta(t, beta, a.scheme.taps.unwrap_or(1));
    writeln!(out, "T,beta,t_opt,argmax,max_frame_bits").map_err(stdout_err)?;
    writeln!(
        out,
        "{t},{beta},{:.4},{},{}",
        t_opt(t, beta),
        curve.argmax,
        curve.max_frame_bits
    )
    .map_err(stdout_err)
}

fn stdout_err(e: std::io::Error) -> Error {
    Error::io("writing output", e)
}

fn emit(text: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, text),
        None => out.write_all(text.as_bytes()).map_err(stdout_err),
    }
}

fn resolve_run(a: &RunArgs) -> Result<RunConfig> {
    let mut c = a.scheme.resolve()?;
    a.sim.apply(&mut c);
    if let Some(s) = &a.snr {
        c.snr_db = s.clone();
    }
    if let Some(s) = &a.nr_grid {
        c.nr_grid = s.clone();
    }
    if let Some(v) = a.nr_snr {
        c.nr_snr_db = v;
    }
    Ok(c)
}

fn sweep(c: &RunConfig, plan: &SimPlan, sim: &SimArgs, command: &str, out: &mut dyn Write) -> Result<()> {
    echo(c)?;
    let persist = sim.out.as_deref().map(|p| Persist {
        out: p,
        resume: sim.resume,
        command,
    });
    let to_stdout = persist.is_none();
    let r = run_persisted(c, plan, c.worker_count(), persist)?;
    if to_stdout {
        let rows: Vec<CsvRow> = r.points.iter().map(|p| CsvRow::new(plan, p)).collect();
        out.write_all(csv_string(&rows)?.as_bytes()).map_err(stdout_err)?;
    }
    Ok(())
}

fn cmd_complexity(a: &ComplexityArgs, out: &mut dyn Write) -> Result<()> {
    writeln!(
        out,
        "scheme,n_tx,n_active,m_rf,t_total,t_active,mod_order,n_rx,complexity"
    )
    .map_err(stdout_err)?;
    let rows: Vec<(Scheme, SchemeConfig, usize)> = match &a.figure {
        Some(f) => f
            .parse::<Figure>()?
            .presets()
            .into_iter()
            .map(|p| (p.scheme, p.cfg, p.n_rx))
            .collect(),
        None => {
            let c = a.scheme.resolve()?;
            vec![(c.scheme_kind()?, c.scheme_config()?, c.n_rx)]
        }
    };
    for (s, cfg, nr) in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            s.name(),
            cfg.n_tx,
            cfg.n_active,
            cfg.m_rf,
            cfg.t_total,
            cfg.t_active,
            cfg.mod_order,
            nr,
            ml_complexity(&cfg, nr)
        )
        .map_err(stdout_err)?;
    }
    Ok(())
}

fn cmd_reproduce(a: &FigureArgs, out: &mut dyn Write) -> Result<()> {
    let fig: Figure = a.figure.parse()?;
    let dir = a.sim.out.clone().unwrap_or_else(|| PathBuf::from("results"));
    let dir = dir.join(fig.id());
    if fig == Figure::Fig2 {
        let mut text = String::new();
        let mut curves = Vec::new();
        for (s, template) in presets::fig2_templates() {
            let curve = rate_table(s, &template, 128);
            let body = rate_csv(s, &curve, 128);
            if text.is_empty() {
                text = body;
            } else {
                text += body.split_once('\n').map_or("", |(_, rest)| rest);
            }
            writeln!(
                out,
                "{s}: beta={} t_opt={:.2} argmax={} max_rate={:.4}",
                curve.beta,
                t_opt(128, curve.beta),
                curve.argmax,
                curve.max_rate()
            )
            .map_err(stdout_err)?;
            curves.push((s, curve));
        }
        write_atomic(&dir.join("rate.csv"), &text)?;
        let mut dat = String::from("# t_active");
        for (s, _) in &curves {
            dat += &format!(" {s}");
        }
        dat.push('\n');
        for ta in 0..128 {
            dat += &format!("{}", ta + 1);
            for (_, c) in &curves {
                dat += &format!(" {}", c.rate_of(&c.points[ta]));
            }
            dat.push('\n');
        }
        return write_atomic(&dir.join("rate.dat"), &dat);
    }

    let mut base = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    a.sim.apply(&mut base);
    if let Some(s) = &a.snr {
        base.snr_db = s.clone();
    }
    if let Some(s) = &a.nr_grid {
        base.nr_grid = s.clone();
    }
    // figures with estimation error also get their perfect-CSI reference curves
    let modes: &[bool] = match fig {
        Figure::Fig5 | Figure::Fig6 => &[false, true],
        _ => &[fig.cee()],
    };
    let mut results: Vec<(String, String, Vec<BerPoint>)> = Vec::new();
    for p in fig.presets() {
        for &cee in modes {
            let mut c = base.clone();
            c.set_scheme(p.scheme, &p.cfg);
            c.n_rx = p.n_rx;
            c.cee = cee;
            let plan = if fig == Figure::Fig7 {
                c.nr_plan()?
            } else {
                c.snr_plan()?
            };
            let label = format!("{}{}", p.scheme.name(), if cee { ".cee" } else { ".perfect" });
            echo(&c)?;
            let path = dir.join(format!("{label}.csv"));
            let r = run_persisted(
                &c,
                &plan,
                c.worker_count(),
                Some(Persist {
                    out: &path,
                    resume: a.sim.resume,
                    command: "reproduce-figure",
                }),
            )?;
            writeln!(
                out,
                "{label}: {} points, {:.1} s -> {}",
                r.points.len(),
                r.wall_seconds,
                path.display()
            )
            .map_err(stdout_err)?;
            results.push((label, plan.grid.kind().to_string(), r.points));
        }
    }
    let curves: Vec<Curve<'_>> = results
        .iter()
        .map(|(l, _, pts)| Curve {
            label: l.clone(),
            points: pts,
        })
        .collect();
    let kind = results.first().map_or("snr_db", |r| r.1.as_str());
    write_atomic(&dir.join(format!("{}.dat", fig.id())), &gnuplot_table(kind, &curves))
}

/// Runs a parsed command, writing tables to `out`.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<()> {
    match &cli.command {
        Command::Rate(a) => cmd_rate(a, out),
        Command::Topt(a) => cmd_topt(a, out),
        Command::Ber(a) => {
            let c = resolve_run(a)?;
            let plan = c.snr_plan()?;
            sweep(&c, &plan, &a.sim, "ber", out)
        }
        Command::Nrsweep(a) => {
            let c = resolve_run(a)?;
            let plan = c.nr_plan()?;
            sweep(&c, &plan, &a.sim, "nrsweep", out)
        }
        Command::Complexity(a) => cmd_complexity(a, out),
        Command::ReproduceFigure(a) => cmd_reproduce(a, out),
    }
}
