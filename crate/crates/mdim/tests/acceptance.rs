//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fail.
//!
//! BER criteria share one set of simulated curves. Required SNR at a target
//! BER is found by stepping the SNR in 1 dB increments until the BER drops
//! below the target, then interpolating log10(BER) linearly between the two
//! bracketing points.

use std::collections::{HashMap, HashSet};
use std::time::Instant;

use mdim::config::RunConfig;
use mdim::harness::{run_point, BerPoint, CeeMode, Grid, SimPlan};
use mdim::presets::{self, all_presets, preset, Figure};
use mdim::runner::{run_persisted, Persist};
use mdim_core::{
    bit_budget, corrupt_estimate, draw_channel, enumerate_codebook, rank_combination, rate_sweep_beta, t_opt, transmit,
    unrank_combination, ChannelModel, Complex64, ConstellationKind, Detector, NoiseModel, Scheme, SchemeConfig,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TARGET_BER: f64 = 1e-3;
/// Errors collected per BER point.
const ERRORS_PER_POINT: u64 = 500;
/// Minimum errors at each bracketing point for a required-SNR estimate.
const MIN_BRACKET_ERRORS: u64 = 200;
const MAX_FRAMES: u64 = 2_000_000;
const SEED: u64 = 20_240_611;
/// Slack on "weakly increasing" CEE degradation. Each required SNR comes
/// from two points with >= 200 errors (relative BER error <= 1/sqrt(200) ≈ 7%
/// each, ≈ 0.03 decades); at the observed slopes of 0.3 to 0.5 decades/dB
/// that is ≈ 0.1 dB per required SNR, and a difference of two degradations
/// combines four of them: 2 · 0.1 · 1.5 ≈ 0.3 dB.
const DEGRADATION_SLACK_DB: f64 = 0.3;
/// Comparisons "within Monte Carlo noise" allow three standard deviations,
/// with the standard deviation of an estimate taken as ber / sqrt(errors).
const SIGMAS: f64 = 3.0;

struct Report {
    failed: Vec<String>,
}

impl Report {
    fn check(&mut self, id: &str, ok: bool, detail: impl AsRef<str>) {
        println!("{id} {} {}", if ok { "PASS" } else { "FAIL" }, detail.as_ref());
        if !ok {
            self.failed.push(id.to_string());
        }
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn sd(p: &BerPoint) -> f64 {
    p.ber() / (p.bit_errors.max(1) as f64).sqrt()
}

/// True when `a <= b` holds within Monte Carlo noise.
fn le_noisy(a: &BerPoint, b: &BerPoint) -> bool {
    a.ber() - b.ber() <= SIGMAS * (sd(a).powi(2) + sd(b).powi(2)).sqrt()
}

#[derive(Debug, Clone)]
struct SnrCurve {
    points: Vec<BerPoint>,
    /// Interpolated SNR at [`TARGET_BER`], if the bracket holds enough errors.
    required: Option<f64>,
}

fn snr_curve(scheme: Scheme, cee: CeeMode) -> SnrCurve {
    let p = preset(scheme).expect("preset");
    let grid: Vec<f64> = (0..=40).map(f64::from).collect();
    let mut plan = SimPlan::new(
        p.cfg,
        Grid::Snr {
            snr_db: grid,
            n_rx: p.n_rx,
        },
    );
    plan.cee = cee;
    plan.master_seed = SEED;
    plan.max_frames = MAX_FRAMES;
    plan.target_bit_errors = ERRORS_PER_POINT;
    let det = Detector::new(&p.cfg).expect("detector");
    let mut points: Vec<BerPoint> = Vec::new();
    for i in 0..plan.grid.len() {
        let pt = run_point(&plan, &det, i, workers()).expect("simulation point");
        let below = pt.ber() < TARGET_BER;
        points.push(pt);
        if below {
            break;
        }
    }
    let n = points.len();
    let required = (n >= 2).then(|| (&points[n - 2], &points[n - 1])).and_then(|(a, b)| {
        let enough = a.bit_errors >= MIN_BRACKET_ERRORS && b.bit_errors >= MIN_BRACKET_ERRORS;
        (enough && a.ber() >= TARGET_BER && b.ber() < TARGET_BER).then(|| {
            let (la, lb) = (a.ber().log10(), b.ber().log10());
            a.abscissa + (la - TARGET_BER.log10()) / (la - lb) * (b.abscissa - a.abscissa)
        })
    });
    SnrCurve { points, required }
}

fn fmt_req(c: &SnrCurve) -> String {
    c.required.map_or("n/a".into(), |r| format!("{r:.2} dB"))
}

fn ac1(r: &mut Report) {
    let clock = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for (beta, expected, topt) in [(3usize, 113usize, 113.78), (4, 120, 120.47), (6, 126, 126.03)] {
        let curve = rate_sweep_beta(128, beta, 1);
        let t = t_opt(128, beta);
        let arg_ok = curve.argmax.abs_diff(expected) <= 1;
        let t_ok = (t - topt).abs() <= 0.01;
        ok &= arg_ok && t_ok;
        detail.push(format!(
            "beta={beta}: argmax {} (expected {expected} ± 1), t_opt {t:.4}",
            curve.argmax
        ));
    }
    // the same sweeps through full scheme templates with M = 2
    for (scheme, template) in presets::fig2_templates() {
        if scheme.time_indexed() {
            let b = bit_budget(&template).beta;
            let c = mdim_core::rate_sweep(&template);
            ok &= c.argmax == rate_sweep_beta(128, b, 1).argmax;
        }
    }
    let elapsed = clock.elapsed().as_secs_f64();
    ok &= elapsed < 1.0;
    r.check("AC1", ok, format!("{}; {elapsed:.3} s", detail.join("; ")));
}

fn ac2(r: &mut Report) {
    let mut ok = true;
    let mut detail = Vec::new();
    for fig in Figure::ALL.into_iter().filter(|f| *f != Figure::Fig2) {
        for p in fig.presets() {
            let b = bit_budget(&p.cfg);
            let want = 4 * p.cfg.channel_uses();
            let good = b.frame_bits == want && (p.cfg.t_total != 4 || b.frame_bits == 16) && p.cfg.taps == 1;
            ok &= good;
            if !good {
                detail.push(format!("{fig} {}: {} bits", p.scheme, b.frame_bits));
            }
        }
    }
    r.check(
        "AC2",
        ok,
        if detail.is_empty() {
            "all presets carry 4 bpcu".to_string()
        } else {
            detail.join("; ")
        },
    );
}

fn ac3(r: &mut Report, perfect: &HashMap<Scheme, SnrCurve>) {
    let req = |s: Scheme| perfect[&s].required;
    let orders: [&[Scheme]; 2] = [
        &[Scheme::TiGsmMbm, Scheme::TiMbm, Scheme::TiGsm, Scheme::Gsm],
        &[Scheme::TiGqsmMbm, Scheme::TiMbm, Scheme::TiGqsm, Scheme::Gqsm],
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for order in orders {
        let vals: Vec<Option<f64>> = order.iter().map(|&s| req(s)).collect();
        let strict = vals
            .windows(2)
            .all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if a < b));
        ok &= strict;
        detail.push(
            order
                .iter()
                .map(|&s| format!("{s} {}", fmt_req(&perfect[&s])))
                .collect::<Vec<_>>()
                .join(" < "),
        );
    }
    let gap = match (req(Scheme::TiMbm), req(Scheme::TiGqsmMbm)) {
        (Some(a), Some(b)) => Some(a - b),
        _ => None,
    };
    let gap_ok = gap.is_some_and(|g| (g - 3.0).abs() <= 2.0);
    ok &= gap_ok;
    detail.push(format!(
        "ti-gqsm-mbm gain over ti-mbm {}",
        gap.map_or("n/a".into(), |g| format!("{g:.2} dB"))
    ));
    r.check("AC3", ok, detail.join("; "));
}

fn ac4(r: &mut Report, perfect: &HashMap<Scheme, SnrCurve>, cee: &HashMap<Scheme, SnrCurve>) {
    let mut ok = true;
    let mut detail = Vec::new();
    for (&s, c) in cee {
        let p = &perfect[&s];
        for cp in &c.points {
            if let Some(pp) = p.points.iter().find(|pp| pp.abscissa == cp.abscissa) {
                if cp.bit_errors >= 100 && pp.bit_errors >= 100 && !le_noisy(pp, cp) {
                    ok = false;
                    detail.push(format!(
                        "{s} at {} dB: cee {:.3e} < perfect {:.3e}",
                        cp.abscissa,
                        cp.ber(),
                        pp.ber()
                    ));
                }
            }
        }
    }
    for family in [
        [Scheme::Gsm, Scheme::TiGsm, Scheme::TiGsmMbm],
        [Scheme::Gqsm, Scheme::TiGqsm, Scheme::TiGqsmMbm],
    ] {
        let shifts: Vec<Option<f64>> = family
            .iter()
            .map(|s| Some(cee[s].required? - perfect[s].required?))
            .collect();
        let mono = shifts
            .windows(2)
            .all(|w| matches!((w[0], w[1]), (Some(a), Some(b)) if a <= b + DEGRADATION_SLACK_DB));
        ok &= mono;
        detail.push(
            family
                .iter()
                .zip(&shifts)
                .map(|(s, d)| format!("{s} +{}", d.map_or("n/a".into(), |d| format!("{d:.2} dB"))))
                .collect::<Vec<_>>()
                .join(", "),
        );
    }
    r.check("AC4", ok, detail.join("; "));
}

fn ac5(r: &mut Report) {
    let schemes = Figure::Fig7.schemes();
    let mut curves: HashMap<Scheme, Vec<BerPoint>> = HashMap::new();
    for &s in schemes {
        let p = preset(s).expect("preset");
        let mut plan = SimPlan::new(
            p.cfg,
            Grid::Nr {
                n_rx: presets::FIG7_N_RX.to_vec(),
                snr_db: presets::FIG7_SNR_DB,
            },
        );
        plan.cee = CeeMode::EqualNoise;
        plan.master_seed = SEED;
        plan.max_frames = MAX_FRAMES;
        plan.target_bit_errors = ERRORS_PER_POINT;
        curves.insert(s, mdim::harness::run_sweep(&plan, workers()).expect("sweep").points);
    }
    let mut ok = true;
    let mut detail = Vec::new();
    for &s in schemes {
        let c = &curves[&s];
        let mono = c.windows(2).all(|w| le_noisy(&w[1], &w[0]));
        ok &= mono;
        detail.push(format!(
            "{s} [{}]{}",
            c.iter()
                .map(|p| format!("{:.2e}", p.ber()))
                .collect::<Vec<_>>()
                .join(" "),
            if mono { "" } else { " not monotone" }
        ));
    }
    let (a, b, c) = (
        &curves[&Scheme::TiGqsmMbm],
        &curves[&Scheme::GqsmMbm],
        &curves[&Scheme::TiGqsm],
    );
    for i in 0..presets::FIG7_N_RX.len() {
        let good = le_noisy(&a[i], &b[i]) && le_noisy(&b[i], &c[i]);
        if !good {
            ok = false;
            detail.push(format!("order broken at n_rx={}", presets::FIG7_N_RX[i]));
        }
    }
    r.check("AC5", ok, detail.join("; "));
}

fn ac6_rank_unrank(r: &mut Report) {
    let mut ok = true;
    for n in 0..=8usize {
        for k in 0..=n {
            // lexicographic k-subsets by bitmask, independent of the library
            let mut subsets: Vec<Vec<usize>> = (0u32..1 << n)
                .filter(|m| m.count_ones() as usize == k)
                .map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect())
                .collect();
            subsets.sort();
            let addressable = if subsets.len() <= 1 {
                1
            } else {
                1usize << (usize::BITS - 1 - subsets.len().leading_zeros())
            };
            for (i, s) in subsets.iter().take(addressable).enumerate() {
                ok &= unrank_combination(n, k, i as u128).ok().as_ref() == Some(s);
                ok &= rank_combination(n, k, s).ok() == Some(i as u128);
            }
            ok &= unrank_combination(n, k, addressable as u128).is_err();
        }
    }
    r.check("AC6.rank", ok, "exhaustive round trip for n <= 8");
}

fn ac6_injective(r: &mut Report) {
    let mut ok = true;
    let mut detail = Vec::new();
    for p in all_presets() {
        let book = mdim_core::Codebook::new(&p.cfg).expect("codebook");
        let d = p.cfg.slot_dim();
        let mut seen = HashSet::with_capacity(book.len() as usize);
        for f in book.iter() {
            let key: Vec<(usize, u64, u64)> = f
                .nonzeros(d)
                .map(|(c, x)| (c, x.re.to_bits(), x.im.to_bits()))
                .collect();
            seen.insert(key);
        }
        let good = seen.len() as u64 == book.len();
        ok &= good;
        detail.push(format!("{} {}/{}", p.scheme, seen.len(), book.len()));
    }
    r.check("AC6.injective", ok, detail.join(", "));
}

fn ac6_noiseless(r: &mut Report) {
    let mut ok = true;
    for p in all_presets() {
        let mut plan = SimPlan::new(
            p.cfg,
            Grid::Snr {
                snr_db: vec![f64::INFINITY],
                n_rx: p.n_rx,
            },
        );
        plan.max_frames = 10_000;
        plan.target_bit_errors = u64::MAX;
        let det = Detector::new(&p.cfg).expect("detector");
        let pt = run_point(&plan, &det, 0, workers()).expect("point");
        ok &= pt.frames == 10_000 && pt.bit_errors == 0;
    }
    r.check("AC6.noiseless", ok, "10^4 frames per preset, zero noise, perfect CSI");
}

fn dense_oracle(cfg: &SchemeConfig, y: &[Complex64], h: &mdim_core::CMatrix) -> u64 {
    let frames = enumerate_codebook(cfg, 16).expect("small codebook");
    let mut best = (f64::INFINITY, 0u64);
    for (i, f) in frames.iter().enumerate() {
        let hs = h.mul_vec(&f.stacked).expect("shapes");
        let m: f64 = y.iter().zip(&hs).map(|(a, b)| (a - b).norm_sqr()).sum();
        if m < best.0 {
            best = (m, i as u64);
        }
    }
    best.1
}

fn random_observation(
    cfg: &SchemeConfig,
    n_rx: usize,
    snr_db: f64,
    cee: bool,
    rng: &mut ChaCha8Rng,
) -> (Vec<Complex64>, mdim_core::CMatrix) {
    let book = mdim_core::Codebook::new(cfg).expect("codebook");
    let frame = book.frame(rng.random_range(0..book.len()));
    let mut ch = draw_channel(cfg, n_rx, ChannelModel::Rayleigh, rng);
    let noise = NoiseModel::from_snr_db(snr_db);
    if cee {
        ch = corrupt_estimate(&ch, noise.sigma_n_sq, rng).expect("estimate");
    }
    let y = transmit(&ch, &frame, noise, rng).expect("transmit");
    (y, ch.estimate)
}

fn small_configs() -> Vec<(SchemeConfig, usize)> {
    let psk = ConstellationKind::Psk;
    vec![
        (preset(Scheme::GqsmMbm).unwrap().cfg, 4),
        (preset(Scheme::Gsm).unwrap().cfg, 4),
        (Scheme::TiGqsmMbm.config(3, 2, 1, 2, psk, 4, 2).unwrap(), 2),
        (Scheme::TiGsm.config(3, 1, 0, 4, psk, 3, 2).unwrap(), 3),
    ]
}

fn ac6_oracle(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let configs = small_configs();
    let mut mismatches = 0;
    let frames = 1000;
    for i in 0..frames {
        let (cfg, n_rx) = configs[i % configs.len()];
        let snr = rng.random_range(0.0..15.0);
        let (y, h) = random_observation(&cfg, n_rx, snr, i % 2 == 1, &mut rng);
        let det = Detector::new(&cfg).expect("detector");
        if det.detect(&y, &h).expect("detect").codeword_index != dense_oracle(&cfg, &y, &h) {
            mismatches += 1;
        }
    }
    r.check(
        "AC6.oracle",
        mismatches == 0,
        format!("{mismatches} mismatches in {frames} noisy frames"),
    );
}

fn ac6_scaling(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut ok = true;
    for s in [Scheme::TiGqsmMbm, Scheme::GqsmMbm, Scheme::TiGsm] {
        let p = preset(s).unwrap();
        let det = Detector::new(&p.cfg).expect("detector");
        for i in 0..20 {
            let (y, h) = random_observation(&p.cfg, p.n_rx, 8.0, i % 2 == 0, &mut rng);
            let c = Complex64::from_polar(
                rng.random_range(0.1..10.0),
                rng.random_range(0.0..std::f64::consts::TAU),
            );
            let ys: Vec<Complex64> = y.iter().map(|v| v * c).collect();
            let a = det.detect(&y, &h).unwrap();
            let b = det.detect(&ys, &h.scale(c)).unwrap();
            ok &= a.bits == b.bits;
        }
    }
    r.check("AC6.scaling", ok, "argmin unchanged under common complex scaling");
}

fn ac6_workers(r: &mut Report) {
    let dir = tempfile::tempdir().expect("tempdir");
    let mut c = RunConfig::from_preset(Scheme::TiGqsmMbm).unwrap();
    c.snr_db = "0:3:12".into();
    c.cee = true;
    c.max_frames = 3000;
    c.target_errors = 300;
    let plan = c.snr_plan().unwrap();
    let mut texts = Vec::new();
    for w in [1usize, 8] {
        let out = dir.path().join(format!("w{w}.csv"));
        run_persisted(
            &c,
            &plan,
            w,
            Some(Persist {
                out: &out,
                resume: false,
                command: "ber",
            }),
        )
        .expect("sweep");
        texts.push(std::fs::read(&out).expect("csv"));
    }
    r.check(
        "AC6.workers",
        texts[0] == texts[1],
        "1 vs 8 workers, byte-identical CSV",
    );
}

fn ac6_sandwich(r: &mut Report) {
    let mut ok = true;
    for t in 1..=64usize {
        for beta in 0..=8usize {
            let curve = rate_sweep_beta(t, beta, 1);
            for p in &curve.points {
                let ta = p.t_active;
                let log2c: f64 = (0..ta).map(|i| ((t - i) as f64 / (ta - i) as f64).log2()).sum();
                let upper = log2c + (ta * beta) as f64;
                let v = p.frame_bits as f64;
                ok &= upper - 1.0 < v + 1e-9 && v <= upper + 1e-9;
            }
        }
    }
    r.check(
        "AC6.sandwich",
        ok,
        "log2 C + Ta·beta - 1 < bits <= log2 C + Ta·beta for T <= 64, beta <= 8",
    );
}

fn ac6_taps(r: &mut Report) {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 2);
    let mut ok = true;
    let mut detail = Vec::new();
    for taps in [1usize, 2] {
        let mut cfg = Scheme::Gsm.config(1, 1, 0, 2, ConstellationKind::Psk, 1, 1).unwrap();
        cfg.taps = taps;
        let n = 100_000;
        let (mut sum, mut sq) = (Complex64::new(0.0, 0.0), 0.0);
        for _ in 0..n {
            let v = draw_channel(&cfg, 1, ChannelModel::Rayleigh, &mut rng).taps[0].get(0, 0);
            sum += v;
            sq += v.norm_sqr();
        }
        let var = sq / n as f64 - (sum / n as f64).norm_sqr();
        let want = 1.0 / taps as f64;
        ok &= (var / want - 1.0).abs() <= 0.02;
        detail.push(format!("L={taps}: {var:.4} (want {want})"));
    }
    r.check("AC6.taps", ok, detail.join(", "));
}

fn ac6_zero_channel(r: &mut Report) {
    let p = preset(Scheme::TiGqsmMbm).unwrap();
    let mut plan = SimPlan::new(
        p.cfg,
        Grid::Snr {
            snr_db: vec![10.0],
            n_rx: p.n_rx,
        },
    );
    plan.channel = ChannelModel::Zero;
    plan.max_frames = 10_000;
    plan.target_bit_errors = u64::MAX;
    let det = Detector::new(&p.cfg).unwrap();
    let pt = run_point(&plan, &det, 0, workers()).unwrap();
    r.check(
        "AC6.zero",
        (pt.ber() - 0.5).abs() <= 0.02,
        format!("BER {:.4} over {} frames", pt.ber(), pt.frames),
    );
}

fn main() {
    let mut r = Report { failed: Vec::new() };
    ac1(&mut r);
    ac2(&mut r);
    ac6_rank_unrank(&mut r);
    ac6_injective(&mut r);
    ac6_noiseless(&mut r);
    ac6_oracle(&mut r);
    ac6_scaling(&mut r);
    ac6_workers(&mut r);
    ac6_sandwich(&mut r);
    ac6_taps(&mut r);
    ac6_zero_channel(&mut r);

    let clock = Instant::now();
    let simulated: Vec<Scheme> = [Figure::Fig3, Figure::Fig4]
        .iter()
        .flat_map(|f| f.schemes().iter().copied())
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    let perfect: HashMap<Scheme, SnrCurve> = simulated.iter().map(|&s| (s, snr_curve(s, CeeMode::Perfect))).collect();
    ac3(&mut r, &perfect);
    let cee: HashMap<Scheme, SnrCurve> = [Figure::Fig5, Figure::Fig6]
        .iter()
        .flat_map(|f| f.schemes().iter().copied())
        .map(|s| (s, snr_curve(s, CeeMode::EqualNoise)))
        .collect();
    ac4(&mut r, &perfect, &cee);
    ac5(&mut r);
    println!("BER criteria simulated in {:.0} s", clock.elapsed().as_secs_f64());

    if r.failed.is_empty() {
        println!("acceptance: all criteria pass");
    } else {
        println!("acceptance: failing {}", r.failed.join(", "));
        std::process::exit(1);
    }
}
