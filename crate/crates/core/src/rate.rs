//! Achieved rate and the rate-maximizing number of active slots.

use alloc::vec::Vec;

use crate::combinatorics::floor_log2_binomial;
use crate::scheme::{bit_budget, SchemeConfig};

/// Achieved rate in bits per channel use, `frame_bits / (T + L - 1)`.
pub fn rate(cfg: &SchemeConfig) -> f64 {
    bit_budget(cfg).frame_bits as f64 / cfg.channel_uses() as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RatePoint {
    pub t_active: usize,
    pub frame_bits: usize,
}

/// Rate as a function of the number of active slots for fixed `T` and `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateCurve {
    pub t_total: usize,
    pub taps: usize,
    pub points: Vec<RatePoint>,
    /// Per-slot bit count the curve was computed for.
    pub beta: usize,
    /// The `t_active` reaching the maximum that lies closest to [`t_opt`];
    /// remaining ties go to the smaller value.
    pub argmax: usize,
    /// Smallest `t_active` reaching the maximum.
    pub first_argmax: usize,
    pub max_frame_bits: usize,
}

impl RateCurve {
    fn from_points(t_total: usize, taps: usize, beta: usize, points: Vec<RatePoint>) -> Self {
        let max_frame_bits = points.iter().map(|p| p.frame_bits).max().unwrap_or(0);
        let target = t_opt(t_total, beta);
        let mut maximizers = points
            .iter()
            .filter(|p| p.frame_bits == max_frame_bits)
            .map(|p| p.t_active);
        let first_argmax = maximizers.next().unwrap_or(1);
        let argmax = maximizers.fold(first_argmax, |best, ta| {
            if (ta as f64 - target).abs() < (best as f64 - target).abs() {
                ta
            } else {
                best
            }
        });
        RateCurve {
            t_total,
            taps,
            beta,
            points,
            argmax,
            first_argmax,
            max_frame_bits,
        }
    }

    /// All `t_active` values reaching the maximum, ascending.
    pub fn maximizers(&self) -> impl Iterator<Item = usize> + '_ {
        self.points
            .iter()
            .filter(move |p| p.frame_bits == self.max_frame_bits)
            .map(|p| p.t_active)
    }

    pub fn channel_uses(&self) -> usize {
        self.t_total + self.taps - 1
    }

    pub fn rate_of(&self, p: &RatePoint) -> f64 {
        p.frame_bits as f64 / self.channel_uses() as f64
    }

    pub fn max_rate(&self) -> f64 {
        self.max_frame_bits as f64 / self.channel_uses() as f64
    }
}

/// Sweeps `t_active` over `1..=t_total` keeping every other field of `template`.
pub fn rate_sweep(template: &SchemeConfig) -> RateCurve {
    let points = (1..=template.t_total.max(1))
        .map(|ta| {
            let cfg = SchemeConfig {
                t_active: ta,
                ..*template
            };
            RatePoint {
                t_active: ta,
                frame_bits: bit_budget(&cfg).frame_bits,
            }
        })
        .collect();
    let beta = bit_budget(template).beta;
    RateCurve::from_points(template.t_total.max(1), template.taps.max(1), beta, points)
}

/// Same sweep when only the per-slot bit count `beta` is known.
pub fn rate_sweep_beta(t_total: usize, beta: usize, taps: usize) -> RateCurve {
    let t_total = t_total.max(1);
    let points = (1..=t_total)
        .map(|ta| RatePoint {
            t_active: ta,
            frame_bits: floor_log2_binomial(t_total, ta) as usize + ta * beta,
        })
        .collect();
    RateCurve::from_points(t_total, taps.max(1), beta, points)
}

/// Continuous maximizer `T 2^β / (1 + 2^β)` of the upper rate bound.
pub fn t_opt(t_total: usize, beta: usize) -> f64 {
    t_total as f64 / (1.0 + libm::exp2(-(beta as f64)))
}
