//! Plotting grids.
//!
//! Density curves span `[Q(1e-6), Q(1 - 1e-6)]` so that the tabulated density
//! carries all but a few millionths of the mass. Half of the x-points are
//! evenly spaced, the other half are quantiles of model-0: the LP terms of a
//! repaired density oscillate on the scale of model-0's ranks, which can be
//! much finer than an even grid near a steep end. With both, the trapezoid
//! rule recovers unit mass.

use anyhow::Result;
use dsharp_core::Univariate;

pub const CURVE_POINTS: usize = 512;
pub const TAIL: f64 = 1e-6;

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let step = (b - a) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { b } else { a + i as f64 * step }).collect()
}

/// `[Q(TAIL), Q(1 - TAIL)]` of `model`.
pub fn span<M: Univariate>(model: &M) -> Result<(f64, f64)> {
    Ok((model.quantile(TAIL)?, model.quantile(1.0 - TAIL)?))
}

/// Smallest interval containing both spans.
pub fn hull(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (a.0.min(b.0), a.1.max(b.1))
}

/// `CURVE_POINTS` sorted x-points over `span`: evenly spaced points merged
/// with quantiles of `reference` at evenly spaced interior ranks.
pub fn x_grid<M: Univariate>((lo, hi): (f64, f64), reference: &M) -> Result<Vec<f64>> {
    let even = CURVE_POINTS / 2 + 1;
    let ranks = CURVE_POINTS - even;
    let mut xs = linspace(lo, hi, even);
    for k in 1..=ranks {
        let u = TAIL + (1.0 - 2.0 * TAIL) * k as f64 / (ranks + 1) as f64;
        xs.push(reference.quantile(u)?.clamp(lo, hi));
    }
    xs.sort_by(f64::total_cmp);
    Ok(xs)
}

pub fn u_grid() -> Vec<f64> {
    linspace(0.0, 1.0, CURVE_POINTS)
}

pub fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

/// Indices of strict interior local maxima, with plateaus counted once.
pub fn local_maxima(ys: &[f64]) -> Vec<usize> {
    let mut peaks = Vec::new();
    let mut i = 1;
    while i + 1 < ys.len() {
        if ys[i] > ys[i - 1] {
            let mut j = i;
            while j + 1 < ys.len() && ys[j + 1] == ys[i] {
                j += 1;
            }
            if j + 1 < ys.len() && ys[j + 1] < ys[i] {
                peaks.push(i);
            }
            i = j + 1;
        } else {
            i += 1;
        }
    }
    peaks
}
