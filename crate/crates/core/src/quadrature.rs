//! Fixed composite Gauss-Legendre rules on the unit interval.
//!
//! The interior of `[0, 1]` is split into 128 equal panels; the two end
//! panels are further graded geometrically toward 0 and 1 so that quantile
//! transforms with integrable endpoint singularities (e.g. `-ln(1 - u)`)
//! still integrate accurately. Every panel uses the 16-point rule.

use alloc::vec::Vec;

/// Positive abscissae and weights of the 16-point Gauss-Legendre rule on [-1, 1].
const GL16: [(f64, f64); 8] = [
    (0.095_012_509_837_637_45, 0.189_450_610_455_068_6),
    (0.281_603_550_779_258_9, 0.182_603_415_044_923_6),
    (0.458_016_777_657_227_37, 0.169_156_519_395_002_62),
    (0.617_876_244_402_643_8, 0.149_595_988_816_576_76),
    (0.755_404_408_355_003, 0.124_628_971_255_534_03),
    (0.865_631_202_387_831_8, 0.095_158_511_682_492_59),
    (0.944_575_023_073_232_6, 0.062_253_523_938_647_706),
    (0.989_400_934_991_649_9, 0.027_152_459_411_754_037),
];

/// Number of uniform panels across the unit interval.
pub const PANELS: usize = 128;
/// Levels of geometric grading inside each end panel.
const GRADING: usize = 16;

/// 16-point Gauss-Legendre approximation of `∫_a^b f`.
#[inline]
pub fn gauss16<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut acc = 0.0;
    for &(x, w) in GL16.iter() {
        acc += w * (f(mid - half * x) + f(mid + half * x));
    }
    acc * half
}

fn unit_breakpoints() -> Vec<f64> {
    let h = 1.0 / PANELS as f64;
    let mut pts = Vec::with_capacity(PANELS + 2 * GRADING + 2);
    pts.push(0.0);
    for level in (1..=GRADING).rev() {
        pts.push(h * libm::ldexp(1.0, -(level as i32)));
    }
    for i in 1..PANELS {
        pts.push(i as f64 * h);
    }
    for level in 1..=GRADING {
        pts.push(1.0 - h * libm::ldexp(1.0, -(level as i32)));
    }
    pts.push(1.0);
    pts
}

/// `∫_0^1 f(u) du` on the graded composite rule.
pub fn integrate_unit<F: FnMut(f64) -> f64>(f: F) -> f64 {
    integrate_unit_split(f, &[])
}

/// Like [`integrate_unit`], additionally splitting panels at `breaks`
/// (points in `(0, 1)` where `f` has a kink), which must be sorted.
pub fn integrate_unit_split<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64]) -> f64 {
    let pts = unit_breakpoints();
    let mut acc = 0.0;
    let mut next_break = 0usize;
    for w in pts.windows(2) {
        let (mut a, b) = (w[0], w[1]);
        while next_break < breaks.len() && breaks[next_break] <= a {
            next_break += 1;
        }
        while next_break < breaks.len() && breaks[next_break] < b {
            let c = breaks[next_break];
            acc += gauss16(a, c, &mut f);
            a = c;
            next_break += 1;
        }
        acc += gauss16(a, b, &mut f);
    }
    acc
}

/// Number of function evaluations used by [`integrate_unit`].
pub fn unit_nodes() -> usize {
    (unit_breakpoints().len() - 1) * 16
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        for k in 0..30 {
            let got = integrate_unit(|u| u.powi(k));
            assert!((got - 1.0 / (k as f64 + 1.0)).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn endpoint_log_singularity() {
        let got = integrate_unit(|u| -(1.0 - u).ln());
        assert!((got - 1.0).abs() < 1e-7, "{got}");
        let got = integrate_unit(|u| -u.ln());
        assert!((got - 1.0).abs() < 1e-7, "{got}");
    }

    #[test]
    fn kinks_at_breaks_are_exact() {
        let f = |u: f64| (u - 0.3).abs();
        let want = 0.5 * (0.09 + 0.49);
        let got = integrate_unit_split(f, &[0.3]);
        assert!((got - want).abs() < 1e-14);
    }

    #[test]
    fn node_count() {
        assert_eq!(unit_nodes(), (PANELS + 2 * GRADING) * 16);
    }
}
