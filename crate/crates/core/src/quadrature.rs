//! Globally adaptive 15-point Gauss–Kronrod quadrature.
//!
//! Intervals are bisected in order of decreasing error estimate until the
//! summed estimate drops below `max(abs, rel·|I|)`. The per-interval error
//! estimate follows QUADPACK's QK15, including its round-off floor of
//! `50·ε·∫|f|`; integrals whose requested tolerance lies below that floor are
//! accepted at the floor.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Relative tolerance used for all pointer integrals in this crate.
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Half-width of the integration window in pointer standard deviations.
/// The Gaussian mass beyond 10σ is below 2e-23.
pub const POINTER_SUPPORT_SIGMAS: f64 = 10.0;

const MAX_INTERVALS: usize = 4000;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Tolerance {
    pub fn relative(rel: f64) -> Self {
        Self { rel, abs: 0.0 }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::relative(DEFAULT_REL_TOL)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    abs_value: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Result<Segment> {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut res_k = fc * WGK[7];
    let mut res_g = fc * WG[3];
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    if !res_k.is_finite() {
        return Err(Error::QuadratureFailure {
            estimate: res_k,
            error: f64::INFINITY,
            evaluations: 15,
        });
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        abs_value: res_abs,
    })
}

/// Integrates `f` over `[a, b]`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    integrate_panels(f, a, b, 1, tol)
}

/// Like [`integrate`], starting from `panels` equal sub-intervals.
pub fn integrate_panels<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    panels: usize,
    tol: Tolerance,
) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "integration limits must be finite, got [{a}, {b}]"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            abs_error: 0.0,
            evaluations: 0,
        });
    }
    let panels = panels.max(1);
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(2 * panels + 64);
    let mut evaluations = 0;
    for i in 0..panels {
        let lo = a + width * i as f64;
        let hi = if i + 1 == panels { b } else { lo + width };
        heap.push(kronrod15(&mut f, lo, hi)?);
        evaluations += 15;
    }

    loop {
        let (value, error, abs_value) = heap.iter().fold((0.0, 0.0, 0.0), |acc, s| {
            (acc.0 + s.value, acc.1 + s.error, acc.2 + s.abs_value)
        });
        let target = tol.abs.max(tol.rel * value.abs());
        let roundoff_floor = 100.0 * f64::EPSILON * abs_value;
        if error <= target || error <= roundoff_floor {
            return Ok(Integral {
                value,
                abs_error: error,
                evaluations,
            });
        }
        if heap.len() >= MAX_INTERVALS {
            return Err(Error::QuadratureFailure {
                estimate: value,
                error,
                evaluations,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval can no longer be split in floating point
            return Err(Error::QuadratureFailure {
                estimate: value,
                error,
                evaluations,
            });
        }
        heap.push(kronrod15(&mut f, worst.a, mid)?);
        heap.push(kronrod15(&mut f, mid, worst.b)?);
        evaluations += 30;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomials_are_exact() {
        let r = integrate(|x| x.powi(5) - 3.0 * x * x + 1.0, -1.0, 2.0, Tolerance::default()).unwrap();
        // [x^6/6 - x^3 + x] from -1 to 2
        let exact = (64.0 / 6.0 - 8.0 + 2.0) - (1.0 / 6.0 + 1.0 - 1.0);
        assert_relative_eq!(r.value, exact, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_mass_over_ten_sigma() {
        let s = 0.055;
        let r = integrate(
            |x| (-(x - 2.4f64).powi(2) / (2.0 * s * s)).exp() / (2.0 * PI * s * s).sqrt(),
            2.4 - 10.0 * s,
            2.4 + 10.0 * s,
            Tolerance::relative(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value, 1.0, max_relative = 1e-13);
    }

    #[test]
    fn oscillatory_integrand() {
        let r = integrate(|x| (50.0 * x).sin().powi(2), 0.0, PI, Tolerance::relative(1e-11)).unwrap();
        assert_relative_eq!(r.value, PI / 2.0, max_relative = 1e-11);
    }

    #[test]
    fn sharp_peak_needs_refinement() {
        let eps: f64 = 1e-4;
        let r = integrate(|x| eps / (x * x + eps * eps), -1.0, 1.0, Tolerance::relative(1e-10)).unwrap();
        assert_relative_eq!(r.value, 2.0 * (1.0 / eps).atan(), max_relative = 1e-10);
        assert!(r.evaluations > 15);
    }

    #[test]
    fn odd_integrand_converges_at_roundoff() {
        let r = integrate(|x| x * (-x * x).exp(), -5.0, 5.0, Tolerance::default()).unwrap();
        assert!(r.value.abs() < 1e-14);
    }

    #[test]
    fn nan_integrand_fails() {
        let r = integrate(|x| if x > 0.5 { f64::NAN } else { x }, 0.0, 1.0, Tolerance::default());
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }

    #[test]
    fn empty_interval() {
        assert_eq!(integrate(|x| x, 1.0, 1.0, Tolerance::default()).unwrap().value, 0.0);
    }
}
