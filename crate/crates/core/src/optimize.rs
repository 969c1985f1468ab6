//! One-dimensional maximisation by golden-section search.

const INV_PHI: f64 = 0.618_033_988_749_894_8; // (√5 − 1)/2

/// Maximises a unimodal `f` on `[a, b]` until the bracket is narrower than
/// `tol`. Returns `(x, f(x))` at the best point evaluated.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, tol: f64) -> (f64, f64) {
    let (mut lo, mut hi) = if a <= b { (a, b) } else { (b, a) };
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    // 200 iterations shrink any finite bracket below f64 resolution
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_parabola_peak() {
        let (x, fx) = golden_section_max(|x| -(x - 0.3).powi(2) + 2.0, -1.0, 1.0, 1e-10);
        // a flat peak resolves x only to about √ε
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-15);
    }

    #[test]
    fn reversed_bracket_and_edge_peak() {
        let (x, _) = golden_section_max(|x| x, 1.0, 0.0, 1e-9);
        assert!(x > 1.0 - 1e-8);
    }

    #[test]
    fn narrow_tolerance_in_small_units() {
        let (x, _) = golden_section_max(|t| -((t - 0.008) / 1e-4).powi(2), 0.0, 0.02, 1e-12);
        assert!((x - 0.008).abs() < 1e-11);
    }
}
