//! One-dimensional bracketing, bisection and golden-section helpers.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section minimization of `f` on `[lo, hi]` until `hi − lo ≤ tol`.
///
/// `f` may return `+∞`. Returns the best point evaluated and its value.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    while hi - lo > tol {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1);
            if f1 < best.1 {
                best = (x1, f1);
            }
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2);
            if f2 < best.1 {
                best = (x2, f2);
            }
        }
    }
    best
}

/// Bisects a predicate that holds at `inside` and fails at `outside`.
/// Returns the final `(inside, outside)` pair, `|inside − outside| ≤ tol`.
pub fn bisect<P: FnMut(f64) -> bool>(mut holds: P, mut inside: f64, mut outside: f64, tol: f64) -> (f64, f64) {
    while (outside - inside).abs() > tol {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if holds(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    (inside, outside)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_finds_parabola_minimum() {
        let (x, fx) = golden_section(|x| (x - 0.3) * (x - 0.3) + 1.0, -2.0, 5.0, 1e-9);
        assert!((x - 0.3).abs() < 1e-8);
        assert!((fx - 1.0).abs() < 1e-15);
    }

    #[test]
    fn golden_tolerates_infinite_edges() {
        let f = |x: f64| if x < 0.0 { f64::INFINITY } else { (x - 1.0).powi(2) };
        let (x, _) = golden_section(f, -3.0, 3.0, 1e-9);
        assert!((x - 1.0).abs() < 1e-8);
    }

    #[test]
    fn bisect_square_root() {
        let (lo, hi) = bisect(|x| x * x <= 2.0, 0.0, 2.0, 1e-12);
        assert!((lo - 2f64.sqrt()).abs() < 1e-12);
        assert!(lo <= hi);
    }
}
