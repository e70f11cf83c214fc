use proptest::prelude::*;
use suboptcover::care::Matrix;
use suboptcover::gcc::{solve_gcc_riccati, synthesize_gcc};
use suboptcover::scalar::{
    build_scalar_cover, geom_points, lower_bound_count, neighborhood_interval, scalar_cost, stationary_authority,
    suboptimality_ratio,
};

fn s(x: f64) -> Matrix {
    Matrix::from_element(1, 1, x)
}

fn local_minima(v: &[f64]) -> Vec<usize> {
    // plateaus count once
    let mut out = Vec::new();
    let mut i = 0;
    while i < v.len() {
        let mut j = i;
        while j + 1 < v.len() && v[j + 1] == v[i] {
            j += 1;
        }
        let left = i == 0 || v[i - 1] > v[i];
        let right = j + 1 == v.len() || v[j + 1] > v[i];
        if left && right {
            out.push(i);
        }
        i = j + 1;
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn ratio_quasiconvex_in_authority(a in 0.1f64..5.0, k in -50.0f64..-1.05) {
        let b_k = stationary_authority(a, k);
        let lo = -a / k;
        let grid = geom_points(lo * (1.0 + 1e-6), 20.0 * b_k, 1000);
        let r: Vec<f64> = grid.iter().map(|&b| suboptimality_ratio(a, b, k)).collect();
        let mins = local_minima(&r);
        prop_assert_eq!(mins.len(), 1);
        let i = mins[0];
        let (l, h) = (grid[i.saturating_sub(1)], grid[(i + 1).min(grid.len() - 1)]);
        prop_assert!(l <= b_k && b_k <= h, "b_k {} outside [{}, {}]", b_k, l, h);
    }

    #[test]
    fn cost_quasiconvex_in_gain(a in 0.1f64..5.0, b in 0.01f64..=1.0) {
        let (lo, hi) = (-1e3 * (a + 1.0), -a / b - 1e-6);
        let ks: Vec<f64> = (0..1000).map(|i| lo + (hi - lo) * i as f64 / 999.0).collect();
        let j: Vec<f64> = ks.iter().map(|&k| scalar_cost(a, b, k)).collect();
        prop_assert!(local_minima(&j).len() <= 1);
    }

    #[test]
    fn interval_endpoints_increase(k1 in -80.0f64..-1.01, k2 in -80.0f64..-1.01, alpha in 1.05f64..4.0) {
        let (k, k_prime) = if k1 < k2 { (k1, k2) } else { (k2, k1) };
        let i1 = neighborhood_interval(1.0, 1e9, k, alpha).unwrap();
        let i2 = neighborhood_interval(1.0, 1e9, k_prime, alpha).unwrap();
        if let (Some(x), Some(y)) = (i1, i2) {
            prop_assert!(x.0 <= y.0 * (1.0 + 1e-9) && x.1 <= y.1 * (1.0 + 1e-9), "{:?} {:?}", x, y);
        }
    }

    #[test]
    fn scaled_guaranteed_cost_matches(a in 0.2f64..3.0, beta in 0.3f64..0.95, level in 1i32..6) {
        let (b1, b2) = ((1.0 - beta) / 2.0, (1.0 + beta) / 2.0);
        let Ok(base) = synthesize_gcc(&s(a), &s(b1), &s(b2), &s(1.0)) else { return Ok(()); };
        let scale = beta.powi(level);
        let p = solve_gcc_riccati(&s(a), &s(b1 * scale), &s(b2 * scale), &s(scale.powi(-2)), base.tau).unwrap();
        let expected = base.bound * scale.powi(-2);
        prop_assert!((p[(0, 0)] / expected - 1.0).abs() <= 1e-8);
    }
}

#[test]
fn scalar_cover_covers_and_respects_lower_bound() {
    for theta in [10.0, 100.0, 1000.0] {
        let cover = build_scalar_cover(1.0, 1.5, theta).unwrap();
        for b in geom_points(1.0 / theta, 1.0, 10_000) {
            assert!(cover.best_ratio(b) <= 1.5 + 1e-9, "theta {theta}, b {b}");
        }
        assert!(cover.n >= lower_bound_count(1.0, 1.5, theta).unwrap());
        for (w, g) in cover.intervals.iter().zip(&cover.gains) {
            assert!(w.0 < w.1 && *g < 0.0);
        }
    }
}
