use proptest::prelude::*;
use suboptcover::care::{eval_cost, is_hurwitz, lqr_synthesize, riccati_residual, solve_care_maximal, Matrix};
use suboptcover::ddf::{make_coupling, Coupling};

fn matrix(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-scale..scale, rows * cols).prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
}

fn system() -> impl Strategy<Value = (Matrix, Matrix)> {
    (1usize..=6).prop_flat_map(|n| (1..=n).prop_flat_map(move |m| (matrix(n, n, 2.0), matrix(n, m, 2.0))))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn scalar_closed_form(a in 1e-6f64..=5.0, b in 1e-6f64..=1.0) {
        let exact = (a + (a * a + b * b).sqrt()) / (b * b);
        let sol = lqr_synthesize(&Matrix::from_element(1, 1, a), &Matrix::from_element(1, 1, b)).unwrap();
        prop_assert!((sol.p[(0, 0)] - exact).abs() <= 1e-8 * (1.0 + exact));
    }

    #[test]
    fn lemma_sandwich(a in 1e-3f64..=5.0, b in 1e-3f64..=1.0) {
        let j = lqr_synthesize(&Matrix::from_element(1, 1, a), &Matrix::from_element(1, 1, b)).unwrap().cost;
        prop_assert!(2.0 * a / (b * b) < j && j < (2.0 * a + 1.0) / (b * b));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn optimal_gain_costs_trace(sys in system()) {
        let (a, b) = sys;
        if let Ok(sol) = lqr_synthesize(&a, &b) {
            let j = eval_cost(&a, &b, &sol.k);
            prop_assert!((j - sol.cost).abs() <= 1e-6 * sol.cost, "{} vs {}", j, sol.cost);
        }
    }

    #[test]
    fn returned_solutions_are_stabilizing(sys in system()) {
        let (a, b) = sys;
        let n = a.nrows();
        let d = &b * b.transpose();
        let q = Matrix::identity(n, n);
        if let Ok(p) = solve_care_maximal(&a, &d, &q) {
            let pn = p.norm();
            prop_assert!(riccati_residual(&a, &d, &q, &p) <= 1e-6 * (1.0 + pn * pn));
            prop_assert!(is_hurwitz(&(&a - &d * &p), 0.0).unwrap());
            prop_assert_eq!(&p, &p.transpose());
        }
    }

    #[test]
    fn domination_orders_solutions(
        n in 1usize..=4,
        seed in matrix(4, 4, 1.5),
        extra in matrix(8, 8, 1.0),
        eps in 0.0f64..0.5,
    ) {
        let a = seed.view((0, 0), (n, n)).into_owned();
        let b = Matrix::identity(n, n) + a.transpose() * 0.3;
        let q = Matrix::identity(n, n);
        let g = extra.view((0, 0), (2 * n, 2 * n)).into_owned();
        let mut e = &g * g.transpose();
        e *= eps / e.norm().max(1e-12);
        let d = &b * b.transpose();
        let (q_t, a_t, d_t) = (
            &q - e.view((0, 0), (n, n)),
            &a - e.view((n, 0), (n, n)),
            &d + e.view((n, n), (n, n)),
        );
        if let (Ok(p), Ok(p_t)) = (solve_care_maximal(&a, &d, &q), solve_care_maximal(&a_t, &d_t, &q_t)) {
            let gap = (&p - &p_t).symmetric_eigenvalues().min();
            prop_assert!(gap >= -1e-8, "{}", gap);
        }
    }

    #[test]
    fn more_authority_costs_less(s in prop::collection::vec(0.01f64..=1.0, 3), t in prop::collection::vec(0.0f64..=1.0, 3)) {
        let p = make_coupling(3, Coupling::Min, 100.0).unwrap();
        let hi: Vec<f64> = s.iter().zip(&t).map(|(x, y)| x + (1.0 - x) * y).collect();
        prop_assert!(p.optimal_cost(&s).unwrap() >= p.optimal_cost(&hi).unwrap() * (1.0 - 1e-12));
    }
}
