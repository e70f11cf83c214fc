use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use suboptcover::care::{lqr_synthesize, Matrix};
use suboptcover::ddf::DdfProblem;
use suboptcover::gcc::{encode_cell, gcc_trace_profile, synthesize_cell, synthesize_gcc, verify_cell_guarantee};
use suboptcover::grid::GridCell;

fn matrix(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = Matrix> {
    prop::collection::vec(-scale..scale, rows * cols).prop_map(move |v| Matrix::from_row_slice(rows, cols, &v))
}

/// Random DDF problem (`d ≤ 4`) with a cell inside its box.
fn problem_and_cell() -> impl Strategy<Value = (DdfProblem, GridCell)> {
    (1usize..=4, 0usize..=2, 0usize..=1).prop_flat_map(|(d, extra_n, extra_m)| {
        let (n, m) = (d + extra_n, d + extra_m);
        (
            matrix(n, n, 1.0),
            matrix(n, d, 1.5),
            matrix(m, d, 1.5),
            1.5f64..10.0,
            prop::collection::vec((0.0f64..1.0, 1.0f64..1.5), d),
        )
            .prop_filter_map("infeasible problem", |(a, u, v, theta, spans)| {
                let problem = DdfProblem::new(a, u, v, theta).ok()?;
                let lo: Vec<f64> = spans.iter().map(|(t, _)| theta.powf(-t)).collect();
                let hi = lo.iter().zip(&spans).map(|(l, (_, r))| (l * r).min(1.0)).collect();
                Some((problem, GridCell::new(lo, hi).ok()?))
            })
    })
}

fn unimodal(values: &[f64]) -> bool {
    let finite: Vec<usize> = (0..values.len()).filter(|&i| values[i].is_finite()).collect();
    let Some((&first, &last)) = finite.first().zip(finite.last()) else { return true };
    if last - first + 1 != finite.len() {
        return false;
    }
    let v = &values[first..=last];
    let turn = v.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
    let slack = |x: f64| 1e-10 * x.abs();
    v[..=turn].windows(2).all(|w| w[1] <= w[0] + slack(w[0]))
        && v[turn..].windows(2).all(|w| w[1] + slack(w[1]) >= w[0])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn guarantee_holds_on_samples((problem, cell) in problem_and_cell(), seed in any::<u64>()) {
        if let Ok(sol) = synthesize_cell(&problem, &cell) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            prop_assert!(verify_cell_guarantee(&problem, &cell, &sol, 500, &mut rng).is_ok());
        }
    }

    #[test]
    fn trace_profile_unimodal((problem, cell) in problem_and_cell()) {
        let enc = encode_cell(&problem, &cell).unwrap();
        let n = problem.n();
        let taus: Vec<f64> = (0..50).map(|i| 10f64.powf(-6.0 + 12.0 * i as f64 / 49.0)).collect();
        let profile = gcc_trace_profile(problem.a(), &enc.b1, &enc.b2, &Matrix::identity(n, n), &taus).unwrap();
        prop_assert!(unimodal(&profile), "{:?}", profile);
    }

    #[test]
    fn encoding_contains_cell((problem, cell) in problem_and_cell(), t in prop::collection::vec(0.0f64..=1.0, 4)) {
        let enc = encode_cell(&problem, &cell).unwrap();
        let pinv = enc.b1.clone().pseudo_inverse(1e-12).unwrap();
        let sigma: Vec<f64> = cell.sigma_lo.iter().zip(&cell.sigma_hi).zip(&t).map(|((l, h), t)| l + (h - l) * t).collect();
        let b = problem.assemble_b(&sigma).unwrap();
        let delta = &pinv * (&b - &enc.b2);
        prop_assert!(delta.clone().singular_values().max() <= 1.0 + 1e-9);
        prop_assert!((&enc.b2 + &enc.b1 * &delta - &b).amax() <= 1e-9 * (1.0 + b.amax()));
    }

    #[test]
    fn small_ball_is_nearly_optimal(a in matrix(2, 2, 1.0), b in matrix(2, 2, 1.5), scalar in any::<bool>()) {
        let (a, b) = if scalar { (a.view((0, 0), (1, 1)).into_owned(), b.view((0, 0), (1, 1)).into_owned()) } else { (a, b) };
        let n = a.nrows();
        let Ok(opt) = lqr_synthesize(&a, &b) else { return Ok(()); };
        let q = Matrix::identity(n, n);
        let found = [0.1, 0.03, 0.01, 1e-3, 1e-4]
            .iter()
            .any(|&t| synthesize_gcc(&a, &(&b * t), &b, &q).is_ok_and(|s| s.bound < 1.1 * opt.cost));
        prop_assert!(found);
    }
}
