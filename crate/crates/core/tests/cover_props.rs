use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use suboptcover::cover::{build_cover, covering_curve, write_curve_csv, CoverOptions};
use suboptcover::ddf::{make_coupling, make_scalar, Coupling};
use suboptcover::grid::partition_grid;
use suboptcover::scalar::lower_bound_count;

proptest! {
    #[test]
    fn grid_tiles_the_box(theta in 1.0f64..1e4, d in 1usize..=3, pitch in 1usize..=6, pts in prop::collection::vec(0.0f64..=1.0, 3)) {
        let g = partition_grid(theta, d, pitch).unwrap();
        let widths: Vec<f64> = g.breakpoints.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        for w in &widths {
            prop_assert!((w - widths[0]).abs() <= 1e-12 * (1.0 + widths[0]));
        }
        let sigma: Vec<f64> = pts[..d].iter().map(|t| theta.powf(-t)).collect();
        let idx = g.locate(&sigma).unwrap();
        prop_assert!(g.cell(&idx).contains(&sigma));
    }
}

#[test]
fn certified_cells_are_sound() {
    let alpha = 1.5;
    let problem = make_coupling(2, Coupling::Max, 5.0).unwrap();
    let cover = build_cover(&problem, alpha, CoverOptions::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for report in &cover.cells {
        assert!(report.certified);
        let k = &report.solution.as_ref().unwrap().k;
        for _ in 0..500 {
            let sigma: Vec<f64> =
                report.cell.sigma_lo.iter().zip(&report.cell.sigma_hi).map(|(&l, &h)| rng.gen_range(l..=h)).collect();
            let ratio = problem.cost(&sigma, k).unwrap() / problem.optimal_cost(&sigma).unwrap();
            assert!(ratio <= alpha * (1.0 + 1e-6), "ratio {ratio} at {sigma:?}");
        }
    }
}

#[test]
fn scalar_counts_respect_lower_bound() {
    let problem = make_scalar(1.0, 10.0).unwrap();
    let curve = covering_curve(&problem, 1.5, &[10.0, 100.0, 1000.0], CoverOptions::default(), 0.0).unwrap();
    let counts: Vec<usize> = curve.rows.iter().map(|r| r.controllers).collect();
    assert_eq!(counts, vec![12, 23, 35]);
    for row in &curve.rows {
        assert!(row.controllers >= lower_bound_count(1.0, 1.5, row.theta).unwrap());
    }
}

#[test]
fn curve_output_is_reproducible() {
    let problem = make_coupling(2, Coupling::Min, 10.0).unwrap();
    let run = || {
        let curve = covering_curve(&problem, 1.5, &[2.0, 4.0], CoverOptions::default(), 0.0).unwrap();
        let mut buf = Vec::new();
        write_curve_csv(&curve.rows, &mut buf).unwrap();
        buf
    };
    assert_eq!(run(), run());
}

#[test]
fn conservativeness_gap() {
    use suboptcover::care::Matrix;
    use suboptcover::cover::gcc_conservativeness;
    use suboptcover::ddf::DdfProblem;
    // a skewed V makes the norm ball strictly larger than the cell
    let a = Matrix::from_row_slice(2, 2, &[0.5, 1.0, 0.0, 0.2]);
    let u = Matrix::identity(2, 2);
    let v = Matrix::from_row_slice(2, 2, &[1.0, 0.9, 0.0, 0.4]);
    let problem = DdfProblem::new(a, u, v, 4.0).unwrap();
    let grid = partition_grid(4.0, 2, 2).unwrap();
    let gaps: Vec<f64> = grid.cells().map(|c| gcc_conservativeness(&problem, &c).unwrap().gap).collect();
    assert!(gaps.iter().all(|&g| g >= 1.0 - 1e-9));
    assert!(gaps.iter().any(|&g| g > 1.0 + 1e-3), "{gaps:?}");
}
