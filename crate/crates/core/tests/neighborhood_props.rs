use proptest::prelude::*;
use suboptcover::ddf::{make_coupling, make_scalar, Coupling};
use suboptcover::neighborhood::{alpha_sweep, components, compute_field};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn source_is_optimal_and_masks_nest(
        theta in 2.0f64..200.0,
        t in prop::collection::vec(0.0f64..=1.0, 2),
        max in any::<bool>(),
    ) {
        let kind = if max { Coupling::Max } else { Coupling::Min };
        let problem = make_coupling(2, kind, theta).unwrap();
        let source: Vec<f64> = t.iter().map(|t| theta.powf(-t)).collect();
        // a source placed on a node checks self-optimality exactly
        let field = compute_field(&problem, &[source.clone(), vec![1.0, 1.0]], 15).unwrap();
        for r in field.ratios.iter().flatten().filter(|r| r.is_finite()) {
            prop_assert!(*r >= 1.0 - 1e-9);
        }
        let last = field.node_count() - 1;
        prop_assert!((field.ratios[1][last] - 1.0).abs() <= 1e-6);
        let direct = problem.cost(&source, &field.controllers[0].k).unwrap() / problem.optimal_cost(&source).unwrap();
        prop_assert!((direct - 1.0).abs() <= 1e-6);
        let levels = alpha_sweep(&field, 0, &[1.01, 1.05, 1.2, 2.0]).unwrap();
        for w in levels.windows(2) {
            prop_assert!(w[0].mask.iter().zip(&w[1].mask).all(|(a, b)| !a || *b));
        }
    }

    #[test]
    fn scalar_sublevel_sets_are_intervals(theta in 2.0f64..1000.0, t in 0.0f64..=1.0, alpha in 1.01f64..3.0) {
        let problem = make_scalar(1.0, theta).unwrap();
        let field = compute_field(&problem, &[vec![theta.powf(-t)]], 200).unwrap();
        prop_assert!(components(&field, 0, alpha).unwrap().count <= 1);
    }
}
