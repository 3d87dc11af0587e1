use approx::assert_relative_eq;
use proptest::prelude::*;

use hcx_core::estimator::{decompose_error, Constants, TrialFields};
use hcx_core::instances::{build_cycle, build_grid, GammaT, GridSpec, Instance, Recipe};
use hcx_core::linalg::io::{format_matrix_market, format_vector_csv, parse_matrix_market, parse_vector_csv};
use hcx_core::linalg::vector::sub;
use hcx_core::linalg::{InnerProduct, SparseOperator};
use hcx_core::solver::{solve_first_order, Backend, FirstOrderProblem};

fn annulus() -> Instance {
    build_grid(&GridSpec::new(2, 4).with_hole(vec![1, 1], vec![3, 3])).unwrap()
}

fn field(n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn matrix_market_round_trip(
        rows in 1usize..8,
        cols in 1usize..8,
        entries in prop::collection::vec((0usize..8, 0usize..8, -1e6..1e6f64), 0..20),
    ) {
        let trips: Vec<_> = entries.into_iter().filter(|(r, c, _)| *r < rows && *c < cols).collect();
        let a = SparseOperator::from_triplets(rows, cols, &trips).unwrap();
        let back = parse_matrix_market(&format_matrix_market(&a), "prop").unwrap();
        prop_assert_eq!(back, a);
    }

    #[test]
    fn vector_csv_round_trip(v in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 0..30)) {
        prop_assert_eq!(parse_vector_csv(&format_vector_csv(&v), "prop").unwrap(), v);
    }

    #[test]
    fn helmholtz_parts_are_orthogonal_and_complete(x in field(36)) {
        let inst = annulus();
        let c = &inst.complex;
        let m = c.gram(1);
        let h = c.helmholtz_decompose(1, &x, 1e-13).unwrap();
        let scale = m.norm(&x).max(1e-12);
        prop_assert!(m.inner(&h.prev, &h.adj).abs() <= 1e-9 * scale * scale);
        prop_assert!(m.inner(&h.prev, &h.kernel).abs() <= 1e-9 * scale * scale);
        prop_assert!(m.inner(&h.kernel, &h.adj).abs() <= 1e-9 * scale * scale);
        // The kernel part is harmonic.
        prop_assert!(c.gram(2).norm(&c.apply_op(1, &h.kernel)) <= 1e-9 * scale);
        prop_assert!(c.gram(0).norm(&c.apply_adjoint(0, &h.kernel)) <= 1e-9 * scale);
    }

    #[test]
    fn solver_recovers_any_seed(seed in 0u64..10_000, level in 0usize..3) {
        let inst = annulus();
        let c = &inst.complex;
        let s = inst.manufacture(level, Recipe::RangePair, seed).unwrap();
        let p = FirstOrderProblem::new(c, level, s.f.clone(), s.g.clone(), s.k.clone()).unwrap();
        let r = solve_first_order(&p, Backend::Variational, 1e-12).unwrap();
        let m = c.gram(level as isize);
        prop_assert!(m.norm(&sub(&r.x, &s.exact_x)) <= 1e-8 * m.norm(&s.exact_x).max(1.0));
    }

    #[test]
    fn random_trials_never_cross_the_error(seed in any::<u64>(), scale in 1e-3..10.0f64, pert in field(5)) {
        let inst = build_cycle(5).unwrap();
        let c = &inst.complex;
        let s = inst.manufacture(1, Recipe::SmoothPotential, 1).unwrap();
        let xa: Vec<f64> = s.exact_x.iter().zip(&pert).map(|(a, b)| a + b).collect();
        let d = decompose_error(c, 1, &xa, &s.exact_x, 1e-13).unwrap();
        let k = Constants::compute(c, 1, 1e-12).unwrap();
        let t = TrialFields::random(c, 1, &xa, scale, seed).unwrap();
        let v = t.evaluate(c, 1, &xa, &s.f, &s.g, &s.k, k.c_prev, k.c_next).unwrap();
        let slack = 1e-10 * (1.0 + d.norm * d.norm);
        prop_assert!(v.upper_g >= d.norm_prev - slack);
        prop_assert!(v.upper_f >= d.norm_adj - slack);
        prop_assert!(v.upper_kernel >= d.norm_kernel - slack);
        prop_assert!(v.lower_g <= d.norm_prev.powi(2) + slack);
        prop_assert!(v.lower_f <= d.norm_adj.powi(2) + slack);
        prop_assert!(v.lower_kernel <= d.norm_kernel.powi(2) + slack);
    }
}

#[test]
fn constants_agree_between_operator_and_adjoint() {
    let inst = build_grid(&GridSpec::new(3, 3).with_gamma(GammaT::All)).unwrap();
    for l in 0..3 {
        let a = inst.complex.poincare_constant(l, 1e-12).unwrap().c_l;
        let b = inst.complex.poincare_constant_adjoint(l, 1e-12).unwrap().c_l;
        assert_relative_eq!(a, b, max_relative = 1e-8);
    }
}
