use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use spectral_dae::dae::fd_jacobian;
use spectral_dae::linalg::rank;
use spectral_dae::problems::{preset_by_name, sawtooth, triangular, Nonlinearity};
use spectral_dae::{
    algebraic_residual, compare_trajectories, compute_projectors, consistency_residual, estimate_index,
    inverse_identity_violation, solve, validate_projectors, w_map, Config, Method, Pencil, Quadrature,
};

fn invertible(n: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, n * n)
        .prop_map(move |v| DMatrix::from_row_slice(n, n, &v) + DMatrix::identity(n, n) * 3.0)
}

fn vec3() -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3).prop_map(DVector::from_vec)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn index_of_normal_form(s in invertible(4), t in invertible(4), k in 1usize..=4) {
        let mut d = DMatrix::zeros(4, 4);
        for i in 0..k {
            d[(i, i)] = 1.0;
        }
        let p = Pencil::constant(&s * d * &t, &s * &t).unwrap();
        let want = if k == 4 { 0 } else { 1 };
        prop_assert_eq!(estimate_index(&p, 0.0).unwrap(), want);
    }

    #[test]
    fn normal_form_projectors_satisfy_identities(s in invertible(3), t in invertible(3), k in 1usize..3) {
        let mut d = DMatrix::zeros(3, 3);
        for i in 0..k {
            d[(i, i)] = 1.0;
        }
        let p = Pencil::constant(&s * d * &t, &s * &t).unwrap();
        let ps = compute_projectors(&p.clone().without_radius_hint(), 0.0, &Quadrature::default()).unwrap();
        let rep = validate_projectors(&ps, &p);
        prop_assert!(rep.max_violation() < 1e-8, "{:?}", rep);
        prop_assert_eq!(rep.d, 3 - k);
    }

    #[test]
    fn circuit_identities_at_random_points(
        t in 0.0f64..30.0,
        x in vec3(),
        which in 0usize..2,
    ) {
        let name = ["circuit1:fig2", "circuit2:sine-lagrange"][which];
        let p = preset_by_name::<f64>(name).unwrap();
        let ps = compute_projectors(&p.dae.pencil, t, &Quadrature::default()).unwrap();
        prop_assert!(validate_projectors(&ps, &p.dae.pencil).max_violation() < 1e-8);
        let (z, u) = (&ps.p1 * &x, &ps.p2 * &x);
        prop_assert!(inverse_identity_violation(&p.dae, &ps, &z, &u) < 1e-8);
        let r = algebraic_residual(&p.dae, &ps, &z, &u);
        prop_assert_eq!(r, w_map(&p.dae, &ps, &z, &u) - &u);
        let c1 = consistency_residual(&p.dae, &ps, &x);
        let c2 = consistency_residual(&p.dae, &ps, &(&z + &u));
        prop_assert!((c1 - c2).amax() < 1e-12);
    }

    #[test]
    fn algebraic_rank_constant(t in 0.0f64..50.0, which in 0usize..4) {
        let name = ["circuit1:fig2", "circuit1:sawtooth", "circuit2:cosine", "circuit2:table1"][which];
        let p = preset_by_name::<f64>(name).unwrap();
        let ps = compute_projectors(&p.dae.pencil, t, &Quadrature::default()).unwrap();
        prop_assert_eq!(rank(&ps.p2, 1e-10), 2);
    }

    #[test]
    fn finite_difference_jacobian(t in 0.0f64..10.0, x in vec3(), which in 0usize..3) {
        let name = ["circuit1:sawtooth", "circuit2:cosine", "manufactured"][which];
        let p = preset_by_name::<f64>(name).unwrap();
        let j = p.dae.jacobian(t, &x);
        let fd = fd_jacobian(&*p.dae.rhs_fn(), t, &x);
        prop_assert!((&j - &fd).amax() / j.amax().max(1.0) < 1e-5);
    }

    #[test]
    fn signal_shapes(t in 0.0f64..100.0) {
        prop_assert!((sawtooth(t + 15.0) - sawtooth(t)).abs() < 1e-9);
        prop_assert!((triangular(t + 20.0) - triangular(t)).abs() < 1e-9);
        prop_assert!((0.0..=10.0).contains(&sawtooth(t)));
        prop_assert!((0.0..=10.0).contains(&triangular(t)));
    }

    #[test]
    fn nonlinearity_shapes(y in -3.0f64..3.0, a in -4.0f64..4.0, k in 1u32..4) {
        let p = Nonlinearity::Power { a, k };
        prop_assert!((p.eval(-y) + p.eval(y)).abs() < 1e-12);
        let s = Nonlinearity::Sine { a };
        prop_assert!(s.eval(y).abs() <= a.abs() + 1e-15);
        let d = 1e-6;
        for n in [p, s, Nonlinearity::Cosine { a }] {
            let fd = (n.eval(y + d) - n.eval(y - d)) / (2.0 * d);
            prop_assert!((fd - n.derivative(y)).abs() < 1e-5 * (1.0 + fd.abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn comparison_is_a_metric(scales in prop::collection::vec(0.5f64..1.5, 3)) {
        let p = preset_by_name::<f64>("circuit2:sine").unwrap();
        let cfg = Config::new(Method::Method1, 0.0, 0.5, 0.01).unwrap();
        let trs: Vec<_> = scales
            .iter()
            .map(|&c| {
                let f = p.dae.rhs_fn();
                let dae = p.dae.clone().with_rhs(move |t, x| f(t, x) * c);
                solve(&dae, &p.x0, &cfg).unwrap()
            })
            .collect();
        let d = |i: usize, j: usize| compare_trajectories(&trs[i], &trs[j]).unwrap();
        prop_assert_eq!(d(0, 1), d(1, 0));
        prop_assert!(d(0, 2) <= d(0, 1) + d(1, 2) + 1e-15);
        prop_assert_eq!(d(0, 0), 0.0);
    }
}
