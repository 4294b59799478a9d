use approx::assert_abs_diff_eq;
use nalgebra::{Complex, DMatrix};
use spectral_dae::problems::{
    circuit1, circuit1_projectors, circuit2, circuit2_projectors, Circuit1Params, Circuit2Params,
};
use spectral_dae::problems::{power_nonlinearity, Signal};
use spectral_dae::{
    compute_projectors, compute_projectors_with_derivative, estimate_index, projector_derivative, resolvent,
    validate_projectors, Error, Pencil, Quadrature,
};

fn circuit2_fixed(l: f64, r1: f64, r2: f64) -> spectral_dae::Dae {
    circuit2(Circuit2Params {
        l: Signal::constant(l),
        r1: Signal::constant(r1),
        r2: Signal::constant(r2),
        g3: Signal::constant(1.0),
        u: Signal::constant(1.0),
        i: Signal::constant(0.0),
        phi1: power_nonlinearity(1.0, 2),
        phi2: power_nonlinearity(1.0, 2),
        phi3: power_nonlinearity(1.0, 2),
    })
}

fn circuit1_with_r(r: Signal<f64>) -> spectral_dae::Dae {
    circuit1(Circuit1Params {
        l: Signal::constant(0.5),
        r_l: Signal::constant(2.0),
        r,
        u: Signal::constant(0.0),
        i: Signal::constant(0.0),
        phi: power_nonlinearity(1.0, 2),
        phi_l: power_nonlinearity(1.0, 2),
    })
}

fn assert_mat_close(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) {
    assert_eq!(a.shape(), b.shape());
    let d = (a - b).abs().max();
    assert!(d < tol, "matrices differ by {d:e}\n{a}\n{b}");
}

#[test]
fn resolvent_of_identity_pencil() {
    let p = Pencil::constant(DMatrix::identity(2, 2), DMatrix::zeros(2, 2)).unwrap();
    let r = resolvent(&p, Complex::new(2.0, 0.0), 0.0).unwrap();
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { 0.5 } else { 0.0 };
            assert_abs_diff_eq!(r[(i, j)].re, want, epsilon = 1e-15);
            assert_abs_diff_eq!(r[(i, j)].im, 0.0, epsilon = 1e-15);
        }
    }
}

#[test]
fn resolvent_matches_dense_inverse() {
    let dae = circuit2_fixed(500.0, 2.0, 3.0);
    let lambda = Complex::new(1.0, 0.0);
    let r = resolvent(&dae.pencil, lambda, 0.0).unwrap();
    let a = dae.pencil.a(0.0).map(|v| Complex::new(v, 0.0));
    let b = dae.pencil.b(0.0).map(|v| Complex::new(v, 0.0));
    let oracle = (a * lambda + b).try_inverse().unwrap();
    for (x, y) in r.iter().zip(oracle.iter()) {
        assert!((x - y).norm() < 1e-12);
    }
    let off = Complex::new(0.3, -2.0);
    let r = resolvent(&dae.pencil, off, 0.0).unwrap();
    let a = dae.pencil.a(0.0).map(|v| Complex::new(v, 0.0));
    let b = dae.pencil.b(0.0).map(|v| Complex::new(v, 0.0));
    let m = a * off + b;
    let id = &m * &r;
    for i in 0..3 {
        for j in 0..3 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((id[(i, j)] - Complex::new(want, 0.0)).norm() < 1e-12);
        }
    }
}

#[test]
fn resolvent_of_zero_pencil_is_singular() {
    let p = Pencil::constant(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
    for lambda in [Complex::new(1.0, 0.0), Complex::new(0.0, 5.0)] {
        assert!(matches!(
            resolvent(&p, lambda, 0.0),
            Err(Error::SingularPencilPoint { .. })
        ));
    }
}

#[test]
fn zero_dimension_rejected() {
    let r = Pencil::new(0, |_| DMatrix::zeros(0, 0), |_| DMatrix::zeros(0, 0));
    assert!(matches!(r, Err(Error::InvalidInput(_))));
}

#[test]
fn index_of_simple_pencils() {
    let b = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, -3.0, 0.5]);
    let p = Pencil::constant(DMatrix::identity(2, 2), b).unwrap();
    assert_eq!(estimate_index(&p, 0.0).unwrap(), 0);
    let p = Pencil::constant(DMatrix::zeros(2, 2), DMatrix::identity(2, 2)).unwrap();
    assert_eq!(estimate_index(&p, 0.0).unwrap(), 1);
    let dae = circuit2_fixed(500.0, 2.0, 3.0);
    assert_eq!(estimate_index(&dae.pencil, 0.0).unwrap(), 1);
}

#[test]
fn index_of_nilpotent_pencil_is_two() {
    // A = [[0,1],[0,0]], B = I
    let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let p = Pencil::constant(a, DMatrix::identity(2, 2)).unwrap();
    assert_eq!(estimate_index(&p, 0.0).unwrap(), 2);
}

#[test]
fn index_of_singular_pencil() {
    let p = Pencil::constant(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
    assert!(matches!(estimate_index(&p, 0.0), Err(Error::NotRegular { .. })));
    // A = B = diag(1, 0): det(lambda A + B) vanishes identically
    let a = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, 0.0]));
    let p = Pencil::constant(a.clone(), a).unwrap();
    assert!(matches!(estimate_index(&p, 0.0), Err(Error::NotRegular { .. })));
}

#[test]
fn circuit2_projectors_closed_form() {
    let quad = Quadrature::default();
    for (l, r1, r2) in [(500.0, 2.0, 3.0), (0.01, 1.0, 2.5), (2.0, 0.3, 7.0)] {
        let dae = circuit2_fixed(l, r1, r2);
        let ps = compute_projectors(&dae.pencil, 0.0, &quad).unwrap();
        let [p1, p2, q1, q2, g] = circuit2_projectors(l, r2);
        assert_mat_close(&ps.p1, &p1, 1e-10);
        assert_mat_close(&ps.p2, &p2, 1e-10);
        assert_mat_close(&ps.q1, &q1, 1e-10);
        assert_mat_close(&ps.q2, &q2, 1e-10);
        assert_mat_close(&ps.g, &g, 1e-10 * l.max(1.0));
    }
}

#[test]
fn circuit1_projectors_closed_form() {
    let quad = Quadrature::default();
    let dae = circuit1_with_r(Signal::constant(1.0));
    let ps = compute_projectors(&dae.pencil, 0.0, &quad).unwrap();
    let want_p1 = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0]);
    let want_q2 = DMatrix::from_row_slice(3, 3, &[0.0, -1.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
    assert_mat_close(&ps.p1, &want_p1, 1e-10);
    assert_mat_close(&ps.q2, &want_q2, 1e-10);
    let r_t = Signal::sine(1.0, 0.5, 2.0, 0.0);
    let dae = circuit1_with_r(r_t.clone());
    for t in [0.0, 0.4, 1.7, 3.3] {
        let ps = compute_projectors(&dae.pencil, t, &quad).unwrap();
        let [p1, p2, q1, q2] = circuit1_projectors(r_t.eval(t));
        assert_mat_close(&ps.p1, &p1, 1e-10);
        assert_mat_close(&ps.p2, &p2, 1e-10);
        assert_mat_close(&ps.q1, &q1, 1e-10);
        assert_mat_close(&ps.q2, &q2, 1e-10);
    }
}

#[test]
fn auto_radius_matches_hinted_radius() {
    let quad = Quadrature::default();
    let dae = circuit2_fixed(0.2, 1.5, 2.0);
    let hinted = compute_projectors(&dae.pencil, 0.0, &quad).unwrap();
    let bare = dae.pencil.clone().without_radius_hint();
    let auto = compute_projectors(&bare, 0.0, &quad).unwrap();
    assert_mat_close(&hinted.p1, &auto.p1, 1e-10);
    assert_mat_close(&hinted.q1, &auto.q1, 1e-10);
    assert!(auto.radius > 1.0 + 0.2 + 3.5);
}

#[test]
fn index_zero_projectors_are_trivial() {
    let b = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 3.0]);
    let p = Pencil::constant(DMatrix::identity(2, 2), b).unwrap();
    let ps = compute_projectors(&p, 0.0, &Quadrature::default()).unwrap();
    let id = DMatrix::identity(2, 2);
    assert_mat_close(&ps.p1, &id, 1e-10);
    assert_mat_close(&ps.q1, &id, 1e-10);
    assert_mat_close(&ps.p2, &DMatrix::zeros(2, 2), 1e-10);
    assert_mat_close(&ps.q2, &DMatrix::zeros(2, 2), 1e-10);
    assert_eq!(validate_projectors(&ps, &p).d, 0);
}

#[test]
fn projector_derivative_cases() {
    let quad = Quadrature::default();
    let b = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
    let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
    let p = Pencil::constant(a, b).unwrap();
    assert!(projector_derivative(&p, 1.0, &quad).unwrap().abs().max() < 1e-8);

    let dae = circuit2_fixed(3.0, 1.0, 2.0);
    assert!(projector_derivative(&dae.pencil, 0.5, &quad).unwrap().abs().max() < 1e-8);

    // P1 entry (2,1) is -R(t); R = 1 + 0.5 sin 2t
    let dae = circuit1_with_r(Signal::sine(1.0, 0.5, 2.0, 0.0));
    for t in [0.3, 1.0, 2.5] {
        let d = projector_derivative(&dae.pencil, t, &quad).unwrap();
        assert_abs_diff_eq!(d[(1, 0)], -(2.0 * t).cos(), epsilon = 1e-6);
        assert_abs_diff_eq!(d[(2, 0)], 0.0, epsilon = 1e-6);
    }
    // one-sided stencil at the domain start
    let d = projector_derivative(&dae.pencil, 0.0, &quad).unwrap();
    assert_abs_diff_eq!(d[(1, 0)], -1.0, epsilon = 1e-5);
    let ps = compute_projectors_with_derivative(&dae.pencil, 0.7, &quad).unwrap();
    assert_abs_diff_eq!(ps.p1_prime.unwrap()[(1, 0)], -(1.4f64).cos(), epsilon = 1e-6);
}

#[test]
fn validation_report() {
    let quad = Quadrature::default();
    let dae = circuit2_fixed(500.0, 2.0, 3.0);
    let ps = compute_projectors(&dae.pencil, 0.0, &quad).unwrap();
    let rep = validate_projectors(&ps, &dae.pencil);
    assert_eq!(rep.d, 2);
    assert!(rep.max_violation() < 1e-10, "{rep:?}");

    let mut bad = ps.clone();
    bad.p1[(0, 0)] += 1e-3;
    let rep = validate_projectors(&bad, &dae.pencil);
    assert!((rep.p1_idempotent - 1e-3).abs() < 1e-5, "{}", rep.p1_idempotent);
    assert!(rep.max_violation() >= 1e-3);
}

#[test]
fn non_regular_pencil_fails_projectors() {
    let p = Pencil::constant(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
    assert!(compute_projectors(&p, 0.0, &Quadrature::default()).is_err());
}

#[test]
fn nodes_grow_with_tighter_tolerance() {
    let dae = circuit2_fixed(0.05, 3.0, 2.0);
    let loose = Quadrature {
        tol: 1e-4,
        identity_tol: 1e-3,
        ..Quadrature::default()
    };
    let tight = Quadrature::default();
    let a = compute_projectors(&dae.pencil, 0.0, &loose).unwrap();
    let b = compute_projectors(&dae.pencil, 0.0, &tight).unwrap();
    assert!(a.nodes <= b.nodes);
    let capped = Quadrature {
        max_nodes: 32,
        ..Quadrature::default()
    };
    assert!(matches!(
        compute_projectors(&dae.pencil, 0.0, &capped),
        Err(Error::QuadratureDiverged { .. })
    ));
}

#[test]
fn analytic_a_prime_agrees_with_differences() {
    let l = Signal::power(0.1, 1.0, 1.0, -1.0);
    let dae = circuit1(Circuit1Params {
        l,
        r_l: Signal::constant(1.0),
        r: Signal::constant(1.0),
        u: Signal::constant(0.0),
        i: Signal::constant(0.0),
        phi: power_nonlinearity(1.0, 2),
        phi_l: power_nonlinearity(1.0, 2),
    });
    assert!(dae.pencil.has_a_prime());
    let bare = Pencil::new(
        3,
        {
            let p = dae.pencil.clone();
            move |t| p.a(t)
        },
        {
            let p = dae.pencil.clone();
            move |t| p.b(t)
        },
    )
    .unwrap();
    for t in [0.5, 1.0, 4.0] {
        let d = (dae.pencil.a_prime(t) - bare.a_prime(t)).abs().max();
        assert!(d < 1e-8, "{d:e}");
    }
}
