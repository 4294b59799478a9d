use approx::assert_abs_diff_eq;
use nalgebra::{Complex, DVector};
use spectral_dae::problems::{
    circuit2, manufactured_circuit2, power_nonlinearity, preset_by_name, sine_nonlinearity, Circuit2Params, Signal,
    SineKind, PRESET_NAMES,
};
use spectral_dae::{
    compute_projectors, consistency_residual, consistent_initialize, resolvent, solve, Config, Method, Quadrature,
};

#[test]
fn every_preset_loads_and_runs_briefly() {
    for name in PRESET_NAMES {
        let p = preset_by_name::<f64>(name).unwrap();
        assert_eq!(p.name, *name);
        assert_eq!(p.dae.dim(), 3);
        let h = p.h;
        let cfg = Config::with_steps(Method::Method2, p.t0, p.t0 + 20.0 * h, 20).unwrap();
        let tr = solve(&p.dae, &p.x0, &cfg).unwrap();
        assert!(tr.is_completed(), "{name}: {:?}", tr.status);
    }
    assert!(preset_by_name::<f64>("circuit3:nope").is_none());
}

#[test]
fn stated_initial_points_are_consistent() {
    let quad = Quadrature::default();
    for name in [
        "circuit1:fig2",
        "circuit1:fig3",
        "circuit2:table1",
        "circuit2:cosine",
        "circuit2:sine",
    ] {
        let p = preset_by_name::<f64>(name).unwrap();
        let ps = compute_projectors(&p.dae.pencil, p.t0, &quad).unwrap();
        let r = consistency_residual(&p.dae, &ps, &p.x0).amax();
        assert!(r < 1e-12, "{name}: {r:e}");
    }
    let p = preset_by_name::<f64>("circuit1:fig3").unwrap();
    assert_eq!(p.x0.as_slice(), &[0.0, 37.0, 3.0]);
    let p = preset_by_name::<f64>("circuit2:cosine").unwrap();
    assert_abs_diff_eq!(p.x0[0], 4.0 / 3.0, epsilon = 1e-15);
}

#[test]
fn circuit1_rhs_at_rest() {
    let p = preset_by_name::<f64>("circuit1:fig2").unwrap();
    let f = p.dae.rhs(0.3, &DVector::zeros(3));
    assert_eq!(f[0], 0.0);
    assert_abs_diff_eq!(f[1], (0.6 - std::f64::consts::PI).sin(), epsilon = 1e-15);
    assert_abs_diff_eq!(f[2], 2.0 * (0.6 + std::f64::consts::PI).sin(), epsilon = 1e-15);
}

#[test]
fn circuit2_resolvent_bound() {
    let p = preset_by_name::<f64>("circuit2:sine-lagrange").unwrap();
    let params = Circuit2Params {
        l: Signal::power(0.1, 1.0, 1.0, -1.0),
        r1: Signal::exp(1.0, 1.0, -1.0),
        r2: Signal::cosine(3.0, 0.5, 1.0, 0.0),
        g3: Signal::power(0.0, 1.0, 1.0, -1.0),
        u: Signal::power(0.0, 1.0, 1.0, -2.5),
        i: Signal::sine(0.0, 1.0, 1.0, 0.0),
        phi1: sine_nonlinearity(5.0, SineKind::Sin),
        phi2: sine_nonlinearity(1.0 / 3.0, SineKind::Sin),
        phi3: sine_nonlinearity(-0.5, SineKind::Sin),
    };
    for t in [0.0, 0.5, 2.0, 10.0, 40.0] {
        let (c1, c2) = params.index1_bounds(t);
        for k in 0..64 {
            let th = std::f64::consts::TAU * k as f64 / 64.0;
            let lambda = Complex::from_polar(c2, th);
            let r = resolvent(&p.dae.pencil, lambda, t).unwrap();
            let norm = r.singular_values().max();
            assert!(norm <= c1, "t={t}, theta={th}: {norm} > {c1}");
        }
        let s = params.sin_condition(t).unwrap();
        assert!(s < 1.0, "{s}");
    }
}

#[test]
fn sin_condition_violation_reported() {
    let params = Circuit2Params {
        l: Signal::constant(1.0),
        r1: Signal::constant(1.0),
        r2: Signal::constant(0.5),
        g3: Signal::constant(1.0),
        u: Signal::constant(0.0),
        i: Signal::constant(0.0),
        phi1: sine_nonlinearity(1.0, SineKind::Sin),
        phi2: sine_nonlinearity(2.0, SineKind::Cos),
        phi3: sine_nonlinearity(1.0, SineKind::Sin),
    };
    assert!(params.sin_condition(0.0).unwrap() > 1.0);
    let cubic = Circuit2Params {
        phi2: power_nonlinearity(1.0, 2),
        ..params
    };
    assert!(cubic.sin_condition(0.0).is_none());
}

#[test]
fn manufactured_exact_solution_satisfies_dae() {
    let m = manufactured_circuit2::<f64>();
    let p = &m.dae.pencil;
    for t in [0.1, 0.4, 0.9] {
        let d = 1e-5;
        let ax = |s: f64| p.a(s) * (m.exact)(s);
        let dax = (ax(t + d) - ax(t - d)) / (2.0 * d);
        let x = (m.exact)(t);
        let res = dax + p.b(t) * &x - m.dae.rhs(t, &x);
        assert!(res.amax() < 1e-8, "{res}");
    }
    let quad = Quadrature::default();
    let x0 = consistent_initialize(&m.dae, 0.0, &DVector::zeros(3), &quad, 1e-12, 50).unwrap();
    assert!((x0 - (m.exact)(0.0)).amax() < 1e-10);
}

#[test]
fn presets_carry_radius_hints_and_flags() {
    for name in PRESET_NAMES {
        let p = preset_by_name::<f64>(name).unwrap();
        assert!(p.dae.pencil.radius_hint(0.0).unwrap() > 1.0, "{name}");
    }
    let stable: Vec<_> = PRESET_NAMES
        .iter()
        .filter(|n| preset_by_name::<f64>(n).unwrap().lagrange_stable)
        .copied()
        .collect();
    for n in [
        "circuit1:fig2",
        "circuit1:sawtooth",
        "circuit2:cosine",
        "circuit2:sine-lagrange",
    ] {
        assert!(stable.contains(&n), "{n}");
    }
}

#[test]
fn generic_circuit_in_single_precision() {
    let dae = circuit2::<f32>(Circuit2Params {
        l: Signal::constant(2.0),
        r1: Signal::constant(1.0),
        r2: Signal::constant(3.0),
        g3: Signal::constant(1.0),
        u: Signal::constant(1.0),
        i: Signal::constant(0.0),
        phi1: power_nonlinearity(1.0, 2),
        phi2: power_nonlinearity(1.0, 2),
        phi3: power_nonlinearity(1.0, 2),
    });
    let ps = compute_projectors(&dae.pencil, 0.0f32, &spectral_dae::QuadratureConfig::<f32>::default()).unwrap();
    assert!((ps.p1[(1, 0)] - 1.0).abs() < 1e-4);
    assert!(ps.p1[(2, 2)].abs() < 1e-4);
}
