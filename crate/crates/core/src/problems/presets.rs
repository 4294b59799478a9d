use super::circuits::{circuit1, circuit2, manufactured_circuit2, Circuit1Params, Circuit2Params};
use super::signals::{power_nonlinearity, sine_nonlinearity, Nonlinearity, Signal, SineKind};
use crate::dae::SemilinearDae;
use crate::scalar::{lit, Real};
use nalgebra::DVector;
use std::f64::consts::PI;
use std::sync::Arc;

/// Named problem with its initial data and a suggested mesh.
#[derive(Clone)]
pub struct Preset<T: Real> {
    pub name: &'static str,
    pub description: &'static str,
    pub dae: SemilinearDae<T>,
    pub x0: DVector<T>,
    pub t0: T,
    pub t_end: T,
    pub h: T,
    /// Parameters satisfy the Lagrange stability conditions.
    pub lagrange_stable: bool,
    pub exact: Option<Arc<dyn Fn(T) -> DVector<T> + Send + Sync>>,
}

impl<T: Real> std::fmt::Debug for Preset<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Preset")
            .field("name", &self.name)
            .field("x0", &self.x0)
            .finish()
    }
}

pub const NAMES: &[&str] = &[
    "circuit1:fig2",
    "circuit1:fig3",
    "circuit1:sawtooth",
    "circuit2:table1",
    "circuit2:small-l",
    "circuit2:triangular",
    "circuit2:cosine",
    "circuit2:sine",
    "circuit2:sine-lagrange",
    "manufactured",
];

fn cube<T: Real>() -> Nonlinearity<T> {
    power_nonlinearity(1.0, 2)
}

fn inv1<T: Real>() -> Signal<T> {
    Signal::power(0.0, 1.0, 1.0, -1.0)
}

fn circuit1_lagrange<T: Real>(u: Signal<T>, a: f64, b: f64) -> SemilinearDae<T> {
    circuit1(Circuit1Params {
        l: Signal::power(0.1, 1.0, 1.0, -1.0),
        r_l: Signal::sine(3.0, 0.5, 2.0, 0.0),
        r: Signal::sine(1.0, 0.5, 2.0, 0.0),
        u,
        i: Signal::sine(0.0, 1.0, 2.0, -PI),
        phi: power_nonlinearity(a, 2),
        phi_l: power_nonlinearity(b, 2),
    })
}

fn preset<T: Real>(
    name: &'static str,
    description: &'static str,
    dae: SemilinearDae<T>,
    x0: [f64; 3],
    t_end: f64,
    h: f64,
    lagrange_stable: bool,
) -> Preset<T> {
    Preset {
        name,
        description,
        dae,
        x0: DVector::from_iterator(3, x0.iter().map(|v| lit(*v))),
        t0: T::zero(),
        t_end: lit(t_end),
        h: lit(h),
        lagrange_stable,
        exact: None,
    }
}

/// Looks up a preset by name.
pub fn preset_by_name<T: Real>(name: &str) -> Option<Preset<T>> {
    let p = match name {
        "circuit1:fig2" => preset(
            name_of(name),
            "circuit 1, U = 2 sin(2t+pi), I = sin(2t-pi), cubic resistors; Lagrange stable",
            circuit1_lagrange(Signal::sine(0.0, 2.0, 2.0, PI), 1.0, 1.0),
            [0.0, 0.0, 0.0],
            20.0,
            0.01,
            true,
        ),
        "circuit1:fig3" => preset(
            name_of(name),
            "circuit 1, U = t+1, I = 3/(t+1), R_L = exp(-t), R = 2+cos t; possibly unbounded",
            circuit1(Circuit1Params {
                l: Signal::power(0.1, 1.0, 1.0, -1.0),
                r_l: Signal::exp(0.0, 1.0, -1.0),
                r: Signal::cosine(2.0, 1.0, 1.0, 0.0),
                u: Signal::affine(1.0, 1.0),
                i: Signal::power(0.0, 3.0, 1.0, -1.0),
                phi: cube(),
                phi_l: cube(),
            }),
            [0.0, 37.0, 3.0],
            5.0,
            0.001,
            false,
        ),
        "circuit1:sawtooth" => preset(
            name_of(name),
            "circuit 1 driven by a sawtooth voltage, phi = 3y^3, phi_L = 4y^3; Lagrange stable",
            circuit1_lagrange(Signal::sawtooth(), 3.0, 4.0),
            [0.0, 0.0, 0.0],
            30.0,
            0.01,
            true,
        ),
        "circuit2:table1" => preset(
            name_of(name),
            "circuit 2 with L = 500, R1 = exp(-t), R2 = 2+exp(-t), cubic elements (method comparison)",
            circuit2(Circuit2Params {
                l: Signal::constant(500.0),
                r1: Signal::exp(0.0, 1.0, -1.0),
                r2: Signal::exp(2.0, 1.0, -1.0),
                g3: inv1(),
                u: inv1(),
                i: Signal::sine(0.0, 1.0, 1.0, 0.0),
                phi1: cube(),
                phi2: cube(),
                phi3: cube(),
            }),
            [0.0, 0.0, 0.0],
            1.0,
            0.001,
            false,
        ),
        "circuit2:small-l" => preset(
            name_of(name),
            "circuit 2 with a small inductance L = 1e-3",
            circuit2(Circuit2Params {
                l: Signal::constant(1e-3),
                r1: Signal::exp(0.0, 1.0, -1.0),
                r2: Signal::exp(5.0, 1.0, -1.0),
                g3: inv1(),
                u: inv1(),
                i: Signal::sine(0.0, 1.0, 1.0, 0.0),
                phi1: cube(),
                phi2: cube(),
                phi3: cube(),
            }),
            [0.0, 0.0, 0.0],
            10.0,
            1e-4,
            false,
        ),
        "circuit2:triangular" => preset(
            name_of(name),
            "circuit 2 driven by a triangular voltage",
            circuit2(Circuit2Params {
                l: Signal::power(0.1, 1.0, 1.0, -1.0),
                r1: Signal::exp(0.0, 1.0, -1.0),
                r2: Signal::exp(2.0, 1.0, -1.0),
                g3: inv1(),
                u: Signal::triangular(),
                i: Signal::power(-1.0, 1.0, 1.0, -1.0),
                phi1: cube(),
                phi2: cube(),
                phi3: cube(),
            }),
            [0.0, 0.0, 0.0],
            30.0,
            0.01,
            false,
        ),
        "circuit2:cosine" => preset(
            name_of(name),
            "circuit 2 with phi1 = y^5, phi2 = phi3 = cos(y)/3; Lagrange stable",
            circuit2(Circuit2Params {
                l: Signal::power(0.01, 1.0, 10.0, -0.5),
                r1: Signal::sine(1.0, 0.5, 1.0, 0.0),
                r2: Signal::sine(3.0, 0.5, 1.0, 0.0),
                g3: inv1(),
                u: Signal::power(0.0, 100.0, 1.0, -2.0),
                i: Signal::inverse_log(0.0, 1.0),
                phi1: power_nonlinearity(1.0, 3),
                phi2: sine_nonlinearity(1.0 / 3.0, SineKind::Cos),
                phi3: sine_nonlinearity(1.0 / 3.0, SineKind::Cos),
            }),
            [4.0 / 3.0, 0.0, 0.0],
            50.0,
            0.001,
            true,
        ),
        "circuit2:sine" => preset(
            name_of(name),
            "circuit 2 with sine elements (a, b, c) = (1/3, -1/2, 10) and growing sources",
            circuit2(Circuit2Params {
                l: Signal::constant(1.0),
                r1: Signal::exp(2.0, 1.0, -1.0),
                r2: Signal::affine(3.0, 0.1),
                g3: inv1(),
                u: Signal::affine(1.0, 1.0),
                i: Signal::affine(0.0, 1.0),
                phi1: sine_nonlinearity(10.0, SineKind::Sin),
                phi2: sine_nonlinearity(1.0 / 3.0, SineKind::Sin),
                phi3: sine_nonlinearity(-0.5, SineKind::Sin),
            }),
            [0.0, 0.0, 0.0],
            20.0,
            0.001,
            false,
        ),
        "circuit2:sine-lagrange" => preset(
            name_of(name),
            "circuit 2 with sine elements (a, b, c) = (1/3, -1/2, 5); Lagrange stable",
            circuit2(Circuit2Params {
                l: Signal::power(0.1, 1.0, 1.0, -1.0),
                r1: Signal::exp(1.0, 1.0, -1.0),
                r2: Signal::cosine(3.0, 0.5, 1.0, 0.0),
                g3: inv1(),
                u: Signal::power(0.0, 1.0, 1.0, -2.5),
                i: Signal::sine(0.0, 1.0, 1.0, 0.0),
                phi1: sine_nonlinearity(5.0, SineKind::Sin),
                phi2: sine_nonlinearity(1.0 / 3.0, SineKind::Sin),
                phi3: sine_nonlinearity(-0.5, SineKind::Sin),
            }),
            [0.0, 0.0, 0.0],
            50.0,
            0.01,
            true,
        ),
        "manufactured" => {
            let m = manufactured_circuit2::<T>();
            let x0 = (m.exact)(T::zero());
            Preset {
                name: name_of(name),
                description: "smooth circuit-2 problem with exact solution (sin t, cos(t)/2, 0.3 sin 2t)",
                dae: m.dae,
                x0,
                t0: T::zero(),
                t_end: T::one(),
                h: lit(0.05),
                lagrange_stable: false,
                exact: Some(m.exact),
            }
        }
        _ => return None,
    };
    Some(p)
}

fn name_of(name: &str) -> &'static str {
    NAMES.iter().find(|n| **n == name).copied().expect("known preset")
}
