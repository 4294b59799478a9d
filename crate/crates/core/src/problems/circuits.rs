use super::signals::{Nonlinearity, Signal};
use crate::dae::{DaeForm, SemilinearDae};
use crate::pencil::TimeVaryingPencil;
use crate::scalar::{lit, Real};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

/// Series RL branch coupled to a nonlinear resistor.
///
/// Unknowns: `x1` inductor current, `x2`, `x3` the remaining branch currents.
#[derive(Debug, Clone)]
pub struct Circuit1Params<T: Real> {
    pub l: Signal<T>,
    pub r_l: Signal<T>,
    pub r: Signal<T>,
    pub u: Signal<T>,
    pub i: Signal<T>,
    pub phi: Nonlinearity<T>,
    pub phi_l: Nonlinearity<T>,
}

/// Nested circuit with one inductor, two resistors, a conductance and three
/// nonlinear elements.
///
/// Unknowns: `x1 = I1`, `x2 = I31`, `x3 = I2`.
#[derive(Debug, Clone)]
pub struct Circuit2Params<T: Real> {
    pub l: Signal<T>,
    pub r1: Signal<T>,
    pub r2: Signal<T>,
    pub g3: Signal<T>,
    pub u: Signal<T>,
    pub i: Signal<T>,
    pub phi1: Nonlinearity<T>,
    pub phi2: Nonlinearity<T>,
    pub phi3: Nonlinearity<T>,
}

fn diag_l<T: Real>(l: T) -> DMatrix<T> {
    let mut a = DMatrix::zeros(3, 3);
    a[(0, 0)] = l;
    a
}

/// `A = diag(L,0,0)`, `B = [[R_L,-1,0],[1,0,1],[0,1,-R]]`,
/// `f = (-phi_L(x1), I, U + phi(x3))`.
pub fn circuit1<T: Real>(params: Circuit1Params<T>) -> SemilinearDae<T> {
    let p = Arc::new(params);
    let (pa, pb, ph) = (p.clone(), p.clone(), p.clone());
    let mut pencil = TimeVaryingPencil::new(
        3,
        move |t| diag_l(pa.l.eval(t)),
        move |t| {
            DMatrix::from_row_slice(
                3,
                3,
                &[
                    pb.r_l.eval(t),
                    -T::one(),
                    T::zero(),
                    T::one(),
                    T::zero(),
                    T::one(),
                    T::zero(),
                    T::one(),
                    -pb.r.eval(t),
                ],
            )
        },
    )
    .expect("dimension 3")
    // single finite eigenvalue -(R_L + R)/L; radius four times its bound
    .with_radius_hint(move |t| {
        lit::<T>(4.0) * (ph.r_l.eval(t).abs() + ph.r.eval(t).abs()) / ph.l.eval(t).abs() + T::one()
    });
    if p.l.is_differentiable() {
        let pd = p.clone();
        pencil = pencil.with_a_prime(move |t| diag_l(pd.l.derivative(t).unwrap_or_else(T::zero)));
    }
    let (pf, pj) = (p.clone(), p);
    SemilinearDae::new(
        pencil,
        move |t, x: &DVector<T>| {
            DVector::from_vec(vec![
                -pf.phi_l.eval(x[0]),
                pf.i.eval(t),
                pf.u.eval(t) + pf.phi.eval(x[2]),
            ])
        },
        DaeForm::InsideDerivative,
        T::zero(),
    )
    .with_jacobian(move |_, x: &DVector<T>| {
        let mut j = DMatrix::zeros(3, 3);
        j[(0, 0)] = -pj.phi_l.derivative(x[0]);
        j[(2, 2)] = pj.phi.derivative(x[2]);
        j
    })
}

/// Closed-form projectors of [`circuit1`] for a given `R`.
pub fn circuit1_projectors<T: Real>(r: T) -> [DMatrix<T>; 4] {
    let (o, z) = (T::one(), T::zero());
    [
        DMatrix::from_row_slice(3, 3, &[o, z, z, -r, z, z, -o, z, z]),
        DMatrix::from_row_slice(3, 3, &[z, z, z, r, o, z, o, z, o]),
        DMatrix::from_row_slice(3, 3, &[o, r, o, z, z, z, z, z, z]),
        DMatrix::from_row_slice(3, 3, &[z, -r, -o, z, o, z, z, z, o]),
    ]
}

/// `A = diag(L,0,0)`, `B = [[R1,0,0],[1,-1,-1],[0,0,R2]]`,
/// `f = (U - phi1(x1) - phi3(x2), I + G3 phi3(x2), phi3(x2) - phi2(x3))`.
pub fn circuit2<T: Real>(params: Circuit2Params<T>) -> SemilinearDae<T> {
    let p = Arc::new(params);
    let (pa, pb, ph) = (p.clone(), p.clone(), p.clone());
    let mut pencil = TimeVaryingPencil::new(
        3,
        move |t| diag_l(pa.l.eval(t)),
        move |t| {
            let (o, z) = (T::one(), T::zero());
            DMatrix::from_row_slice(3, 3, &[pb.r1.eval(t), z, z, o, -o, -o, z, z, pb.r2.eval(t)])
        },
    )
    .expect("dimension 3")
    .with_radius_hint(move |t| ph.index1_bounds(t).1);
    if p.l.is_differentiable() {
        let pd = p.clone();
        pencil = pencil.with_a_prime(move |t| diag_l(pd.l.derivative(t).unwrap_or_else(T::zero)));
    }
    let (pf, pj) = (p.clone(), p);
    SemilinearDae::new(
        pencil,
        move |t, x: &DVector<T>| {
            let p3 = pf.phi3.eval(x[1]);
            DVector::from_vec(vec![
                pf.u.eval(t) - pf.phi1.eval(x[0]) - p3,
                pf.i.eval(t) + pf.g3.eval(t) * p3,
                p3 - pf.phi2.eval(x[2]),
            ])
        },
        DaeForm::InsideDerivative,
        T::zero(),
    )
    .with_jacobian(move |t, x: &DVector<T>| {
        let d3 = pj.phi3.derivative(x[1]);
        let mut j = DMatrix::zeros(3, 3);
        j[(0, 0)] = -pj.phi1.derivative(x[0]);
        j[(0, 1)] = -d3;
        j[(1, 1)] = pj.g3.eval(t) * d3;
        j[(2, 1)] = d3;
        j[(2, 2)] = -pj.phi2.derivative(x[2]);
        j
    })
}

/// Closed-form `P1, P2, Q1, Q2` of [`circuit2`] (parameter free) and `G`.
pub fn circuit2_projectors<T: Real>(l: T, r2: T) -> [DMatrix<T>; 5] {
    let (o, z) = (T::one(), T::zero());
    [
        DMatrix::from_row_slice(3, 3, &[o, z, z, o, z, z, z, z, z]),
        DMatrix::from_row_slice(3, 3, &[z, z, z, -o, o, z, z, z, o]),
        DMatrix::from_row_slice(3, 3, &[o, z, z, z, z, z, z, z, z]),
        DMatrix::from_row_slice(3, 3, &[z, z, z, z, o, z, z, z, o]),
        DMatrix::from_row_slice(3, 3, &[l, z, z, o, -o, -o, z, z, r2]),
    ]
}

impl<T: Real> Circuit2Params<T> {
    /// `(C1, C2)` with `|(lambda A + B)^{-1}| <= C1` on `|lambda| = C2`, and all
    /// finite eigenvalues inside that circle.
    pub fn index1_bounds(&self, t: T) -> (T, T) {
        let r1 = self.r1.eval(t).abs();
        let r2 = self.r2.eval(t).abs();
        let l = self.l.eval(t).abs();
        let c1 = lit::<T>(2.0).sqrt() * (T::one() + T::one() / r2) + T::one();
        let c2 = (T::one() + r1) / l + T::one();
        (c1, c2)
    }

    /// `G3 |b| + (|a| + |b| + G3 |a| |b|) / R2` for sine or cosine `phi2 = a sin`,
    /// `phi3 = b sin`; global solvability needs this below 1.
    pub fn sin_condition(&self, t: T) -> Option<T> {
        let a = self.phi2.trig_amplitude()?.abs();
        let b = self.phi3.trig_amplitude()?.abs();
        let g3 = self.g3.eval(t);
        let r2 = self.r2.eval(t);
        Some(g3 * b + (a + b + g3 * a * b) / r2)
    }
}

/// Problem with a known exact solution.
#[derive(Clone)]
pub struct Manufactured<T: Real> {
    pub dae: SemilinearDae<T>,
    pub exact: Arc<dyn Fn(T) -> DVector<T> + Send + Sync>,
}

/// Adds the forcing `g(t) = d/dt[A x*] + B x* - f(t, x*)` to `base`, so that
/// `x*` solves the result exactly.
pub fn manufacture<T: Real>(
    base: SemilinearDae<T>,
    exact: impl Fn(T) -> DVector<T> + Send + Sync + 'static,
    exact_derivative: impl Fn(T) -> DVector<T> + Send + Sync + 'static,
) -> Manufactured<T> {
    let exact: Arc<dyn Fn(T) -> DVector<T> + Send + Sync> = Arc::new(exact);
    let pencil = base.pencil.clone();
    let f = base.rhs_fn();
    let jac = base.jacobian_fn();
    let xs = exact.clone();
    let forcing = move |t: T| {
        let x = xs(t);
        pencil.a_prime(t) * &x + pencil.a(t) * exact_derivative(t) + pencil.b(t) * &x - f(t, &x)
    };
    let f = base.rhs_fn();
    let mut dae = base.with_rhs(move |t, x| f(t, x) + forcing(t));
    if let Some(j) = jac {
        dae = dae.with_jacobian(move |t, x| j(t, x));
    }
    Manufactured { dae, exact }
}

/// Smooth circuit2-type problem with sine nonlinearities and exact solution
/// `(sin t, cos(t)/2, 0.3 sin 2t)`.
pub fn manufactured_circuit2<T: Real>() -> Manufactured<T> {
    let params = Circuit2Params {
        l: Signal::sine(2.0, 1.0, 1.0, 0.0),
        r1: Signal::cosine(1.0, 0.5, 1.0, 0.0),
        r2: Signal::sine(3.0, 0.5, 1.0, 0.0),
        g3: Signal::power(0.0, 1.0, 1.0, -1.0),
        u: Signal::cosine(0.0, 1.0, 1.0, 0.0),
        i: Signal::sine(0.0, 1.0, 1.0, 0.0),
        phi1: Nonlinearity::Sine { a: T::one() },
        phi2: Nonlinearity::Sine { a: lit(1.0 / 3.0) },
        phi3: Nonlinearity::Sine { a: lit(-0.5) },
    };
    let half = lit::<T>(0.5);
    let c = lit::<T>(0.3);
    let two = lit::<T>(2.0);
    manufacture(
        circuit2(params),
        move |t: T| DVector::from_vec(vec![t.sin(), half * t.cos(), c * (two * t).sin()]),
        move |t: T| DVector::from_vec(vec![t.cos(), -half * t.sin(), two * c * (two * t).cos()]),
    )
}
