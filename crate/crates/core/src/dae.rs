//! Semilinear DAEs `d/dt[A(t)x] + B(t)x = f(t,x)` (or `A x' + B x = f`) and
//! the maps of their semi-explicit decomposition.

use crate::error::{Error, Result};
use crate::linalg::{self, invert, max_abs, singular_threshold, vec_inf};
use crate::pencil::{compute_projectors, ProjectorSet, QuadratureConfig, TimeVaryingPencil};
use crate::scalar::{eps, lit, to_f64, Real};
use nalgebra::{DMatrix, DVector};
use std::sync::Arc;

pub type RhsFn<T> = Arc<dyn Fn(T, &DVector<T>) -> DVector<T> + Send + Sync>;
pub type JacobianFn<T> = Arc<dyn Fn(T, &DVector<T>) -> DMatrix<T> + Send + Sync>;

/// Where the derivative sits relative to the leading coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum DaeForm {
    /// `d/dt[A(t)x] + B(t)x = f(t,x)`
    InsideDerivative,
    /// `A(t)x' + B(t)x = f(t,x)`
    OutsideDerivative,
}

#[derive(Clone)]
pub struct SemilinearDae<T: Real> {
    pub pencil: TimeVaryingPencil<T>,
    f: RhsFn<T>,
    f_jac: Option<JacobianFn<T>>,
    pub form: DaeForm,
    pub t_plus: T,
}

impl<T: Real> std::fmt::Debug for SemilinearDae<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemilinearDae")
            .field("pencil", &self.pencil)
            .field("f_jac", &self.f_jac.is_some())
            .field("form", &self.form)
            .field("t_plus", &self.t_plus)
            .finish()
    }
}

impl<T: Real> SemilinearDae<T> {
    pub fn new(
        pencil: TimeVaryingPencil<T>,
        f: impl Fn(T, &DVector<T>) -> DVector<T> + Send + Sync + 'static,
        form: DaeForm,
        t_plus: T,
    ) -> Self {
        Self {
            pencil: pencil.with_domain_start(t_plus),
            f: Arc::new(f),
            f_jac: None,
            form,
            t_plus,
        }
    }

    pub fn with_jacobian(mut self, j: impl Fn(T, &DVector<T>) -> DMatrix<T> + Send + Sync + 'static) -> Self {
        self.f_jac = Some(Arc::new(j));
        self
    }

    /// Same problem with the nonlinearity replaced; the Jacobian is dropped.
    pub fn with_rhs(mut self, f: impl Fn(T, &DVector<T>) -> DVector<T> + Send + Sync + 'static) -> Self {
        self.f = Arc::new(f);
        self.f_jac = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.pencil.dim()
    }

    pub fn has_jacobian(&self) -> bool {
        self.f_jac.is_some()
    }

    pub fn rhs(&self, t: T, x: &DVector<T>) -> DVector<T> {
        (self.f)(t, x)
    }

    pub fn rhs_fn(&self) -> RhsFn<T> {
        self.f.clone()
    }

    pub fn jacobian_fn(&self) -> Option<JacobianFn<T>> {
        self.f_jac.clone()
    }

    /// `df/dx`, analytic when supplied, otherwise forward differences.
    pub fn jacobian(&self, t: T, x: &DVector<T>) -> DMatrix<T> {
        match &self.f_jac {
            Some(j) => j(t, x),
            None => fd_jacobian(&*self.f, t, x),
        }
    }
}

/// Forward-difference Jacobian with step `sqrt(eps) (1 + |x_j|)`.
pub fn fd_jacobian<T: Real>(f: &dyn Fn(T, &DVector<T>) -> DVector<T>, t: T, x: &DVector<T>) -> DMatrix<T> {
    let n = x.len();
    let f0 = f(t, x);
    let mut jac = DMatrix::zeros(f0.len(), n);
    let s = eps::<T>().sqrt();
    let mut xp = x.clone();
    for j in 0..n {
        let h = s * (T::one() + x[j].abs());
        xp[j] = x[j] + h;
        let col = (f(t, &xp) - &f0) / h;
        jac.set_column(j, &col);
        xp[j] = x[j];
    }
    jac
}

/// Solver state at one mesh point.
#[derive(Debug, Clone, PartialEq)]
pub struct StepState<T: Real> {
    pub t: T,
    /// Differential component, in the range of `P1(t)`.
    pub z: DVector<T>,
    /// Algebraic component, in the range of `P2(t)`.
    pub u: DVector<T>,
    pub x: DVector<T>,
}

impl<T: Real> StepState<T> {
    /// Splits `x` with the projectors of `ps`.
    pub fn split(ps: &ProjectorSet<T>, x: &DVector<T>) -> Self {
        let z = &ps.p1 * x;
        let u = &ps.p2 * x;
        let x = &z + &u;
        Self { t: ps.t, z, u, x }
    }
}

fn recombine<T: Real>(ps: &ProjectorSet<T>, z: &DVector<T>, u: &DVector<T>) -> DVector<T> {
    &ps.p1 * z + &ps.p2 * u
}

/// Right-hand side of the differential part:
/// `[P1' - G^{-1} Q1 (A' + B)] P1 z + G^{-1} Q1 f(t, P1 z + P2 u)`.
pub fn pi_rhs<T: Real>(
    dae: &SemilinearDae<T>,
    ps: &ProjectorSet<T>,
    z: &DVector<T>,
    u: &DVector<T>,
) -> Result<DVector<T>> {
    let p1_prime = ps
        .p1_prime
        .as_ref()
        .ok_or(Error::MissingProjectorDerivative { t: to_f64(ps.t) })?;
    let p1z = &ps.p1 * z;
    let x = &p1z + &ps.p2 * u;
    let lin = p1_prime * &p1z - ps.g_inv_q1() * ((&ps.a_prime + &ps.b) * &p1z);
    Ok(lin + ps.g_inv_q1() * dae.rhs(ps.t, &x))
}

/// `G^{-1} Q2 [f(t, P1 z + P2 u) - A' P1 z]`.
pub fn w_map<T: Real>(dae: &SemilinearDae<T>, ps: &ProjectorSet<T>, z: &DVector<T>, u: &DVector<T>) -> DVector<T> {
    let p1z = &ps.p1 * z;
    let x = &p1z + &ps.p2 * u;
    ps.g_inv_q2() * (dae.rhs(ps.t, &x) - &ps.a_prime * p1z)
}

/// `w_map - u`; vanishes exactly on the consistency manifold.
pub fn algebraic_residual<T: Real>(
    dae: &SemilinearDae<T>,
    ps: &ProjectorSet<T>,
    z: &DVector<T>,
    u: &DVector<T>,
) -> DVector<T> {
    w_map(dae, ps, z, u) - u
}

/// Factorized `M = I - G^{-1} Q2 (df/dx) P2` of the algebraic update.
#[derive(Debug, Clone)]
pub struct NewtonMatrix<T: Real> {
    pub matrix: DMatrix<T>,
    pub inverse: DMatrix<T>,
    pub rcond: T,
}

impl<T: Real> NewtonMatrix<T> {
    /// `M^{-1} v`.
    pub fn solve(&self, v: &DVector<T>) -> DVector<T> {
        &self.inverse * v
    }
}

pub fn newton_update_matrix<T: Real>(
    dae: &SemilinearDae<T>,
    ps: &ProjectorSet<T>,
    z: &DVector<T>,
    u: &DVector<T>,
) -> Result<NewtonMatrix<T>> {
    let n = ps.dim();
    let x = recombine(ps, z, u);
    let jac = dae.jacobian(ps.t, &x);
    let matrix = DMatrix::identity(n, n) - ps.g_inv_q2() * jac * &ps.p2;
    let singular = |rcond: T| Error::SingularNewtonMatrix {
        t: to_f64(ps.t),
        rcond: to_f64(rcond),
    };
    match invert(&matrix) {
        None => Err(singular(T::zero())),
        Some(inv) if inv.rcond < singular_threshold::<T>() => Err(singular(inv.rcond)),
        Some(inv) => Ok(NewtonMatrix {
            matrix,
            inverse: inv.inv,
            rcond: inv.rcond,
        }),
    }
}

/// The operator `[d(Q2 f)/dx - B] P2` and its restriction to the algebraic
/// subspaces, expressed in orthonormal bases of `range(P2)` and `range(Q2)`.
#[derive(Debug, Clone)]
pub struct PhiOperator<T: Real> {
    pub full: DMatrix<T>,
    pub restricted: DMatrix<T>,
    pub basis_x: DMatrix<T>,
    pub basis_y: DMatrix<T>,
    /// 2-norm condition number of `restricted`; infinite when singular.
    pub condition: T,
}

impl<T: Real> PhiOperator<T> {
    /// Matrix of the restricted inverse acting on the full space:
    /// `U_x Phi_r^{-1} U_y^T`.
    pub fn inverse_matrix(&self) -> Option<DMatrix<T>> {
        let n = self.full.nrows();
        if self.restricted.nrows() == 0 {
            return Some(DMatrix::zeros(n, n));
        }
        let inv = invert(&self.restricted)?;
        if inv.rcond < singular_threshold::<T>() {
            return None;
        }
        Some(&self.basis_x * inv.inv * self.basis_y.transpose())
    }
}

pub fn phi_operator<T: Real>(
    dae: &SemilinearDae<T>,
    ps: &ProjectorSet<T>,
    z: &DVector<T>,
    u: &DVector<T>,
) -> PhiOperator<T> {
    let x = recombine(ps, z, u);
    let full = (&ps.q2 * dae.jacobian(ps.t, &x) - &ps.b) * &ps.p2;
    let basis_x = linalg::range_basis(&ps.p2, lit(T::RANK_TOL));
    let basis_y = linalg::range_basis(&ps.q2, lit(T::RANK_TOL));
    let restricted = basis_y.transpose() * &full * &basis_x;
    let condition = if restricted.is_empty() {
        T::one()
    } else if restricted.nrows() != restricted.ncols() {
        T::max_value().unwrap_or_else(T::one)
    } else {
        let sv = restricted.clone().singular_values();
        let hi = sv.iter().fold(T::zero(), |a, s| a.max(*s));
        let lo = sv.iter().fold(hi, |a, s| a.min(*s));
        if lo > T::zero() {
            hi / lo
        } else {
            T::max_value().unwrap_or_else(T::one)
        }
    };
    PhiOperator {
        full,
        restricted,
        basis_x,
        basis_y,
        condition,
    }
}

/// Largest entry of `M^{-1} - (P1 - Phi^{-1} G P2)`; infinite when either
/// side does not exist.
pub fn inverse_identity_violation<T: Real>(
    dae: &SemilinearDae<T>,
    ps: &ProjectorSet<T>,
    z: &DVector<T>,
    u: &DVector<T>,
) -> T {
    let big = T::max_value().unwrap_or_else(T::one);
    let Ok(m) = newton_update_matrix(dae, ps, z, u) else {
        return big;
    };
    let Some(phi_inv) = phi_operator(dae, ps, z, u).inverse_matrix() else {
        return big;
    };
    max_abs(&(m.inverse - (&ps.p1 - phi_inv * &ps.g * &ps.p2)))
}

/// Residual of the algebraic constraints at `(t, x)`:
/// `Q2 [A' P1 x + B x - f]` for the inside form, `Q2 [B x - f]` otherwise.
pub fn consistency_residual<T: Real>(dae: &SemilinearDae<T>, ps: &ProjectorSet<T>, x: &DVector<T>) -> DVector<T> {
    let fx = dae.rhs(ps.t, x);
    match dae.form {
        DaeForm::InsideDerivative => &ps.q2 * (&ps.a_prime * (&ps.p1 * x) + &ps.b * x - fx),
        DaeForm::OutsideDerivative => &ps.q2 * (&ps.b * x - fx),
    }
}

/// Inside-form equivalent of an outside-form DAE: `B~ = B - A'`.
pub fn reduce_to_inside_form<T: Real>(dae: &SemilinearDae<T>) -> SemilinearDae<T> {
    if dae.form == DaeForm::InsideDerivative {
        return dae.clone();
    }
    let p = dae.pencil.clone();
    let pa = p.clone();
    let pb = p.clone();
    let pd = p.clone();
    let mut pencil = TimeVaryingPencil::new(p.dim(), move |t| pa.a(t), move |t| pb.b(t) - pb.a_prime(t))
        .expect("dimension already validated")
        .with_a_prime(move |t| pd.a_prime(t));
    if let Some(lo) = p.domain_start() {
        pencil = pencil.with_domain_start(lo);
    }
    SemilinearDae {
        pencil,
        f: dae.f.clone(),
        f_jac: dae.f_jac.clone(),
        form: DaeForm::InsideDerivative,
        t_plus: dae.t_plus,
    }
}

/// Moves `x_guess` onto the consistency manifold at `t0`, keeping
/// `P1(t0) x_guess` fixed and Newton-iterating the algebraic component.
pub fn consistent_initialize<T: Real>(
    dae: &SemilinearDae<T>,
    t0: T,
    x_guess: &DVector<T>,
    quad: &QuadratureConfig<T>,
    tol: T,
    max_iter: usize,
) -> Result<DVector<T>> {
    if x_guess.len() != dae.dim() {
        return Err(Error::InvalidInput(format!(
            "initial guess has length {}, expected {}",
            x_guess.len(),
            dae.dim()
        )));
    }
    let inside = reduce_to_inside_form(dae);
    let ps = compute_projectors(&inside.pencil, t0, quad)?;
    let z = &ps.p1 * x_guess;
    let mut u = &ps.p2 * x_guess;
    let mut last = T::zero();
    for _ in 0..=max_iter {
        let x = &z + &u;
        let r = algebraic_residual(&inside, &ps, &z, &u);
        let c = consistency_residual(&inside, &ps, &x);
        last = vec_inf(&r).max(vec_inf(&c));
        if last < tol {
            return Ok(x);
        }
        let m = newton_update_matrix(&inside, &ps, &z, &u)?;
        u += m.solve(&r);
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: to_f64(last),
    })
}
