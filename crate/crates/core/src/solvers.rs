//! Method 1 (explicit Euler plus one Newton-type update) and Method 2
//! (trapezoidal recalculation) on a uniform mesh.

use crate::dae::{
    algebraic_residual, consistency_residual, consistent_initialize, inverse_identity_violation, newton_update_matrix,
    phi_operator, pi_rhs, reduce_to_inside_form, w_map, SemilinearDae, StepState,
};
use crate::error::{Error, Result};
use crate::linalg::vec_inf;
use crate::pencil::{compute_projectors_with_derivative, estimate_index, ProjectorSet, QuadratureConfig};
use crate::scalar::{lit, to_f64, Real};
use nalgebra::DVector;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Method {
    Method1,
    Method2,
}

/// How the algebraic component is updated within a step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum NewtonMode<T> {
    /// A single Newton-type update per step.
    SingleStep,
    /// Repeat the update until the algebraic residual drops below `tol`.
    IterateToTol { tol: T, max_iter: usize },
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverConfig<T> {
    pub method: Method,
    pub t0: T,
    pub t_end: T,
    /// Number of steps `N`; the step is `(t_end - t0) / N`.
    pub steps: usize,
    pub quad: QuadratureConfig<T>,
    pub consistency_tol: T,
    pub consistency_max_iter: usize,
    /// Diagnostics cadence in steps; 0 disables them.
    pub diag_every: usize,
    pub newton: NewtonMode<T>,
}

impl<T: Real> SolverConfig<T> {
    /// Mesh with step `h`; `(t_end - t0) / h` must be an integer up to roundoff.
    pub fn new(method: Method, t0: T, t_end: T, h: T) -> Result<Self> {
        if !(t_end > t0) {
            return Err(Error::InvalidInput("end time must exceed start time".into()));
        }
        if !(h > T::zero()) {
            return Err(Error::InvalidInput("step must be positive".into()));
        }
        let ratio = (t_end - t0) / h;
        let n = ratio.round();
        if n < T::one() || (ratio - n).abs() > lit::<T>(1e-6) * n.max(T::one()) {
            return Err(Error::InvalidInput(format!(
                "step {} does not divide [{}, {}] into whole steps",
                h, t0, t_end
            )));
        }
        Self::with_steps(method, t0, t_end, n.to_usize().unwrap_or(1))
    }

    pub fn with_steps(method: Method, t0: T, t_end: T, steps: usize) -> Result<Self> {
        if !(t_end > t0) || steps == 0 {
            return Err(Error::InvalidInput("need t_end > t0 and at least one step".into()));
        }
        Ok(Self {
            method,
            t0,
            t_end,
            steps,
            quad: QuadratureConfig::default(),
            consistency_tol: lit(T::CONSISTENCY_TOL),
            consistency_max_iter: 50,
            diag_every: 0,
            newton: NewtonMode::SingleStep,
        })
    }

    pub fn h(&self) -> T {
        (self.t_end - self.t0) / lit::<T>(self.steps as f64)
    }

    pub fn time(&self, i: usize) -> T {
        if i == self.steps {
            self.t_end
        } else {
            self.t0 + self.h() * lit::<T>(i as f64)
        }
    }
}

/// Diagnostics recorded at a checkpoint.
#[derive(Debug, Clone, Serialize)]
pub struct Diagnostic<T> {
    pub step: usize,
    pub t: T,
    pub index: usize,
    pub phi_condition: T,
    pub projector_defect: T,
    pub inverse_identity: T,
    pub consistency: T,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SolveStatus {
    Completed,
    FailedAtStep { step: usize, reason: Error },
}

#[derive(Debug, Clone)]
pub struct Trajectory<T: Real> {
    pub method: Method,
    pub h: T,
    pub states: Vec<StepState<T>>,
    /// Infinity norm of the algebraic residual at each state.
    pub residuals: Vec<T>,
    pub diagnostics: Vec<Diagnostic<T>>,
    pub status: SolveStatus,
}

impl<T: Real> Trajectory<T> {
    pub fn is_completed(&self) -> bool {
        self.status == SolveStatus::Completed
    }

    pub fn times(&self) -> impl Iterator<Item = T> + '_ {
        self.states.iter().map(|s| s.t)
    }

    /// State at the mesh point nearest to `t`.
    pub fn nearest(&self, t: T) -> Option<&StepState<T>> {
        self.states.iter().min_by(|a, b| {
            (a.t - t)
                .abs()
                .partial_cmp(&(b.t - t).abs())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
    }

    pub fn max_residual(&self) -> T {
        self.residuals.iter().fold(T::zero(), |a, r| a.max(*r))
    }
}

fn algebraic_update<T: Real>(
    dae: &SemilinearDae<T>,
    ps: &ProjectorSet<T>,
    z: &DVector<T>,
    u: &DVector<T>,
    mode: NewtonMode<T>,
) -> Result<DVector<T>> {
    let step = |u: &DVector<T>| -> Result<DVector<T>> {
        let m = newton_update_matrix(dae, ps, z, u)?;
        Ok(u - m.solve(&(u - w_map(dae, ps, z, u))))
    };
    match mode {
        NewtonMode::SingleStep => step(u),
        NewtonMode::IterateToTol { tol, max_iter } => {
            let mut u = step(u)?;
            for _ in 1..max_iter {
                if vec_inf(&algebraic_residual(dae, ps, z, &u)) < tol {
                    break;
                }
                u = step(&u)?;
            }
            Ok(u)
        }
    }
}

fn finish<T: Real>(ps: &ProjectorSet<T>, z: DVector<T>, u: DVector<T>) -> StepState<T> {
    let z = &ps.p1 * z;
    let x = &z + &ps.p2 * &u;
    StepState { t: ps.t, z, u, x }
}

fn step1<T: Real>(
    dae: &SemilinearDae<T>,
    ps_i: &ProjectorSet<T>,
    ps_next: &ProjectorSet<T>,
    s: &StepState<T>,
    h: T,
    mode: NewtonMode<T>,
) -> Result<StepState<T>> {
    let z = &s.z + pi_rhs(dae, ps_i, &s.z, &s.u)? * h;
    let u = algebraic_update(dae, ps_next, &z, &s.u, mode)?;
    Ok(finish(ps_next, z, u))
}

fn step2<T: Real>(
    dae: &SemilinearDae<T>,
    ps_i: &ProjectorSet<T>,
    ps_next: &ProjectorSet<T>,
    s: &StepState<T>,
    h: T,
    mode: NewtonMode<T>,
) -> Result<StepState<T>> {
    let k0 = pi_rhs(dae, ps_i, &s.z, &s.u)?;
    let z_pred = &s.z + &k0 * h;
    let u_pred = algebraic_update(dae, ps_next, &z_pred, &s.u, mode)?;
    let k1 = pi_rhs(dae, ps_next, &z_pred, &u_pred)?;
    let z = &s.z + (k0 + k1) * (h * lit::<T>(0.5));
    let u = algebraic_update(dae, ps_next, &z, &s.u, mode)?;
    Ok(finish(ps_next, z, u))
}

/// One step of the simple combined method.
pub fn method1_step<T: Real>(
    dae: &SemilinearDae<T>,
    ps_i: &ProjectorSet<T>,
    ps_next: &ProjectorSet<T>,
    state: &StepState<T>,
    h: T,
) -> Result<StepState<T>> {
    step1(dae, ps_i, ps_next, state, h, NewtonMode::SingleStep)
}

/// One step of the combined method with recalculation.
pub fn method2_step<T: Real>(
    dae: &SemilinearDae<T>,
    ps_i: &ProjectorSet<T>,
    ps_next: &ProjectorSet<T>,
    state: &StepState<T>,
    h: T,
) -> Result<StepState<T>> {
    step2(dae, ps_i, ps_next, state, h, NewtonMode::SingleStep)
}

fn diagnose<T: Real>(
    dae: &SemilinearDae<T>,
    ps: &ProjectorSet<T>,
    s: &StepState<T>,
    step: usize,
) -> Result<Diagnostic<T>> {
    let index = estimate_index(&dae.pencil, ps.t)?;
    if index > 1 {
        return Err(Error::IndexTooHigh { t: to_f64(ps.t), index });
    }
    Ok(Diagnostic {
        step,
        t: ps.t,
        index,
        phi_condition: phi_operator(dae, ps, &s.z, &s.u).condition,
        projector_defect: ps.defect,
        inverse_identity: inverse_identity_violation(dae, ps, &s.z, &s.u),
        consistency: vec_inf(&consistency_residual(dae, ps, &s.x)),
    })
}

/// Integrates from a (possibly inconsistent) guess over the configured mesh.
///
/// Failures before the first step are returned as errors; later failures
/// yield a partial trajectory with `FailedAtStep` status.
pub fn solve<T: Real>(
    dae: &SemilinearDae<T>,
    x0_guess: &DVector<T>,
    config: &SolverConfig<T>,
) -> Result<Trajectory<T>> {
    let dae = reduce_to_inside_form(dae);
    let quad = &config.quad;
    let h = config.h();
    let index = estimate_index(&dae.pencil, config.t0)?;
    if index > 1 {
        return Err(Error::IndexTooHigh {
            t: to_f64(config.t0),
            index,
        });
    }
    let x0 = consistent_initialize(
        &dae,
        config.t0,
        x0_guess,
        quad,
        config.consistency_tol,
        config.consistency_max_iter,
    )?;
    let mut ps = compute_projectors_with_derivative(&dae.pencil, config.t0, quad)?;
    let mut state = StepState::split(&ps, &x0);
    let mut traj = Trajectory {
        method: config.method,
        h,
        residuals: vec![vec_inf(&algebraic_residual(&dae, &ps, &state.z, &state.u))],
        states: Vec::with_capacity(config.steps + 1),
        diagnostics: Vec::new(),
        status: SolveStatus::Completed,
    };
    if config.diag_every > 0 {
        traj.diagnostics.push(diagnose(&dae, &ps, &state, 0)?);
    }
    traj.states.push(state.clone());
    for i in 0..config.steps {
        let fail = |e: Error| SolveStatus::FailedAtStep { step: i + 1, reason: e };
        let ps_next = match compute_projectors_with_derivative(&dae.pencil, config.time(i + 1), quad) {
            Ok(p) => p,
            Err(e) => {
                traj.status = fail(e);
                break;
            }
        };
        let next = match config.method {
            Method::Method1 => step1(&dae, &ps, &ps_next, &state, h, config.newton),
            Method::Method2 => step2(&dae, &ps, &ps_next, &state, h, config.newton),
        };
        state = match next {
            Ok(s) if s.x.iter().all(|v| v.is_finite()) => s,
            Ok(_) => {
                traj.status = fail(Error::NonFiniteState {
                    t: to_f64(config.time(i + 1)),
                });
                break;
            }
            Err(e) => {
                traj.status = fail(e);
                break;
            }
        };
        traj.residuals
            .push(vec_inf(&algebraic_residual(&dae, &ps_next, &state.z, &state.u)));
        traj.states.push(state.clone());
        if config.diag_every > 0 && (i + 1) % config.diag_every == 0 {
            match diagnose(&dae, &ps_next, &state, i + 1) {
                Ok(d) => traj.diagnostics.push(d),
                Err(e) => {
                    traj.status = fail(e);
                    break;
                }
            }
        }
        ps = ps_next;
    }
    Ok(traj)
}
