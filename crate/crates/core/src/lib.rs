//! Numerical solution of time-varying semilinear differential-algebraic
//! equations
//!
//! ```text
//! d/dt[A(t) x] + B(t) x = f(t, x)
//! ```
//!
//! whose pencil `lambda A(t) + B(t)` is regular of index at most one.
//!
//! The state is split with spectral projectors of the pencil, obtained by
//! trapezoidal quadrature of resolvent contour integrals, into a differential
//! part integrated explicitly and an algebraic part updated by a Newton-type
//! step. Two schemes are provided: [`Method::Method1`] (first order) and
//! [`Method::Method2`] (second order, predictor-corrector).
//!
//! Everything is generic over the scalar type [`Real`] (`f64` and `f32`); the
//! aliases at the crate root fix it to `f64`.
//!
//! ```
//! use spectral_dae::{preset_by_name, solve, Method, SolverConfig};
//!
//! let p = preset_by_name::<f64>("circuit2:table1").unwrap();
//! let cfg = SolverConfig::new(Method::Method2, 0.0, 1.0, 0.01).unwrap();
//! let traj = solve(&p.dae, &p.x0, &cfg).unwrap();
//! assert!(traj.is_completed());
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod dae;
mod error;
pub mod linalg;
pub mod pencil;
pub mod problems;
mod scalar;
pub mod solvers;

pub use analysis::{
    boundedness_monitor, compare_trajectories, empirical_order, BoundednessReport, OrderReport, Reference, Trend,
};
pub use dae::{
    algebraic_residual, consistency_residual, consistent_initialize, inverse_identity_violation, newton_update_matrix,
    phi_operator, pi_rhs, reduce_to_inside_form, w_map, DaeForm, NewtonMatrix, PhiOperator, SemilinearDae, StepState,
};
pub use error::{Error, Result};
pub use pencil::{
    compute_projectors, compute_projectors_with_derivative, estimate_index, projector_derivative, resolvent,
    validate_projectors, ProjectorSet, QuadratureConfig, TimeVaryingPencil, ValidationReport,
};
pub use problems::{preset_by_name, Preset};
pub use scalar::{lit, to_f64, Real};
pub use solvers::{
    method1_step, method2_step, solve, Diagnostic, Method, NewtonMode, SolveStatus, SolverConfig, Trajectory,
};

pub use nalgebra::{Complex, DMatrix, DVector};

pub type Pencil = TimeVaryingPencil<f64>;
pub type Dae = SemilinearDae<f64>;
pub type Projectors = ProjectorSet<f64>;
pub type Quadrature = QuadratureConfig<f64>;
pub type Config = SolverConfig<f64>;
pub type Solution = Trajectory<f64>;
pub type State = StepState<f64>;
pub type Order = OrderReport<f64>;
pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;
