//! Scalar abstraction shared by every numerical routine in the crate.

use nalgebra::RealField;
use num_traits::ToPrimitive;
use std::fmt::LowerExp;

/// Real scalar usable by the solver.
///
/// The associated constants carry default tolerances sized to the precision
/// of the type.
pub trait Real: RealField + Copy + ToPrimitive + LowerExp {
    /// Machine epsilon.
    const EPS: f64;
    /// Default node-doubling tolerance of the contour quadrature.
    const QUAD_TOL: f64;
    /// Default bound on projector identity violations.
    const IDENTITY_TOL: f64;
    /// Default tolerance of consistent initialization.
    const CONSISTENCY_TOL: f64;
    /// Relative singular-value threshold for numerical rank.
    const RANK_TOL: f64;
}

impl Real for f64 {
    const EPS: f64 = f64::EPSILON;
    const QUAD_TOL: f64 = 1e-12;
    const IDENTITY_TOL: f64 = 1e-9;
    const CONSISTENCY_TOL: f64 = 1e-12;
    const RANK_TOL: f64 = 1e-10;
}

impl Real for f32 {
    const EPS: f64 = f32::EPSILON as f64;
    const QUAD_TOL: f64 = 1e-5;
    const IDENTITY_TOL: f64 = 1e-3;
    const CONSISTENCY_TOL: f64 = 1e-5;
    const RANK_TOL: f64 = 1e-4;
}

/// Converts an `f64` literal into `T`.
#[inline]
pub fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

/// Converts `x` to `f64` for reporting.
#[inline]
pub fn to_f64<T: Real>(x: T) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Machine epsilon of `T`.
#[inline]
pub fn eps<T: Real>() -> T {
    lit(T::EPS)
}
