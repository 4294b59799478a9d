//! Convergence-order estimation, trajectory comparison and boundedness
//! monitoring.

use crate::dae::SemilinearDae;
use crate::error::{Error, Result};
use crate::linalg::{ls_slope, vec_inf};
use crate::scalar::{lit, Real};
use crate::solvers::{solve, SolverConfig, Trajectory};
use nalgebra::DVector;
use serde::Serialize;

/// Largest infinity-norm difference of the states at mesh points shared by
/// both trajectories. The coarser mesh must be nested in the finer one.
pub fn compare_trajectories<T: Real>(a: &Trajectory<T>, b: &Trajectory<T>) -> Result<T> {
    if !a.is_completed() || !b.is_completed() {
        return Err(Error::IncompleteTrajectory);
    }
    let (coarse, fine) = if a.h >= b.h { (a, b) } else { (b, a) };
    let (Some(c0), Some(f0)) = (coarse.states.first(), fine.states.first()) else {
        return Err(Error::MeshMismatch);
    };
    let tol = lit::<T>(1e-9) * coarse.h.max(T::one());
    if (c0.t - f0.t).abs() > tol {
        return Err(Error::MeshMismatch);
    }
    let ratio = coarse.h / fine.h;
    let k = ratio.round();
    if (ratio - k).abs() > lit(1e-6) || k < T::one() {
        return Err(Error::MeshMismatch);
    }
    let k = k.to_usize().unwrap_or(1);
    let mut worst = T::zero();
    for (i, s) in coarse.states.iter().enumerate() {
        let Some(r) = fine.states.get(i * k) else { break };
        if (r.t - s.t).abs() > tol {
            return Err(Error::MeshMismatch);
        }
        worst = worst.max(vec_inf(&(&s.x - &r.x)));
    }
    Ok(worst)
}

/// What the runs are measured against.
pub enum Reference<'a, T> {
    Exact(&'a (dyn Fn(T) -> DVector<T> + Sync)),
    /// A run with the same method at `finest h / factor`.
    FineGrid {
        factor: usize,
    },
}

#[derive(Debug, Clone, Serialize)]
pub struct OrderReport<T> {
    pub step_sizes: Vec<T>,
    pub errors: Vec<T>,
    pub fitted_order: T,
    pub pairwise_orders: Vec<T>,
    /// The coarsest run was left out of the fit.
    pub excluded_coarsest: bool,
}

/// Least-squares order of `errors` against `step_sizes`, dropping the
/// coarsest point when its error is within a factor 10 of the finest.
pub fn fit_order<T: Real>(step_sizes: &[T], errors: &[T]) -> (T, Vec<T>, bool) {
    let pairwise = errors
        .windows(2)
        .zip(step_sizes.windows(2))
        .map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln())
        .collect();
    let exclude = errors.len() > 2 && errors[0] < lit::<T>(10.0) * errors[errors.len() - 1];
    let from = usize::from(exclude);
    let xs: Vec<T> = step_sizes[from..].iter().map(|h| h.ln()).collect();
    let ys: Vec<T> = errors[from..].iter().map(|e| e.ln()).collect();
    (ls_slope(&xs, &ys), pairwise, exclude)
}

fn exact_error<T: Real>(traj: &Trajectory<T>, exact: &(dyn Fn(T) -> DVector<T> + Sync)) -> T {
    traj.states
        .iter()
        .fold(T::zero(), |acc, s| acc.max(vec_inf(&(exact(s.t) - &s.x))))
}

fn run<T: Real>(dae: &SemilinearDae<T>, x0: &DVector<T>, config: &SolverConfig<T>) -> Result<Trajectory<T>> {
    let traj = solve(dae, x0, config)?;
    match &traj.status {
        crate::solvers::SolveStatus::Completed => Ok(traj),
        crate::solvers::SolveStatus::FailedAtStep { step, reason } => Err(Error::AtStep {
            step: *step,
            source: Box::new(reason.clone()),
        }),
    }
}

/// Solves at `h, h/2, ..., h/2^n_halvings` (concurrently) and fits the order of
/// the global error.
pub fn empirical_order<T: Real>(
    dae: &SemilinearDae<T>,
    x0: &DVector<T>,
    base_config: &SolverConfig<T>,
    n_halvings: usize,
    reference: Reference<'_, T>,
) -> Result<OrderReport<T>> {
    if n_halvings < 2 {
        return Err(Error::InvalidInput(
            "empirical order needs at least two halvings".into(),
        ));
    }
    let configs: Vec<SolverConfig<T>> = (0..=n_halvings)
        .map(|k| {
            let mut c = base_config.clone();
            c.steps = base_config.steps << k;
            c
        })
        .collect();
    let mut fine = None;
    if let Reference::FineGrid { factor } = reference {
        let mut c = base_config.clone();
        c.steps = (base_config.steps << n_halvings) * factor.max(1);
        fine = Some(c);
    }
    let results: Vec<Result<Trajectory<T>>> = std::thread::scope(|s| {
        let handles: Vec<_> = configs
            .iter()
            .chain(fine.iter())
            .map(|c| s.spawn(move || run(dae, x0, c)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|p| std::panic::resume_unwind(p)))
            .collect()
    });
    let mut runs = results.into_iter().collect::<Result<Vec<_>>>()?;
    let fine_traj = if fine.is_some() { runs.pop() } else { None };
    let errors = runs
        .iter()
        .map(|tr| match (&reference, &fine_traj) {
            (Reference::Exact(f), _) => Ok(exact_error(tr, *f)),
            (_, Some(r)) => compare_trajectories(tr, r),
            _ => unreachable!("fine reference computed above"),
        })
        .collect::<Result<Vec<T>>>()?;
    let step_sizes: Vec<T> = configs.iter().map(|c| c.h()).collect();
    let (fitted_order, pairwise_orders, excluded_coarsest) = fit_order(&step_sizes, &errors);
    Ok(OrderReport {
        step_sizes,
        errors,
        fitted_order,
        pairwise_orders,
        excluded_coarsest,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Trend {
    NonGrowing,
    Growing,
    /// Non-finite states were encountered.
    Divergent,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundednessReport<T> {
    pub max_norm: T,
    /// Largest state norm within each consecutive window of mesh points.
    pub window_maxima: Vec<T>,
    /// Last window maximum over the largest earlier window maximum.
    pub growth_ratio: T,
    pub trend: Trend,
}

/// Observed boundedness of a trajectory on its mesh. A last window exceeding
/// every earlier one by more than 10% is reported as growth.
pub fn boundedness_monitor<T: Real>(traj: &Trajectory<T>, window: usize) -> BoundednessReport<T> {
    let norms: Vec<T> = traj.states.iter().map(|s| vec_inf(&s.x)).collect();
    let window = window.max(1);
    let mut window_maxima: Vec<T> = Vec::with_capacity(norms.len() / window + 1);
    for (k, chunk) in norms.chunks(window).enumerate() {
        let m = chunk
            .iter()
            .fold(T::zero(), |a, v| if v.is_finite() { a.max(*v) } else { a });
        // a short trailing chunk joins the previous window
        if k > 0 && chunk.len() < window / 2 {
            if let Some(last) = window_maxima.last_mut() {
                *last = last.max(m);
            }
        } else {
            window_maxima.push(m);
        }
    }
    let finite = norms.iter().all(|v| v.is_finite());
    let max_norm = window_maxima.iter().fold(T::zero(), |a, v| a.max(*v));
    let (growth_ratio, trend) = match window_maxima.split_last() {
        _ if !finite => (T::max_value().unwrap_or_else(T::one), Trend::Divergent),
        Some((last, earlier)) if !earlier.is_empty() => {
            let before = earlier.iter().fold(T::zero(), |a, v| a.max(*v));
            let ratio = if before > T::zero() {
                *last / before
            } else if *last > T::zero() {
                T::max_value().unwrap_or_else(T::one)
            } else {
                T::one()
            };
            (
                ratio,
                if ratio > lit(1.1) {
                    Trend::Growing
                } else {
                    Trend::NonGrowing
                },
            )
        }
        _ => (T::one(), Trend::NonGrowing),
    };
    BoundednessReport {
        max_norm,
        window_maxima,
        growth_ratio,
        trend,
    }
}
