//! Time-varying pencils `lambda A(t) + B(t)`: resolvent, index detection and
//! spectral projectors computed by contour quadrature.

use crate::error::{Error, Result};
use crate::linalg::{self, invert, max_abs, norm1, singular_threshold};
use crate::scalar::{eps, lit, to_f64, Real};
use nalgebra::{Complex, DMatrix};
use serde::Serialize;
use std::sync::Arc;

/// Matrix-valued function of time.
pub type MatrixFn<T> = Arc<dyn Fn(T) -> DMatrix<T> + Send + Sync>;
/// Scalar function of time.
pub type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// Coefficient pair `A(t)`, `B(t)` of a DAE with optional derivatives and an
/// optional contour radius enclosing the finite spectrum.
#[derive(Clone)]
pub struct TimeVaryingPencil<T: Real> {
    dim: usize,
    a: MatrixFn<T>,
    b: MatrixFn<T>,
    a_prime: Option<MatrixFn<T>>,
    b_prime: Option<MatrixFn<T>>,
    radius_hint: Option<ScalarFn<T>>,
    domain_start: Option<T>,
}

impl<T: Real> std::fmt::Debug for TimeVaryingPencil<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("TimeVaryingPencil")
            .field("dim", &self.dim)
            .field("a_prime", &self.a_prime.is_some())
            .field("b_prime", &self.b_prime.is_some())
            .field("radius_hint", &self.radius_hint.is_some())
            .field("domain_start", &self.domain_start)
            .finish()
    }
}

impl<T: Real> TimeVaryingPencil<T> {
    pub fn new(
        dim: usize,
        a: impl Fn(T) -> DMatrix<T> + Send + Sync + 'static,
        b: impl Fn(T) -> DMatrix<T> + Send + Sync + 'static,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("pencil dimension must be positive".into()));
        }
        Ok(Self {
            dim,
            a: Arc::new(a),
            b: Arc::new(b),
            a_prime: None,
            b_prime: None,
            radius_hint: None,
            domain_start: None,
        })
    }

    /// Pencil with constant coefficients.
    pub fn constant(a: DMatrix<T>, b: DMatrix<T>) -> Result<Self> {
        if a.shape() != b.shape() || a.nrows() != a.ncols() {
            return Err(Error::InvalidInput("A and B must be square and of equal size".into()));
        }
        let n = a.nrows();
        let zero = DMatrix::zeros(n, n);
        Ok(Self::new(n, move |_| a.clone(), move |_| b.clone())?.with_a_prime(move |_| zero.clone()))
    }

    pub fn with_a_prime(mut self, f: impl Fn(T) -> DMatrix<T> + Send + Sync + 'static) -> Self {
        self.a_prime = Some(Arc::new(f));
        self
    }

    pub fn with_b_prime(mut self, f: impl Fn(T) -> DMatrix<T> + Send + Sync + 'static) -> Self {
        self.b_prime = Some(Arc::new(f));
        self
    }

    /// Contour radius `r(t)` strictly larger than every finite eigenvalue modulus.
    pub fn with_radius_hint(mut self, f: impl Fn(T) -> T + Send + Sync + 'static) -> Self {
        self.radius_hint = Some(Arc::new(f));
        self
    }

    /// Left end of the time domain; finite differences never step below it.
    pub fn with_domain_start(mut self, t: T) -> Self {
        self.domain_start = Some(t);
        self
    }

    pub fn without_radius_hint(mut self) -> Self {
        self.radius_hint = None;
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn a(&self, t: T) -> DMatrix<T> {
        (self.a)(t)
    }

    pub fn b(&self, t: T) -> DMatrix<T> {
        (self.b)(t)
    }

    pub fn has_a_prime(&self) -> bool {
        self.a_prime.is_some()
    }

    pub fn domain_start(&self) -> Option<T> {
        self.domain_start
    }

    pub fn radius_hint(&self, t: T) -> Option<T> {
        self.radius_hint.as_ref().map(|r| r(t))
    }

    /// `A'(t)`, analytic when supplied, otherwise by finite differences.
    pub fn a_prime(&self, t: T) -> DMatrix<T> {
        match &self.a_prime {
            Some(ap) => ap(t),
            None => fd_derivative(|s| Ok(self.a(s)), t, self.domain_start).expect("evaluating A cannot fail"),
        }
    }

    /// `B'(t)`, analytic when supplied, otherwise by finite differences.
    pub fn b_prime(&self, t: T) -> DMatrix<T> {
        match &self.b_prime {
            Some(bp) => bp(t),
            None => fd_derivative(|s| Ok(self.b(s)), t, self.domain_start).expect("evaluating B cannot fail"),
        }
    }
}

/// Finite-difference step for time derivatives.
pub fn fd_step<T: Real>(t: T) -> T {
    eps::<T>().cbrt() * t.abs().max(T::one())
}

/// Central difference, or a one-sided second-order stencil when `t - delta`
/// falls below `lower`.
pub(crate) fn fd_derivative<T: Real>(
    g: impl Fn(T) -> Result<DMatrix<T>>,
    t: T,
    lower: Option<T>,
) -> Result<DMatrix<T>> {
    let d = fd_step(t);
    let two = lit::<T>(2.0);
    match lower {
        Some(lo) if t - d < lo => {
            let g0 = g(t)?;
            let g1 = g(t + d)?;
            let g2 = g(t + two * d)?;
            Ok((g1 * lit::<T>(4.0) - g0 * lit::<T>(3.0) - g2) / (two * d))
        }
        _ => Ok((g(t + d)? - g(t - d)?) / (two * d)),
    }
}

/// Settings of the contour quadrature.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct QuadratureConfig<T> {
    /// Node doubling stops once successive results differ by less than this
    /// (relative to `max(1, |P|)`).
    pub tol: T,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Bound on identity violations and on the discarded imaginary residue.
    pub identity_tol: T,
}

impl<T: Real> Default for QuadratureConfig<T> {
    fn default() -> Self {
        Self {
            tol: lit(T::QUAD_TOL),
            min_nodes: 32,
            max_nodes: 4096,
            identity_tol: lit(T::IDENTITY_TOL),
        }
    }
}

/// Projectors, auxiliary operator and the pencil snapshot at one time point.
#[derive(Debug, Clone)]
pub struct ProjectorSet<T: Real> {
    pub t: T,
    pub p1: DMatrix<T>,
    pub p2: DMatrix<T>,
    pub q1: DMatrix<T>,
    pub q2: DMatrix<T>,
    pub g: DMatrix<T>,
    pub g_inv: DMatrix<T>,
    pub p1_prime: Option<DMatrix<T>>,
    /// Largest violation over the identity suite.
    pub defect: T,
    pub a: DMatrix<T>,
    pub b: DMatrix<T>,
    pub a_prime: DMatrix<T>,
    /// Contour radius actually used.
    pub radius: T,
    /// Quadrature nodes actually used.
    pub nodes: usize,
    pub(crate) g_inv_q1: DMatrix<T>,
    pub(crate) g_inv_q2: DMatrix<T>,
}

impl<T: Real> ProjectorSet<T> {
    pub fn dim(&self) -> usize {
        self.p1.nrows()
    }

    /// `G^{-1} Q1`.
    pub fn g_inv_q1(&self) -> &DMatrix<T> {
        &self.g_inv_q1
    }

    /// `G^{-1} Q2`.
    pub fn g_inv_q2(&self) -> &DMatrix<T> {
        &self.g_inv_q2
    }
}

/// `(lambda A(t) + B(t))^{-1}`.
pub fn resolvent<T: Real>(pencil: &TimeVaryingPencil<T>, lambda: Complex<T>, t: T) -> Result<DMatrix<Complex<T>>> {
    let a = pencil.a(t).map(|v| Complex::new(v, T::zero()));
    let b = pencil.b(t).map(|v| Complex::new(v, T::zero()));
    resolvent_of(&a, &b, lambda)
}

fn resolvent_of<T: Real>(
    a: &DMatrix<Complex<T>>,
    b: &DMatrix<Complex<T>>,
    lambda: Complex<T>,
) -> Result<DMatrix<Complex<T>>> {
    let m = a * lambda + b;
    let singular = |rcond: T| Error::SingularPencilPoint {
        re: to_f64(lambda.re),
        im: to_f64(lambda.im),
        rcond: to_f64(rcond),
    };
    match invert(&m) {
        None => Err(singular(T::zero())),
        Some(inv) if inv.rcond < singular_threshold::<T>() => Err(singular(inv.rcond)),
        Some(inv) => Ok(inv.inv),
    }
}

/// Pencil index at `t` from the growth of `|(A + mu B)^{-1}|` as `mu -> 0`.
///
/// Always evaluated in double precision.
pub fn estimate_index<T: Real>(pencil: &TimeVaryingPencil<T>, t: T) -> Result<usize> {
    let a = pencil.a(t).map(to_f64);
    let b = pencil.b(t).map(to_f64);
    index_of(&a, &b, to_f64(t))
}

fn index_of(a: &DMatrix<f64>, b: &DMatrix<f64>, t: f64) -> Result<usize> {
    let na = norm1(a);
    let nb = norm1(b);
    let thr = singular_threshold::<f64>();
    let an = if na > 0.0 { a / na } else { a.clone() };
    if na > 0.0 {
        if let Some(inv) = invert(&an) {
            if inv.rcond >= thr {
                return Ok(0);
            }
        }
    }
    if nb == 0.0 {
        return Err(Error::NotRegular { t });
    }
    let bn = b / nb;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for k in 3..=7 {
        let mu = 10f64.powi(-k);
        let m = &an + &bn * mu;
        if let Some(inv) = invert(&m) {
            if inv.rcond >= thr {
                xs.push(-mu.ln());
                ys.push(norm1(&inv.inv).ln());
            }
        }
    }
    if xs.len() < 2 {
        return Err(Error::NotRegular { t });
    }
    let slope = linalg::ls_slope(&xs, &ys);
    let nu = slope.round();
    if (slope - nu).abs() < 0.2 && nu >= 0.0 {
        Ok(nu as usize)
    } else {
        Err(Error::IndeterminateIndex { t, slope })
    }
}

struct Contour<T: Real> {
    p1: DMatrix<T>,
    q1: Option<DMatrix<T>>,
    radius: T,
    nodes: usize,
}

/// Trapezoidal quadrature of `1/(2 pi i)` times the contour integrals of
/// `R(lambda) A` and `A R(lambda)` on `|lambda| = r`, with nested node doubling.
///
/// For real `A`, `B` the nodes `lambda` and `conj(lambda)` give conjugate
/// terms, so only the upper half circle is evaluated; the imaginary residue
/// comes from the two real-axis nodes.
fn contour_at<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    r: T,
    with_q: bool,
    quad: &QuadratureConfig<T>,
    t: T,
) -> Result<Contour<T>> {
    let mut k = NodeKernel::new(a, b, with_q);
    let two_pi = T::two_pi();
    let two = lit::<T>(2.0);
    let mut nodes = quad.min_nodes.max(2) & !1;
    for j in 0..=nodes / 2 {
        let w = if j == 0 || 2 * j == nodes { T::one() } else { two };
        k.add(r, two_pi * lit::<T>(j as f64) / lit::<T>(nodes as f64), w)?;
    }
    let mut prev = k.mean(nodes);
    loop {
        if nodes * 2 > quad.max_nodes {
            return Err(Error::QuadratureDiverged {
                t: to_f64(t),
                max_nodes: quad.max_nodes,
            });
        }
        let m = nodes * 2;
        for j in 0..nodes / 2 {
            k.add(r, two_pi * lit::<T>((2 * j + 1) as f64) / lit::<T>(m as f64), two)?;
        }
        nodes = m;
        let cur = k.mean(nodes);
        let diff = cur
            .0
            .iter()
            .zip(&prev.0)
            .chain(cur.1.iter().zip(&prev.1))
            .fold(T::zero(), |acc, (x, y)| {
                acc.max((x.re - y.re).abs()).max((x.im - y.im).abs())
            });
        let size = cur.0.iter().chain(&cur.1).fold(T::one(), |acc, v| acc.max(v.re.abs()));
        if diff <= quad.tol * size {
            let imag = cur.0.iter().chain(&cur.1).fold(T::zero(), |acc, v| acc.max(v.im.abs()));
            if imag >= quad.identity_tol {
                return Err(Error::NonRealProjector {
                    t: to_f64(t),
                    imag: to_f64(imag),
                });
            }
            let n = a.nrows();
            let real = |v: &[Complex<T>]| DMatrix::from_row_iterator(n, n, v.iter().map(|c| c.re));
            return Ok(Contour {
                p1: real(&cur.0),
                q1: if with_q { Some(real(&cur.1)) } else { None },
                radius: r,
                nodes,
            });
        }
        prev = cur;
    }
}

/// Per-node work buffers of the contour quadrature (row-major).
struct NodeKernel<T: Real> {
    n: usize,
    a: Vec<T>,
    b: Vec<T>,
    with_q: bool,
    m: Vec<Complex<T>>,
    inv: Vec<Complex<T>>,
    sp: Vec<Complex<T>>,
    sq: Vec<Complex<T>>,
}

impl<T: Real> NodeKernel<T> {
    fn new(a: &DMatrix<T>, b: &DMatrix<T>, with_q: bool) -> Self {
        let n = a.nrows();
        let zero = Complex::new(T::zero(), T::zero());
        Self {
            n,
            a: a.transpose().as_slice().to_vec(),
            b: b.transpose().as_slice().to_vec(),
            with_q,
            m: vec![zero; n * n],
            inv: vec![zero; n * n],
            sp: vec![zero; n * n],
            sq: vec![zero; if with_q { n * n } else { 0 }],
        }
    }

    /// Adds `w lambda R(lambda) A` (and `w lambda A R(lambda)`) at
    /// `lambda = r e^{i theta}`; for `w = 2` only the real part is kept, which
    /// accounts for the conjugate node.
    fn add(&mut self, r: T, theta: T, w: T) -> Result<()> {
        let n = self.n;
        let lambda = Complex::new(r * theta.cos(), r * theta.sin());
        for (i, m) in self.m.iter_mut().enumerate() {
            *m = Complex::new(lambda.re * self.a[i] + self.b[i], lambda.im * self.a[i]);
        }
        let singular = |rcond: T| Error::SingularPencilPoint {
            re: to_f64(lambda.re),
            im: to_f64(lambda.im),
            rcond: to_f64(rcond),
        };
        match linalg::invert_in_place(&mut self.m, &mut self.inv, n) {
            None => return Err(singular(T::zero())),
            Some(rc) if rc < singular_threshold::<T>() => return Err(singular(rc)),
            Some(_) => {}
        }
        let pair = w != T::one();
        let wl = lambda * w;
        for i in 0..n {
            for j in 0..n {
                let mut rp = Complex::new(T::zero(), T::zero());
                for k in 0..n {
                    rp += self.inv[i * n + k] * self.a[k * n + j];
                }
                let v = rp * wl;
                self.sp[i * n + j] += if pair { Complex::new(v.re, T::zero()) } else { v };
                if self.with_q {
                    let mut pr = Complex::new(T::zero(), T::zero());
                    for k in 0..n {
                        pr += self.inv[k * n + j] * self.a[i * n + k];
                    }
                    let v = pr * wl;
                    self.sq[i * n + j] += if pair { Complex::new(v.re, T::zero()) } else { v };
                }
            }
        }
        Ok(())
    }

    fn mean(&self, nodes: usize) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let s = lit::<T>(nodes as f64);
        (
            self.sp.iter().map(|v| v / s).collect(),
            self.sq.iter().map(|v| v / s).collect(),
        )
    }
}

/// Retries with a slightly larger radius when a node lands on an eigenvalue.
fn contour_near<T: Real>(
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    r: T,
    with_q: bool,
    quad: &QuadratureConfig<T>,
    t: T,
) -> Result<Contour<T>> {
    let mut r = r;
    let mut last = None;
    for _ in 0..6 {
        match contour_at(a, b, r, with_q, quad, t) {
            Err(e @ Error::SingularPencilPoint { .. }) => {
                last = Some(e);
                r *= lit::<T>(1.125);
            }
            other => return other,
        }
    }
    Err(last.unwrap_or(Error::RadiusSelectionFailed { t: to_f64(t) }))
}

fn spectral_contour<T: Real>(
    pencil: &TimeVaryingPencil<T>,
    a: &DMatrix<T>,
    b: &DMatrix<T>,
    t: T,
    with_q: bool,
    quad: &QuadratureConfig<T>,
) -> Result<Contour<T>> {
    if let Some(r) = pencil.radius_hint(t) {
        return contour_near(a, b, r, with_q, quad, t);
    }
    let rank_a = linalg::rank(a, lit(T::RANK_TOL)) as f64;
    let mut r = T::one() + norm1(a) + norm1(b);
    let mut inner = contour_near(a, b, r, with_q, quad, t)?;
    for _ in 0..40 {
        r = inner.radius * lit::<T>(2.0);
        let outer = contour_near(a, b, r, with_q, quad, t)?;
        let diff = max_abs(&(&outer.p1 - &inner.p1));
        let size = max_abs(&outer.p1).max(T::one());
        let trace = to_f64(outer.p1.trace());
        if diff <= quad.tol * size && (trace - rank_a).abs() < 0.5 {
            return Ok(outer);
        }
        inner = outer;
    }
    Err(Error::RadiusSelectionFailed { t: to_f64(t) })
}

/// Spectral projectors `P1, P2, Q1, Q2`, the operator `G = A + B P2` and its
/// inverse at `t`. The derivative `P1'` is left empty.
pub fn compute_projectors<T: Real>(
    pencil: &TimeVaryingPencil<T>,
    t: T,
    quad: &QuadratureConfig<T>,
) -> Result<ProjectorSet<T>> {
    let n = pencil.dim();
    let a = pencil.a(t);
    let b = pencil.b(t);
    let c = spectral_contour(pencil, &a, &b, t, true, quad)?;
    let id = DMatrix::<T>::identity(n, n);
    let p1 = c.p1;
    let q1 = c.q1.expect("Q1 requested");
    let p2 = &id - &p1;
    let q2 = &id - &q1;
    let g = &a + &b * &p2;
    let g_inv = match invert(&g) {
        Some(inv) if inv.rcond >= singular_threshold::<T>() => inv.inv,
        _ => {
            return Err(Error::DefectTooLarge {
                t: to_f64(t),
                defect: f64::INFINITY,
            })
        }
    };
    let g_inv_q1 = &g_inv * &q1;
    let g_inv_q2 = &g_inv * &q2;
    let mut ps = ProjectorSet {
        t,
        p1,
        p2,
        q1,
        q2,
        g,
        g_inv,
        p1_prime: None,
        defect: T::zero(),
        a_prime: pencil.a_prime(t),
        a,
        b,
        radius: c.radius,
        nodes: c.nodes,
        g_inv_q1,
        g_inv_q2,
    };
    ps.defect = ValidationReport::from_parts(&ps, &ps.a, &ps.b, false).max_violation();
    if !(ps.defect <= quad.identity_tol) {
        return Err(Error::DefectTooLarge {
            t: to_f64(t),
            defect: to_f64(ps.defect),
        });
    }
    Ok(ps)
}

/// [`compute_projectors`] with `P1'` filled in.
pub fn compute_projectors_with_derivative<T: Real>(
    pencil: &TimeVaryingPencil<T>,
    t: T,
    quad: &QuadratureConfig<T>,
) -> Result<ProjectorSet<T>> {
    let mut ps = compute_projectors(pencil, t, quad)?;
    let p1 = ps.p1.clone();
    ps.p1_prime = Some(fd_derivative(
        |s| if s == t { Ok(p1.clone()) } else { p1_at(pencil, s, quad) },
        t,
        pencil.domain_start(),
    )?);
    Ok(ps)
}

fn p1_at<T: Real>(pencil: &TimeVaryingPencil<T>, t: T, quad: &QuadratureConfig<T>) -> Result<DMatrix<T>> {
    let a = pencil.a(t);
    let b = pencil.b(t);
    Ok(spectral_contour(pencil, &a, &b, t, false, quad)?.p1)
}

/// `P1'(t)` by central differences of quadrature projectors (one-sided at the
/// start of the domain).
pub fn projector_derivative<T: Real>(
    pencil: &TimeVaryingPencil<T>,
    t: T,
    quad: &QuadratureConfig<T>,
) -> Result<DMatrix<T>> {
    fd_derivative(|s| p1_at(pencil, s, quad), t, pencil.domain_start())
}

/// Violation of each projector identity, measured as the largest entry of
/// the difference of both sides.
#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport<T> {
    pub p_complement: T,
    pub q_complement: T,
    pub p1_idempotent: T,
    pub p2_idempotent: T,
    pub q1_idempotent: T,
    pub q2_idempotent: T,
    /// `A P1 = A` and `Q1 A = A`.
    pub a_p1: T,
    pub q1_a: T,
    /// `A P2 = 0` and `Q2 A = 0`.
    pub a_p2: T,
    pub q2_a: T,
    /// `B Pj = Qj B`.
    pub b_p1: T,
    pub b_p2: T,
    pub g_assembly: T,
    pub g_g_inv: T,
    pub g_inv_g: T,
    pub g_inv_a: T,
    pub g_inv_b_p2: T,
    /// Dimension of the algebraic subspace, `rank(P2)`.
    pub d: usize,
}

impl<T: Real> ValidationReport<T> {
    fn from_parts(ps: &ProjectorSet<T>, a: &DMatrix<T>, b: &DMatrix<T>, with_rank: bool) -> Self {
        let n = ps.dim();
        let id = DMatrix::<T>::identity(n, n);
        let d = |m: DMatrix<T>| max_abs(&m);
        Self {
            p_complement: d(&ps.p1 + &ps.p2 - &id),
            q_complement: d(&ps.q1 + &ps.q2 - &id),
            p1_idempotent: d(&ps.p1 * &ps.p1 - &ps.p1),
            p2_idempotent: d(&ps.p2 * &ps.p2 - &ps.p2),
            q1_idempotent: d(&ps.q1 * &ps.q1 - &ps.q1),
            q2_idempotent: d(&ps.q2 * &ps.q2 - &ps.q2),
            a_p1: d(a * &ps.p1 - a),
            q1_a: d(&ps.q1 * a - a),
            a_p2: d(a * &ps.p2),
            q2_a: d(&ps.q2 * a),
            b_p1: d(b * &ps.p1 - &ps.q1 * b),
            b_p2: d(b * &ps.p2 - &ps.q2 * b),
            g_assembly: d(&ps.g - (a + b * &ps.p2)),
            g_g_inv: d(&ps.g * &ps.g_inv - &id),
            g_inv_g: d(&ps.g_inv * &ps.g - &id),
            g_inv_a: d(&ps.g_inv * a - &ps.p1),
            g_inv_b_p2: d(&ps.g_inv * b * &ps.p2 - &ps.p2),
            d: if with_rank {
                linalg::rank(&ps.p2, lit(T::RANK_TOL))
            } else {
                0
            },
        }
    }

    pub fn max_violation(&self) -> T {
        [
            self.p_complement,
            self.q_complement,
            self.p1_idempotent,
            self.p2_idempotent,
            self.q1_idempotent,
            self.q2_idempotent,
            self.a_p1,
            self.q1_a,
            self.a_p2,
            self.q2_a,
            self.b_p1,
            self.b_p2,
            self.g_assembly,
            self.g_g_inv,
            self.g_inv_g,
            self.g_inv_a,
            self.g_inv_b_p2,
        ]
        .into_iter()
        .fold(T::zero(), |acc, v| {
            if v.is_finite() {
                acc.max(v)
            } else {
                T::max_value().unwrap_or(v)
            }
        })
    }
}

/// Checks the identity suite of `ps` against a fresh evaluation of the pencil.
pub fn validate_projectors<T: Real>(ps: &ProjectorSet<T>, pencil: &TimeVaryingPencil<T>) -> ValidationReport<T> {
    ValidationReport::from_parts(ps, &pencil.a(ps.t), &pencil.b(ps.t), true)
}
