//! Small dense helpers: pivoted inversion with a 1-norm condition number,
//! norms, and orthonormal range bases.

use crate::scalar::{eps, lit, Real};
use nalgebra::{ComplexField, DMatrix, DVector};
use num_traits::{One, Zero};

/// Inverse of a square matrix together with its reciprocal 1-norm condition.
#[derive(Debug, Clone)]
pub struct Inverse<F: ComplexField> {
    pub inv: DMatrix<F>,
    pub rcond: F::RealField,
}

/// Gauss-Jordan inversion with partial pivoting.
///
/// Returns `None` only when a pivot is exactly zero; near-singularity is
/// reported through `rcond`.
pub fn invert<F: ComplexField>(m: &DMatrix<F>) -> Option<Inverse<F>> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "invert: matrix must be square");
    let mut a: Vec<F> = m.transpose().as_slice().to_vec();
    let mut b: Vec<F> = vec![F::zero(); n * n];
    let rcond = invert_in_place(&mut a, &mut b, n)?;
    Some(Inverse {
        inv: DMatrix::from_row_slice(n, n, &b),
        rcond,
    })
}

/// Inverts the row-major `n`-by-`n` matrix in `a` into `b`, destroying `a`.
/// Returns the reciprocal condition number in the 1-norm (entry moduli taken
/// as `|re| + |im|`), or `None` on a zero pivot.
pub fn invert_in_place<F: ComplexField>(a: &mut [F], b: &mut [F], n: usize) -> Option<F::RealField> {
    let norm_a = row_major_norm1(a, n);
    for (i, v) in b.iter_mut().enumerate() {
        *v = if i % (n + 1) == 0 { F::one() } else { F::zero() };
    }
    for k in 0..n {
        let mut p = k;
        let mut best = a[k * n + k].clone().norm1();
        for i in (k + 1)..n {
            let v = a[i * n + k].clone().norm1();
            if v > best {
                best = v;
                p = i;
            }
        }
        if best == <F::RealField as Zero>::zero() {
            return None;
        }
        if p != k {
            for j in 0..n {
                a.swap(k * n + j, p * n + j);
                b.swap(k * n + j, p * n + j);
            }
        }
        let piv = F::one() / a[k * n + k].clone();
        for j in 0..n {
            a[k * n + j] = a[k * n + j].clone() * piv.clone();
            b[k * n + j] = b[k * n + j].clone() * piv.clone();
        }
        for i in 0..n {
            if i == k {
                continue;
            }
            let c = a[i * n + k].clone();
            if c == F::zero() {
                continue;
            }
            for j in 0..n {
                let ak = a[k * n + j].clone();
                let bk = b[k * n + j].clone();
                a[i * n + j] -= c.clone() * ak;
                b[i * n + j] -= c.clone() * bk;
            }
        }
    }
    let denom = norm_a * row_major_norm1(b, n);
    Some(if denom > <F::RealField as Zero>::zero() {
        <F::RealField as One>::one() / denom
    } else {
        <F::RealField as Zero>::zero()
    })
}

fn row_major_norm1<F: ComplexField>(a: &[F], n: usize) -> F::RealField {
    let mut best = <F::RealField as Zero>::zero();
    for j in 0..n {
        let mut s = <F::RealField as Zero>::zero();
        for i in 0..n {
            s += a[i * n + j].clone().norm1();
        }
        if s > best {
            best = s;
        }
    }
    best
}

/// Induced 1-norm (maximum column sum of moduli).
pub fn norm1<F: ComplexField>(m: &DMatrix<F>) -> F::RealField {
    let mut best = <F::RealField as Zero>::zero();
    for col in m.column_iter() {
        let mut s = <F::RealField as Zero>::zero();
        for v in col.iter() {
            s += v.clone().modulus();
        }
        if s > best {
            best = s;
        }
    }
    best
}

/// Largest entry modulus.
pub fn max_abs<T: Real>(m: &DMatrix<T>) -> T {
    m.iter().fold(T::zero(), |acc, v| acc.max(v.abs()))
}

/// Infinity norm of a vector.
pub fn vec_inf<T: Real>(v: &DVector<T>) -> T {
    v.iter().fold(T::zero(), |acc, x| acc.max(x.abs()))
}

/// Threshold below which a reciprocal condition number counts as singular.
pub fn singular_threshold<T: Real>() -> T {
    lit::<T>(1e3) * eps::<T>()
}

/// Numerical rank from singular values relative to the largest one.
pub fn rank<T: Real>(m: &DMatrix<T>, rel_tol: T) -> usize {
    if m.is_empty() {
        return 0;
    }
    let sv = m.clone().singular_values();
    let top = sv.iter().fold(T::zero(), |a, s| a.max(*s));
    if top == T::zero() {
        return 0;
    }
    sv.iter().filter(|s| **s > rel_tol * top.max(T::one())).count()
}

/// Orthonormal basis of the column space of `m`, as columns of an n-by-r matrix.
pub fn range_basis<T: Real>(m: &DMatrix<T>, rel_tol: T) -> DMatrix<T> {
    let n = m.nrows();
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let top = svd.singular_values.iter().fold(T::zero(), |a, s| a.max(*s));
    let keep: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, s)| top > T::zero() && **s > rel_tol * top.max(T::one()))
        .map(|(i, _)| i)
        .collect();
    let mut basis = DMatrix::zeros(n, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        basis.set_column(j, &u.column(i));
    }
    basis
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope<T: Real>(xs: &[T], ys: &[T]) -> T {
    let n: T = lit(xs.len() as f64);
    let mx = xs.iter().fold(T::zero(), |a, x| a + *x) / n;
    let my = ys.iter().fold(T::zero(), |a, y| a + *y) / n;
    let mut sxy = T::zero();
    let mut sxx = T::zero();
    for (x, y) in xs.iter().zip(ys) {
        sxy += (*x - mx) * (*y - my);
        sxx += (*x - mx) * (*x - mx);
    }
    sxy / sxx
}
