//! Dense linear-algebra helpers over complex matrices.
//!
//! These back the classical reference paths (dense diagonalization,
//! linear solves, conditioning checks) that the quantum emulations are
//! validated against.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::scalar::{cabs, CMatrix, CVector, Real};

/// Eigenvalues and right eigenvectors of a general complex matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T: Real> {
    pub values: Vec<Complex<T>>,
    /// Column `k` is the unit-norm right eigenvector for `values[k]`.
    pub vectors: CMatrix<T>,
}

impl<T: Real> EigenDecomposition<T> {
    /// Index of the eigenvalue closest to `target`.
    pub fn nearest(&self, target: Complex<T>) -> usize {
        nearest_index(&self.values, target)
    }

    pub fn vector(&self, k: usize) -> CVector<T> {
        self.vectors.column(k).into_owned()
    }
}

pub fn nearest_index<T: Real>(values: &[Complex<T>], target: Complex<T>) -> usize {
    let mut best = 0;
    let mut dist = T::max_value().unwrap();
    for (k, v) in values.iter().enumerate() {
        let d = cabs(*v - target);
        if d < dist {
            dist = d;
            best = k;
        }
    }
    best
}

pub fn require_square<T: Real>(m: &CMatrix<T>) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch { expected: m.nrows(), found: m.ncols() });
    }
    Ok(m.nrows())
}

/// Solves `a x = b` by partial-pivot LU.
pub fn solve<T: Real>(a: &CMatrix<T>, b: &CVector<T>) -> Result<CVector<T>> {
    let n = require_square(a)?;
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.len() });
    }
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU factorization hit a zero pivot".into()))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular("non-finite solution".into()));
    }
    Ok(x)
}

/// Solves `a X = b` for a matrix right-hand side.
pub fn solve_matrix<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>> {
    let n = require_square(a)?;
    if b.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, found: b.nrows() });
    }
    let x = a
        .clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Singular("LU factorization hit a zero pivot".into()))?;
    if x.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::Singular("non-finite solution".into()));
    }
    Ok(x)
}

pub fn singular_values<T: Real>(m: &CMatrix<T>) -> DVector<T> {
    nalgebra::SVD::new(m.clone(), false, false).singular_values
}

/// 2-norm condition number; infinite for exactly singular input.
pub fn condition_number<T: Real>(m: &CMatrix<T>) -> T {
    let s = singular_values(m);
    let max = s.iter().fold(T::zero(), |a, &b| a.max(b));
    let min = s.iter().fold(T::max_value().unwrap(), |a, &b| a.min(b));
    if min <= T::zero() {
        T::max_value().unwrap()
    } else {
        max / min
    }
}

/// Largest elementwise deviation `|m - m^H|`.
pub fn hermitian_deviation<T: Real>(m: &CMatrix<T>) -> T {
    let mut dev = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max(cabs(m[(i, j)] - m[(j, i)].conjugate()));
        }
    }
    dev
}

/// Largest elementwise deviation `|m - m^T|`.
pub fn transpose_deviation<T: Real>(m: &CMatrix<T>) -> T {
    let mut dev = T::zero();
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            dev = dev.max(cabs(m[(i, j)] - m[(j, i)]));
        }
    }
    dev
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eig<T: Real>(m: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let n = require_square(m)?;
    // symmetrize to remove rounding-level anti-Hermitian parts
    let sym = (m + m.adjoint()).map(|z| z * T::lit(0.5));
    let eig = nalgebra::SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::<T>::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    Ok((values, vectors))
}

/// Generalized Hermitian-definite problem `H x = E N x` with `N` positive
/// definite. Eigenvectors are `N`-orthonormal, eigenvalues ascending.
pub fn generalized_hermitian_eig<T: Real>(h: &CMatrix<T>, n: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>)> {
    let dim = require_square(h)?;
    if n.nrows() != dim || n.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: n.nrows() });
    }
    let nsym = (n + n.adjoint()).map(|z| z * T::lit(0.5));
    let chol = nalgebra::Cholesky::new(nsym)
        .ok_or_else(|| Error::Singular("overlap matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_h = l
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    let a = l
        .solve_lower_triangular(&linv_h.adjoint())
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?
        .adjoint();
    let (values, y) = hermitian_eig(&a)?;
    let x = l
        .adjoint()
        .solve_upper_triangular(&y)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    Ok((values, x))
}

/// Eigenvalues and right eigenvectors of a general complex matrix via the
/// complex Schur form followed by triangular back-substitution.
pub fn eig<T: Real>(m: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    let n = require_square(m)?;
    if n == 0 {
        return Ok(EigenDecomposition { values: vec![], vectors: CMatrix::zeros(0, 0) });
    }
    let schur = nalgebra::Schur::try_new(m.clone(), T::eps(), 100_000)
        .ok_or_else(|| Error::NonConvergence("complex Schur iteration".into()))?;
    let (q, t) = schur.unpack();
    let values: Vec<Complex<T>> = (0..n).map(|k| t[(k, k)]).collect();
    let scale = t.iter().fold(T::zero(), |a, z| a.max(cabs(*z))).max(T::min_value().unwrap());
    let small = scale * T::eps();
    let mut vectors = CMatrix::<T>::zeros(n, n);
    for k in 0..n {
        let mut y = CVector::<T>::zeros(n);
        y[k] = Complex::new(T::one(), T::zero());
        for j in (0..k).rev() {
            let mut s = Complex::new(T::zero(), T::zero());
            for i in (j + 1)..=k {
                s += t[(j, i)] * y[i];
            }
            let mut d = t[(j, j)] - t[(k, k)];
            if cabs(d) < small {
                d = Complex::new(small, T::zero());
            }
            y[j] = -s / d;
        }
        let mut v = &q * y;
        let nrm = v.norm();
        v /= Complex::new(nrm, T::zero());
        vectors.set_column(k, &v);
    }
    Ok(EigenDecomposition { values, vectors })
}

/// Generalized problem `H x = E N x` with Hermitian positive-definite `N`
/// and arbitrary complex `H`, reduced through the Cholesky factor of `N`.
/// Eigenvectors are returned in the original basis.
pub fn generalized_eig<T: Real>(h: &CMatrix<T>, n: &CMatrix<T>) -> Result<EigenDecomposition<T>> {
    let dim = require_square(h)?;
    if n.nrows() != dim || n.ncols() != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: n.nrows() });
    }
    let nsym = (n + n.adjoint()).map(|z| z * T::lit(0.5));
    let chol = nalgebra::Cholesky::new(nsym)
        .ok_or_else(|| Error::Singular("overlap matrix is not positive definite".into()))?;
    let l = chol.l();
    let linv_h = l
        .solve_lower_triangular(h)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    // A = L^{-1} H L^{-H}
    let a = l
        .solve_lower_triangular(&linv_h.adjoint())
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?
        .adjoint();
    let dec = eig(&a)?;
    let x = l
        .adjoint()
        .solve_upper_triangular(&dec.vectors)
        .ok_or_else(|| Error::Singular("triangular solve failed".into()))?;
    Ok(EigenDecomposition { values: dec.values, vectors: x })
}

/// Eigenvalues of a general complex matrix.
pub fn eigenvalues<T: Real>(m: &CMatrix<T>) -> Result<Vec<Complex<T>>> {
    Ok(eig(m)?.values)
}

/// Gershgorin bounds `(lower, upper)` on the spectrum of a Hermitian matrix.
pub fn gershgorin_bounds<T: Real>(m: &CMatrix<T>) -> (T, T) {
    let mut lo = T::max_value().unwrap();
    let mut hi = T::min_value().unwrap();
    for i in 0..m.nrows() {
        let radius = (0..m.ncols())
            .filter(|&j| j != i)
            .fold(T::zero(), |a, j| a + cabs(m[(i, j)]));
        let c = m[(i, i)].re;
        lo = lo.min(c - radius);
        hi = hi.max(c + radius);
    }
    (lo, hi)
}

/// Conjugate-linear inner product `<u|v>`.
pub fn inner<T: Real>(u: &CVector<T>, v: &CVector<T>) -> Complex<T> {
    u.dotc(v)
}

/// Identity matrix helper for complex scalars.
pub fn identity<T: Real>(n: usize) -> CMatrix<T> {
    DMatrix::identity(n, n)
}
