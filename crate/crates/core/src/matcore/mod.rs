//! Dense complex linear algebra used throughout the crate.
//!
//! Everything here is generic over the real scalar `T` (`f32`, `f64`, or any
//! other `nalgebra::RealField`); complex entries are `num_complex::Complex<T>`.
//! Superoperators elsewhere in the crate use column-stacking vectorization:
//! `vec(X)[i + d*j] = X[i, j]`, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

mod eigen;
mod norms;
mod psd;
mod schur;
mod tensor;

use nalgebra::{DMatrix, DVector, RealField};
use num_complex::Complex;
use thiserror::Error;

pub use eigen::{cluster_values, eig_full, EigenCluster, EigenSystem};
pub use norms::{schatten_norm, singular_values, trace_norm};
pub use psd::{hermitian_eigh, psd_utils, PsdInfo};
pub use schur::{schur, Schur};
pub use tensor::{partial_trace, partial_transpose, Side};

/// Real scalar usable by the linear-algebra layer.
pub trait Real: RealField + Copy {}
impl<T: RealField + Copy> Real for T {}

pub type CMatrix<T> = DMatrix<Complex<T>>;
type CVector<T> = DVector<Complex<T>>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MatError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("eigensolver did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },
    #[error("singular value decomposition did not converge")]
    SvdNoConvergence,
    #[error("Schatten exponent must satisfy p >= 1, got {0}")]
    InvalidSchattenExponent(f64),
    #[error("matrix is not Hermitian (residual {0:e})")]
    NotHermitian(f64),
    #[error("matrix contains non-finite entries")]
    NonFinite,
}

#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    nalgebra::convert(x)
}

#[inline]
pub(crate) fn cabs<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub fn ensure_square<T: Real>(a: &CMatrix<T>) -> Result<usize, MatError> {
    if a.nrows() != a.ncols() {
        return Err(MatError::NotSquare { rows: a.nrows(), cols: a.ncols() });
    }
    Ok(a.nrows())
}

pub fn is_finite<T: Real>(a: &CMatrix<T>) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn frobenius<T: Real>(a: &CMatrix<T>) -> T {
    a.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
}

pub fn trace<T: Real>(a: &CMatrix<T>) -> Complex<T> {
    (0..a.nrows().min(a.ncols())).fold(c(T::zero(), T::zero()), |acc, i| acc + a[(i, i)])
}

pub fn kron<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a.kronecker(b)
}

pub fn commutator<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> CMatrix<T> {
    a * b - b * a
}

/// Column-stacking vectorization of a square matrix.
pub fn vec_of<T: Real>(a: &CMatrix<T>) -> nalgebra::DVector<Complex<T>> {
    nalgebra::DVector::from_column_slice(a.as_slice())
}

/// Inverse of [`vec_of`] for a `d*d` vector.
pub fn unvec<T: Real>(v: &[Complex<T>], d: usize) -> CMatrix<T> {
    CMatrix::<T>::from_column_slice(d, d, v)
}

pub fn hermitian_residual<T: Real>(a: &CMatrix<T>) -> T {
    frobenius(&(a - a.adjoint()))
}

pub fn hermitian_part<T: Real>(a: &CMatrix<T>) -> CMatrix<T> {
    (a + a.adjoint()).map(|z| z.scale(lit(0.5)))
}

/// Determinant via LU.
pub fn det<T: Real>(a: &CMatrix<T>) -> Result<Complex<T>, MatError> {
    ensure_square(a)?;
    Ok(a.clone().lu().determinant())
}

/// Real SVD of `[[Re a, -Im a], [Im a, Re a]]`, zero-padded to at least as
/// many rows as columns so the full right basis is returned. Every singular
/// value of `a` appears twice. nalgebra's complex SVD returns wrong singular
/// vectors for rank-deficient input; its real one is sound at the default
/// convergence threshold of 5ε (at 1ε it is not).
pub(crate) fn embedded_svd<T: Real>(
    a: &CMatrix<T>,
    left: bool,
    right: bool,
) -> Result<nalgebra::SVD<T, nalgebra::Dyn, nalgebra::Dyn>, MatError> {
    let (m, n) = a.shape();
    let rows = m.max(n);
    let mut re = nalgebra::DMatrix::<T>::zeros(2 * rows, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let z = a[(i, j)];
            re[(i, j)] = z.re;
            re[(i, n + j)] = -z.im;
            re[(rows + i, j)] = z.im;
            re[(rows + i, n + j)] = z.re;
        }
    }
    nalgebra::SVD::try_new(re, left, right, T::default_epsilon() * lit(5.0), 0).ok_or(MatError::SvdNoConvergence)
}

/// Greedy complex Gram–Schmidt over `vecs` in order; returns the indices kept
/// and the orthonormal columns.
fn complex_span<T: Real>(vecs: &[CVector<T>], n: usize) -> (Vec<usize>, CMatrix<T>) {
    let mut kept = Vec::new();
    let mut basis: Vec<CVector<T>> = Vec::new();
    for (idx, v) in vecs.iter().enumerate() {
        if basis.len() == n {
            break;
        }
        let mut w = v.clone();
        for _ in 0..2 {
            for b in &basis {
                let proj = b.dotc(&w);
                w -= b * proj;
            }
        }
        let nrm = w.norm();
        if nrm > lit::<T>(1e-6) * v.norm() {
            basis.push(w.unscale(nrm));
            kept.push(idx);
        }
    }
    let mut out = CMatrix::<T>::zeros(n, basis.len());
    for (k, b) in basis.iter().enumerate() {
        out.set_column(k, b);
    }
    (kept, out)
}

/// Complex singular vectors (left or right) with their singular values, in
/// the order given by `ascending`. Real vectors `[x; y]` map to `x + i y`;
/// each complex vector shows up twice (as `v` and `i v`) and is kept once.
fn embedded_system<T: Real>(a: &CMatrix<T>, left: bool, ascending: bool) -> Result<(Vec<T>, CMatrix<T>), MatError> {
    let (m, n) = a.shape();
    let rows = m.max(n);
    let svd = embedded_svd(a, left, !left)?;
    let (len, half) = if left { (m, rows) } else { (n, n) };
    let sv = &svd.singular_values;
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&i, &j| sv[i].partial_cmp(&sv[j]).unwrap_or(std::cmp::Ordering::Equal));
    if !ascending {
        order.reverse();
    }
    let vecs: Vec<CVector<T>> = order
        .iter()
        .map(|&i| {
            CVector::<T>::from_fn(len, |r, _| {
                if left {
                    let u = svd.u.as_ref().expect("u requested");
                    c(u[(r, i)], u[(half + r, i)])
                } else {
                    let vt = svd.v_t.as_ref().expect("v_t requested");
                    c(vt[(i, r)], vt[(i, half + r)])
                }
            })
        })
        .collect();
    let (kept, basis) = complex_span(&vecs, len);
    Ok((kept.iter().map(|&k| sv[order[k]]).collect(), basis))
}

/// Orthonormal basis (as columns) of the numerical kernel of `a`: right
/// singular vectors whose singular value is `<= tol`.
pub fn nullspace<T: Real>(a: &CMatrix<T>, tol: T) -> Result<CMatrix<T>, MatError> {
    if a.ncols() == 0 {
        return Ok(CMatrix::<T>::zeros(0, 0));
    }
    let (vals, vecs) = embedded_system(a, false, true)?;
    let k = vals.iter().take_while(|&&s| s <= tol).count();
    Ok(vecs.columns(0, k).into_owned())
}

/// All right singular vectors, smallest singular value first, with the
/// values (zeros included for wide input).
pub fn right_singular_ascending<T: Real>(a: &CMatrix<T>) -> Result<(CMatrix<T>, Vec<T>), MatError> {
    if a.ncols() == 0 {
        return Ok((CMatrix::<T>::zeros(0, 0), Vec::new()));
    }
    let (vals, vecs) = embedded_system(a, false, true)?;
    Ok((vecs, vals))
}

/// The `k` right singular vectors with the smallest singular values, smallest first.
pub fn smallest_right_singular<T: Real>(a: &CMatrix<T>, k: usize) -> Result<(CMatrix<T>, Vec<T>), MatError> {
    let (vecs, vals) = right_singular_ascending(a)?;
    let k = k.min(vecs.ncols());
    Ok((vecs.columns(0, k).into_owned(), vals.into_iter().take(k).collect()))
}

/// Orthonormal basis of the column range of `a` (singular values `> tol`).
pub fn range_basis<T: Real>(a: &CMatrix<T>, tol: T) -> Result<CMatrix<T>, MatError> {
    let (vals, vecs) = embedded_system(a, true, false)?;
    let k = vals.iter().take_while(|&&s| s > tol).count();
    Ok(vecs.columns(0, k).into_owned())
}

/// Numerical rank: number of singular values above `tol`.
pub fn rank<T: Real>(a: &CMatrix<T>, tol: T) -> Result<usize, MatError> {
    Ok(singular_values(a)?.into_iter().filter(|&s| s > tol).count())
}

/// Real-orthonormal Hermitian basis of the complex span of `mats`, assuming
/// that span is closed under `X -> X†`. Inner product `Re Tr(A† B)`.
pub fn hermitian_basis<T: Real>(mats: &[CMatrix<T>], tol: T) -> Vec<CMatrix<T>> {
    let mut candidates = Vec::with_capacity(2 * mats.len());
    let half_i = c(T::zero(), lit::<T>(-0.5));
    for m in mats {
        candidates.push(hermitian_part(m));
        candidates.push((m - m.adjoint()).map(|z| z * half_i));
    }
    let mut basis: Vec<CMatrix<T>> = Vec::new();
    for cand in candidates {
        let mut v = cand;
        for _ in 0..2 {
            for b in &basis {
                let proj = real_inner(b, &v);
                v -= b.map(|z| z.scale(proj));
            }
        }
        let nrm = frobenius(&v);
        if nrm > tol {
            basis.push(v.map(|z| z.unscale(nrm)));
        }
    }
    basis
}

fn real_inner<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |acc, (x, y)| acc + (x.conj() * y).re)
}

/// Orthonormalize columns (modified Gram–Schmidt, twice), dropping columns
/// whose residual norm is below `tol`.
pub fn orthonormalize_columns<T: Real>(a: &CMatrix<T>, tol: T) -> CMatrix<T> {
    let n = a.nrows();
    let mut cols: Vec<nalgebra::DVector<Complex<T>>> = Vec::new();
    for j in 0..a.ncols() {
        let mut v = a.column(j).into_owned();
        for _ in 0..2 {
            for u in &cols {
                let p = u.dotc(&v);
                v -= u * p;
            }
        }
        let nrm = v.norm();
        if nrm > tol {
            cols.push(v.unscale(nrm));
        }
    }
    let mut out = CMatrix::<T>::zeros(n, cols.len());
    for (j, v) in cols.iter().enumerate() {
        out.set_column(j, v);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn vec_round_trip_is_column_stacking() {
        let a = CMatrix::<f64>::from_row_slice(
            2,
            2,
            &[Complex64::new(1.0, 0.0), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(4.0, 0.0)],
        );
        let v = vec_of(&a);
        assert_eq!(v[1].re, 3.0);
        assert_eq!(unvec(v.as_slice(), 2), a);
    }

    #[test]
    fn nullspace_of_rank_deficient() {
        let a = CMatrix::<f64>::from_row_slice(
            2,
            3,
            &[
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(1.0, 0.0),
                Complex64::new(0.0, 0.0),
            ],
        );
        let k = nullspace(&a, 1e-12).unwrap();
        assert_eq!(k.ncols(), 1);
        assert!((k[(2, 0)].norm() - 1.0).abs() < 1e-12);
    }

    // complex rank-2 product on 9x9: nalgebra's complex SVD gets the vectors wrong here
    #[test]
    fn subspaces_of_complex_low_rank() {
        let l = CMatrix::<f64>::from_fn(9, 2, |i, j| Complex64::new((i * 3 + j) as f64 * 0.37 - 1.1, ((i + 2 * j) as f64).sin()));
        let r = CMatrix::<f64>::from_fn(2, 9, |i, j| Complex64::new(((i * 5 + j) as f64).cos(), (j as f64) * 0.21 - 0.4 * i as f64));
        let a = &l * &r;
        let k = nullspace(&a, 1e-9).unwrap();
        assert_eq!(k.ncols(), 7);
        assert!(frobenius(&(&a * &k)) < 1e-12);
        assert!(frobenius(&(k.adjoint() * &k - CMatrix::<f64>::identity(7, 7))) < 1e-12);
        let rg = range_basis(&a, 1e-9).unwrap();
        assert_eq!(rg.ncols(), 2);
        let resid = &a - &rg * (rg.adjoint() * &a);
        assert!(frobenius(&resid) < 1e-12);
        let (v, s) = smallest_right_singular(&a, 8).unwrap();
        assert!(s[..7].iter().all(|&x| x < 1e-12) && s[7] > 1e-3);
        assert!(frobenius(&(&a * v.columns(0, 7))) < 1e-12);
        let top = (&a * v.column(7)).norm();
        assert!((top - s[7]).abs() < 1e-10);
    }

    #[test]
    fn hermitian_basis_spans_full_algebra() {
        let mut mats = Vec::new();
        for i in 0..2 {
            for j in 0..2 {
                let mut m = CMatrix::<f64>::zeros(2, 2);
                m[(i, j)] = Complex64::new(1.0, 0.0);
                mats.push(m);
            }
        }
        let b = hermitian_basis(&mats, 1e-10);
        assert_eq!(b.len(), 4);
        assert!(b.iter().all(|m| hermitian_residual(m) < 1e-14));
    }

    #[test]
    fn works_in_single_precision() {
        let a = CMatrix::<f32>::identity(3, 3);
        assert!((frobenius(&a) - 3f32.sqrt()).abs() < 1e-6);
        assert_eq!(rank(&a, 1e-5).unwrap(), 3);
    }
}
