use num_complex::Complex;

use super::{ensure_square, frobenius, hermitian_part, lit, CMatrix, MatError, Real};

/// Spectral data of a positive semidefinite (up to tolerance) matrix.
#[derive(Clone, Debug)]
pub struct PsdInfo<T: Real> {
    /// Smallest eigenvalue; clamped to exactly zero when `|λ_min| <= tol`.
    pub min_eig: T,
    pub sqrt: CMatrix<T>,
    /// Pseudo-inverse square root: `λ^{-1/2}` on the support, zero elsewhere.
    pub inv_sqrt_on_support: CMatrix<T>,
    pub support_projector: CMatrix<T>,
    pub rank: usize,
    pub eigenvalues: Vec<T>,
    pub eigenvectors: CMatrix<T>,
}

/// Eigen-decomposition of a Hermitian matrix with eigenvalues ascending.
pub fn hermitian_eigh<T: Real>(a: &CMatrix<T>) -> Result<(Vec<T>, CMatrix<T>), MatError> {
    let n = ensure_square(a)?;
    if n == 0 {
        return Ok((Vec::new(), CMatrix::<T>::zeros(0, 0)));
    }
    let h = hermitian_part(a);
    let eig = nalgebra::SymmetricEigen::try_new(h, T::default_epsilon(), 0).ok_or(MatError::NoConvergence { iterations: 0 })?;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap_or(std::cmp::Ordering::Equal));
    let vals = idx.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = eig.eigenvectors.select_columns(idx.iter());
    Ok((vals, vecs))
}

/// Square root, support-restricted inverse square root, support projector
/// and numerical rank of a Hermitian matrix. Eigenvalues `<= tol` count as
/// zero. Fails if `a` is not Hermitian to within `tol * max(1, ‖a‖_F)`.
pub fn psd_utils<T: Real>(a: &CMatrix<T>, tol: T) -> Result<PsdInfo<T>, MatError> {
    ensure_square(a)?;
    let herm_res = frobenius(&(a - a.adjoint()));
    let scale = frobenius(a).max(T::one());
    if herm_res > tol.max(lit(1e-12)) * scale {
        return Err(MatError::NotHermitian(nalgebra::try_convert(herm_res).unwrap_or(f64::NAN)));
    }
    let (vals, vecs) = hermitian_eigh(a)?;
    let map_diag = |f: &dyn Fn(T) -> T| -> CMatrix<T> {
        let d =
            CMatrix::<T>::from_diagonal(&nalgebra::DVector::from_iterator(vals.len(), vals.iter().map(|&x| Complex::new(f(x), T::zero()))));
        &vecs * d * vecs.adjoint()
    };
    let sqrt = map_diag(&|x| if x > T::zero() { x.sqrt() } else { T::zero() });
    let inv_sqrt_on_support = map_diag(&|x| if x > tol { T::one() / x.sqrt() } else { T::zero() });
    let support_projector = map_diag(&|x| if x > tol { T::one() } else { T::zero() });
    let rank = vals.iter().filter(|&&x| x > tol).count();
    let mut min_eig = vals.first().cloned().unwrap_or(T::zero());
    if min_eig.abs() <= tol {
        min_eig = T::zero();
    }
    Ok(PsdInfo { min_eig, sqrt, inv_sqrt_on_support, support_projector, rank, eigenvalues: vals, eigenvectors: vecs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn diag(d: &[f64]) -> CMatrix<f64> {
        CMatrix::<f64>::from_diagonal(&nalgebra::DVector::from_iterator(d.len(), d.iter().map(|&x| Complex64::new(x, 0.0))))
    }

    #[test]
    fn identity() {
        let p = psd_utils(&CMatrix::<f64>::identity(3, 3), 1e-9).unwrap();
        assert_eq!(p.rank, 3);
        assert!((p.min_eig - 1.0).abs() < 1e-14);
        assert!((p.sqrt - CMatrix::<f64>::identity(3, 3)).norm() < 1e-14);
    }

    #[test]
    fn rank_deficient() {
        let p = psd_utils(&diag(&[4.0, 0.0]), 1e-9).unwrap();
        assert_eq!(p.rank, 1);
        assert!((p.sqrt - diag(&[2.0, 0.0])).norm() < 1e-14);
        assert!((p.inv_sqrt_on_support - diag(&[0.5, 0.0])).norm() < 1e-14);
    }

    #[test]
    fn tolerance_clamps_tiny_negative() {
        let p = psd_utils(&diag(&[1.0, -1e-15]), 1e-12).unwrap();
        assert_eq!(p.rank, 1);
        assert_eq!(p.min_eig, 0.0);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = diag(&[1.0, 1.0]);
        a[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(psd_utils(&a, 1e-9), Err(MatError::NotHermitian(_))));
    }
}
