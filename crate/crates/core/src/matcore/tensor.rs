use super::{c, CMatrix, MatError, Real};

/// Which tensor factor of `C^{dA} ⊗ C^{dB}` an operation acts on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

fn check_bipartite<T: Real>(r: &CMatrix<T>, da: usize, db: usize) -> Result<(), MatError> {
    let n = da * db;
    if r.nrows() != n || r.ncols() != n {
        return Err(MatError::DimensionMismatch { expected: n, got: r.nrows().max(r.ncols()) });
    }
    Ok(())
}

/// Transpose of the second tensor factor; index `(a, i) -> a*dB + i`.
pub fn partial_transpose<T: Real>(r: &CMatrix<T>, da: usize, db: usize) -> Result<CMatrix<T>, MatError> {
    check_bipartite(r, da, db)?;
    let mut out = CMatrix::<T>::zeros(da * db, da * db);
    for a in 0..da {
        for b in 0..da {
            for i in 0..db {
                for j in 0..db {
                    out[(a * db + i, b * db + j)] = r[(a * db + j, b * db + i)];
                }
            }
        }
    }
    Ok(out)
}

/// Traces out the factor named by `side`.
pub fn partial_trace<T: Real>(r: &CMatrix<T>, da: usize, db: usize, side: Side) -> Result<CMatrix<T>, MatError> {
    check_bipartite(r, da, db)?;
    let zero = c(T::zero(), T::zero());
    Ok(match side {
        Side::First => CMatrix::<T>::from_fn(db, db, |i, j| (0..da).fold(zero, |acc, a| acc + r[(a * db + i, a * db + j)])),
        Side::Second => CMatrix::<T>::from_fn(da, da, |a, b| (0..db).fold(zero, |acc, i| acc + r[(a * db + i, b * db + i)])),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{kron, trace};
    use num_complex::Complex64;

    fn maximally_entangled(d: usize) -> CMatrix<f64> {
        let mut v = CMatrix::<f64>::zeros(d * d, 1);
        for i in 0..d {
            v[(i * d + i, 0)] = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        &v * v.adjoint()
    }

    fn rho(a: f64, b: Complex64, d: f64) -> CMatrix<f64> {
        CMatrix::<f64>::from_row_slice(2, 2, &[Complex64::new(a, 0.0), b, b.conj(), Complex64::new(d, 0.0)])
    }

    #[test]
    fn product_state_transposes_second_factor() {
        let ra = rho(0.7, Complex64::new(0.1, 0.2), 0.3);
        let rb = rho(0.4, Complex64::new(0.0, 0.3), 0.6);
        let pt = partial_transpose(&kron(&ra, &rb), 2, 2).unwrap();
        assert!((pt - kron(&ra, &rb.transpose())).norm() < 1e-15);
    }

    #[test]
    fn maximally_entangled_gives_half_swap() {
        let pt = partial_transpose(&maximally_entangled(2), 2, 2).unwrap();
        let mut swap = CMatrix::<f64>::zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = Complex64::new(0.5, 0.0);
            }
        }
        assert!((pt - swap).norm() < 1e-15);
    }

    #[test]
    fn diagonal_unchanged() {
        let mut d = CMatrix::<f64>::zeros(6, 6);
        for i in 0..6 {
            d[(i, i)] = Complex64::new(i as f64, 0.0);
        }
        assert_eq!(partial_transpose(&d, 2, 3).unwrap(), d);
    }

    #[test]
    fn partial_traces() {
        let ra = rho(0.7, Complex64::new(0.1, 0.2), 0.3);
        let rb = rho(0.4, Complex64::new(0.0, 0.3), 0.6);
        let p = kron(&ra, &rb);
        assert!((partial_trace(&p, 2, 2, Side::Second).unwrap() - &ra).norm() < 1e-15);
        let m = partial_trace(&maximally_entangled(2), 2, 2, Side::First).unwrap();
        assert!((m - CMatrix::<f64>::identity(2, 2).scale(0.5)).norm() < 1e-15);
        let i4 = CMatrix::<f64>::identity(4, 4).scale(0.25);
        for side in [Side::First, Side::Second] {
            let t = partial_trace(&i4, 2, 2, side).unwrap();
            assert!((t - CMatrix::<f64>::identity(2, 2).scale(0.5)).norm() < 1e-15);
        }
        let r = CMatrix::<f64>::from_fn(6, 6, |i, j| Complex64::new((i + 2 * j) as f64, i as f64 - j as f64));
        assert!((trace(&partial_trace(&r, 2, 3, Side::First).unwrap()) - trace(&r)).norm() < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let r = CMatrix::<f64>::zeros(5, 5);
        assert!(partial_transpose(&r, 2, 2).is_err());
        assert!(partial_trace(&r, 2, 3, Side::First).is_err());
    }
}
