use super::{lit, CMatrix, MatError, Real};

/// Singular values in descending order.
pub fn singular_values<T: Real>(a: &CMatrix<T>) -> Result<Vec<T>, MatError> {
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let svd = super::embedded_svd(a, false, false)?;
    // each value comes twice; try_new already sorted them
    let k = a.nrows().min(a.ncols());
    Ok(svd.singular_values.iter().step_by(2).take(k).cloned().collect())
}

/// Schatten `p`-norm `(Σ s_i^p)^{1/p}`; `p = f64::INFINITY` gives the
/// largest singular value.
pub fn schatten_norm<T: Real>(a: &CMatrix<T>, p: f64) -> Result<T, MatError> {
    if p.is_nan() || p < 1.0 {
        return Err(MatError::InvalidSchattenExponent(p));
    }
    let s = singular_values(a)?;
    if p.is_infinite() {
        return Ok(s.first().cloned().unwrap_or(T::zero()));
    }
    if p == 1.0 {
        return Ok(s.iter().fold(T::zero(), |acc, &x| acc + x));
    }
    let pt: T = lit(p);
    let sum = s.iter().fold(T::zero(), |acc, &x| acc + x.powf(pt));
    Ok(sum.powf(T::one() / pt))
}

pub fn trace_norm<T: Real>(a: &CMatrix<T>) -> Result<T, MatError> {
    schatten_norm(a, 1.0)
}
