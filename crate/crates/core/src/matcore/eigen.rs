use num_complex::Complex;

use super::{cabs, ensure_square, is_finite, lit, right_singular_ascending, schur, CMatrix, MatError, Real};

/// One group of numerically coincident eigenvalues.
///
/// `right` and `left` hold `geometric` columns each. When the cluster is
/// semisimple they are block-biorthogonalized so that `left† right = 1`.
#[derive(Clone, Debug)]
pub struct EigenCluster<T: Real> {
    pub value: Complex<T>,
    pub algebraic: usize,
    pub geometric: usize,
    pub right: CMatrix<T>,
    pub left: CMatrix<T>,
    /// `‖left† right − 1‖_F` after biorthogonalization; `None` if the
    /// cluster Gram matrix was singular (defective cluster).
    pub biorth_residual: Option<T>,
}

impl<T: Real> EigenCluster<T> {
    pub fn is_semisimple(&self) -> bool {
        self.geometric == self.algebraic
    }

    /// Spectral projector `R L†` onto this cluster (valid for semisimple clusters).
    pub fn projector(&self) -> CMatrix<T> {
        &self.right * self.left.adjoint()
    }
}

#[derive(Clone, Debug)]
pub struct EigenSystem<T: Real> {
    pub values: Vec<Complex<T>>,
    pub clusters: Vec<EigenCluster<T>>,
}

impl<T: Real> EigenSystem<T> {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// All right eigenvectors, cluster by cluster, as columns.
    pub fn right_vectors(&self) -> CMatrix<T> {
        stack(self.clusters.iter().map(|c| &c.right), self.dim())
    }

    pub fn left_vectors(&self) -> CMatrix<T> {
        stack(self.clusters.iter().map(|c| &c.left), self.dim())
    }

    pub fn spectral_radius(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(cabs(*v)))
    }
}

fn stack<'a, T: Real>(blocks: impl Iterator<Item = &'a CMatrix<T>>, n: usize) -> CMatrix<T> {
    let blocks: Vec<_> = blocks.collect();
    let total: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMatrix::<T>::zeros(n, total);
    let mut j = 0;
    for b in blocks {
        out.view_mut((0, j), (n, b.ncols())).copy_from(b);
        j += b.ncols();
    }
    out
}

/// Groups values by single linkage at absolute distance `tol`. Returns
/// `(mean value, member indices)` ordered by decreasing modulus of the mean.
pub fn cluster_values<T: Real>(values: &[Complex<T>], tol: T) -> Vec<(Complex<T>, Vec<usize>)> {
    let n = values.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        let mut k = i;
        while p[k] != r {
            let next = p[k];
            p[k] = r;
            k = next;
        }
        r
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if cabs(values[i] - values[j]) <= tol {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    parent[b] = a;
                }
            }
        }
    }
    let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
    for i in 0..n {
        let r = find(&mut parent, i);
        match groups.iter_mut().find(|(root, _)| *root == r) {
            Some((_, members)) => members.push(i),
            None => groups.push((r, vec![i])),
        }
    }
    let mut out: Vec<(Complex<T>, Vec<usize>)> = groups
        .into_iter()
        .map(|(_, members)| {
            let sum = members.iter().fold(Complex::new(T::zero(), T::zero()), |acc, &i| acc + values[i]);
            (sum.unscale(lit(members.len() as f64)), members)
        })
        .collect();
    out.sort_by(|a, b| {
        cabs(b.0)
            .partial_cmp(&cabs(a.0))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.0.im.partial_cmp(&a.0.im).unwrap_or(std::cmp::Ordering::Equal))
    });
    out
}

/// Full eigen-analysis of a square matrix: eigenvalues from a Schur form,
/// clusters with algebraic and geometric multiplicities, and right/left
/// eigenvectors per cluster. `tol_cluster` is relative to the spectral radius.
pub fn eig_full<T: Real>(a: &CMatrix<T>, tol_cluster: T) -> Result<EigenSystem<T>, MatError> {
    let n = ensure_square(a)?;
    if !is_finite(a) {
        return Err(MatError::NonFinite);
    }
    let values = schur(a)?.eigenvalues();
    let radius = values.iter().fold(T::zero(), |m, v| m.max(cabs(*v)));
    let scale = if radius > T::zero() { radius } else { T::one() };
    let groups = cluster_values(&values, tol_cluster * scale);

    let norm = super::frobenius(a).max(T::one());
    let kernel_tol = tol_cluster * norm;
    let ident = CMatrix::<T>::identity(n, n);
    let mut clusters = Vec::with_capacity(groups.len());
    for (value, members) in groups {
        let algebraic = members.len();
        let shifted = a - &ident * value;
        let right = kernel_vectors(&shifted, kernel_tol, algebraic)?;
        let left = kernel_vectors(&shifted.adjoint(), kernel_tol, algebraic)?;
        let g = right.ncols().min(left.ncols());
        let right = right.columns(0, g).into_owned();
        let left = left.columns(0, g).into_owned();
        let (left, biorth_residual) = biorthogonalize(&right, left);
        clusters.push(EigenCluster { value, algebraic, geometric: g, right, left, biorth_residual });
    }
    Ok(EigenSystem { values, clusters })
}

/// Kernel vectors of `m`, at least one (an eigenvalue always has an
/// eigenvector) and at most `cap`, smallest singular values first.
fn kernel_vectors<T: Real>(m: &CMatrix<T>, tol: T, cap: usize) -> Result<CMatrix<T>, MatError> {
    let (vecs, vals) = right_singular_ascending(m)?;
    let k = vals.iter().take_while(|&&s| s <= tol).count().clamp(1, cap).min(vecs.ncols());
    Ok(vecs.columns(0, k).into_owned())
}

/// Rescales `left` so that `left† right = 1` using the cluster Gram matrix.
fn biorthogonalize<T: Real>(right: &CMatrix<T>, left: CMatrix<T>) -> (CMatrix<T>, Option<T>) {
    let g = right.ncols();
    if g == 0 {
        return (left, None);
    }
    let gram = left.adjoint() * right;
    let svals = super::singular_values(&gram).unwrap_or_default();
    let smin = svals.iter().cloned().fold(T::max_value().unwrap_or(T::one()), |a, b| a.min(b));
    if smin <= lit::<T>(1e-10) {
        return (left, None);
    }
    match gram.try_inverse() {
        Some(inv) => {
            let l = left * inv.adjoint();
            let res = super::frobenius(&(l.adjoint() * right - CMatrix::<T>::identity(g, g)));
            (l, Some(res))
        }
        None => (left, None),
    }
}
