//! Complex Schur factorization `A = Q T Q†` by Householder reduction to
//! Hessenberg form followed by implicitly shifted QR sweeps.

use num_complex::Complex;

use super::{cabs, lit, CMatrix, MatError, Real};

/// Unitary `q` and upper-triangular `t` with `a = q * t * q†`.
#[derive(Clone, Debug)]
pub struct Schur<T: Real> {
    pub q: CMatrix<T>,
    pub t: CMatrix<T>,
}

impl<T: Real> Schur<T> {
    pub fn eigenvalues(&self) -> Vec<Complex<T>> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }
}

/// Computes the complex Schur form of a square matrix.
pub fn schur<T: Real>(a: &CMatrix<T>) -> Result<Schur<T>, MatError> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(MatError::NotSquare { rows: n, cols: a.ncols() });
    }
    let mut h = a.clone();
    let mut q = CMatrix::<T>::identity(n, n);
    if n <= 1 {
        return Ok(Schur { q, t: h });
    }
    hessenberg(&mut h, &mut q);
    qr_iterate(&mut h, &mut q)?;
    for j in 0..n {
        for i in (j + 1)..n {
            h[(i, j)] = Complex::new(T::zero(), T::zero());
        }
    }
    Ok(Schur { q, t: h })
}

fn hessenberg<T: Real>(a: &mut CMatrix<T>, q: &mut CMatrix<T>) {
    let n = a.nrows();
    let zero = Complex::new(T::zero(), T::zero());
    let two = Complex::new(lit::<T>(2.0), T::zero());
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut v: Vec<Complex<T>> = (0..m).map(|i| a[(k + 1 + i, k)]).collect();
        let xnorm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if xnorm == T::zero() {
            continue;
        }
        let x0 = v[0];
        let phase = if cabs(x0) == T::zero() { Complex::new(T::one(), T::zero()) } else { x0.unscale(cabs(x0)) };
        let alpha = -phase.scale(xnorm);
        v[0] -= alpha;
        let vnorm = v.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
        if vnorm == T::zero() {
            continue;
        }
        for z in v.iter_mut() {
            *z = z.unscale(vnorm);
        }
        // A <- (I - 2vv†) A
        for j in 0..n {
            let mut s = zero;
            for i in 0..m {
                s += v[i].conj() * a[(k + 1 + i, j)];
            }
            for i in 0..m {
                a[(k + 1 + i, j)] -= two * v[i] * s;
            }
        }
        // A <- A (I - 2vv†), Q <- Q (I - 2vv†)
        for mat in [&mut *a, &mut *q] {
            for i in 0..n {
                let mut s = zero;
                for j in 0..m {
                    s += mat[(i, k + 1 + j)] * v[j];
                }
                for j in 0..m {
                    mat[(i, k + 1 + j)] -= two * s * v[j].conj();
                }
            }
        }
        for i in (k + 2)..n {
            a[(i, k)] = zero;
        }
    }
}

/// Rotation `G = [[c, s], [-s*, c]]` with real `c` such that `G [x; y] = [r; 0]`.
fn givens<T: Real>(x: Complex<T>, y: Complex<T>) -> (T, Complex<T>) {
    let ax = cabs(x);
    let ay = cabs(y);
    if ay == T::zero() {
        return (T::one(), Complex::new(T::zero(), T::zero()));
    }
    if ax == T::zero() {
        return (T::zero(), Complex::new(T::one(), T::zero()));
    }
    let r = ax.hypot(ay);
    let c = ax / r;
    let s = x.unscale(ax) * y.conj().unscale(r);
    (c, s)
}

fn qr_iterate<T: Real>(h: &mut CMatrix<T>, q: &mut CMatrix<T>) -> Result<(), MatError> {
    let n = h.nrows();
    let eps = T::default_epsilon();
    let hnorm = h.iter().fold(T::zero(), |acc, z| acc + z.norm_sqr()).sqrt();
    let max_total = 100 * n * n.max(10);
    let mut total = 0usize;
    let mut its = 0usize;
    let mut hi = n - 1;
    let zero = Complex::new(T::zero(), T::zero());

    while hi > 0 {
        // locate the start of the active unreduced block
        let mut l = hi;
        while l > 0 {
            let mut s = cabs(h[(l - 1, l - 1)]) + cabs(h[(l, l)]);
            if s == T::zero() {
                s = hnorm;
            }
            if cabs(h[(l, l - 1)]) <= eps * s {
                h[(l, l - 1)] = zero;
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            its = 0;
            continue;
        }
        its += 1;
        total += 1;
        if total > max_total {
            return Err(MatError::NoConvergence { iterations: total });
        }

        let mu = if its.is_multiple_of(10) {
            // exceptional shift breaks cycles of unitary-like blocks
            let s = lit::<T>(0.75) * h[(hi, hi - 1)].re.abs();
            h[(hi, hi)] + Complex::new(s, T::zero())
        } else if its % 10 == 5 {
            let s = lit::<T>(0.75) * h[(l + 1, l)].re.abs();
            h[(l, l)] + Complex::new(s, T::zero())
        } else {
            wilkinson(h[(hi - 1, hi - 1)], h[(hi - 1, hi)], h[(hi, hi - 1)], h[(hi, hi)])
        };

        let mut x = h[(l, l)] - mu;
        let mut y = h[(l + 1, l)];
        for k in l..hi {
            if k > l {
                x = h[(k, k - 1)];
                y = h[(k + 1, k - 1)];
            }
            let (c, s) = givens(x, y);
            let cc = Complex::new(c, T::zero());
            let col0 = if k > l { k - 1 } else { l };
            for j in col0..n {
                let a = h[(k, j)];
                let b = h[(k + 1, j)];
                h[(k, j)] = cc * a + s * b;
                h[(k + 1, j)] = -s.conj() * a + cc * b;
            }
            let row1 = (k + 2).min(hi);
            for i in 0..=row1 {
                let a = h[(i, k)];
                let b = h[(i, k + 1)];
                h[(i, k)] = a * cc + b * s.conj();
                h[(i, k + 1)] = -a * s + b * cc;
            }
            for i in 0..n {
                let a = q[(i, k)];
                let b = q[(i, k + 1)];
                q[(i, k)] = a * cc + b * s.conj();
                q[(i, k + 1)] = -a * s + b * cc;
            }
            if k > l {
                h[(k + 1, k - 1)] = zero;
            }
        }
    }
    Ok(())
}

/// Eigenvalue of `[[a, b], [c, d]]` closest to `d`.
fn wilkinson<T: Real>(a: Complex<T>, b: Complex<T>, c: Complex<T>, d: Complex<T>) -> Complex<T> {
    let half = lit::<T>(0.5);
    let m = (a + d).scale(half);
    let diff = (a - d).scale(half);
    let disc = nalgebra::ComplexField::sqrt(diff * diff + b * c);
    let l1 = m + disc;
    let l2 = m - disc;
    if cabs(l1 - d) <= cabs(l2 - d) {
        l1
    } else {
        l2
    }
}
