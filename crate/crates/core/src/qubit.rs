//! Qubit channels in the Bloch picture.

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::Serialize;

use crate::channels::{BlochAffine, Channel};
use crate::{Error, Result};

/// `M = P · diag(l) · Q` with `P, Q ∈ SO(3)`, `l₁ ≥ l₂ ≥ |l₃|`, `l₃` carrying the sign of `det M`.
#[derive(Clone, Debug, PartialEq)]
pub struct CanonicalForm {
    pub p: Matrix3<f64>,
    pub l: Vector3<f64>,
    pub q: Matrix3<f64>,
    /// `Pᵀ c`; zero when the form was computed from `M` alone.
    pub t: Vector3<f64>,
    pub sign_det: i8,
}

impl CanonicalForm {
    pub fn reconstruct(&self) -> Matrix3<f64> {
        self.p * Matrix3::from_diagonal(&self.l) * self.q
    }
}

pub fn special_svd(m: &Matrix3<f64>) -> CanonicalForm {
    let svd = m.svd(true, true);
    let u = svd.u.expect("u requested");
    let vt = svd.v_t.expect("v_t requested");
    let s = svd.singular_values;
    let mut idx = [0usize, 1, 2];
    idx.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut p = Matrix3::from_columns(&[u.column(idx[0]), u.column(idx[1]), u.column(idx[2])]);
    let mut q = Matrix3::from_rows(&[vt.row(idx[0]), vt.row(idx[1]), vt.row(idx[2])]);
    let mut l = Vector3::new(s[idx[0]], s[idx[1]], s[idx[2]]);
    if p.determinant() < 0.0 {
        p.column_mut(2).neg_mut();
        l[2] = -l[2];
    }
    if q.determinant() < 0.0 {
        q.row_mut(2).neg_mut();
        l[2] = -l[2];
    }
    let det = m.determinant();
    let scale = m.norm().max(1.0);
    let sign_det = if det.abs() <= 1e-14 * scale * scale * scale {
        0
    } else if det > 0.0 {
        1
    } else {
        -1
    };
    CanonicalForm { p, l, q, t: Vector3::zeros(), sign_det }
}

/// Canonical diagonal form `(L, t)` of a qubit channel, with `t = Pᵀ c`.
pub fn canonical_form(b: &BlochAffine) -> CanonicalForm {
    let mut cf = special_svd(&b.m);
    cf.t = cf.p.transpose() * b.c;
    cf
}

pub fn bloch_of(ch: &Channel) -> Result<&BlochAffine> {
    if ch.dim() != 2 {
        return Err(Error::NotQubit(ch.dim()));
    }
    ch.bloch().ok_or_else(|| Error::InvalidParameter("map is not Hermiticity and trace preserving".into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PureAction {
    Fix,
    Invert,
    Neither,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PureFixInvert {
    pub kind: PureAction,
    /// Unit Bloch vector of the fixed or inverted pure state.
    pub n: Option<[f64; 3]>,
    pub residual: f64,
}

const FIX_TOL: f64 = 1e-7;
const KERNEL_TOL: f64 = 1e-9;

/// Does the channel fix a pure state (`M n + c = n`, `|n| = 1`) or invert one
/// (`c = 0`, `M n = −n`)?
pub fn fixes_or_inverts_pure(ch: &Channel) -> Result<PureFixInvert> {
    let b = bloch_of(ch)?;
    Ok(fix_or_invert(b))
}

pub(crate) fn fix_or_invert(b: &BlochAffine) -> PureFixInvert {
    let id = Matrix3::identity();
    if let Some((n, res)) = unit_solution(&(id - b.m), &b.c) {
        if res <= FIX_TOL {
            return PureFixInvert { kind: PureAction::Fix, n: Some([n[0], n[1], n[2]]), residual: res };
        }
    }
    if b.c.norm() <= FIX_TOL {
        if let Some((n, res)) = unit_solution(&(id + b.m), &Vector3::zeros()) {
            if res <= FIX_TOL {
                return PureFixInvert { kind: PureAction::Invert, n: Some([n[0], n[1], n[2]]), residual: res };
            }
        }
    }
    PureFixInvert { kind: PureAction::Neither, n: None, residual: f64::NAN }
}

/// Unit vector `n` with `A n = y`, if the solution set reaches the unit
/// sphere. Returns the vector and the residual `|A n − y|`.
fn unit_solution(a: &Matrix3<f64>, y: &Vector3<f64>) -> Option<(Vector3<f64>, f64)> {
    let svd = a.svd(true, true);
    let u = svd.u?;
    let vt = svd.v_t?;
    let s = svd.singular_values;
    let mut particular = Vector3::zeros();
    let mut kernel = Vec::new();
    for k in 0..3 {
        let v: Vector3<f64> = vt.row(k).transpose();
        if s[k] > KERNEL_TOL {
            particular += v * (u.column(k).dot(y) / s[k]);
        } else {
            kernel.push(v);
        }
    }
    let n = match kernel.first() {
        None => particular,
        Some(k) => {
            // particular ⊥ kernel, so |particular + t k|² = |particular|² + t²
            let rest = 1.0 - particular.norm_squared();
            if rest < -FIX_TOL {
                return None;
            }
            particular + k * rest.max(0.0).sqrt()
        }
    };
    let nn = n.norm();
    if (nn - 1.0).abs() > FIX_TOL {
        return None;
    }
    let n = n / nn;
    Some((n, (a * n - y).norm()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormCheck {
    pub norm_m: f64,
    pub norm_c: f64,
    /// Largest `|M n|² + |c|² − 1` found over the sample and the top singular vector.
    pub max_excess: f64,
    pub unital_forced: bool,
    pub holds: bool,
}

/// Bounds that every positive trace-preserving qubit map satisfies:
/// `|M n|² + |c|² ≤ 1` on unit `n`, hence `‖M‖_∞ ≤ 1`, and `c = 0` when `‖M‖_∞ = 1`.
pub fn positivity_norm_check(ch: &Channel) -> Result<NormCheck> {
    let b = bloch_of(ch)?;
    let svd = b.m.svd(true, true);
    let s = svd.singular_values;
    let top = (0..3).max_by(|&i, &j| s[i].partial_cmp(&s[j]).unwrap_or(std::cmp::Ordering::Equal)).unwrap_or(0);
    let norm_m = s[top];
    let norm_c = b.c.norm();
    let c2 = norm_c * norm_c;
    let mut max_excess = norm_m * norm_m + c2 - 1.0;
    // Fibonacci sphere sample
    let count = 200;
    let golden = std::f64::consts::PI * (3.0 - 5.0_f64.sqrt());
    for k in 0..count {
        let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
        let r = (1.0 - z * z).sqrt();
        let phi = golden * k as f64;
        let n = Vector3::new(r * phi.cos(), r * phi.sin(), z);
        max_excess = max_excess.max((b.m * n).norm_squared() + c2 - 1.0);
    }
    let unital_forced = norm_m >= 1.0 - 1e-8;
    let holds = max_excess <= 1e-9 && (!unital_forced || norm_c <= 1e-7);
    Ok(NormCheck { norm_m, norm_c, max_excess, unital_forced, holds })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum QubitFamilyFit {
    Plus { lambda: f64, theta: f64, alpha: f64, mu: f64, rotation: [[f64; 3]; 3], residual: f64 },
    Minus { lambda: f64, theta: f64, rotation: [[f64; 3]; 3], residual: f64 },
}

impl QubitFamilyFit {
    pub fn residual(&self) -> f64 {
        match self {
            QubitFamilyFit::Plus { residual, .. } | QubitFamilyFit::Minus { residual, .. } => *residual,
        }
    }

    pub fn rotation(&self) -> Matrix3<f64> {
        let r = match self {
            QubitFamilyFit::Plus { rotation, .. } | QubitFamilyFit::Minus { rotation, .. } => rotation,
        };
        Matrix3::from_fn(|i, j| r[i][j])
    }

    /// Bloch data of the fitted channel, `(O M± Oᵀ, O c±)`.
    pub fn rebuild(&self) -> BlochAffine {
        let o = self.rotation();
        let (m, c) = match *self {
            QubitFamilyFit::Plus { lambda, theta, alpha, mu, .. } => {
                (plus_matrix(lambda, theta, alpha, 0.0, mu), Vector3::new(-alpha, 0.0, 1.0 - mu))
            }
            QubitFamilyFit::Minus { lambda, theta, .. } => (minus_matrix(lambda, theta), Vector3::zeros()),
        };
        BlochAffine { m: o * m * o.transpose(), c: o * c }
    }
}

pub fn plus_matrix(lambda: f64, theta: f64, alpha: f64, beta: f64, mu: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(lambda * c, lambda * s, alpha, -lambda * s, lambda * c, beta, 0.0, 0.0, mu)
}

pub fn minus_matrix(lambda: f64, theta: f64) -> Matrix3<f64> {
    let (s, c) = theta.sin_cos();
    Matrix3::new(lambda * c, lambda * s, 0.0, lambda * s, -lambda * c, 0.0, 0.0, 0.0, -1.0)
}

/// Proper rotation taking `e₃` to the unit vector `n` (identity when `n = e₃`).
pub fn rotation_to(n: &Vector3<f64>) -> Matrix3<f64> {
    let e3 = Vector3::z();
    let n = n.normalize();
    let cos = e3.dot(&n);
    if cos > 1.0 - 1e-15 {
        return Matrix3::identity();
    }
    if cos < -1.0 + 1e-15 {
        return Matrix3::new(1.0, 0.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, -1.0);
    }
    let axis = e3.cross(&n).normalize();
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_unchecked(axis), cos.acos()).into_inner()
}

fn rz(gamma: f64) -> Matrix3<f64> {
    let (s, c) = gamma.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rows(m: &Matrix3<f64>) -> [[f64; 3]; 3] {
    [[m[(0, 0)], m[(0, 1)], m[(0, 2)]], [m[(1, 0)], m[(1, 1)], m[(1, 2)]], [m[(2, 0)], m[(2, 1)], m[(2, 2)]]]
}

const FIT_TOL: f64 = 1e-8;

/// Recovers the `Plus` or `Minus` family parameters of a qubit channel that
/// fixes or inverts a pure state. `Plus` is preferred when both apply.
pub fn es_qubit_param_fit(ch: &Channel) -> Result<QubitFamilyFit> {
    let b = bloch_of(ch)?;
    let act = fix_or_invert(b);
    let n = match act.n {
        Some(n) => Vector3::new(n[0], n[1], n[2]),
        None => return Err(Error::InvalidParameter("channel neither fixes nor inverts a pure state".into())),
    };
    let o = rotation_to(&n);
    let m = o.transpose() * b.m * o;
    let block = Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let fit = match act.kind {
        PureAction::Fix => {
            // β-elimination: a rotation about e₃ commutes with the 2×2 scaled rotation
            let w = Vector2::new(m[(0, 2)], m[(1, 2)]);
            let gamma = w[1].atan2(w[0]);
            let o = o * rz(gamma);
            let lambda = block.determinant().max(0.0).sqrt();
            let theta = block[(0, 1)].atan2(block[(0, 0)]);
            QubitFamilyFit::Plus { lambda, theta, alpha: w.norm(), mu: m[(2, 2)], rotation: rows(&o), residual: 0.0 }
        }
        PureAction::Invert => {
            let lambda = (-block.determinant()).max(0.0).sqrt();
            let theta = block[(0, 1)].atan2(block[(0, 0)]);
            QubitFamilyFit::Minus { lambda, theta, rotation: rows(&o), residual: 0.0 }
        }
        PureAction::Neither => unreachable!("handled above"),
    };
    let rebuilt = fit.rebuild();
    let residual = (rebuilt.m - b.m).norm() + (rebuilt.c - b.c).norm();
    let fit = match fit {
        QubitFamilyFit::Plus { lambda, theta, alpha, mu, rotation, .. } => {
            if alpha * alpha > (1.0 - mu) * (mu - lambda * lambda) + FIT_TOL {
                return Err(Error::Consistency(format!("fitted parameters violate α² ≤ (1−μ)(μ−λ²): λ={lambda}, α={alpha}, μ={mu}")));
            }
            QubitFamilyFit::Plus { lambda, theta, alpha, mu, rotation, residual }
        }
        QubitFamilyFit::Minus { lambda, theta, rotation, .. } => QubitFamilyFit::Minus { lambda, theta, rotation, residual },
    };
    if residual > FIT_TOL {
        return Err(Error::Consistency(format!("family fit residual {residual:e} exceeds {FIT_TOL:e}")));
    }
    Ok(fit)
}

/// Bloch pair of the unitary conjugation by `exp(−i θ n·σ/2)`: the rotation by `θ` about `n`.
pub fn rotation_channel(axis: &Vector3<f64>, theta: f64) -> Result<Channel> {
    let r = nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), theta).into_inner();
    Channel::from_bloch(r, Vector3::zeros())
}
