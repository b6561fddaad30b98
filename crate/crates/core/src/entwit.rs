//! Entanglement-breaking tests and entanglement witnesses.

use nalgebra::{Matrix3, Vector3};
use serde::Serialize;

use crate::channels::{transpose_map, Channel};
use crate::matcore::{self, hermitian_eigh, partial_transpose, psd_utils, trace_norm};
use crate::qubit::{bloch_of, canonical_form};
use crate::{cx, CMat, Error, Result, Tolerances};

/// Smallest eigenvalue of the partial transpose (second factor) of the Choi matrix.
pub fn ppt_min_eig(ch: &Channel) -> f64 {
    let d = ch.dim();
    let pt = partial_transpose(ch.choi(), d, d).expect("Choi is d²×d²");
    hermitian_eigh(&pt).map(|(v, _)| v[0]).unwrap_or(f64::NAN)
}

/// Trace norm of the `d² × d²` superoperator; at most `d` for entanglement-breaking maps.
pub fn reshuffling_norm(ch: &Channel) -> f64 {
    trace_norm(ch.superop()).unwrap_or(f64::NAN)
}

/// `(‖R^{T_B}‖₁ − 1) / 2` for a bipartite density matrix on `C^{da} ⊗ C^{db}`.
pub fn negativity(r: &CMat, da: usize, db: usize) -> Result<f64> {
    let tr = matcore::trace(r);
    if (tr - cx(1.0, 0.0)).norm() > 1e-8 {
        return Err(Error::InvalidParameter(format!("state must have unit trace, got {tr}")));
    }
    let pt = partial_transpose(r, da, db)?;
    let (vals, _) = hermitian_eigh(&pt)?;
    let norm: f64 = vals.iter().map(|v| v.abs()).sum();
    Ok(((norm - 1.0) / 2.0).max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EbStatus {
    NotEb,
    Eb,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    /// Negative eigenvalue of the partially transposed Choi matrix.
    Ppt,
    Reshuffling,
    /// Positive partial transpose, exact on two qubits.
    PptQubit,
    HolevoCertificate,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Witness {
    pub criterion: Criterion,
    pub value: f64,
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EbVerdict {
    pub status: EbStatus,
    pub witness: Option<Witness>,
    pub ppt_min_eig: f64,
    pub reshuffling_norm: f64,
}

impl EbVerdict {
    pub fn is_eb(&self) -> bool {
        self.status == EbStatus::Eb
    }

    pub fn is_not_eb(&self) -> bool {
        self.status == EbStatus::NotEb
    }
}

/// Three-valued entanglement-breaking decision. Exact for qubits; in higher
/// dimension only refutation by witness and confirmation by a Holevo-form
/// certificate are available.
pub fn eb_verdict(ch: &Channel, tol: &Tolerances) -> EbVerdict {
    let d = ch.dim() as f64;
    let ppt = ppt_min_eig(ch);
    let resh = reshuffling_norm(ch);
    let make = |status, witness| EbVerdict { status, witness, ppt_min_eig: ppt, reshuffling_norm: resh };
    if ppt < -tol.pos {
        return make(EbStatus::NotEb, Some(Witness { criterion: Criterion::Ppt, value: ppt, threshold: -tol.pos }));
    }
    if resh > d + tol.pos {
        return make(EbStatus::NotEb, Some(Witness { criterion: Criterion::Reshuffling, value: resh, threshold: d + tol.pos }));
    }
    if ch.dim() == 2 {
        return make(EbStatus::Eb, Some(Witness { criterion: Criterion::PptQubit, value: ppt, threshold: -tol.pos }));
    }
    if let Some(h) = ch.holevo_certificate() {
        return make(EbStatus::Eb, Some(Witness { criterion: Criterion::HolevoCertificate, value: h.states.len() as f64, threshold: 0.0 }));
    }
    make(EbStatus::Unknown, None)
}

/// The four equivalent qubit entanglement-breaking criteria, each evaluated on its own.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QubitEbSuite {
    pub ppt: bool,
    pub sign_change: bool,
    pub norm_half: bool,
    pub t_compose: bool,
    pub ppt_min_eig: f64,
    /// Minimum Choi eigenvalue of each single sign flip of the canonical `L`.
    pub sign_flip_min_eigs: [f64; 3],
    pub choi_norm: f64,
    /// Minimum Choi eigenvalues of `T∘φ` and `φ∘T`.
    pub transpose_min_eigs: [f64; 2],
}

impl QubitEbSuite {
    pub fn agree(&self) -> bool {
        self.ppt == self.sign_change && self.ppt == self.norm_half && self.ppt == self.t_compose
    }
}

/// Evaluates the suite; a disagreement among the four booleans is a
/// [`Error::Consistency`] carrying every raw value.
pub fn qubit_eb_suite(ch: &Channel, tol: &Tolerances) -> Result<QubitEbSuite> {
    let suite = qubit_eb_suite_raw(ch, tol)?;
    if !suite.agree() {
        return Err(Error::Consistency(format!("qubit EB criteria disagree: {suite:?}")));
    }
    Ok(suite)
}

pub fn qubit_eb_suite_raw(ch: &Channel, tol: &Tolerances) -> Result<QubitEbSuite> {
    let b = bloch_of(ch)?;
    let ppt_val = ppt_min_eig(ch);
    let cf = canonical_form(b);
    let mut sign_flip_min_eigs = [0.0; 3];
    for (i, slot) in sign_flip_min_eigs.iter_mut().enumerate() {
        let mut l = cf.l;
        l[i] = -l[i];
        let flipped = Channel::from_bloch(Matrix3::from_diagonal(&l), cf.t)?;
        *slot = flipped.validate_cptp_with(tol).min_choi_eig;
    }
    let (vals, _) = hermitian_eigh(ch.choi())?;
    let choi_norm = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let t = transpose_map(2);
    let transpose_min_eigs = [t.compose(ch)?.validate_cptp_with(tol).min_choi_eig, ch.compose(&t)?.validate_cptp_with(tol).min_choi_eig];
    Ok(QubitEbSuite {
        ppt: ppt_val >= -tol.pos,
        sign_change: sign_flip_min_eigs.iter().all(|&v| v >= -tol.pos),
        norm_half: choi_norm <= 0.5 + tol.pos,
        t_compose: transpose_min_eigs.iter().any(|&v| v >= -tol.pos),
        ppt_min_eig: ppt_val,
        sign_flip_min_eigs,
        choi_norm,
        transpose_min_eigs,
    })
}

#[derive(Clone, Debug)]
pub struct QWitness {
    /// `[[1, Z], [Z†, Z†Z]]` on `C² ⊗ C^d`.
    pub q: CMat,
    pub ppt_min_eig: f64,
    pub commutator_norm: f64,
}

/// Positive matrix `Q(Z)` whose partial transpose is positive exactly when `Z` is normal.
pub fn q_witness(z: &CMat) -> Result<QWitness> {
    let d = matcore::ensure_square(z)?;
    let mut q = CMat::zeros(2 * d, 2 * d);
    q.view_mut((0, 0), (d, d)).copy_from(&CMat::identity(d, d));
    q.view_mut((0, d), (d, d)).copy_from(z);
    q.view_mut((d, 0), (d, d)).copy_from(&z.adjoint());
    q.view_mut((d, d), (d, d)).copy_from(&(z.adjoint() * z));
    let pt = partial_transpose(&q, 2, d)?;
    let (vals, _) = hermitian_eigh(&pt)?;
    Ok(QWitness { q, ppt_min_eig: vals[0], commutator_norm: matcore::frobenius(&matcore::commutator(z, &z.adjoint())) })
}

#[derive(Clone, Debug)]
pub struct Perturbation {
    /// `ε |Ψ⟩⟨Ψ| + (1 − ε) ρ_A ⊗ ρ_B` with `|Ψ⟩ = (|11⟩ + |22⟩)/√2`.
    pub state: CMat,
    pub ppt_min_eig: f64,
    /// Determinant of the partial transpose compressed to `span{|12⟩, |21⟩}`.
    pub w_minor_det: f64,
}

/// Entangled states arbitrarily close to `ρ_A ⊗ ρ_B` when `ρ_A` is singular.
pub fn entangled_perturbation(rho_a: &CMat, rho_b: &CMat, eps: f64, tol: &Tolerances) -> Result<Perturbation> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::InvalidParameter(format!("ε must lie in (0, 1], got {eps}")));
    }
    let da = matcore::ensure_square(rho_a)?;
    let db = matcore::ensure_square(rho_b)?;
    if da < 2 || db < 2 {
        return Err(Error::Shape("both systems need dimension at least 2".into()));
    }
    crate::channels::check_density(rho_a, tol.pos)?;
    crate::channels::check_density(rho_b, tol.pos)?;
    let (vals, vecs) = hermitian_eigh(rho_a)?;
    if vals[0] > tol.pos {
        return Err(Error::InvalidParameter(format!("ρ_A is strictly positive (min eigenvalue {:e})", vals[0])));
    }
    let a1 = vecs.column(0).into_owned();
    let a2 = vecs.column(1).into_owned();
    let mut b1 = nalgebra::DVector::zeros(db);
    let mut b2 = nalgebra::DVector::zeros(db);
    b1[0] = cx(1.0, 0.0);
    b2[1] = cx(1.0, 0.0);
    let kron_v = |x: &nalgebra::DVector<crate::C64>, y: &nalgebra::DVector<crate::C64>| x.kronecker(y);
    let psi = (kron_v(&a1, &b1) + kron_v(&a2, &b2)).unscale(std::f64::consts::SQRT_2);
    let state = &psi * psi.adjoint() * cx(eps, 0.0) + matcore::kron(rho_a, rho_b) * cx(1.0 - eps, 0.0);
    let pt = partial_transpose(&state, da, db)?;
    let (pvals, _) = hermitian_eigh(&pt)?;
    let w1 = kron_v(&a1, &b2);
    let w2 = kron_v(&a2, &b1);
    let entry = |x: &nalgebra::DVector<crate::C64>, y: &nalgebra::DVector<crate::C64>| (x.adjoint() * &pt * y)[(0, 0)];
    let det = entry(&w1, &w1) * entry(&w2, &w2) - entry(&w1, &w2) * entry(&w2, &w1);
    Ok(Perturbation { state, ppt_min_eig: pvals[0], w_minor_det: det.re })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KernelBound {
    pub kernel_dim: usize,
    /// `2dr − r² − s²`.
    pub bound: i64,
    pub r: usize,
    pub s: usize,
    /// `r² + s² ≥ 2dr`: the bound says nothing.
    pub vacuous: bool,
    pub holds: bool,
}

/// Kernel dimension of an entanglement-breaking channel against the bound
/// `dim ker φ ≥ 2dr − r² − s²`, with `r = rank A` and `s = rank φ(A)`.
pub fn eb_kernel_bound_check(ch: &Channel, a: &CMat, tol: &Tolerances) -> Result<KernelBound> {
    if !eb_verdict(ch, tol).is_eb() {
        return Err(Error::InvalidParameter("kernel bound needs an entanglement-breaking certified channel".into()));
    }
    let d = ch.dim();
    let info = psd_utils(a, tol.pos)?;
    if info.min_eig < -tol.pos {
        return Err(Error::InvalidParameter("A must be positive semidefinite".into()));
    }
    let r = info.rank;
    let s = psd_utils(&matcore::hermitian_part(&ch.apply(a)?), tol.pos)?.rank;
    let scale = matcore::frobenius(ch.superop()).max(1.0);
    let kernel_dim = matcore::nullspace(ch.superop(), tol.pos * scale)?.ncols();
    let bound = (2 * d * r) as i64 - (r * r) as i64 - (s * s) as i64;
    let vacuous = bound <= 0;
    Ok(KernelBound { kernel_dim, bound, r, s, vacuous, holds: kernel_dim as i64 >= bound })
}

/// Bloch-space transpose: `(M, c) ↦ (D M D, D c)` with `D = diag(1, −1, 1)`.
pub fn bloch_transpose(m: &Matrix3<f64>, c: &Vector3<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let dm = Matrix3::from_diagonal(&Vector3::new(1.0, -1.0, 1.0));
    (dm * m * dm, dm * c)
}
