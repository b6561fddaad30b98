//! Channel data model and representation conversions.
//!
//! The superoperator `S` (column stacking, `vec(φ(X)) = S vec(X)`) is the
//! canonical representation and is always present. Kraus operators, the
//! trace-one Choi matrix and the qubit Bloch pair `(M, c)` are derived on
//! first use and cached.

mod families;
pub mod json;
mod random;

use std::sync::OnceLock;

use nalgebra::{Matrix3, Vector3};

use crate::matcore::{self, hermitian_eigh, partial_trace, Side};
use crate::{cx, CMat, Error, Result, Tolerances, C64};

pub use families::{
    amplitude_damping, depolarize_to, depolarizing, holevo_channel, identity_channel, phi_minus, phi_plus, simple_aes, transpose_map,
    unitary_channel, SimpleAesData,
};
pub(crate) use families::{from_action, unit, unitarity_residual};
pub use random::{random_cptp, random_density, random_unitary};

/// Default threshold used for the cached Kraus extraction and validation.
const DEFAULT_POS: f64 = 1e-9;

/// Qubit channel in the Bloch picture: `r ↦ M r + c`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlochAffine {
    pub m: Matrix3<f64>,
    pub c: Vector3<f64>,
}

/// Measure-and-prepare data `φ(X) = Σ_i ρ_i Tr[E_i X]`.
#[derive(Clone, Debug)]
pub struct HolevoForm {
    pub states: Vec<CMat>,
    pub effects: Vec<CMat>,
}

impl HolevoForm {
    pub fn dim(&self) -> usize {
        self.states.first().map(|s| s.nrows()).unwrap_or(0)
    }

    /// Checks `Σ E_i = 1`, `E_i ⪰ 0`, and that each `ρ_i` is a density matrix.
    pub fn validate(&self, tol: f64) -> Result<()> {
        if self.states.is_empty() || self.states.len() != self.effects.len() {
            return Err(Error::InvalidParameter("Holevo form needs equally many states and effects (at least one)".into()));
        }
        let d = self.dim();
        let mut sum = CMat::zeros(d, d);
        for (rho, e) in self.states.iter().zip(&self.effects) {
            if rho.shape() != (d, d) || e.shape() != (d, d) {
                return Err(Error::Shape("Holevo states/effects must all be d×d".into()));
            }
            check_density(rho, tol)?;
            let info = matcore::psd_utils(e, tol)?;
            if info.min_eig < -tol {
                return Err(Error::InvalidParameter(format!("effect is not PSD (min eigenvalue {:e})", info.min_eig)));
            }
            sum += e;
        }
        let res = matcore::frobenius(&(sum - CMat::identity(d, d)));
        if res > 1e-10_f64.max(tol) {
            return Err(Error::InvalidParameter(format!("effects do not sum to identity (residual {res:e})")));
        }
        Ok(())
    }

    fn superop(&self) -> CMat {
        let d = self.dim();
        let mut s = CMat::zeros(d * d, d * d);
        for (rho, e) in self.states.iter().zip(&self.effects) {
            // vec(ρ) vec(Eᵀ)ᵀ so that S vec(X) = ρ Tr[E X]
            let vr = matcore::vec_of(rho);
            let ve = matcore::vec_of(&e.transpose());
            s += &vr * ve.transpose();
        }
        s
    }
}

/// Simple-AES generator data (see [`simple_aes`]).
pub use families::{AesBlock, AesCensus};

/// Construction certificate attached to a channel.
#[derive(Clone, Debug)]
pub enum Provenance {
    /// Measure-and-prepare form; certifies entanglement breaking.
    Holevo(HolevoForm),
    Unitary(CMat),
    SimpleAes(SimpleAesData),
    /// Named parametric family, e.g. `amplitude_damping(p=0.5)`.
    Family {
        name: String,
        params: Vec<(String, f64)>,
    },
    Random {
        d: usize,
        kraus_rank: usize,
        seed: u64,
    },
}

impl Provenance {
    pub fn holevo(&self) -> Option<&HolevoForm> {
        match self {
            Provenance::Holevo(h) => Some(h),
            _ => None,
        }
    }
}

/// Diagnostic values of the CPTP test.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct CptpReport {
    pub cp: bool,
    pub tp: bool,
    pub min_choi_eig: f64,
    pub tp_residual: f64,
    /// `‖R − R†‖_F`; a non-zero value means the map is not Hermiticity preserving.
    pub hermiticity_residual: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SourceRepr {
    Kraus,
    Choi,
    Super,
    Bloch,
}

pub struct Channel {
    d: usize,
    superop: CMat,
    source: SourceRepr,
    provenance: Option<Provenance>,
    kraus: OnceLock<std::result::Result<Vec<CMat>, f64>>,
    choi: OnceLock<CMat>,
    bloch: OnceLock<Option<BlochAffine>>,
    validation: OnceLock<CptpReport>,
}

impl Clone for Channel {
    fn clone(&self) -> Self {
        let c = Channel::with_superop(self.d, self.superop.clone(), self.source);
        let _ = c.choi.set(self.choi().clone());
        Channel { provenance: self.provenance.clone(), ..c }
    }
}

impl std::fmt::Debug for Channel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Channel").field("d", &self.d).field("source", &self.source).field("provenance", &self.provenance).finish()
    }
}

fn check_finite(m: &CMat) -> Result<()> {
    if matcore::is_finite(m) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

pub(crate) fn check_density(rho: &CMat, tol: f64) -> Result<()> {
    let tr = matcore::trace(rho);
    if (tr - cx(1.0, 0.0)).norm() > 1e-10_f64.max(tol) {
        return Err(Error::InvalidParameter(format!("density matrix must have unit trace, got {tr}")));
    }
    let info = matcore::psd_utils(rho, tol)?;
    if info.min_eig < -tol {
        return Err(Error::InvalidParameter(format!("density matrix is not PSD (min eigenvalue {:e})", info.min_eig)));
    }
    Ok(())
}

impl Channel {
    fn with_superop(d: usize, superop: CMat, source: SourceRepr) -> Channel {
        Channel {
            d,
            superop,
            source,
            provenance: None,
            kraus: OnceLock::new(),
            choi: OnceLock::new(),
            bloch: OnceLock::new(),
            validation: OnceLock::new(),
        }
    }

    pub fn from_kraus(ops: &[CMat]) -> Result<Channel> {
        let first = ops.first().ok_or_else(|| Error::Shape("empty Kraus set".into()))?;
        let d = first.nrows();
        if d == 0 {
            return Err(Error::Shape("zero-dimensional Kraus operator".into()));
        }
        let mut s = CMat::zeros(d * d, d * d);
        for k in ops {
            if k.shape() != (d, d) {
                return Err(Error::Shape(format!("Kraus operators must be {d}×{d}, got {:?}", k.shape())));
            }
            check_finite(k)?;
            s += matcore::kron(&k.map(|z| z.conj()), k);
        }
        let ch = Channel::with_superop(d, s, SourceRepr::Kraus);
        let _ = ch.kraus.set(Ok(ops.to_vec()));
        Ok(ch)
    }

    /// From a trace-one-normalized Choi matrix `R[(a,i),(b,j)] = φ(|i⟩⟨j|)[a,b] / d`.
    pub fn from_choi(r: &CMat) -> Result<Channel> {
        let n = r.nrows();
        if r.ncols() != n {
            return Err(Error::Shape("Choi matrix must be square".into()));
        }
        let d = (n as f64).sqrt().round() as usize;
        if d == 0 || d * d != n {
            return Err(Error::Shape(format!("Choi matrix size {n} is not a perfect square")));
        }
        check_finite(r)?;
        let mut s = CMat::zeros(n, n);
        let df = d as f64;
        for a in 0..d {
            for b in 0..d {
                for i in 0..d {
                    for j in 0..d {
                        s[(a + d * b, i + d * j)] = r[(a * d + i, b * d + j)] * df;
                    }
                }
            }
        }
        let ch = Channel::with_superop(d, s, SourceRepr::Choi);
        let _ = ch.choi.set(r.clone());
        Ok(ch)
    }

    pub fn from_super(s: &CMat) -> Result<Channel> {
        let n = s.nrows();
        if s.ncols() != n {
            return Err(Error::Shape("square channels only: superoperator must be square".into()));
        }
        let d = (n as f64).sqrt().round() as usize;
        if d == 0 || d * d != n {
            return Err(Error::Shape(format!("superoperator size {n} is not a perfect square")));
        }
        check_finite(s)?;
        Ok(Channel::with_superop(d, s.clone(), SourceRepr::Super))
    }

    pub fn from_bloch(m: Matrix3<f64>, c: Vector3<f64>) -> Result<Channel> {
        if m.iter().chain(c.iter()).any(|x| !x.is_finite()) {
            return Err(Error::NonFinite);
        }
        let b = BlochAffine { m, c };
        let mut s = CMat::zeros(4, 4);
        for j in 0..2 {
            for i in 0..2 {
                let mut e = CMat::zeros(2, 2);
                e[(i, j)] = cx(1.0, 0.0);
                let out = b.apply(&e);
                s.set_column(i + 2 * j, &matcore::vec_of(&out));
            }
        }
        let ch = Channel::with_superop(2, s, SourceRepr::Bloch);
        let _ = ch.bloch.set(Some(b));
        Ok(ch)
    }

    pub fn with_provenance(mut self, p: Provenance) -> Channel {
        self.provenance = Some(p);
        self
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn source(&self) -> SourceRepr {
        self.source
    }

    pub fn provenance(&self) -> Option<&Provenance> {
        self.provenance.as_ref()
    }

    pub fn holevo_certificate(&self) -> Option<&HolevoForm> {
        self.provenance.as_ref().and_then(|p| p.holevo())
    }

    pub fn superop(&self) -> &CMat {
        &self.superop
    }

    pub fn choi(&self) -> &CMat {
        self.choi.get_or_init(|| {
            let d = self.d;
            let df = d as f64;
            let mut r = CMat::zeros(d * d, d * d);
            for a in 0..d {
                for b in 0..d {
                    for i in 0..d {
                        for j in 0..d {
                            r[(a * d + i, b * d + j)] = self.superop[(a + d * b, i + d * j)] / df;
                        }
                    }
                }
            }
            r
        })
    }

    /// Kraus operators from the Choi eigendecomposition, keeping eigenvalues
    /// above the default positivity threshold. Fails for non-CP maps.
    pub fn kraus(&self) -> Result<&[CMat]> {
        match self.kraus.get_or_init(|| kraus_from_choi(self.choi(), self.d, DEFAULT_POS)) {
            Ok(k) => Ok(k),
            Err(min) => Err(Error::NotCompletelyPositive(*min)),
        }
    }

    /// Numerical Kraus rank at threshold `tol`.
    pub fn kraus_rank(&self, tol: f64) -> Result<usize> {
        let (vals, _) = hermitian_eigh(self.choi())?;
        Ok(vals.iter().filter(|&&v| v > tol).count())
    }

    /// Bloch pair `(M, c)`; `None` unless `d = 2` and the map is Hermiticity
    /// and trace preserving.
    pub fn bloch(&self) -> Option<&BlochAffine> {
        self.bloch.get_or_init(|| if self.d == 2 { BlochAffine::from_superop(&self.superop) } else { None }).as_ref()
    }

    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        if x.shape() != (self.d, self.d) {
            return Err(Error::Shape(format!("input must be {0}×{0}", self.d)));
        }
        let v = &self.superop * matcore::vec_of(x);
        Ok(matcore::unvec(v.as_slice(), self.d))
    }

    /// Composition `self ∘ inner`: `inner` acts first.
    pub fn compose(&self, inner: &Channel) -> Result<Channel> {
        if self.d != inner.d {
            return Err(Error::Shape(format!("cannot compose d = {} with d = {}", self.d, inner.d)));
        }
        let mut out = Channel::with_superop(self.d, &self.superop * &inner.superop, SourceRepr::Super);
        out.provenance = compose_holevo(self, inner).map(Provenance::Holevo);
        Ok(out)
    }

    /// `n`-fold self-composition by repeated squaring; `power(0)` is the identity.
    pub fn power(&self, n: u64) -> Channel {
        let d2 = self.d * self.d;
        let mut result = CMat::identity(d2, d2);
        let mut base = self.superop.clone();
        let mut k = n;
        while k > 0 {
            if k & 1 == 1 {
                result = &result * &base;
            }
            k >>= 1;
            if k > 0 {
                base = &base * &base;
            }
        }
        let mut out = Channel::with_superop(self.d, result, SourceRepr::Super);
        if n >= 1 {
            if let Some(h) = self.holevo_certificate() {
                // φⁿ = φ^{n-1} ∘ φ: prepare φ^{n-1}(ρ_i) after measuring E_i
                let rest = self.power(n - 1);
                let states = h.states.iter().map(|r| rest.apply(r).expect("shape checked")).collect();
                out.provenance = Some(Provenance::Holevo(HolevoForm { states, effects: h.effects.clone() }));
            }
        }
        out
    }

    /// Hilbert–Schmidt adjoint: conjugate transpose of the superoperator.
    pub fn adjoint(&self) -> Channel {
        Channel::with_superop(self.d, self.superop.adjoint(), SourceRepr::Super)
    }

    pub fn validate_cptp(&self) -> CptpReport {
        *self.validation.get_or_init(|| self.validate_cptp_with(&Tolerances::default()))
    }

    pub fn validate_cptp_with(&self, tol: &Tolerances) -> CptpReport {
        let r = self.choi();
        let herm = matcore::hermitian_residual(r);
        let min_choi_eig = hermitian_eigh(r).map(|(v, _)| v[0]).unwrap_or(f64::NAN);
        let tp_residual = partial_trace(r, self.d, self.d, Side::First)
            .map(|t| matcore::frobenius(&(t - CMat::identity(self.d, self.d).unscale(self.d as f64))))
            .unwrap_or(f64::INFINITY);
        CptpReport {
            cp: herm <= tol.pos && min_choi_eig >= -tol.pos,
            tp: tp_residual <= tol.pos,
            min_choi_eig,
            tp_residual,
            hermiticity_residual: herm,
        }
    }

    pub fn is_cptp(&self) -> bool {
        let v = self.validate_cptp();
        v.cp && v.tp
    }

    /// Frobenius distance between superoperators.
    pub fn distance(&self, other: &Channel) -> f64 {
        if self.d != other.d {
            return f64::INFINITY;
        }
        matcore::frobenius(&(&self.superop - &other.superop))
    }

    pub fn is_hermiticity_preserving(&self, tol: f64) -> bool {
        matcore::hermitian_residual(self.choi()) <= tol
    }
}

fn compose_holevo(outer: &Channel, inner: &Channel) -> Option<HolevoForm> {
    if let Some(h) = outer.holevo_certificate() {
        // Σ ρ_i Tr[E_i ψ(X)] = Σ ρ_i Tr[ψ†(E_i) X]; needs ψ CP so ψ†(E_i) ⪰ 0
        if !inner.validate_cptp().cp {
            return None;
        }
        let adj = inner.adjoint();
        let effects = h.effects.iter().map(|e| adj.apply(e).expect("shape checked")).collect();
        return Some(HolevoForm { states: h.states.clone(), effects });
    }
    if let Some(h) = inner.holevo_certificate() {
        if !outer.is_cptp() {
            return None;
        }
        let states = h.states.iter().map(|r| outer.apply(r).expect("shape checked")).collect();
        return Some(HolevoForm { states, effects: h.effects.clone() });
    }
    None
}

fn kraus_from_choi(r: &CMat, d: usize, tol: f64) -> std::result::Result<Vec<CMat>, f64> {
    let Ok((vals, vecs)) = hermitian_eigh(r) else {
        return Err(f64::NAN);
    };
    if matcore::hermitian_residual(r) > tol || vals[0] < -tol {
        return Err(vals[0]);
    }
    let df = d as f64;
    let mut ops = Vec::new();
    for (k, &v) in vals.iter().enumerate().rev() {
        if v <= tol {
            continue;
        }
        let scale = (df * v).sqrt();
        // R = (1/d) Σ_k vec_r(K_k) vec_r(K_k)†, row-major index a*d + i
        ops.push(CMat::from_fn(d, d, |a, i| vecs[(a * d + i, k)] * scale));
    }
    Ok(ops)
}

pub(crate) fn pauli() -> [CMat; 4] {
    let z = cx(0.0, 0.0);
    let o = cx(1.0, 0.0);
    let i = cx(0.0, 1.0);
    [
        CMat::from_row_slice(2, 2, &[o, z, z, o]),
        CMat::from_row_slice(2, 2, &[z, o, o, z]),
        CMat::from_row_slice(2, 2, &[z, -i, i, z]),
        CMat::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

impl BlochAffine {
    /// Applies the linear extension of `(1 + r·σ)/2 ↦ (1 + (M r + c)·σ)/2`.
    pub fn apply(&self, x: &CMat) -> CMat {
        let p = pauli();
        let t = matcore::trace(x);
        let comps: Vec<C64> = (1..4).map(|k| matcore::trace(&(&p[k] * x))).collect();
        let mut out = &p[0] * t;
        for i in 0..3 {
            let mut coeff = t * self.c[i];
            for (j, z) in comps.iter().enumerate() {
                coeff += z * self.m[(i, j)];
            }
            out += &p[i + 1] * coeff;
        }
        out.unscale(2.0)
    }

    fn from_superop(s: &CMat) -> Option<BlochAffine> {
        let p = pauli();
        let apply = |x: &CMat| matcore::unvec((s * matcore::vec_of(x)).as_slice(), 2);
        let img_id = apply(&p[0]);
        if (matcore::trace(&img_id) - cx(2.0, 0.0)).norm() > 1e-9 {
            return None;
        }
        let mut m = Matrix3::zeros();
        let mut c = Vector3::zeros();
        for i in 0..3 {
            let ci = matcore::trace(&(&p[i + 1] * &img_id)) / 2.0;
            if ci.im.abs() > 1e-9 {
                return None;
            }
            c[i] = ci.re;
            for j in 0..3 {
                let img = apply(&p[j + 1]);
                if matcore::trace(&img).norm() > 1e-9 {
                    return None;
                }
                let mij = matcore::trace(&(&p[i + 1] * img)) / 2.0;
                if mij.im.abs() > 1e-9 {
                    return None;
                }
                m[(i, j)] = mij.re;
            }
        }
        Some(BlochAffine { m, c })
    }

    /// The 4×4 real matrix `[[1, 0], [c, M]]` acting on `(1, r)`.
    pub fn extended(&self) -> nalgebra::Matrix4<f64> {
        let mut e = nalgebra::Matrix4::zeros();
        e[(0, 0)] = 1.0;
        for i in 0..3 {
            e[(i + 1, 0)] = self.c[i];
            for j in 0..3 {
                e[(i + 1, j + 1)] = self.m[(i, j)];
            }
        }
        e
    }
}
