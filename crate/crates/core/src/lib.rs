//! Numerics for finite-dimensional quantum channels.
//!
//! A [`Channel`] is a linear map on `d×d` complex matrices held through its
//! superoperator (column-stacking convention) with lazily cached Kraus, Choi
//! and, for qubits, Bloch representations. On top of that the crate offers
//! spectral analysis ([`spectral`]), entanglement-breaking witnesses
//! ([`entwit`]), the qubit Bloch-sphere toolkit ([`qubit`]) and the
//! entanglement-saving / asymptotically entanglement-saving classifiers
//! ([`classify`]).
//!
//! Choi matrices use the trace-one normalization
//! `R_φ = (φ ⊗ id)(|ε⟩⟨ε|)` with `|ε⟩ = d^{-1/2} Σ_i |i⟩|i⟩`. Much other
//! software uses the trace-`d` convention; the qubit criterion
//! `‖R_φ‖_∞ ≤ 1/2` only holds in this one.

pub mod channels;
pub mod classify;
pub mod entwit;
mod error;
pub mod matcore;
pub mod qubit;
pub mod spectral;

use serde::{Deserialize, Serialize};

pub use channels::{BlochAffine, Channel, CptpReport, HolevoForm, Provenance, SimpleAesData};
pub use error::{Error, Result};

pub type C64 = num_complex::Complex64;
/// Dense complex matrix in double precision.
pub type CMat = matcore::CMatrix<f64>;
pub type EigenSystem = matcore::EigenSystem<f64>;
pub type EigenCluster = matcore::EigenCluster<f64>;
pub type PsdInfo = matcore::PsdInfo<f64>;

/// Numerical thresholds shared by every analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Positivity threshold for PSD, PPT and trace-preservation checks.
    pub pos: f64,
    /// Eigenvalue clustering tolerance, relative to the spectral radius.
    pub spec: f64,
    /// An eigenvalue is peripheral when `|λ| >= 1 - peri`.
    pub peri: f64,
    /// Relative threshold on commutator norms of phase points.
    pub comm: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { pos: 1e-9, spec: 1e-7, peri: 1e-8, comm: 1e-7 }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("pos", self.pos), ("spec", self.spec), ("peri", self.peri), ("comm", self.comm)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter(format!("tolerance {name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[inline]
pub(crate) fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}
