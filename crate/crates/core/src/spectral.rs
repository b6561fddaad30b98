//! Spectra, peripheral projectors and fixed points of channels.

use serde::Serialize;

use crate::channels::Channel;
use crate::matcore::{self, eig_full, hermitian_basis, hermitian_eigh, psd_utils};
use crate::{cx, CMat, EigenSystem, Error, Result, Tolerances, C64};

/// One eigenvalue cluster with its multiplicities.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ClusterInfo {
    #[serde(serialize_with = "ser_complex")]
    pub value: C64,
    pub algebraic: usize,
    pub geometric: usize,
}

fn ser_complex<S: serde::Serializer>(z: &C64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&z.re)?;
    t.serialize_element(&z.im)?;
    t.end()
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectralReport {
    pub clusters: Vec<ClusterInfo>,
    pub peripheral: Vec<ClusterInfo>,
    /// Algebraic multiplicity of the eigenvalue 0.
    pub zero_amult: usize,
    pub contraction_ok: bool,
    pub peripheral_jordan_trivial: bool,
    /// `1 − max |λ|` over non-peripheral eigenvalues (1 when there are none).
    pub gap: f64,
}

impl SpectralReport {
    pub fn peripheral_count(&self) -> usize {
        self.peripheral.iter().map(|c| c.algebraic).sum()
    }

    pub fn total(&self) -> usize {
        self.clusters.iter().map(|c| c.algebraic).sum()
    }

    pub fn multiplicity_of(&self, z: C64, tol: f64) -> usize {
        self.clusters.iter().filter(|c| (c.value - z).norm() <= tol).map(|c| c.algebraic).sum()
    }
}

/// Eigen-decomposition of the superoperator with clusters snapped to be
/// closed under complex conjugation.
pub fn eigensystem(ch: &Channel, tol: &Tolerances) -> Result<EigenSystem> {
    let mut es = eig_full(ch.superop(), tol.spec)?;
    let scale = es.spectral_radius().max(1.0);
    let snap = tol.spec * scale;
    let values: Vec<C64> = es.clusters.iter().map(|c| c.value).collect();
    for (k, c) in es.clusters.iter_mut().enumerate() {
        if c.value.im.abs() <= snap {
            c.value.im = 0.0;
            continue;
        }
        if let Some(j) = (0..values.len()).find(|&j| j != k && (values[j] - values[k].conj()).norm() <= snap) {
            // average with the partner so both clusters are exact conjugates
            let z = (values[k] + values[j].conj()) * 0.5;
            c.value = z;
        }
    }
    Ok(es)
}

pub fn spectrum(ch: &Channel, tol: &Tolerances) -> Result<SpectralReport> {
    let es = eigensystem(ch, tol)?;
    Ok(report_from(&es, tol))
}

pub(crate) fn report_from(es: &EigenSystem, tol: &Tolerances) -> SpectralReport {
    let clusters: Vec<ClusterInfo> =
        es.clusters.iter().map(|c| ClusterInfo { value: c.value, algebraic: c.algebraic, geometric: c.geometric }).collect();
    let is_peri = |z: C64| z.norm() >= 1.0 - tol.peri;
    let peripheral: Vec<ClusterInfo> = clusters.iter().filter(|c| is_peri(c.value)).copied().collect();
    let zero_tol = tol.spec * es.spectral_radius().max(1.0);
    let zero_amult = clusters.iter().filter(|c| c.value.norm() <= zero_tol).map(|c| c.algebraic).sum();
    let contraction_ok = es.values.iter().all(|z| z.norm() <= 1.0 + tol.peri);
    let peripheral_jordan_trivial = peripheral.iter().all(|c| c.algebraic == c.geometric);
    let inner = es.values.iter().map(|z| z.norm()).filter(|&r| r < 1.0 - tol.peri).fold(0.0_f64, f64::max);
    SpectralReport { clusters, peripheral, zero_amult, contraction_ok, peripheral_jordan_trivial, gap: 1.0 - inner }
}

/// How the peripheral projectors were obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProjectorMethod {
    Spectral,
    LimitOfPowers,
}

/// `E_φ` (projector on the peripheral part), `I_φ` (its phase-inverting
/// partner) and `φ∞` (projector on the eigenvalue-1 part).
#[derive(Clone, Debug)]
pub struct PeripheralProjectors {
    pub peripheral: Channel,
    pub inverse_phase: Channel,
    pub fixed: Channel,
    pub method: ProjectorMethod,
    pub warning: Option<String>,
}

/// Below this gap the spectral route is abandoned for a limit of powers.
const MIN_GAP: f64 = 1e-6;
/// Denominator cap for rational approximation of peripheral phases.
const MAX_DENOMINATOR: u64 = 1_000_000;

pub fn projectors(ch: &Channel, tol: &Tolerances) -> Result<PeripheralProjectors> {
    let es = eigensystem(ch, tol)?;
    let report = report_from(&es, tol);
    if report.gap < MIN_GAP {
        return limit_of_powers(ch, &es, tol, report.gap);
    }
    let n = ch.superop().nrows();
    let mut e = CMat::zeros(n, n);
    let mut inv = CMat::zeros(n, n);
    let mut fixed = CMat::zeros(n, n);
    for c in es.clusters.iter().filter(|c| c.value.norm() >= 1.0 - tol.peri) {
        if !c.is_semisimple() || c.biorth_residual.is_none() {
            return Err(Error::IllConditioned(format!(
                "peripheral eigenvalue {} has algebraic multiplicity {} but geometric {}",
                c.value, c.algebraic, c.geometric
            )));
        }
        let p = c.projector();
        inv += &p * c.value.conj();
        if (c.value - cx(1.0, 0.0)).norm() <= tol.spec.max(tol.peri) {
            fixed += &p;
        }
        e += p;
    }
    Ok(PeripheralProjectors {
        peripheral: Channel::from_super(&e)?,
        inverse_phase: Channel::from_super(&inv)?,
        fixed: Channel::from_super(&fixed)?,
        method: ProjectorMethod::Spectral,
        warning: None,
    })
}

/// Best rational approximation `p/q` of `x` with `q ≤ max_q`.
pub(crate) fn rational_approx(x: f64, max_q: u64) -> (i64, u64) {
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1u64, 1i64, 0u64);
    let mut r = x;
    for _ in 0..64 {
        let a = r.floor();
        let (p2, q2) = (a as i64 * p1 + p0, a as u64 * q1 + q0);
        if q2 > max_q {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        let frac = r - a;
        if frac.abs() < 1e-15 {
            break;
        }
        r = 1.0 / frac;
    }
    if q1 == 0 {
        (x.round() as i64, 1)
    } else {
        (p1, q1)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

fn limit_of_powers(ch: &Channel, es: &EigenSystem, tol: &Tolerances, gap: f64) -> Result<PeripheralProjectors> {
    let mut period: u64 = 1;
    for c in es.clusters.iter().filter(|c| c.value.norm() >= 1.0 - tol.peri) {
        let turns = c.value.arg() / (2.0 * std::f64::consts::PI);
        let (_, q) = rational_approx(turns.rem_euclid(1.0), MAX_DENOMINATOR);
        period = (period / gcd(period, q)).saturating_mul(q).min(MAX_DENOMINATOR);
    }
    let base = ch.power(period);
    let mut x = base.superop().clone();
    let mut steps: u64 = period;
    for _ in 0..40 {
        let next = &x * &x;
        let diff = matcore::frobenius(&(&next - &x));
        x = next;
        steps = steps.saturating_mul(2);
        if diff < 1e-12 {
            break;
        }
    }
    // rounding errors along the range of E double with every squaring;
    // 3x² − 2x³ pulls them back onto the nearest idempotent
    for _ in 0..8 {
        let x2 = &x * &x;
        let next = &x2 * cx(3.0, 0.0) - &x2 * &x * cx(2.0, 0.0);
        let diff = matcore::frobenius(&(&next - &x));
        x = next;
        if diff < 1e-15 {
            break;
        }
    }
    let e = Channel::from_super(&x)?;
    let inverse_phase = e.compose(&ch.power(period - 1))?;
    // φ∞ averages E_φ over one full period of the phases
    let n = x.nrows();
    let mut fixed = CMat::zeros(n, n);
    let mut acc = e.superop().clone();
    for _ in 0..period.min(4096) {
        fixed += &acc;
        acc = ch.superop() * acc;
    }
    fixed.unscale_mut(period.min(4096) as f64);
    Ok(PeripheralProjectors {
        peripheral: e,
        inverse_phase,
        fixed: Channel::from_super(&fixed)?,
        method: ProjectorMethod::LimitOfPowers,
        warning: Some(format!("spectral gap {gap:.3e} below {MIN_GAP:e}: projectors from powers φ^({steps}) with phase period {period}")),
    })
}

pub fn peripheral_projector(ch: &Channel, tol: &Tolerances) -> Result<Channel> {
    Ok(projectors(ch, tol)?.peripheral)
}

pub fn inverse_phase(ch: &Channel, tol: &Tolerances) -> Result<Channel> {
    Ok(projectors(ch, tol)?.inverse_phase)
}

#[derive(Clone, Debug)]
pub struct CesaroOutcome {
    /// Spectral eigenvalue-1 projector.
    pub projector: Channel,
    /// Last Cesàro mean `(1/n) Σ_{k<n} φ^k`.
    pub mean: CMat,
    pub terms: u64,
    /// `‖A_n − A_{n/2}‖_F` at termination.
    pub step: f64,
    /// `‖A_n − φ∞‖_F`.
    pub deviation: f64,
    pub converged: bool,
    pub warning: Option<String>,
}

/// `φ∞` by spectral projection, cross-checked against Cesàro means computed
/// by doubling: `A_{2n} = (A_n + φⁿ A_n)/2`.
pub fn cesaro_fixed_projector(ch: &Channel, tol: f64, max_iter: usize, tols: &Tolerances) -> Result<CesaroOutcome> {
    let proj = projectors(ch, tols)?;
    let n = ch.superop().nrows();
    let mut mean = CMat::identity(n, n);
    let mut pow = ch.superop().clone();
    let mut terms: u64 = 1;
    let mut step = f64::INFINITY;
    let mut converged = false;
    for _ in 0..max_iter {
        let next = (&mean + &pow * &mean).unscale(2.0);
        step = matcore::frobenius(&(&next - &mean));
        mean = next;
        pow = &pow * &pow;
        terms = terms.saturating_mul(2);
        if step < tol {
            converged = true;
            break;
        }
    }
    let deviation = matcore::frobenius(&(&mean - proj.fixed.superop()));
    let mut warning = proj.warning.clone();
    if !converged {
        warning = Some(format!("Cesàro mean did not reach {tol:e} after {terms} terms (last step {step:.3e})"));
    }
    Ok(CesaroOutcome { projector: proj.fixed, mean, terms, step, deviation, converged, warning })
}

/// `ρ₀ = φ∞(1)/d`, whose support contains that of every fixed point.
pub fn max_fixed_point(ch: &Channel, tol: &Tolerances) -> Result<CMat> {
    let proj = projectors(ch, tol)?;
    max_fixed_point_from(&proj.fixed, ch.dim())
}

pub(crate) fn max_fixed_point_from(fixed: &Channel, d: usize) -> Result<CMat> {
    let img = matcore::hermitian_part(&fixed.apply(&CMat::identity(d, d))?);
    let tr = matcore::trace(&img).re;
    if tr <= 0.0 {
        return Err(Error::IllConditioned(format!("φ∞(1) has trace {tr}; map is not trace preserving")));
    }
    Ok(img.unscale(tr))
}

/// Hermitian basis of the fixed-point space `η_φ`.
pub fn fixed_space_basis(ch: &Channel, tol: &Tolerances) -> Result<Vec<CMat>> {
    let proj = projectors(ch, tol)?;
    fixed_basis_from(&proj.fixed, ch.dim(), tol)
}

pub(crate) fn fixed_basis_from(fixed: &Channel, d: usize, tol: &Tolerances) -> Result<Vec<CMat>> {
    let mut imgs = Vec::with_capacity(d * d);
    for h in hermitian_units(d) {
        imgs.push(matcore::hermitian_part(&fixed.apply(&h)?));
    }
    Ok(hermitian_basis(&imgs, tol.spec.max(1e-9)))
}

/// Orthonormal Hermitian basis of `d × d` matrices.
pub(crate) fn hermitian_units(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..d {
        for j in i..d {
            let mut m = CMat::zeros(d, d);
            if i == j {
                m[(i, i)] = cx(1.0, 0.0);
                out.push(m);
            } else {
                m[(i, j)] = cx(s, 0.0);
                m[(j, i)] = cx(s, 0.0);
                out.push(m.clone());
                m[(i, j)] = cx(0.0, -s);
                m[(j, i)] = cx(0.0, s);
                out.push(m);
            }
        }
    }
    out
}

/// PSD fixed point with a vanishing eigenvalue, if one exists.
///
/// With two or more independent fixed points, `A = X − λ_min(ρ₀^{-1/2} X ρ₀^{-1/2}) ρ₀`
/// for a Hermitian fixed `X` not proportional to `ρ₀`.
pub fn semipositive_fixed_point(ch: &Channel, tol: &Tolerances) -> Result<Option<CMat>> {
    let proj = projectors(ch, tol)?;
    let d = ch.dim();
    let rho0 = max_fixed_point_from(&proj.fixed, d)?;
    let basis = fixed_basis_from(&proj.fixed, d, tol)?;
    let info = psd_utils(&rho0, tol.pos)?;
    if basis.len() <= 1 {
        return Ok(if info.min_eig <= tol.pos { Some(rho0) } else { None });
    }
    // the basis element least aligned with ρ₀
    let r0n = matcore::frobenius(&rho0);
    let x = basis
        .iter()
        .map(|b| {
            let ov = matcore::trace(&(&rho0 * b)).re / (r0n * r0n);
            b - &rho0 * cx(ov, 0.0)
        })
        .max_by(|a, b| matcore::frobenius(a).partial_cmp(&matcore::frobenius(b)).unwrap_or(std::cmp::Ordering::Equal))
        .expect("non-empty basis");
    let xnorm = matcore::frobenius(&x);
    if xnorm < 1e-9 {
        return Err(Error::IllConditioned("fixed-space basis collapses onto ρ₀".into()));
    }
    let x = x.unscale(xnorm);
    let w = &info.inv_sqrt_on_support * &x * &info.inv_sqrt_on_support;
    // restrict the congruence to supp ρ₀
    let v = support_isometry(&rho0, tol.pos)?;
    let wk = matcore::hermitian_part(&(v.adjoint() * w * &v));
    let (vals, _) = hermitian_eigh(&wk)?;
    let a = matcore::hermitian_part(&(x - &rho0 * cx(vals[0], 0.0)));
    let tr = matcore::trace(&a).re;
    if tr <= 0.0 {
        return Err(Error::IllConditioned("semipositive construction produced zero trace".into()));
    }
    Ok(Some(a.unscale(tr)))
}

/// Columns spanning the support of a PSD matrix (eigenvalues above `tol`).
pub(crate) fn support_isometry(rho: &CMat, tol: f64) -> Result<CMat> {
    let (vals, vecs) = hermitian_eigh(&matcore::hermitian_part(rho))?;
    let keep: Vec<usize> = (0..vals.len()).filter(|&k| vals[k] > tol).collect();
    let mut v = CMat::zeros(rho.nrows(), keep.len());
    for (c, &k) in keep.iter().enumerate() {
        v.set_column(c, &vecs.column(k));
    }
    Ok(v)
}

#[derive(Clone, Debug)]
pub struct Restriction {
    /// Projector onto the support `K` of the maximal fixed point.
    pub projector: CMat,
    /// `d × r` isometry onto `K`.
    pub isometry: CMat,
    /// `x ↦ V† φ(V x V†) V` on `r × r` matrices.
    pub channel: Channel,
    pub leakage: f64,
}

pub fn restrict_to_support(ch: &Channel, tol: &Tolerances) -> Result<Restriction> {
    let rho0 = max_fixed_point(ch, tol)?;
    restrict_to(ch, &support_isometry(&rho0, tol.pos)?)
}

/// Compresses `ch` to the range of the isometry `v`, checking that inputs
/// supported there produce outputs supported there.
pub(crate) fn restrict_to(ch: &Channel, v: &CMat) -> Result<Restriction> {
    let d = ch.dim();
    let r = v.ncols();
    if r == 0 {
        return Err(Error::IllConditioned("empty support".into()));
    }
    let p = v * v.adjoint();
    let q = CMat::identity(d, d) - &p;
    let mut s = CMat::zeros(r * r, r * r);
    let mut leakage = 0.0_f64;
    for j in 0..r {
        for i in 0..r {
            let x = v.column(i) * v.column(j).adjoint();
            let y = ch.apply(&x)?;
            leakage = leakage.max(matcore::frobenius(&(&q * &y * &q)));
            s.set_column(i + r * j, &matcore::vec_of(&(v.adjoint() * y * v)));
        }
    }
    if leakage > 1e-8 {
        return Err(Error::Consistency(format!("restriction leaks out of the support (‖(1−P)φ(PXP)(1−P)‖ = {leakage:e})")));
    }
    Ok(Restriction { projector: p, isometry: v.clone(), channel: Channel::from_super(&s)?, leakage })
}

/// Eigenmatrices of the peripheral spectrum.
#[derive(Clone, Debug)]
pub struct PhaseBasis {
    pub matrices: Vec<CMat>,
    pub eigphases: Vec<C64>,
}

impl PhaseBasis {
    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    /// Hermitian basis of the same span.
    pub fn hermitian_span(&self, tol: f64) -> Vec<CMat> {
        hermitian_basis(&self.matrices, tol)
    }
}

pub fn phase_basis(ch: &Channel, tol: &Tolerances) -> Result<PhaseBasis> {
    let es = eigensystem(ch, tol)?;
    let d = ch.dim();
    let mut matrices = Vec::new();
    let mut eigphases = Vec::new();
    for c in es.clusters.iter().filter(|c| c.value.norm() >= 1.0 - tol.peri) {
        if !c.is_semisimple() {
            return Err(Error::IllConditioned(format!("peripheral eigenvalue {} is defective", c.value)));
        }
        for k in 0..c.right.ncols() {
            let z = matcore::unvec(c.right.column(k).as_slice(), d);
            let n = matcore::frobenius(&z);
            matrices.push(z.unscale(n));
            eigphases.push(c.value);
        }
    }
    Ok(PhaseBasis { matrices, eigphases })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::{amplitude_damping, depolarize_to, identity_channel, phi_minus, random_cptp, random_unitary, unitary_channel};

    fn t() -> Tolerances {
        Tolerances::default()
    }

    fn ket0() -> CMat {
        let mut m = CMat::zeros(2, 2);
        m[(0, 0)] = cx(1.0, 0.0);
        m
    }

    #[test]
    fn unitary_qubit_spectrum() {
        let th = 0.7_f64;
        let u = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(0.0, -th / 2.0).exp(), cx(0.0, th / 2.0).exp()]));
        let rep = spectrum(&unitary_channel(&u).unwrap(), &t()).unwrap();
        assert_eq!(rep.multiplicity_of(cx(1.0, 0.0), 1e-9), 2);
        assert_eq!(rep.multiplicity_of(cx(th.cos(), th.sin()), 1e-9), 1);
        assert_eq!(rep.multiplicity_of(cx(th.cos(), -th.sin()), 1e-9), 1);
        assert_eq!(rep.peripheral_count(), 4);
    }

    #[test]
    fn amplitude_damping_spectrum_and_projectors() {
        let p = 0.36;
        let ad = amplitude_damping(p).unwrap();
        let rep = spectrum(&ad, &t()).unwrap();
        assert_eq!(rep.multiplicity_of(cx(1.0, 0.0), 1e-9), 1);
        assert_eq!(rep.multiplicity_of(cx(0.6, 0.0), 1e-9), 2);
        assert_eq!(rep.multiplicity_of(cx(p, 0.0), 1e-9), 1);
        let want = depolarize_to(&ket0()).unwrap();
        let pr = projectors(&ad, &t()).unwrap();
        assert!(pr.peripheral.distance(&want) < 1e-10);
        assert!(pr.fixed.distance(&want) < 1e-10);
        assert!((max_fixed_point(&ad, &t()).unwrap() - ket0()).norm() < 1e-10);
        let r = restrict_to_support(&ad, &t()).unwrap();
        assert_eq!(r.channel.dim(), 1);
    }

    #[test]
    fn replacement_spectrum() {
        let rho = crate::channels::random_density(3, 1);
        let rep = spectrum(&depolarize_to(&rho).unwrap(), &t()).unwrap();
        assert_eq!(rep.multiplicity_of(cx(1.0, 0.0), 1e-9), 1);
        assert_eq!(rep.zero_amult, 8);
        assert!((max_fixed_point(&depolarize_to(&rho).unwrap(), &t()).unwrap() - &rho).norm() < 1e-10);
    }

    #[test]
    fn phi_minus_projectors() {
        let ch = phi_minus(0.5, 0.0).unwrap();
        let pr = projectors(&ch, &t()).unwrap();
        assert_eq!(matcore::rank(pr.peripheral.superop(), 1e-9).unwrap(), 2);
        assert!(pr.inverse_phase.compose(&ch).unwrap().distance(&pr.peripheral) < 1e-8);
        assert!(ch.compose(&pr.inverse_phase).unwrap().distance(&pr.peripheral) < 1e-8);
        assert_eq!(matcore::rank(pr.fixed.superop(), 1e-9).unwrap(), 1);
        let half = CMat::identity(2, 2) * cx(0.5, 0.0);
        assert!((pr.fixed.apply(&ket0()).unwrap() - half).norm() < 1e-10);
        let pb = phase_basis(&ch, &t()).unwrap();
        assert_eq!(pb.len(), 2);
    }

    #[test]
    fn unitary_projectors() {
        let u = random_unitary(3, 5);
        let ch = unitary_channel(&u).unwrap();
        let pr = projectors(&ch, &t()).unwrap();
        assert!(pr.peripheral.distance(&identity_channel(3)) < 1e-8);
        assert!(pr.inverse_phase.distance(&unitary_channel(&u.adjoint()).unwrap()) < 1e-8);
        // the idempotent E_φ is its own phase inverse
        let ie = inverse_phase(&pr.peripheral, &t()).unwrap();
        assert!(ie.distance(&pr.peripheral) < 1e-8);
    }

    #[test]
    fn cesaro_matches_spectral() {
        let ad = amplitude_damping(0.5).unwrap();
        let out = cesaro_fixed_projector(&ad, 1e-10, 60, &t()).unwrap();
        assert!(out.converged);
        assert!(out.deviation < 1e-9, "{}", out.deviation);
        let id = cesaro_fixed_projector(&identity_channel(2), 1e-10, 10, &t()).unwrap();
        assert!(id.projector.distance(&identity_channel(2)) < 1e-12);
    }

    #[test]
    fn semipositive_cases() {
        let ad = amplitude_damping(0.3).unwrap();
        let a = semipositive_fixed_point(&ad, &t()).unwrap().unwrap();
        assert!((a - ket0()).norm() < 1e-9);
        let mixed = CMat::identity(2, 2) * cx(0.5, 0.0);
        assert!(semipositive_fixed_point(&depolarize_to(&mixed).unwrap(), &t()).unwrap().is_none());
        // U with a degenerate eigenvalue: several fixed points
        let u = CMat::from_diagonal(&nalgebra::DVector::from_vec(vec![cx(1.0, 0.0), cx(1.0, 0.0), cx(0.0, 1.0)]));
        let ch = unitary_channel(&u).unwrap();
        let a = semipositive_fixed_point(&ch, &t()).unwrap().unwrap();
        let (vals, _) = hermitian_eigh(&a).unwrap();
        assert!(vals[0] <= 1e-9 && vals[0] >= -1e-9);
        assert!((ch.apply(&a).unwrap() - &a).norm() < 1e-9);
    }

    #[test]
    fn random_channels_obey_laws() {
        for seed in 0..20 {
            let ch = random_cptp(2 + (seed as usize % 2), 2, seed).unwrap();
            let rep = spectrum(&ch, &t()).unwrap();
            assert!(rep.contraction_ok && rep.peripheral_jordan_trivial);
            assert_eq!(rep.total(), ch.dim() * ch.dim());
            let pr = projectors(&ch, &t()).unwrap();
            assert!(pr.peripheral.is_cptp());
            let r = restrict_to_support(&ch, &t()).unwrap();
            assert!(r.channel.is_cptp());
        }
    }

    #[test]
    fn tiny_gap_falls_back_to_powers() {
        let ch = crate::channels::depolarizing(2, 1.0 - 1e-7).unwrap();
        let p = projectors(&ch, &t()).unwrap();
        assert_eq!(p.method, ProjectorMethod::LimitOfPowers);
        assert!(p.warning.is_some());
        let target = depolarize_to(&(CMat::identity(2, 2) * cx(0.5, 0.0))).unwrap();
        assert!(p.peripheral.distance(&target) < 1e-8, "{} {:?}", p.peripheral.distance(&target), p.warning);
        assert!(p.fixed.distance(&target) < 1e-8);
    }

    #[test]
    fn rational_approximations() {
        assert_eq!(rational_approx(0.5, 1000), (1, 2));
        assert_eq!(rational_approx(1.0 / 3.0, 1000), (1, 3));
        assert_eq!(rational_approx(0.0, 1000), (0, 1));
        let (p, q) = rational_approx(std::f64::consts::PI - 3.0, 1000);
        assert_eq!((p, q), (16, 113));
    }
}
