//! Unitarity, direct n-index, entanglement-saving (ES) and asymptotically
//! entanglement-saving (AES) classification, plus diagnostics of the group of
//! limit points of the powers of a channel.

mod structure;

use serde::Serialize;

pub use structure::{fixed_structure, fixed_structure_seeded, FixedStructure, StructureBlock};

use crate::channels::{from_action, simple_aes, unit, unitarity_residual, AesBlock, CptpReport, HolevoForm, SimpleAesData};
use crate::entwit::{eb_verdict, EbStatus, EbVerdict};
use crate::matcore::{self, psd_utils};
use crate::qubit::{bloch_of, fix_or_invert, PureAction};
use crate::spectral::{self, max_fixed_point_from, phase_basis, ProjectorMethod};
use crate::{cx, CMat, Channel, Error, Result, Tolerances, C64};

pub const DEFAULT_N_MAX: u64 = 64;

fn require_cptp(ch: &Channel, tol: &Tolerances) -> Result<()> {
    let rep = ch.validate_cptp_with(tol);
    if !rep.cp {
        return Err(Error::NotCompletelyPositive(rep.min_choi_eig));
    }
    if !rep.tp {
        return Err(Error::InvalidParameter(format!("map is not trace preserving (residual {:e})", rep.tp_residual)));
    }
    Ok(())
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitaryCheck {
    pub unitary: bool,
    pub det_abs: f64,
    pub kraus_rank: usize,
    /// The Kraus operator when unitary, phase fixed so the largest entry is real positive.
    #[serde(skip)]
    pub u: Option<CMat>,
}

/// Unitarity through `|det S| ≥ 1 − 1e−8` and, independently, a single
/// unitary Kraus operator. Unitary channels are exactly the ones preserving
/// every entangled input.
pub fn is_unitary(ch: &Channel, tol: &Tolerances) -> Result<UnitaryCheck> {
    require_cptp(ch, tol)?;
    let det_abs = matcore::det(ch.superop())?.norm();
    let by_det = det_abs >= 1.0 - 1e-8;
    let kraus = ch.kraus()?;
    let kraus_rank = ch.kraus_rank(tol.pos)?;
    let by_kraus = kraus_rank == 1 && unitarity_residual(&kraus[0]) <= 1e-6;
    if by_det != by_kraus {
        return Err(Error::Consistency(format!("unitarity tests disagree: |det S| = {det_abs:.17e}, Kraus rank {kraus_rank}")));
    }
    let u = by_det.then(|| phase_fixed(&kraus[0]));
    Ok(UnitaryCheck { unitary: by_det, det_abs, kraus_rank, u })
}

fn phase_fixed(m: &CMat) -> CMat {
    let mut best = cx(1.0, 0.0);
    let mut big = -1.0;
    for z in m.iter() {
        if z.norm() > big + 1e-9 {
            big = z.norm();
            best = *z;
        }
    }
    m * (best.conj() / big)
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EsCertificate {
    /// `φⁿ` has a PSD fixed point with a zero eigenvalue.
    SemipositiveFixedPoint {
        power: u64,
        rank: usize,
        #[serde(skip)]
        matrix: CMat,
    },
    PeripheralCount {
        count: usize,
    },
    /// Qubit with `det M ≠ 0` fixing or inverting a pure state.
    QubitPureFixOrInvert {
        action: PureAction,
        bloch: [f64; 3],
        det: f64,
    },
    EbAtPower {
        n: u64,
    },
    /// Two noncommuting phase points make the channel AES, hence ES.
    NoncommutingPhasePoints {
        commutator: f64,
    },
    /// `ρ₀ > 0` and `σ_P = {1}`: the powers converge to `D_{ρ₀}`, which is EB with room to spare.
    StrictlyPositivePrimitive {
        min_eig: f64,
    },
    /// Qubit with `det M = 0` or no fixed/inverted pure state, and no EB power seen yet.
    QubitNeitherFixNorInvert {
        det: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EsStatus {
    Es,
    NotEs,
    Indeterminate,
}

#[derive(Clone, Debug, Serialize)]
pub struct EsVerdict {
    pub status: EsStatus,
    pub certificate: Option<EsCertificate>,
    /// `a_φ(0) < 2(d − 1)`.
    pub precondition_met: bool,
    pub zero_amult: usize,
    pub peripheral_count: usize,
    pub warning: Option<String>,
}

impl EsVerdict {
    pub fn is_es(&self) -> bool {
        self.status == EsStatus::Es
    }
}

fn first_eb_power(ch: &Channel, n_max: u64, tol: &Tolerances) -> Option<u64> {
    let mut cur = ch.clone();
    for n in 1..=n_max {
        if n > 1 {
            cur = ch.compose(&cur).expect("same dimension");
        }
        if eb_verdict(&cur, tol).is_eb() {
            return Some(n);
        }
    }
    None
}

/// Is some power of the channel guaranteed to keep entanglement alive?
///
/// Qubits are decided exactly. For `d > 2` the verdict is complete only when
/// the zero eigenvalue has algebraic multiplicity below `2(d − 1)`; outside
/// that class a few sufficient conditions are tried before giving up with
/// `Indeterminate`.
pub fn es_classify(ch: &Channel, tol: &Tolerances, n_max: u64) -> Result<EsVerdict> {
    require_cptp(ch, tol)?;
    let d = ch.dim();
    let rep = spectral::spectrum(ch, tol)?;
    let zero_amult = rep.zero_amult;
    let peripheral_count = rep.peripheral_count();
    let precondition_met = zero_amult < 2 * (d - 1);
    let verdict = |status, certificate, warning| EsVerdict {
        status,
        certificate: Some(certificate),
        precondition_met,
        zero_amult,
        peripheral_count,
        warning,
    };

    if d == 2 {
        let b = bloch_of(ch)?;
        let det = b.m.determinant();
        let fi = fix_or_invert(b);
        if det.abs() > tol.pos && fi.kind != PureAction::Neither {
            let bloch = fi.n.expect("fix or invert comes with a Bloch vector");
            return Ok(verdict(EsStatus::Es, EsCertificate::QubitPureFixOrInvert { action: fi.kind, bloch, det }, None));
        }
        return Ok(match first_eb_power(ch, n_max, tol) {
            Some(n) => verdict(EsStatus::NotEs, EsCertificate::EbAtPower { n }, None),
            None => verdict(EsStatus::NotEs, EsCertificate::QubitNeitherFixNorInvert { det }, None),
        });
    }

    if ch.holevo_certificate().is_some() {
        return Ok(verdict(EsStatus::NotEs, EsCertificate::EbAtPower { n: 1 }, None));
    }
    let proj = spectral::projectors(ch, tol)?;
    let rho0 = max_fixed_point_from(&proj.fixed, d)?;
    let min_eig = psd_utils(&rho0, tol.pos)?.min_eig;
    let primitive = min_eig > tol.pos && peripheral_count == 1;

    if precondition_met {
        for n in 1..=(2 * d) as u64 {
            if let Some(a) = spectral::semipositive_fixed_point(&ch.power(n), tol)? {
                let rank = matcore::rank(&a, tol.pos)?;
                let warning =
                    (n > d as u64).then(|| format!("semipositive fixed point first found at power {n}, beyond the expected bound {d}"));
                return Ok(verdict(EsStatus::Es, EsCertificate::SemipositiveFixedPoint { power: n, rank, matrix: a }, warning));
            }
        }
        if peripheral_count >= 2 {
            let warning = Some(format!("no semipositive fixed point found up to power {}", 2 * d));
            return Ok(verdict(EsStatus::Es, EsCertificate::PeripheralCount { count: peripheral_count }, warning));
        }
        return Ok(verdict(EsStatus::NotEs, EsCertificate::StrictlyPositivePrimitive { min_eig }, None));
    }

    if primitive {
        return Ok(verdict(EsStatus::NotEs, EsCertificate::StrictlyPositivePrimitive { min_eig }, None));
    }
    let commutator = max_phase_commutator(ch, tol)?;
    if commutator > tol.comm {
        return Ok(verdict(EsStatus::Es, EsCertificate::NoncommutingPhasePoints { commutator }, None));
    }
    Ok(EsVerdict {
        status: EsStatus::Indeterminate,
        certificate: None,
        precondition_met,
        zero_amult,
        peripheral_count,
        warning: Some(format!("a(0) = {zero_amult} ≥ 2(d−1) = {} and no sufficient condition applies", 2 * (d - 1))),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "n", rename_all = "snake_case")]
pub enum NIndexKind {
    Finite(u64),
    /// Every power below this one was certified not EB.
    AtLeast(u64),
    InfiniteCertified,
}

#[derive(Clone, Debug, Serialize)]
pub struct PowerVerdict {
    pub n: u64,
    pub verdict: EbVerdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct NIndexResult {
    pub kind: NIndexKind,
    pub evidence: Vec<PowerVerdict>,
    pub certificate: Option<EsCertificate>,
}

/// Smallest `n` with `φⁿ` entanglement breaking.
pub fn n_index(ch: &Channel, n_max: u64, tol: &Tolerances) -> Result<NIndexResult> {
    if n_max == 0 {
        return Err(Error::InvalidParameter("n_max must be at least 1".into()));
    }
    let es = es_classify(ch, tol, n_max)?;
    if es.is_es() {
        let mut evidence = Vec::new();
        let mut n = 1;
        while n <= n_max {
            evidence.push(PowerVerdict { n, verdict: eb_verdict(&ch.power(n), tol) });
            n *= 2;
        }
        return Ok(NIndexResult { kind: NIndexKind::InfiniteCertified, evidence, certificate: es.certificate });
    }
    let mut evidence = Vec::new();
    let mut lower = 1;
    let mut all_not_eb = true;
    let mut cur = ch.clone();
    for n in 1..=n_max {
        if n > 1 {
            cur = ch.compose(&cur)?;
        }
        let v = eb_verdict(&cur, tol);
        let status = v.status;
        evidence.push(PowerVerdict { n, verdict: v });
        match status {
            EbStatus::Eb if all_not_eb => {
                return Ok(NIndexResult { kind: NIndexKind::Finite(n), evidence, certificate: es.certificate });
            }
            EbStatus::Eb => {
                return Ok(NIndexResult { kind: NIndexKind::AtLeast(lower), evidence, certificate: es.certificate });
            }
            EbStatus::NotEb if all_not_eb => lower = n + 1,
            EbStatus::NotEb => {}
            EbStatus::Unknown => all_not_eb = false,
        }
    }
    Ok(NIndexResult { kind: NIndexKind::AtLeast(lower), evidence, certificate: es.certificate })
}

/// Largest `‖[Z_i, Z_j]‖_F` over pairs of normalized phase-space eigenmatrices.
pub fn max_phase_commutator(ch: &Channel, tol: &Tolerances) -> Result<f64> {
    let pb = phase_basis(ch, tol)?;
    let mut worst = 0.0_f64;
    for (i, a) in pb.matrices.iter().enumerate() {
        for b in &pb.matrices[i + 1..] {
            worst = worst.max(matcore::frobenius(&matcore::commutator(a, b)));
        }
    }
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AesStatus {
    Aes,
    NotAes,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AesRoute {
    NoncommutingPhasePoints,
    EphiEb,
    QubitUnitaryRule,
    PeripheralCountRule,
}

#[derive(Clone, Debug, Serialize)]
pub struct AesVerdict {
    pub status: AesStatus,
    pub route: AesRoute,
    pub max_commutator: f64,
    pub peripheral_count: usize,
    /// Verdict on the peripheral projector `E_φ`.
    pub e_verdict: EbVerdict,
    pub unitary: Option<bool>,
}

impl AesVerdict {
    pub fn is_aes(&self) -> bool {
        self.status == AesStatus::Aes
    }
}

/// Measure-and-prepare form of `E_φ` when its range is commutative.
fn commutative_holevo_form(ch: &Channel, e: &Channel, tol: &Tolerances) -> Option<HolevoForm> {
    let fs = fixed_structure(ch, tol).ok()?;
    if !fs.is_commutative() {
        return None;
    }
    let adj = e.adjoint();
    let mut states = Vec::new();
    let mut effects = Vec::new();
    for b in &fs.blocks {
        states.push(matcore::hermitian_part(&(&b.embedding * &b.rho * b.embedding.adjoint())));
        effects.push(matcore::hermitian_part(&adj.apply(&b.projector).ok()?));
    }
    let h = HolevoForm { states, effects };
    h.validate(1e-8).ok()?;
    let rebuilt = crate::channels::holevo_channel(&h).ok()?;
    (rebuilt.distance(e) <= 1e-8).then_some(h)
}

/// AES iff two phase-space eigenmatrices fail to commute, cross-checked
/// against the qubit rule (AES iff unitary), the peripheral count bound
/// (more than `d` peripheral eigenvalues forces AES) and the EB status of `E_φ`.
pub fn aes_classify(ch: &Channel, tol: &Tolerances) -> Result<AesVerdict> {
    require_cptp(ch, tol)?;
    let d = ch.dim();
    let max_commutator = max_phase_commutator(ch, tol)?;
    let by_comm = max_commutator > tol.comm;
    let peripheral_count = phase_basis(ch, tol)?.len();
    let e = spectral::peripheral_projector(ch, tol)?;
    let mut e_verdict = eb_verdict(&e, tol);
    if e_verdict.status == EbStatus::Unknown && !by_comm {
        if let Some(h) = commutative_holevo_form(ch, &e, tol) {
            e_verdict = eb_verdict(&e.clone().with_provenance(crate::Provenance::Holevo(h)), tol);
        }
    }
    let unitary = if d == 2 { Some(is_unitary(ch, tol)?.unitary) } else { None };

    let mut clashes = Vec::new();
    if let Some(u) = unitary {
        if u != by_comm {
            clashes.push(format!("qubit unitarity {u}"));
        }
    }
    if peripheral_count > d && !by_comm {
        clashes.push(format!("{peripheral_count} peripheral eigenvalues exceed d = {d}"));
    }
    if (e_verdict.is_not_eb() && !by_comm) || (e_verdict.is_eb() && by_comm) {
        clashes.push(format!("E_φ verdict {:?}", e_verdict.status));
    }
    if !clashes.is_empty() {
        return Err(Error::Consistency(format!(
            "AES routes disagree: commutator {max_commutator:.17e} (threshold {:e}) vs {}; ppt_min_eig(E_φ) = {:.17e}, reshuffling(E_φ) = {:.17e}",
            tol.comm,
            clashes.join(", "),
            e_verdict.ppt_min_eig,
            e_verdict.reshuffling_norm
        )));
    }
    let route = if by_comm {
        AesRoute::NoncommutingPhasePoints
    } else if e_verdict.is_eb() {
        AesRoute::EphiEb
    } else if d == 2 {
        AesRoute::QubitUnitaryRule
    } else {
        AesRoute::NoncommutingPhasePoints
    };
    let status = if by_comm { AesStatus::Aes } else { AesStatus::NotAes };
    Ok(AesVerdict { status, route, max_commutator, peripheral_count, e_verdict, unitary })
}

#[derive(Clone, Debug, Serialize)]
pub struct SampledLimit {
    pub power: u64,
    pub status: EbStatus,
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitGroupReport {
    pub method: ProjectorMethod,
    /// `‖E² − E‖_F`.
    pub idempotence: f64,
    /// `‖φ∘I − E‖_F` and `‖I∘φ − E‖_F`.
    pub inverse_right: f64,
    pub inverse_left: f64,
    pub e_cptp: CptpReport,
    pub i_cptp: CptpReport,
    pub e_verdict: EbVerdict,
    pub sampled: Vec<SampledLimit>,
    pub violations: Vec<String>,
    pub warning: Option<String>,
}

impl LimitGroupReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn check(&self) -> Result<()> {
        if self.ok() {
            Ok(())
        } else {
            Err(Error::Consistency(self.violations.join("; ")))
        }
    }
}

const LIMIT_TOL: f64 = 1e-7;

pub fn limit_group_diagnostics(ch: &Channel, tol: &Tolerances) -> Result<LimitGroupReport> {
    require_cptp(ch, tol)?;
    let proj = spectral::projectors(ch, tol)?;
    let e = &proj.peripheral;
    let inv = &proj.inverse_phase;
    let es = e.superop();
    let idempotence = matcore::frobenius(&(es * es - es));
    let inverse_right = matcore::frobenius(&(ch.superop() * inv.superop() - es));
    let inverse_left = matcore::frobenius(&(inv.superop() * ch.superop() - es));
    let e_cptp = e.validate_cptp_with(tol);
    let i_cptp = inv.validate_cptp_with(tol);
    let e_verdict = eb_verdict(e, tol);

    let mut violations = Vec::new();
    for (name, v) in [("E∘E = E", idempotence), ("φ∘I = E", inverse_right), ("I∘φ = E", inverse_left)] {
        if v > LIMIT_TOL {
            violations.push(format!("{name} violated by {v:e}"));
        }
    }
    if !(e_cptp.cp && e_cptp.tp) {
        violations.push(format!("E_φ is not CPTP (min Choi eigenvalue {:e})", e_cptp.min_choi_eig));
    }
    if !(i_cptp.cp && i_cptp.tp) {
        violations.push(format!("I_φ is not CPTP (min Choi eigenvalue {:e})", i_cptp.min_choi_eig));
    }

    let mut sampled = Vec::new();
    if e_verdict.is_eb() {
        // past this power the transient part is below 1e-13
        let gap = spectral::spectrum(ch, tol)?.gap;
        let start = if gap >= 1.0 { 1 } else { ((30.0 / -(1.0 - gap).ln()).ceil() as u64).clamp(1, 1 << 40) };
        let mut cur = ch.power(start);
        for k in 0..4 {
            if k > 0 {
                cur = ch.compose(&cur)?;
            }
            let status = eb_verdict(&cur, tol).status;
            if status == EbStatus::NotEb {
                violations.push(format!("E_φ is EB but the limit point φ^{} is not", start + k));
            }
            sampled.push(SampledLimit { power: start + k, status });
        }
    }
    Ok(LimitGroupReport {
        method: proj.method,
        idempotence,
        inverse_right,
        inverse_left,
        e_cptp,
        i_cptp,
        e_verdict,
        sampled,
        violations,
        warning: proj.warning,
    })
}

/// Smallest `n ≤ d` for which the eigenvalue 1 of `φⁿ` is degenerate; `None`
/// when the channel has a single peripheral eigenvalue.
pub fn power_multiplicity_scan(ch: &Channel, tol: &Tolerances) -> Result<Option<u64>> {
    if spectral::spectrum(ch, tol)?.peripheral_count() < 2 {
        return Ok(None);
    }
    let near = tol.spec.max(tol.peri);
    for n in 1..=ch.dim() as u64 {
        if spectral::spectrum(&ch.power(n), tol)?.multiplicity_of(cx(1.0, 0.0), near) > 1 {
            return Ok(Some(n));
        }
    }
    Err(Error::Consistency(format!("no power up to {} has a degenerate eigenvalue 1", ch.dim())))
}

/// One cycle of `period` blocks carrying the diagonal phases `phases`.
#[derive(Clone, Debug)]
pub struct PeripheralCycle {
    pub period: usize,
    pub phases: Vec<C64>,
}

/// Channel whose peripheral spectrum is `{ω_α ω_β* e^{2πi m/n}}` over the
/// given cycles, with every other eigenvalue zero. Dimensions left over in
/// `d` are sent to the first basis state.
pub fn peripheral_channel_from_data(cycles: &[PeripheralCycle], d: Option<usize>) -> Result<Channel> {
    if cycles.is_empty() {
        return Err(Error::InvalidParameter("at least one cycle is needed".into()));
    }
    let mut blocks = Vec::new();
    let mut unitaries = Vec::new();
    let mut perm = Vec::new();
    for (k, c) in cycles.iter().enumerate() {
        if c.period == 0 || c.phases.is_empty() {
            return Err(Error::InvalidParameter(format!("cycle {k} is empty")));
        }
        if let Some(w) = c.phases.iter().find(|w| (w.norm() - 1.0).abs() > 1e-10) {
            return Err(Error::InvalidParameter(format!("cycle {k}: phase {w} is not of unit modulus")));
        }
        let u = CMat::from_diagonal(&nalgebra::DVector::from_vec(c.phases.clone()));
        let base = blocks.len();
        for m in 0..c.period {
            blocks.push(AesBlock { d1: c.phases.len(), d2: 1, rho: CMat::identity(1, 1) });
            unitaries.push(u.clone());
            perm.push(base + (m + c.period - 1) % c.period);
        }
    }
    let inner = simple_aes(SimpleAesData { blocks, unitaries, perm })?;
    let used = inner.dim();
    let d = d.unwrap_or(used);
    if used > d {
        return Err(Error::InvalidParameter(format!("cycles need dimension {used} but only {d} is available")));
    }
    if used == d {
        return Ok(inner);
    }
    let sink = unit(d, 0, 0);
    let padded = from_action(d, |i, j| {
        if i < used && j < used {
            let y = inner.apply(&unit(used, i, j)).expect("dimension checked");
            let mut out = CMat::zeros(d, d);
            out.view_mut((0, 0), (used, used)).copy_from(&y);
            out
        } else if i == j {
            sink.clone()
        } else {
            CMat::zeros(d, d)
        }
    });
    Ok(padded)
}
