use crate::matcore;
use crate::{cx, CMat, Error, Result};

use super::{check_density, Channel, HolevoForm, Provenance, SourceRepr};

fn family(ch: Channel, name: &str, params: &[(&str, f64)]) -> Channel {
    ch.with_provenance(Provenance::Family { name: name.to_string(), params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect() })
}

/// Builds a superoperator column by column from the action on matrix units.
pub(crate) fn from_action(d: usize, f: impl Fn(usize, usize) -> CMat) -> Channel {
    let mut s = CMat::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            s.set_column(i + d * j, &matcore::vec_of(&f(i, j)));
        }
    }
    Channel::with_superop(d, s, SourceRepr::Super)
}

pub(crate) fn unit(d: usize, i: usize, j: usize) -> CMat {
    let mut e = CMat::zeros(d, d);
    e[(i, j)] = cx(1.0, 0.0);
    e
}

pub(crate) fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    matcore::frobenius(&(u.adjoint() * u - CMat::identity(n, n)))
}

pub fn identity_channel(d: usize) -> Channel {
    Channel::with_superop(d, CMat::identity(d * d, d * d), SourceRepr::Super).with_provenance(Provenance::Unitary(CMat::identity(d, d)))
}

/// `X ↦ U X U†`.
pub fn unitary_channel(u: &CMat) -> Result<Channel> {
    if u.nrows() != u.ncols() || u.nrows() == 0 {
        return Err(Error::Shape("unitary must be a non-empty square matrix".into()));
    }
    let res = unitarity_residual(u);
    if !res.is_finite() || res > 1e-10 {
        return Err(Error::InvalidParameter(format!("matrix is not unitary (‖U†U − 1‖_F = {res:e})")));
    }
    Ok(Channel::from_kraus(std::slice::from_ref(u))?.with_provenance(Provenance::Unitary(u.clone())))
}

/// Measure-and-prepare channel; carries its form as an entanglement-breaking certificate.
pub fn holevo_channel(h: &HolevoForm) -> Result<Channel> {
    h.validate(1e-10)?;
    Ok(Channel::with_superop(h.dim(), h.superop(), SourceRepr::Super).with_provenance(Provenance::Holevo(h.clone())))
}

/// Replacement channel `X ↦ ρ₀ Tr X`.
pub fn depolarize_to(rho: &CMat) -> Result<Channel> {
    if rho.nrows() != rho.ncols() {
        return Err(Error::Shape("ρ₀ must be square".into()));
    }
    check_density(rho, 1e-10)?;
    let d = rho.nrows();
    holevo_channel(&HolevoForm { states: vec![rho.clone()], effects: vec![CMat::identity(d, d)] })
}

/// `X ↦ λ X + (1 − λ) Tr[X] 1/d`, CPTP for `−1/(d²−1) ≤ λ ≤ 1`.
pub fn depolarizing(d: usize, lambda: f64) -> Result<Channel> {
    if d == 0 {
        return Err(Error::Shape("d must be positive".into()));
    }
    let lo = -1.0 / ((d * d) as f64 - 1.0).max(1.0);
    if !(lambda.is_finite() && (lo..=1.0).contains(&lambda)) {
        return Err(Error::InvalidParameter(format!("depolarizing parameter needs {lo} ≤ λ ≤ 1, got {lambda}")));
    }
    let df = d as f64;
    let ch = from_action(d, |i, j| {
        let mut out = unit(d, i, j) * cx(lambda, 0.0);
        if i == j {
            out += CMat::identity(d, d) * cx((1.0 - lambda) / df, 0.0);
        }
        out
    });
    Ok(family(ch, "depolarizing", &[("d", df), ("lambda", lambda)]))
}

/// Transposition `X ↦ Xᵀ`: positive and trace preserving but not CP.
pub fn transpose_map(d: usize) -> Channel {
    family(from_action(d, |i, j| unit(d, j, i)), "transpose", &[("d", d as f64)])
}

/// Qubit amplitude damping with survival probability `p` of the excited population.
pub fn amplitude_damping(p: f64) -> Result<Channel> {
    if !(p.is_finite() && (0.0..=1.0).contains(&p)) {
        return Err(Error::InvalidParameter(format!("amplitude damping needs 0 ≤ p ≤ 1, got {p}")));
    }
    let sp = p.sqrt();
    let ch = from_action(2, |i, j| match (i, j) {
        (0, 0) => unit(2, 0, 0),
        (1, 1) => unit(2, 0, 0) * cx(1.0 - p, 0.0) + unit(2, 1, 1) * cx(p, 0.0),
        _ => unit(2, i, j) * cx(sp, 0.0),
    });
    Ok(family(ch, "amplitude_damping", &[("p", p)]))
}

/// Qubit family fixing `|0⟩⟨0|`:
/// `[[a, b], [b*, c]] ↦ [[a + (1−μ)c, λe^{iθ}b − αc], [λe^{−iθ}b* − αc, μc]]`.
pub fn phi_plus(lambda: f64, theta: f64, alpha: f64, mu: f64) -> Result<Channel> {
    if ![lambda, theta, alpha, mu].iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("phi_plus needs 0 < λ ≤ 1, got λ = {lambda}")));
    }
    if !(lambda * lambda <= mu + 1e-12 && mu <= 1.0) {
        return Err(Error::InvalidParameter(format!("phi_plus needs λ² ≤ μ ≤ 1, got λ² = {}, μ = {mu}", lambda * lambda)));
    }
    if alpha < 0.0 {
        return Err(Error::InvalidParameter(format!("phi_plus needs α ≥ 0, got {alpha}")));
    }
    let bound = (1.0 - mu) * (mu - lambda * lambda);
    if alpha * alpha > bound + 1e-12 {
        return Err(Error::InvalidParameter(format!("phi_plus needs α² ≤ (1−μ)(μ−λ²): {} > {bound}", alpha * alpha)));
    }
    let ph = cx(theta.cos(), theta.sin());
    let ch = from_action(2, |i, j| match (i, j) {
        (0, 0) => unit(2, 0, 0),
        (0, 1) => unit(2, 0, 1) * (ph * lambda),
        (1, 0) => unit(2, 1, 0) * (ph.conj() * lambda),
        _ => {
            let mut out = unit(2, 0, 0) * cx(1.0 - mu, 0.0) + unit(2, 1, 1) * cx(mu, 0.0);
            out[(0, 1)] = cx(-alpha, 0.0);
            out[(1, 0)] = cx(-alpha, 0.0);
            out
        }
    });
    Ok(family(ch, "phi_plus", &[("lambda", lambda), ("theta", theta), ("alpha", alpha), ("mu", mu)]))
}

/// Qubit family swapping the poles: `[[a, b], [b*, c]] ↦ [[c, λe^{−iθ}b*], [λe^{iθ}b, a]]`.
pub fn phi_minus(lambda: f64, theta: f64) -> Result<Channel> {
    if !(lambda.is_finite() && theta.is_finite()) {
        return Err(Error::NonFinite);
    }
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::InvalidParameter(format!("phi_minus needs 0 < λ ≤ 1, got λ = {lambda}")));
    }
    let ph = cx(theta.cos(), theta.sin());
    let ch = from_action(2, |i, j| match (i, j) {
        (0, 0) => unit(2, 1, 1),
        (1, 1) => unit(2, 0, 0),
        (0, 1) => unit(2, 1, 0) * (ph * lambda),
        _ => unit(2, 0, 1) * (ph.conj() * lambda),
    });
    Ok(family(ch, "phi_minus", &[("lambda", lambda), ("theta", theta)]))
}

/// One block `M_{d1} ⊗ ρ₂` of a simple-AES channel.
#[derive(Clone, Debug)]
pub struct AesBlock {
    pub d1: usize,
    pub d2: usize,
    pub rho: CMat,
}

/// Generator data: blocks laid out consecutively, block `i` receiving the
/// (partially traced) input block `perm[i]` rotated by `unitaries[i]`.
#[derive(Clone, Debug)]
pub struct SimpleAesData {
    pub blocks: Vec<AesBlock>,
    pub unitaries: Vec<CMat>,
    pub perm: Vec<usize>,
}

/// Expected eigenvalue counts of a simple-AES channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AesCensus {
    pub unit_modulus: usize,
    pub zeros_first_kind: usize,
    pub zeros_second_kind: usize,
}

impl SimpleAesData {
    pub fn dim(&self) -> usize {
        self.blocks.iter().map(|b| b.d1 * b.d2).sum()
    }

    pub fn offsets(&self) -> Vec<usize> {
        let mut off = Vec::with_capacity(self.blocks.len());
        let mut acc = 0;
        for b in &self.blocks {
            off.push(acc);
            acc += b.d1 * b.d2;
        }
        off
    }

    /// Isometry `d × (d1·d2)` embedding block `i`; internal index `α·d2 + β`.
    pub fn embedding(&self, i: usize) -> CMat {
        let off = self.offsets()[i];
        let n = self.blocks[i].d1 * self.blocks[i].d2;
        let mut w = CMat::zeros(self.dim(), n);
        for k in 0..n {
            w[(off + k, k)] = cx(1.0, 0.0);
        }
        w
    }

    pub fn projector(&self, i: usize) -> CMat {
        let w = self.embedding(i);
        &w * w.adjoint()
    }

    pub fn census(&self) -> AesCensus {
        let unit_modulus = self.blocks.iter().map(|b| b.d1 * b.d1).sum();
        let zeros_first_kind = self.blocks.iter().map(|b| b.d1 * b.d1 * (b.d2 * b.d2 - 1)).sum();
        let sizes: Vec<usize> = self.blocks.iter().map(|b| b.d1 * b.d2).collect();
        let total: usize = sizes.iter().sum();
        let zeros_second_kind = total * total - sizes.iter().map(|s| s * s).sum::<usize>();
        AesCensus { unit_modulus, zeros_first_kind, zeros_second_kind }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.blocks.len();
        if n == 0 {
            return Err(Error::Shape("simple AES channel needs at least one block".into()));
        }
        if self.unitaries.len() != n || self.perm.len() != n {
            return Err(Error::Shape(format!(
                "{n} blocks but {} unitaries and a permutation of length {}",
                self.unitaries.len(),
                self.perm.len()
            )));
        }
        let mut seen = vec![false; n];
        for &p in &self.perm {
            if p >= n || seen[p] {
                return Err(Error::InvalidParameter(format!("{:?} is not a permutation of 0..{n}", self.perm)));
            }
            seen[p] = true;
        }
        for (i, b) in self.blocks.iter().enumerate() {
            if b.d1 == 0 || b.d2 == 0 {
                return Err(Error::Shape(format!("block {i} has a zero dimension")));
            }
            if b.rho.shape() != (b.d2, b.d2) {
                return Err(Error::Shape(format!("block {i}: ρ₂ must be {0}×{0}", b.d2)));
            }
            check_density(&b.rho, 1e-10)?;
            let u = &self.unitaries[i];
            if u.shape() != (b.d1, b.d1) {
                return Err(Error::Shape(format!("block {i}: U must be {0}×{0}", b.d1)));
            }
            let res = unitarity_residual(u);
            if res > 1e-10 {
                return Err(Error::InvalidParameter(format!("block {i}: U is not unitary ({res:e})")));
            }
            let j = self.perm[i];
            if self.blocks[j].d1 != b.d1 {
                return Err(Error::InvalidParameter(format!(
                    "permutation maps block {j} (d1 = {}) onto block {i} (d1 = {})",
                    self.blocks[j].d1, b.d1
                )));
            }
        }
        Ok(())
    }
}

/// `X ↦ ⊕_i U_i Tr₂[P_{π(i)} X P_{π(i)}] U_i† ⊗ ρ_i`.
pub fn simple_aes(data: SimpleAesData) -> Result<Channel> {
    data.validate()?;
    let d = data.dim();
    let off = data.offsets();
    // owner[p] = (block, α, β)
    let mut owner = Vec::with_capacity(d);
    for (k, b) in data.blocks.iter().enumerate() {
        for a in 0..b.d1 {
            for be in 0..b.d2 {
                owner.push((k, a, be));
            }
        }
    }
    let targets: Vec<Vec<usize>> =
        (0..data.blocks.len()).map(|j| (0..data.blocks.len()).filter(|&i| data.perm[i] == j).collect()).collect();
    let ch = from_action(d, |p, q| {
        let mut out = CMat::zeros(d, d);
        let (jp, ap, bp) = owner[p];
        let (jq, aq, bq) = owner[q];
        if jp != jq || bp != bq {
            return out;
        }
        for &i in &targets[jp] {
            let b = &data.blocks[i];
            let u = &data.unitaries[i];
            let m = u.column(ap) * u.column(aq).adjoint();
            let blk = matcore::kron(&m, &b.rho);
            let n = b.d1 * b.d2;
            let mut view = out.view_mut((off[i], off[i]), (n, n));
            view += blk;
        }
        out
    });
    Ok(ch.with_provenance(Provenance::SimpleAes(data)))
}
