//! Block decomposition of the phase subspace.
//!
//! The fixed algebra of the adjoint restricted peripheral projector is split
//! into factors `M_{d1} ⊗ 1_{d2}`; the channel then acts on the phase
//! subspace by permuting blocks and conjugating the first factor.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::channels::{unit, unitarity_residual};
use crate::matcore::{self, cluster_values, hermitian_basis, hermitian_eigh, nullspace, partial_trace, Side};
use crate::spectral::{self, hermitian_units, max_fixed_point_from, restrict_to, support_isometry};
use crate::{cx, CMat, Channel, Error, Result, Tolerances};

const DEFAULT_SEED: u64 = 0x5eed_b10c;
const MAX_ATTEMPTS: u64 = 5;
const CLOSURE_TOL: f64 = 1e-7;
const RECONSTRUCTION_TOL: f64 = 1e-6;

#[derive(Clone, Debug, Serialize)]
pub struct StructureBlock {
    pub d1: usize,
    pub d2: usize,
    /// The fixed state carried on the second factor.
    #[serde(skip)]
    pub rho: CMat,
    /// `d × d` projector onto the block.
    #[serde(skip)]
    pub projector: CMat,
    /// `d × (d1·d2)` isometry; column `α·d2 + β` is `f_α ⊗ g_β`.
    #[serde(skip)]
    pub embedding: CMat,
}

#[derive(Clone, Debug)]
pub struct FixedStructure {
    /// Dimension of the support `K` of `E_φ(1)`.
    pub k_dim: usize,
    pub support: CMat,
    pub blocks: Vec<StructureBlock>,
    /// Block `i` receives block `perm[i]`.
    pub perm: Vec<usize>,
    /// Each `U_i` is fixed up to a global phase; the largest entry is made real positive.
    pub unitaries: Vec<CMat>,
    pub closure_residual: f64,
    pub reconstruction_residual: f64,
    pub seed: u64,
}

impl FixedStructure {
    pub fn block_dim_sum(&self) -> usize {
        self.blocks.iter().map(|b| b.d1 * b.d2).sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.blocks.iter().all(|b| b.d1 == 1)
    }

    /// Prediction `⊕_i U_i X_{π(i),1} U_i† ⊗ ρ_i` for an input built on block `j`.
    pub fn predict(&self, j: usize, x: &CMat) -> CMat {
        let d = self.support.nrows();
        let mut out = CMat::zeros(d, d);
        for (i, b) in self.blocks.iter().enumerate().filter(|(i, _)| self.perm[*i] == j) {
            let u = &self.unitaries[i];
            let inner = matcore::kron(&(u * x * u.adjoint()), &b.rho);
            out += &b.embedding * inner * b.embedding.adjoint();
        }
        out
    }
}

pub fn fixed_structure(ch: &Channel, tol: &Tolerances) -> Result<FixedStructure> {
    fixed_structure_seeded(ch, tol, DEFAULT_SEED)
}

pub fn fixed_structure_seeded(ch: &Channel, tol: &Tolerances, seed: u64) -> Result<FixedStructure> {
    let proj = spectral::projectors(ch, tol)?;
    let e = &proj.peripheral;
    let d = ch.dim();
    let rho_e = max_fixed_point_from(e, d)?;
    let v = support_isometry(&rho_e, tol.pos)?;
    let restricted = restrict_to(e, &v)?;
    let r = v.ncols();

    let adj = restricted.channel.adjoint();
    let mut imgs = Vec::with_capacity(r * r);
    for h in hermitian_units(r) {
        imgs.push(matcore::hermitian_part(&adj.apply(&h)?));
    }
    let algebra = hermitian_basis(&imgs, 1e-8);
    let closure_residual = closure(&algebra);
    if closure_residual > CLOSURE_TOL {
        return Err(Error::Structure { stage: "closure", detail: format!("product residual {closure_residual:e}") });
    }

    let mut last = None;
    for attempt in 0..MAX_ATTEMPTS {
        let s = seed.wrapping_add(attempt);
        match decompose(ch, &restricted.channel, &v, &algebra, s) {
            Ok((blocks, perm, unitaries, reconstruction_residual)) => {
                return Ok(FixedStructure {
                    k_dim: r,
                    support: v,
                    blocks,
                    perm,
                    unitaries,
                    closure_residual,
                    reconstruction_residual,
                    seed: s,
                })
            }
            Err(err) => last = Some(err),
        }
    }
    Err(last.expect("at least one attempt"))
}

/// Largest distance of a pairwise product from the span of the basis.
fn closure(basis: &[CMat]) -> f64 {
    let mut worst = 0.0_f64;
    for a in basis {
        for b in basis {
            let p = a * b;
            let mut proj = CMat::zeros(p.nrows(), p.ncols());
            for e in basis {
                proj += e * matcore::trace(&(e * &p));
            }
            worst = worst.max(matcore::frobenius(&(p - proj)));
        }
    }
    worst
}

fn real_normal(rng: &mut ChaCha8Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn combine(basis: &[CMat], coeffs: impl Iterator<Item = crate::C64>) -> CMat {
    let n = basis[0].nrows();
    basis.iter().zip(coeffs).fold(CMat::zeros(n, n), |acc, (b, w)| acc + b * w)
}

/// Groups eigenvectors of a Hermitian matrix by eigenvalue.
fn eigenspaces(h: &CMat) -> Result<Vec<CMat>> {
    let (vals, vecs) = hermitian_eigh(h)?;
    let scale = vals.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let as_complex: Vec<_> = vals.iter().map(|&v| cx(v, 0.0)).collect();
    let groups = cluster_values(&as_complex, 1e-6 * scale);
    Ok(groups
        .into_iter()
        .map(|(_, idx)| {
            let mut m = CMat::zeros(h.nrows(), idx.len());
            for (c, &k) in idx.iter().enumerate() {
                m.set_column(c, &vecs.column(k));
            }
            m
        })
        .collect())
}

type Decomposition = (Vec<StructureBlock>, Vec<usize>, Vec<CMat>, f64);

fn decompose(ch: &Channel, restricted: &Channel, v: &CMat, algebra: &[CMat], seed: u64) -> Result<Decomposition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = v.ncols();
    let m = algebra.len();
    let fail = |stage: &'static str, detail: String| Error::Structure { stage, detail };

    // center: coefficient vectors whose combination commutes with every basis element
    let mut stacked = CMat::zeros(m * r * r, m);
    for (j, bj) in algebra.iter().enumerate() {
        for (k, bk) in algebra.iter().enumerate() {
            let cm = matcore::vec_of(&matcore::commutator(bj, bk));
            stacked.view_mut((k * r * r, j), (r * r, 1)).copy_from(&cm);
        }
    }
    let center = nullspace(&stacked, 1e-7)?;
    let z = center.ncols();
    if z == 0 {
        return Err(fail("center", "algebra has a trivial center".into()));
    }
    // real and imaginary parts of central coefficient vectors are central too
    let (a, b): (Vec<f64>, Vec<f64>) = (0..z).map(|_| (real_normal(&mut rng), real_normal(&mut rng))).unzip();
    let coeffs: Vec<f64> = (0..m).map(|j| (0..z).map(|c| center[(j, c)].re * a[c] + center[(j, c)].im * b[c]).sum()).collect();
    let central = matcore::hermitian_part(&combine(algebra, coeffs.iter().map(|&w| cx(w, 0.0))));
    let coarse = eigenspaces(&central)?;
    if coarse.len() != z {
        return Err(fail("center", format!("{} eigenspaces for a center of dimension {z}", coarse.len())));
    }

    let mut blocks = Vec::with_capacity(z);
    for y in &coarse {
        let n = y.ncols();
        let compressed: Vec<CMat> = algebra.iter().map(|b| y.adjoint() * b * y).collect();
        let factor_dim = hermitian_basis(&compressed, 1e-8).len();
        let g = combine(&compressed, (0..m).map(|_| cx(real_normal(&mut rng), 0.0)));
        let spaces = eigenspaces(&matcore::hermitian_part(&g))?;
        let d1 = spaces.len();
        let d2 = spaces[0].ncols();
        if spaces.iter().any(|s| s.ncols() != d2) || d1 * d2 != n || factor_dim != d1 * d1 {
            return Err(fail("factor", format!("block of size {n}: {d1} eigenspaces, algebra dimension {factor_dim}")));
        }
        // carry the basis of the first eigenspace to the others with a generic algebra element
        let probe = combine(&compressed, (0..m).map(|_| cx(real_normal(&mut rng), real_normal(&mut rng))));
        let mut f = CMat::zeros(n, n);
        f.view_mut((0, 0), (n, d2)).copy_from(&spaces[0]);
        for (a, s) in spaces.iter().enumerate().skip(1) {
            let moved = s * s.adjoint() * &probe * &spaces[0];
            let scale = moved.column(0).norm();
            if scale < 1e-6 {
                return Err(fail("alignment", format!("probe does not connect eigenspaces 0 and {a}")));
            }
            f.view_mut((0, a * d2), (n, d2)).copy_from(&moved.unscale(scale));
        }
        let w = y * f;
        if matcore::frobenius(&(w.adjoint() * &w - CMat::identity(n, n))) > 1e-6 {
            return Err(fail("alignment", "aligned basis is not orthonormal".into()));
        }
        let p = &w * w.adjoint();
        let img = restricted.apply(&p)?;
        let rho = matcore::hermitian_part(&partial_trace(&(w.adjoint() * img * &w), d1, d2, Side::First)?);
        let tr = matcore::trace(&rho).re;
        let rho = rho.unscale(tr);
        let embedding = v * &w;
        blocks.push(StructureBlock { d1, d2, rho, projector: &embedding * embedding.adjoint(), embedding });
    }

    // permutation: where does the normalized identity of block j land?
    let nb = blocks.len();
    let mut perm = vec![usize::MAX; nb];
    for j in 0..nb {
        let input = block_input(&blocks[j], &(CMat::identity(blocks[j].d1, blocks[j].d1) / cx(blocks[j].d1 as f64, 0.0)));
        let out = ch.apply(&input)?;
        let weights: Vec<f64> = blocks.iter().map(|b| matcore::trace(&(&b.projector * &out)).re).collect();
        let hits: Vec<usize> = (0..nb).filter(|&i| weights[i] > 0.5).collect();
        if hits.len() != 1 {
            return Err(fail("permutation", format!("block {j} lands on weights {weights:?}")));
        }
        let i = hits[0];
        if perm[i] != usize::MAX || blocks[i].d1 != blocks[j].d1 {
            return Err(fail("permutation", format!("block {j} cannot map onto block {i}")));
        }
        perm[i] = j;
    }

    let mut unitaries = Vec::with_capacity(nb);
    for i in 0..nb {
        unitaries.push(recover_unitary(ch, &blocks[i], &blocks[perm[i]])?);
    }
    let partial =
        FixedStructure { k_dim: r, support: v.clone(), blocks, perm, unitaries, closure_residual: 0.0, reconstruction_residual: 0.0, seed };
    let mut residual = 0.0_f64;
    for (j, b) in partial.blocks.iter().enumerate() {
        for p in 0..b.d1 {
            for q in 0..b.d1 {
                let x = unit(b.d1, p, q);
                let got = ch.apply(&block_input(b, &x))?;
                residual = residual.max(matcore::frobenius(&(got - partial.predict(j, &x))));
            }
        }
    }
    if residual > RECONSTRUCTION_TOL {
        return Err(fail("reconstruction", format!("residual {residual:e}")));
    }
    Ok((partial.blocks, partial.perm, partial.unitaries, residual))
}

fn block_input(b: &StructureBlock, x: &CMat) -> CMat {
    &b.embedding * matcore::kron(x, &b.rho) * b.embedding.adjoint()
}

/// `x ↦ Tr₂[W_i† φ(W_j (x ⊗ ρ_j) W_j†) W_i]` is a unitary conjugation; its
/// Choi matrix has rank one and the leading eigenvector is `vec(U)`.
fn recover_unitary(ch: &Channel, target: &StructureBlock, source: &StructureBlock) -> Result<CMat> {
    let d1 = target.d1;
    let mut s = CMat::zeros(d1 * d1, d1 * d1);
    for q in 0..d1 {
        for p in 0..d1 {
            let out = ch.apply(&block_input(source, &unit(d1, p, q)))?;
            let local = target.embedding.adjoint() * out * &target.embedding;
            let reduced = partial_trace(&local, d1, target.d2, Side::Second)?;
            s.set_column(p + d1 * q, &matcore::vec_of(&reduced));
        }
    }
    let map = Channel::from_super(&s)?;
    let (vals, vecs) = hermitian_eigh(&matcore::hermitian_part(map.choi()))?;
    let top = vals[vals.len() - 1];
    if vals.len() > 1 && vals[vals.len() - 2] > 1e-6 * top.max(1e-300) {
        return Err(Error::Structure {
            stage: "unitary",
            detail: format!("block map is not a single conjugation (second Choi eigenvalue {:e})", vals[vals.len() - 2]),
        });
    }
    // Choi index a·d1 + i holds U[a, i]
    let col = vecs.column(vals.len() - 1);
    let mut u = CMat::from_fn(d1, d1, |a, i| col[a * d1 + i]);
    let norm = (matcore::trace(&(u.adjoint() * &u)).re / d1 as f64).sqrt();
    u.unscale_mut(norm);
    let (mut best, mut big) = (cx(1.0, 0.0), -1.0);
    for z in u.iter() {
        if z.norm() > big + 1e-9 {
            big = z.norm();
            best = *z;
        }
    }
    u *= best.conj() / big;
    let res = unitarity_residual(&u);
    if res > 1e-6 {
        return Err(Error::Structure { stage: "unitary", detail: format!("recovered U has unitarity residual {res:e}") });
    }
    Ok(u)
}
