#![allow(dead_code)]

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use qchan::channels::{random_cptp, random_density, random_unitary, simple_aes, AesBlock};
use qchan::{CMat, Channel, HolevoForm, SimpleAesData, Tolerances, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn tol() -> Tolerances {
    Tolerances::default()
}

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn unit(d: usize, i: usize, j: usize) -> CMat {
    let mut m = CMat::zeros(d, d);
    m[(i, j)] = c(1.0, 0.0);
    m
}

/// Random qubit channel with Kraus rank 1..=4 picked from the seed.
pub fn random_qubit(seed: u64) -> Channel {
    random_cptp(2, 1 + (seed % 4) as usize, seed).unwrap()
}

/// Choi matrix straight from the definition, `R[(a,i),(b,j)] = φ(|i⟩⟨j|)[a,b] / d`.
pub fn choi_oracle(ch: &Channel) -> CMat {
    let d = ch.dim();
    let mut r = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let out = ch.apply(&unit(d, i, j)).unwrap();
            for a in 0..d {
                for b in 0..d {
                    r[(a * d + i, b * d + j)] = out[(a, b)] / c(d as f64, 0.0);
                }
            }
        }
    }
    r
}

pub fn pt_oracle(r: &CMat, da: usize, db: usize) -> CMat {
    CMat::from_fn(da * db, da * db, |row, col| {
        let (a, i) = (row / db, row % db);
        let (b, j) = (col / db, col % db);
        r[(a * db + j, b * db + i)]
    })
}

pub fn min_eig(h: &CMat) -> f64 {
    let herm = (h + h.adjoint()) * c(0.5, 0.0);
    SymmetricEigen::new(herm).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

pub fn eigvals_herm(h: &CMat) -> Vec<f64> {
    let herm = (h + h.adjoint()) * c(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(herm).eigenvalues.iter().copied().collect();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

pub fn paulis() -> [CMat; 3] {
    [
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]),
        CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)]),
        CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]),
    ]
}

/// `M_ij = Tr(σ_i φ(σ_j)) / 2`, `c_i = Tr(σ_i φ(1)) / 2`.
pub fn bloch_oracle(ch: &Channel) -> (Matrix3<f64>, Vector3<f64>) {
    let s = paulis();
    let img: Vec<CMat> = s.iter().map(|p| ch.apply(p).unwrap()).collect();
    let one = ch.apply(&CMat::identity(2, 2)).unwrap();
    let m = Matrix3::from_fn(|i, j| (&s[i] * &img[j]).trace().re / 2.0);
    let v = Vector3::from_fn(|i, _| (&s[i] * &one).trace().re / 2.0);
    (m, v)
}

pub fn frob(m: &CMat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Seeded simple-AES generator on `d ≤ 6` with at least one block of `d1 ≥ 2`.
pub fn random_simple_aes(seed: u64) -> SimpleAesData {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dims: Vec<(usize, usize)> = Vec::new();
    let first = (2 + rng.random_range(0..2usize), 1 + rng.random_range(0..2usize));
    let first = if first.0 * first.1 > 6 { (first.0, 1) } else { first };
    dims.push(first);
    let mut budget = 6 - first.0 * first.1;
    while budget > 0 && rng.random_bool(0.7) {
        let d1 = 1 + rng.random_range(0..budget.min(3));
        let d2 = 1 + rng.random_range(0..(budget / d1).min(2));
        dims.push((d1, d2));
        budget -= d1 * d2;
    }
    let n = dims.len();
    // random permutation that only swaps blocks of equal d1
    let mut perm: Vec<usize> = (0..n).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            if dims[i].0 == dims[j].0 && rng.random_bool(0.5) {
                perm.swap(i, j);
            }
        }
    }
    let blocks = dims.iter().map(|&(d1, d2)| AesBlock { d1, d2, rho: random_density(d2, rng.random()) }).collect();
    let unitaries = dims.iter().map(|&(d1, _)| random_unitary(d1, rng.random())).collect();
    SimpleAesData { blocks, unitaries, perm }
}

pub fn aes_channel(data: &SimpleAesData) -> Channel {
    simple_aes(data.clone()).unwrap()
}

/// Seeded matrix with entries uniform in the unit square around 0.
pub fn random_matrix(m: usize, n: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    CMat::from_fn(m, n, |_, _| c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
}

pub fn random_hermitian(d: usize, seed: u64) -> CMat {
    let a = random_matrix(d, d, seed);
    (&a + a.adjoint()) * c(0.5, 0.0)
}

/// Direct sum of two channels on `d1 + d2`, off-diagonal blocks killed.
pub fn direct_sum(a: &Channel, b: &Channel) -> Channel {
    let (d1, d2) = (a.dim(), b.dim());
    let d = d1 + d2;
    let mut ops = Vec::new();
    for k in a.kraus().unwrap() {
        let mut m = CMat::zeros(d, d);
        m.view_mut((0, 0), (d1, d1)).copy_from(k);
        ops.push(m);
    }
    for k in b.kraus().unwrap() {
        let mut m = CMat::zeros(d, d);
        m.view_mut((d1, d1), (d2, d2)).copy_from(k);
        ops.push(m);
    }
    Channel::from_kraus(&ops).unwrap()
}

/// Measure-and-prepare form with `k` outcomes: effects from a random POVM,
/// states random.
pub fn random_holevo(d: usize, k: usize, seed: u64) -> HolevoForm {
    let raw: Vec<CMat> = (0..k)
        .map(|i| {
            let a = random_matrix(d, d, seed.wrapping_mul(31).wrapping_add(i as u64));
            &a * a.adjoint()
        })
        .collect();
    let total = raw.iter().fold(CMat::zeros(d, d), |acc, e| acc + e);
    let info = qchan::matcore::psd_utils(&total, 1e-12).unwrap();
    let effects = raw.iter().map(|e| &info.inv_sqrt_on_support * e * &info.inv_sqrt_on_support).collect();
    let states = (0..k).map(|i| random_density(d, seed ^ (0x9e37 + i as u64))).collect();
    HolevoForm { states, effects }
}

/// Peripheral spectra a qubit channel may have.
pub fn wolf_pattern(vals: &[C64]) -> bool {
    let near = |a: C64, b: C64| (a - b).norm() < 1e-7;
    let one = c(1.0, 0.0);
    match vals.len() {
        1 => near(vals[0], one),
        2 => {
            let ones = vals.iter().filter(|v| near(**v, one)).count();
            ones == 2 || (ones == 1 && vals.iter().any(|v| near(*v, -one)))
        }
        4 => {
            let ones = vals.iter().filter(|v| near(**v, one)).count();
            let rest: Vec<C64> = vals.iter().copied().filter(|v| !near(*v, one)).collect();
            ones == 4 || (ones == 2 && rest.len() == 2 && near(rest[0], rest[1].conj()))
        }
        _ => false,
    }
}
