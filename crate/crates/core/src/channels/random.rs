//! Seeded random channels, unitaries and states.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::{cx, CMat, Error, Result};

use super::{Channel, Provenance};

fn gaussian(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        cx(re, im)
    })
}

/// Haar-distributed isometry (`rows ≥ cols`) from the QR factor of a Gaussian matrix.
fn haar_isometry(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> CMat {
    let qr = gaussian(rows, cols, rng).qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..cols {
        let z = r[(j, j)];
        let n = z.norm();
        if n > 0.0 {
            let ph = z / n;
            q.column_mut(j).iter_mut().for_each(|x| *x *= ph);
        }
    }
    q
}

pub fn random_unitary(d: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    haar_isometry(d, d, &mut rng)
}

/// Random density matrix `G G† / Tr[G G†]` with a `d × d` Gaussian `G`.
pub fn random_density(d: usize, seed: u64) -> CMat {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = gaussian(d, d, &mut rng);
    let rho = &g * g.adjoint();
    let tr = crate::matcore::trace(&rho).re;
    rho.unscale(tr)
}

/// Random CPTP map with `kraus_rank` Kraus operators cut from a Haar
/// isometry `C^d → C^d ⊗ C^r`. Deterministic in `seed`.
pub fn random_cptp(d: usize, kraus_rank: usize, seed: u64) -> Result<Channel> {
    if d == 0 || kraus_rank == 0 {
        return Err(Error::InvalidParameter(format!("random_cptp needs d ≥ 1 and kraus_rank ≥ 1, got ({d}, {kraus_rank})")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let v = haar_isometry(d * kraus_rank, d, &mut rng);
    let ops: Vec<CMat> = (0..kraus_rank).map(|k| v.rows(k * d, d).into_owned()).collect();
    Ok(Channel::from_kraus(&ops)?.with_provenance(Provenance::Random { d, kraus_rank, seed }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unitary_is_unitary_and_seeded() {
        let u = random_unitary(4, 11);
        assert!((u.adjoint() * &u - CMat::identity(4, 4)).norm() < 1e-13);
        assert_eq!(u, random_unitary(4, 11));
        assert_ne!(u, random_unitary(4, 12));
    }

    #[test]
    fn random_cptp_validates() {
        let ch = random_cptp(3, 2, 7).unwrap();
        let v = ch.validate_cptp();
        assert!(v.cp && v.tp, "{v:?}");
        assert_eq!(ch.kraus_rank(1e-9).unwrap(), 2);
    }

    #[test]
    fn density_has_unit_trace() {
        let rho = random_density(5, 3);
        assert!((crate::matcore::trace(&rho) - cx(1.0, 0.0)).norm() < 1e-14);
    }
}
