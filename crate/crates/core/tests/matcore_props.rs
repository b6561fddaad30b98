mod common;

use common::*;
use proptest::prelude::*;
use qchan::matcore::{
    eig_full, hermitian_eigh, nullspace, partial_trace, partial_transpose, psd_utils, range_basis, schatten_norm, trace_norm, Side,
};
use qchan::CMat;

fn cfg(cases: u32) -> ProptestConfig {
    ProptestConfig::with_cases(cases)
}

proptest! {
    #![proptest_config(cfg(64))]

    #[test]
    fn partial_transpose_is_an_involution(da in 1usize..5, db in 1usize..5, seed in any::<u64>()) {
        let r = random_matrix(da * db, da * db, seed);
        let once = partial_transpose(&r, da, db).unwrap();
        let twice = partial_transpose(&once, da, db).unwrap();
        prop_assert_eq!(&twice, &r);
        prop_assert!(frob(&(once - pt_oracle(&r, da, db))) == 0.0);
    }

    #[test]
    fn partial_trace_of_product(da in 1usize..4, db in 1usize..4, seed in any::<u64>()) {
        let a = random_matrix(da, da, seed);
        let b = random_matrix(db, db, seed ^ 1);
        let ab = qchan::matcore::kron(&a, &b);
        let left = partial_trace(&ab, da, db, Side::Second).unwrap();
        let right = partial_trace(&ab, da, db, Side::First).unwrap();
        prop_assert!(frob(&(left - &a * b.trace())) < 1e-12);
        prop_assert!(frob(&(right - &b * a.trace())) < 1e-12);
    }

    #[test]
    fn trace_norm_dominates_eigenvalue_moduli(n in 1usize..8, seed in any::<u64>()) {
        let a = random_matrix(n, n, seed);
        let t = schatten_norm(&a, 1.0).unwrap();
        let es = eig_full(&a, 1e-7).unwrap();
        let sum: f64 = es.values.iter().map(|z| z.norm()).sum();
        prop_assert!(t >= sum - 1e-10, "‖A‖₁ = {t} < Σ|λ| = {sum}");
    }

    #[test]
    fn trace_norm_of_hermitian_is_eigenvalue_sum(n in 1usize..8, seed in any::<u64>()) {
        let h = random_hermitian(n, seed);
        let (vals, _) = hermitian_eigh(&h).unwrap();
        let sum: f64 = vals.iter().map(|v| v.abs()).sum();
        prop_assert!((trace_norm(&h).unwrap() - sum).abs() < 1e-12);
    }

    #[test]
    fn eig_full_reconstructs_right_pairs(n in 1usize..10, seed in any::<u64>()) {
        let a = random_matrix(n, n, seed);
        let scale = frob(&a);
        let es = eig_full(&a, 1e-7).unwrap();
        let total: usize = es.clusters.iter().map(|c| c.algebraic).sum();
        prop_assert_eq!(total, n);
        for cl in &es.clusters {
            for k in 0..cl.right.ncols() {
                let v = cl.right.column(k);
                let resid = (&a * v - v * cl.value).norm();
                prop_assert!(resid <= 1e-8 * scale * v.norm(), "residual {resid:e}");
            }
        }
    }

    // S D S⁻¹ with repeated eigenvalues: clusters must carry the repeats
    #[test]
    fn eig_full_counts_repeated_values(n in 2usize..7, reps in 1usize..3, seed in any::<u64>()) {
        let reps = reps.min(n - 1);
        let s = CMat::identity(n, n) + random_matrix(n, n, seed) * c(0.4, 0.0);
        let s_inv = s.clone().try_inverse().unwrap();
        let mut diag = CMat::zeros(n, n);
        for i in 0..n {
            diag[(i, i)] = if i <= reps { c(0.7, 0.2) } else { c(-0.3 + 0.25 * i as f64, 0.1 * i as f64) };
        }
        let a = &s * diag * s_inv;
        let es = eig_full(&a, 1e-6).unwrap();
        let rep = es.clusters.iter().find(|cl| (cl.value - c(0.7, 0.2)).norm() < 1e-6).unwrap();
        prop_assert_eq!(rep.algebraic, reps + 1);
        prop_assert_eq!(rep.geometric, reps + 1);
    }

    #[test]
    fn psd_sqrt_squares_back(n in 1usize..8, rank in 1usize..8, seed in any::<u64>()) {
        let b = random_matrix(n, rank.min(n), seed);
        let a = &b * b.adjoint();
        let info = psd_utils(&a, 1e-9).unwrap();
        prop_assert!(frob(&(&info.sqrt * &info.sqrt - &a)) <= 1e-9 * frob(&a));
        prop_assert!(info.min_eig >= 0.0);
        prop_assert_eq!(info.rank, rank.min(n));
    }

    #[test]
    fn singular_values_match_gram_eigenvalues(m in 1usize..9, n in 1usize..9, rank in 1usize..9, seed in any::<u64>()) {
        let rank = rank.min(m).min(n);
        let a = random_matrix(m, rank, seed) * random_matrix(rank, n, seed ^ 11);
        let got = qchan::matcore::singular_values(&a).unwrap();
        let mut want: Vec<f64> = eigvals_herm(&(a.adjoint() * &a)).into_iter().map(|x| x.max(0.0).sqrt()).collect();
        want.reverse();
        prop_assert_eq!(got.len(), m.min(n));
        for (g, w) in got.iter().zip(&want) {
            // the Gram route loses half the digits near zero
            prop_assert!((g - w).abs() < 1e-7, "{got:?} vs {want:?}");
        }
    }

    #[test]
    fn kernel_and_range_of_low_rank(m in 1usize..10, n in 1usize..10, rank in 1usize..4, seed in any::<u64>()) {
        let rank = rank.min(m).min(n);
        let a = random_matrix(m, rank, seed) * random_matrix(rank, n, seed ^ 7);
        let k = nullspace(&a, 1e-9).unwrap();
        prop_assert_eq!(k.ncols(), n - rank);
        prop_assert!(frob(&(&a * &k)) < 1e-10);
        let r = range_basis(&a, 1e-9).unwrap();
        prop_assert_eq!(r.ncols(), rank);
        prop_assert!(frob(&(&a - &r * (r.adjoint() * &a))) < 1e-10);
    }
}
