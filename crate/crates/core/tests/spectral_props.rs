mod common;

use common::*;
use proptest::prelude::*;
use qchan::channels::random_cptp;
use qchan::matcore::{self, hermitian_eigh};
use qchan::spectral::{self, eigensystem, fixed_space_basis, max_fixed_point, projectors, restrict_to_support};
use qchan::{CMat, Channel};

fn small_channel() -> impl Strategy<Value = Channel> {
    (2usize..4, 1usize..10, any::<u64>()).prop_map(|(d, r, seed)| random_cptp(d, 1 + (r - 1) % (d * d), seed).unwrap())
}

/// Direct sums have at least two independent fixed points.
fn split_channel() -> impl Strategy<Value = Channel> {
    (1usize..3, 1usize..3, 1usize..5, any::<u64>()).prop_map(|(d1, d2, r, seed)| {
        let a = random_cptp(d1, 1 + (r - 1) % (d1 * d1), seed).unwrap();
        let b = random_cptp(d2, 1 + r % (d2 * d2), seed ^ 0x55).unwrap();
        direct_sum(&a, &b)
    })
}

/// `X = X₊ − X₋` from the eigen-decomposition of a Hermitian `X`.
fn jordan_parts(x: &CMat) -> (CMat, CMat) {
    let (vals, vecs) = hermitian_eigh(x).unwrap();
    let d = x.nrows();
    let (mut plus, mut minus) = (CMat::zeros(d, d), CMat::zeros(d, d));
    for (k, &v) in vals.iter().enumerate() {
        let proj = vecs.column(k) * vecs.column(k).adjoint();
        if v > 0.0 {
            plus += proj * c(v, 0.0);
        } else {
            minus += proj * c(-v, 0.0);
        }
    }
    (plus, minus)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn contraction_and_trivial_peripheral_jordan(ch in small_channel()) {
        let rep = spectral::spectrum(&ch, &tol()).unwrap();
        prop_assert!(rep.contraction_ok);
        prop_assert!(rep.peripheral_jordan_trivial);
        prop_assert_eq!(rep.total(), ch.dim() * ch.dim());
        let rho = max_fixed_point(&ch, &tol()).unwrap();
        prop_assert!(min_eig(&rho) >= -1e-9);
        prop_assert!((rho.trace().re - 1.0).abs() < 1e-10);
        prop_assert!(frob(&(ch.apply(&rho).unwrap() - &rho)) < 1e-8);
    }

    #[test]
    fn non_unit_eigenmatrices_are_traceless(ch in small_channel()) {
        let d = ch.dim();
        let es = eigensystem(&ch, &tol()).unwrap();
        for cl in es.clusters.iter().filter(|cl| (cl.value - c(1.0, 0.0)).norm() > 1e-6) {
            for k in 0..cl.right.ncols() {
                let z = matcore::unvec(cl.right.column(k).as_slice(), d);
                prop_assert!(z.trace().norm() <= 1e-8 * frob(&z), "Tr Z = {} for λ = {}", z.trace(), cl.value);
            }
        }
    }

    #[test]
    fn jordan_parts_of_fixed_points_are_fixed(ch in split_channel(), w in proptest::collection::vec(-1.0f64..1.0, 4)) {
        let basis = fixed_space_basis(&ch, &tol()).unwrap();
        prop_assert!(basis.len() >= 2);
        let x = basis.iter().zip(w.iter().cycle()).fold(CMat::zeros(ch.dim(), ch.dim()), |acc, (b, &t)| acc + b * c(t, 0.0));
        let (plus, minus) = jordan_parts(&x);
        for part in [&plus, &minus] {
            prop_assert!(frob(&(ch.apply(part).unwrap() - part)) <= 1e-8 * frob(&x).max(1.0));
        }
    }

    // fixed points of the adjoint of the support-restricted map form an algebra
    #[test]
    fn adjoint_fixed_points_close_under_products(ch in split_channel()) {
        let restricted = restrict_to_support(&ch, &tol()).unwrap().channel;
        let adj = restricted.adjoint();
        let basis = fixed_space_basis(&adj, &tol()).unwrap();
        let r = restricted.dim();
        for a in &basis {
            for b in &basis {
                let prod = a * b;
                let resid = frob(&(adj.apply(&prod).unwrap() - &prod));
                prop_assert!(resid <= 1e-7 * frob(&prod).max(1.0), "residual {resid:e} on r = {r}");
            }
        }
    }

    #[test]
    fn qubit_peripheral_spectrum_pattern(seed in any::<u64>()) {
        let ch = random_qubit(seed);
        let es = eigensystem(&ch, &tol()).unwrap();
        let vals: Vec<_> = es.values.iter().copied().filter(|v| v.norm() >= 1.0 - 1e-8).collect();
        prop_assert!(wolf_pattern(&vals), "{vals:?}");
    }

    #[test]
    fn projector_family_laws(ch in prop_oneof![small_channel(), split_channel()]) {
        let p = projectors(&ch, &tol()).unwrap();
        for m in [&p.peripheral, &p.inverse_phase, &p.fixed] {
            let v = m.validate_cptp();
            prop_assert!(v.cp && v.tp, "{v:?}");
        }
        let e = p.peripheral.superop();
        prop_assert!(frob(&(e * e - e)) <= 1e-8);
        let s = ch.superop();
        let i = p.inverse_phase.superop();
        prop_assert!(frob(&(s * i - e)) <= 1e-8);
        prop_assert!(frob(&(i * s - e)) <= 1e-8);
        prop_assert!(frob(&(s * e - e * s)) <= 1e-8);
        let f = p.fixed.superop();
        prop_assert!(frob(&(s * f - f)) <= 1e-8);
    }
}
