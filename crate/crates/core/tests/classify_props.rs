mod common;

use common::*;
use proptest::prelude::*;
use qchan::channels::{depolarize_to, phi_plus, random_cptp};
use qchan::classify::{aes_classify, es_classify, fixed_structure, is_unitary, limit_group_diagnostics, n_index, EsStatus, NIndexKind};
use qchan::entwit::{eb_verdict, EbStatus};
use qchan::spectral::{self, max_fixed_point};
use qchan::Channel;

/// Plus-family channels away from the CP boundary and from fast decay.
fn plus_channel() -> impl Strategy<Value = Channel> {
    (0.6f64..0.99, 0.0f64..std::f64::consts::TAU, 0.0f64..0.9, 0.0f64..1.0).prop_filter_map("not CP", |(lambda, theta, mu_frac, a_frac)| {
        let mu = lambda * lambda + mu_frac * (1.0 - lambda * lambda);
        let alpha = a_frac * ((1.0 - mu) * (mu - lambda * lambda)).sqrt();
        phi_plus(lambda, theta, alpha, mu).ok()
    })
}

fn assorted() -> impl Strategy<Value = Channel> {
    prop_oneof![
        any::<u64>().prop_map(random_qubit),
        (any::<u64>(), 1usize..4).prop_map(|(s, r)| random_cptp(3, r, s).unwrap()),
        (0u64..50).prop_map(|s| aes_channel(&random_simple_aes(s))),
        (any::<u64>(), 1usize..3).prop_map(|(s, r)| direct_sum(&random_cptp(2, r, s).unwrap(), &random_cptp(1, 1, s).unwrap())),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn es_qubits_stay_entangling(ch in plus_channel()) {
        let v = es_classify(&ch, &tol(), 8).unwrap();
        prop_assert!(v.is_es(), "{v:?}");
        for n in 1..=8 {
            let e = eb_verdict(&ch.power(n), &tol());
            prop_assert!(e.is_not_eb(), "power {n}: {e:?}");
        }
    }

    #[test]
    fn es_never_certified_eb(ch in assorted()) {
        let v = es_classify(&ch, &tol(), 16).unwrap();
        if v.is_es() {
            for n in 1..=6 {
                prop_assert_ne!(eb_verdict(&ch.power(n), &tol()).status, EbStatus::Eb);
            }
        }
    }

    #[test]
    fn aes_implies_es(ch in assorted()) {
        let a = aes_classify(&ch, &tol()).unwrap();
        if a.is_aes() {
            let e = es_classify(&ch, &tol(), 16).unwrap();
            prop_assert!(e.is_es(), "{a:?} / {e:?}");
        }
    }

    #[test]
    fn qubit_aes_iff_unitary(seed in any::<u64>()) {
        let ch = random_qubit(seed);
        let a = aes_classify(&ch, &tol()).unwrap();
        let u = is_unitary(&ch, &tol()).unwrap();
        prop_assert_eq!(a.is_aes(), u.unitary);
    }

    #[test]
    fn primitive_powers_reach_depolarizer(d in 2usize..4, seed in any::<u64>()) {
        let ch = random_cptp(d, d * d, seed).unwrap();
        let rep = spectral::spectrum(&ch, &tol()).unwrap();
        prop_assume!(rep.peripheral_count() == 1);
        let rho = max_fixed_point(&ch, &tol()).unwrap();
        prop_assume!(min_eig(&rho) > 1e-6);
        let limit = depolarize_to(&rho).unwrap();
        prop_assert!(ch.power(200).distance(&limit) < 1e-6);
    }

    #[test]
    fn n_index_one_iff_eb_on_qubits(seed in any::<u64>()) {
        let ch = random_qubit(seed);
        let r = n_index(&ch, 64, &tol()).unwrap();
        prop_assert_eq!(r.kind == NIndexKind::Finite(1), eb_verdict(&ch, &tol()).is_eb());
    }

    #[test]
    fn finite_n_index_is_first_eb_power(seed in any::<u64>()) {
        let ch = random_qubit(seed);
        let r = n_index(&ch, 64, &tol()).unwrap();
        if let NIndexKind::Finite(n) = r.kind {
            prop_assert!(eb_verdict(&ch.power(n), &tol()).is_eb());
            for k in 1..n {
                prop_assert!(eb_verdict(&ch.power(k), &tol()).is_not_eb());
            }
        }
    }

    #[test]
    fn limit_group_identities_hold(ch in assorted()) {
        let rep = limit_group_diagnostics(&ch, &tol()).unwrap();
        prop_assert!(rep.ok(), "{rep:?}");
    }

    #[test]
    fn structure_blocks_fill_the_support(ch in assorted()) {
        let fs = fixed_structure(&ch, &tol()).unwrap();
        prop_assert_eq!(fs.block_dim_sum(), fs.k_dim);
        prop_assert!(fs.reconstruction_residual <= 1e-6);
        let v = es_classify(&ch, &tol(), 16).unwrap();
        prop_assert!(v.status != EsStatus::Indeterminate || ch.dim() > 2);
    }
}
