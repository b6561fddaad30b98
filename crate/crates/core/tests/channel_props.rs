mod common;

use common::*;
use proptest::prelude::*;
use qchan::channels::json::{channel_to_json, parse_channel, to_json_string};
use qchan::channels::{holevo_channel, random_cptp};
use qchan::entwit::{eb_verdict, ppt_min_eig};
use qchan::matcore::{self, eig_full};
use qchan::{Channel, C64};

fn any_channel() -> impl Strategy<Value = Channel> {
    (2usize..5, 1usize..17, any::<u64>()).prop_map(|(d, r, seed)| random_cptp(d, 1 + (r - 1) % (d * d), seed).unwrap())
}

/// Largest distance in a greedy nearest pairing of two multisets.
fn multiset_gap(a: &[C64], b: &[C64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut rest = b.to_vec();
    let mut worst: f64 = 0.0;
    for x in a {
        let (k, dist) = rest.iter().enumerate().map(|(k, y)| (k, (x - y).norm())).min_by(|p, q| p.1.partial_cmp(&q.1).unwrap()).unwrap();
        worst = worst.max(dist);
        rest.swap_remove(k);
    }
    worst
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn kraus_choi_kraus_round_trip(ch in any_channel()) {
        let via_choi = Channel::from_choi(ch.choi()).unwrap();
        let back = Channel::from_kraus(via_choi.kraus().unwrap()).unwrap();
        prop_assert!(ch.distance(&back) <= 1e-10, "distance {:e}", ch.distance(&back));
        prop_assert!(frob(&(ch.choi() - choi_oracle(&ch))) <= 1e-12);
        prop_assert!(ch.is_cptp());
    }

    #[test]
    fn json_round_trip(ch in any_channel()) {
        let back = parse_channel(&to_json_string(&ch)).unwrap();
        prop_assert!(ch.distance(&back) <= 1e-12);
        prop_assert_eq!(channel_to_json(&back).d, ch.dim());
    }

    #[test]
    fn kadison_schwarz_for_adjoint(ch in any_channel(), seed in any::<u64>()) {
        let z = ch.adjoint();
        let x = random_matrix(ch.dim(), ch.dim(), seed);
        let zx = z.apply(&x).unwrap();
        let gap = z.apply(&(x.adjoint() * &x)).unwrap() - zx.adjoint() * zx;
        prop_assert!(min_eig(&gap) >= -1e-9, "min eig {}", min_eig(&gap));
    }

    #[test]
    fn power_is_repeated_composition(ch in any_channel(), n in 0u64..9) {
        let mut acc = qchan::channels::identity_channel(ch.dim());
        for _ in 0..n {
            acc = ch.compose(&acc).unwrap();
        }
        prop_assert!(ch.power(n).distance(&acc) <= 1e-10);
    }

    #[test]
    fn adjoint_is_an_involution(ch in any_channel(), seed in any::<u64>()) {
        let x = random_matrix(ch.dim(), ch.dim(), seed);
        let y = random_matrix(ch.dim(), ch.dim(), seed ^ 3);
        // ⟨y, φ(x)⟩ = ⟨φ†(y), x⟩
        let lhs = (y.adjoint() * ch.apply(&x).unwrap()).trace();
        let rhs = (ch.adjoint().apply(&y).unwrap().adjoint() * x).trace();
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert!(ch.adjoint().adjoint().distance(&ch) < 1e-14);
    }

    #[test]
    fn eb_propagates_through_composition(seed in any::<u64>(), k in 1usize..5) {
        let eb = holevo_channel(&random_holevo(2, k, seed)).unwrap();
        let other = random_qubit(seed ^ 0xabc);
        for ch in [eb.compose(&other).unwrap(), other.compose(&eb).unwrap()] {
            let v = eb_verdict(&ch, &tol());
            prop_assert!(!v.is_not_eb(), "{v:?}");
            prop_assert!(ppt_min_eig(&ch) >= -1e-9);
        }
    }

    #[test]
    fn qubit_spectrum_and_determinant(seed in any::<u64>()) {
        let ch = random_qubit(seed);
        let (m, _) = bloch_oracle(&ch);
        let mc = qchan::CMat::from_fn(3, 3, |i, j| c(m[(i, j)], 0.0));
        let mut want: Vec<C64> = eig_full(&mc, 1e-7).unwrap().values;
        want.push(c(1.0, 0.0));
        let got = eig_full(ch.superop(), 1e-7).unwrap().values;
        prop_assert!(multiset_gap(&want, &got) < 1e-9, "{want:?} vs {got:?}");
        let det = matcore::det(ch.superop()).unwrap();
        prop_assert!((det - c(m.determinant(), 0.0)).norm() < 1e-12);
    }
}
