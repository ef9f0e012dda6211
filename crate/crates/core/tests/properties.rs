use proptest::prelude::*;

use qadv_core::circuit::{haar_two_qubit, random_brickwork, PairingScheme};
use qadv_core::dequant::SQVector;
use qadv_core::pauli::{conjugate_dense, transfer_matrix};
use qadv_core::propagation::{backpropagate_traced, heuristic_expectation};
use qadv_core::{seed, Pauli, PauliMap, PauliString, PropagationConfig, StateVector};

fn pauli_string(n: usize, digits: &[u8]) -> PauliString {
    let paulis: Vec<Pauli> = digits[..n]
        .iter()
        .map(|d| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][*d as usize])
        .collect();
    PauliString::from_paulis(&paulis).unwrap()
}

fn random_map(n: usize, terms: &[(Vec<u8>, f64)]) -> PauliMap {
    PauliMap::from_terms(n, terms.iter().map(|(d, c)| (pauli_string(n, d), *c))).unwrap()
}

fn sum_sq(m: &PauliMap) -> f64 {
    m.iter().map(|(_, c)| c * c).sum()
}

fn terms_strategy() -> impl Strategy<Value = Vec<(Vec<u8>, f64)>> {
    prop::collection::vec((prop::collection::vec(0u8..4, 5), -1.0f64..1.0), 1..12)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conjugation_preserves_coefficient_norm(terms in terms_strategy(), a in 0usize..5, b in 0usize..5, s in any::<u64>()) {
        prop_assume!(a != b);
        let m = random_map(5, &terms);
        let u = haar_two_qubit(&mut seed::rng_from_seed(s));
        let out = conjugate_dense(&m, &[a, b], &u, 0.0).unwrap();
        prop_assert!((sum_sq(&out) - sum_sq(&m)).abs() < 1e-10);
    }

    #[test]
    fn projection_contracts(terms in terms_strategy(), k in 0usize..6) {
        let m = random_map(5, &terms);
        let p = m.project_weight(k);
        prop_assert!(sum_sq(&p) <= sum_sq(&m) + 1e-15);
        prop_assert!(p.max_weight() <= k);
        prop_assert!(p.project_weight(k).max_difference(&p) == 0.0);
    }

    #[test]
    fn transfer_matrices_are_orthogonal(s in any::<u64>()) {
        let u = haar_two_qubit(&mut seed::rng_from_seed(s));
        let t = transfer_matrix(&u).unwrap();
        prop_assert!(t.orthogonality_deviation() < 1e-10);
        // identity is fixed by unital conjugation
        prop_assert!((t.get(0, 0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn traced_norms_never_increase(n in 2usize..6, layers in 1usize..6, k in 1usize..6, s in any::<u64>()) {
        let c = random_brickwork(n, layers, PairingScheme::RandomMatching, s).unwrap();
        let o = PauliMap::from_term(PauliString::single(n, 0, Pauli::Z).unwrap(), 1.0);
        let trace = backpropagate_traced(&c, &o, &PropagationConfig::with_k(k.min(n))).unwrap();
        for w in trace.norms.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        if k >= n {
            prop_assert!((trace.norms[layers] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn full_weight_heuristic_is_exact(n in 2usize..6, layers in 1usize..6, s in any::<u64>(), x in any::<u64>()) {
        let c = random_brickwork(n, layers, PairingScheme::Brickwork, s).unwrap();
        let o = PauliMap::from_term(PauliString::single(n, 0, Pauli::Z).unwrap(), 1.0);
        let bits: Vec<bool> = (0..n).map(|q| x >> q & 1 == 1).collect();
        let mut sv = StateVector::prepare_basis(n, &bits).unwrap();
        sv.apply(&c).unwrap();
        let exact = sv.expectation(&o).unwrap();
        let h = heuristic_expectation(&c, &o, &bits, &PropagationConfig::with_k(n)).unwrap();
        prop_assert!((exact - h).abs() < 1e-9);
    }

    #[test]
    fn sum_tree_invariants(v in prop::collection::vec(-10.0f64..10.0, 1..70), r in 0.0f64..1.0) {
        prop_assume!(v.iter().any(|x| x.abs() > 1e-6));
        let sq = SQVector::build(&v, true).unwrap();
        sq.check_invariants().unwrap();
        prop_assert!((sq.root() - 1.0).abs() < 1e-9);
        let i = sq.sample(r).unwrap();
        prop_assert!(i < sq.dim());
        prop_assert!(sq.probability(i) > 0.0);
    }
}
