use std::sync::Arc;

use approx::assert_relative_eq;
use htaac_qsdp::constraints::{
    enumerate_zstrings, marginal_expectations, population_diagonal, ZConstraintSet,
};
use htaac_qsdp::dense::{herm_expm, WeightMatrix};
use htaac_qsdp::graph::{
    emit_gset, gen_erdos_renyi, gen_toroid, graph_stats, pad_to_qubits, parse_gset, SignLaw,
    WeightLaw,
};
use htaac_qsdp::operator::{DenseSymOp, DiagonalOp};
use htaac_qsdp::oracle::brute_force_maxcut;
use htaac_qsdp::paulidecomp::{pauli_decompose, reconstruct, truncate_decomposition};
use htaac_qsdp::simulator::{adjoint_gradient, evaluate_loss, forward_real, Ansatz, LossSpec};
use htaac_qsdp::solver::{cut_value, round_solution, signs_of};
use htaac_qsdp::simulator::StateVector;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn weight_law() -> impl Strategy<Value = WeightLaw> {
    prop_oneof![
        (0.5f64..2.0).prop_map(|b| WeightLaw::UniformPositive { b }),
        (0.5f64..2.0).prop_map(|b| WeightLaw::UniformSigned { b }),
        Just(WeightLaw::Constant { w: 1.0 }),
    ]
}

fn unit_vector(n_qubits: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 1 << n_qubits).prop_filter_map("zero vector", |v| {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        (norm > 1e-3).then(|| v.iter().map(|x| x / norm).collect())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn gset_round_trip(n in 2usize..30, d in 0.1f64..0.9, law in weight_law(), seed in 0u64..1000) {
        let g = gen_erdos_renyi(n, d, law, seed).unwrap();
        let back = parse_gset(&emit_gset(&g)).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn padded_matrix_symmetric_zero_diagonal(n in 2usize..40, law in weight_law(), seed in 0u64..1000) {
        let g = gen_erdos_renyi(n, 0.4, law, seed).unwrap();
        let m = pad_to_qubits(&g).into_matrix();
        prop_assert_eq!(&m, &m.transpose());
        prop_assert!(m.diagonal().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn toroid_is_four_regular(rows in 3usize..12, cols in 3usize..12, seed in 0u64..100) {
        let g = gen_toroid(rows, cols, SignLaw::RandomPm1, seed).unwrap();
        prop_assert!(g.degrees().iter().all(|&k| k == 4));
        let s = graph_stats(&g);
        prop_assert_eq!(s.xi * g.n_vertices() as f64, s.e as f64);
    }

    #[test]
    fn exponential_inverse_and_composition(seed in 0u64..500, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let g = gen_erdos_renyi(8, 0.5, WeightLaw::UniformSigned { b: 1.0 }, seed).unwrap();
        let w = pad_to_qubits(&g);
        let fwd = herm_expm(&w, a).unwrap();
        let inv = herm_expm(&w, -a).unwrap();
        let id = fwd.mul(&inv).unwrap();
        let eye = DMatrix::identity(id.dim(), id.dim());
        prop_assert!((id.matrix() - eye).camax() < 1e-10);
        let ab = herm_expm(&w, a + b).unwrap();
        let prod = fwd.mul(&herm_expm(&w, b).unwrap()).unwrap();
        prop_assert!((ab.matrix() - prod.matrix()).camax() < 1e-9);
    }

    #[test]
    fn ansatz_state_is_normalized(n in 1usize..7, layers in 1usize..5, seed in 0u64..1000) {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let a = Ansatz::random(n, layers, 2.0, &mut rng);
        prop_assert_eq!(a.param_count(), 2 * layers * n);
        let psi = forward_real(&a);
        prop_assert!((psi.iter().map(|x| x * x).sum::<f64>() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn marginals_match_dense_expectation(psi in unit_vector(4)) {
        let strings = enumerate_zstrings(4, 4).unwrap();
        let p: Vec<f64> = psi.iter().map(|a| a * a).collect();
        let values = marginal_expectations(&p, &strings).unwrap();
        for (s, v) in strings.iter().zip(values) {
            // <psi| Z...Z |psi> with qubit q on bit (n-1-q)
            let direct: f64 = p.iter().enumerate().map(|(i, pi)| {
                let parity = s.support().iter().filter(|&&q| i >> (3 - q) & 1 == 1).count();
                if parity % 2 == 0 { *pi } else { -pi }
            }).sum();
            prop_assert!((v - direct).abs() < 1e-12);
            prop_assert!(v.abs() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn penalty_invariant_under_global_sign(psi in unit_vector(3), lambda in 0.01f64..10.0) {
        let cs = ZConstraintSet::of_order(3, 2).unwrap();
        let spec = LossSpec { constraints: Some(cs), lambda, ..LossSpec::default() };
        let flipped: Vec<f64> = psi.iter().map(|x| -x).collect();
        let (a, ..) = spec.loss_and_state_gradient(&psi);
        let (b, ..) = spec.loss_and_state_gradient(&flipped);
        prop_assert_eq!(a.penalty, b.penalty);
        prop_assert!(a.penalty >= 0.0);
    }

    #[test]
    fn rounding_invariant_under_global_sign(psi in unit_vector(3), seed in 0u64..100) {
        let g = gen_erdos_renyi(8, 0.5, WeightLaw::UniformSigned { b: 1.0 }, seed).unwrap();
        // zero amplitudes round to +1, so exact flip symmetry needs nonzero entries
        prop_assume!(psi.iter().all(|x| *x != 0.0));
        let flipped: Vec<f64> = psi.iter().map(|x| -x).collect();
        let a = round_solution(&StateVector::from_real(&psi).unwrap(), &g).unwrap();
        let b = round_solution(&StateVector::from_real(&flipped).unwrap(), &g).unwrap();
        prop_assert_eq!(a.cut, b.cut);
        prop_assert_eq!(a.cut, cut_value(&g, &signs_of(&psi, 8)).unwrap());
    }

    #[test]
    fn brute_force_relabel_invariant(n in 2usize..11, seed in 0u64..1000, perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let g = gen_erdos_renyi(n, 0.5, WeightLaw::UniformSigned { b: 1.0 }, seed).unwrap();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(perm_seed));
        let a = brute_force_maxcut(&g).unwrap().cut;
        let b = brute_force_maxcut(&g.relabeled(&perm).unwrap()).unwrap().cut;
        prop_assert!((a - b).abs() < 1e-9);
    }

    #[test]
    fn decomposition_round_trip_and_parseval(seed in 0u64..1000, eps in 0.0f64..0.5) {
        let g = gen_erdos_renyi(8, 0.5, WeightLaw::UniformSigned { b: 1.0 }, seed).unwrap();
        let w = pad_to_qubits(&g);
        let terms = pauli_decompose(&w).unwrap();
        let energy: f64 = terms.iter().map(|t| t.coeff * t.coeff).sum::<f64>() * 8.0;
        assert_relative_eq!(energy, w.matrix().norm_squared(), max_relative = 1e-10);
        prop_assert!(terms.iter().all(|t| t.y_count() % 2 == 0));
        let tr = truncate_decomposition(&terms, eps).unwrap();
        let mut all = tr.kept.clone();
        all.extend(tr.dropped.iter().cloned());
        let back = reconstruct(&all, 3).unwrap();
        prop_assert!((back - w.matrix()).amax() < 1e-9);
    }

    #[test]
    fn adjoint_matches_central_differences(seed in 0u64..200) {
        let n = 3;
        let g = gen_erdos_renyi(8, 0.6, WeightLaw::UniformSigned { b: 1.0 }, seed).unwrap();
        let w = pad_to_qubits(&g);
        let spec = LossSpec {
            objective: Some(Arc::new(DenseSymOp::sin_of(&w, 0.3).unwrap())),
            population: Some(Arc::new(DiagonalOp::sin_of(&population_diagonal(&g, 8).unwrap(), 0.2))),
            constraints: Some(ZConstraintSet::of_order(n, 2).unwrap()),
            lambda: 0.7,
            ..LossSpec::default()
        };
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
        let mut a = Ansatz::random(n, 2, 1.0, &mut rng);
        let grad = adjoint_gradient(&a, &spec).unwrap().gradient;
        let h = 1e-5;
        for k in 0..a.param_count() {
            let t = a.angles()[k];
            a.angles_mut()[k] = t + h;
            let up = evaluate_loss(&a, &spec).unwrap().total;
            a.angles_mut()[k] = t - h;
            let down = evaluate_loss(&a, &spec).unwrap().total;
            a.angles_mut()[k] = t;
            let fd = (up - down) / (2.0 * h);
            prop_assert!((fd - grad[k]).abs() <= 1e-6 * grad[k].abs().max(1e-3), "k={} fd={} adj={}", k, fd, grad[k]);
        }
    }
}

#[test]
fn weight_matrix_rejects_asymmetric_input() {
    let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 2.0, 0.0]);
    assert!(WeightMatrix::new(m).is_err());
}
