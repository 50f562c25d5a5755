//! Approximate amplitude constraints.
//!
//! A z-axis Pauli string on support `S` has expectation
//! `sum_i p_i (-1)^{|i & S|}`: the population difference between the two
//! halves of the basis split by the parity of `S`. All of them come out of a
//! single Walsh-Hadamard transform of the z-basis probabilities.

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dense::WeightMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::simulator::{qubit_bit, StateVector};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PauliZString {
    support: Vec<usize>,
}

impl PauliZString {
    pub fn new(mut support: Vec<usize>, n_qubits: usize) -> Result<Self> {
        support.sort_unstable();
        if support.is_empty() {
            return Err(Error::invalid("Pauli string support is empty"));
        }
        if support.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("Pauli string support has repeated qubits"));
        }
        if *support.last().unwrap() >= n_qubits {
            return Err(Error::invalid(format!(
                "Pauli string acts outside {n_qubits} qubits"
            )));
        }
        Ok(PauliZString { support })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn order(&self) -> usize {
        self.support.len()
    }

    /// Bit mask of the support in basis-index space.
    pub fn mask(&self, n_qubits: usize) -> usize {
        self.support.iter().map(|&q| qubit_bit(n_qubits, q)).fold(0, |a, b| a | b)
    }
}

/// Every z-string of order `1..=k`, grouped by order and lexicographic
/// within an order. There are `sum_{j<=k} C(n, j)` of them.
pub fn enumerate_zstrings(n: usize, k: usize) -> Result<Vec<PauliZString>> {
    if k == 0 || k > n {
        return Err(Error::invalid(format!("constraint order {k} outside 1..={n}")));
    }
    let mut out = Vec::new();
    for order in 1..=k {
        let mut combo: Vec<usize> = (0..order).collect();
        loop {
            out.push(PauliZString {
                support: combo.clone(),
            });
            // next combination in lexicographic order
            let mut i = order;
            while i > 0 && combo[i - 1] == n - order + i - 1 {
                i -= 1;
            }
            if i == 0 {
                break;
            }
            combo[i - 1] += 1;
            for j in i..order {
                combo[j] = combo[j - 1] + 1;
            }
        }
    }
    Ok(out)
}

/// Number of strings `enumerate_zstrings(n, k)` returns.
pub fn zstring_count(n: usize, k: usize) -> usize {
    let mut total = 0usize;
    let mut binom = 1usize;
    for j in 1..=k.min(n) {
        binom = binom * (n - j + 1) / j;
        total += binom;
    }
    total
}

/// In-place unnormalized Walsh-Hadamard transform,
/// `out_j = sum_i x_i (-1)^{popcount(i & j)}`.
pub fn walsh_hadamard(x: &mut [f64]) {
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        let mut base = 0;
        while base < n {
            for i in base..base + h {
                let (a, b) = (x[i], x[i + h]);
                x[i] = a + b;
                x[i + h] = a - b;
            }
            base += 2 * h;
        }
        h *= 2;
    }
}

/// `<O_z>` for every string, from one set of z-basis probabilities.
pub fn marginal_expectations(p: &[f64], strings: &[PauliZString]) -> Result<Vec<f64>> {
    if p.is_empty() || !p.len().is_power_of_two() {
        return Err(Error::invalid("probability vector length is not a power of two"));
    }
    let n = p.len().trailing_zeros() as usize;
    let set = ZConstraintSet::new(n, strings)?;
    Ok(set.values(p))
}

/// `lambda * sum_s v_s^2`
pub fn penalty_term(values: &[f64], lambda: f64) -> f64 {
    lambda * values.iter().map(|v| v * v).sum::<f64>()
}

/// Precomputed masks for evaluating and differentiating the penalty.
#[derive(Debug, Clone)]
pub struct ZConstraintSet {
    n_qubits: usize,
    masks: Vec<usize>,
}

impl ZConstraintSet {
    pub fn new(n_qubits: usize, strings: &[PauliZString]) -> Result<Self> {
        let mut masks = Vec::with_capacity(strings.len());
        for s in strings {
            if s.support.iter().any(|&q| q >= n_qubits) {
                return Err(Error::invalid(format!(
                    "string {:?} acts outside {n_qubits} qubits",
                    s.support
                )));
            }
            masks.push(s.mask(n_qubits));
        }
        Ok(ZConstraintSet { n_qubits, masks })
    }

    pub fn of_order(n_qubits: usize, k: usize) -> Result<Self> {
        Self::new(n_qubits, &enumerate_zstrings(n_qubits, k)?)
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn values(&self, p: &[f64]) -> Vec<f64> {
        let mut spectrum = p.to_vec();
        walsh_hadamard(&mut spectrum);
        self.masks.iter().map(|&m| spectrum[m]).collect()
    }

    /// `d/dp_i (lambda sum_s v_s^2) = 2 lambda sum_s v_s (-1)^{|i & S_s|}`
    pub fn penalty_gradient(&self, values: &[f64], lambda: f64) -> Vec<f64> {
        let mut coeffs = vec![0.0; self.dim()];
        for (&m, &v) in self.masks.iter().zip(values) {
            coeffs[m] += 2.0 * lambda * v;
        }
        walsh_hadamard(&mut coeffs);
        coeffs
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub values: Vec<f64>,
    pub penalty: f64,
    pub sigma_rho: f64,
}

/// Constraint values, penalty and the population variance over the first
/// `n_vertices` basis states.
pub fn constraint_report(
    psi: &StateVector,
    strings: &[PauliZString],
    lambda: f64,
    n_vertices: usize,
) -> Result<ConstraintReport> {
    let p: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
    let values = marginal_expectations(&p, strings)?;
    Ok(ConstraintReport {
        penalty: penalty_term(&values, lambda),
        sigma_rho: sigma_rho(&p, n_vertices),
        values,
    })
}

/// Population variance of `p[..n_vertices]`.
pub fn sigma_rho(p: &[f64], n_vertices: usize) -> f64 {
    let head = &p[..n_vertices.min(p.len())];
    if head.is_empty() {
        return 0.0;
    }
    let mean = head.iter().sum::<f64>() / head.len() as f64;
    head.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / head.len() as f64
}

/// Diagonal of `P`: `-(P_max - sum_j |W_ij|)` for vertices, `-P_max` for
/// padding states.
pub fn population_diagonal(g: &Graph, dim: usize) -> Result<Vec<f64>> {
    if dim < g.n_vertices() {
        return Err(Error::Dimension {
            expected: g.n_vertices(),
            got: dim,
        });
    }
    let deg = g.abs_degrees();
    let p_max = deg.iter().copied().fold(0.0, f64::max);
    let mut diag = vec![-p_max; dim];
    for (d, w) in diag.iter_mut().zip(&deg) {
        *d = -(p_max - w);
    }
    Ok(diag)
}

pub fn build_population_matrix(g: &Graph, dim: usize) -> Result<WeightMatrix> {
    WeightMatrix::diagonal(&population_diagonal(g, dim)?)
}

/// `<psi| X_S |psi>` for the Pauli-X string on `support`.
pub fn xstring_expectation(psi: &StateVector, support: &[usize]) -> Result<f64> {
    if support.is_empty() {
        return Err(Error::invalid("x-string support is empty"));
    }
    let n = psi.n_qubits();
    if support.iter().any(|&q| q >= n) {
        return Err(Error::invalid("x-string acts outside the register"));
    }
    let mask = support.iter().map(|&q| qubit_bit(n, q)).fold(0, |a, b| a | b);
    let a = psi.amplitudes();
    Ok(a.iter()
        .enumerate()
        .map(|(i, ai)| (a[i ^ mask].conj() * ai).re)
        .sum())
}

/// Equality constraint `<X_S> = target` used for bisection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct XConstraint {
    pub mask: usize,
    pub target: f64,
}

impl XConstraint {
    /// Target for a fraction `p` of positive amplitudes:
    /// `p^2 + (1-p)^2 - 2p(1-p)`, which vanishes at `p = 1/2`.
    pub fn for_ratio(support: &[usize], n_qubits: usize, p: f64) -> Result<Self> {
        if support.is_empty() || support.iter().any(|&q| q >= n_qubits) {
            return Err(Error::invalid("invalid x-string support"));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid("partition ratio outside [0, 1]"));
        }
        let mask = support.iter().map(|&q| qubit_bit(n_qubits, q)).fold(0, |a, b| a | b);
        Ok(XConstraint {
            mask,
            target: p * p + (1.0 - p) * (1.0 - p) - 2.0 * p * (1.0 - p),
        })
    }

    pub fn value_real(&self, psi: &[f64]) -> f64 {
        psi.iter().enumerate().map(|(i, a)| a * psi[i ^ self.mask]).sum()
    }
}

/// `count` distinct random non-empty supports, reproducible from `seed`.
pub fn random_xsupports(n_qubits: usize, count: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let available = (1usize << n_qubits) - 1;
    let picks = sample(&mut rng, available, count.min(available)).into_vec();
    let mut out: Vec<Vec<usize>> = picks
        .into_iter()
        .map(|k| {
            let code = k + 1;
            (0..n_qubits).filter(|q| code >> q & 1 == 1).collect()
        })
        .collect();
    // keep order independent of the sampler's internals
    out.sort();
    let _ = rng.gen::<u8>();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulator::{apply_ansatz, Ansatz};
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::SeedableRng;

    #[test]
    fn counts() {
        assert_eq!(enumerate_zstrings(10, 2).unwrap().len(), 55);
        assert_eq!(enumerate_zstrings(3, 3).unwrap().len(), 7);
        let s = enumerate_zstrings(2, 1).unwrap();
        assert_eq!(s.iter().map(|s| s.support().to_vec()).collect::<Vec<_>>(), vec![vec![0], vec![1]]);
        for n in 1..9 {
            for k in 1..=n {
                assert_eq!(zstring_count(n, k), enumerate_zstrings(n, k).unwrap().len());
            }
        }
        assert!(enumerate_zstrings(3, 0).is_err());
        assert!(enumerate_zstrings(3, 4).is_err());
    }

    #[test]
    fn strings_are_distinct_and_ordered() {
        let s = enumerate_zstrings(5, 3).unwrap();
        let mut seen = std::collections::HashSet::new();
        for z in &s {
            assert!(seen.insert(z.mask(5)));
        }
        assert_eq!(s[5].support(), &[0, 1]);
        assert_eq!(s.last().unwrap().support(), &[2, 3, 4]);
    }

    #[test]
    fn marginal_examples() {
        let s0 = PauliZString::new(vec![0], 2).unwrap();
        let s01 = PauliZString::new(vec![0, 1], 2).unwrap();
        assert_eq!(marginal_expectations(&[1.0, 0.0, 0.0, 0.0], &[s0.clone()]).unwrap(), vec![1.0]);
        assert_eq!(marginal_expectations(&[0.25; 4], &[s0, s01.clone()]).unwrap(), vec![0.0, 0.0]);
        assert_eq!(marginal_expectations(&[0.5, 0.0, 0.0, 0.5], &[s01]).unwrap(), vec![1.0]);
    }

    #[test]
    fn marginals_match_dense_operator() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=6 {
            let psi = apply_ansatz(&Ansatz::random(n, 2, 1.0, &mut rng));
            let p: Vec<f64> = psi.amplitudes().iter().map(|a| a.norm_sqr()).collect();
            let strings = enumerate_zstrings(n, n).unwrap();
            let fast = marginal_expectations(&p, &strings).unwrap();
            for (s, v) in strings.iter().zip(&fast) {
                let mask = s.mask(n);
                let diag = DMatrix::from_fn(1 << n, 1, |i, _| {
                    if (i & mask).count_ones() % 2 == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                });
                let direct: f64 = psi
                    .amplitudes()
                    .iter()
                    .enumerate()
                    .map(|(i, a)| (a.conj() * Complex64::new(diag[(i, 0)], 0.0) * a).re)
                    .sum();
                assert!((direct - v).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn penalty_examples() {
        assert_eq!(penalty_term(&[0.0, 0.0], 3.0), 0.0);
        assert_eq!(penalty_term(&[1.0, -1.0], 0.5), 1.0);
    }

    #[test]
    fn three_qubit_counterexample() {
        let psi = StateVector::from_real(&[0.5, 0.0, 0.0, -0.5, 0.0, 0.5, 0.5, 0.0]).unwrap();
        let k2 = enumerate_zstrings(3, 2).unwrap();
        let r = constraint_report(&psi, &k2, 1.0, 8).unwrap();
        assert!(r.penalty < 1e-24);
        let k3 = enumerate_zstrings(3, 3).unwrap();
        let r = constraint_report(&psi, &k3, 1.0, 8).unwrap();
        assert!((r.penalty - 1.0).abs() < 1e-12);
        assert!(r.sigma_rho > 0.0);
    }

    #[test]
    fn penalty_gradient_matches_finite_differences() {
        let set = ZConstraintSet::of_order(3, 2).unwrap();
        let p = [0.3, 0.1, 0.05, 0.15, 0.1, 0.1, 0.12, 0.08];
        let lam = 0.7;
        let grad = set.penalty_gradient(&set.values(&p), lam);
        let h = 1e-6;
        for i in 0..8 {
            let mut hi = p;
            let mut lo = p;
            hi[i] += h;
            lo[i] -= h;
            let fd = (penalty_term(&set.values(&hi), lam) - penalty_term(&set.values(&lo), lam)) / (2.0 * h);
            assert!((fd - grad[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn population_matrix_examples() {
        let g = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, -1.0)]).unwrap();
        assert_eq!(population_diagonal(&g, 4).unwrap(), vec![-1.0, 0.0, -1.0, -2.0]);
        let ring = Graph::from_triples(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, -1.0), (3, 0, 1.0)]).unwrap();
        assert!(build_population_matrix(&ring, 4).unwrap().matrix().iter().all(|&x| x == 0.0));
        let edge = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(population_diagonal(&edge, 2).unwrap(), vec![0.0, 0.0]);
        assert!(population_diagonal(&g, 2).is_err());
    }

    #[test]
    fn xstring_examples() {
        let plus = StateVector::plus(4);
        assert!((xstring_expectation(&plus, &[0, 2]).unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(xstring_expectation(&StateVector::zero(3), &[0]).unwrap(), 0.0);
        assert!(xstring_expectation(&plus, &[]).is_err());
        assert!(xstring_expectation(&plus, &[4]).is_err());
    }

    #[test]
    fn balanced_sign_states_average_to_zero() {
        let n = 10;
        let dim = 1usize << n;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let supports = random_xsupports(n, 8, 1);
        let mut total = 0.0;
        let trials = 20;
        for _ in 0..trials {
            let neg = sample(&mut rng, dim, dim / 2).into_vec();
            let mut amps = vec![1.0 / (dim as f64).sqrt(); dim];
            for k in neg {
                amps[k] = -amps[k];
            }
            let psi = StateVector::from_real(&amps).unwrap();
            let mean: f64 = supports
                .iter()
                .map(|s| xstring_expectation(&psi, s).unwrap())
                .sum::<f64>()
                / supports.len() as f64;
            total += mean;
        }
        assert!((total / trials as f64).abs() < 0.1);
    }

    #[test]
    fn ratio_targets() {
        let c = XConstraint::for_ratio(&[0], 2, 0.5).unwrap();
        assert_eq!(c.target, 0.0);
        let c = XConstraint::for_ratio(&[0], 2, 1.0).unwrap();
        assert_eq!(c.target, 1.0);
        let c = XConstraint::for_ratio(&[0, 1], 2, 0.25).unwrap();
        assert!((c.target - 0.25).abs() < 1e-15);
    }

    #[test]
    fn random_supports_are_distinct() {
        let s = random_xsupports(4, 8, 3);
        assert_eq!(s.len(), 8);
        let mut d = s.clone();
        d.dedup();
        assert_eq!(d.len(), 8);
        assert!(s.iter().all(|v| !v.is_empty() && v.iter().all(|&q| q < 4)));
        assert_eq!(random_xsupports(2, 10, 0).len(), 3);
    }
}
