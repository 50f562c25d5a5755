//! Statevector simulation of the layered Ry/CNOT ansatz, Hadamard-test
//! expectation values and reverse-mode gradients of the training loss.
//!
//! Qubit `q` of an `n`-qubit register is bit `n - 1 - q` of the basis index,
//! so qubit 0 is the leftmost tensor factor.

use std::f64::consts::FRAC_1_SQRT_2;
use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Binomial, Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::constraints::{XConstraint, ZConstraintSet};
use crate::dense::UnitaryMatrix;
use crate::error::{Error, Result};
use crate::operator::{dot, RealSymOp};

pub(crate) fn qubit_bit(n_qubits: usize, q: usize) -> usize {
    1 << (n_qubits - 1 - q)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// `|0...0>`
    pub fn zero(n_qubits: usize) -> Self {
        let mut amps = vec![Complex64::new(0.0, 0.0); 1 << n_qubits];
        amps[0] = Complex64::new(1.0, 0.0);
        StateVector { n_qubits, amps }
    }

    /// `H^n |0...0>`
    pub fn plus(n_qubits: usize) -> Self {
        let dim = 1usize << n_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        StateVector {
            n_qubits,
            amps: vec![a; dim],
        }
    }

    /// Wraps amplitudes as given; the length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        if amps.is_empty() || !amps.len().is_power_of_two() {
            return Err(Error::invalid(format!(
                "state length {} is not a power of two",
                amps.len()
            )));
        }
        let n_qubits = amps.len().trailing_zeros() as usize;
        Ok(StateVector { n_qubits, amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::from_amplitudes(amps.iter().map(|&a| Complex64::new(a, 0.0)).collect())
    }

    /// Rescales to unit norm.
    pub fn normalized(amps: Vec<Complex64>) -> Result<Self> {
        let mut s = Self::from_amplitudes(amps)?;
        let norm = s.norm_sqr().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite state"));
        }
        s.amps.iter_mut().for_each(|a| *a /= norm);
        Ok(s)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn max_imag(&self) -> f64 {
        self.amps.iter().fold(0.0, |m, a| m.max(a.im.abs()))
    }

    /// Real parts of the amplitudes.
    pub fn real_parts(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.re).collect()
    }

    pub fn apply(&mut self, gate: Gate) {
        let n = self.n_qubits;
        match gate {
            Gate::Ry { qubit, theta } => {
                let (s, c) = (theta / 2.0).sin_cos();
                for_pairs(n, qubit, |i, j| {
                    let (a0, a1) = (self.amps[i], self.amps[j]);
                    self.amps[i] = a0 * c - a1 * s;
                    self.amps[j] = a0 * s + a1 * c;
                });
            }
            Gate::H { qubit } => {
                for_pairs(n, qubit, |i, j| {
                    let (a0, a1) = (self.amps[i], self.amps[j]);
                    self.amps[i] = (a0 + a1) * FRAC_1_SQRT_2;
                    self.amps[j] = (a0 - a1) * FRAC_1_SQRT_2;
                });
            }
            Gate::Cnot { control, target } => {
                let cb = qubit_bit(n, control);
                for_pairs(n, target, |i, j| {
                    if i & cb != 0 {
                        self.amps.swap(i, j);
                    }
                });
            }
        }
    }
}

// Calls f(i, i | bit) for every index i with the qubit's bit clear.
#[inline]
fn for_pairs(n_qubits: usize, qubit: usize, mut f: impl FnMut(usize, usize)) {
    let bit = qubit_bit(n_qubits, qubit);
    let dim = 1usize << n_qubits;
    let mut base = 0;
    while base < dim {
        for i in base..base + bit {
            f(i, i | bit);
        }
        base += 2 * bit;
    }
}

/// Gates of the simulated circuits. `Ry(theta) = exp(-i theta Y / 2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Gate {
    Ry { qubit: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    H { qubit: usize },
}

/// Layered hardware-efficient ansatz on a ring. Each layer is a column of
/// Ry rotations, CNOTs on pairs `(0,1), (2,3), ...`, a second Ry column, then
/// CNOTs on `(1,2), (3,4), ..., (n-1, 0)`. With odd `n` the leftover qubit of
/// each CNOT column is left idle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ansatz {
    n_qubits: usize,
    layers: usize,
    angles: Vec<f64>,
}

impl Ansatz {
    pub fn zeros(n_qubits: usize, layers: usize) -> Self {
        Ansatz {
            n_qubits,
            layers,
            angles: vec![0.0; 2 * layers * n_qubits],
        }
    }

    /// Angles i.i.d. `N(0, scale^2)`.
    pub fn random<R: Rng>(n_qubits: usize, layers: usize, scale: f64, rng: &mut R) -> Self {
        let normal = Normal::new(0.0, scale).expect("finite non-negative scale");
        Ansatz {
            n_qubits,
            layers,
            angles: (0..2 * layers * n_qubits).map(|_| normal.sample(rng)).collect(),
        }
    }

    pub fn from_angles(n_qubits: usize, layers: usize, angles: Vec<f64>) -> Result<Self> {
        if n_qubits == 0 || layers == 0 {
            return Err(Error::invalid("ansatz needs at least one qubit and one layer"));
        }
        if angles.len() != 2 * layers * n_qubits {
            return Err(Error::Dimension {
                expected: 2 * layers * n_qubits,
                got: angles.len(),
            });
        }
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::invalid("ansatz angles must be finite"));
        }
        Ok(Ansatz {
            n_qubits,
            layers,
            angles,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn layers(&self) -> usize {
        self.layers
    }

    pub fn param_count(&self) -> usize {
        self.angles.len()
    }

    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn angles_mut(&mut self) -> &mut [f64] {
        &mut self.angles
    }

    /// Flat index of the rotation on `qubit` in column `half` (0 or 1) of `layer`.
    pub fn index(&self, layer: usize, half: usize, qubit: usize) -> usize {
        (2 * layer + half) * self.n_qubits + qubit
    }

    /// Gate list in application order.
    pub fn gates(&self) -> Vec<Gate> {
        let n = self.n_qubits;
        let mut out = Vec::new();
        for layer in 0..self.layers {
            for half in 0..2 {
                for q in 0..n {
                    out.push(Gate::Ry {
                        qubit: q,
                        theta: self.angles[self.index(layer, half, q)],
                    });
                }
                for (control, target) in cnot_column(n, half) {
                    out.push(Gate::Cnot { control, target });
                }
            }
        }
        out
    }
}

/// CNOT pairs `(control, target)` of the first (`half = 0`) or second column.
pub fn cnot_column(n_qubits: usize, half: usize) -> Vec<(usize, usize)> {
    if n_qubits < 2 {
        return Vec::new();
    }
    let mut pairs = Vec::new();
    let mut q = half;
    while q + 1 < n_qubits {
        pairs.push((q, q + 1));
        q += 2;
    }
    // the ring closes (n-1, 0) only when both ends are still free
    if half == 1 && n_qubits % 2 == 0 {
        pairs.push((n_qubits - 1, 0));
    }
    pairs
}

/// `U_V |0...0>` on the general complex simulator.
pub fn apply_ansatz(a: &Ansatz) -> StateVector {
    let mut psi = StateVector::zero(a.n_qubits);
    for g in a.gates() {
        psi.apply(g);
    }
    psi
}

/// `Im <psi|U|psi>`, the ancilla `<Z>` of the Hadamard test.
pub fn hadamard_test_im(psi: &StateVector, u: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != psi.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: psi.dim(),
        });
    }
    let m = u.matrix();
    let a = psi.amplitudes();
    let mut acc = Complex64::new(0.0, 0.0);
    for j in 0..a.len() {
        let col = m.column(j);
        let mut s = Complex64::new(0.0, 0.0);
        for (i, ai) in a.iter().enumerate() {
            s += ai.conj() * col[i];
        }
        acc += s * a[j];
    }
    Ok(acc.im)
}

/// Runs the ancilla protocol explicitly: ancilla in `(|0> - i|1>)/sqrt 2`,
/// controlled-`U`, Hadamard on the ancilla, then `shots` Z measurements.
/// Returns the sample mean of the +-1 outcomes.
pub fn sample_hadamard_test_im<R: Rng>(
    psi: &StateVector,
    u: &UnitaryMatrix,
    shots: u64,
    rng: &mut R,
) -> Result<f64> {
    if shots == 0 {
        return Err(Error::invalid("shot count must be at least 1"));
    }
    let p0 = ancilla_zero_probability(psi, u)?;
    Ok(sample_pm1_mean(p0, shots, rng))
}

fn ancilla_zero_probability(psi: &StateVector, u: &UnitaryMatrix) -> Result<f64> {
    if u.dim() != psi.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: psi.dim(),
        });
    }
    let amps = psi.amplitudes();
    let d = amps.len();
    let branch0: Vec<Complex64> = amps.iter().map(|a| a * FRAC_1_SQRT_2).collect();
    let branch1: Vec<Complex64> = amps
        .iter()
        .map(|a| a * Complex64::new(0.0, -FRAC_1_SQRT_2))
        .collect();
    let m = u.matrix();
    let mut controlled = vec![Complex64::new(0.0, 0.0); d];
    for (j, b) in branch1.iter().enumerate() {
        for (i, c) in controlled.iter_mut().enumerate() {
            *c += m[(i, j)] * b;
        }
    }
    let p0: f64 = branch0
        .iter()
        .zip(&controlled)
        .map(|(a, b)| ((a + b) * FRAC_1_SQRT_2).norm_sqr())
        .sum();
    Ok(p0.clamp(0.0, 1.0))
}

/// Mean of `shots` draws of a +-1 variable whose `+1` probability is `p_plus`.
pub(crate) fn sample_pm1_mean<R: Rng>(p_plus: f64, shots: u64, rng: &mut R) -> f64 {
    let k = Binomial::new(shots, p_plus.clamp(0.0, 1.0))
        .expect("valid binomial")
        .sample(rng);
    (2.0 * k as f64 - shots as f64) / shots as f64
}

/// `Im <+|U|+>` with `|+> = H^n |0>`.
pub fn hadamard_test_on_plus(u: &UnitaryMatrix) -> Result<f64> {
    let n = u.dim().trailing_zeros() as usize;
    if !u.dim().is_power_of_two() {
        return Err(Error::invalid("unitary dimension is not a power of two"));
    }
    hadamard_test_im(&StateVector::plus(n), u)
}

pub fn zbasis_probabilities(psi: &StateVector) -> Vec<f64> {
    psi.amplitudes().iter().map(|a| a.norm_sqr()).collect()
}

// --- real-valued fast path -------------------------------------------------

fn ry_real(psi: &mut [f64], n: usize, qubit: usize, theta: f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    for_pairs(n, qubit, |i, j| {
        let (a0, a1) = (psi[i], psi[j]);
        psi[i] = c * a0 - s * a1;
        psi[j] = s * a0 + c * a1;
    });
}

fn cnot_real(psi: &mut [f64], n: usize, control: usize, target: usize) {
    let cb = qubit_bit(n, control);
    for_pairs(n, target, |i, j| {
        if i & cb != 0 {
            psi.swap(i, j);
        }
    });
}

/// `U_V |0...0>` on real amplitudes.
pub fn forward_real(a: &Ansatz) -> Vec<f64> {
    let n = a.n_qubits;
    let mut psi = vec![0.0; 1 << n];
    psi[0] = 1.0;
    let columns = [cnot_column(n, 0), cnot_column(n, 1)];
    for layer in 0..a.layers {
        for (half, column) in columns.iter().enumerate() {
            for q in 0..n {
                ry_real(&mut psi, n, q, a.angles[a.index(layer, half, q)]);
            }
            for &(c, t) in column {
                cnot_real(&mut psi, n, c, t);
            }
        }
    }
    psi
}

/// Reverse sweep: given the final state and `dL/dpsi`, returns `dL/dtheta`.
/// Gates are undone one by one on both vectors, so memory stays at two states.
pub fn backward_real(a: &Ansatz, final_state: &[f64], dl_dpsi: &[f64]) -> Vec<f64> {
    let n = a.n_qubits;
    let mut psi = final_state.to_vec();
    let mut adj = dl_dpsi.to_vec();
    let mut grad = vec![0.0; a.param_count()];
    let columns = [cnot_column(n, 0), cnot_column(n, 1)];
    for layer in (0..a.layers).rev() {
        for half in (0..2).rev() {
            for &(c, t) in columns[half].iter().rev() {
                cnot_real(&mut psi, n, c, t);
                cnot_real(&mut adj, n, c, t);
            }
            for q in (0..n).rev() {
                let k = a.index(layer, half, q);
                // d/dtheta Ry(theta) = (-iY/2) Ry(theta), and -iY maps (x0, x1) -> (-x1, x0)
                let mut g = 0.0;
                for_pairs(n, q, |i, j| {
                    g += adj[j] * psi[i] - adj[i] * psi[j];
                });
                grad[k] = 0.5 * g;
                ry_real(&mut psi, n, q, -a.angles[k]);
                ry_real(&mut adj, n, q, -a.angles[k]);
            }
        }
    }
    grad
}

/// Loss terms of one evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct LossComponents {
    /// `Im <psi|U_W|psi>`
    pub obj_w: f64,
    /// `Im <psi|U_P|psi>`
    pub obj_p: f64,
    /// Constraint penalty.
    pub penalty: f64,
    pub total: f64,
}

/// What enters the training loss. Operators are the imaginary parts
/// `sin(alpha W)` and `sin(beta P)`; a missing operator drops its term.
#[derive(Debug, Clone, Default)]
pub struct LossSpec {
    pub objective: Option<Arc<dyn RealSymOp>>,
    pub population: Option<Arc<dyn RealSymOp>>,
    pub constraints: Option<ZConstraintSet>,
    pub lambda: f64,
    pub xconstraints: Vec<XConstraint>,
    pub x_lambda: f64,
}

/// Loss value, gradient and the state it was evaluated on.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub components: LossComponents,
    pub gradient: Vec<f64>,
    pub state: Vec<f64>,
    pub zvalues: Vec<f64>,
    pub xvalues: Vec<f64>,
}

impl LossSpec {
    fn check_dim(&self, dim: usize) -> Result<()> {
        for op in [&self.objective, &self.population].into_iter().flatten() {
            if op.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: op.dim(),
                });
            }
        }
        if let Some(c) = &self.constraints {
            if c.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: c.dim(),
                });
            }
        }
        Ok(())
    }

    /// Loss at `psi` and its gradient with respect to the (real) amplitudes.
    pub fn loss_and_state_gradient(&self, psi: &[f64]) -> (LossComponents, Vec<f64>, Vec<f64>, Vec<f64>) {
        let dim = psi.len();
        let mut grad = vec![0.0; dim];
        let mut buf = vec![0.0; dim];
        let mut comps = LossComponents::default();

        if let Some(op) = &self.objective {
            op.apply(psi, &mut buf);
            comps.obj_w = dot(psi, &buf);
            grad.iter_mut().zip(&buf).for_each(|(g, b)| *g += 2.0 * b);
        }
        if let Some(op) = &self.population {
            op.apply(psi, &mut buf);
            comps.obj_p = dot(psi, &buf);
            grad.iter_mut().zip(&buf).for_each(|(g, b)| *g += 2.0 * b);
        }
        let mut zvalues = Vec::new();
        if let Some(cs) = &self.constraints {
            let probs: Vec<f64> = psi.iter().map(|a| a * a).collect();
            zvalues = cs.values(&probs);
            comps.penalty += self.lambda * zvalues.iter().map(|v| v * v).sum::<f64>();
            let dp = cs.penalty_gradient(&zvalues, self.lambda);
            grad.iter_mut()
                .zip(psi)
                .zip(&dp)
                .for_each(|((g, a), d)| *g += 2.0 * a * d);
        }
        let mut xvalues = Vec::with_capacity(self.xconstraints.len());
        for xc in &self.xconstraints {
            let v = xc.value_real(psi);
            let r = v - xc.target;
            comps.penalty += self.x_lambda * r * r;
            // d<O_x>/dpsi_i = 2 psi_{i ^ mask}
            let coef = 4.0 * self.x_lambda * r;
            for (i, g) in grad.iter_mut().enumerate() {
                *g += coef * psi[i ^ xc.mask];
            }
            xvalues.push(v);
        }
        comps.total = comps.obj_w + comps.obj_p + comps.penalty;
        (comps, grad, zvalues, xvalues)
    }
}

/// Loss of the ansatz state and its exact gradient with respect to every
/// angle, from one forward and one reverse sweep.
pub fn adjoint_gradient(a: &Ansatz, spec: &LossSpec) -> Result<Evaluation> {
    spec.check_dim(1 << a.n_qubits)?;
    let state = forward_real(a);
    let (components, dl_dpsi, zvalues, xvalues) = spec.loss_and_state_gradient(&state);
    let gradient = backward_real(a, &state, &dl_dpsi);
    Ok(Evaluation {
        components,
        gradient,
        state,
        zvalues,
        xvalues,
    })
}

/// Loss only, no gradient.
pub fn evaluate_loss(a: &Ansatz, spec: &LossSpec) -> Result<LossComponents> {
    spec.check_dim(1 << a.n_qubits)?;
    let state = forward_real(a);
    Ok(spec.loss_and_state_gradient(&state).0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::{herm_expm, WeightMatrix};
    use nalgebra::dmatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    #[test]
    fn zero_angles_give_ground_state() {
        let psi = apply_ansatz(&Ansatz::zeros(3, 1));
        assert_eq!(psi, StateVector::zero(3));
    }

    #[test]
    fn single_rotation() {
        let a = Ansatz::from_angles(1, 1, vec![PI / 2.0, 0.0]).unwrap();
        let psi = apply_ansatz(&a);
        assert!((psi.amplitudes()[0].re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((psi.amplitudes()[1].re - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn ring_columns() {
        assert_eq!(cnot_column(4, 0), vec![(0, 1), (2, 3)]);
        assert_eq!(cnot_column(4, 1), vec![(1, 2), (3, 0)]);
        assert_eq!(cnot_column(5, 0), vec![(0, 1), (2, 3)]);
        assert_eq!(cnot_column(5, 1), vec![(1, 2), (3, 4)]);
        assert_eq!(cnot_column(2, 1), vec![(1, 0)]);
        assert!(cnot_column(1, 0).is_empty());
    }

    #[test]
    fn real_and_complex_paths_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=5 {
            let a = Ansatz::random(n, 3, 1.0, &mut rng);
            let c = apply_ansatz(&a);
            let r = forward_real(&a);
            assert!(c.max_imag() < 1e-12);
            assert!((c.norm_sqr() - 1.0).abs() < 1e-12);
            for (x, y) in c.amplitudes().iter().zip(&r) {
                assert!((x.re - y).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cnot_flips_target_when_control_set() {
        // |10> -> |11> with control qubit 0 (msb), target qubit 1
        let mut psi = StateVector::from_real(&[0.0, 0.0, 1.0, 0.0]).unwrap();
        psi.apply(Gate::Cnot { control: 0, target: 1 });
        assert_eq!(psi.real_parts(), vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn hadamard_test_identity_and_pauli_x() {
        let psi = StateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert_eq!(hadamard_test_im(&psi, &UnitaryMatrix::identity(2)).unwrap(), 0.0);
        let a = 0.4;
        let u = herm_expm(&WeightMatrix::new(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap(), a).unwrap();
        assert!((hadamard_test_im(&psi, &u).unwrap() - a.sin()).abs() < 1e-14);
        assert!(hadamard_test_im(&StateVector::zero(2), &u).is_err());
    }

    #[test]
    fn ancilla_protocol_probability_matches_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = Ansatz::random(3, 2, 1.0, &mut rng);
        let psi = apply_ansatz(&a);
        let w = crate::dense::tests_support::random_symmetric(8, 4);
        let u = herm_expm(&w, 0.3).unwrap();
        let exact = hadamard_test_im(&psi, &u).unwrap();
        let p0 = ancilla_zero_probability(&psi, &u).unwrap();
        assert!((2.0 * p0 - 1.0 - exact).abs() < 1e-12);
    }

    #[test]
    fn zero_shots_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let u = UnitaryMatrix::identity(2);
        assert!(sample_hadamard_test_im(&StateVector::zero(1), &u, 0, &mut rng).is_err());
    }

    #[test]
    fn probabilities() {
        assert_eq!(zbasis_probabilities(&StateVector::zero(2)), vec![1.0, 0.0, 0.0, 0.0]);
        let p = zbasis_probabilities(&StateVector::plus(3));
        assert!(p.iter().all(|x| (x - 0.125).abs() < 1e-15));
    }

    #[test]
    fn zero_problem_has_zero_gradient() {
        let spec = LossSpec::default();
        let ev = adjoint_gradient(&Ansatz::zeros(3, 2), &spec).unwrap();
        assert!(ev.gradient.iter().all(|&g| g == 0.0));
        assert_eq!(ev.components.total, 0.0);
    }
}
