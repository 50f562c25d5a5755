//! Pauli-string decomposition of weight matrices and controlled Pauli-gadget
//! circuits.
//!
//! A string is stored as two basis-index masks: `P = i^{|x & z|} X^x Z^z`,
//! where `X^x Z^z |j> = (-1)^{|j & z|} |j ^ x>`. For real symmetric `W` only
//! strings with an even number of `Y` letters carry weight.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constraints::walsh_hadamard;
use crate::dense::{herm_expm, WeightMatrix};
use crate::error::{Error, Result};
use crate::simulator::qubit_bit;

pub const DECOMPOSE_QUBIT_LIMIT: usize = 12;
const COEFF_CUTOFF: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    fn letter(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    n_qubits: usize,
    x: usize,
    z: usize,
    pub coeff: f64,
}

impl PauliString {
    /// Builds a string from one letter per qubit.
    pub fn from_axes(axes: &[Pauli], coeff: f64) -> Result<Self> {
        if !coeff.is_finite() {
            return Err(Error::invalid("Pauli coefficient must be finite"));
        }
        let n = axes.len();
        let (mut x, mut z) = (0, 0);
        for (q, a) in axes.iter().enumerate() {
            let bit = qubit_bit(n, q);
            if matches!(a, Pauli::X | Pauli::Y) {
                x |= bit;
            }
            if matches!(a, Pauli::Z | Pauli::Y) {
                z |= bit;
            }
        }
        Ok(PauliString {
            n_qubits: n,
            x,
            z,
            coeff,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn axis(&self, q: usize) -> Pauli {
        let bit = qubit_bit(self.n_qubits, q);
        match (self.x & bit != 0, self.z & bit != 0) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    pub fn axes(&self) -> Vec<Pauli> {
        (0..self.n_qubits).map(|q| self.axis(q)).collect()
    }

    /// Qubits carrying a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.n_qubits)
            .filter(|&q| self.axis(q) != Pauli::I)
            .collect()
    }

    pub fn is_identity(&self) -> bool {
        self.x == 0 && self.z == 0
    }

    pub fn y_count(&self) -> u32 {
        (self.x & self.z).count_ones()
    }

    /// Whether the underlying operators commute.
    pub fn commutes_with(&self, other: &PauliString) -> bool {
        ((self.x & other.z).count_ones() + (self.z & other.x).count_ones()) % 2 == 0
    }

    /// `coeff * P` as a dense matrix.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let dim = 1usize << self.n_qubits;
        let phase = Complex64::i().powu(self.y_count()) * self.coeff;
        let mut m = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let sign = if (j & self.z).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            m[(j ^ self.x, j)] = phase * sign;
        }
        m
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let word: String = self.axes().into_iter().map(Pauli::letter).collect();
        write!(f, "{:+e} {word}", self.coeff)
    }
}

/// `W = sum_s c_s P_s` with `c_s = Tr[P_s W] / 2^n`, ordered by x-mask then z-mask.
pub fn pauli_decompose(w: &WeightMatrix) -> Result<Vec<PauliString>> {
    let n = w.n_qubits();
    if n > DECOMPOSE_QUBIT_LIMIT {
        return Err(Error::invalid(format!(
            "dense decomposition is limited to {DECOMPOSE_QUBIT_LIMIT} qubits"
        )));
    }
    let dim = w.dim();
    let m = w.matrix();
    let mut terms = Vec::new();
    let mut f = vec![0.0; dim];
    for x in 0..dim {
        for (k, fk) in f.iter_mut().enumerate() {
            *fk = m[(k, k ^ x)];
        }
        if f.iter().all(|&v| v == 0.0) {
            continue;
        }
        walsh_hadamard(&mut f);
        for (z, &t) in f.iter().enumerate() {
            let y = (x & z).count_ones();
            // odd Y counts give imaginary coefficients, which vanish for symmetric W
            if y % 2 == 1 {
                continue;
            }
            let sign = if (y / 2) % 2 == 0 { 1.0 } else { -1.0 };
            let c = sign * t / dim as f64;
            if c.abs() >= COEFF_CUTOFF {
                terms.push(PauliString {
                    n_qubits: n,
                    x,
                    z,
                    coeff: c,
                });
            }
        }
    }
    Ok(terms)
}

/// `sum_s c_s P_s` for strings with an even number of `Y` letters.
pub fn reconstruct(terms: &[PauliString], n_qubits: usize) -> Result<DMatrix<f64>> {
    let dim = 1usize << n_qubits;
    let mut m = DMatrix::zeros(dim, dim);
    for t in terms {
        add_term(&mut m, t, 1.0)?;
        if t.n_qubits != n_qubits {
            return Err(Error::Dimension {
                expected: n_qubits,
                got: t.n_qubits,
            });
        }
    }
    Ok(m)
}

fn real_phase(t: &PauliString) -> Result<f64> {
    let y = t.y_count();
    if y % 2 == 1 {
        return Err(Error::invalid(format!("string {t} is not real")));
    }
    Ok(if (y / 2) % 2 == 0 { 1.0 } else { -1.0 })
}

fn add_term(m: &mut DMatrix<f64>, t: &PauliString, scale: f64) -> Result<()> {
    let c = scale * t.coeff * real_phase(t)?;
    for j in 0..m.nrows() {
        let sign = if (j & t.z).count_ones() % 2 == 0 { c } else { -c };
        m[(j ^ t.x, j)] += sign;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truncation {
    /// Kept terms in descending `|coeff|`.
    pub kept: Vec<PauliString>,
    pub dropped: Vec<PauliString>,
    /// `sum |W_approx - W| / sum |W|` over all entries.
    pub error: f64,
}

/// Keeps the largest terms until the relative L1 error reaches `epsilon`.
pub fn truncate_decomposition(terms: &[PauliString], epsilon: f64) -> Result<Truncation> {
    if !(epsilon.is_finite() && epsilon >= 0.0) {
        return Err(Error::invalid("epsilon must be non-negative"));
    }
    let Some(first) = terms.first() else {
        return Err(Error::invalid("no terms to truncate"));
    };
    let n = first.n_qubits;
    let mut sorted = terms.to_vec();
    sorted.sort_by(|a, b| b.coeff.abs().total_cmp(&a.coeff.abs()));
    // same summation order as the greedy accumulation, so keeping everything is exact
    let w = reconstruct(&sorted, n)?;
    let total: f64 = w.iter().map(|v| v.abs()).sum();
    if total == 0.0 {
        return Ok(Truncation {
            kept: Vec::new(),
            dropped: sorted,
            error: 0.0,
        });
    }
    let mut approx = DMatrix::<f64>::zeros(w.nrows(), w.ncols());
    let mut diff_sum = total;
    let mut kept = 0;
    while kept < sorted.len() && diff_sum / total > epsilon {
        let t = &sorted[kept];
        let c = t.coeff * real_phase(t)?;
        for j in 0..w.nrows() {
            let i = j ^ t.x;
            let before = (approx[(i, j)] - w[(i, j)]).abs();
            approx[(i, j)] += if (j & t.z).count_ones() % 2 == 0 { c } else { -c };
            diff_sum += (approx[(i, j)] - w[(i, j)]).abs() - before;
        }
        kept += 1;
    }
    let error = (&approx - &w).iter().map(|v| v.abs()).sum::<f64>() / total;
    let dropped = sorted.split_off(kept);
    Ok(Truncation {
        kept: sorted,
        dropped,
        error,
    })
}

/// Wire index `n_qubits` is the ancilla.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Gate {
    H(usize),
    S(usize),
    Sdg(usize),
    Cx(usize, usize),
    /// `exp(-i theta Z / 2)`
    Rz(usize, f64),
    /// `Rz(theta)` on the target when the ancilla is 1.
    Crz(usize, f64),
    /// `diag(1, e^{i theta})` on the ancilla.
    Phase(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateSequence {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
}

impl GateSequence {
    pub fn new(n_qubits: usize) -> Self {
        GateSequence {
            n_qubits,
            gates: Vec::new(),
        }
    }

    pub fn ancilla(&self) -> usize {
        self.n_qubits
    }

    pub fn extend(&mut self, other: GateSequence) {
        self.gates.extend(other.gates);
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cx(..))).count()
    }

    /// One gate per line: `H q3`, `CX q2 q3`, `CRZ anc q3 -0.02`, `PH anc 0.1`.
    pub fn to_text(&self) -> String {
        let mut s = format!("# qubits {}\n", self.n_qubits);
        for g in &self.gates {
            let line = match *g {
                Gate::H(q) => format!("H q{q}"),
                Gate::S(q) => format!("S q{q}"),
                Gate::Sdg(q) => format!("SDG q{q}"),
                Gate::Cx(c, t) => format!("CX q{c} q{t}"),
                Gate::Rz(q, a) => format!("RZ q{q} {a}"),
                Gate::Crz(q, a) => format!("CRZ anc q{q} {a}"),
                Gate::Phase(a) => format!("PH anc {a}"),
            };
            s.push_str(&line);
            s.push('\n');
        }
        s
    }

    /// Inverse of `to_text`; lines starting with `#` are ignored.
    pub fn parse(text: &str, n_qubits: usize) -> Result<Self> {
        let mut seq = GateSequence::new(n_qubits);
        for (ln, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::Parse {
                line: ln + 1,
                msg: msg.to_string(),
            };
            let tok: Vec<&str> = line.split_whitespace().collect();
            let qubit = |t: &str| -> Result<usize> {
                let q = t
                    .strip_prefix('q')
                    .and_then(|v| v.parse::<usize>().ok())
                    .ok_or_else(|| err(&format!("bad qubit '{t}'")))?;
                if q >= n_qubits {
                    return Err(err(&format!("qubit {q} out of range")));
                }
                Ok(q)
            };
            let angle = |t: &str| -> Result<f64> {
                f64::from_str(t).map_err(|_| err(&format!("bad angle '{t}'")))
            };
            let anc = |t: &str| -> Result<()> {
                if t == "anc" {
                    Ok(())
                } else {
                    Err(err("expected 'anc'"))
                }
            };
            let gate = match tok.as_slice() {
                ["H", q] => Gate::H(qubit(q)?),
                ["S", q] => Gate::S(qubit(q)?),
                ["SDG", q] => Gate::Sdg(qubit(q)?),
                ["CX", c, t] => Gate::Cx(qubit(c)?, qubit(t)?),
                ["RZ", q, a] => Gate::Rz(qubit(q)?, angle(a)?),
                ["CRZ", a, q, th] => {
                    anc(a)?;
                    Gate::Crz(qubit(q)?, angle(th)?)
                }
                ["PH", a, th] => {
                    anc(a)?;
                    Gate::Phase(angle(th)?)
                }
                _ => return Err(err(&format!("unrecognized gate '{line}'"))),
            };
            seq.gates.push(gate);
        }
        Ok(seq)
    }

    /// Dense unitary on register plus ancilla; basis index `(i << 1) | anc`.
    pub fn unitary(&self) -> DMatrix<Complex64> {
        let dim = 1usize << (self.n_qubits + 1);
        let mut u = DMatrix::<Complex64>::identity(dim, dim);
        for mut col in u.column_iter_mut() {
            let amps = col.as_mut_slice();
            for g in &self.gates {
                apply_gate(amps, self.n_qubits, g);
            }
        }
        u
    }
}

fn wire_bit(n: usize, q: usize) -> usize {
    // register qubit q sits above the ancilla bit
    1usize << (n - q)
}

fn apply_gate(a: &mut [Complex64], n: usize, g: &Gate) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let single = |a: &mut [Complex64], bit: usize, m: [[Complex64; 2]; 2]| {
        for i in 0..a.len() {
            if i & bit == 0 {
                let (x, y) = (a[i], a[i | bit]);
                a[i] = m[0][0] * x + m[0][1] * y;
                a[i | bit] = m[1][0] * x + m[1][1] * y;
            }
        }
    };
    let c = |re: f64, im: f64| Complex64::new(re, im);
    match *g {
        Gate::H(q) => single(a, wire_bit(n, q), [[c(s, 0.0), c(s, 0.0)], [c(s, 0.0), c(-s, 0.0)]]),
        Gate::S(q) => single(a, wire_bit(n, q), [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, 1.0)]]),
        Gate::Sdg(q) => single(a, wire_bit(n, q), [[c(1.0, 0.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]]),
        Gate::Rz(q, th) => {
            let bit = wire_bit(n, q);
            let (lo, hi) = (Complex64::from_polar(1.0, -th / 2.0), Complex64::from_polar(1.0, th / 2.0));
            for (i, v) in a.iter_mut().enumerate() {
                *v *= if i & bit == 0 { lo } else { hi };
            }
        }
        Gate::Crz(q, th) => {
            let bit = wire_bit(n, q);
            let (lo, hi) = (Complex64::from_polar(1.0, -th / 2.0), Complex64::from_polar(1.0, th / 2.0));
            for (i, v) in a.iter_mut().enumerate() {
                if i & 1 == 1 {
                    *v *= if i & bit == 0 { lo } else { hi };
                }
            }
        }
        Gate::Phase(th) => {
            let p = Complex64::from_polar(1.0, th);
            for (i, v) in a.iter_mut().enumerate() {
                if i & 1 == 1 {
                    *v *= p;
                }
            }
        }
        Gate::Cx(ctl, tgt) => {
            let (cb, tb) = (wire_bit(n, ctl), wire_bit(n, tgt));
            for i in 0..a.len() {
                if i & cb != 0 && i & tb == 0 {
                    a.swap(i, i | tb);
                }
            }
        }
    }
}

/// Controlled `exp(i phase coeff P)`: basis change, CNOT ladder onto the
/// highest support qubit, controlled `Rz(-2 phase coeff)`, then the mirror.
/// The identity string reduces to a phase on the ancilla.
pub fn compile_controlled_gadget(p: &PauliString, phase: f64) -> Result<GateSequence> {
    let n = p.n_qubits;
    if p.is_identity() {
        return Ok(GateSequence {
            n_qubits: n,
            gates: vec![Gate::Phase(phase * p.coeff)],
        });
    }
    let support = p.support();
    let mut pre = Vec::new();
    for &q in &support {
        match p.axis(q) {
            Pauli::X => pre.push(Gate::H(q)),
            Pauli::Y => {
                pre.push(Gate::Sdg(q));
                pre.push(Gate::H(q));
            }
            _ => {}
        }
    }
    for w in support.windows(2) {
        pre.push(Gate::Cx(w[0], w[1]));
    }
    let pivot = *support.last().unwrap();
    let mut gates = pre.clone();
    gates.push(Gate::Crz(pivot, -2.0 * phase * p.coeff));
    for g in pre.iter().rev() {
        gates.push(match *g {
            Gate::Sdg(q) => Gate::S(q),
            other => other,
        });
    }
    Ok(GateSequence { n_qubits: n, gates })
}

/// First-order product of per-term gadgets in descending `|coeff|`.
pub fn trotterize(terms: &[PauliString], phase: f64) -> Result<GateSequence> {
    let Some(first) = terms.first() else {
        return Err(Error::invalid("no terms to exponentiate"));
    };
    let n = first.n_qubits;
    let mut sorted: Vec<&PauliString> = terms.iter().collect();
    sorted.sort_by(|a, b| b.coeff.abs().total_cmp(&a.coeff.abs()));
    let mut seq = GateSequence::new(n);
    for t in sorted {
        if t.n_qubits != n {
            return Err(Error::Dimension {
                expected: n,
                got: t.n_qubits,
            });
        }
        seq.extend(compile_controlled_gadget(t, phase)?);
    }
    Ok(seq)
}

/// Block of a register-plus-ancilla unitary with the ancilla fixed to `anc`.
pub fn ancilla_block(u: &DMatrix<Complex64>, anc: usize) -> DMatrix<Complex64> {
    let dim = u.nrows() / 2;
    DMatrix::from_fn(dim, dim, |i, j| u[((i << 1) | anc, (j << 1) | anc)])
}

/// `diag(I, exp(i phase W))` in the `(i << 1) | anc` ordering.
pub fn controlled_exact(w: &WeightMatrix, phase: f64) -> Result<DMatrix<Complex64>> {
    let e = herm_expm(w, phase)?;
    let dim = w.dim();
    let mut u = DMatrix::zeros(2 * dim, 2 * dim);
    for i in 0..dim {
        u[(i << 1, i << 1)] = Complex64::new(1.0, 0.0);
        for j in 0..dim {
            u[((i << 1) | 1, (j << 1) | 1)] = e.matrix()[(i, j)];
        }
    }
    Ok(u)
}

pub fn spectral_norm(m: &DMatrix<Complex64>) -> f64 {
    m.clone()
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(0.0, f64::max)
}

/// `|| U_trotter - exp(i phase W) ||_2` on the controlled block.
pub fn trotter_error(terms: &[PauliString], w: &WeightMatrix, phase: f64) -> Result<f64> {
    let u = trotterize(terms, phase)?.unitary();
    let exact = herm_expm(w, phase)?;
    Ok(spectral_norm(&(ancilla_block(&u, 1) - exact.matrix())))
}

/// `(phase^2 / 2) (sum_s |c_s|)^2`
pub fn trotter_bound(terms: &[PauliString], phase: f64) -> f64 {
    let l1: f64 = terms.iter().map(|t| t.coeff.abs()).sum();
    phase * phase / 2.0 * l1 * l1
}

/// Leading first-order error `(phase^2 / 2) || sum_{j<k} [A_j, A_k] ||_2`
/// for the descending-coefficient product order.
pub fn trotter_commutator_estimate(terms: &[PauliString], phase: f64) -> f64 {
    let mut sorted: Vec<&PauliString> = terms.iter().filter(|t| !t.is_identity()).collect();
    if sorted.is_empty() {
        return 0.0;
    }
    sorted.sort_by(|a, b| b.coeff.abs().total_cmp(&a.coeff.abs()));
    let mats: Vec<_> = sorted.iter().map(|t| t.matrix()).collect();
    let dim = mats[0].nrows();
    let mut suffix = DMatrix::<Complex64>::zeros(dim, dim);
    let mut acc = DMatrix::<Complex64>::zeros(dim, dim);
    for a in mats.iter().rev() {
        acc += a * &suffix - &suffix * a;
        suffix += a;
    }
    phase * phase / 2.0 * spectral_norm(&acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::tests_support::random_symmetric;
    use nalgebra::dmatrix;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn decompose_examples() {
        let w = WeightMatrix::new(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap();
        let t = pauli_decompose(&w).unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!((t[0].axes(), t[0].coeff), (vec![Pauli::X], 1.0));

        let d = WeightMatrix::diagonal(&[-1.0, 0.0, -1.0, -2.0]).unwrap();
        let t = pauli_decompose(&d).unwrap();
        assert!(t.iter().all(|s| s.axes().iter().all(|a| matches!(a, Pauli::I | Pauli::Z))));
        assert!((reconstruct(&t, 2).unwrap() - d.matrix()).amax() < 1e-12);
    }

    #[test]
    fn decomposition_round_trip_and_parseval() {
        for n in 1..=5 {
            let w = random_symmetric(1 << n, n as u64);
            let t = pauli_decompose(&w).unwrap();
            assert!((reconstruct(&t, n).unwrap() - w.matrix()).amax() < 1e-9);
            let parseval: f64 = t.iter().map(|s| s.coeff * s.coeff).sum::<f64>() * (1 << n) as f64;
            assert!((parseval - w.matrix().norm_squared()).abs() < 1e-9 * w.matrix().norm_squared());
            assert!(t.iter().all(|s| s.y_count() % 2 == 0));
        }
    }

    #[test]
    fn string_matrix_matches_kronecker() {
        let p = PauliString::from_axes(&[Pauli::Y, Pauli::X], 1.0).unwrap();
        let y = dmatrix![c(0.0), Complex64::new(0.0, -1.0); Complex64::new(0.0, 1.0), c(0.0)];
        let x = dmatrix![c(0.0), c(1.0); c(1.0), c(0.0)];
        assert!((p.matrix() - y.kronecker(&x)).camax() < 1e-15);
    }

    #[test]
    fn truncation_limits() {
        let w = random_symmetric(8, 3);
        let t = pauli_decompose(&w).unwrap();
        let all = truncate_decomposition(&t, 0.0).unwrap();
        assert_eq!((all.kept.len(), all.error), (t.len(), 0.0));
        let none = truncate_decomposition(&t, 1.0).unwrap();
        assert!(none.kept.is_empty() && none.error == 1.0);
        let mid = truncate_decomposition(&t, 0.3).unwrap();
        assert!(mid.error <= 0.3);
        let mut both = mid.kept.clone();
        both.extend(mid.dropped.clone());
        assert!((reconstruct(&both, 3).unwrap() - w.matrix()).amax() < 1e-9);
        assert!(truncate_decomposition(&[], 0.1).is_err());
    }

    #[test]
    fn z_gadget_is_a_single_controlled_rz() {
        let p = PauliString::from_axes(&[Pauli::Z], 1.0).unwrap();
        let g = compile_controlled_gadget(&p, 0.3).unwrap();
        assert_eq!(g.gates, vec![Gate::Crz(0, -0.6)]);
        let p = PauliString::from_axes(&[Pauli::X], 1.0).unwrap();
        let g = compile_controlled_gadget(&p, 0.3).unwrap();
        assert_eq!(g.gates, vec![Gate::H(0), Gate::Crz(0, -0.6), Gate::H(0)]);
        let id = PauliString::from_axes(&[Pauli::I], 0.5).unwrap();
        assert_eq!(compile_controlled_gadget(&id, 0.1).unwrap().gates, vec![Gate::Phase(0.05)]);
    }

    #[test]
    fn gadgets_match_dense_exponentials() {
        let letters = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
        let mut k = 7usize;
        for n in 1..=4 {
            for _ in 0..6 {
                let axes: Vec<Pauli> = (0..n)
                    .map(|_| {
                        k = (k * 1103515245 + 12345) % (1 << 31);
                        letters[(k >> 16) % 4]
                    })
                    .collect();
                let Ok(p) = PauliString::from_axes(&axes, 0.7) else { continue };
                let u = compile_controlled_gadget(&p, 0.4).unwrap().unitary();
                let id = DMatrix::<Complex64>::identity(1 << n, 1 << n);
                assert!((ancilla_block(&u, 0) - &id).camax() < 1e-12);
                // exp(i a P) = cos(a) I + i sin(a) P since P^2 = I
                let unit = PauliString { coeff: 1.0, ..p.clone() }.matrix();
                let a: f64 = 0.4 * 0.7;
                let exact = id * c(a.cos()) + unit * Complex64::new(0.0, a.sin());
                assert!((ancilla_block(&u, 1) - exact).camax() < 1e-12, "{p}");
            }
        }
    }

    #[test]
    fn commuting_terms_trotterize_exactly() {
        let d = WeightMatrix::diagonal(&[0.3, -1.0, 2.0, 0.5]).unwrap();
        let t = pauli_decompose(&d).unwrap();
        assert!(trotter_error(&t, &d, 0.2).unwrap() < 1e-10);
        let single = PauliString::from_axes(&[Pauli::Y, Pauli::Y], 0.5).unwrap();
        let w = WeightMatrix::new(single.matrix().map(|z| z.re)).unwrap();
        assert!(trotter_error(&[single], &w, 0.9).unwrap() < 1e-12);
    }

    #[test]
    fn trotter_error_is_quadratic() {
        let w = random_symmetric(16, 11);
        let t = pauli_decompose(&w).unwrap();
        let e1 = trotter_error(&t, &w, 0.01).unwrap();
        let e2 = trotter_error(&t, &w, 0.005).unwrap();
        assert!((3.5..=4.5).contains(&(e1 / e2)), "{}", e1 / e2);
        assert!(e1 <= trotter_bound(&t, 0.01));
        let est = trotter_commutator_estimate(&t, 0.01);
        assert!((e1 - est).abs() < 0.05 * est, "{e1} vs {est}");
    }

    #[test]
    fn text_round_trip() {
        let w = random_symmetric(8, 5);
        let seq = trotterize(&pauli_decompose(&w).unwrap(), 0.01).unwrap();
        let text = seq.to_text();
        assert_eq!(GateSequence::parse(&text, 3).unwrap(), seq);
        assert!(GateSequence::parse("CX q0 q9", 3).is_err());
        assert!(GateSequence::parse("FOO q0", 3).is_err());
        let p = PauliString::from_axes(&[Pauli::Z, Pauli::Z, Pauli::Y], 1.0).unwrap();
        let g = compile_controlled_gadget(&p, 0.01).unwrap();
        assert_eq!(
            g.to_text(),
            "# qubits 3\nSDG q2\nH q2\nCX q0 q1\nCX q1 q2\nCRZ anc q2 -0.02\nCX q1 q2\nCX q0 q1\nH q2\nS q2\n"
        );
    }
}
