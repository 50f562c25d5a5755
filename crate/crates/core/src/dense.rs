//! Dense real-symmetric eigendecomposition and the Hermitian exponentials
//! `exp(i * phase * W)` built from it.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::simulator::StateVector;

/// Real symmetric matrix of power-of-two dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    m: DMatrix<f64>,
}

impl WeightMatrix {
    /// Validates shape and symmetry.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::invalid(format!(
                "matrix is {}x{}, not square",
                m.nrows(),
                m.ncols()
            )));
        }
        if !m.nrows().is_power_of_two() {
            return Err(Error::invalid(format!(
                "dimension {} is not a power of two",
                m.nrows()
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("matrix has non-finite entries"));
        }
        let scale = m.amax().max(1.0);
        let n = m.nrows();
        for i in 0..n {
            for j in (i + 1)..n {
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!("matrix is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(WeightMatrix { m })
    }

    pub(crate) fn from_symmetric_unchecked(m: DMatrix<f64>) -> Self {
        debug_assert!(m.is_square() && m.nrows().is_power_of_two());
        WeightMatrix { m }
    }

    pub fn diagonal(diag: &[f64]) -> Result<Self> {
        WeightMatrix::new(DMatrix::from_diagonal(&DVector::from_column_slice(diag)))
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn n_qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.m
    }

    pub fn is_diagonal(&self) -> bool {
        let n = self.dim();
        (0..n).all(|j| (0..n).all(|i| i == j || self.m[(i, j)] == 0.0))
    }
}

/// Dense complex matrix expected to be unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryMatrix {
    m: DMatrix<Complex64>,
}

impl UnitaryMatrix {
    pub fn from_matrix(m: DMatrix<Complex64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::invalid("unitary must be square"));
        }
        Ok(UnitaryMatrix { m })
    }

    pub fn identity(dim: usize) -> Self {
        UnitaryMatrix {
            m: DMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.m.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.m
    }

    /// `max |(U^dagger U - I)_ij|`
    pub fn unitarity_residual(&self) -> f64 {
        let prod = self.m.adjoint() * &self.m;
        let n = self.dim();
        let mut worst = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((prod[(i, j)] - Complex64::new(target, 0.0)).norm());
            }
        }
        worst
    }

    /// Real part, entrywise.
    pub fn re(&self) -> DMatrix<f64> {
        self.m.map(|z| z.re)
    }

    /// Imaginary part, entrywise.
    pub fn im(&self) -> DMatrix<f64> {
        self.m.map(|z| z.im)
    }

    pub fn mul(&self, other: &UnitaryMatrix) -> Result<UnitaryMatrix> {
        if self.dim() != other.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: other.dim(),
            });
        }
        Ok(UnitaryMatrix {
            m: &self.m * &other.m,
        })
    }
}

/// `W = V diag(values) V^T` with eigenvalues ascending.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// `V diag(f(lambda)) V^T`
    pub fn spectral_map(&self, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(self.values[k]);
        }
        scaled * self.vectors.transpose()
    }

    /// `exp(i * phase * W)`
    pub fn expm(&self, phase: f64) -> UnitaryMatrix {
        let re = self.spectral_map(|l| (phase * l).cos());
        let im = self.spectral_map(|l| (phase * l).sin());
        UnitaryMatrix {
            m: re.zip_map(&im, Complex64::new),
        }
    }

    /// `Im exp(i * phase * W) = sin(phase * W)`, real symmetric.
    pub fn sin_part(&self, phase: f64) -> DMatrix<f64> {
        self.spectral_map(|l| (phase * l).sin())
    }

    pub fn spectral_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &l| a.max(l.abs()))
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.spectral_map(|l| l)
    }
}

/// Eigendecomposition of a real symmetric matrix.
pub fn sym_eigh(w: &WeightMatrix) -> Result<SymEigen> {
    let eig = w.m.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..w.dim()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(w.dim(), order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = DMatrix::from_fn(w.dim(), w.dim(), |i, j| eig.eigenvectors[(i, order[j])]);
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("eigensolver produced non-finite values".into()));
    }
    Ok(SymEigen { values, vectors })
}

/// `exp(i * phase * W)`.
pub fn herm_expm(w: &WeightMatrix, phase: f64) -> Result<UnitaryMatrix> {
    if !phase.is_finite() {
        return Err(Error::invalid("phase must be finite"));
    }
    Ok(sym_eigh(w)?.expm(phase))
}

/// Dense product `U psi`. The result is not renormalized.
pub fn mat_vec(u: &UnitaryMatrix, psi: &StateVector) -> Result<StateVector> {
    if u.dim() != psi.dim() {
        return Err(Error::Dimension {
            expected: u.dim(),
            got: psi.dim(),
        });
    }
    let v = DVector::from_column_slice(psi.amplitudes());
    let out = &u.m * v;
    StateVector::from_amplitudes(out.as_slice().to_vec())
}

#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn random_symmetric(dim: usize, seed: u64) -> WeightMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..=i {
                let x: f64 = rng.gen_range(-1.0..1.0);
                m[(i, j)] = x;
                m[(j, i)] = x;
            }
        }
        WeightMatrix::new(m).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::tests_support::random_symmetric;
    use super::*;
    use nalgebra::dmatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pauli_x() -> WeightMatrix {
        WeightMatrix::new(dmatrix![0.0, 1.0; 1.0, 0.0]).unwrap()
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(WeightMatrix::new(DMatrix::zeros(3, 3)).is_err());
        assert!(WeightMatrix::new(DMatrix::zeros(2, 4)).is_err());
        assert!(WeightMatrix::new(dmatrix![0.0, 1.0; 0.5, 0.0]).is_err());
    }

    #[test]
    fn pauli_x_spectrum() {
        let e = sym_eigh(&pauli_x()).unwrap();
        assert!((e.values[0] + 1.0).abs() < 1e-14);
        assert!((e.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_spectrum_sorted() {
        let w = WeightMatrix::diagonal(&[-1.0, 0.0, -1.0, 0.0]).unwrap();
        let e = sym_eigh(&w).unwrap();
        assert_eq!(e.values.as_slice(), &[-1.0, -1.0, 0.0, 0.0]);
    }

    #[test]
    fn reconstruction_and_orthogonality() {
        let w = random_symmetric(16, 3);
        let e = sym_eigh(&w).unwrap();
        let resid = (e.reconstruct() - w.matrix()).amax();
        assert!(resid <= 1e-9 * w.matrix().amax(), "{resid}");
        let vtv = e.vectors.transpose() * &e.vectors;
        assert!((vtv - DMatrix::identity(16, 16)).amax() < 1e-10);
    }

    #[test]
    fn two_by_two_exponential_is_analytic() {
        let a = 0.37;
        let u = herm_expm(&pauli_x(), a).unwrap();
        let m = u.matrix();
        assert!((m[(0, 0)] - Complex64::new(a.cos(), 0.0)).norm() < 1e-14);
        assert!((m[(0, 1)] - Complex64::new(0.0, a.sin())).norm() < 1e-14);
        assert!((m[(1, 0)] - Complex64::new(0.0, a.sin())).norm() < 1e-14);
        assert!((m[(1, 1)] - Complex64::new(a.cos(), 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_phase_is_identity() {
        let u = herm_expm(&random_symmetric(8, 1), 0.0).unwrap();
        assert!((u.matrix() - UnitaryMatrix::identity(8).matrix()).camax() < 1e-12);
    }

    #[test]
    fn group_laws() {
        let w = random_symmetric(8, 7);
        let e = sym_eigh(&w).unwrap();
        let (a, b) = (0.3, -0.85);
        let fwd = e.expm(a);
        let back = e.expm(-a);
        let id = fwd.mul(&back).unwrap();
        assert!((id.matrix() - UnitaryMatrix::identity(8).matrix()).camax() < 1e-10);
        let sum = e.expm(a + b);
        let prod = e.expm(a).mul(&e.expm(b)).unwrap();
        assert!((sum.matrix() - prod.matrix()).camax() < 1e-9);
        assert!(fwd.unitarity_residual() < 1e-10);
    }

    #[test]
    fn imaginary_part_tends_to_phase_times_w() {
        let w = random_symmetric(8, 9);
        let e = sym_eigh(&w).unwrap();
        let mut last = f64::INFINITY;
        for a in [1e-1, 1e-2, 1e-3] {
            let im = e.sin_part(a);
            let mut worst = 0.0f64;
            for j in 0..8 {
                for i in 0..8 {
                    let target = a * w.matrix()[(i, j)];
                    if target != 0.0 {
                        worst = worst.max((im[(i, j)] - target).abs() / target.abs());
                    }
                }
            }
            assert!(worst < last);
            last = worst;
        }
        assert!(last < 1e-4);
    }

    #[test]
    fn mat_vec_basics() {
        let psi = StateVector::from_amplitudes(vec![
            Complex64::new(0.6, 0.0),
            Complex64::new(0.0, 0.8),
        ])
        .unwrap();
        let out = mat_vec(&UnitaryMatrix::identity(2), &psi).unwrap();
        assert_eq!(out, psi);

        // X (x) I on |00> -> |10>, qubit 0 is the most significant bit
        let mut xi = DMatrix::zeros(4, 4);
        for i in 0..4usize {
            xi[(i ^ 0b10, i)] = Complex64::new(1.0, 0.0);
        }
        let u = UnitaryMatrix::from_matrix(xi).unwrap();
        let out = mat_vec(&u, &StateVector::zero(2)).unwrap();
        assert_eq!(out.amplitudes()[0b10], Complex64::new(1.0, 0.0));

        assert!(mat_vec(&UnitaryMatrix::identity(4), &psi).is_err());
    }

    #[test]
    fn exponential_preserves_norm() {
        let w = random_symmetric(16, 21);
        let u = herm_expm(&w, 0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let amps: Vec<Complex64> = (0..16)
            .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
            .collect();
        let psi = StateVector::normalized(amps).unwrap();
        let out = mat_vec(&u, &psi).unwrap();
        assert!((out.norm_sqr() - 1.0).abs() < 1e-12);
    }
}
