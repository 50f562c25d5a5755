//! Real symmetric operators acting on real amplitude vectors.
//!
//! The variational states never leave the real subspace, so for real `psi`
//! the Hadamard-test value `Im <psi| exp(i a W) |psi>` equals the quadratic
//! form `psi^T sin(a W) psi`. The training loop only needs the action of
//! `sin(a W)` on a vector, which these operators provide.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::dense::{sym_eigh, WeightMatrix};
use crate::error::{Error, Result};
use crate::graph::Graph;

pub trait RealSymOp: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `y = A x`
    fn apply(&self, x: &[f64], y: &mut [f64]);

    /// `x^T A x`
    fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut y = vec![0.0; x.len()];
        self.apply(x, &mut y);
        dot(x, &y)
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone)]
pub struct DenseSymOp {
    m: DMatrix<f64>,
}

impl DenseSymOp {
    pub fn new(m: DMatrix<f64>) -> Self {
        assert!(m.is_square());
        DenseSymOp { m }
    }

    /// `sin(phase * W)` through an exact eigendecomposition.
    pub fn sin_of(w: &WeightMatrix, phase: f64) -> Result<Self> {
        Ok(DenseSymOp::new(sym_eigh(w)?.sin_part(phase)))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.m
    }
}

impl RealSymOp for DenseSymOp {
    fn dim(&self) -> usize {
        self.m.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let xv = DVector::from_column_slice(x);
        let mut out = DVector::zeros(x.len());
        // symmetric, so the column-major gemv computes A x directly
        out.gemv(1.0, &self.m, &xv, 0.0);
        y.copy_from_slice(out.as_slice());
    }
}

#[derive(Debug, Clone)]
pub struct DiagonalOp {
    diag: Vec<f64>,
}

impl DiagonalOp {
    pub fn new(diag: Vec<f64>) -> Self {
        DiagonalOp { diag }
    }

    /// `sin(phase * P)` for diagonal `P`.
    pub fn sin_of(diag: &[f64], phase: f64) -> Self {
        DiagonalOp::new(diag.iter().map(|p| (phase * p).sin()).collect())
    }

    pub fn entries(&self) -> &[f64] {
        &self.diag
    }
}

impl RealSymOp for DiagonalOp {
    fn dim(&self) -> usize {
        self.diag.len()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for ((yi, xi), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yi = d * xi;
        }
    }
}

/// Compressed sparse rows for a symmetric matrix.
#[derive(Debug, Clone)]
pub struct SparseSym {
    dim: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl SparseSym {
    /// Zero-padded adjacency of `g` in dimension `dim`.
    pub fn from_graph(g: &Graph, dim: usize) -> Result<Self> {
        if dim < g.n_vertices() {
            return Err(Error::Dimension {
                expected: g.n_vertices(),
                got: dim,
            });
        }
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for e in g.edges() {
            rows[e.i].push((e.j, e.w));
            rows[e.j].push((e.i, e.w));
        }
        let mut row_ptr = Vec::with_capacity(dim + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_by_key(|&(c, _)| c);
            for (c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        Ok(SparseSym {
            dim,
            row_ptr,
            cols,
            vals,
        })
    }

    /// Largest absolute row sum, an upper bound on the spectral norm.
    pub fn max_abs_row_sum(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.vals[self.row_ptr[r]..self.row_ptr[r + 1]].iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }
}

impl RealSymOp for SparseSym {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (r, yr) in y.iter_mut().enumerate() {
            let (lo, hi) = (self.row_ptr[r], self.row_ptr[r + 1]);
            *yr = self.cols[lo..hi]
                .iter()
                .zip(&self.vals[lo..hi])
                .map(|(&c, v)| v * x[c])
                .sum();
        }
    }
}

/// `sin(phase * W)` applied through its odd Taylor series on a sparse `W`.
/// The series is summed until the next term is below machine precision
/// relative to the partial sum, which keeps it exact in double precision
/// for any phase; the term count grows with `phase * ||W||`.
#[derive(Debug, Clone)]
pub struct SparseSinOp {
    w: SparseSym,
    phase: f64,
}

impl SparseSinOp {
    pub fn new(w: SparseSym, phase: f64) -> Self {
        SparseSinOp { w, phase }
    }
}

impl RealSymOp for SparseSinOp {
    fn dim(&self) -> usize {
        self.w.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = x.len();
        let a = self.phase;
        let mut term = vec![0.0; n];
        self.w.apply(x, &mut term);
        term.iter_mut().for_each(|t| *t *= a);
        y.copy_from_slice(&term);
        let mut tmp = vec![0.0; n];
        let bound = (a * self.w.max_abs_row_sum()).abs();
        let mut l = 1usize;
        loop {
            // term_{l+2} = -a^2 W^2 term_l / ((l+1)(l+2))
            self.w.apply(&term, &mut tmp);
            self.w.apply(&tmp, &mut term);
            let scale = -a * a / ((l + 1) * (l + 2)) as f64;
            term.iter_mut().for_each(|t| *t *= scale);
            l += 2;
            let tmax = term.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            let ymax = y.iter().fold(0.0f64, |m, t| m.max(t.abs()));
            y.iter_mut().zip(&term).for_each(|(yi, t)| *yi += t);
            // past the hump of the series, terms shrink geometrically
            if (l as f64) > bound && tmax <= 1e-17 * ymax.max(f64::MIN_POSITIVE) {
                break;
            }
            if tmax == 0.0 || l > 4000 {
                break;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{gen_toroid, pad_to_qubits, SignLaw};

    #[test]
    fn sparse_series_matches_dense_sine() {
        let g = gen_toroid(3, 5, SignLaw::RandomPm1, 4).unwrap();
        let w = pad_to_qubits(&g);
        let dim = w.dim();
        let x: Vec<f64> = (0..dim).map(|i| ((i * 7 + 3) % 11) as f64 - 5.0).collect();
        for phase in [0.01, 0.3, 2.5] {
            let dense = DenseSymOp::sin_of(&w, phase).unwrap();
            let sparse = SparseSinOp::new(SparseSym::from_graph(&g, dim).unwrap(), phase);
            let mut a = vec![0.0; dim];
            let mut b = vec![0.0; dim];
            dense.apply(&x, &mut a);
            sparse.apply(&x, &mut b);
            for (u, v) in a.iter().zip(&b) {
                assert!((u - v).abs() < 1e-11, "phase {phase}: {u} vs {v}");
            }
        }
    }

    #[test]
    fn diagonal_quadratic_form() {
        let d = DiagonalOp::new(vec![1.0, -2.0]);
        assert_eq!(d.quadratic_form(&[3.0, 1.0]), 7.0);
    }
}
