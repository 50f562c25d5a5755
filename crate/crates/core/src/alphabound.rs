//! Upper bounds on the encoding phase `alpha` and the measured encoding error.
//!
//! `Im(exp(i alpha W)) = sin(alpha W) = alpha W - alpha^3 W^3 / 6 + ...`, so
//! `W` is faithfully encoded while the cubic term stays small against `W` on
//! the edges of the graph.

use std::io::Write;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dense::{sym_eigh, WeightMatrix};
use crate::error::{Error, Result};
use crate::graph::GraphStats;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum BoundFamily {
    /// Weights `U[0, b]`.
    UniformPositive { b: f64 },
    /// Weights `U[-b, b]`; reported with the positive-uniform value.
    UniformSigned { b: f64 },
    /// Normal weights dominated by the mean.
    NormalLargeMean { mu: f64 },
    /// Normal weights dominated by the spread.
    NormalLargeSigma { sigma: f64 },
}

impl BoundFamily {
    pub fn name(&self) -> &'static str {
        match self {
            BoundFamily::UniformPositive { .. } => "uniform_positive",
            BoundFamily::UniformSigned { .. } => "uniform_signed",
            BoundFamily::NormalLargeMean { .. } => "normal_large_mean",
            BoundFamily::NormalLargeSigma { .. } => "normal_large_sigma",
        }
    }

    fn scale(&self) -> f64 {
        match *self {
            BoundFamily::UniformPositive { b } | BoundFamily::UniformSigned { b } => b,
            BoundFamily::NormalLargeMean { mu } => mu,
            BoundFamily::NormalLargeSigma { sigma } => sigma,
        }
    }

    /// Parses `uniform_positive`, `uniform_signed`, `normal_large_mean` or
    /// `normal_large_sigma` with the given scale parameter.
    pub fn parse(name: &str, scale: f64) -> Result<Self> {
        Ok(match name {
            "uniform_positive" => BoundFamily::UniformPositive { b: scale },
            "uniform_signed" => BoundFamily::UniformSigned { b: scale },
            "normal_large_mean" => BoundFamily::NormalLargeMean { mu: scale },
            "normal_large_sigma" => BoundFamily::NormalLargeSigma { sigma: scale },
            _ => return Err(Error::invalid(format!("unknown bound family '{name}'"))),
        })
    }
}

/// Which degree enters the bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegreeMeasure {
    Mean,
    /// Mean half-degree of the most connected decile.
    Max,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub alpha_sq_bound: f64,
    pub alpha_bound: f64,
    pub family: BoundFamily,
    pub degree: DegreeMeasure,
    /// Set when the value is only a conservative lower estimate of the true bound.
    pub lower_bound_only: bool,
    pub n_vertices: usize,
    pub e: usize,
    pub xi: f64,
    pub d: f64,
}

pub fn alpha_upper_bound(stats: &GraphStats, n_vertices: usize, family: BoundFamily) -> Result<BoundResult> {
    bound_with(stats, n_vertices, family, DegreeMeasure::Mean)
}

/// The same bound driven by the degree of the most connected vertices.
pub fn alpha_upper_bound_xi_max(
    stats: &GraphStats,
    n_vertices: usize,
    family: BoundFamily,
) -> Result<BoundResult> {
    bound_with(stats, n_vertices, family, DegreeMeasure::Max)
}

fn bound_with(
    stats: &GraphStats,
    n_vertices: usize,
    family: BoundFamily,
    degree: DegreeMeasure,
) -> Result<BoundResult> {
    if stats.e == 0 {
        return Err(Error::invalid("the bound is undefined for a graph without edges"));
    }
    if n_vertices < 2 {
        return Err(Error::invalid("the bound needs at least two vertices"));
    }
    let s = family.scale();
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::invalid("weight scale must be positive"));
    }
    let n = n_vertices as f64;
    let (xi, d) = match degree {
        DegreeMeasure::Mean => (stats.xi, stats.d),
        DegreeMeasure::Max => (stats.xi_max, 2.0 * stats.xi_max / (n - 1.0)),
    };
    let alpha_sq_bound = match family {
        BoundFamily::UniformPositive { .. } | BoundFamily::UniformSigned { .. } => {
            3.0 * n / (s * s * xi.powi(3))
        }
        BoundFamily::NormalLargeMean { .. } | BoundFamily::NormalLargeSigma { .. } => {
            6.0 / (n * n * s * s * d.powi(3))
        }
    };
    Ok(BoundResult {
        alpha_sq_bound,
        alpha_bound: alpha_sq_bound.sqrt(),
        family,
        degree,
        lower_bound_only: matches!(family, BoundFamily::UniformSigned { .. }),
        n_vertices,
        e: stats.e,
        xi,
        d,
    })
}

/// Expected `(W^3)_ij` for `U[0, b]` weights at edge density `d`.
pub fn expected_cube_entry(n_vertices: usize, b: f64, d: f64) -> f64 {
    let n = n_vertices as f64;
    n * n * (b * d).powi(3) / 8.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EncodingError {
    pub alpha: f64,
    pub rel_err_mean: f64,
    pub rel_err_max: f64,
    pub offsupport_max: f64,
}

pub fn encoding_error_sweep(w: &WeightMatrix, alphas: &[f64]) -> Result<Vec<EncodingError>> {
    if alphas.iter().any(|a| !(a.is_finite() && *a > 0.0)) {
        return Err(Error::invalid("alphas must be positive"));
    }
    if alphas.windows(2).any(|p| p[1] <= p[0]) {
        return Err(Error::invalid("alphas must be strictly ascending"));
    }
    let eig = sym_eigh(w)?;
    let m = w.matrix();
    Ok(alphas
        .iter()
        .map(|&alpha| {
            let s = eig.sin_part(alpha);
            let (mut sum, mut max, mut count, mut off) = (0.0, 0.0f64, 0usize, 0.0f64);
            for (wij, sij) in m.iter().zip(s.iter()) {
                let enc = sij / alpha;
                if *wij != 0.0 {
                    let r = (enc - wij).abs() / wij.abs();
                    sum += r;
                    max = max.max(r);
                    count += 1;
                } else {
                    off = off.max(enc.abs());
                }
            }
            EncodingError {
                alpha,
                rel_err_mean: if count > 0 { sum / count as f64 } else { 0.0 },
                rel_err_max: max,
                offsupport_max: off,
            }
        })
        .collect())
}

/// `(mean |W_ij|, mean |(W^3)_ij|)` over the support of `W`.
pub fn cube_support_means(w: &WeightMatrix) -> (f64, f64) {
    let m: &DMatrix<f64> = w.matrix();
    let cube = m * m * m;
    let (mut sw, mut sc, mut count) = (0.0, 0.0, 0usize);
    for (wij, cij) in m.iter().zip(cube.iter()) {
        if *wij != 0.0 {
            sw += wij.abs();
            sc += cij.abs();
            count += 1;
        }
    }
    let c = count.max(1) as f64;
    (sw / c, sc / c)
}

/// Largest `alpha` with `alpha^2 mean|W^3| / 6 <= ratio * mean|W|` on the support.
pub fn third_order_alpha(w: &WeightMatrix, ratio: f64) -> f64 {
    let (mw, mc) = cube_support_means(w);
    if mc == 0.0 {
        return f64::INFINITY;
    }
    (6.0 * ratio * mw / mc).sqrt()
}

pub fn write_sweep_csv(rows: &[EncodingError], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| Error::io("bound.csv", e))?;
    Ok(())
}
