//! Reference solutions: exhaustive MaxCut and a classical
//! Goemans-Williamson baseline on a low-rank factorization.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::solver::{cut_value, CutSolution};

pub const BRUTE_FORCE_LIMIT: usize = 24;

/// Exact maximum cut by Gray-code enumeration with vertex 0 pinned to +1.
pub fn brute_force_maxcut(g: &Graph) -> Result<CutSolution> {
    let n = g.n_vertices();
    if n > BRUTE_FORCE_LIMIT {
        return Err(Error::invalid(format!(
            "brute force is limited to {BRUTE_FORCE_LIMIT} vertices, got {n}"
        )));
    }
    if n <= 1 {
        return Ok(CutSolution {
            signs: vec![1; n],
            cut: 0.0,
        });
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for e in g.edges() {
        adj[e.i].push((e.j, e.w));
        adj[e.j].push((e.i, e.w));
    }
    let mut signs = vec![1i8; n];
    let mut cut = 0.0;
    let mut best = (0.0, signs.clone());
    for step in 1u64..(1u64 << (n - 1)) {
        // Gray code: flip the vertex at the lowest set bit of the step
        let v = step.trailing_zeros() as usize + 1;
        let sv = signs[v];
        let delta: f64 = adj[v]
            .iter()
            .map(|&(u, w)| if signs[u] == sv { w } else { -w })
            .sum();
        signs[v] = -sv;
        cut += delta;
        if cut > best.0 {
            best = (cut, signs.clone());
        }
    }
    // recompute exactly to drop accumulated rounding
    let cut = cut_value(g, &best.1)?;
    Ok(CutSolution { signs: best.1, cut })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GWBaselineConfig {
    /// Factor rank; `None` picks `ceil(sqrt(2N))`.
    pub rank: Option<usize>,
    pub iterations: usize,
    pub learning_rate: f64,
    pub rounding_samples: usize,
    pub seed: u64,
}

impl Default for GWBaselineConfig {
    fn default() -> Self {
        GWBaselineConfig {
            rank: None,
            iterations: 500,
            learning_rate: 0.1,
            rounding_samples: 100,
            seed: 0,
        }
    }
}

impl GWBaselineConfig {
    pub fn rank_for(&self, n: usize) -> usize {
        self.rank
            .unwrap_or_else(|| ((2.0 * n as f64).sqrt().ceil() as usize).max(2))
    }
}

/// Factorized relaxation together with its optimization history.
#[derive(Debug, Clone)]
pub struct GWRun {
    pub solution: CutSolution,
    /// `r x N`, unit columns.
    pub factors: DMatrix<f64>,
    /// `<W, V^T V>` after every accepted iteration, starting from the initial point.
    pub objective_history: Vec<f64>,
    /// Relaxation value `sum_{edges} w (1 - v_i . v_j) / 2`.
    pub sdp_value: f64,
}

fn objective(g: &Graph, v: &DMatrix<f64>) -> f64 {
    2.0 * g
        .edges()
        .iter()
        .map(|e| e.w * v.column(e.i).dot(&v.column(e.j)))
        .sum::<f64>()
}

fn normalize_columns(v: &mut DMatrix<f64>) {
    for mut c in v.column_iter_mut() {
        let norm = c.norm();
        if norm > 0.0 {
            c /= norm;
        } else {
            c.fill(0.0);
            c[0] = 1.0;
        }
    }
}

pub fn classical_gw(g: &Graph, cfg: &GWBaselineConfig) -> Result<CutSolution> {
    Ok(classical_gw_run(g, cfg)?.solution)
}

pub fn classical_gw_run(g: &Graph, cfg: &GWBaselineConfig) -> Result<GWRun> {
    let n = g.n_vertices();
    let r = cfg.rank_for(n);
    if r < 2 {
        return Err(Error::invalid("factor rank must be at least 2"));
    }
    if cfg.rounding_samples == 0 {
        return Err(Error::invalid("at least one rounding sample is required"));
    }
    if !(cfg.learning_rate.is_finite() && cfg.learning_rate > 0.0) {
        return Err(Error::invalid("learning rate must be positive"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v = DMatrix::from_fn(r, n, |_, _| StandardNormal.sample(&mut rng));
    normalize_columns(&mut v);

    let mut f = objective(g, &v);
    let mut history = vec![f];
    let mut step = cfg.learning_rate;
    for _ in 0..cfg.iterations {
        let mut grad = DMatrix::<f64>::zeros(r, n);
        for e in g.edges() {
            let (vi, vj) = (v.column(e.i).clone_owned(), v.column(e.j).clone_owned());
            grad.column_mut(e.i).axpy(2.0 * e.w, &vj, 1.0);
            grad.column_mut(e.j).axpy(2.0 * e.w, &vi, 1.0);
        }
        // project onto the tangent space of each unit sphere
        for i in 0..n {
            let vi = v.column(i).clone_owned();
            let radial = grad.column(i).dot(&vi);
            grad.column_mut(i).axpy(-radial, &vi, 1.0);
        }
        if grad.norm() < 1e-12 {
            break;
        }
        let mut accepted = false;
        while step > 1e-14 {
            let mut trial = &v - &grad * step;
            normalize_columns(&mut trial);
            let ft = objective(g, &trial);
            if ft <= f {
                v = trial;
                f = ft;
                accepted = true;
                step *= 1.5;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        history.push(f);
    }

    let mut best: Option<CutSolution> = None;
    for _ in 0..cfg.rounding_samples {
        let h = DVector::from_fn(r, |_, _| StandardNormal.sample(&mut rng));
        let signs: Vec<i8> = (0..n)
            .map(|i| if v.column(i).dot(&h) < 0.0 { -1 } else { 1 })
            .collect();
        let cut = cut_value(g, &signs)?;
        if best.as_ref().map_or(true, |b| cut > b.cut) {
            best = Some(CutSolution { signs, cut });
        }
    }
    let w_total: f64 = g.edges().iter().map(|e| e.w).sum();
    Ok(GWRun {
        solution: best.expect("at least one sample"),
        sdp_value: 0.5 * w_total - 0.25 * f,
        factors: v,
        objective_history: history,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Graph {
        let t: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        Graph::from_triples(n, &t).unwrap()
    }

    #[test]
    fn brute_force_examples() {
        let edge = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(brute_force_maxcut(&edge).unwrap().cut, 1.0);
        let k3 = Graph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert_eq!(brute_force_maxcut(&k3).unwrap().cut, 2.0);
        assert_eq!(brute_force_maxcut(&cycle(5)).unwrap().cut, 4.0);
        assert_eq!(brute_force_maxcut(&cycle(6)).unwrap().cut, 6.0);
        assert!(brute_force_maxcut(&Graph::new(25, vec![]).unwrap()).is_err());
    }

    #[test]
    fn brute_force_stored_signs_give_the_cut() {
        let g = Graph::from_triples(4, &[(0, 1, 2.0), (1, 2, -1.0), (2, 3, 3.0), (0, 3, 0.5)]).unwrap();
        let s = brute_force_maxcut(&g).unwrap();
        assert_eq!(cut_value(&g, &s.signs).unwrap(), s.cut);
        assert_eq!(s.cut, 5.0);
    }

    #[test]
    fn gw_examples() {
        let edge = Graph::from_triples(2, &[(0, 1, 1.0)]).unwrap();
        assert_eq!(classical_gw(&edge, &GWBaselineConfig::default()).unwrap().cut, 1.0);
        let cfg = GWBaselineConfig {
            rank: Some(5),
            ..GWBaselineConfig::default()
        };
        let run = classical_gw_run(&cycle(5), &cfg).unwrap();
        assert_eq!(run.solution.cut, 4.0);
        // SDP bound for C5 is 5/2 (1 - cos(4 pi / 5))
        let bound = 2.5 * (1.0 - (4.0 * std::f64::consts::PI / 5.0).cos());
        assert!((run.sdp_value - bound).abs() < 1e-4, "{}", run.sdp_value);
    }

    #[test]
    fn gw_descends_with_unit_columns() {
        let g = cycle(9);
        let run = classical_gw_run(&g, &GWBaselineConfig::default()).unwrap();
        assert!(run.objective_history.windows(2).all(|w| w[1] <= w[0]));
        for c in run.factors.column_iter() {
            assert!((c.norm() - 1.0).abs() < 1e-10);
        }
    }
}
