//! Training loop: loss assembly, ADAM, rounding and cut estimates.

use std::fmt;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constraints::{
    population_diagonal, random_xsupports, sigma_rho, zstring_count, XConstraint, ZConstraintSet,
};
use crate::error::{Error, Result};
use crate::graph::{pad_to_qubits, Edge, Graph};
use crate::operator::{DenseSymOp, DiagonalOp, RealSymOp, SparseSinOp, SparseSym};
use crate::simulator::{
    adjoint_gradient, sample_pm1_mean, Ansatz, LossComponents, LossSpec, StateVector,
};

/// Graph families with their own `beta` and `lambda` defaults.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphFamily {
    Toroid,
    SkewBinary,
    SkewInteger,
}

impl GraphFamily {
    pub fn beta(self) -> f64 {
        match self {
            GraphFamily::Toroid => 1.0 / 1.2,
            GraphFamily::SkewBinary | GraphFamily::SkewInteger => 1.0 / 3.0,
        }
    }

    pub fn lambda_coeff(self) -> f64 {
        match self {
            GraphFamily::Toroid | GraphFamily::SkewBinary => 100.0,
            GraphFamily::SkewInteger => 50.0,
        }
    }
}

impl FromStr for GraphFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "toroid" => Ok(GraphFamily::Toroid),
            "skew_binary" | "skew-binary" => Ok(GraphFamily::SkewBinary),
            "skew_integer" | "skew-integer" => Ok(GraphFamily::SkewInteger),
            _ => Err(Error::invalid(format!("unknown graph family '{s}'"))),
        }
    }
}

impl fmt::Display for GraphFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GraphFamily::Toroid => "toroid",
            GraphFamily::SkewBinary => "skew_binary",
            GraphFamily::SkewInteger => "skew_integer",
        })
    }
}

/// Bisection through averaged x-string equality constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BisectionConfig {
    /// Fraction of vertices on the positive side.
    pub ratio: f64,
    /// Number of random x-strings averaged.
    pub strings: usize,
    /// Penalty weight is `coeff * alpha / strings`.
    pub coeff: f64,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            ratio: 0.5,
            strings: 8,
            coeff: 100.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub alpha: f64,
    /// Phase of the population-balancing term; 0 disables it.
    pub beta: f64,
    pub lambda_coeff: f64,
    pub k: usize,
    pub layers: usize,
    pub eta: f64,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub epochs: usize,
    pub seed: u64,
    /// Standard deviation of the initial angles.
    pub init_scale: f64,
    /// Shots per Hadamard test for the recorded estimates; `None` is exact.
    pub shots: Option<u64>,
    /// When false only the constraint penalties are trained.
    pub use_objective: bool,
    pub bisection: Option<BisectionConfig>,
    /// Largest dimension for which `sin(alpha W)` is formed densely.
    pub dense_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig::for_family(GraphFamily::Toroid)
    }
}

impl SolverConfig {
    pub fn for_family(family: GraphFamily) -> Self {
        SolverConfig {
            alpha: 0.01,
            beta: family.beta(),
            lambda_coeff: family.lambda_coeff(),
            k: 2,
            layers: 120,
            eta: 0.01,
            adam_beta1: 0.9,
            adam_beta2: 0.999,
            adam_eps: 1e-8,
            epochs: 2000,
            seed: 0,
            init_scale: 0.01,
            shots: None,
            use_objective: true,
            bisection: None,
            dense_limit: 4096,
        }
    }

    pub fn validate(&self, n_qubits: usize) -> Result<()> {
        let finite_pos = |x: f64| x.is_finite() && x > 0.0;
        if !finite_pos(self.alpha) {
            return Err(Error::invalid(format!("alpha must be positive, got {}", self.alpha)));
        }
        if !(self.beta.is_finite() && (0.0..1.0).contains(&self.beta)) {
            return Err(Error::invalid(format!("beta must lie in [0, 1), got {}", self.beta)));
        }
        if !(self.lambda_coeff.is_finite() && self.lambda_coeff >= 0.0) {
            return Err(Error::invalid("lambda coefficient must be non-negative"));
        }
        if self.k == 0 || self.k > n_qubits {
            return Err(Error::invalid(format!(
                "constraint order k={} outside 1..={n_qubits}",
                self.k
            )));
        }
        if self.layers == 0 {
            return Err(Error::invalid("layers must be at least 1"));
        }
        if self.epochs == 0 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if !finite_pos(self.eta) {
            return Err(Error::invalid("learning rate must be positive"));
        }
        for b in [self.adam_beta1, self.adam_beta2] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::invalid("ADAM decay rates must lie in [0, 1)"));
            }
        }
        if !finite_pos(self.adam_eps) {
            return Err(Error::invalid("ADAM epsilon must be positive"));
        }
        if !(self.init_scale.is_finite() && self.init_scale >= 0.0) {
            return Err(Error::invalid("init scale must be non-negative"));
        }
        if self.shots == Some(0) {
            return Err(Error::invalid("shots must be positive"));
        }
        if let Some(b) = &self.bisection {
            if !(0.0..=1.0).contains(&b.ratio) || b.strings == 0 || b.coeff < 0.0 {
                return Err(Error::invalid("invalid bisection settings"));
            }
        }
        Ok(())
    }

    /// `lambda = c alpha / m` with `m` the number of constraint strings.
    pub fn lambda(&self, n_qubits: usize) -> f64 {
        self.lambda_coeff * self.alpha / zstring_count(n_qubits, self.k) as f64
    }
}

/// A +-1 assignment with its objective value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSolution {
    pub signs: Vec<i8>,
    pub cut: f64,
}

/// `sum_{edges} w (1 - v_i v_j) / 2`
pub fn cut_value(g: &Graph, signs: &[i8]) -> Result<f64> {
    if signs.len() != g.n_vertices() {
        return Err(Error::Dimension {
            expected: g.n_vertices(),
            got: signs.len(),
        });
    }
    Ok(g.edges()
        .iter()
        .filter(|e| signs[e.i] != signs[e.j])
        .fold(0.0, |acc, e| acc + e.w))
}

/// `v_i = sign(psi_i)` over the first `n` amplitudes, `sign(0) = +1`.
pub fn signs_of(psi: &[f64], n: usize) -> Vec<i8> {
    psi[..n].iter().map(|&a| if a < 0.0 { -1 } else { 1 }).collect()
}

pub fn round_solution(psi: &StateVector, g: &Graph) -> Result<CutSolution> {
    if g.n_vertices() > psi.dim() {
        return Err(Error::Dimension {
            expected: g.n_vertices(),
            got: psi.dim(),
        });
    }
    let signs = signs_of(&psi.real_parts(), g.n_vertices());
    let cut = cut_value(g, &signs)?;
    Ok(CutSolution { signs, cut })
}

/// Observable estimate `(D / 4 alpha) (sigma_plus - sigma_psi)`.
pub fn estimate_cq(sigma_plus: f64, sigma_psi: f64, dim: usize, alpha: f64) -> f64 {
    dim as f64 / (4.0 * alpha) * (sigma_plus - sigma_psi)
}

/// Max-2-Sat in pairwise form: `sum_{j<i} a_ij (1 - v_i v_j) + b_ij (1 + v_i v_j)`.
#[derive(Debug, Clone)]
pub struct MaxSatProblem {
    /// `W- = a - b`, trained like a MaxCut weight matrix.
    pub w_minus: Graph,
    /// `sum_{j<i} (a_ij + b_ij)`
    pub w_plus_sum: f64,
}

impl MaxSatProblem {
    /// Objective of an assignment, `W+_sum - sum_{j<i} W-_ij v_i v_j`.
    pub fn value(&self, signs: &[i8]) -> Result<f64> {
        if signs.len() != self.w_minus.n_vertices() {
            return Err(Error::Dimension {
                expected: self.w_minus.n_vertices(),
                got: signs.len(),
            });
        }
        Ok(self.w_plus_sum
            - self
                .w_minus
                .edges()
                .iter()
                .map(|e| e.w * f64::from(signs[e.i] * signs[e.j]))
                .sum::<f64>())
    }

    /// `W+_sum - (D / 2 alpha) sigma_psi`
    pub fn estimate(&self, sigma_psi: f64, dim: usize, alpha: f64) -> f64 {
        self.w_plus_sum - dim as f64 / (2.0 * alpha) * sigma_psi
    }
}

pub fn maxsat_objective(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<MaxSatProblem> {
    let n = a.nrows();
    if !a.is_square() || b.shape() != a.shape() {
        return Err(Error::invalid("clause coefficient matrices must be square and equal in shape"));
    }
    let mut edges = Vec::new();
    let mut w_plus_sum = 0.0;
    for i in 0..n {
        for m in [a, b] {
            if m[(i, i)] != 0.0 {
                return Err(Error::invalid("clause coefficients must have a zero diagonal"));
            }
        }
        for j in 0..i {
            for m in [a, b] {
                let scale = m[(i, j)].abs().max(m[(j, i)].abs()).max(1.0);
                if (m[(i, j)] - m[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::invalid(format!(
                        "clause coefficients are not symmetric at ({i}, {j})"
                    )));
                }
            }
            w_plus_sum += a[(i, j)] + b[(i, j)];
            let w = a[(i, j)] - b[(i, j)];
            if w != 0.0 {
                edges.push(Edge { i, j, w });
            }
        }
    }
    Ok(MaxSatProblem {
        w_minus: Graph::new(n, edges)?,
        w_plus_sum,
    })
}

/// ADAM with zero-initialized moments.
#[derive(Debug, Clone)]
pub struct Adam {
    eta: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(len: usize, eta: f64, beta1: f64, beta2: f64, eps: f64) -> Self {
        Adam {
            eta,
            beta1,
            beta2,
            eps,
            m: vec![0.0; len],
            v: vec![0.0; len],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, g), m), v) in params.iter_mut().zip(grad).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.eta * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

#[derive(Debug, Clone)]
enum Readout {
    Cut,
    Sat(f64),
}

/// Everything a training run needs that does not depend on the seed.
#[derive(Debug, Clone)]
pub struct Problem {
    graph: Graph,
    cfg: SolverConfig,
    n_qubits: usize,
    sin_w: Arc<dyn RealSymOp>,
    sigma_plus: f64,
    spec: LossSpec,
    readout: Readout,
}

impl Problem {
    pub fn maxcut(g: &Graph, cfg: &SolverConfig) -> Result<Self> {
        Self::build(g, cfg, Readout::Cut)
    }

    pub fn maxsat(p: &MaxSatProblem, cfg: &SolverConfig) -> Result<Self> {
        Self::build(&p.w_minus, cfg, Readout::Sat(p.w_plus_sum))
    }

    fn build(g: &Graph, cfg: &SolverConfig, readout: Readout) -> Result<Self> {
        let n = g.n_qubits();
        cfg.validate(n)?;
        let dim = 1usize << n;
        let sin_w: Arc<dyn RealSymOp> = if dim <= cfg.dense_limit {
            Arc::new(DenseSymOp::sin_of(&pad_to_qubits(g), cfg.alpha)?)
        } else {
            Arc::new(SparseSinOp::new(SparseSym::from_graph(g, dim)?, cfg.alpha))
        };
        let uniform = vec![1.0 / (dim as f64).sqrt(); dim];
        let sigma_plus = sin_w.quadratic_form(&uniform);

        let mut spec = LossSpec {
            constraints: Some(ZConstraintSet::of_order(n, cfg.k)?),
            lambda: cfg.lambda(n),
            ..LossSpec::default()
        };
        if cfg.use_objective {
            spec.objective = Some(sin_w.clone());
            if cfg.beta > 0.0 {
                let diag = population_diagonal(g, dim)?;
                spec.population = Some(Arc::new(DiagonalOp::sin_of(&diag, cfg.beta)));
            }
        }
        if let Some(b) = &cfg.bisection {
            for support in random_xsupports(n, b.strings, cfg.seed ^ 0x5eed_b15e) {
                spec.xconstraints.push(XConstraint::for_ratio(&support, n, b.ratio)?);
            }
            spec.x_lambda = b.coeff * cfg.alpha / spec.xconstraints.len() as f64;
        }
        Ok(Problem {
            graph: g.clone(),
            cfg: cfg.clone(),
            n_qubits: n,
            sin_w,
            sigma_plus,
            spec,
            readout,
        })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn dim(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn loss_spec(&self) -> &LossSpec {
        &self.spec
    }

    /// `Im <+|U_W|+>`
    pub fn sigma_plus(&self) -> f64 {
        self.sigma_plus
    }

    /// Objective value of a sign assignment under this problem's readout.
    pub fn value(&self, signs: &[i8]) -> Result<f64> {
        match self.readout {
            Readout::Cut => cut_value(&self.graph, signs),
            Readout::Sat(w_plus_sum) => {
                let p = MaxSatProblem {
                    w_minus: self.graph.clone(),
                    w_plus_sum,
                };
                p.value(signs)
            }
        }
    }

    /// Observable estimate of the objective from `sigma_psi = Im <psi|U_W|psi>`.
    pub fn estimate(&self, sigma_psi: f64) -> f64 {
        match self.readout {
            Readout::Cut => estimate_cq(self.sigma_plus, sigma_psi, self.dim(), self.cfg.alpha),
            Readout::Sat(w_plus_sum) => {
                w_plus_sum - self.dim() as f64 / (2.0 * self.cfg.alpha) * sigma_psi
            }
        }
    }

    /// One training run from `seed`.
    pub fn train(&self, seed: u64) -> Result<TrainTrace> {
        let start = Instant::now();
        let cfg = &self.cfg;
        let n = self.n_qubits;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut ansatz = Ansatz::random(n, cfg.layers, cfg.init_scale, &mut rng);
        let mut adam = Adam::new(
            ansatz.param_count(),
            cfg.eta,
            cfg.adam_beta1,
            cfg.adam_beta2,
            cfg.adam_eps,
        );
        let nv = self.graph.n_vertices();
        let mut records = Vec::with_capacity(cfg.epochs);
        let mut best: Option<(CutSolution, usize)> = None;

        for epoch in 0..cfg.epochs {
            let eval = adjoint_gradient(&ansatz, &self.spec)?;
            let c = eval.components;
            if !c.total.is_finite() || eval.gradient.iter().any(|g| !g.is_finite()) {
                return Err(Error::Numerical(format!(
                    "non-finite loss at seed {seed}, epoch {epoch}: {c:?}"
                )));
            }
            let exact_sigma = if cfg.use_objective {
                c.obj_w
            } else {
                self.sin_w.quadratic_form(&eval.state)
            };
            let sigma = match cfg.shots {
                Some(shots) => sample_pm1_mean((1.0 + exact_sigma) / 2.0, shots, &mut rng),
                None => exact_sigma,
            };
            let signs = signs_of(&eval.state, nv);
            let value = self.value(&signs)?;
            let probs: Vec<f64> = eval.state.iter().map(|a| a * a).collect();
            records.push(EpochRecord {
                epoch,
                obj_w: c.obj_w,
                obj_p: c.obj_p,
                penalty: c.penalty,
                total: c.total,
                cq_est: self.estimate(sigma),
                cq_rounded: value,
                sigma_rho: sigma_rho(&probs, nv),
            });
            if best.as_ref().map_or(true, |(b, _)| value > b.cut) {
                best = Some((CutSolution { signs, cut: value }, epoch));
            }
            adam.step(ansatz.angles_mut(), &eval.gradient);
        }
        let (best, best_epoch) = best.expect("at least one epoch");
        Ok(TrainTrace {
            seed,
            records,
            best,
            best_epoch,
            final_angles: ansatz.angles().to_vec(),
            wall_seconds: start.elapsed().as_secs_f64(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub obj_w: f64,
    pub obj_p: f64,
    pub penalty: f64,
    pub total: f64,
    pub cq_est: f64,
    pub cq_rounded: f64,
    pub sigma_rho: f64,
}

impl EpochRecord {
    pub fn components(&self) -> LossComponents {
        LossComponents {
            obj_w: self.obj_w,
            obj_p: self.obj_p,
            penalty: self.penalty,
            total: self.total,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainTrace {
    pub seed: u64,
    pub records: Vec<EpochRecord>,
    pub best: CutSolution,
    pub best_epoch: usize,
    pub final_angles: Vec<f64>,
    pub wall_seconds: f64,
}

pub fn train(g: &Graph, cfg: &SolverConfig) -> Result<TrainTrace> {
    Problem::maxcut(g, cfg)?.train(cfg.seed)
}

/// Worker count from `HTAAC_THREADS`, defaulting to the machine's parallelism.
pub fn worker_threads() -> usize {
    std::env::var("HTAAC_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&t| t > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

/// Independent runs over `seeds`; traces come back in seed order.
pub fn train_seeds(problem: &Problem, seeds: &[u64]) -> Result<SeedSweep> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(worker_threads())
        .build()
        .map_err(|e| Error::Numerical(format!("thread pool: {e}")))?;
    let traces: Vec<TrainTrace> =
        pool.install(|| seeds.par_iter().map(|&s| problem.train(s)).collect::<Result<_>>())?;
    Ok(SeedSweep::from_traces(traces))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSweep {
    pub traces: Vec<TrainTrace>,
    pub max_cut: f64,
    pub mean_cut: f64,
    pub best_seed: u64,
}

impl SeedSweep {
    pub fn from_traces(traces: Vec<TrainTrace>) -> Self {
        let best = traces
            .iter()
            .max_by(|a, b| a.best.cut.total_cmp(&b.best.cut))
            .expect("at least one seed");
        SeedSweep {
            max_cut: best.best.cut,
            best_seed: best.seed,
            mean_cut: traces.iter().map(|t| t.best.cut).sum::<f64>() / traces.len() as f64,
            traces,
        }
    }

    /// Mean final-epoch population variance over seeds.
    pub fn mean_final_sigma_rho(&self) -> f64 {
        self.traces
            .iter()
            .map(|t| t.records.last().map_or(0.0, |r| r.sigma_rho))
            .sum::<f64>()
            / self.traces.len() as f64
    }
}

pub fn write_trace_csv(traces: &[TrainTrace], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "seed", "epoch", "obj_w", "obj_p", "penalty", "total", "cq_est", "cq_rounded", "sigma_rho",
    ])?;
    for t in traces {
        for r in &t.records {
            w.serialize((
                t.seed,
                r.epoch,
                r.obj_w,
                r.obj_p,
                r.penalty,
                r.total,
                r.cq_est,
                r.cq_rounded,
                r.sigma_rho,
            ))?;
        }
    }
    w.flush().map_err(|e| Error::io("trace.csv", e))?;
    Ok(())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunSummary {
    pub config: SolverConfig,
    pub n_vertices: usize,
    pub n_qubits: usize,
    pub lambda: f64,
    pub seeds: Vec<u64>,
    pub max_cut: f64,
    pub mean_cut: f64,
    pub best_seed: u64,
    pub best_signs: Vec<i8>,
    pub per_seed_best: Vec<f64>,
    pub wall_seconds: f64,
}

impl RunSummary {
    pub fn new(problem: &Problem, sweep: &SeedSweep, wall_seconds: f64) -> Self {
        let best = sweep
            .traces
            .iter()
            .find(|t| t.seed == sweep.best_seed)
            .expect("best seed present");
        RunSummary {
            config: problem.cfg.clone(),
            n_vertices: problem.graph.n_vertices(),
            n_qubits: problem.n_qubits,
            lambda: problem.spec.lambda,
            seeds: sweep.traces.iter().map(|t| t.seed).collect(),
            max_cut: sweep.max_cut,
            mean_cut: sweep.mean_cut,
            best_seed: sweep.best_seed,
            best_signs: best.best.signs.clone(),
            per_seed_best: sweep.traces.iter().map(|t| t.best.cut).collect(),
            wall_seconds,
        }
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Sample Pearson correlation; `None` if either series is constant.
pub fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let mx = x[..n].iter().sum::<f64>() / n as f64;
    let my = y[..n].iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x[..n].iter().zip(&y[..n]) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some(sxy / (sxx * syy).sqrt())
}
