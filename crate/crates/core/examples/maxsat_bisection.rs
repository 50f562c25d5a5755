//! Max-2-Sat through the signed weight matrix, and a balanced bisection
//! through x-string constraints.

use htaac_qsdp::graph::{gen_erdos_renyi, WeightLaw};
use htaac_qsdp::solver::{maxsat_objective, train_seeds, BisectionConfig, Problem, SolverConfig};
use nalgebra::DMatrix;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    // (x_i or x_j) and (!x_i or !x_j) score a(1 - v_i v_j) + b(1 + v_i v_j) with a = 1, b = 1/2;
    // the equivalence pair swaps a and b
    let n = 6;
    let mut a = DMatrix::zeros(n, n);
    let mut b = DMatrix::zeros(n, n);
    for (i, j, xor) in [(0, 1, true), (1, 2, false), (2, 3, true), (3, 4, true), (4, 5, false), (0, 5, true)] {
        let (aa, bb) = if xor { (1.0, 0.5) } else { (0.5, 1.0) };
        for (p, q) in [(i, j), (j, i)] {
            a[(p, q)] = aa;
            b[(p, q)] = bb;
        }
    }
    let sat = maxsat_objective(&a, &b)?;
    let cfg = SolverConfig {
        beta: 0.0,
        epochs: 1000,
        layers: 4,
        eta: 0.05,
        ..SolverConfig::default()
    };
    // single seeds settle in local minima; the sweep maximum is the answer
    let seeds: Vec<u64> = (0..8).collect();
    let sweep = train_seeds(&Problem::maxsat(&sat, &cfg)?, &seeds)?;
    let optimum = (0u32..1 << n)
        .map(|m| {
            let s: Vec<i8> = (0..n).map(|i| if m >> i & 1 == 1 { -1 } else { 1 }).collect();
            sat.value(&s)
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .fold(f64::MIN, f64::max);
    println!(
        "satisfied clauses per seed {:?}, best {} of optimum {optimum}",
        sweep.traces.iter().map(|t| t.best.cut).collect::<Vec<_>>(),
        sweep.max_cut
    );

    let g = gen_erdos_renyi(64, 0.2, WeightLaw::UniformPositive { b: 1.0 }, 2)?;
    let cfg = SolverConfig {
        epochs: 500,
        layers: 20,
        bisection: Some(BisectionConfig::default()),
        ..SolverConfig::default()
    };
    let t = Problem::maxcut(&g, &cfg)?.train(0)?;
    let positive = t.best.signs.iter().filter(|&&s| s > 0).count();
    println!("bisection cut {} with {positive} of 64 vertices on the positive side", t.best.cut);
    Ok(())
}
