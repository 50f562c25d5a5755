//! Exhaustive optimum, classical low-rank relaxation and the quantum solver
//! on a handful of small random graphs.

use htaac_qsdp::graph::{gen_erdos_renyi, WeightLaw};
use htaac_qsdp::oracle::{brute_force_maxcut, classical_gw_run, GWBaselineConfig};
use htaac_qsdp::solver::{train, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("  N   optimum   relaxation   rounded   quantum");
    for seed in 0..5 {
        let n = 12 + seed as usize;
        let g = gen_erdos_renyi(n, 0.5, WeightLaw::UniformPositive { b: 1.0 }, seed)?;
        let opt = brute_force_maxcut(&g)?.cut;
        let gw = classical_gw_run(&g, &GWBaselineConfig::default())?;
        let cfg = SolverConfig {
            beta: 0.0,
            epochs: 1000,
            seed,
            ..SolverConfig::default()
        };
        let q = train(&g, &cfg)?.best.cut;
        println!(
            "{n:>3} {opt:>9.3} {:>12.3} {:>9.3} {q:>9.3}",
            gw.sdp_value, gw.solution.cut
        );
    }
    Ok(())
}
