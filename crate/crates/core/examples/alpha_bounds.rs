//! Phase bound for a random graph and the measured encoding error around it.

use htaac_qsdp::alphabound::{alpha_upper_bound, encoding_error_sweep, BoundFamily};
use htaac_qsdp::graph::{gen_erdos_renyi_fixed, graph_stats, pad_to_qubits, WeightLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_erdos_renyi_fixed(256, 768, WeightLaw::UniformPositive { b: 1.0 }, 0)?;
    let bound = alpha_upper_bound(&graph_stats(&g), 256, BoundFamily::UniformPositive { b: 1.0 })?;
    println!("alpha^2 <~ {:.3}, alpha <~ {:.3}", bound.alpha_sq_bound, bound.alpha_bound);

    let alphas: Vec<f64> = [0.01, 0.05, 0.1, 0.3, 1.0, 3.0].iter().map(|f| f * bound.alpha_bound).collect();
    for r in encoding_error_sweep(&pad_to_qubits(&g), &alphas)? {
        println!(
            "alpha {:>8.4}  mean rel err {:.4}  max rel err {:.4}  off-support {:.4}",
            r.alpha, r.rel_err_mean, r.rel_err_max, r.offsupport_max
        );
    }
    Ok(())
}
