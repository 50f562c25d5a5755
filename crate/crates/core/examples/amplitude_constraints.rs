//! Pauli-string amplitude constraints: the three-qubit state that slips past
//! pairwise constraints, and penalty-only training flattening populations.

use htaac_qsdp::constraints::{constraint_report, enumerate_zstrings};
use htaac_qsdp::graph::Graph;
use htaac_qsdp::simulator::StateVector;
use htaac_qsdp::solver::{Problem, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let psi = StateVector::from_real(&[0.5, 0.0, 0.0, -0.5, 0.0, 0.5, 0.5, 0.0])?;
    for k in [2, 3] {
        let r = constraint_report(&psi, &enumerate_zstrings(3, k)?, 1.0, 8)?;
        println!("k={k}: penalty {:.3}, population variance {:.4}", r.penalty, r.sigma_rho);
    }

    let g = Graph::new(16, vec![])?;
    let cfg = SolverConfig {
        k: 4,
        use_objective: false,
        epochs: 2000,
        layers: 8,
        ..SolverConfig::default()
    };
    let trace = Problem::maxcut(&g, &cfg)?.train(0)?;
    for r in trace.records.iter().step_by(400).chain(trace.records.last()) {
        println!("epoch {:>4}: penalty {:.3e}, variance {:.3e}", r.epoch, r.penalty, r.sigma_rho);
    }
    Ok(())
}
