//! Pauli decomposition of a toroid, truncation, and the Trotterized
//! controlled unitary as a gate list.

use htaac_qsdp::graph::{gen_toroid, pad_to_qubits, SignLaw};
use htaac_qsdp::paulidecomp::{pauli_decompose, trotter_error, trotterize, truncate_decomposition};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_toroid(8, 100, SignLaw::RandomPm1, 11)?;
    let w = pad_to_qubits(&g);
    let terms = pauli_decompose(&w)?;
    let t = truncate_decomposition(&terms, 0.015)?;
    println!(
        "{} strings of a possible {}; {} kept at relative error {:.4}",
        terms.len(),
        1u64 << (2 * w.n_qubits()),
        t.kept.len(),
        t.error
    );

    let small = pad_to_qubits(&gen_toroid(2, 4, SignLaw::RandomPm1, 1)?);
    let small_terms = pauli_decompose(&small)?;
    for phase in [0.02, 0.01, 0.005] {
        println!("phase {phase}: Trotter error {:.3e}", trotter_error(&small_terms, &small, phase)?);
    }
    let seq = trotterize(&small_terms, 0.01)?;
    println!("{} gates, {} CNOTs; first lines:", seq.gates.len(), seq.cnot_count());
    for line in seq.to_text().lines().take(8) {
        println!("  {line}");
    }
    Ok(())
}
