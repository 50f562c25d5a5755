//! Exponentiate a weight matrix and look at how well its imaginary part
//! encodes the graph.

use htaac_qsdp::dense::{herm_expm, sym_eigh};
use htaac_qsdp::graph::{gen_toroid, pad_to_qubits, SignLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_toroid(4, 4, SignLaw::RandomPm1, 3)?;
    let w = pad_to_qubits(&g);
    let eig = sym_eigh(&w)?;
    println!("spectral norm of W: {:.4}", eig.spectral_norm());

    for alpha in [0.01, 0.1, 1.0] {
        let u = herm_expm(&w, alpha)?;
        let im = u.im();
        // Im(U) / alpha approaches W as alpha shrinks
        let dev = (&im / alpha - w.matrix()).amax();
        println!(
            "alpha {alpha:<5} unitarity residual {:.2e}  max |Im(U)/alpha - W| {:.3e}",
            u.unitarity_residual(),
            dev
        );
    }
    Ok(())
}
