//! Hadamard test on a trained-looking state: exact value, shot estimates and
//! the observable cut estimate built from them.

use htaac_qsdp::dense::herm_expm;
use htaac_qsdp::graph::{gen_toroid, pad_to_qubits, SignLaw};
use htaac_qsdp::simulator::{hadamard_test_im, hadamard_test_on_plus, sample_hadamard_test_im, StateVector};
use htaac_qsdp::solver::{cut_value, estimate_cq};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_toroid(4, 4, SignLaw::AllPositive, 0)?;
    let alpha = 0.01;
    let u = herm_expm(&pad_to_qubits(&g), alpha)?;

    // checkerboard signs cut every edge of an even torus
    let signs: Vec<i8> = (0..16).map(|v| if (v / 4 + v % 4) % 2 == 0 { 1 } else { -1 }).collect();
    let amps: Vec<f64> = signs.iter().map(|&s| f64::from(s) / 4.0).collect();
    let psi = StateVector::from_real(&amps)?;

    let sigma_plus = hadamard_test_on_plus(&u)?;
    let sigma = hadamard_test_im(&psi, &u)?;
    println!("exact Im<psi|U|psi> = {sigma:.6}");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for shots in [100, 10_000, 1_000_000] {
        let est = sample_hadamard_test_im(&psi, &u, shots, &mut rng)?;
        println!("{shots:>8} shots: {est:+.6}");
    }
    println!(
        "cut estimate {:.4}, true cut {}",
        estimate_cq(sigma_plus, sigma, 16, alpha),
        cut_value(&g, &signs)?
    );
    Ok(())
}
