//! Adjoint gradients of the full loss against central finite differences.

use std::sync::Arc;

use htaac_qsdp::constraints::ZConstraintSet;
use htaac_qsdp::graph::{gen_erdos_renyi, pad_to_qubits, WeightLaw};
use htaac_qsdp::operator::{DenseSymOp, DiagonalOp};
use htaac_qsdp::simulator::{adjoint_gradient, evaluate_loss, Ansatz, LossSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = gen_erdos_renyi(16, 0.4, WeightLaw::UniformSigned { b: 1.0 }, 5)?;
    let spec = LossSpec {
        objective: Some(Arc::new(DenseSymOp::sin_of(&pad_to_qubits(&g), 0.3)?)),
        population: Some(Arc::new(DiagonalOp::sin_of(&[0.5; 16].map(|x: f64| -x), 0.8))),
        constraints: Some(ZConstraintSet::of_order(4, 2)?),
        lambda: 0.2,
        ..LossSpec::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut a = Ansatz::random(4, 3, 1.0, &mut rng);
    let eval = adjoint_gradient(&a, &spec)?;
    println!("loss {:.6} over {} parameters", eval.components.total, a.param_count());

    let h = 1e-5;
    let mut worst = 0.0f64;
    for k in 0..a.param_count() {
        let theta = a.angles()[k];
        a.angles_mut()[k] = theta + h;
        let up = evaluate_loss(&a, &spec)?.total;
        a.angles_mut()[k] = theta - h;
        let down = evaluate_loss(&a, &spec)?.total;
        a.angles_mut()[k] = theta;
        let fd = (up - down) / (2.0 * h);
        worst = worst.max((fd - eval.gradient[k]).abs() / (1.0 + fd.abs()));
    }
    println!("worst relative deviation from finite differences: {worst:.2e}");
    Ok(())
}
