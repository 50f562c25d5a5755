//! Parse a GSet file (or a built-in toroid), print its statistics and the
//! derived register size.
//!
//! `cargo run --example parse_and_stats -- path/to/G11`

use htaac_qsdp::graph::{emit_gset, gen_toroid, graph_stats, parse_gset, SignLaw};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let g = match std::env::args().nth(1) {
        Some(path) => parse_gset(&std::fs::read_to_string(path)?)?,
        None => gen_toroid(8, 100, SignLaw::RandomPm1, 11)?,
    };
    let s = graph_stats(&g);
    println!("vertices       {}", g.n_vertices());
    println!("edges          {}", s.e);
    println!("density        {:.5}", s.d);
    println!("edges/vertex   {:.3}", s.xi);
    println!("xi_max         {:.3}", s.xi_max);
    println!("weight sum     {}", s.w_sum);
    println!("max |degree|   {}", s.p_max);
    println!("qubits         {} (dimension {})", g.n_qubits(), 1usize << g.n_qubits());

    let text = emit_gset(&g);
    assert_eq!(parse_gset(&text)?, g);
    println!("first lines of the re-emitted file:");
    for line in text.lines().take(3) {
        println!("  {line}");
    }
    Ok(())
}
