//! Train on an 8x100 toroid over a few seeds and write the trace.
//!
//! `cargo run --release --example maxcut_toroid -- [epochs] [seeds]`

use std::fs::File;

use htaac_qsdp::graph::{gen_toroid, SignLaw};
use htaac_qsdp::oracle::{classical_gw, GWBaselineConfig};
use htaac_qsdp::solver::{pearson, train_seeds, write_trace_csv, Problem, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let epochs = args.next().map_or(Ok(300), |s| s.parse())?;
    let seeds: u64 = args.next().map_or(Ok(2), |s| s.parse())?;

    let g = gen_toroid(8, 100, SignLaw::RandomPm1, 11)?;
    let cfg = SolverConfig {
        epochs,
        ..SolverConfig::default()
    };
    let problem = Problem::maxcut(&g, &cfg)?;
    let sweep = train_seeds(&problem, &(0..seeds).collect::<Vec<_>>())?;
    for t in &sweep.traces {
        let est: Vec<f64> = t.records.iter().map(|r| r.cq_est).collect();
        let cut: Vec<f64> = t.records.iter().map(|r| r.cq_rounded).collect();
        println!(
            "seed {}: best {} at epoch {}, estimate/cut correlation {:.3}, {:.1}s",
            t.seed,
            t.best.cut,
            t.best_epoch,
            pearson(&est, &cut).unwrap_or(f64::NAN),
            t.wall_seconds
        );
    }
    let gw = classical_gw(&g, &GWBaselineConfig::default())?;
    println!("max {} mean {:.1}; classical baseline {}", sweep.max_cut, sweep.mean_cut, gw.cut);

    let path = std::env::temp_dir().join("maxcut_toroid_trace.csv");
    write_trace_csv(&sweep.traces, File::create(&path)?)?;
    println!("trace written to {}", path.display());
    Ok(())
}
