//! Command-line front end. Exit codes: 0 success, 2 I/O or usage,
//! 3 invalid input, 4 numerical failure.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::alphabound::{
    alpha_upper_bound, alpha_upper_bound_xi_max, encoding_error_sweep, write_sweep_csv, BoundFamily,
    BoundResult,
};
use crate::error::{Error, Result};
use crate::graph::{
    emit_gset, gen_erdos_renyi, gen_erdos_renyi_fixed, gen_toroid, graph_stats, pad_to_qubits,
    parse_gset, Graph, SignLaw, WeightLaw,
};
use crate::oracle::{brute_force_maxcut, classical_gw, GWBaselineConfig, BRUTE_FORCE_LIMIT};
use crate::paulidecomp::{pauli_decompose, truncate_decomposition, trotterize};
use crate::solver::{
    pearson, train_seeds, write_trace_csv, GraphFamily, Problem, RunSummary, SolverConfig,
};

#[derive(Debug, Parser)]
#[command(name = "htaac", version, about = "Quantum Goemans-Williamson MaxCut simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Train on a graph over one or more seeds.
    Solve(SolveArgs),
    /// Write a generated graph in GSet format.
    Generate(GenerateArgs),
    /// Bound the encoding phase and measure the encoding error.
    VerifyAlpha(VerifyAlphaArgs),
    /// Pauli decomposition, truncation and an optional gate file.
    Decompose(DecomposeArgs),
    /// Exact or classical reference cut.
    Oracle(OracleArgs),
    /// Summarize a finished solve directory.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
struct GraphSource {
    /// GSet-format graph file.
    #[arg(long, conflicts_with = "generate")]
    graph: Option<PathBuf>,
    /// Generator spec, e.g. `toroid:rows=8,cols=100,seed=1` or
    /// `er:n=256,xi=3,law=uniform_positive,b=1,seed=0`.
    #[arg(long)]
    generate: Option<String>,
}

#[derive(Debug, Args)]
struct SolveArgs {
    #[command(flatten)]
    source: GraphSource,
    /// Preset for beta and the lambda coefficient.
    #[arg(long, default_value = "toroid")]
    family: String,
    /// TOML file with solver fields; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    lambda_coeff: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long)]
    eta: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    init_scale: Option<f64>,
    /// A seed count (`10` runs seeds 0..10) or a comma-separated list.
    #[arg(long, default_value = "1")]
    seeds: String,
    #[arg(long)]
    shots: Option<u64>,
    /// Best-known cut, reported as a ratio.
    #[arg(long)]
    cmax: Option<f64>,
    /// Classical SDP cut, reported as a ratio.
    #[arg(long)]
    csdp: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    spec: String,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct VerifyAlphaArgs {
    #[command(flatten)]
    source: GraphSource,
    /// uniform_positive, uniform_signed, normal_large_mean or normal_large_sigma.
    #[arg(long, default_value = "uniform_positive")]
    bound_family: String,
    /// `b`, `mu` or `sigma` of the weight law.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
    /// Use the degree of the most connected vertices.
    #[arg(long)]
    xi_max: bool,
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct DecomposeArgs {
    #[command(flatten)]
    source: GraphSource,
    #[arg(long, default_value_t = 0.015)]
    epsilon: f64,
    /// Also write the Trotterized controlled unitary to gates.txt.
    #[arg(long)]
    emit_circuit: bool,
    #[arg(long, default_value_t = 0.01)]
    phase: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    source: GraphSource,
    /// `brute` or `gw`.
    #[arg(long, default_value = "brute")]
    method: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ReportArgs {
    /// Directory written by `solve`.
    dir: PathBuf,
}

/// Record of one invocation and the files it produced.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub input: Option<String>,
    pub input_sha256: Option<String>,
    pub seeds: Vec<u64>,
    pub outputs: Vec<String>,
    pub wall_seconds: f64,
    pub version: String,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Io { .. } | Error::Json(_) | Error::Csv(_) => 2,
        Error::Parse { .. } | Error::Validation(_) | Error::Dimension { .. } => 3,
        Error::Numerical(_) => 4,
    }
}

fn dispatch(cmd: Command) -> Result<()> {
    match cmd {
        Command::Solve(a) => cmd_solve(a),
        Command::Generate(a) => cmd_generate(a),
        Command::VerifyAlpha(a) => cmd_verify_alpha(a),
        Command::Decompose(a) => cmd_decompose(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Report(a) => cmd_report(a),
    }
}

struct LoadedGraph {
    graph: Graph,
    label: String,
    sha256: Option<String>,
}

fn load_graph(src: &GraphSource) -> Result<LoadedGraph> {
    match (&src.graph, &src.generate) {
        (Some(path), None) => {
            let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
            let text = String::from_utf8(bytes.clone())
                .map_err(|_| Error::invalid(format!("{} is not UTF-8", path.display())))?;
            Ok(LoadedGraph {
                graph: parse_gset(&text)?,
                label: path.display().to_string(),
                sha256: Some(hex::encode(Sha256::digest(&bytes))),
            })
        }
        (None, Some(spec)) => Ok(LoadedGraph {
            graph: generate_from_spec(spec)?,
            label: spec.clone(),
            sha256: None,
        }),
        _ => Err(Error::invalid("exactly one of --graph or --generate is required")),
    }
}

/// `toroid:rows=R,cols=C[,seed=S][,signs=pm1|positive]` or
/// `er:n=N,(d=D|xi=X|m=M)[,law=...][,b=..|mu=..,sigma=..|w=..][,seed=S]`.
pub fn generate_from_spec(spec: &str) -> Result<Graph> {
    let (family, params) = spec.split_once(':').unwrap_or((spec, ""));
    let mut kv = std::collections::BTreeMap::new();
    for item in params.split(',').filter(|s| !s.is_empty()) {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| Error::invalid(format!("expected key=value in '{item}'")))?;
        kv.insert(k.trim().to_string(), v.trim().to_string());
    }
    let num = |key: &str| -> Result<Option<f64>> {
        kv.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::invalid(format!("bad number for {key}: '{v}'")))
            })
            .transpose()
    };
    let int = |key: &str| -> Result<Option<usize>> {
        kv.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| Error::invalid(format!("bad integer for {key}: '{v}'")))
            })
            .transpose()
    };
    let seed = int("seed")?.unwrap_or(0) as u64;
    let need = |key: &str, v: Option<usize>| v.ok_or_else(|| Error::invalid(format!("missing {key}")));
    match family {
        "toroid" => {
            let signs = match kv.get("signs").map(String::as_str) {
                None | Some("pm1") => SignLaw::RandomPm1,
                Some("positive") => SignLaw::AllPositive,
                Some(s) => return Err(Error::invalid(format!("unknown sign law '{s}'"))),
            };
            gen_toroid(need("rows", int("rows")?)?, need("cols", int("cols")?)?, signs, seed)
        }
        "er" => {
            let n = need("n", int("n")?)?;
            let law = match kv.get("law").map(String::as_str).unwrap_or("uniform_positive") {
                "uniform_positive" => WeightLaw::UniformPositive { b: num("b")?.unwrap_or(1.0) },
                "uniform_signed" => WeightLaw::UniformSigned { b: num("b")?.unwrap_or(1.0) },
                "normal" => WeightLaw::Normal {
                    mu: num("mu")?.unwrap_or(0.0),
                    sigma: num("sigma")?.unwrap_or(1.0),
                },
                "constant" => WeightLaw::Constant { w: num("w")?.unwrap_or(1.0) },
                l => return Err(Error::invalid(format!("unknown weight law '{l}'"))),
            };
            if let Some(m) = int("m")? {
                gen_erdos_renyi_fixed(n, m, law, seed)
            } else if let Some(xi) = num("xi")? {
                gen_erdos_renyi_fixed(n, (xi * n as f64).round() as usize, law, seed)
            } else {
                let d = num("d")?.ok_or_else(|| Error::invalid("er needs one of d, xi or m"))?;
                gen_erdos_renyi(n, d, law, seed)
            }
        }
        f => Err(Error::invalid(format!("unknown generator '{f}'"))),
    }
}

/// A bare count `N` means seeds `0..N`; otherwise a comma-separated list.
pub fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    let bad = || Error::invalid(format!("bad seed list '{s}'"));
    if !s.contains(',') {
        let n: u64 = s.trim().parse().map_err(|_| bad())?;
        if n == 0 {
            return Err(Error::invalid("at least one seed is required"));
        }
        return Ok((0..n).collect());
    }
    s.split(',')
        .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
        .collect()
}

fn solver_config(a: &SolveArgs) -> Result<SolverConfig> {
    let family: GraphFamily = a.family.parse()?;
    let mut cfg = SolverConfig::for_family(family);
    if let Some(path) = &a.config {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let overlay: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::invalid(format!("{}: {e}", path.display())))?;
        let mut base = toml::Table::try_from(&cfg)
            .map_err(|e| Error::invalid(format!("config encoding: {e}")))?;
        for (k, v) in overlay {
            if !base.contains_key(&k) && k != "shots" && k != "bisection" {
                return Err(Error::invalid(format!("unknown config key '{k}'")));
            }
            base.insert(k, v);
        }
        cfg = base
            .try_into()
            .map_err(|e: toml::de::Error| Error::invalid(format!("{}: {e}", path.display())))?;
    }
    macro_rules! flag {
        ($($f:ident),*) => { $( if let Some(v) = a.$f { cfg.$f = v; } )* };
    }
    flag!(alpha, beta, lambda_coeff, k, layers, eta, epochs, init_scale);
    if a.shots.is_some() {
        cfg.shots = a.shots;
    }
    Ok(cfg)
}

fn create_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let path = dir.join("manifest.json");
    fs::write(&path, serde_json::to_string_pretty(manifest)?).map_err(|e| Error::io(&path, e))
}

fn ratio(x: f64, reference: Option<f64>) -> Option<f64> {
    reference.filter(|r| *r != 0.0).map(|r| x / r)
}

#[derive(Serialize)]
struct SolveSummary {
    family: String,
    #[serde(flatten)]
    run: RunSummary,
    cmax: Option<f64>,
    csdp: Option<f64>,
    max_ratio_cmax: Option<f64>,
    mean_ratio_cmax: Option<f64>,
    max_ratio_csdp: Option<f64>,
    mean_ratio_csdp: Option<f64>,
}

fn cmd_solve(a: SolveArgs) -> Result<()> {
    let start = Instant::now();
    let loaded = load_graph(&a.source)?;
    let cfg = solver_config(&a)?;
    let seeds = parse_seeds(&a.seeds)?;
    let problem = Problem::maxcut(&loaded.graph, &cfg)?;
    log::info!(
        "solving {} ({} vertices, {} qubits) over {} seeds",
        loaded.label,
        loaded.graph.n_vertices(),
        problem.n_qubits(),
        seeds.len()
    );
    let sweep = train_seeds(&problem, &seeds)?;
    let wall = start.elapsed().as_secs_f64();

    create_out_dir(&a.out)?;
    let trace_path = a.out.join("trace.csv");
    let file = fs::File::create(&trace_path).map_err(|e| Error::io(&trace_path, e))?;
    write_trace_csv(&sweep.traces, std::io::BufWriter::new(file))?;

    let run = RunSummary::new(&problem, &sweep, wall);
    let summary = SolveSummary {
        family: a.family.clone(),
        max_ratio_cmax: ratio(run.max_cut, a.cmax),
        mean_ratio_cmax: ratio(run.mean_cut, a.cmax),
        max_ratio_csdp: ratio(run.max_cut, a.csdp),
        mean_ratio_csdp: ratio(run.mean_cut, a.csdp),
        cmax: a.cmax,
        csdp: a.csdp,
        run,
    };
    let summary_path = a.out.join("summary.json");
    fs::write(&summary_path, serde_json::to_string_pretty(&summary)?)
        .map_err(|e| Error::io(&summary_path, e))?;
    println!(
        "max cut {} (seed {}), mean {:.3}",
        summary.run.max_cut, summary.run.best_seed, summary.run.mean_cut
    );
    write_manifest(
        &a.out,
        &RunManifest {
            command: "solve".into(),
            config: serde_json::to_value(&cfg)?,
            input: Some(loaded.label),
            input_sha256: loaded.sha256,
            seeds,
            outputs: vec!["trace.csv".into(), "summary.json".into()],
            wall_seconds: wall,
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )
}

fn cmd_generate(a: GenerateArgs) -> Result<()> {
    let g = generate_from_spec(&a.spec)?;
    fs::write(&a.out, emit_gset(&g)).map_err(|e| Error::io(&a.out, e))?;
    println!("{} vertices, {} edges", g.n_vertices(), g.edges().len());
    Ok(())
}

#[derive(Serialize)]
struct AlphaReport {
    bound: BoundResult,
    /// Alphas at or below a tenth of the bound.
    within_margin: Vec<bool>,
}

fn cmd_verify_alpha(a: VerifyAlphaArgs) -> Result<()> {
    let start = Instant::now();
    let loaded = load_graph(&a.source)?;
    let family = BoundFamily::parse(&a.bound_family, a.scale)?;
    let stats = graph_stats(&loaded.graph);
    let n = loaded.graph.n_vertices();
    let bound = if a.xi_max {
        alpha_upper_bound_xi_max(&stats, n, family)?
    } else {
        alpha_upper_bound(&stats, n, family)?
    };
    let sweep = encoding_error_sweep(&pad_to_qubits(&loaded.graph), &a.alphas)?;

    create_out_dir(&a.out)?;
    let csv_path = a.out.join("bound.csv");
    let file = fs::File::create(&csv_path).map_err(|e| Error::io(&csv_path, e))?;
    write_sweep_csv(&sweep, file)?;
    println!(
        "alpha^2 <~ {:.6}, alpha <~ {:.6}{}",
        bound.alpha_sq_bound,
        bound.alpha_bound,
        if bound.lower_bound_only { " (conservative)" } else { "" }
    );
    let margin = bound.alpha_bound / 10.0;
    let mut within = Vec::new();
    for r in &sweep {
        let ok = r.alpha <= margin;
        within.push(ok);
        println!(
            "alpha {:.6}: rel_err mean {:.6e} max {:.6e}, {}",
            r.alpha,
            r.rel_err_mean,
            r.rel_err_max,
            if ok { "within 10x margin" } else { "outside 10x margin" }
        );
    }
    let report_path = a.out.join("bound.json");
    fs::write(
        &report_path,
        serde_json::to_string_pretty(&AlphaReport {
            bound,
            within_margin: within,
        })?,
    )
    .map_err(|e| Error::io(&report_path, e))?;
    write_manifest(
        &a.out,
        &RunManifest {
            command: "verify-alpha".into(),
            config: serde_json::json!({
                "bound_family": a.bound_family,
                "scale": a.scale,
                "xi_max": a.xi_max,
                "alphas": a.alphas,
            }),
            input: Some(loaded.label),
            input_sha256: loaded.sha256,
            seeds: vec![],
            outputs: vec!["bound.csv".into(), "bound.json".into()],
            wall_seconds: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )
}

#[derive(Serialize)]
struct DecomposeReport {
    full_terms: usize,
    kept_terms: usize,
    epsilon: f64,
    achieved_error: f64,
    kept: Vec<String>,
}

fn cmd_decompose(a: DecomposeArgs) -> Result<()> {
    let start = Instant::now();
    let loaded = load_graph(&a.source)?;
    if !(a.phase.is_finite()) {
        return Err(Error::invalid("phase must be finite"));
    }
    let w = pad_to_qubits(&loaded.graph);
    let terms = pauli_decompose(&w)?;
    let trunc = truncate_decomposition(&terms, a.epsilon)?;
    let circuit = if a.emit_circuit {
        if trunc.kept.is_empty() {
            return Err(Error::invalid("no terms kept; nothing to compile"));
        }
        Some(trotterize(&trunc.kept, a.phase)?)
    } else {
        None
    };

    create_out_dir(&a.out)?;
    let mut outputs = vec!["decomposition.json".to_string()];
    let report = DecomposeReport {
        full_terms: terms.len(),
        kept_terms: trunc.kept.len(),
        epsilon: a.epsilon,
        achieved_error: trunc.error,
        kept: trunc.kept.iter().map(|t| t.to_string()).collect(),
    };
    let path = a.out.join("decomposition.json");
    fs::write(&path, serde_json::to_string_pretty(&report)?).map_err(|e| Error::io(&path, e))?;
    if let Some(seq) = circuit {
        let gates = a.out.join("gates.txt");
        fs::write(&gates, seq.to_text()).map_err(|e| Error::io(&gates, e))?;
        outputs.push("gates.txt".into());
    }
    println!(
        "{} of {} terms kept, error {:.6}",
        report.kept_terms, report.full_terms, report.achieved_error
    );
    write_manifest(
        &a.out,
        &RunManifest {
            command: "decompose".into(),
            config: serde_json::json!({
                "epsilon": a.epsilon,
                "phase": a.phase,
                "emit_circuit": a.emit_circuit,
            }),
            input: Some(loaded.label),
            input_sha256: loaded.sha256,
            seeds: vec![],
            outputs,
            wall_seconds: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )
}

fn cmd_oracle(a: OracleArgs) -> Result<()> {
    let start = Instant::now();
    let loaded = load_graph(&a.source)?;
    let solution = match a.method.as_str() {
        "brute" => {
            if loaded.graph.n_vertices() > BRUTE_FORCE_LIMIT {
                return Err(Error::invalid(format!(
                    "brute force is limited to {BRUTE_FORCE_LIMIT} vertices"
                )));
            }
            brute_force_maxcut(&loaded.graph)?
        }
        "gw" => classical_gw(
            &loaded.graph,
            &GWBaselineConfig {
                seed: a.seed,
                ..GWBaselineConfig::default()
            },
        )?,
        m => return Err(Error::invalid(format!("unknown oracle method '{m}'"))),
    };
    create_out_dir(&a.out)?;
    let path = a.out.join("oracle.json");
    fs::write(&path, serde_json::to_string_pretty(&solution)?).map_err(|e| Error::io(&path, e))?;
    println!("cut {}", solution.cut);
    write_manifest(
        &a.out,
        &RunManifest {
            command: "oracle".into(),
            config: serde_json::json!({ "method": a.method, "seed": a.seed }),
            input: Some(loaded.label),
            input_sha256: loaded.sha256,
            seeds: vec![a.seed],
            outputs: vec!["oracle.json".into()],
            wall_seconds: start.elapsed().as_secs_f64(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
    )
}

#[derive(serde::Deserialize)]
struct TraceRow {
    seed: u64,
    cq_est: f64,
    cq_rounded: f64,
    sigma_rho: f64,
}

fn cmd_report(a: ReportArgs) -> Result<()> {
    let path = a.dir.join("trace.csv");
    let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
    let mut by_seed: std::collections::BTreeMap<u64, Vec<TraceRow>> = Default::default();
    for row in csv::Reader::from_reader(file).deserialize() {
        let row: TraceRow = row?;
        by_seed.entry(row.seed).or_default().push(row);
    }
    if by_seed.is_empty() {
        return Err(Error::invalid("trace.csv has no rows"));
    }
    println!("seed,epochs,best_cut,final_sigma_rho,corr_est_rounded");
    for (seed, rows) in &by_seed {
        let best = rows.iter().map(|r| r.cq_rounded).fold(f64::MIN, f64::max);
        let est: Vec<f64> = rows.iter().map(|r| r.cq_est).collect();
        let rounded: Vec<f64> = rows.iter().map(|r| r.cq_rounded).collect();
        let corr = pearson(&est, &rounded).map_or("nan".to_string(), |c| format!("{c:.4}"));
        println!(
            "{seed},{},{best},{:.3e},{corr}",
            rows.len(),
            rows.last().map_or(0.0, |r| r.sigma_rho)
        );
    }
    Ok(())
}
