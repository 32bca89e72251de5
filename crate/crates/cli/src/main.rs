use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

mod commands;

#[derive(Parser, Serialize)]
#[command(name = "capalloc", version, about = "Maximum capacitated allocations: exact solvers, BP, large-graph limits")]
struct Cli {
    /// Worker threads for trials and sweeps (default: number of processors).
    #[arg(long, global = true, env = "CAPALLOC_JOBS")]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum Command {
    /// Maximum allocation of a graph file.
    Solve(SolveArgs),
    /// Orientability threshold of random h-uniform hypergraphs.
    Threshold(ThresholdArgs),
    /// Asymptotic load absorbed per server in a CDN scenario.
    Cdn(CdnArgs),
    /// Empirical M/|A| on sampled graphs against the limit.
    Lln(LlnArgs),
    /// Sample a random instance and write it as JSON.
    Gen(GenArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum Method {
    Flow,
    Bp0,
    Bp,
    Enum,
}

#[derive(Args, Serialize)]
struct SolveArgs {
    graph: PathBuf,
    #[arg(long, value_enum, default_value = "flow")]
    method: Method,
    /// Temperature parameter for `--method bp`.
    #[arg(long, default_value_t = 1.0)]
    lambda: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long)]
    max_sweeps: Option<usize>,
    /// Also run the flow oracle and fail unless the sizes agree.
    #[arg(long)]
    check: bool,
}

#[derive(Args, Serialize)]
struct ThresholdArgs {
    h: usize,
    k: usize,
    l: usize,
    r: usize,
    #[arg(long, default_value_t = 1e-4)]
    tol: f64,
    /// Empirical orientable fractions at τ*·0.95 and τ*·1.05 on N vertices.
    #[arg(long, num_args = 2, value_names = ["N", "TRIALS"])]
    simulate: Option<Vec<usize>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct CdnArgs {
    scenario: PathBuf,
}

#[derive(Args, Serialize)]
struct LlnArgs {
    /// Law files for sides A and B.
    #[arg(long, requires = "phi_b", conflicts_with_all = ["cuckoo", "cdn"])]
    phi_a: Option<PathBuf>,
    #[arg(long, requires = "phi_a")]
    phi_b: Option<PathBuf>,
    /// Hypergraph model with parameters h,k,l,r.
    #[arg(long, value_delimiter = ',', requires = "tau", conflicts_with = "cdn")]
    cuckoo: Option<Vec<usize>>,
    #[arg(long)]
    tau: Option<f64>,
    /// CDN scenario file, sampled with the configuration model.
    #[arg(long)]
    cdn: Option<PathBuf>,
    #[arg(long, default_value_t = 20_000)]
    n_a: usize,
    #[arg(long, default_value_t = 10)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct GenArgs {
    #[command(subcommand)]
    model: GenModel,
}

#[derive(Subcommand, Serialize)]
#[serde(rename_all = "lowercase")]
enum GenModel {
    /// h-uniform hypergraph with m hyperedges, or each h-subset with probability p.
    Hypergraph {
        #[arg(long)]
        n: usize,
        #[arg(long, required_unless_present = "p")]
        m: Option<usize>,
        #[arg(long, conflicts_with = "m")]
        p: Option<f64>,
        #[arg(long)]
        h: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Bipartite configuration-model graph from two law files.
    Config {
        #[arg(long)]
        phi_a: PathBuf,
        #[arg(long)]
        phi_b: PathBuf,
        #[arg(long)]
        n_a: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let mut cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        pool = pool.num_threads(j);
    }
    if let Err(e) = pool.build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(1);
    }
    cli.jobs = Some(rayon::current_num_threads());
    println!("# config: {}", serde_json::to_string(&cli).expect("config serializes"));
    match commands::run(&cli.command) {
        Ok(out) => {
            print!("{}", out.text);
            if out.ok {
                ExitCode::SUCCESS
            } else {
                eprintln!("error: agreement check failed");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
