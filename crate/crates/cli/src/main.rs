//! `liemap`: build, iterate and fit matrix Lie maps; run the benchmarks.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numeric failure.

mod cmd;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lie_maps::{Backend, Exec};

#[derive(Parser, Debug)]
#[command(name = "liemap", version, about = "Truncated matrix Lie maps for polynomial ODEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a map from a polynomial system file.
    BuildMap(BuildMapArgs),
    /// Iterate a map from an initial state and write the trajectory as CSV.
    Simulate(SimulateArgs),
    /// Fit map weights to a uniformly sampled trajectory CSV.
    Fit(FitArgs),
    /// Van der Pol error of maps of several orders against RK4.
    BenchVdp(BenchVdpArgs),
    /// Burgers benchmark: finite differences vs the stencil Lie map.
    BenchBurgers(BenchBurgersArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum BackendKind {
    /// Scaling-and-squaring matrix exponential
    Exp,
    /// Fixed-step RK4 on the propagator equation
    Rk4,
    /// Forward Euler on the propagator equation
    Euler,
}

#[derive(Args, Debug, Clone)]
struct BackendArgs {
    /// Propagator integration backend
    #[arg(long, value_enum, default_value = "exp")]
    backend: BackendKind,
    /// Substeps for rk4 (default 16) or euler (default 60)
    #[arg(long)]
    substeps: Option<usize>,
    /// Series tolerance of the exp backend
    #[arg(long, default_value_t = 1e-13)]
    tol: f64,
}

impl BackendArgs {
    fn backend(&self) -> Backend {
        match self.backend {
            BackendKind::Exp => Backend::Exponential { tol: self.tol },
            BackendKind::Rk4 => Backend::Rk4 { substeps: self.substeps.unwrap_or(16) },
            BackendKind::Euler => Backend::Euler { substeps: self.substeps.unwrap_or(60) },
        }
    }
}

#[derive(Args, Debug, Clone, Copy)]
struct ExecArgs {
    /// Run on one thread even when built with the parallel feature
    #[arg(long)]
    sequential: bool,
}

impl ExecArgs {
    fn exec(self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }
}

#[derive(Args, Debug)]
struct BuildMapArgs {
    /// System JSON: {"n": .., "terms": [{"target", "exponents", "coeff"}]}
    system: PathBuf,
    /// Map time step
    #[arg(long)]
    dt: f64,
    /// Truncation order K
    #[arg(long)]
    order: usize,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    exec: ExecArgs,
    /// Output map JSON (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    /// Map JSON
    map: PathBuf,
    /// Initial state, comma separated
    #[arg(long, required = true, value_delimiter = ',', allow_hyphen_values = true)]
    x0: Vec<f64>,
    /// Number of map applications
    #[arg(long)]
    steps: usize,
    /// Output CSV (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Trajectory CSV with header t,x1,...,xn
    trajectory: PathBuf,
    /// Truncation order K
    #[arg(long)]
    order: usize,
    /// Ridge penalty
    #[arg(long, default_value_t = 0.0)]
    ridge: f64,
    /// Output map JSON
    #[arg(short, long)]
    output: PathBuf,
    /// Fit report JSON (stdout when omitted)
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchVdpArgs {
    /// Map orders, comma separated
    #[arg(long, value_delimiter = ',', default_value = "3,5,7")]
    orders: Vec<usize>,
    /// Map time step
    #[arg(long, default_value_t = 0.01)]
    dt: f64,
    /// Horizon
    #[arg(long, default_value_t = 10.0)]
    t_end: f64,
    /// RK4 reference step
    #[arg(long, default_value_t = 1e-4)]
    reference_step: f64,
    #[command(flatten)]
    backend: BackendArgs,
    #[command(flatten)]
    exec: ExecArgs,
    /// Output report JSON (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchBurgersArgs {
    /// Viscosity
    #[arg(long, default_value_t = 0.07)]
    nu: f64,
    /// Mesh nodes
    #[arg(long, default_value_t = 1000)]
    nx: usize,
    /// Final time
    #[arg(long, default_value_t = 0.5)]
    t_end: f64,
    /// Finite-difference time step
    #[arg(long, default_value_t = 2.5e-4)]
    dt_fdm: f64,
    /// Lie map time step
    #[arg(long, default_value_t = 1.25e-3)]
    dt_map: f64,
    /// Stencil half width r
    #[arg(long, default_value_t = 2)]
    halo: usize,
    /// Reciprocal expansion order q
    #[arg(long, default_value_t = 2)]
    expansion_order: usize,
    /// Map truncation order K
    #[arg(long, default_value_t = 3)]
    map_order: usize,
    #[command(flatten)]
    backend: BackendArgs,
    /// Time the sequential path as well as the parallel one
    #[arg(long)]
    compare_sequential: bool,
    #[command(flatten)]
    exec: ExecArgs,
    /// Times at which to write x,u snapshots of both methods
    #[arg(long, value_delimiter = ',')]
    snapshot_times: Vec<f64>,
    /// Directory for snapshot CSVs (required with --snapshot-times)
    #[arg(long)]
    snapshot_dir: Option<PathBuf>,
    /// Output report JSON (stdout when omitted)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let result = match cli.command {
        Command::BuildMap(a) => cmd::build_map(&a),
        Command::Simulate(a) => cmd::simulate(&a),
        Command::Fit(a) => cmd::fit(&a),
        Command::BenchVdp(a) => cmd::bench_vdp(&a),
        Command::BenchBurgers(a) => cmd::bench_burgers(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
