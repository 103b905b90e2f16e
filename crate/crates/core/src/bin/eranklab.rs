use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use eranklab::cli::{self, Command, Settings};

#[derive(Parser)]
#[command(name = "eranklab", version, about = "Effective-rank experiments for shallow network PDE solvers")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Kernel spectrum and effective rank along one model axis
    ErankScan(Flags),
    /// Gradient descent on a diagonal system with a prescribed spectrum
    ToyDiag(Flags),
    /// Gradient-descent training on a benchmark problem
    Train(Flags),
    /// Spectral gap between mirrored half-cell kernels
    TheoremCheck(Flags),
    /// Direct least-squares solve for the outer coefficients
    RfmSolve(Flags),
    /// Repeat a run from its manifest
    Rerun {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct Flags {
    /// TOML file with the same keys as the flags; flags win
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    #[arg(long)]
    problem: Option<String>,
    /// Scan axis: mp, rm or m
    #[arg(long)]
    axis: Option<String>,
    /// Comma-separated scan values
    #[arg(long)]
    values: Option<String>,
    /// Cells per dimension, comma-separated
    #[arg(long)]
    mp: Option<String>,
    #[arg(long)]
    rm: Option<f64>,
    #[arg(long)]
    jn: Option<usize>,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    /// tanh, sin or relu3
    #[arg(long)]
    activation: Option<String>,
    /// a (characteristic) or b (sine blend)
    #[arg(long)]
    pou_kind: Option<String>,
    /// rfm or full
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    snapshot_epochs: Option<String>,
    #[arg(long)]
    metrics_every: Option<usize>,
    /// equal, geometric, linear or two-cluster
    #[arg(long)]
    spectrum: Option<String>,
    #[arg(long)]
    seeds: Option<usize>,
    #[arg(long)]
    n_equals_m: bool,
}

impl Flags {
    fn settings(&self) -> eranklab::Result<Settings> {
        let flags = Settings {
            problem: self.problem.clone(),
            axis: self.axis.clone(),
            values: self.values.clone(),
            mp: self.mp.clone(),
            rm: self.rm,
            jn: self.jn,
            m: self.m,
            n: self.n,
            activation: self.activation.clone(),
            pou_kind: self.pou_kind.clone(),
            mode: self.mode.clone(),
            lr: self.lr,
            epochs: self.epochs,
            gamma: self.gamma,
            seed: self.seed,
            snapshot_epochs: self.snapshot_epochs.clone(),
            metrics_every: self.metrics_every,
            spectrum: self.spectrum.clone(),
            seeds: self.seeds,
            n_equals_m: self.n_equals_m.then_some(true),
        };
        let base = match &self.config {
            Some(path) => Settings::from_toml_file(path)?,
            None => Settings::default(),
        };
        Ok(base.merged(&flags))
    }
}

fn main() -> ExitCode {
    let args = Cli::parse();
    if let Some(n) = std::env::var("ERANKLAB_THREADS").ok().and_then(|v| v.parse().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match &args.command {
        Cmd::Rerun { manifest, out } => cli::rerun(manifest, out),
        Cmd::ErankScan(f) => f.settings().and_then(|s| cli::run(Command::ErankScan, &s, &f.out)),
        Cmd::ToyDiag(f) => f.settings().and_then(|s| cli::run(Command::ToyDiag, &s, &f.out)),
        Cmd::Train(f) => f.settings().and_then(|s| cli::run(Command::Train, &s, &f.out)),
        Cmd::TheoremCheck(f) => f.settings().and_then(|s| cli::run(Command::TheoremCheck, &s, &f.out)),
        Cmd::RfmSolve(f) => f.settings().and_then(|s| cli::run(Command::RfmSolve, &s, &f.out)),
    };
    match result {
        Ok(m) => {
            for name in m.outputs.keys() {
                println!("wrote {name}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
