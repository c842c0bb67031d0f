use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use ldgshishkin_core::harness::{merge_settings, parse_config_file, render_table, run_sweep, SweepConfig};

/// Convergence sweeps of the LDG method on Shishkin meshes.
#[derive(Debug, Parser)]
#[command(name = "ldgshishkin", version)]
struct Args {
    /// Space dimension (1 or 2).
    #[arg(long)]
    dim: Option<usize>,
    /// Problem key: paper1d, poly1d, manufactured2d, poly2d.
    #[arg(long)]
    problem: Option<String>,
    /// Polynomial degrees, comma separated.
    #[arg(long)]
    k: Option<String>,
    /// Mesh sizes, comma separated, doubling.
    #[arg(long)]
    n: Option<String>,
    /// Perturbation parameters, comma separated.
    #[arg(long)]
    eps: Option<String>,
    /// Transition parameter; defaults to k + 1.
    #[arg(long)]
    sigma: Option<String>,
    /// Gauss points per cell for the error integrals.
    #[arg(long = "quad-order")]
    quad_order: Option<String>,
    /// energy, balanced or both.
    #[arg(long)]
    norm: Option<String>,
    /// banded or condensed.
    #[arg(long)]
    solver: Option<String>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// csv or markdown.
    #[arg(long)]
    format: Option<String>,
    /// solve or projection.
    #[arg(long)]
    study: Option<String>,
    /// Concurrent sweep cells.
    #[arg(long)]
    workers: Option<String>,
    /// key=value settings file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Args {
    fn settings(&self) -> Vec<(String, String)> {
        let mut s = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                s.push((k.to_string(), v));
            }
        };
        push("dim", self.dim.map(|d| d.to_string()));
        push("problem", self.problem.clone());
        push("k", self.k.clone());
        push("n", self.n.clone());
        push("eps", self.eps.clone());
        push("sigma", self.sigma.clone());
        push("quad-order", self.quad_order.clone());
        push("norm", self.norm.clone());
        push("solver", self.solver.clone());
        push("out", self.out.as_ref().map(|p| p.display().to_string()));
        push("format", self.format.clone());
        push("study", self.study.clone());
        push("workers", self.workers.clone());
        s
    }
}

fn run(args: &Args) -> ldgshishkin_core::Result<bool> {
    let base = match &args.config {
        Some(path) => parse_config_file(path)?,
        None => Vec::new(),
    };
    let cfg = SweepConfig::from_settings(&merge_settings(base, args.settings()))?;
    let table = run_sweep(&cfg)?;
    let text = render_table(&table, cfg.format)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    let mut ok = true;
    for row in table.failures() {
        ok = false;
        eprintln!(
            "run k={} N={} eps={:e} failed: {}",
            row.k,
            row.n,
            row.eps,
            row.failure.as_deref().unwrap_or("")
        );
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
