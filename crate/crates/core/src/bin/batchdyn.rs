use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use batchdyn::harness::{self, BenchConfig, GenConfig, Model, RunConfig, Structure, StructureFile, Trace, VerifyParams};
use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "batchdyn", version, about = "Batch-dynamic spanners and sparsifiers")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Seed {
    #[arg(long, env = "BATCHDYN_SEED", default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct Params {
    /// Spanner parameter; stretch is 2k-1.
    #[arg(long, default_value_t = 3)]
    k: u32,
    /// Bundle size.
    #[arg(long, default_value_t = 4)]
    t: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Constant in the sparsifier's bundle size.
    #[arg(long, default_value_t = 1.0)]
    c_t: f64,
    /// Depth bound of the BFS tree.
    #[arg(long, default_value_t = 16)]
    depth: u32,
}

#[derive(Subcommand)]
enum Cmd {
    /// Write a random update trace.
    Gen {
        #[arg(long, value_enum, default_value_t = Model::Uniform)]
        model: Model,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, default_value_t = 10)]
        batches: usize,
        #[arg(long, default_value_t = 16)]
        batch_size: usize,
        /// Fraction of updates that are insertions.
        #[arg(long, default_value_t = 0.0)]
        mix: f64,
        /// Refuse inserts when the trace targets this structure.
        #[arg(long = "for", value_enum)]
        target: Option<Structure>,
        #[command(flatten)]
        seed: Seed,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Replay a trace and emit per-batch statistics.
    Run {
        #[arg(long, value_enum)]
        structure: Structure,
        #[arg(long)]
        trace: PathBuf,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        seed: Seed,
        #[arg(long, default_value_t = 1)]
        verify_every: usize,
        #[arg(long)]
        rebuild_every: Option<u64>,
        /// Stats destination; stdout when absent.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Final structure in `H`/`S` line format.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Check a structure file against the final graph of a trace.
    Verify {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long)]
        structure: PathBuf,
        #[arg(long, value_enum, default_value_t = Kind::Auto)]
        kind: Kind,
        #[arg(long)]
        stretch: Option<u32>,
        #[arg(long, default_value_t = 0.5)]
        eps: f64,
        #[command(flatten)]
        seed: Seed,
    },
    /// Time generated workloads.
    Bench {
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Structure::Estree, Structure::Spanner, Structure::Sparse, Structure::Bundle, Structure::Sparsifier])]
        structures: Vec<Structure>,
        #[arg(long, value_enum, default_value_t = Model::Uniform)]
        model: Model,
        #[arg(long, default_value_t = 512)]
        n: usize,
        #[arg(long, default_value_t = 4096)]
        m: usize,
        #[arg(long, default_value_t = 16)]
        batches: usize,
        #[arg(long, default_value_t = 64)]
        batch_size: usize,
        #[arg(long, default_value_t = 0.5)]
        mix: f64,
        #[arg(long, default_value_t = 16)]
        verify_every: usize,
        #[command(flatten)]
        params: Params,
        #[command(flatten)]
        seed: Seed,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Auto,
    Spanner,
    Sparsifier,
}

fn main() -> ExitCode {
    match real_main(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn emit(path: Option<&PathBuf>, text: &str) -> batchdyn::Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn real_main(cli: Cli) -> batchdyn::Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen { model, n, m, batches, batch_size, mix, target, seed, out } => {
            if target.is_some_and(|s| s.is_decremental()) && mix > 0.0 {
                return Err(batchdyn::Error::InsertIntoDecremental);
            }
            let cfg = GenConfig { model, n, m, batches, batch_size, mix, seed: seed.seed };
            emit(out.as_ref(), &harness::generate(&cfg)?.render())?;
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Run { structure, trace, params, seed, verify_every, rebuild_every, stats, dump } => {
            let trace = Trace::read(&trace)?;
            let cfg = RunConfig {
                structure,
                k: params.k,
                t: params.t,
                eps: params.eps,
                c_t: params.c_t,
                depth: params.depth,
                source: 0,
                seed: seed.seed,
                verify_every,
                rebuild_every,
            };
            let report = harness::run(&trace, &cfg)?;
            emit(stats.as_ref(), &report.stats_lines())?;
            if let Some(p) = dump {
                fs::write(p, report.output.render())?;
            }
            if let Some(f) = &report.failure {
                eprintln!("check failed at batch {}", f.batch);
                eprintln!("{}", serde_json::to_string_pretty(f)?);
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Cmd::Verify { graph, structure, kind, stretch, eps, seed } => {
            let g = Trace::read(&graph)?.final_graph()?;
            let s = StructureFile::parse(&fs::read_to_string(&structure)?)?;
            let s = match (kind, s) {
                (Kind::Spanner, StructureFile::Sparsifier(_)) | (Kind::Sparsifier, StructureFile::Spanner(_)) => {
                    return Err(batchdyn::Error::InvalidParameter("structure file has the other kind".into()));
                }
                (_, s) => s,
            };
            let cert = harness::verify(&g, &s, &VerifyParams { stretch, eps, seed: seed.seed });
            println!("{}", serde_json::to_string(&cert)?);
            Ok(if cert.pass { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Cmd::Bench { structures, model, n, m, batches, batch_size, mix, verify_every, params, seed } => {
            let cfg = BenchConfig {
                structures,
                model,
                n,
                m,
                batches,
                batch_size,
                mix,
                seed: seed.seed,
                verify_every,
                k: params.k,
                t: params.t,
                eps: params.eps,
                depth: params.depth,
            };
            let mut failed = false;
            for r in harness::bench(&cfg)? {
                failed |= r.failures > 0;
                println!("{}", serde_json::to_string(&r)?);
            }
            Ok(if failed { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
    }
}
