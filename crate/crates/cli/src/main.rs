use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{error, info};

use rigidlab_cli::commands::{cmd_certify, cmd_check, cmd_gen, cmd_reduce, cmd_replay, GenKind};
use rigidlab_cli::mine::{mine, MineConfig, MineTarget};
use rigidlab_cli::report::{CheckName, Command, Report, RunConfig, Verdict};

/// Rigidity checks, reduction certificates and counterexample search for block-and-hole graphs.
///
/// Exit codes: 0 all selected checks pass, 2 a check fails, 3 invalid input, 4 internal fault.
#[derive(Parser)]
#[command(name = "rigidlab", version)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args)]
struct Common {
    /// Seed for every randomized step.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Rank trials over the prime field.
    #[arg(long, global = true, default_value_t = rigidlab::rigidity::DEFAULT_TRIALS)]
    trials: usize,
    /// Upper bound on sphere size for generation and mining.
    #[arg(long, global = true, default_value_t = 20)]
    max_vertices: usize,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Include wall-clock timings in the report.
    #[arg(long, global = true)]
    timing: bool,
    /// Write the report (or generated graph) here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run combinatorial and numeric checks on a graph file.
    Check {
        input: PathBuf,
        /// Comma-separated subset of checks to run.
        #[arg(long, value_delimiter = ',', value_enum)]
        checks: Option<Vec<CheckName>>,
        /// Cross-check sparsity and girth against brute-force oracles.
        #[arg(long)]
        oracle: bool,
    },
    /// Build a reduction tree and emit its certificate.
    Reduce {
        input: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Reduce, replay with rank checks at every stage, and emit the certificate.
    Certify {
        input: PathBuf,
        #[arg(long)]
        cert: Option<PathBuf>,
    },
    /// Verify a certificate against a graph file and replay it.
    Replay {
        input: PathBuf,
        #[arg(long)]
        cert: PathBuf,
    },
    /// Generate a graph file.
    Gen {
        #[command(subcommand)]
        kind: GenCmd,
    },
    /// Seeded search for face graphs with a prescribed behaviour.
    Mine {
        #[arg(long, value_enum)]
        target: MineTarget,
        #[arg(long)]
        blocks: Option<usize>,
        #[arg(long)]
        holes: Option<usize>,
        /// Number of seeded candidates to examine at most.
        #[arg(long, default_value_t = 100_000)]
        budget: u64,
        #[arg(long)]
        min_vertices: Option<usize>,
        /// Stop after this many finds.
        #[arg(long, default_value_t = 1)]
        max_finds: usize,
        /// Directory for re-verified finds.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum GenCmd {
    /// Random triangulated sphere.
    Sphere {
        #[arg(long)]
        vertices: usize,
    },
    /// Random face graph of type (blocks, holes).
    Facegraph {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        holes: usize,
        /// Do not aim for zero total index.
        #[arg(long)]
        unbalanced: bool,
    },
    /// Random face graph with explicit double-disc blocks.
    BlockHole {
        #[arg(long)]
        vertices: usize,
        #[arg(long)]
        blocks: usize,
        #[arg(long)]
        holes: usize,
    },
    /// A built-in fixture by name.
    Fixture { name: String },
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), String> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| format!("{}: {e}", p.display())),
        None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| e.to_string()),
    }
}

fn config(common: &Common, command: Command) -> RunConfig {
    let mut cfg = RunConfig::new(command);
    cfg.seed = common.seed;
    cfg.trials = common.trials;
    cfg.max_vertices = common.max_vertices;
    cfg.jobs = common.jobs;
    cfg.timing = common.timing;
    cfg.output = common.out.clone();
    cfg
}

fn run(cli: Cli) -> Verdict {
    let c = &cli.common;
    if let Some(n) = c.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            error!("could not size the worker pool: {e}");
        }
    }
    let report = match cli.command {
        Cmd::Check { input, checks, oracle } => {
            let mut cfg = config(c, Command::Check);
            cfg.input = Some(input);
            if let Some(mut checks) = checks {
                checks.sort();
                checks.dedup();
                cfg.checks = checks;
            }
            cfg.oracle = oracle;
            cmd_check(&cfg)
        }
        Cmd::Reduce { input, cert } => {
            let mut cfg = config(c, Command::Reduce);
            cfg.input = Some(input);
            cfg.certificate = cert;
            cmd_reduce(&cfg)
        }
        Cmd::Certify { input, cert } => {
            let mut cfg = config(c, Command::Certify);
            cfg.input = Some(input);
            cfg.certificate = cert;
            cmd_certify(&cfg)
        }
        Cmd::Replay { input, cert } => {
            let mut cfg = config(c, Command::Replay);
            cfg.input = Some(input);
            cfg.certificate = Some(cert);
            cmd_replay(&cfg)
        }
        Cmd::Gen { kind } => {
            let kind = match kind {
                GenCmd::Sphere { vertices } => GenKind::Sphere { vertices },
                GenCmd::Facegraph {
                    vertices,
                    blocks,
                    holes,
                    unbalanced,
                } => GenKind::FaceGraph {
                    vertices,
                    blocks,
                    holes,
                    balanced: !unbalanced,
                },
                GenCmd::BlockHole { vertices, blocks, holes } => GenKind::BlockHole { vertices, blocks, holes },
                GenCmd::Fixture { name } => GenKind::Fixture(name),
            };
            return match cmd_gen(&kind, c.seed).and_then(|f| emit(&c.out, &f.to_pretty())) {
                Ok(()) => Verdict::Pass,
                Err(e) => {
                    error!("{e}");
                    Verdict::Invalid
                }
            };
        }
        Cmd::Mine {
            target,
            blocks,
            holes,
            budget,
            min_vertices,
            max_finds,
            out_dir,
        } => {
            let mut m = MineConfig::new(target);
            m.blocks = blocks.unwrap_or(m.blocks);
            m.holes = holes.unwrap_or(m.holes);
            m.min_vertices = min_vertices.unwrap_or((2 * (m.blocks + m.holes) + 1).max(6));
            m.max_vertices = c.max_vertices.max(m.min_vertices);
            m.budget = budget;
            m.seed = c.seed;
            m.trials = c.trials;
            m.max_finds = max_finds;
            m.out_dir = out_dir;
            info!("mining {target:?} ({},{}) with budget {budget}", m.blocks, m.holes);
            let result = mine(&m);
            info!("examined {} candidates, {} finds", result.examined, result.finds.len());
            let mut report = Report::new(config(c, Command::Mine));
            report.face_type = Some((m.blocks, m.holes));
            report.escalate(result.verdict);
            report.result = serde_json::to_value(&result).expect("serializable");
            report
        }
    };
    if let Some(e) = &report.error {
        error!("{e}");
    }
    if let Err(e) = emit(&c.out, &report.to_pretty()) {
        error!("{e}");
        return Verdict::Invalid.max(report.verdict);
    }
    report.verdict
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { Verdict::Invalid.exit_code() } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    ExitCode::from(run(cli).exit_code() as u8)
}
