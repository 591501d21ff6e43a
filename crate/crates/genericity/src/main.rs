//! Command-line front end: structural analysis of automaton files,
//! genericity censuses, asymptotic certificates, word classification and
//! Farey distances.
//!
//! Exit codes: 0 on success, 1 when a run reports check violations, 2 on
//! usage errors.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use genericity::automaton::Automaton;
use genericity::counting;
use genericity::experiments::{
    run_asymptotics, run_genericity, BackendSelector, ExperimentConfig, Mode,
};
use genericity::geometry;
use genericity::psl2z;

#[derive(Parser)]
#[command(
    name = "genericity",
    about = "Normal-form automata: counting, rigidity and loxodromy censuses",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Structural analysis of an automaton interchange file.
    Analyze {
        /// Path to the automaton file (JSON interchange format).
        file: PathBuf,
    },
    /// Per-length census of rigid and loxodromically acting words.
    Genericity(GenericityArgs),
    /// Growth rate, domination, and limit-proportion certificates.
    Asymptotics(AsymptoticsArgs),
    /// Classify the action of one word.
    Classify {
        #[arg(long)]
        backend: String,
        #[arg(long)]
        word: String,
        /// Orbit horizon for the displacement evidence.
        #[arg(long, default_value_t = 50)]
        horizon: usize,
    },
    /// Farey-graph distance between two vertices (psl2z backend).
    Distance {
        #[arg(long)]
        backend: String,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        /// Cross-check the result against the clipped BFS oracle.
        #[arg(long)]
        oracle: bool,
    },
}

#[derive(Args)]
struct GenericityArgs {
    /// psl2z, braid:N, free:K, or an automaton file path.
    #[arg(long)]
    backend: String,
    #[arg(long, default_value_t = 1)]
    lmin: usize,
    #[arg(long, default_value_t = 8)]
    lmax: usize,
    /// exhaustive or sample.
    #[arg(long, default_value = "exhaustive")]
    mode: String,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Geodesic-words radius R; defaults to the backend's natural value.
    #[arg(long)]
    radius: Option<u64>,
    #[arg(long, default_value_t = 50)]
    horizon: usize,
    #[arg(long, default_value_t = 5)]
    kmax: usize,
    /// Largest sphere enumerated exhaustively.
    #[arg(long, default_value_t = genericity::experiments::DEFAULT_BUDGET)]
    budget: u64,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the per-length CSV here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct AsymptoticsArgs {
    #[arg(long)]
    backend: String,
    /// Probe length l for the finite-length certificates.
    #[arg(long, default_value_t = 30)]
    probe_length: usize,
    /// Optional pattern whose factor-avoidance rate is reported.
    #[arg(long)]
    wfar: Option<String>,
    /// Write the JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(violations) if violations == 0 => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("{n} check violation(s)");
            ExitCode::from(1)
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch(cli: Cli) -> Result<usize> {
    match cli.command {
        Command::Analyze { file } => {
            let aut = Automaton::read_interchange_file(&file)
                .with_context(|| format!("reading {}", file.display()))?;
            let report = aut.check_anf_hypothesis();
            println!(
                "alphabet: {} letters, {} states",
                aut.alphabet_len(),
                aut.state_count()
            );
            println!("{report}");
            let interior = aut.interior_states().collect();
            let growth = counting::restriction_growth(&aut, &interior, 1e-12);
            println!(
                "interior growth rate: {:.12} (residual {:.3e}, {} iterations)",
                growth.rate, growth.residual, growth.iterations
            );
            Ok(0)
        }
        Command::Genericity(args) => {
            let backend = BackendSelector::parse(&args.backend)?;
            let mut cfg = ExperimentConfig::new(backend);
            cfg.l_min = args.lmin;
            cfg.l_max = args.lmax;
            cfg.mode = Mode::parse(&args.mode)?;
            cfg.samples = args.samples;
            cfg.seed = args.seed;
            if let Some(r) = args.radius {
                cfg.radius = r;
            }
            cfg.horizon = args.horizon;
            cfg.k_max = args.kmax;
            cfg.budget = args.budget;
            cfg.json_out = args.out;
            cfg.csv_out = args.csv;
            let report = run_genericity(&cfg)?;
            for row in &report.rows {
                let lox = row
                    .rigid_loxodromic
                    .as_deref()
                    .map(|v| format!(" rigid&lox {v}"))
                    .unwrap_or_default();
                println!(
                    "l={:>3} sphere {:>12} ball {:>12} rigid {:>10}{} p_rigid {}",
                    row.l, row.sphere, row.ball, row.rigid, lox, row.p_rigid.decimal
                );
                for v in &row.violations {
                    println!("  violation: {v}");
                }
            }
            if cfg.json_out.is_none() {
                println!("{}", report.to_json());
            }
            Ok(report.violation_count())
        }
        Command::Asymptotics(args) => {
            let backend = BackendSelector::parse(&args.backend)?;
            let report = run_asymptotics(&backend, args.probe_length, args.wfar.as_deref())?;
            let text = serde_json::to_string_pretty(&report)?;
            if let Some(path) = &args.out {
                std::fs::write(path, text + "\n")?;
            } else {
                println!("{text}");
            }
            Ok(0)
        }
        Command::Classify {
            backend,
            word,
            horizon,
        } => {
            let selector = BackendSelector::parse(&backend)?;
            let class = match selector {
                BackendSelector::Psl2z => {
                    let w = psl2z::parse_word(&word)?;
                    geometry::classify(&psl2z::backend(), &w, horizon, 8.0)?
                }
                BackendSelector::Free { rank } => {
                    let b = genericity::freegroup::tree_backend(rank)?;
                    let w = genericity::freegroup::parse_word(rank, &word)?;
                    geometry::classify(&b, &w, horizon, 8.0)?
                }
                other => bail!(
                    "classify needs a geometric backend (psl2z or free:K), got {}",
                    other.label()
                ),
            };
            println!("{}", class.tag);
            println!("translation length estimate: {:.6}", class.translation_length);
            Ok(0)
        }
        Command::Distance {
            backend,
            from,
            to,
            oracle,
        } => {
            if BackendSelector::parse(&backend)? != BackendSelector::Psl2z {
                bail!("distance is only defined for the psl2z backend");
            }
            let u = psl2z::FareyVertex::parse(&from)?;
            let v = psl2z::FareyVertex::parse(&to)?;
            let d = if oracle {
                psl2z::farey_distance_validated(&u, &v)
                    .map_err(|e| anyhow!("cross-check failed: {e}"))?
            } else {
                psl2z::farey_distance(&u, &v)
            };
            println!("{d}");
            Ok(0)
        }
    }
}
