use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use nrlgt_core::io::load_edge_list;
use nrlgt_core::oracle::{batch_curve, curve_csv, plan_attack, simulate};
use nrlgt_core::{AttackKind, AttackStrategy, ControllabilityMode, CurveKind, Topology};
use nrlgt_model::NrlGt;
use nrlgt_pipeline::commands;
use nrlgt_pipeline::config::PipelineConfig;
use nrlgt_pipeline::report;

#[derive(Parser)]
#[command(name = "nrlgt", version, about = "Network robustness learning with a graph transformer")]
struct Cli {
    /// TOML config file; defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Config override `section.key=value`, repeatable.
    #[arg(long = "set", global = true)]
    overrides: Vec<String>,
    /// Replaces both the generation and the training seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output path: dataset dir, checkpoint, report dir or result file,
    /// depending on the command.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate graphs, simulate attacks and write a dataset.
    Gen,
    /// Train encoder, backbone and curve head.
    TrainStep1 {
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Train the R_c and classification heads on a step-1 checkpoint.
    TrainStep2 {
        #[arg(long)]
        step1: PathBuf,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Per-topology error report and timing.
    Eval {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        dataset: Option<PathBuf>,
    },
    /// Resize the curve head to a dataset of another size, fine-tune and evaluate.
    Transfer {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Rank-list errors of spectral measures and the model's R_c.
    Spectral {
        #[arg(long)]
        dataset: Option<PathBuf>,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Topology class probabilities for one edge-list file.
    Classify {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        graph: PathBuf,
    },
    /// Predicted overall robustness for one edge-list file.
    Rc {
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        graph: PathBuf,
    },
    /// Oracle robustness curve of one edge-list file.
    Curve {
        graph: PathBuf,
        #[arg(long)]
        directed: Option<bool>,
        #[arg(long)]
        kind: Option<CurveKind>,
        #[arg(long)]
        attack: Option<AttackKind>,
        /// `structural` or `exact` driver-node counting.
        #[arg(long, value_parser = parse_mode)]
        mode: Option<ControllabilityMode>,
        /// Remove this fraction of nodes per step instead of one node.
        #[arg(long)]
        batch_fraction: Option<f64>,
    },
    /// Removal order of an attack on one edge-list file.
    Attack {
        graph: PathBuf,
        #[arg(long)]
        directed: Option<bool>,
        #[arg(long)]
        attack: Option<AttackKind>,
    },
}

fn parse_mode(s: &str) -> Result<ControllabilityMode, String> {
    match s {
        "structural" => Ok(ControllabilityMode::Structural),
        "exact" => Ok(ControllabilityMode::Exact),
        other => Err(format!("unknown mode {other:?}")),
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => report::write_file(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn strategy(cfg: &PipelineConfig, attack: Option<AttackKind>) -> AttackStrategy {
    let mut g = cfg.generation.clone();
    g.attack = attack.unwrap_or(g.attack);
    g.strategy(g.seed)
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global()?;
    }
    let mut cfg = PipelineConfig::load_with_overrides(cli.config.as_deref(), &cli.overrides)?;
    if let Some(s) = cli.seed {
        cfg.generation.seed = s;
        cfg.training.seed = s;
    }
    let paths = cfg.paths.clone();
    let out = cli.out.as_deref();
    let ckpt = |c: Option<PathBuf>| c.unwrap_or_else(|| paths.checkpoint.clone());
    let data_dir = |d: Option<PathBuf>| d.unwrap_or_else(|| paths.dataset.clone());
    let report_dir = out.map_or_else(|| paths.report_dir.clone(), Path::to_path_buf);

    match cli.command {
        Command::Gen => {
            let dir = out.map_or_else(|| paths.dataset.clone(), Path::to_path_buf);
            commands::cmd_gen(&cfg, &dir)?;
        }
        Command::TrainStep1 { dataset } => {
            let target = out.map_or_else(|| paths.checkpoint.clone(), Path::to_path_buf);
            commands::cmd_train_step1(&cfg, &data_dir(dataset), &target, &paths.report_dir)?;
        }
        Command::TrainStep2 { step1, dataset } => {
            let target = out.map_or_else(|| paths.checkpoint.clone(), Path::to_path_buf);
            commands::cmd_train_step2(&cfg, &data_dir(dataset), &step1, &target, &paths.report_dir)?;
        }
        Command::Eval { checkpoint, dataset } => {
            let (rep, timing) = commands::cmd_eval(&cfg, &ckpt(checkpoint), &data_dir(dataset), &report_dir)?;
            print!("{}", report::summary_csv(&rep));
            log::info!(
                "inference {:.6}s, simulation {:.6}s, speedup {:.1}x",
                timing.inference,
                timing.simulation,
                timing.speedup()
            );
        }
        Command::Transfer { checkpoint, dataset } => {
            let target = report_dir.join("transfer.ckpt");
            let (_, rep) = commands::cmd_transfer(&cfg, &ckpt(checkpoint), &dataset, &target, &report_dir)?;
            print!("{}", report::summary_csv(&rep));
        }
        Command::Spectral { dataset, checkpoint } => {
            let rows = commands::cmd_spectral(&data_dir(dataset), checkpoint.as_deref(), &report_dir)?;
            print!("{}", report::rank_csv(&rows));
        }
        Command::Classify { checkpoint, graph } => {
            let model = NrlGt::load(ckpt(checkpoint))?;
            let g = load_edge_list(&graph, !model.config().shared_tables)
                .with_context(|| format!("reading {}", graph.display()))?;
            let (_, probs) = model.predict_rc_class(&g)?;
            let mut text = String::from("class");
            for t in Topology::ALL {
                write!(text, ",p_{t}")?;
            }
            write!(text, "\n{}", Topology::ALL[nrlgt_model::argmax(&probs)])?;
            for p in &probs {
                write!(text, ",{p}")?;
            }
            text.push('\n');
            emit(out, &text)?;
        }
        Command::Rc { checkpoint, graph } => {
            let model = NrlGt::load(ckpt(checkpoint))?;
            let g = load_edge_list(&graph, !model.config().shared_tables)
                .with_context(|| format!("reading {}", graph.display()))?;
            let (rc, _) = model.predict_rc_class(&g)?;
            emit(out, &format!("rc\n{rc}\n"))?;
        }
        Command::Curve {
            graph,
            directed,
            kind,
            attack,
            mode,
            batch_fraction,
        } => {
            let g = load_edge_list(&graph, directed.unwrap_or(cfg.generation.directed))
                .with_context(|| format!("reading {}", graph.display()))?;
            let kind = kind.unwrap_or(cfg.generation.curve);
            let mode = mode.unwrap_or(cfg.generation.mode);
            let strat = strategy(&cfg, attack);
            let curve = match batch_fraction {
                Some(f) => batch_curve(&g, &strat, f, kind, mode)?,
                None => simulate(&g, &plan_attack(&g, &strat), kind, mode)?,
            };
            emit(out, &curve_csv(&curve))?;
        }
        Command::Attack {
            graph,
            directed,
            attack,
        } => {
            let g = load_edge_list(&graph, directed.unwrap_or(cfg.generation.directed))
                .with_context(|| format!("reading {}", graph.display()))?;
            let trace = plan_attack(&g, &strategy(&cfg, attack));
            let mut text = String::from("step,node\n");
            for (i, v) in trace.order.iter().enumerate() {
                writeln!(text, "{},{v}", i + 1)?;
            }
            emit(out, &text)?;
        }
    }
    Ok(())
}
