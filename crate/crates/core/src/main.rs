use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use tal_election::commands::{cmd_ablate, cmd_elect, cmd_eval, cmd_simulate, cmd_viz, VizArgs};

#[derive(Parser)]
#[command(name = "tal-election", version, about = "Multi-view action localization post-processing")]
struct Cli {
    /// Worker threads for parallel stages (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Elect one segment per class from a probability tensor.
    Elect {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Defaults to the tensor file name.
        #[arg(long)]
        video_id: Option<String>,
    },
    /// Score predictions against ground truth.
    Eval {
        #[arg(long)]
        gt: PathBuf,
        #[arg(long)]
        pred: PathBuf,
        /// JSON report path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate a synthetic corpus.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Tune and score the four ablation variants on a synthetic corpus.
    Ablate {
        #[arg(long)]
        scenario: PathBuf,
        /// CSV report path.
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Plot one class's election as SVG.
    Viz {
        #[arg(long)]
        tensor: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long = "class")]
        class_id: usize,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        gt: Option<PathBuf>,
        #[arg(long)]
        video_id: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }

    let mut stdout = io::stdout().lock();
    let mut stderr = io::stderr();
    let result = match cli.command {
        Command::Elect {
            tensor,
            config,
            out,
            video_id,
        } => cmd_elect(&tensor, &config, &out, video_id.as_deref(), &mut stdout),
        Command::Eval { gt, pred, out } => cmd_eval(&gt, &pred, &out, &mut stdout),
        Command::Simulate { scenario, out, seed } => cmd_simulate(&scenario, &out, seed, &mut stdout),
        Command::Ablate { scenario, out, seed } => {
            cmd_ablate(&scenario, &out, seed, &mut stdout, &mut stderr)
        }
        Command::Viz {
            tensor,
            config,
            class_id,
            out,
            gt,
            video_id,
        } => cmd_viz(&VizArgs {
            tensor,
            config,
            class_id,
            out,
            gt,
            video_id,
        }),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_internal() { 2 } else { 1 })
        }
    }
}
