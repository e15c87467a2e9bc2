use std::path::PathBuf;
use std::process::ExitCode;

use anlq::expcli::{dispatch, exit_code, Invocation, Scenario};
use clap::{Parser, Subcommand};

/// Active nematic Q-tensor simulator and linear-theory toolkit.
#[derive(Parser, Debug)]
#[command(name = "anlq", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,

    /// Worker threads (overrides ANLQ_WORKERS; default 1).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Override the initial-data seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Nonlinear torus simulation with diagnostics.
    Run { config: PathBuf },
    /// Whole-space linear decay study and fits.
    LinearDecay { config: PathBuf },
    /// Scan of the coupling kernel across the resonance.
    KernelProbe { config: PathBuf },
    /// Compensated lower-bound study of the linear velocity.
    LowerBound { config: PathBuf },
    /// Property suites; writes a JSON report.
    Validate { config: Option<PathBuf> },
    /// Decay fit of one column of an existing CSV.
    Fit {
        csv: PathBuf,
        /// Column to fit (`ln_` columns hold log values).
        #[arg(long, default_value = "Q_L2_k0")]
        column: String,
        /// Fit window, e.g. `--window 10 100`; default is the last decade.
        #[arg(long, num_args = 2)]
        window: Option<Vec<f64>>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let workers = cli
        .workers
        .or_else(|| std::env::var("ANLQ_WORKERS").ok().and_then(|v| v.parse().ok()))
        .unwrap_or(1)
        .max(1);
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(workers).build_global() {
        eprintln!("warning: worker pool: {e}");
    }
    let (scenario, input, column, window) = match cli.command {
        Command::Run { config } => (Scenario::Run, Some(config), None, None),
        Command::LinearDecay { config } => (Scenario::LinearDecay, Some(config), None, None),
        Command::KernelProbe { config } => (Scenario::KernelProbe, Some(config), None, None),
        Command::LowerBound { config } => (Scenario::LowerBound, Some(config), None, None),
        Command::Validate { config } => (Scenario::Validate, config, None, None),
        Command::Fit { csv, column, window } => (Scenario::Fit, Some(csv), Some(column), window.map(|w| [w[0], w[1]])),
    };
    let inv = Invocation { scenario, input, out_dir: cli.out, seed: cli.seed, workers, column, window };
    let res = dispatch(&inv);
    match &res {
        Ok(o) => {
            println!("{}", serde_json::to_string_pretty(o.report.get("summary").unwrap_or(&o.report)).unwrap_or_default());
            for a in &o.artifacts {
                eprintln!("wrote {}", a.display());
            }
            if !o.passed {
                eprintln!("{}: assertion failure", scenario.name());
            }
        }
        Err(e) => eprintln!("error: {e}"),
    }
    ExitCode::from(exit_code(&res) as u8)
}
