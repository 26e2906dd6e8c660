use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qmci::data::ModelFamily;
use qmci::rng::seeded;
use qmci_cli::config::{GroverConfig, RunConfig};
use qmci_cli::converge::{parse_csv, run_converge, to_csv};
use qmci_cli::demo::{fit_record, grover_demo};
use qmci_cli::estimate::run_estimate;
use qmci_cli::prepare::prepare;
use qmci_cli::slope::fit_slopes;
use qmci_cli::{CliError, CliResult};

#[derive(Debug, Parser)]
#[command(
    name = "qmci",
    version,
    about = "Amplitude-estimation Monte Carlo on a simulated quantum register"
)]
struct Cli {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for trial-level parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// One estimate of E[f(X)] as JSON.
    Estimate,
    /// MSE against oracle calls for each configured method, as CSV.
    Converge,
    /// Log-log slope per method from a converge CSV.
    Slope { csv: PathBuf },
    /// Grover search for a single marked item.
    GroverDemo {
        #[arg(long)]
        n_qubits: Option<usize>,
        #[arg(long)]
        marked: Option<usize>,
        #[arg(long)]
        shots: Option<u64>,
    },
    /// Maximum-likelihood fit of a one-column CSV.
    Fit {
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_parser = parse_family)]
        family: ModelFamily,
    },
}

fn parse_family(s: &str) -> Result<ModelFamily, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string()))
        .map_err(|_| format!("unknown family {s:?}; expected gaussian, lognormal or uniform"))
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.unwrap_or(cfg.seed);
    let out = cli.out.clone().or_else(|| cfg.out.clone());
    if let Some(n) = cli.threads.or(cfg.threads) {
        if n == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }

    let text = match cli.command {
        Command::Estimate => {
            let est = cfg
                .estimate
                .as_ref()
                .ok_or_else(|| CliError::Config("missing \"estimate\" section".into()))?;
            let prep = prepare(cfg.problem()?)?;
            to_json(&run_estimate(&prep, est, &mut seeded(seed))?)
        }
        Command::Converge => {
            let conv = cfg
                .converge
                .as_ref()
                .ok_or_else(|| CliError::Config("missing \"converge\" section".into()))?;
            let prep = prepare(cfg.problem()?)?;
            to_csv(&run_converge(&prep, conv, seed)?)
        }
        Command::Slope { csv } => {
            let text = std::fs::read_to_string(&csv)
                .map_err(|e| CliError::Io(format!("{}: {e}", csv.display())))?;
            to_json(&fit_slopes(&parse_csv(&text)?)?)
        }
        Command::GroverDemo {
            n_qubits,
            marked,
            shots,
        } => {
            let base = cfg.grover.clone().unwrap_or_default();
            let g = GroverConfig {
                n_qubits: n_qubits.unwrap_or(base.n_qubits),
                marked: marked.unwrap_or(base.marked),
                shots: shots.unwrap_or(base.shots),
            };
            to_json(&grover_demo(&g, &mut seeded(seed))?)
        }
        Command::Fit { data, family } => to_json(&fit_record(&data, family)?),
    };
    emit(out.as_deref(), &text)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qmci: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
