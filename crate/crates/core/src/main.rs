use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use driven_tls::scenario::{classify_report, run, summary_path, sweep, Overrides, ScenarioConfig, SummaryRow};
use driven_tls::{Error, Result};

#[derive(Parser)]
#[command(name = "driven-tls", version, about = "Propagators of periodically driven two-level systems")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run each coupling in order, stopping at the first failure.
    Run(Common),
    /// Run all couplings concurrently and record per-coupling failures.
    Sweep(Common),
    /// Print the condition class and the mean values behind it.
    Classify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    config: PathBuf,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    modes: Option<usize>,
    #[arg(long, value_enum)]
    oracle: Option<Switch>,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let o = Overrides {
            order: self.order,
            modes: self.modes,
            oracle: self.oracle.map(|s| matches!(s, Switch::On)),
        };
        ScenarioConfig::from_path(&self.config)?.with_overrides(&o)
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.6e}")).unwrap_or_else(|| "-".into())
}

fn print_rows(rows: &[SummaryRow]) {
    println!("{:>12} {:>4} {:>14} {:>14} {:>12} {:>14}  status", "epsilon", "cond", "Omega", "T_Om/T_om", "max|N|", "oracle_dev");
    for r in rows {
        println!(
            "{:>12} {:>4} {:>14} {:>14} {:>12} {:>14}  {}",
            r.epsilon,
            r.condition,
            opt(r.omega_rabi),
            opt(r.t_omega_over_t_drive),
            opt(r.max_abs_n),
            opt(r.oracle_max_u_dev),
            r.status
        );
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Classify(c) => {
            let report = classify_report(&c.load()?)?;
            println!("{}", serde_json::to_string(&report).map_err(|e| Error::Io(e.to_string()))?);
        }
        Command::Run(c) => {
            let cfg = c.load()?;
            let rows = run(&cfg, &c.out_dir)?;
            print_rows(&rows);
            if cfg.outputs.omega_summary {
                println!("summary: {}", summary_path(&cfg, &c.out_dir).display());
            }
        }
        Command::Sweep(c) => {
            let cfg = c.load()?;
            let rows = sweep(&cfg, &c.out_dir)?;
            print_rows(&rows);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let record = serde_json::json!({
                "error": e.kind(),
                "message": e.to_string(),
                "exit_code": e.exit_code(),
            });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
