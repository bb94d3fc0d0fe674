use std::path::PathBuf;
use std::process::ExitCode;

use amtc_cli::{emit_csv, run, Input, Mode, Preset, RunSpec};
use anyhow::{bail, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "amtc", version, about = "Ask and bid prices of American options under proportional transaction costs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Price a model file or a preset.
    Price(PriceArgs),
}

#[derive(Args)]
struct PriceArgs {
    /// Model description (TOML).
    #[arg(long, required_unless_present = "preset", conflicts_with = "preset")]
    spec: Option<PathBuf>,
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Write the price grid as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Cross-check prices, hedges and certificates; exit with 2 on a mismatch.
    #[arg(long)]
    verify: bool,
    #[arg(long, value_enum)]
    mode: Option<Mode>,
    /// Dump the seller's and buyer's hedging strategies.
    #[arg(long)]
    hedge: bool,
    /// Dump the stopping times and martingale pairs that attain the prices.
    #[arg(long)]
    certificate: bool,
    /// Compare the ask price with the best pure stopping time.
    #[arg(long)]
    pure_gap: bool,
    /// Restrict a table preset to these step counts.
    #[arg(long, value_delimiter = ',')]
    steps: Vec<usize>,
    /// Restrict a table preset to these proportional costs (fractions).
    #[arg(long, value_delimiter = ',')]
    costs: Vec<f64>,
}

fn price(args: PriceArgs) -> Result<bool> {
    let mut spec = match (&args.spec, args.preset) {
        (Some(path), _) => RunSpec::from_file(path)?,
        (None, Some(preset)) => RunSpec::preset(preset),
        (None, None) => bail!("either --spec or --preset is required"),
    };
    if let Input::Grid { steps, costs, .. } = &mut spec.input {
        if !args.steps.is_empty() {
            *steps = args.steps.clone();
        }
        if !args.costs.is_empty() {
            *costs = args.costs.clone();
        }
    } else if !args.steps.is_empty() || !args.costs.is_empty() {
        bail!("--steps and --costs only apply to table presets");
    }
    if args.preset == Some(Preset::Example4) {
        if args.mode == Some(Mode::Float) {
            eprintln!("note: example4 always runs in rational mode");
        }
    } else if args.mode.is_some() {
        spec.mode = args.mode;
    }
    spec.outputs.hedge |= args.hedge;
    spec.outputs.certificate |= args.certificate;
    spec.outputs.pure_gap |= args.pure_gap;
    spec.verify = args.verify;

    let report = run(&spec)?;
    print!("{}", report.render());
    if let Some(path) = &args.csv {
        emit_csv(&report, path)?;
    }
    Ok(report.verified())
}

fn main() -> ExitCode {
    let Command::Price(args) = Cli::parse().command;
    match price(args) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
