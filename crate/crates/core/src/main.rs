use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use rough_heston::commands::{
    cmd_calibrate_rho, cmd_calibrate_theta, cmd_h0, cmd_largetime, cmd_mc, cmd_rate, cmd_smile, Output,
};
use rough_heston::config::RunConfig;
use rough_heston::export::Format;
use rough_heston::Error;

/// Small-time, large-time and H -> 0 asymptotics of the rough Heston model.
#[derive(Debug, Parser)]
#[command(name = "rough-heston", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key-value parameter file applied on top of the preset
    #[arg(long, global = true)]
    params: Option<PathBuf>,

    /// Named preset: table, fig3, fig4 or fig5
    #[arg(long, global = true, default_value = "table")]
    preset: String,

    /// Output file (stdout when omitted)
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,

    /// Monte Carlo seed
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Monte Carlo paths
    #[arg(long, global = true)]
    paths: Option<usize>,

    /// Monte Carlo time steps
    #[arg(long, global = true)]
    steps: Option<usize>,

    /// Skip the Monte Carlo columns of `smile`
    #[arg(long, global = true)]
    no_mc: bool,

    /// Add the long-horizon Adams cross-check to `largetime`
    #[arg(long, global = true)]
    verify: bool,

    /// Extra key=value overrides, applied last
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Print the resolved configuration and exit
    #[arg(long, global = true)]
    show_config: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Leading-order, higher-order and Monte Carlo small-time smiles
    Smile,
    /// The scaled cumulant generating function and its rate function
    Rate,
    /// Large-time limit: V(p), V*(x) and the large-time smile
    Largetime,
    /// The H = 0 limit smile (alpha = 0.5)
    H0,
    /// Monte Carlo moment diagnostics
    Mc,
    /// Mean-reversion level theta(t) fitted to a forward variance curve
    CalibrateTheta,
    /// Correlation term structure rho(T) fitted to third moments
    CalibrateRho,
}

fn resolve(cli: &Cli) -> Result<RunConfig, Error> {
    let mut cfg = RunConfig::preset(&cli.preset)?;
    if let Some(path) = &cli.params {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        cfg.apply_text(&text).map_err(|e| match e {
            Error::Config { line, reason } => Error::Config {
                line,
                reason: format!("{}: {reason}", path.display()),
            },
            other => other,
        })?;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(paths) = cli.paths {
        cfg.paths = paths;
    }
    if let Some(steps) = cli.steps {
        cfg.steps = steps;
    }
    if cli.no_mc {
        cfg.mc = false;
    }
    if cli.verify {
        cfg.verify = true;
    }
    for o in &cli.overrides {
        cfg.apply_override(o)?;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<usize, Error> {
    let cfg = resolve(cli)?;
    if cli.show_config {
        print!("{}", cfg.to_text());
        return Ok(0);
    }
    let Output { table, failed_rows } = match cli.command {
        Command::Smile => cmd_smile(&cfg)?,
        Command::Rate => cmd_rate(&cfg)?,
        Command::Largetime => cmd_largetime(&cfg)?,
        Command::H0 => cmd_h0(&cfg)?,
        Command::Mc => cmd_mc(&cfg)?,
        Command::CalibrateTheta => cmd_calibrate_theta(&cfg)?,
        Command::CalibrateRho => cmd_calibrate_rho(&cfg)?,
    };
    let format = match cli.format {
        FormatArg::Csv => Format::Csv,
        FormatArg::Json => Format::Json,
    };
    match &cli.out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            table.write(format, &mut w)?;
            w.flush()?;
        }
        None => table.write(format, io::stdout().lock())?,
    }
    Ok(failed_rows)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(n) => {
            eprintln!("rough-heston: {n} row(s) could not be computed; see the note column");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("rough-heston: {e}");
            ExitCode::FAILURE
        }
    }
}
