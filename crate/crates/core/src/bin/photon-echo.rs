use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use photon_echo::analysis::DecayModel;
use photon_echo::{config, output, Error, Result};

/// Photon-echo protocol simulator.
#[derive(Parser)]
#[command(version, about)]
struct Cli {
    /// Worker threads, overriding the config.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sequence: signal.csv, echo.json, spectra and Bloch files.
    Simulate {
        /// Config file or preset name.
        config: String,
    },
    /// Run the config's scan: scan.csv, scan.json and fit.json.
    Scan { config: String },
    /// Fit a decay model to a (t, amplitude) CSV; writes fit.json.
    Fit {
        csv: PathBuf,
        #[arg(long, value_parser = ["exp", "exp_offset"])]
        model: String,
    },
}

fn load(cli: &Cli, source: &str) -> Result<config::Config> {
    let mut cfg = config::load(source)?;
    if let Some(n) = cli.workers {
        if n == 0 {
            return Err(Error::Config("--workers must be at least 1".into()));
        }
        cfg.run.worker_count = n;
    }
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<()> {
    let files = match &cli.command {
        Command::Simulate { config } => output::simulate(&load(cli, config)?)?,
        Command::Scan { config } => output::scan(&load(cli, config)?)?,
        Command::Fit { csv, model } => {
            let text = std::fs::read_to_string(csv)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", csv.display())))?;
            let fit = output::fit_file(&text, model.parse::<DecayModel>()?)?;
            let json = serde_json::to_string_pretty(&fit).expect("plain data") + "\n";
            print!("{json}");
            vec![output::Artifact {
                name: "fit.json".into(),
                contents: json,
            }]
        }
    };
    output::write_artifacts(&cli.out_dir, &files)?;
    for f in &files {
        eprintln!("wrote {}", cli.out_dir.join(&f.name).display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(output::exit_code(&e) as u8)
        }
    }
}
