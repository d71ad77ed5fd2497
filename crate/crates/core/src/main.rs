use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use qdswitch::cli::{self, Command, ConfigSource, FitKind};
use qdswitch::fitting::SpectrumParam;
use qdswitch::Error;

/// Electrically switched quantum-dot cavity modulator simulator.
#[derive(Parser, Debug)]
#[command(name = "qdswitch", version)]
struct Args {
    /// Configuration file (flat TOML key-value document).
    #[arg(long, global = true, value_name = "PATH", conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in configuration preset.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Output directory (overrides `out_dir` in the config).
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// RNG seed (overrides `seed` in the config).
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Subcommand, Debug)]
enum Sub {
    /// Reflectivity/PL spectra per bias and the polariton anticrossing.
    Spectrum,
    /// Depletion width, field and Stark shift versus bias.
    Stark,
    /// Time-domain switching under a square-wave drive.
    Switch {
        /// Drive frequency in MHz (overrides `drive_freq_mhz`).
        #[arg(long, value_name = "MHZ")]
        freq_mhz: Option<f64>,
    },
    /// Fit spectra, Stark shifts or the contrast calibration.
    Fit {
        #[arg(long, value_enum, default_value_t = Kind::Spectrum)]
        kind: Kind,
        /// Input CSV; synthetic data from the config when omitted.
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        /// Comma-separated free parameters for spectrum fits.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        free: Option<Vec<SpectrumParam>>,
    },
    /// Figures of merit: bandwidth, regime, energy.
    Metrics,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Kind {
    Spectrum,
    Stark,
    Contrast,
}

fn fail(kind: &str, code: u8, message: &str) -> ExitCode {
    let record = serde_json::json!({ "error": kind, "code": code, "message": message });
    eprintln!("{record}");
    ExitCode::from(code)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) if !e.use_stderr() => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail("usage", 1, e.to_string().trim()),
    };
    let source = match (args.config, args.preset) {
        (Some(p), _) => ConfigSource::File(p),
        (None, Some(name)) => ConfigSource::Preset(name),
        (None, None) => {
            let e = Error::Config {
                key: "--config".into(),
                msg: "one of --config PATH or --preset NAME is required".into(),
            };
            return fail(e.kind(), e.exit_code() as u8, &e.to_string());
        }
    };
    let command = match args.command {
        Sub::Spectrum => Command::Spectrum,
        Sub::Stark => Command::Stark,
        Sub::Switch { freq_mhz } => Command::Switch {
            frequency_mhz: freq_mhz,
        },
        Sub::Fit { kind, data, free } => Command::Fit {
            kind: match kind {
                Kind::Spectrum => FitKind::Spectrum,
                Kind::Stark => FitKind::Stark,
                Kind::Contrast => FitKind::Contrast,
            },
            data,
            free,
        },
        Sub::Metrics => Command::Metrics,
    };
    match cli::execute(&command, &source, args.out.as_deref(), args.seed) {
        Ok(outcome) => {
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            let line: Vec<String> = outcome
                .summary
                .iter()
                .map(|(k, v)| format!("{k}={v}"))
                .collect();
            println!("{} {}", command.name(), line.join(" "));
            println!("wrote {}", outcome.out_dir.display());
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), e.exit_code() as u8, &e.to_string()),
    }
}
