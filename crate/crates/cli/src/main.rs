use clap::{Parser, Subcommand};
use gapspec::config::RunConfig;
use gapspec::output::{to_rounded_json, write_outputs};
use gapspec::pipeline::{run, RunError, Stage};
use gapspec_core::bands::{mathieu_band_edges, sum_bands};
use serde_json::json;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gapspec", version, about = "Spectral enclosures in the gaps of periodic Schrödinger operators")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute spectrum, enclosures and plots for a configuration.
    Run {
        config: PathBuf,
        /// Output directory (overrides the config and the environment).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Like `run`, but the Galerkin pollution report is required.
    Sweep {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the band structure of `amplitude·Σ cos(2x_i)` as JSON.
    Bands {
        #[arg(long, allow_negative_numbers = true)]
        amplitude: f64,
        #[arg(long, default_value_t = 5)]
        n_bands: usize,
        #[arg(long, default_value_t = 32)]
        modes: usize,
        #[arg(long, default_value_t = 1)]
        dimension: usize,
    },
}

fn execute(config: PathBuf, out: Option<PathBuf>, force_sweep: bool) -> Result<(), RunError> {
    let cfg = RunConfig::load(&config).map_err(|e| RunError::new(Stage::Config, "-", e))?;
    let result = run(&cfg, force_sweep)?;
    let dir = out.unwrap_or_else(|| cfg.output_dir());
    let written = write_outputs(&result, &dir).map_err(|e| RunError::new(Stage::Write, &result.digest, e))?;

    let t = &result.timings;
    eprintln!(
        "digest {}: n = {}, {} enclosures; bands {:.2?}, assemble {:.2?}, spectrum {:.2?}, certify {:.2?}, sweep {:.2?}",
        result.digest,
        result.n,
        result.enclosures.len(),
        t.bands,
        t.assemble,
        t.spectrum,
        t.certify,
        t.sweep
    );
    for e in &result.refined {
        let x = &e.enclosure;
        eprintln!("  gap {:?}: {:.6} ± {:.2e}", x.gap_index, x.center, x.half_width);
    }
    for p in &written {
        println!("{}", p.display());
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config, out } => execute(config, out, false),
        Command::Sweep { config, out } => execute(config, out, true),
        Command::Bands { amplitude, n_bands, modes, dimension } => {
            if dimension == 0 {
                eprintln!("error: --dimension must be at least 1");
                return ExitCode::from(2);
            }
            let axis = match mathieu_band_edges(amplitude, n_bands, modes) {
                Ok(b) => b,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let total = (1..dimension).fold(axis.clone(), |acc, _| sum_bands(&acc, &axis));
            let doc = json!({
                "bands": total.bands(),
                "known_up_to": total.known_up_to(),
                "gaps": total.all_gaps(),
            });
            print!("{}", to_rounded_json(&doc));
            Ok(())
        }
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
