use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use seqwarp_cli::{load, run_manifest, RunOptions, EXIT_INPUT};

#[derive(Parser)]
#[command(name = "seqwarp", version, about = "Verify sequential warped product formulas against a numerical oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the runs of a manifest and write the report.
    Run {
        manifest: PathBuf,
        /// Output directory for report.json and CSVs.
        #[arg(long, default_value = "seqwarp-out")]
        out: PathBuf,
        /// Only execute runs of this command.
        #[arg(long)]
        only: Option<String>,
        /// Override the manifest seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Leave timestamps and wall times out of the report.
        #[arg(long)]
        no_timestamp: bool,
    },
    /// Validate a manifest without running it.
    Check { manifest: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { manifest, out, only, seed, no_timestamp } => {
            let opts = RunOptions { out, only, seed, timestamp: !no_timestamp };
            match run_manifest(&manifest, &opts) {
                Ok(outcome) => {
                    for r in &outcome.report.runs {
                        let label = r.name.as_deref().map(|n| format!(" {n}")).unwrap_or_default();
                        println!(
                            "{:<4} {}{label} (pass={}, expect={:?})",
                            if r.ok { "ok" } else { "FAIL" },
                            r.command,
                            r.pass,
                            r.expect
                        );
                    }
                    println!("report: {}", outcome.report_path.display());
                    ExitCode::from(outcome.exit_code as u8)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(EXIT_INPUT as u8)
                }
            }
        }
        Command::Check { manifest } => match load(&manifest) {
            Ok(model) => {
                println!(
                    "{}: ok ({} charts, {} fields, {} runs)",
                    manifest.display(),
                    model.manifest.charts.len(),
                    model.fields.len(),
                    model.manifest.runs.len()
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(EXIT_INPUT as u8)
            }
        },
    }
}
