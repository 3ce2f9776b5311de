use clap::Parser;

use arcext_cli::{error_kind, run, Invocation};

/// Batch front-end for the extension-operator toolkit. Each run reads one
/// JSON config, executes the named computation, and writes data.csv,
/// summary.json, and manifest.json into the output directory.
#[derive(Parser)]
#[command(name = "arcext", version)]
struct Cli {
    /// Task to run: psi-table, trial-scan, extremize, decompose, audit,
    /// drift, or identity-check. Must match the command field of the config.
    command: String,
    /// Path to the JSON run config.
    #[arg(long)]
    config: std::path::PathBuf,
    /// Output directory; overrides out_dir from the config.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
    /// RNG seed; overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

fn main() {
    let cli = Cli::parse();
    let invocation = Invocation {
        command: cli.command,
        config_path: cli.config,
        out_override: cli.out,
        seed_override: cli.seed,
    };
    match run(&invocation) {
        Ok(dir) => println!("wrote {}", dir.display()),
        Err(e) => {
            let report = serde_json::json!({
                "error": {"kind": error_kind(&e), "message": e.to_string()}
            });
            eprintln!("{report}");
            std::process::exit(1);
        }
    }
}
