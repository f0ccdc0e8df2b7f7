use std::path::PathBuf;
use std::process::ExitCode;

use capacity_lab::runs::{run_command, Command, RunConfig, RunContext};
use clap::Parser;

/// Storage capacity of a perceptron with variable selection.
///
/// Exit status: 0 when every row succeeded, 2 when some rows failed,
/// 1 on a configuration or I/O error.
#[derive(Parser, Debug)]
#[command(name = "capacity-lab", version)]
struct Cli {
    /// rs-profile, capacity-curve, at-check, simulate or oracle
    command: String,
    /// TOML run configuration
    #[arg(long)]
    config: PathBuf,
    /// Output CSV (default: `[run] out`, then `<command>.csv`)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Base seed (default: `[run] seed`, then 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (default: `[run] jobs`, then 1)
    #[arg(long)]
    jobs: Option<usize>,
}

fn main() -> ExitCode {
    // clap exits with 2 on usage errors, which here means a partial run
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = Command::parse(&cli.command).and_then(|cmd| {
        let cfg = RunConfig::load(&cli.config)?;
        let ctx = RunContext::resolve(cmd, &cfg, cli.out, cli.seed, cli.jobs);
        run_command(cmd, &cfg, &ctx).map(|s| (s, ctx))
    });
    match outcome {
        Ok((summary, ctx)) => {
            eprintln!("wrote {} rows to {} ({} failed)", summary.rows, ctx.out.display(), summary.failed);
            if summary.is_partial() {
                ExitCode::from(2)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
