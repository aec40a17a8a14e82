use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use limset::cli::commands::{self, status_of, Example8Args, Globals, Outcome, SimulateArgs};
use limset::models::Example8Mode;

/// Cluster-set laboratory for normalized partial sums.
#[derive(Parser)]
#[command(name = "limset", version)]
struct Cli {
    #[command(flatten)]
    globals: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalArgs {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master seed; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory (default ./runs/<config hash>).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Print the machine-readable report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Print nothing except errors.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(alias = "exact-log")]
    Exact,
    Scaled,
}

#[derive(Subcommand)]
enum Command {
    /// Membership verdicts and constants for the queries in the config.
    Criteria,
    /// Monte Carlo clustering with containment checks.
    Simulate {
        #[arg(long)]
        n_max: Option<u64>,
        /// Worker threads (capped by LIMSET_THREADS).
        #[arg(long)]
        streams: Option<usize>,
        /// Also write every functional snapshot as CSV.
        #[arg(long)]
        snapshot_csv: bool,
    },
    /// Block-model verification (identities, q-mass, envelope; simulation when scaled).
    Example8 {
        #[arg(long)]
        k_max: Option<u32>,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long)]
        streams: Option<usize>,
    },
    /// Minimal-energy function in the ε-tube around a scalar grid function.
    Tautstring {
        /// CSV with columns t,g.
        input: PathBuf,
        #[arg(long)]
        epsilon: f64,
    },
    /// Built-in property suite.
    Verify {
        /// Run only checks whose group or name contains this text.
        #[arg(long)]
        filter: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let g = Globals {
        config: cli.globals.config,
        seed: cli.globals.seed,
        out: cli.globals.out,
        json: cli.globals.json,
        quiet: cli.globals.quiet,
    };
    let result = match cli.command {
        Command::Criteria => commands::criteria(&g),
        Command::Simulate {
            n_max,
            streams,
            snapshot_csv,
        } => commands::simulate(
            &g,
            &SimulateArgs {
                n_max,
                streams,
                snapshot_csv,
            },
        ),
        Command::Example8 {
            k_max,
            mode,
            kappa,
            streams,
        } => commands::example8(
            &g,
            &Example8Args {
                k_max,
                mode: mode.map(|m| match m {
                    Mode::Exact => Example8Mode::ExactLog,
                    Mode::Scaled => Example8Mode::Scaled,
                }),
                kappa,
                streams,
            },
        ),
        Command::Tautstring { input, epsilon } => commands::tautstring(&g, &input, epsilon),
        Command::Verify { filter } => Ok(commands::verify(&g, filter.as_deref())),
    };
    match result {
        Ok(out) => {
            report(&g, &out);
            ExitCode::from(out.status.code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(status_of(&e).code() as u8)
        }
    }
}

fn report(g: &Globals, out: &Outcome) {
    if g.quiet {
        return;
    }
    if g.json {
        println!("{}", serde_json::to_string_pretty(&out.report).unwrap_or_default());
    } else {
        println!("{}", out.text);
        if let Some(d) = &out.out_dir {
            println!("results in {}", d.display());
        }
    }
}
