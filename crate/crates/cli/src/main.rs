mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{CliResult, CommonArgs, RunConfig};

#[derive(Parser)]
#[command(name = "umbilic", version, about = "Caustics, bifurcation walls and monodromy of perturbed umbilics")]
struct Cli {
    #[command(flatten)]
    common: CommonArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Trace the caustic and its cusps.
    Caustic,
    /// Locate the bifurcation walls.
    Walls,
    /// Build the full region graph.
    Graph,
    /// Compose glue maps around a loop.
    Monodromy {
        /// Loop as JSON (inline or a file): {"base","crossings"}, {"path"} or {"center","radius"}.
        #[arg(long = "loop")]
        loop_spec: String,
        /// Reuse a saved region graph instead of rebuilding it.
        #[arg(long)]
        graph: Option<PathBuf>,
    },
    /// Check the exact identities.
    Verify {
        /// Fixture identities only (the default).
        #[arg(long, conflicts_with = "numeric")]
        fixtures: bool,
        /// Also check the identities of the numerically built diagram.
        #[arg(long)]
        numeric: bool,
        /// List the fixture configurations and identities.
        #[arg(long)]
        list: bool,
    },
    /// Sample sheets, potentials and frame weights on a grid.
    MirrorSample {
        #[arg(long, value_parser = parse_pair, default_value = "1,0.5")]
        anchor: [f64; 2],
        #[arg(long, value_parser = parse_pair)]
        lo: Option<[f64; 2]>,
        #[arg(long, value_parser = parse_pair)]
        hi: Option<[f64; 2]>,
        #[arg(long, default_value_t = 10)]
        n: usize,
        /// Dual fibre coordinate.
        #[arg(long, value_parser = parse_pair, default_value = "0,0")]
        w: [f64; 2],
    },
}

fn parse_pair(s: &str) -> Result<[f64; 2], String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    match parts.as_slice() {
        [a, b] => {
            let a: f64 = a.parse().map_err(|e| format!("{a}: {e}"))?;
            let b: f64 = b.parse().map_err(|e| format!("{b}: {e}"))?;
            Ok([a, b])
        }
        _ => Err(format!("expected two comma-separated numbers, got {s:?}")),
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = RunConfig::resolve(&cli.common)?;
    match cli.command {
        Command::Caustic => commands::caustic(&cfg),
        Command::Walls => commands::walls(&cfg),
        Command::Graph => commands::graph(&cfg),
        Command::Monodromy { loop_spec, graph } => commands::monodromy(&cfg, &loop_spec, graph.as_ref()),
        Command::Verify { numeric, list, .. } => commands::verify(&cfg, numeric, list),
        Command::MirrorSample { anchor, lo, hi, n, w } => commands::mirror_sample(&cfg, anchor, lo, hi, n, w),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code)
        }
    }
}
