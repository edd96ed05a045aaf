//! `bdepth`: boundary depth of filtered complexes from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use bdepth::asymptotic::ScanOptions;
use bdepth::commands::{self, CommandError, Outcome};
use bdepth::filtered::DepthOptions;
use bdepth::io;
use bdepth::novikov::Exp;
use bdepth::par::Execution;
use bdepth::suite::SuiteOptions;

#[derive(Parser)]
#[command(
    name = "bdepth",
    version,
    about = "Exact boundary depth of filtered chain complexes"
)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed for randomized runs; recorded in every output.
    #[arg(long, global = true, env = "BDEPTH_SEED", default_value_t = 0)]
    seed: u64,
    /// Starting valuation cutoff for the depth engine (a rational).
    #[arg(long, global = true, env = "BDEPTH_CUTOFF", value_parser = parse_rational)]
    cutoff: Option<Exp>,
    /// Relative tolerance of the integrator's step-halving audit.
    #[arg(long, global = true, env = "BDEPTH_TOLERANCE")]
    tolerance: Option<f64>,
    /// Grid points of a scan.
    #[arg(long, global = true, env = "BDEPTH_RESOLUTION")]
    resolution: Option<usize>,
    /// Directory for the report and artifacts; without it the report goes
    /// to stdout.
    #[arg(long, global = true, env = "BDEPTH_OUT")]
    out: Option<PathBuf>,
    /// Evaluate independent work items one at a time.
    #[arg(long, global = true, env = "BDEPTH_SEQUENTIAL")]
    sequential: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Boundary depth, per-grading depths and a witness of a complex file.
    Depth { complex: PathBuf },
    /// Depth of a circle Morse complex, sampled function or embedding pair.
    Morse { input: PathBuf },
    /// Tensor product of two complexes with its depth bounds.
    Tensor { left: PathBuf, right: PathBuf },
    /// Dichotomy verdict for a quantum correction file.
    Qc { correction: PathBuf },
    /// Exceptional-set scan of an operator family CSV.
    Scan {
        family: PathBuf,
        /// Lower end of the η range; must exceed the end-point norm bound.
        #[arg(long, allow_negative_numbers = true)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        /// Integrator steps.
        #[arg(long, env = "BDEPTH_STEPS")]
        steps: Option<usize>,
    },
    /// Seeded randomized property run.
    Suite {
        /// Instances per property.
        #[arg(long, env = "BDEPTH_COUNT", default_value_t = 20)]
        count: usize,
    },
}

fn parse_rational(s: &str) -> Result<Exp, String> {
    s.trim()
        .parse::<Exp>()
        .map_err(|e| format!("not a rational: {e}"))
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Depth { .. } => "depth",
            Command::Morse { .. } => "morse",
            Command::Tensor { .. } => "tensor",
            Command::Qc { .. } => "qc",
            Command::Scan { .. } => "scan",
            Command::Suite { .. } => "suite",
        }
    }
}

fn read(path: &Path) -> Result<(String, String), CommandError> {
    Ok((io::read_text(path)?, path.display().to_string()))
}

fn run(cli: &Cli) -> Result<Outcome, CommandError> {
    let c = &cli.common;
    let depth = DepthOptions {
        cutoff: c.cutoff,
        ..DepthOptions::default()
    };
    let execution = if c.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    match &cli.command {
        Command::Depth { complex } => {
            let (text, origin) = read(complex)?;
            commands::depth(&text, &origin, c.seed, &depth)
        }
        Command::Morse { input } => {
            let (text, origin) = read(input)?;
            commands::morse(&text, &origin, c.seed)
        }
        Command::Tensor { left, right } => {
            let (l, lo) = read(left)?;
            let (r, ro) = read(right)?;
            commands::tensor((&l, &lo), (&r, &ro), c.seed, &depth)
        }
        Command::Qc { correction } => {
            let (text, origin) = read(correction)?;
            commands::qc(&text, &origin, c.seed, &depth)
        }
        Command::Scan {
            family,
            lo,
            hi,
            steps,
        } => {
            let (text, origin) = read(family)?;
            let mut opts = ScanOptions {
                execution,
                ..ScanOptions::default()
            };
            if let Some(r) = c.resolution {
                opts.resolution = r;
            }
            if let Some(t) = c.tolerance {
                opts.integrator.tolerance = t;
            }
            if let Some(s) = steps {
                opts.integrator.steps = *s;
            }
            commands::scan(&text, &origin, (*lo, *hi), c.seed, &opts)
        }
        Command::Suite { count } => Ok(commands::suite(&SuiteOptions {
            seed: c.seed,
            count: *count,
            depth,
            execution,
        })),
    }
}

fn emit(cli: &Cli, outcome: &Outcome) -> Result<(), CommandError> {
    let report = outcome.report.render();
    match &cli.common.out {
        Some(dir) => {
            io::write_text(&dir.join(format!("{}.toml", cli.command.name())), &report)?;
            for (name, text) in &outcome.artifacts {
                io::write_text(&dir.join(name), text)?;
            }
        }
        None => {
            print!("{report}");
            for (name, text) in &outcome.artifacts {
                print!("\n# --- {name}\n{text}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|o| emit(&cli, &o).map(|()| o));
    match result {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            let record = e.record(cli.command.name(), cli.common.seed).render();
            eprint!("{record}");
            if let Some(dir) = &cli.common.out {
                let _ = io::write_text(&dir.join("failure.toml"), &record);
            }
            ExitCode::from(e.exit_code())
        }
    }
}
