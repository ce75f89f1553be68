//! `synaptic`: decompositions, commutators and infima of a projection and an
//! effect given as JSON matrices, plus the randomized verification battery.

mod commands;
mod input;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use commands::{Rendered, TolFlags, VerifyArgs};
use input::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser)]
#[command(name = "synaptic", version, about = "Computation in synaptic algebras of symmetric matrices")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    output: Format,

    /// Relative threshold below which an eigenvalue counts as zero.
    #[arg(long, global = true, value_name = "EPS")]
    tol_rank: Option<f64>,

    /// Relative threshold below which a commutator counts as zero.
    #[arg(long, global = true, value_name = "EPS")]
    tol_comm: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// CBS-decomposition of e with respect to p.
    Decompose {
        #[arg(long)]
        input: PathBuf,
        /// Projection commuting with p and e; adds the restriction to qAq.
        #[arg(long)]
        q: Option<PathBuf>,
    },
    /// The commutator [p, e] and the carriers bounding it.
    Commutator {
        #[arg(long)]
        input: PathBuf,
    },
    /// e ∧ q; without --q, e ∧ p⊥ (closed form when p is an atom).
    Infimum {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        q: Option<PathBuf>,
    },
    /// Spectral thresholds and cut projections of e.
    Spectral {
        #[arg(long)]
        input: PathBuf,
    },
    /// Randomized identity checks, or a replay of one recorded instance.
    Verify {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        /// Inclusive range of dimensions, `A..B`.
        #[arg(long, default_value = "2..5")]
        dims: String,
        /// Check name, or a group such as `cbs`.
        #[arg(long)]
        check: Option<String>,
        /// Replay a failure record or instance file instead of sampling.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Also write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// The worked example in ℝ³, compared against stored values.
    ExampleR3 {
        /// Stored values to compare against instead of the built-in ones.
        #[arg(long)]
        golden: Option<PathBuf>,
    },
}

fn run(cli: &Cli) -> Result<Rendered, CliError> {
    let flags = TolFlags {
        rank: cli.tol_rank,
        comm: cli.tol_comm,
    };
    match &cli.command {
        Command::Decompose { input, q } => commands::decompose(input, q.as_deref(), flags),
        Command::Commutator { input } => commands::commutator(input, flags),
        Command::Infimum { input, q } => commands::infimum(input, q.as_deref(), flags),
        Command::Spectral { input } => commands::spectral(input, flags),
        Command::Verify {
            seed,
            trials,
            dims,
            check,
            input,
            report,
        } => commands::verify(
            VerifyArgs {
                seed: *seed,
                trials: *trials,
                dims,
                check: check.as_deref(),
                input: input.as_deref(),
                report: report.as_deref(),
            },
            flags,
        ),
        Command::ExampleR3 { golden } => commands::example_r3(golden.as_deref(), flags),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(rendered) => {
            let body = match cli.output {
                Format::Json => &rendered.json,
                Format::Text => &rendered.text,
            };
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(body.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(2);
            }
            ExitCode::from(u8::from(rendered.failed))
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
