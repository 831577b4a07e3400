use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use fpec_cli::{
    emit, run, ChannelConfig, CliError, Experiment, Format,
};
use fpec_core::{Method, StochasticPauliChannel};

#[derive(Parser)]
#[command(
    name = "fpec",
    about = "Quasi-probability error cancellation benchmarks on a trajectory simulator",
    version
)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct OutputArgs {
    /// Output file (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,

    /// Output format for tabular results.
    #[arg(long, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct ChannelArgs {
    /// Channel description file (JSON).
    #[arg(long, conflicts_with = "depolarizing")]
    channel: Option<PathBuf>,

    /// Uniform depolarizing channel with this total error probability.
    #[arg(long)]
    depolarizing: Option<f64>,

    /// Qubit count for --depolarizing.
    #[arg(long, default_value_t = 2)]
    arity: usize,
}

impl ChannelArgs {
    fn resolve(&self) -> Result<StochasticPauliChannel, CliError> {
        match (&self.channel, self.depolarizing) {
            (Some(path), None) => {
                let config = ChannelConfig::File { path: path.clone() };
                config.resolve(std::path::Path::new("."))
            }
            (None, Some(eps)) => {
                StochasticPauliChannel::depolarizing(self.arity, eps).map_err(CliError::Run)
            }
            _ => Err(CliError::Config(
                "provide exactly one of --channel or --depolarizing".into(),
            )),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Emit the coefficient profile (k, |gamma_k|, log10 |gamma_k|).
    Gamma {
        /// Number of noise sites l.
        #[arg(long)]
        sites: usize,

        /// Identity-part excess of the inverse channel.
        #[arg(long, requires = "eps2")]
        eps1: Option<f64>,

        /// Generator weight of the inverse channel.
        #[arg(long, requires = "eps1")]
        eps2: Option<f64>,

        #[command(flatten)]
        channel: ChannelArgs,

        /// Output CSV path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Print the quasi-probability inverse of a channel as JSON.
    Invert {
        #[command(flatten)]
        channel: ChannelArgs,

        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Estimate a single sweep point with one method.
    Estimate {
        #[arg(long)]
        config: PathBuf,

        /// Method: raw, pec, zne or fpec.
        #[arg(long)]
        method: Method,

        /// Trotter steps (defaults to the sweep start).
        #[arg(long)]
        steps: Option<usize>,

        /// Override the config seed.
        #[arg(long)]
        seed: Option<u64>,

        #[arg(long)]
        out: Option<PathBuf>,
    },

    /// Sweep all configured methods over the step range.
    Sweep {
        #[arg(long)]
        config: PathBuf,

        #[arg(long)]
        seed: Option<u64>,

        #[command(flatten)]
        output: OutputArgs,
    },

    /// Mischaracterization robustness study: the inverse uses the assumed
    /// channel while trajectories use the true one.
    Mischar {
        #[arg(long)]
        config: PathBuf,

        #[arg(long)]
        seed: Option<u64>,

        #[command(flatten)]
        output: OutputArgs,
    },
}

fn load_experiment(path: &PathBuf, seed: Option<u64>) -> Result<Experiment, CliError> {
    let mut experiment = Experiment::load(path)?;
    if let Some(seed) = seed {
        experiment.seed = seed;
    }
    Ok(experiment)
}

fn sweep_output(
    result: &run::SweepResult,
    output: &OutputArgs,
    config_out: Option<PathBuf>,
) -> Result<(), CliError> {
    let rendered = emit::render_sweep(result, output.format);
    let target = output.out.clone().or(config_out);
    emit::write_output(&rendered, target.as_deref())?;
    if let Some(reason) = &result.incomplete {
        return Err(CliError::Run(fpec_core::Error::InvalidParameter(format!(
            "sweep aborted: {reason} (partial results written)"
        ))));
    }
    Ok(())
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Gamma {
            sites,
            eps1,
            eps2,
            channel,
            out,
        } => {
            let (eps1, eps2) = match (eps1, eps2) {
                (Some(e1), Some(e2)) => (e1, e2),
                (None, None) => {
                    let quasi = channel.resolve()?.invert().map_err(CliError::Run)?;
                    (quasi.eps1, quasi.eps2)
                }
                _ => unreachable!("clap enforces the pair"),
            };
            let rows = run::gamma_profile(sites, eps1, eps2)?;
            emit::write_output(&emit::gamma_to_csv(&rows), out.as_deref())
        }
        Command::Invert { channel, out } => {
            let quasi = channel.resolve()?.invert().map_err(CliError::Run)?;
            emit::write_output(&emit::to_pretty_json(&quasi), out.as_deref())
        }
        Command::Estimate {
            config,
            method,
            steps,
            seed,
            out,
        } => {
            let experiment = load_experiment(&config, seed)?;
            let steps = steps.unwrap_or(experiment.sweep.start);
            let output = run::estimate_point(&experiment, steps, method)?;
            emit::write_output(&emit::to_pretty_json(&output), out.as_deref())
        }
        Command::Sweep {
            config,
            seed,
            output,
        } => {
            let experiment = load_experiment(&config, seed)?;
            let result = run::run_sweep(&experiment)?;
            sweep_output(&result, &output, experiment.out.clone())
        }
        Command::Mischar {
            config,
            seed,
            output,
        } => {
            let experiment = load_experiment(&config, seed)?;
            let result = run::mischaracterization_study(&experiment)?;
            sweep_output(&result, &output, experiment.out.clone())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let pool = match cli.threads {
        Some(threads) => match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
            Ok(pool) => Some(pool),
            Err(e) => {
                eprintln!("error: cannot build thread pool: {e}");
                return ExitCode::from(2);
            }
        },
        None => None,
    };
    let run = || execute(cli.command);
    let outcome = match pool {
        Some(pool) => pool.install(run),
        None => run(),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
