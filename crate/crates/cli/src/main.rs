mod commands;
mod output;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use vqc_spectrum::ranker::{Normalization, DEFAULT_SUBSET_SIZE};
use vqc_spectrum::tree::DEFAULT_LEAF_CAP;

use commands::Failure;
use output::{Format, OutputOptions};

#[derive(Parser, Debug)]
#[command(name = "vqc-spectrum", version, about = "Exact Fourier spectra and data-driven ranking of variational circuits")]
struct Cli {
    /// Worker threads for parallel stages.
    #[arg(long, global = true, env = "VQC_SPECTRUM_WORKERS")]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact spectrum and coefficient polynomials of circuit files.
    Spectrum(SpectrumArgs),
    /// Rank candidate circuits against a dataset.
    Rank(RankArgs),
    /// Compare the Fourier reconstruction with the statevector simulator.
    Verify(VerifyArgs),
    /// Damped inverse NFFT of a dataset.
    DataSpectrum(DataSpectrumArgs),
    /// Expectation value at one point.
    Simulate(SimulateArgs),
    /// Fit θ with Adam and parameter-shift gradients.
    Train(TrainArgs),
    /// Write a Friedman #1 regression dataset.
    Friedman(FriedmanArgs),
    /// Re-run the command recorded in an artifact.
    Replay(ReplayArgs),
}

#[derive(Args, Debug)]
struct Out {
    /// Directory for artifact files.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Also write SVG plots (needs --out).
    #[arg(long)]
    plot: bool,
}

impl Out {
    fn options(&self) -> OutputOptions {
        OutputOptions {
            out: self.out.clone(),
            format: self.format,
            plot: self.plot,
        }
    }
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[arg(long = "circuit", required = true)]
    circuits: Vec<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
    leaf_cap: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Record wall-clock time (the artifact is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct DataArgs {
    /// Delimited text: feature columns, then the label.
    #[arg(long)]
    data: PathBuf,
    /// First data row is a header.
    #[arg(long)]
    header: bool,
}

#[derive(Args, Debug)]
struct InversionArgs {
    /// Lattice sizes per feature, e.g. `8,6`.
    #[arg(long, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long, default_value_t = vqc_spectrum::data_spectrum::DEFAULT_DAMPING_IN)]
    damping_in: f64,
    #[arg(long, default_value_t = vqc_spectrum::data_spectrum::DEFAULT_DAMPING_OUT)]
    damping_out: f64,
    /// Relative Tikhonov floor.
    #[arg(long, default_value_t = vqc_spectrum::data_spectrum::DEFAULT_TIKHONOV)]
    tikhonov: f64,
}

#[derive(Args, Debug)]
struct RankArgs {
    #[arg(long = "circuit", required = true)]
    circuits: Vec<PathBuf>,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    inversion: InversionArgs,
    #[arg(long, default_value_t = DEFAULT_SUBSET_SIZE)]
    subset_size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `max` or `min-max`.
    #[arg(long, default_value = "max")]
    normalization: Normalization,
    #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
    leaf_cap: usize,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[arg(long, default_value_t = 20)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-9)]
    tolerance: f64,
    #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
    leaf_cap: usize,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct DataSpectrumArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Circuits whose spectra set the damping support (and the grid if no --grid).
    #[arg(long = "circuit")]
    circuits: Vec<PathBuf>,
    #[command(flatten)]
    inversion: InversionArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_LEAF_CAP)]
    leaf_cap: usize,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    circuit: PathBuf,
    /// Feature angles.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x: Vec<f64>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Vec<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    circuit: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    test_data: Option<PathBuf>,
    #[arg(long, default_value_t = 0.005)]
    lr: f64,
    #[arg(long, default_value_t = 128)]
    batch: usize,
    #[arg(long, default_value_t = 100)]
    epochs: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Fit on zero-mean, unit-variance labels.
    #[arg(long)]
    standardize: bool,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct FriedmanArgs {
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Standard deviation of additive label noise.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    #[command(flatten)]
    out: Out,
}

#[derive(Args, Debug)]
struct ReplayArgs {
    artifact: PathBuf,
    /// Fail unless the re-run reproduces the artifact exactly.
    #[arg(long)]
    check: bool,
    #[command(flatten)]
    out: Out,
}

fn dispatch(cmd: Command) -> Result<(), Failure> {
    use commands::*;
    match cmd {
        Command::Spectrum(a) => {
            let cfg = SpectrumConfig {
                circuits: a.circuits,
                leaf_cap: a.leaf_cap,
                seed: a.seed,
                timing: a.timing,
            };
            emit(&run_spectrum(&cfg)?, &a.out.options())
        }
        Command::Rank(a) => {
            let cfg = RankConfig {
                circuits: a.circuits,
                data: a.data.data,
                header: a.data.header,
                grid: a.inversion.grid,
                damping_in: a.inversion.damping_in,
                damping_out: a.inversion.damping_out,
                tikhonov: a.inversion.tikhonov,
                subset_size: a.subset_size,
                seed: a.seed,
                normalization: a.normalization,
                leaf_cap: a.leaf_cap,
            };
            emit(&run_rank(&cfg)?, &a.out.options())
        }
        Command::Verify(a) => {
            let cfg = VerifyConfig {
                circuit: a.circuit,
                trials: a.trials,
                seed: a.seed,
                tolerance: a.tolerance,
                leaf_cap: a.leaf_cap,
            };
            let run = run_verify(&cfg)?;
            emit(&run, &a.out.options())?;
            run.verdict()
        }
        Command::DataSpectrum(a) => {
            let cfg = DataSpectrumConfig {
                data: a.data.data,
                header: a.data.header,
                circuits: a.circuits,
                grid: a.inversion.grid,
                damping_in: a.inversion.damping_in,
                damping_out: a.inversion.damping_out,
                tikhonov: a.inversion.tikhonov,
                seed: a.seed,
                leaf_cap: a.leaf_cap,
            };
            emit(&run_data_spectrum(&cfg)?, &a.out.options())
        }
        Command::Simulate(a) => {
            let cfg = SimulateConfig {
                circuit: a.circuit,
                x: a.x,
                theta: a.theta,
                seed: a.seed,
            };
            emit(&run_simulate(&cfg)?, &a.out.options())
        }
        Command::Train(a) => {
            let cfg = TrainRunConfig {
                circuit: a.circuit,
                data: a.data.data,
                header: a.data.header,
                test_data: a.test_data,
                lr: a.lr,
                batch: a.batch,
                epochs: a.epochs,
                seed: a.seed,
                standardize: a.standardize,
            };
            emit(&run_train(&cfg)?, &a.out.options())
        }
        Command::Friedman(a) => {
            let cfg = FriedmanConfig {
                samples: a.samples,
                seed: a.seed,
                noise: a.noise,
            };
            emit(&run_friedman(&cfg)?, &a.out.options())
        }
        Command::Replay(a) => replay(&a.artifact, a.check, &a.out.options()),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: worker count must be positive");
            return ExitCode::from(2);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
