use std::io::Read;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use facmech::axioms::SearchBudget;
use facmech::geometry::Metric;
use facmech::harness::bench::{run_bench, BenchConfig, Parity};
use facmech::harness::instance::{Instance, InstanceFile, Params};
use facmech::harness::{self, OutputFormat, EXIT_OK, EXIT_VIOLATION};
use facmech::welfare::WelfareObjective;
use facmech::{Error, Result};

#[derive(Parser)]
#[command(
    name = "facmech",
    version,
    about = "Facility-location mechanism workbench"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a mechanism on an instance file.
    Run {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Search for anonymity, Pareto and strategy-proofness violations.
    Check {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value_t = 0.5)]
        grid_resolution: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random candidates added to the grid.
        #[arg(long, default_value_t = 0)]
        restarts: usize,
        /// Box padding as a multiple of the profile's bounding-box diagonal.
        #[arg(long, default_value_t = 2.0)]
        pad: f64,
        /// Exit with status 2 when any violation is found.
        #[arg(long)]
        strict: bool,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Exact optimal welfare for a small instance.
    Oracle {
        #[command(flatten)]
        inst: InstanceArgs,
        #[arg(long, default_value = "total")]
        objective: WelfareObjective,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Run a named scenario, or `all`.
    Scenario {
        name: String,
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Randomized approximation-ratio experiment.
    Bench {
        #[arg(long)]
        mechanism: String,
        #[arg(long)]
        params: Option<String>,
        #[arg(long, default_value = "total")]
        objective: WelfareObjective,
        #[arg(long, default_value = "euclidean")]
        metric: Metric,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 3)]
        n_min: usize,
        #[arg(long, default_value_t = 9)]
        n_max: usize,
        #[arg(long)]
        parity: Option<Parity>,
        #[arg(long, default_value_t = 100.0)]
        box_side: f64,
        #[arg(long, default_value_t = 1)]
        facilities: usize,
        #[arg(long, default_value_t = 10)]
        bins: usize,
        #[arg(long, default_value = "table")]
        format: OutputFormat,
    },
    /// List registered scenarios.
    ListScenarios {
        #[arg(long, default_value = "text")]
        format: OutputFormat,
    },
    /// Replay a certificate printed by `check` (file path, or `-` for stdin).
    Verify { certificate: PathBuf },
}

#[derive(Args)]
struct InstanceArgs {
    #[arg(long)]
    instance: PathBuf,
    /// Overrides the file's mechanism kind.
    #[arg(long)]
    mechanism: Option<String>,
    /// Percentile parameters: `0.5,0.5;0,0` (rows by `;`).
    #[arg(long)]
    params: Option<String>,
    /// Overrides the file's metric.
    #[arg(long)]
    metric: Option<Metric>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        let mut file = InstanceFile::read(&self.instance)?;
        if let Some(kind) = &self.mechanism {
            file.mechanism = Some(harness::mechanism_section(kind)?);
        }
        if let Some(p) = &self.params {
            let section = file
                .mechanism
                .as_mut()
                .ok_or_else(|| Error::InvalidInput("--params needs a mechanism".into()))?;
            section.params = Some(Params::parse(p)?);
        }
        if let Some(m) = self.metric {
            file.metric = m.as_str().to_string();
        }
        file.instance()
    }
}

fn run(cmd: Command) -> Result<(String, i32)> {
    match cmd {
        Command::Run { inst, format } => Ok((harness::run_report(&inst.load()?, format)?, EXIT_OK)),
        Command::Check {
            inst,
            grid_resolution,
            seed,
            restarts,
            pad,
            strict,
            format,
        } => {
            let budget = SearchBudget {
                grid_resolution,
                random_restarts: restarts,
                seed,
                bounding_box_pad: pad,
            };
            let (out, found) = harness::check_report(&inst.load()?, &budget, format)?;
            Ok((
                out,
                if strict && found {
                    EXIT_VIOLATION
                } else {
                    EXIT_OK
                },
            ))
        }
        Command::Oracle {
            inst,
            objective,
            format,
        } => Ok((
            harness::oracle_report(&inst.load()?, objective, format)?,
            EXIT_OK,
        )),
        Command::Scenario { name, format } => {
            let (out, passed) = harness::scenario_report(&name, format)?;
            Ok((out, if passed { EXIT_OK } else { EXIT_VIOLATION }))
        }
        Command::Bench {
            mechanism,
            params,
            objective,
            metric,
            seed,
            trials,
            n_min,
            n_max,
            parity,
            box_side,
            facilities,
            bins,
            format,
        } => {
            let config = BenchConfig {
                trials,
                n_min,
                n_max,
                box_side,
                seed,
                objective,
                parity,
                metric,
                facilities,
                dim: 2,
                histogram_bins: bins,
            };
            let mut section = harness::mechanism_section(&mechanism)?;
            section.params = params.as_deref().map(Params::parse).transpose()?;
            let desc = section.descriptor(config.dim)?;
            let summary = run_bench(&config, &desc)?;
            Ok((harness::bench_report(&summary, format), EXIT_OK))
        }
        Command::ListScenarios { format } => Ok((harness::list_report(format), EXIT_OK)),
        Command::Verify { certificate } => {
            let text = if certificate.as_os_str() == "-" {
                let mut s = String::new();
                std::io::stdin()
                    .read_to_string(&mut s)
                    .map_err(|e| Error::InvalidInput(format!("stdin: {e}")))?;
                s
            } else {
                std::fs::read_to_string(&certificate)
                    .map_err(|e| Error::InvalidInput(format!("{}: {e}", certificate.display())))?
            };
            let (out, ok) = harness::verify_report(&text)?;
            Ok((out, if ok { EXIT_OK } else { EXIT_VIOLATION }))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok((out, code)) => {
            print!("{out}");
            ExitCode::from(code as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(harness::exit_code(&e) as u8)
        }
    }
}
