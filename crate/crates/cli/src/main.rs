use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use iptv_amc::AlphaPolicy;
use iptv_amc_cli::commands::{self, read_alpha_points, FIT_HEADER, MEASURE_HEADER, PLAN_HEADER};
use iptv_amc_cli::output::{write_csv, write_results};
use iptv_amc_cli::{CliError, CliResult, EngineChoice, ScenarioDocument, SimFlags};

#[derive(Parser)]
#[command(
    name = "iptv-amc",
    version,
    about = "Blocking, dropping and bandwidth of unicast IPTV in an AMC cell"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytical blocking, bandwidth and dropping for each sweep value.
    Analyze {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<String>,
        /// Fill the wall_seconds column (makes output nondeterministic).
        #[arg(long)]
        timing: bool,
    },
    /// Discrete-event simulation, with analysis alongside when possible.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        timing: bool,
    },
    /// Smallest K meeting a blocking target.
    Plan {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long, default_value_t = 0.01)]
        target_pb: f64,
        #[arg(long, default_value_t = 1)]
        k_min: u32,
        #[arg(long, default_value_t = 200)]
        k_max: u32,
        /// Simulate the chosen K as a check.
        #[arg(long)]
        confirm_sim: bool,
        #[command(flatten)]
        sim: SimArgs,
    },
    /// Least-squares parabola through (mu_w, alpha) points.
    FitAlpha {
        /// CSV with a header and columns mu_w, alpha.
        #[arg(long)]
        points: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Zone transition rates of the random walk.
    MeasureMobility {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sim: SimArgs,
        /// Write the scenario with the measured rates to this path.
        #[arg(long)]
        rates_doc: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    scenario: PathBuf,
    /// Output path; standard output when omitted or "-".
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimArgs {
    #[arg(long, default_value_t = commands::DEFAULT_SEED)]
    seed: u64,
    #[arg(long, default_value_t = commands::DEFAULT_REPLICATIONS)]
    reps: u32,
    #[arg(long, default_value_t = commands::DEFAULT_HORIZON)]
    horizon_min: f64,
    /// Defaults to ten mean watch times.
    #[arg(long)]
    warmup_min: Option<f64>,
    #[arg(long, value_enum)]
    engine: Option<Engine>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Engine {
    Markov,
    RandomWalk,
}

impl SimArgs {
    fn flags(&self) -> SimFlags {
        SimFlags {
            horizon: self.horizon_min,
            warmup: self.warmup_min,
            replications: self.reps,
            seed: self.seed,
            engine: self.engine.map(|e| match e {
                Engine::Markov => EngineChoice::Markov,
                Engine::RandomWalk => EngineChoice::RandomWalk,
            }),
        }
    }
}

fn parse_alpha(arg: Option<&str>) -> CliResult<Option<AlphaPolicy>> {
    match arg {
        None => Ok(None),
        Some("fitted") => Ok(Some(AlphaPolicy::Fitted)),
        Some(v) => match v.parse::<f64>() {
            Ok(a) if (0.0..=1.0).contains(&a) => Ok(Some(AlphaPolicy::Fixed(a))),
            _ => Err(CliError::Validation(format!(
                "--alpha: expected \"fitted\" or a number in [0, 1], got {v:?}"
            ))),
        },
    }
}

fn open_out(path: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) if p.as_os_str() == "-" => Ok(Box::new(io::stdout().lock())),
        Some(p) => File::create(p)
            .map(|f| Box::new(io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| CliError::Runtime(format!("{}: {e}", p.display()))),
    }
}

fn warn(messages: &[String]) {
    for m in messages {
        eprintln!("warning: {m}");
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze { common, alpha, timing } => {
            let doc = ScenarioDocument::load(&common.scenario)?;
            let rows = commands::cmd_analyze(&doc, parse_alpha(alpha.as_deref())?, timing)?;
            write_results(open_out(common.out.as_deref())?, &rows)
        }
        Command::Simulate {
            common,
            sim,
            alpha,
            timing,
        } => {
            let doc = ScenarioDocument::load(&common.scenario)?;
            let outcome = commands::cmd_simulate(&doc, &sim.flags(), parse_alpha(alpha.as_deref())?, timing)?;
            warn(&outcome.warnings);
            write_results(open_out(common.out.as_deref())?, &outcome.rows)
        }
        Command::Plan {
            common,
            alpha,
            target_pb,
            k_min,
            k_max,
            confirm_sim,
            sim,
        } => {
            let doc = ScenarioDocument::load(&common.scenario)?;
            let flags = sim.flags();
            let plans = commands::cmd_plan(
                &doc,
                parse_alpha(alpha.as_deref())?,
                target_pb,
                k_min,
                k_max,
                confirm_sim.then_some(&flags),
            )?;
            for p in &plans {
                eprintln!("lambda {}: minimal K = {}", p.lambda, p.minimal_k);
                if let Some(r) = &p.confirmation {
                    eprintln!(
                        "  simulated P_b at K = {}: {} +/- {}",
                        p.minimal_k,
                        r.blocking_rate.mean,
                        r.blocking_rate.half_width_or_zero()
                    );
                }
            }
            write_csv(
                open_out(common.out.as_deref())?,
                &PLAN_HEADER,
                plans.iter().flat_map(|p| p.rows()),
            )
        }
        Command::FitAlpha { points, out } => {
            let text = std::fs::read_to_string(&points)
                .map_err(|e| CliError::Validation(format!("{}: {e}", points.display())))?;
            let outcome = commands::cmd_fit_alpha(&read_alpha_points(&text)?)?;
            let f = outcome.fit;
            eprintln!("alpha = {} x^2 + {} x + {}", f.a, f.b, f.c);
            write_csv(open_out(out.as_deref())?, &FIT_HEADER, outcome.rows())
        }
        Command::MeasureMobility { common, sim, rates_doc } => {
            let doc = ScenarioDocument::load(&common.scenario)?;
            let outcome = commands::cmd_measure_mobility(&doc, &sim.flags())?;
            warn(&outcome.warnings);
            eprintln!("mean zone sojourn w = {} min", outcome.measurement.mean_sojourn);
            if let Some(path) = rates_doc {
                std::fs::write(&path, outcome.document.to_toml())
                    .map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))?;
            }
            write_csv(open_out(common.out.as_deref())?, &MEASURE_HEADER, outcome.rows())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
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
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
