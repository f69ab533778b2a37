use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
mod error;
mod output;
mod params;

use commands::Report;
use error::CliError;
use params::{defaults, Params};

/// Default directory for output files when `--out` is not given.
const OUT_DIR_ENV: &str = "DIRDP_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "dirdp",
    version,
    about = "Privacy accounting and benchmarks for Dirichlet posterior sampling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// RDP guarantee of one draw from Dir(r·x + α).
    Guarantee {
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        d2sq: Option<String>,
        #[arg(long)]
        dinf: Option<String>,
        #[arg(long)]
        alpha_min: Option<String>,
        /// Full prior vector, comma separated.
        #[arg(long)]
        alpha: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Solve for α_m (exact or closed form) or r given a target (λ, ε).
    Solve {
        #[arg(long, value_parser = ["alpha-min", "alpha-min-closed", "r"])]
        unknown: Option<String>,
        #[arg(long)]
        lambda: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        d2sq: Option<String>,
        #[arg(long)]
        dinf: Option<String>,
        #[arg(long)]
        r: Option<String>,
        /// Fixed prior floor when solving for r.
        #[arg(long)]
        alpha_min: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Convert the RDP curve to (ε, δ)-DP.
    Convert {
        /// One or more prior floors, comma separated.
        #[arg(long)]
        alpha_min: Option<String>,
        #[arg(long)]
        r: Option<String>,
        #[arg(long)]
        d2sq: Option<String>,
        #[arg(long)]
        dinf: Option<String>,
        #[arg(long)]
        epsilons: Option<String>,
        /// Evenly spaced ε grid `lo:hi:count`, replacing --epsilons.
        #[arg(long)]
        sweep: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// ℓ²-loss of the Dirichlet, Gaussian and Laplace histogram releases.
    HistBench {
        #[arg(long)]
        dims: Option<String>,
        #[arg(long)]
        epsilons: Option<String>,
        #[arg(long)]
        ns: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        /// Exit with status 3 unless the Dirichlet and Gaussian curves cross
        /// once in each listed cell, given as `d:epsilon` pairs.
        #[arg(long)]
        assert_crossover: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// Private posterior sampling RL on RiverSwim.
    Psrl {
        #[arg(long)]
        epsilons: Option<String>,
        #[arg(long)]
        episodes: Option<String>,
        #[arg(long)]
        repetitions: Option<String>,
        /// Comma separated: non-private, diffuse, concentrated.
        #[arg(long)]
        variants: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        common: Common,
    },
    /// KL cost of concentrated sampling against its bound.
    KlUtility {
        #[arg(long)]
        etas: Option<String>,
        #[arg(long)]
        epsilons: Option<String>,
        #[arg(long)]
        ns: Option<String>,
        #[arg(long)]
        draws: Option<String>,
        #[arg(long)]
        seed: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// `key = value` file merged under the flags. An earlier output file
    /// works too and reproduces that run.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override any parameter, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Output file. Defaults to `$DIRDP_OUT_DIR/<command>.<ext>` when that
    /// variable is set, otherwise stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
    Json,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Text => "txt",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

type Runner = fn(&Params) -> Result<Report, CliError>;

fn resolve(cmd: Command) -> Result<(Params, Common, Runner, bool), CliError> {
    let (name, defs, flags, common, run, has_text): (_, _, Vec<(&str, Option<String>)>, _, Runner, _) =
        match cmd {
            Command::Guarantee { lambda, d2sq, dinf, alpha_min, alpha, r, common } => (
                "guarantee",
                commands::guarantee_defaults(),
                vec![
                    ("lambda", lambda),
                    ("d2sq", d2sq),
                    ("dinf", dinf),
                    ("alpha_min", alpha_min),
                    ("alpha", alpha),
                    ("r", r),
                ],
                common,
                commands::guarantee,
                true,
            ),
            Command::Solve { unknown, lambda, epsilon, d2sq, dinf, r, alpha_min, common } => (
                "solve",
                commands::solve_defaults(),
                vec![
                    ("unknown", unknown),
                    ("lambda", lambda),
                    ("epsilon", epsilon),
                    ("d2sq", d2sq),
                    ("dinf", dinf),
                    ("r", r),
                    ("alpha_min", alpha_min),
                ],
                common,
                commands::solve,
                true,
            ),
            Command::Convert { alpha_min, r, d2sq, dinf, epsilons, sweep, common } => (
                "convert",
                commands::convert_defaults(),
                vec![
                    ("alpha_min", alpha_min),
                    ("r", r),
                    ("d2sq", d2sq),
                    ("dinf", dinf),
                    ("epsilons", epsilons),
                    ("sweep", sweep),
                ],
                common,
                commands::convert,
                true,
            ),
            Command::HistBench { dims, epsilons, ns, trials, assert_crossover, seed, common } => (
                "hist-bench",
                commands::hist_bench_defaults(),
                vec![
                    ("dims", dims),
                    ("epsilons", epsilons),
                    ("ns", ns),
                    ("trials", trials),
                    ("assert_crossover", assert_crossover),
                    ("seed", seed),
                ],
                common,
                commands::hist_bench,
                false,
            ),
            Command::Psrl { epsilons, episodes, repetitions, variants, seed, common } => (
                "psrl",
                commands::psrl_defaults(),
                vec![
                    ("epsilons", epsilons),
                    ("episodes", episodes),
                    ("repetitions", repetitions),
                    ("variants", variants),
                    ("seed", seed),
                ],
                common,
                commands::psrl,
                false,
            ),
            Command::KlUtility { etas, epsilons, ns, draws, seed, common } => (
                "kl-utility",
                commands::kl_utility_defaults(),
                vec![("etas", etas), ("epsilons", epsilons), ("ns", ns), ("draws", draws), ("seed", seed)],
                common,
                commands::kl_utility,
                false,
            ),
        };
    let params = Params::resolve(name, defaults(&defs), common.config.as_deref(), &common.set, flags)?;
    Ok((params, common, run, has_text))
}

fn destination(common: &Common, command: &str, format: Format) -> Option<PathBuf> {
    if let Some(p) = &common.out {
        return Some(p.clone());
    }
    let dir = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty())?;
    Some(Path::new(&dir).join(format!("{command}.{}", format.ext())))
}

fn run(cmd: Command) -> Result<(), CliError> {
    let (params, common, runner, has_text) = resolve(cmd)?;
    let format = common.format.unwrap_or(if has_text { Format::Text } else { Format::Csv });
    if format == Format::Text && !has_text {
        return Err(CliError::Usage(format!("`{}` has no text output; use csv or json", params.command())));
    }
    let report = runner(&params)?;
    let meta = params.metadata();
    let body = match format {
        Format::Text => report.text.clone().unwrap_or_default(),
        Format::Csv => output::to_csv(&meta, &report.table),
        Format::Json => output::to_json(&meta, &report.table, report.json_extra.clone()),
    };
    match destination(&common, params.command(), format) {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(&path, body)?;
            eprintln!("wrote {}", path.display());
        }
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    eprint!("{}", report.notes);
    match report.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirdp: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
