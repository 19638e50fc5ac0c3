mod commands;
mod settings;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use settings::{parse_config, Settings};

/// Query-limited stochastic matching and k-set packing experiments.
///
/// Settings come from flags, then a key=value config file, then defaults.
/// STOCHMATCH_SEED sets the default seed.
#[derive(Parser, Debug)]
#[command(name = "stochmatch", version)]
struct Cli {
    /// key=value config file; keys are the long flag names.
    #[arg(long, global = true)]
    config: Option<String>,
    /// Worker threads for trials.
    #[arg(long, global = true)]
    threads: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    seed: Option<String>,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args, Debug, Default)]
struct Source {
    /// Graph family or `kidney` (cycle sets from a generated pool).
    #[arg(long)]
    family: Option<String>,
    /// Graph file (`n m`, edge lines, optional model block).
    #[arg(long)]
    input: Option<String>,
    /// k-set instance file (`|U| |A| k`, set lines).
    #[arg(long)]
    instance: Option<String>,
    /// uniform:P | vertex:uniform | vertex:const:C | vertex:twopoint:LO:HI:FRAC | file:PATH
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    t: Option<String>,
    #[arg(long)]
    n: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    degree: Option<String>,
    #[arg(long = "k-max")]
    k_max: Option<String>,
    /// Failure rate (kidney); a comma list in sweeps.
    #[arg(long)]
    f: Option<String>,
}

#[derive(Args, Debug, Default)]
struct Eval {
    #[arg(long)]
    alg: Option<String>,
    /// Rounds; `a..b` or a comma list in sweeps.
    #[arg(long = "R")]
    rounds: Option<String>,
    /// Structure-size cap for packing local search.
    #[arg(long)]
    s: Option<String>,
    #[arg(long)]
    trials: Option<String>,
    /// auto | exact | mc
    #[arg(long)]
    omniscient: Option<String>,
    /// Longest augmenting path the adaptive algorithm follows.
    #[arg(long = "path-cap")]
    path_cap: Option<String>,
    /// Report the number of vertex parameters below this value.
    #[arg(long)]
    delta: Option<String>,
    /// Count trials with an empty omniscient packing as ratio 1.
    #[arg(long = "include-empty")]
    include_empty: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a generated instance.
    Generate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
    },
    /// Evaluate one algorithm; prints one CSV row.
    Run {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        eval: Eval,
        /// Also write the per-round record of trial 0 here.
        #[arg(long)]
        report: Option<String>,
    },
    /// Evaluate over a grid of R and p (or R and f for kidney families).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        eval: Eval,
        /// Comma list of uniform edge probabilities.
        #[arg(long)]
        p: Option<String>,
    },
    /// Run a named replication suite.
    Replicate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Option<String>,
        #[arg(long)]
        trials: Option<String>,
        /// Main size parameter of the suite (t, or pool size).
        #[arg(long)]
        size: Option<String>,
        #[arg(long = "include-empty")]
        include_empty: bool,
    },
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn runtime(msg: impl Into<String>) -> Self {
        CliError::Runtime(msg.into())
    }

    fn report(&self) -> ExitCode {
        let (kind, msg, code) = match self {
            CliError::Config(m) => ("config", m, 1),
            CliError::Runtime(m) => ("runtime", m, 2),
        };
        eprintln!("{}", serde_json::json!({ "error": kind, "message": msg, "exit_code": code }));
        ExitCode::from(code)
    }
}

fn flag_on(b: bool) -> Option<String> {
    b.then(|| "true".to_string())
}

fn common_flags(c: Common) -> Vec<(&'static str, Option<String>)> {
    vec![("seed", c.seed), ("out", c.out)]
}

fn source_flags(s: Source) -> Vec<(&'static str, Option<String>)> {
    vec![
        ("family", s.family),
        ("input", s.input),
        ("instance", s.instance),
        ("model", s.model),
        ("t", s.t),
        ("n", s.n),
        ("d", s.d),
        ("beta", s.beta),
        ("degree", s.degree),
        ("k_max", s.k_max),
        ("f", s.f),
    ]
}

fn eval_flags(e: Eval) -> Vec<(&'static str, Option<String>)> {
    vec![
        ("alg", e.alg),
        ("R", e.rounds),
        ("s", e.s),
        ("trials", e.trials),
        ("omniscient", e.omniscient),
        ("path-cap", e.path_cap),
        ("delta", e.delta),
        ("include-empty", flag_on(e.include_empty)),
    ]
}

fn run(cli: Cli) -> Result<(), CliError> {
    let config = match &cli.config {
        Some(path) => Some(parse_config(
            &std::fs::read_to_string(path).map_err(|e| CliError::config(format!("cannot read config '{path}': {e}")))?,
        )?),
        None => None,
    };
    let mut flags = vec![("threads", cli.threads)];
    let handler: fn(&Settings) -> Result<(), CliError> = match cli.command {
        Command::Generate { common, source } => {
            flags.extend(common_flags(common));
            flags.extend(source_flags(source));
            commands::cmd_generate
        }
        Command::Run {
            common,
            source,
            eval,
            report,
        } => {
            flags.extend(common_flags(common));
            flags.extend(source_flags(source));
            flags.extend(eval_flags(eval));
            flags.push(("report", report));
            commands::cmd_run
        }
        Command::Sweep { common, source, eval, p } => {
            flags.extend(common_flags(common));
            flags.extend(source_flags(source));
            flags.extend(eval_flags(eval));
            flags.push(("p", p));
            commands::cmd_sweep
        }
        Command::Replicate {
            common,
            suite,
            trials,
            size,
            include_empty,
        } => {
            flags.extend(common_flags(common));
            flags.extend([
                ("suite", suite),
                ("trials", trials),
                ("size", size),
                ("include-empty", flag_on(include_empty)),
            ]);
            commands::cmd_replicate
        }
    };
    let settings = Settings::layered(&[], config.as_ref(), flags)?;
    commands::apply_threads(&settings)?;
    handler(&settings)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            return CliError::config(e.to_string().trim().to_string()).report();
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => e.report(),
    }
}
