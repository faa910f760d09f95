use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use genent::bounds::{evaluate_all, EvalOptions, Family};
use genent::entropy::generalized_entropy;
use genent::experiment::{figure1_grid, run_experiment, write_figure1, ExperimentConfig, Knobs};
use genent::loss::{LossKind, LossSpec};
use genent::transport::Metric;
use genent::{Dist, Error};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser)]
#[command(name = "genent", version, about = "Generalized entropy, continuity bounds and excess-risk experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generalized entropy of a distribution under a loss.
    Entropy {
        /// Distribution JSON: {"outcomes": [...], "probs": [...]}.
        dist: PathBuf,
        /// Canonical loss name (log, quadratic, zero-one, absolute) or a loss JSON file.
        #[arg(long, default_value = "log")]
        loss: String,
    },
    /// Entropy-difference bounds for a pair of distributions, as JSON lines.
    Bounds {
        p: PathBuf,
        q: PathBuf,
        #[arg(long, default_value = "log")]
        loss: String,
        /// Restrict to these evaluator families; repeatable or comma separated.
        #[arg(long, value_delimiter = ',')]
        family: Vec<Family>,
        /// Metric JSON for the Wasserstein evaluator.
        #[arg(long)]
        metric: Option<PathBuf>,
    },
    /// Bernoulli comparison grid of the log-ratio TV bound against the coupling bound.
    Figure1 {
        #[arg(long, default_value_t = 99)]
        density: usize,
        /// Output CSV; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Runs a named experiment config and writes records, summary and manifest.
    Experiment {
        config: PathBuf,
        /// Defaults to the config's seed, then 0.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<usize>,
        /// Typicality level for ERM runs.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
}

enum Failure {
    Usage(String),
    Lib(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn load_loss(arg: &str) -> CliResult<LossSpec<f64>> {
    let quoted = Value::String(arg.to_string());
    if let Ok(kind) = serde_json::from_value::<LossKind>(quoted) {
        if kind != LossKind::Table {
            return Ok(LossSpec::canonical(kind)?);
        }
    }
    parse_json(Path::new(arg))
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        json!(v)
    } else if v.is_nan() {
        json!("NaN")
    } else if v > 0.0 {
        json!("inf")
    } else {
        json!("-inf")
    }
}

fn cmd_entropy(dist: &Path, loss: &str) -> CliResult<()> {
    let p: Dist = parse_json(dist)?;
    let spec = load_loss(loss)?;
    let r = generalized_entropy(&p, &spec)?;
    let out = json!({
        "value": num(r.value),
        "action": r.optimal_action.describe(&spec),
        "achieved": r.achieved,
    });
    println!("{out}");
    Ok(())
}

fn cmd_bounds(p: &Path, q: &Path, loss: &str, family: Vec<Family>, metric: Option<&Path>) -> CliResult<()> {
    let p: Dist = parse_json(p)?;
    let q: Dist = parse_json(q)?;
    let spec = load_loss(loss)?;
    let metric: Option<Metric<f64>> = metric.map(parse_json).transpose()?;
    let hp = generalized_entropy(&p, &spec)?.value;
    let hq = generalized_entropy(&q, &spec)?.value;
    let opts = EvalOptions { metric, families: family, ..EvalOptions::default() };
    let reports = evaluate_all(&p, &q, &spec, &opts)?;
    let stdout = io::stdout();
    let mut w = stdout.lock();
    let diff = if hp.is_finite() && hq.is_finite() { hp - hq } else { f64::NAN };
    writeln!(w, "{}", json!({"h_p": num(hp), "h_q": num(hq), "difference": num(diff)}))?;
    for r in &reports {
        writeln!(w, "{}", serde_json::to_string(r).map_err(|e| Failure::Lib(e.into()))?)?;
    }
    Ok(())
}

fn cmd_figure1(density: usize, out: Option<&Path>) -> CliResult<()> {
    if density < 9 {
        return Err(Failure::Usage(format!("--density must be at least 9, got {density}")));
    }
    let rows = figure1_grid(density)?;
    match out {
        Some(path) => write_figure1(&rows, fs::File::create(path)?)?,
        None => write_figure1(&rows, io::stdout().lock())?,
    }
    Ok(())
}

fn cmd_experiment(config: &Path, flags: Knobs, out: &Path) -> CliResult<()> {
    let text = read(config)?;
    let parsed = ExperimentConfig::from_json(&text).map_err(|e| match e {
        Error::InvalidArgument(m) | Error::Serde(m) => Failure::Usage(format!("{}: {m}", config.display())),
        other => Failure::Lib(other),
    })?;
    let knobs = parsed.knobs.overridden(&flags);
    let cfg = ExperimentConfig { knobs: knobs.clone(), kind: parsed.kind };
    let output = run_experiment(&cfg)?;
    fs::create_dir_all(out)?;
    let records = format!("{}_records.csv", output.experiment);
    let summary = format!("{}_summary.csv", output.experiment);
    output.write_records(fs::File::create(out.join(&records))?)?;
    output.summary.write(fs::File::create(out.join(&summary))?)?;
    for w in &output.warnings {
        eprintln!("warning: {w}");
    }
    let manifest = json!({
        "experiment": output.experiment,
        "config": config.file_name().map(|f| f.to_string_lossy().into_owned()),
        "config_sha256": hex::encode(Sha256::digest(text.as_bytes())),
        "seed": knobs.seed(),
        "trials": knobs.trials(),
        "epsilon": knobs.epsilon(),
        "genent_version": genent::VERSION,
        "cli_version": env!("CARGO_PKG_VERSION"),
        "files": [records, summary],
        "warnings": output.warnings,
    });
    let body = serde_json::to_string_pretty(&manifest).map_err(|e| Failure::Lib(e.into()))?;
    fs::write(out.join("manifest.json"), body + "\n")?;
    println!("{}", out.join(&summary).display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match cli.cmd {
        Cmd::Entropy { dist, loss } => cmd_entropy(&dist, &loss),
        Cmd::Bounds { p, q, loss, family, metric } => cmd_bounds(&p, &q, &loss, family, metric.as_deref()),
        Cmd::Figure1 { density, out } => cmd_figure1(density, out.as_deref()),
        Cmd::Experiment { config, seed, trials, epsilon, out } => {
            cmd_experiment(&config, Knobs { seed, trials, epsilon }, &out)
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Lib(Error::NonConvergence(m))) => {
            eprintln!("error: numeric non-convergence: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
