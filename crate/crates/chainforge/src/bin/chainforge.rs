use chainforge::chain::ChainJson;
use chainforge::cubical::FamilyJson;
use chainforge::error::Error;
use chainforge::harness::presets::{run_preset, CriterionOutcome, Tolerances, PRESETS};
use chainforge::harness::{run_pipeline, write_outputs, ExperimentConfig, Pipeline};
use clap::{Args, Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_ASSERT: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "chainforge", version, about = "Checked fillings and localizations of mod-2 chain families")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Flat norm of a 0-cycle with its matching witness, checked against the oracle.
    Flatnorm(RunArgs),
    /// Localize an eps-fine family of 0-cycles.
    Localize {
        #[command(flatten)]
        run: RunArgs,
        /// Fineness; replaces the eps sweep of the config.
        #[arg(long)]
        eps: Option<f64>,
        /// Localization budget; replaces the delta sweep of the config.
        #[arg(long)]
        delta: Option<f64>,
        /// Reject parameter complexes above this dimension.
        #[arg(long)]
        dim_cap: Option<usize>,
    },
    /// Fill a family of 0-cycles in the unit disk by bending and cancelling.
    FillDisk(RunArgs),
    /// Push a localized family in the 3-disk off a boundary ball.
    AvoidBall(RunArgs),
    /// Parametric fill over the triangulated unit square.
    FillDomain(RunArgs),
    /// Run one acceptance preset by name or number, or `all`.
    Preset {
        name: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        threads: Option<usize>,
    },
}

#[derive(Args)]
struct RunArgs {
    /// Experiment config JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for summary.json, rows.jsonl, rows.csv and outputs.jsonl.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    threads: Option<usize>,
    /// Corrupt each produced output so that its checks must fail.
    #[arg(long)]
    inject_fault: bool,
    /// Input chain JSON (flatnorm) or family JSON (other pipelines).
    #[arg(long)]
    input: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Assert(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Assert(e.to_string())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))
}

fn load_config(pipeline: Pipeline, args: &RunArgs) -> Result<ExperimentConfig, Failure> {
    let mut value: serde_json::Value = read_json(&args.config)?;
    let obj = value.as_object_mut().ok_or_else(|| Failure::Config("config must be a JSON object".into()))?;
    match obj.get("pipeline").and_then(|p| p.as_str()) {
        Some(p) if p != pipeline.name() => {
            return Err(Failure::Config(format!("config is for pipeline {p}, not {}", pipeline.name())));
        }
        _ => {
            obj.insert("pipeline".into(), pipeline.name().into());
        }
    }
    let mut cfg = ExperimentConfig::from_json(&value.to_string())?;
    if let Some(path) = &args.input {
        if pipeline == Pipeline::Flatnorm {
            cfg.chain = Some(read_json::<ChainJson>(path)?);
        } else {
            cfg.family = Some(read_json::<FamilyJson>(path)?);
        }
    }
    Ok(cfg)
}

fn pool(threads: Option<usize>) -> Result<rayon::ThreadPool, Failure> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn run(pipeline: Pipeline, args: &RunArgs, adjust: impl FnOnce(&mut ExperimentConfig) -> Result<(), Failure>) -> Result<(), Failure> {
    let mut cfg = load_config(pipeline, args)?;
    adjust(&mut cfg)?;
    let report = pool(args.threads)?.install(|| run_pipeline(&cfg, args.seed, args.inject_fault))?;
    write_outputs(&report, &args.out).map_err(|e| Failure::Config(format!("{}: {e}", args.out.display())))?;
    println!(
        "{}: {} tasks, {} rows, ratio max {:.4} p95 {:.4}, {}",
        report.pipeline,
        report.tasks,
        report.rows.len(),
        report.ratio_max,
        report.ratio_p95,
        if report.passed { "pass" } else { "FAIL" }
    );
    for a in report.asserts.iter().filter(|a| !a.passed) {
        println!("  failed {}: {}", a.name, a.detail);
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Assert(format!("{} assertion(s) failed", report.asserts.iter().filter(|a| !a.passed).count())))
    }
}

fn presets(name: &str, seed: u64, out: Option<&Path>, threads: Option<usize>) -> Result<(), Failure> {
    let names: Vec<&str> = if name == "all" { PRESETS.to_vec() } else { vec![name] };
    let tol = Tolerances::default();
    let outcomes: Vec<CriterionOutcome> =
        pool(threads)?.install(|| names.iter().map(|n| run_preset(n, seed, &tol)).collect::<chainforge::error::Result<_>>())?;
    for o in &outcomes {
        println!("[{}] {:<40} {}  {}", o.id, o.name, if o.passed { "PASS" } else { "FAIL" }, o.summary);
    }
    if let Some(dir) = out {
        let write = || -> std::io::Result<()> {
            std::fs::create_dir_all(dir)?;
            let text = serde_json::to_string_pretty(&outcomes).map_err(std::io::Error::other)?;
            std::fs::write(dir.join("presets.json"), text + "\n")
        };
        write().map_err(|e| Failure::Config(format!("{}: {e}", dir.display())))?;
    }
    if outcomes.iter().all(|o| o.passed) {
        Ok(())
    } else {
        Err(Failure::Assert("preset failed".into()))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let res = match &cli.command {
        Command::Flatnorm(a) => run(Pipeline::Flatnorm, a, |_| Ok(())),
        Command::Localize { run: a, eps, delta, dim_cap } => run(Pipeline::Localize, a, |cfg| {
            if let Some(e) = eps {
                cfg.sweep.eps = vec![*e];
            }
            if let Some(d) = delta {
                cfg.sweep.delta = vec![*d];
            }
            let p = cfg.family.as_ref().map_or(cfg.complex.p, |f| f.complex.d);
            match dim_cap {
                Some(cap) if p > *cap => Err(Failure::Config(format!("parameter dimension {p} exceeds --dim-cap {cap}"))),
                _ => Ok(()),
            }
        }),
        Command::FillDisk(a) => run(Pipeline::FillDisk, a, |_| Ok(())),
        Command::AvoidBall(a) => run(Pipeline::AvoidBall, a, |_| Ok(())),
        Command::FillDomain(a) => run(Pipeline::FillDomain, a, |_| Ok(())),
        Command::Preset { name, seed, out, threads } => presets(name, *seed, out.as_deref(), *threads),
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assert(m)) => {
            eprintln!("chainforge: {m}");
            ExitCode::from(EXIT_ASSERT)
        }
        Err(Failure::Config(m)) => {
            eprintln!("chainforge: config error: {m}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
