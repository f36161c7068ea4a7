use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mckean::constants::{build_pipeline1, build_pipeline2, AStrategy, PipelineOptions};
use mckean::experiments::{
    run_chaos, run_contraction, run_ergodicity, run_moment_bound, write_json, Assertion, ExperimentConfig,
    PipelineChoice,
};
use mckean::model::{validate_bundle, BuiltinSpec, ModelConfig, ProbePlan};
use mckean::simulate::{write_binary, write_csv, CoupledEnsemble, CouplingMode, LawProxy, ParticleEnsemble};
use mckean::transport::{w_cost, EmpiricalMeasure, GroundCost};

#[derive(Parser)]
#[command(name = "mckean", version, about = "Contraction constants and coupled particle experiments for McKean-Vlasov SDEs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute both constant pipelines and spot-check the declared assumptions.
    Constants(ConstantsArgs),
    /// Simulate one particle system, or a coupled pair with --coupled.
    Simulate(SimulateArgs),
    /// Transport distance between two CSV point clouds.
    Transport(TransportArgs),
    /// Coupled contraction experiment.
    Contract(ExperimentArgs),
    /// Propagation-of-chaos experiment.
    Chaos(ExperimentArgs),
    /// Long-run convergence to the invariant law.
    Ergodic(ExperimentArgs),
    /// First-moment bound from the origin.
    Moments(ExperimentArgs),
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Experiment config JSON; its `model` section is used where only a model is needed.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Inline model spec, e.g. '{"name":"mean_field_ou","l1":0.1}'.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args, Clone)]
struct PlanArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    h: Option<f64>,
    /// Horizon.
    #[arg(long = "T")]
    horizon: Option<f64>,
    #[arg(long)]
    stride: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// mixed | synchronous | reflection | independent
    #[arg(long)]
    mode: Option<CouplingMode>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long)]
    replicates: Option<usize>,
    /// 1 or 2
    #[arg(long)]
    pipeline: Option<PipelineChoice>,
    /// Comma-separated ensemble sizes for `chaos`.
    #[arg(long, value_delimiter = ',')]
    n_grid: Option<Vec<usize>>,
}

impl PlanArgs {
    fn config(&self) -> Result<ExperimentConfig> {
        let mut c = match &self.model.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(m) = &self.model.model {
            c.model = ModelConfig::new(serde_json::from_str::<BuiltinSpec>(m).context("parsing --model")?);
        }
        macro_rules! set {
            ($($f:ident => $g:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$g = v; })* };
        }
        set!(n => n, h => h, horizon => horizon, stride => stride, seed => seed, mode => mode,
             delta => delta, replicates => replicates, pipeline => pipeline, n_grid => n_grid);
        Ok(c)
    }
}

#[derive(Args)]
struct ConstantsArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// JSON report path (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV tabulation of the pipeline-1 profile (r, phi, Phi, g, f, f_prime).
    #[arg(long)]
    table: Option<PathBuf>,
    /// CSV tabulation of the pipeline-2 profile.
    #[arg(long)]
    table2: Option<PathBuf>,
    /// Use this value for A instead of estimating it.
    #[arg(long)]
    a: Option<f64>,
    /// Bound on E[1 + |X_0|²] entering pipeline 2.
    #[arg(long, default_value_t = 2.0)]
    moment_cap: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Binary,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Simulate the coupled pair (X, Y) instead of a single system.
    #[arg(long)]
    coupled: bool,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Cost {
    W1,
    W2,
    /// Pipeline-1 metric of the configured model.
    Rho,
}

#[derive(Args)]
struct TransportArgs {
    mu: PathBuf,
    nu: PathBuf,
    #[arg(long, value_enum, default_value = "w1")]
    cost: Cost,
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    plan: PlanArgs,
    /// Time or size series.
    #[arg(long)]
    csv: Option<PathBuf>,
    /// Summary with constants, fits and per-assertion outcomes (stdout when absent).
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Exit with status 2 when an assertion fails.
    #[arg(long)]
    strict: bool,
}

fn model_config(args: &ModelArgs) -> Result<ModelConfig> {
    if let Some(m) = &args.model {
        return Ok(ModelConfig::new(serde_json::from_str::<BuiltinSpec>(m).context("parsing --model")?));
    }
    match &args.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            // Accept a bare model config as well as a full experiment config.
            match serde_json::from_str::<ModelConfig>(&text) {
                Ok(m) => Ok(m),
                Err(_) => Ok(ExperimentConfig::from_json(&text)?.model),
            }
        }
        None => Ok(ModelConfig::new(BuiltinSpec::mean_field_ou(1, 0.1))),
    }
}

fn emit_json(path: Option<&PathBuf>, value: &impl serde::Serialize) -> Result<()> {
    match path {
        Some(p) => write_json(p, value)?,
        None => {
            serde_json::to_writer_pretty(std::io::stdout().lock(), value)?;
            println!();
        }
    }
    Ok(())
}

fn write_file(path: &PathBuf, f: impl FnOnce(BufWriter<File>) -> mckean::Result<()>) -> Result<()> {
    f(BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?))?;
    Ok(())
}

fn finish(assertions: &[Assertion], strict: bool) -> Result<()> {
    let mut failed = false;
    for a in assertions {
        let tag = match a.passed {
            Some(true) => "PASS",
            Some(false) => {
                failed = true;
                "FAIL"
            }
            None => "SKIP",
        };
        eprintln!("{tag} {}: {}", a.name, a.detail);
    }
    if failed && strict {
        std::process::exit(2);
    }
    Ok(())
}

fn constants(args: ConstantsArgs) -> Result<()> {
    let built = model_config(&args.model)?.build()?;
    let (model, a) = (&built.model, &built.assumptions);
    let mut opts = PipelineOptions::default();
    if let Some(v) = args.a {
        opts.a_strategy = AStrategy::Override(v);
    }
    let p1 = build_pipeline1(model, a, &opts);
    let p2 = build_pipeline2(model, a, &opts, args.moment_cap);
    let validation = validate_bundle(
        model,
        a,
        &ProbePlan { pipeline2: a.dissipativity.is_some(), ..Default::default() },
    )?;
    if let (Some(path), Ok(r)) = (&args.table, &p1) {
        write_file(path, |w| r.table.write_csv(w))?;
    }
    if let (Some(path), Ok(r)) = (&args.table2, &p2) {
        write_file(path, |w| r.table.write_csv(w))?;
    }
    let show = |r: std::result::Result<serde_json::Value, String>| match r {
        Ok(v) => v,
        Err(e) => json!({ "error": e }),
    };
    let report = json!({
        "model": model.name(),
        "dim": model.dim(),
        "assumptions": a.summary(),
        "pipeline1": show(p1.map_err(|e| e.to_string()).and_then(|r| serde_json::to_value(r).map_err(|e| e.to_string()))),
        "pipeline2": show(p2.map_err(|e| e.to_string()).and_then(|r| serde_json::to_value(r).map_err(|e| e.to_string()))),
        "validation": validation,
    });
    emit_json(args.out.as_ref(), &report)
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let cfg = args.plan.config()?;
    cfg.validate()?;
    let plan = cfg.plan()?;
    let model = cfg.model.build()?.model;
    let traj = if args.coupled {
        let x = ParticleEnsemble::from_law(model.clone(), &cfg.initial_x, cfg.n, cfg.seed, 1)?;
        let y = ParticleEnsemble::from_law(model, &cfg.initial_y, cfg.n, cfg.seed, 2)?;
        CoupledEnsemble::new(x, y, cfg.delta, cfg.mode, 3)?.simulate(&plan, &LawProxy::EmpiricalSelf)?
    } else {
        ParticleEnsemble::from_law(model, &cfg.initial_x, cfg.n, cfg.seed, 1)?.simulate(&plan)?
    };
    match args.format {
        Format::Csv => write_file(&args.out, |w| write_csv(&traj, w)),
        Format::Binary => write_file(&args.out, |w| write_binary(&traj, w)),
    }
}

fn transport(args: TransportArgs) -> Result<()> {
    let mu = EmpiricalMeasure::from_csv_path(&args.mu).with_context(|| format!("reading {}", args.mu.display()))?;
    let nu = EmpiricalMeasure::from_csv_path(&args.nu).with_context(|| format!("reading {}", args.nu.display()))?;
    let result = match args.cost {
        Cost::W1 => w_cost(&mu, &nu, GroundCost::Power(1.0))?,
        Cost::W2 => w_cost(&mu, &nu, GroundCost::Power(2.0))?,
        Cost::Rho => {
            let built = model_config(&args.model)?.build()?;
            if built.model.dim() != mu.dim() {
                bail!("model dimension {} differs from the clouds' {}", built.model.dim(), mu.dim());
            }
            let p1 = build_pipeline1(&built.model, &built.assumptions, &PipelineOptions::default())?;
            w_cost(&mu, &nu, GroundCost::Metric(&p1.metric()))?
        }
    };
    emit_json(args.out.as_ref(), &json!({ "value": result.value, "method": result.method, "gap": result.gap, "stderr": result.stderr }))
}

macro_rules! experiment {
    ($args:expr, $run:path) => {{
        let args = $args;
        let cfg = args.plan.config()?;
        let report = $run(&cfg)?;
        if let Some(p) = &args.csv {
            write_file(p, |w| report.write_csv(w))?;
        }
        if let Some(p) = &args.svg {
            std::fs::write(p, report.svg())?;
        }
        emit_json(args.json.as_ref(), &report)?;
        finish(&report.assertions, args.strict)
    }};
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Constants(a) => constants(a),
        Command::Simulate(a) => simulate(a),
        Command::Transport(a) => transport(a),
        Command::Contract(a) => experiment!(a, run_contraction),
        Command::Chaos(a) => experiment!(a, run_chaos),
        Command::Ergodic(a) => experiment!(a, run_ergodicity),
        Command::Moments(a) => experiment!(a, run_moment_bound),
    }?;
    std::io::stdout().flush()?;
    Ok(())
}
