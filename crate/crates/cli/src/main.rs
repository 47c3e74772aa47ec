use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use lrb::channel::ChannelSpec;
use lrb::config::{CodeSpec, Emit, ExperimentConfig};
use lrb::fit::{fit_decay, DecayFit, FitOptions, Weighting};
use lrb::logical::RecoveryMode;
use lrb::rb::{simulate_lrb, RbConfig, RunDescriptor, SurvivalDataset};
use lrb::report::{oracle_report, write_fig2, write_fig3};
use lrb::{Error, VERSION};

/// Logical randomized benchmarking toolkit.
#[derive(Parser)]
#[command(name = "lrb", version)]
struct Cli {
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true, env = "LRB_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte Carlo experiment and write the survival dataset.
    Simulate(SimulateArgs),
    /// Fit a survival dataset.
    Fit(FitArgs),
    /// Exact logical-channel quantities.
    Oracle(OracleArgs),
    /// Closed-form figure data.
    Figures(FiguresArgs),
    /// Repeat oracle or simulate+fit over a parameter grid.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct FitArgs {
    /// Dataset CSV.
    dataset: PathBuf,
    /// Directory for `fit.json`; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Bootstrap seed; defaults to the seed in the dataset's config echo.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    n_bootstrap: Option<usize>,
    #[arg(long, value_enum)]
    weighting: Option<WeightingArg>,
}

#[derive(Clone, Copy, ValueEnum)]
enum WeightingArg {
    Homoscedastic,
    Binomial,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(long, conflicts_with_all = ["code", "noise"])]
    config: Option<PathBuf>,
    /// Built-in code name or code definition JSON.
    #[arg(long, requires = "noise")]
    code: Option<String>,
    /// Channel spec JSON.
    #[arg(long)]
    noise: Option<String>,
    #[arg(long, value_enum, default_value = "lookup")]
    recovery: RecoveryArg,
    /// Directory for `oracle.json`; printed to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum RecoveryArg {
    Lookup,
    Trivial,
}

#[derive(Args)]
struct FiguresArgs {
    #[arg(value_enum)]
    which: FigureId,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum FigureId {
    Fig2,
    Fig3,
    All,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Dotted path of the config entry to vary, e.g. `noise.p`.
    #[arg(long)]
    param: String,
    /// Comma-separated values, or `lin:start:stop:count`.
    #[arg(long)]
    values: String,
    #[arg(long, value_enum, default_value = "oracle")]
    mode: SweepMode,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepMode {
    Oracle,
    Simulate,
}

enum Failure {
    Validation(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        match e {
            Error::Io(_) => Failure::Runtime(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

type Outcome<T> = Result<T, Failure>;

fn read_input(path: &Path) -> Outcome<String> {
    fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn write_output(path: &Path, contents: &str) -> Outcome<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::Runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, contents).map_err(|e| Failure::Runtime(format!("{}: {e}", path.display())))
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json values serialize");
    s.push('\n');
    s
}

fn stamped(mut v: Value) -> Value {
    if let Value::Object(map) = &mut v {
        map.insert("version".into(), json!(VERSION));
    }
    v
}

fn load_config(path: &Path, seed: Option<u64>) -> Outcome<ExperimentConfig> {
    let text = read_input(path)?;
    ExperimentConfig::parse_with_seed(&text, seed)
        .map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn fit_options(config: &ExperimentConfig) -> FitOptions {
    FitOptions {
        n_bootstrap: config.n_bootstrap.unwrap_or(FitOptions::default().n_bootstrap),
        weighting: config.weighting,
        seed: config.seed.unwrap_or(0),
    }
}

fn fit_json(fit: &DecayFit) -> Value {
    stamped(serde_json::to_value(fit).expect("fit serializes"))
}

/// Sidecar holding the config echo next to `dataset.csv`.
fn echo_path(dataset: &Path) -> PathBuf {
    dataset.with_extension("config.json")
}

fn simulate(args: SimulateArgs) -> Outcome<()> {
    let config = load_config(&args.config, args.seed)?;
    let rb = config.rb_config()?;
    let out = args.out.unwrap_or_else(|| config.output_dir.clone());
    let data = simulate_lrb(&rb)?;

    let dataset_path = out.join("dataset.csv");
    if config.emit.contains(&Emit::Dataset) || config.emit.contains(&Emit::Fit) {
        write_output(&dataset_path, &data.to_csv_string())?;
        let echo = json!({
            "version": VERSION,
            "config": config,
            "descriptor": data.descriptor(),
        });
        write_output(&echo_path(&dataset_path), &pretty(&echo))?;
    }
    if config.emit.contains(&Emit::Fit) {
        let fit = fit_decay(&data, &fit_options(&config))?;
        write_output(&out.join("fit.json"), &pretty(&fit_json(&fit)))?;
    }
    if config.emit.contains(&Emit::Oracle) {
        let report = oracle_report(&rb)?;
        write_output(&out.join("oracle.json"), &pretty(&stamped(json!(report))))?;
    }
    if config.emit.contains(&Emit::Figures) {
        write_figures(FigureId::All, &out)?;
    }
    Ok(())
}

fn fit(args: FitArgs) -> Outcome<()> {
    let text = read_input(&args.dataset)?;
    let mut data = SurvivalDataset::read_csv(text.as_bytes())
        .map_err(|e| Failure::Validation(format!("{}: {e}", args.dataset.display())))?;
    let mut options = FitOptions::default();
    let echo = echo_path(&args.dataset);
    if echo.exists() {
        let v: Value = serde_json::from_str(&read_input(&echo)?)
            .map_err(|e| Failure::Validation(format!("{}: {e}", echo.display())))?;
        let config: ExperimentConfig = serde_json::from_value(v["config"].clone())
            .map_err(|e| Failure::Validation(format!("{}: {e}", echo.display())))?;
        let descriptor: Option<RunDescriptor> = serde_json::from_value(v["descriptor"].clone())
            .map_err(|e| Failure::Validation(format!("{}: {e}", echo.display())))?;
        options = fit_options(&config);
        data = data.with_descriptor(descriptor);
    }
    if let Some(seed) = args.seed {
        options.seed = seed;
    }
    if let Some(n) = args.n_bootstrap {
        options.n_bootstrap = n;
    }
    match args.weighting {
        Some(WeightingArg::Homoscedastic) => options.weighting = Weighting::Homoscedastic,
        Some(WeightingArg::Binomial) => options.weighting = Weighting::Binomial,
        None => {}
    }
    let fit = fit_decay(&data, &options)?;
    emit_json(&fit_json(&fit), args.out.as_deref(), "fit.json")
}

fn emit_json(v: &Value, out: Option<&Path>, name: &str) -> Outcome<()> {
    match out {
        Some(dir) => write_output(&dir.join(name), &pretty(v)),
        None => {
            print!("{}", pretty(v));
            Ok(())
        }
    }
}

fn oracle_config(args: &OracleArgs) -> Outcome<RbConfig> {
    if let Some(path) = &args.config {
        return Ok(load_config(path, None)?.rb_config()?);
    }
    let (Some(code), Some(noise)) = (&args.code, &args.noise) else {
        return Err(Failure::Validation("oracle needs --config or both --code and --noise".into()));
    };
    let code_spec: CodeSpec = if code.trim_start().starts_with('{') {
        serde_json::from_str(code).map_err(|e| Failure::Validation(format!("--code: {e}")))?
    } else {
        CodeSpec::Named(code.clone())
    };
    let noise: ChannelSpec = serde_json::from_str(noise).map_err(|e| Failure::Validation(format!("--noise: {e}")))?;
    let recovery = match args.recovery {
        RecoveryArg::Lookup => RecoveryMode::Lookup,
        RecoveryArg::Trivial => RecoveryMode::Trivial,
    };
    Ok(RbConfig::new(code_spec.resolve()?, noise.build()?, recovery, vec![1, 2, 3], 1, 1, 0))
}

fn oracle(args: OracleArgs) -> Outcome<()> {
    let config = oracle_config(&args)?;
    let report = oracle_report(&config)?;
    emit_json(&stamped(json!(report)), args.out.as_deref(), "oracle.json")
}

fn write_figures(which: FigureId, out: &Path) -> Outcome<()> {
    let table = |f: fn(&mut Vec<u8>) -> lrb::Result<()>| -> Outcome<String> {
        let mut buf = Vec::new();
        f(&mut buf)?;
        Ok(String::from_utf8(buf).expect("ascii output"))
    };
    if matches!(which, FigureId::Fig2 | FigureId::All) {
        write_output(&out.join("fig2.csv"), &table(|b| write_fig2(b))?)?;
        let meta = json!({"version": VERSION, "columns": ["p", "pr_no", "pr_co", "pr_un"]});
        write_output(&out.join("fig2.meta.json"), &pretty(&meta))?;
    }
    if matches!(which, FigureId::Fig3 | FigureId::All) {
        write_output(&out.join("fig3.csv"), &table(|b| write_fig3(b))?)?;
        let meta = json!({"version": VERSION, "columns": ["p", "q", "delta_f"]});
        write_output(&out.join("fig3.meta.json"), &pretty(&meta))?;
    }
    Ok(())
}

fn parse_values(spec: &str) -> Outcome<Vec<f64>> {
    let bad = |msg: String| Failure::Validation(format!("--values {spec:?}: {msg}"));
    if let Some(rest) = spec.strip_prefix("lin:") {
        let parts: Vec<&str> = rest.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(bad("expected lin:start:stop:count".into()));
        };
        let start: f64 = start.parse().map_err(|e| bad(format!("{e}")))?;
        let stop: f64 = stop.parse().map_err(|e| bad(format!("{e}")))?;
        let count: usize = count.parse().map_err(|e| bad(format!("{e}")))?;
        if count < 2 {
            return Err(bad("count must be at least 2".into()));
        }
        return Ok((0..count).map(|k| start + (stop - start) * k as f64 / (count - 1) as f64).collect());
    }
    let values = spec
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| bad(format!("{s:?}: {e}"))))
        .collect::<Outcome<Vec<f64>>>()?;
    if values.is_empty() {
        return Err(bad("no values".into()));
    }
    Ok(values)
}

/// Replaces the entry at a dotted path; integer segments index arrays.
fn substitute(root: &mut Value, path: &str, value: f64) -> Outcome<()> {
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (k, seg) in segments.iter().enumerate() {
        let next = match node {
            Value::Object(map) => map.get_mut(*seg),
            Value::Array(items) => seg.parse::<usize>().ok().and_then(|i| items.get_mut(i)),
            _ => None,
        };
        node = next.ok_or_else(|| Failure::Validation(format!("--param {path}: no entry {:?}", segments[..=k].join("."))))?;
    }
    if !node.is_number() {
        return Err(Failure::Validation(format!("--param {path}: entry is not a number")));
    }
    *node = if value.fract() == 0.0 && node.is_u64() && value >= 0.0 { json!(value as u64) } else { json!(value) };
    Ok(())
}

fn sweep(args: SweepArgs) -> Outcome<()> {
    let text = read_input(&args.config)?;
    let base: Value = serde_json::from_str(&text)
        .map_err(|e| Failure::Validation(format!("{}: line {}: {e}", args.config.display(), e.line())))?;
    let values = parse_values(&args.values)?;
    let mut configs = Vec::with_capacity(values.len());
    for &v in &values {
        let mut doc = base.clone();
        substitute(&mut doc, &args.param, v)?;
        let mut config: ExperimentConfig =
            serde_json::from_value(doc).map_err(|e| Failure::Validation(format!("{}: {e}", args.config.display())))?;
        if args.seed.is_some() {
            config.seed = args.seed;
        }
        let rb = config.rb_config().map_err(|e| Failure::Validation(format!("{} = {v}: {e}", args.param)))?;
        configs.push((v, config, rb));
    }

    let mut csv = String::new();
    match args.mode {
        SweepMode::Oracle => {
            csv.push_str("value,F_rec,F_norec,pr_no,pr_co,pr_un,p_L\n");
            for (v, _, rb) in &configs {
                let r = oracle_report(rb)?;
                csv.push_str(&format!("{v},{},{},{},{},{},{}\n", r.f_rec, r.f_norec, r.pr_no, r.pr_co, r.pr_un, r.p_l));
            }
        }
        SweepMode::Simulate => {
            csv.push_str("value,a,p,b,p_lo,p_hi,fidelity,p_exact\n");
            for (v, config, rb) in &configs {
                let fit = fit_decay(&simulate_lrb(rb)?, &fit_options(config))?;
                let exact = oracle_report(rb)?.p_l;
                csv.push_str(&format!(
                    "{v},{},{},{},{},{},{},{}\n",
                    fit.a, fit.p, fit.b, fit.ci68.p.lo, fit.ci68.p.hi, fit.fidelity, exact
                ));
            }
        }
    }
    write_output(&args.out.join("sweep.csv"), &csv)?;
    let meta = json!({"version": VERSION, "param": args.param, "values": values});
    write_output(&args.out.join("sweep.meta.json"), &pretty(&meta))
}

fn run(cli: Cli) -> Outcome<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Fit(a) => fit(a),
        Command::Oracle(a) => oracle(a),
        Command::Figures(a) => write_figures(a.which, &a.out),
        Command::Sweep(a) => sweep(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: --threads must be at least 1");
            return ExitCode::from(2);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
