//! Command-line front end.
//!
//! [`dispatch`] parses the arguments, prints the resolved spec to stderr,
//! runs the requested study and writes its report to `--out` (stdout when
//! absent). Exit codes: 0 success, 1 usage error, 2 runtime or data error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::activation::{Activation, ActivationKind, Variant};
use crate::bench::compare_modes;
use crate::data::resolve_data_dir;
use crate::error::{Error, Result};
use crate::experiments::{
    gradcheck_batch, gradflow_to_csv, prepare_task, rank_functions, rank_to_csv, read_csv_report, results_to_csv, run_convergence_study,
    run_gradient_flow_probe, run_k_sweep, run_task, strip_timing, ConvergenceSpec, DataOptions, Environment,
    ExperimentSpec, GradFlowSpec, JsonReport, KSweepSpec, ReportFormat, TaskKind, TaskScores,
};
use crate::gradcheck::{check_activation, check_network_gradients, NetCheckOptions};
use crate::nn::{evaluate, init_network, save_checkpoint, train, LossKind, NetworkConfig, TrainConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

#[derive(Parser, Debug)]
#[command(
    name = "hybridact",
    version,
    about = "Hybrid sigmoid/softsign activations: evaluation, gradient checks, training and comparison studies"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GlobalArgs {
    /// Seed of single-run commands (train, gradcheck, bench)
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Report file; stdout when absent
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    /// Variant used for bare `s3` and `s4` names
    #[arg(long, global = true, value_enum, default_value_t = VariantArg::Rescaled)]
    variant: VariantArg,
    /// Data directory [default: $HYBRIDACT_DATA_DIR, then ./data]
    #[arg(long, global = true)]
    data_dir: Option<PathBuf>,
    /// Worker threads for independent runs
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Leave wall-clock fields out of reports
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
enum VariantArg {
    Literal,
    Rescaled,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Literal => Variant::Literal,
            VariantArg::Rescaled => Variant::Rescaled,
        }
    }
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one activation, or its derivative, at a point
    Eval(EvalArgs),
    /// Compare analytic derivatives and network gradients with finite differences
    Gradcheck(GradcheckArgs),
    /// Train one network on one task and report its test metric
    Train(TrainArgs),
    /// Benchmark activations on a task over several seeds
    Task(TaskArgs),
    /// Epochs-to-convergence across three architectures
    Convergence(ConvergenceArgs),
    /// Per-layer gradient magnitude and dead-unit probe across depths
    Gradflow(GradflowArgs),
    /// Sweep the S4 steepness k on a task
    Ksweep(KsweepArgs),
    /// Rank activations across tasks by average rank
    Rank(RankArgs),
    /// Time naive multi-pass against fused single-pass S4 evaluation
    Bench(BenchArgs),
}

#[derive(Args, Debug, Clone, Serialize)]
struct EvalArgs {
    /// Activation name, e.g. s4, relu, s3-literal
    #[arg(long = "fn")]
    function: String,
    /// Gate steepness for s3/s4 [default: 15]
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    /// Evaluation point
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    /// Print the derivative instead of the value
    #[arg(long)]
    derivative: bool,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GradcheckArgs {
    /// Comma-separated activation names [default: all twelve kinds]
    #[arg(long = "fns")]
    functions: Option<String>,
    /// Steepness values for s3/s4 kinds
    #[arg(long, default_value = "5,10,15,20,30,40,50")]
    k_values: String,
    /// Grid start
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    lo: f64,
    /// Grid end
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    hi: f64,
    /// Grid points
    #[arg(long, default_value_t = 2001)]
    points: usize,
    /// Finite-difference step
    #[arg(long, default_value_t = crate::gradcheck::DEFAULT_STEP)]
    step: f64,
    /// Relative-error tolerance for activation derivatives
    #[arg(long, default_value_t = crate::gradcheck::ACTIVATION_TOL)]
    tol: f64,
    /// Check backpropagated network gradients instead
    #[arg(long)]
    network: bool,
    /// Hidden layer widths of the checked network
    #[arg(long, default_value = "64,32,16")]
    hidden: String,
    /// Relative-error tolerance for network gradients
    #[arg(long, default_value_t = crate::gradcheck::NETWORK_TOL)]
    net_tol: f64,
    /// Parameters sampled per network
    #[arg(long, default_value_t = 128)]
    samples: usize,
    /// Training rows per network check (synthetic for BCE, Iris for CE, Boston for MSE)
    #[arg(long, default_value_t = 8)]
    rows: usize,
}

#[derive(Args, Debug, Clone, Serialize)]
struct TrainOpts {
    /// Maximum epochs
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    /// Early-stopping patience in epochs
    #[arg(long, default_value_t = 5)]
    patience: usize,
    /// Adam learning rate
    #[arg(long, default_value_t = 0.001)]
    lr: f64,
    /// Mini-batch size
    #[arg(long, default_value_t = 32)]
    batch_size: usize,
    /// Fraction of the training split held out for validation
    #[arg(long, default_value_t = 0.2)]
    val_fraction: f64,
    /// Seed of the train/test split and the synthetic generator
    #[arg(long, default_value_t = 7)]
    data_seed: u64,
    /// Train MNIST on all 60,000 rows
    #[arg(long)]
    mnist_full: bool,
}

impl TrainOpts {
    fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            learning_rate: self.lr,
            batch_size: self.batch_size,
            max_epochs: self.epochs,
            patience: self.patience,
            val_fraction: self.val_fraction,
            ..TrainConfig::with_seed(seed)
        }
    }

    fn data(&self, g: &GlobalArgs) -> DataOptions {
        DataOptions {
            data_dir: resolve_data_dir(g.data_dir.as_deref()),
            data_seed: self.data_seed,
            mnist_full: self.mnist_full,
            ..DataOptions::default()
        }
    }
}

#[derive(Args, Debug, Clone, Serialize)]
struct TrainArgs {
    /// binary, multiclass, regression or mnist
    #[arg(long)]
    task: String,
    /// Hidden activation, `name[:k=V]`
    #[arg(long, default_value = "s4")]
    activation: String,
    /// Hidden layer widths
    #[arg(long, default_value = "64,32,16")]
    hidden: String,
    /// Save the trained network as a JSON checkpoint
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[command(flatten)]
    opts: TrainOpts,
}

#[derive(Args, Debug, Clone, Serialize)]
struct TaskArgs {
    /// binary, multiclass, regression or mnist
    #[arg(long)]
    task: String,
    /// Comma-separated `name[:k=V]` list
    #[arg(long, default_value = DEFAULT_ACTIVATIONS)]
    activations: String,
    /// Comma-separated training seeds
    #[arg(long, default_value = "1,2,3")]
    seeds: String,
    /// Hidden layer widths
    #[arg(long, default_value = "64,32,16")]
    hidden: String,
    #[command(flatten)]
    opts: TrainOpts,
}

#[derive(Args, Debug, Clone, Serialize)]
struct ConvergenceArgs {
    /// Comma-separated training seeds
    #[arg(long, default_value = "1,2,3")]
    seeds: String,
    /// Comma-separated `name[:k=V]` list
    #[arg(long, default_value = "s4:k=5,swish,relu")]
    activations: String,
    /// Maximum epochs
    #[arg(long, default_value_t = 30)]
    epochs: usize,
    /// Seed of the synthetic generator and split
    #[arg(long, default_value_t = 7)]
    data_seed: u64,
}

#[derive(Args, Debug, Clone, Serialize)]
struct GradflowArgs {
    /// Comma-separated `name[:k=V]` list
    #[arg(long, default_value = "s4:k=10,relu")]
    activations: String,
    /// Comma-separated depths
    #[arg(long, default_value = "2,3,4,5")]
    depths: String,
    /// Hidden width
    #[arg(long, default_value_t = 100)]
    width: usize,
    /// Probe batch rows
    #[arg(long, default_value_t = 256)]
    batch_rows: usize,
    /// Training epochs before the second probe
    #[arg(long, default_value_t = 5)]
    epochs: usize,
    /// Comma-separated seeds
    #[arg(long, default_value = "1,2,3")]
    seeds: String,
}

#[derive(Args, Debug, Clone, Serialize)]
struct KsweepArgs {
    /// binary, multiclass, regression or mnist
    #[arg(long)]
    task: String,
    /// Comma-separated k grid
    #[arg(long, default_value = "5,10,15,20,30,40,50")]
    k_values: String,
    /// Comma-separated training seeds
    #[arg(long, default_value = "1,2,3")]
    seeds: String,
    /// Hidden layer widths
    #[arg(long, default_value = "64,32,16")]
    hidden: String,
    #[command(flatten)]
    opts: TrainOpts,
}

#[derive(Args, Debug, Clone, Serialize)]
struct RankArgs {
    /// Rank the aggregate rows of existing CSV task reports instead of training
    #[arg(long, value_delimiter = ',')]
    reports: Vec<PathBuf>,
    /// Comma-separated tasks to run
    #[arg(long, default_value = "binary,multiclass,regression")]
    tasks: String,
    /// Comma-separated `name[:k=V]` list
    #[arg(long, default_value = DEFAULT_ACTIVATIONS)]
    activations: String,
    /// Comma-separated training seeds
    #[arg(long, default_value = "1,2,3")]
    seeds: String,
    /// Hidden layer widths
    #[arg(long, default_value = "64,32,16")]
    hidden: String,
    #[command(flatten)]
    opts: TrainOpts,
}

#[derive(Args, Debug, Clone, Serialize)]
struct BenchArgs {
    /// Timed iterations per repetition
    #[arg(long, default_value_t = 10_000)]
    iterations: usize,
    /// Elements per buffer
    #[arg(long, default_value_t = 10_000)]
    buffer_len: usize,
    /// Gate steepness
    #[arg(long, default_value_t = 15.0, allow_negative_numbers = true)]
    k: f64,
}

const DEFAULT_ACTIVATIONS: &str = "s4,s3,sigmoid,tanh,relu,leaky_relu,elu,swish,softsign,softplus";

/// Parses `argv` (program name first), runs the command and returns the
/// process exit code.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
        }
    };
    let plan = match resolve(&cli) {
        Ok(plan) => plan,
        Err(e) => {
            eprintln!("error: {e}\n\nFor more information, try '--help'.");
            return EXIT_USAGE;
        }
    };
    match serde_json::to_string(&plan) {
        Ok(text) => eprintln!("resolved spec: {text}"),
        Err(e) => log::warn!("could not render the resolved spec: {e}"),
    }
    match execute(&cli.global, plan) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_RUNTIME
        }
    }
}

/// A fully resolved command: every flag turned into the library's own types.
#[derive(Debug, Serialize)]
#[serde(tag = "command", rename_all = "snake_case")]
enum Plan {
    Eval {
        activation: Activation,
        x: f64,
        derivative: bool,
    },
    Gradcheck {
        activations: Vec<Activation>,
        lo: f64,
        hi: f64,
        points: usize,
        step: f64,
        tol: f64,
        network: Option<NetworkPlan>,
    },
    Train {
        task: TaskKind,
        activation: Activation,
        hidden_layers: Vec<usize>,
        train: TrainConfig,
        data: DataOptions,
        checkpoint: Option<PathBuf>,
    },
    Task(ExperimentSpec),
    Convergence(ConvergenceSpec),
    Gradflow(GradFlowSpec),
    Ksweep(KSweepSpec),
    Rank(RankPlan),
    Bench {
        variant: Variant,
        iterations: usize,
        buffer_len: usize,
        k: f64,
        seed: u64,
    },
}

#[derive(Debug, Serialize)]
struct NetworkPlan {
    hidden_layers: Vec<usize>,
    rows: usize,
    data: DataOptions,
    options: NetCheckOptions,
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "snake_case")]
enum RankPlan {
    Reports(Vec<PathBuf>),
    Run(Vec<ExperimentSpec>),
}

fn parse_list<T: std::str::FromStr>(what: &str, text: &str) -> Result<Vec<T>> {
    let items: Vec<T> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Error::InvalidParameter(format!("`{s}` is not a valid {what}")))
        })
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::InvalidParameter(format!("empty {what} list")));
    }
    Ok(items)
}

fn parse_task(text: &str) -> Result<TaskKind> {
    text.parse()
}

fn experiment(
    task: TaskKind,
    activations: Vec<Activation>,
    seeds: &str,
    hidden: &str,
    opts: &TrainOpts,
    g: &GlobalArgs,
) -> Result<ExperimentSpec> {
    let spec = ExperimentSpec {
        task,
        activations,
        hidden_layers: parse_list("layer width", hidden)?,
        seeds: parse_list("seed", seeds)?,
        train: opts.train_config(g.seed),
        data: opts.data(g),
    };
    spec.validate()?;
    Ok(spec)
}

fn resolve(cli: &Cli) -> Result<Plan> {
    let g = &cli.global;
    let variant: Variant = g.variant.into();
    if g.jobs == 0 {
        return Err(Error::InvalidParameter("--jobs must be >= 1".into()));
    }
    Ok(match &cli.command {
        Command::Eval(a) => {
            let mut activation = Activation::parse(&a.function, variant)?;
            if let Some(k) = a.k {
                if !activation.kind.uses_k() {
                    return Err(Error::InvalidParameter(format!("`{}` takes no k", activation.kind)));
                }
                activation.params.k = k;
                activation.params.validate()?;
            }
            Plan::Eval {
                activation,
                x: a.x,
                derivative: a.derivative,
            }
        }
        Command::Gradcheck(a) => {
            let ks: Vec<f64> = parse_list("k", &a.k_values)?;
            let kinds: Vec<Activation> = match &a.functions {
                Some(list) => Activation::parse_list(list, variant)?,
                None => ActivationKind::ALL.iter().map(|&k| Activation::plain(k)).collect(),
            };
            let mut activations = Vec::new();
            for act in kinds {
                if act.kind.uses_k() {
                    for &k in &ks {
                        let mut a = act;
                        a.params.k = k;
                        a.params.validate()?;
                        activations.push(a);
                    }
                } else {
                    activations.push(act);
                }
            }
            if !(a.step > 0.0 && a.tol > 0.0 && a.net_tol > 0.0) {
                return Err(Error::InvalidParameter("step and tolerances must be positive".into()));
            }
            let network = if a.network {
                Some(NetworkPlan {
                    hidden_layers: parse_list("layer width", &a.hidden)?,
                    rows: a.rows,
                    data: DataOptions::with_dir(resolve_data_dir(g.data_dir.as_deref())),
                    options: NetCheckOptions {
                        h: a.step,
                        tol: a.net_tol,
                        samples: a.samples,
                        seed: g.seed,
                    },
                })
            } else {
                if !(a.lo < a.hi) || a.points < 2 {
                    return Err(Error::InvalidParameter("the grid needs lo < hi and at least 2 points".into()));
                }
                None
            };
            Plan::Gradcheck {
                activations,
                lo: a.lo,
                hi: a.hi,
                points: a.points,
                step: a.step,
                tol: a.tol,
                network,
            }
        }
        Command::Train(a) => {
            let train = a.opts.train_config(g.seed);
            train.validate()?;
            let hidden_layers: Vec<usize> = parse_list("layer width", &a.hidden)?;
            if hidden_layers.contains(&0) {
                return Err(Error::InvalidParameter("hidden layer widths must be >= 1".into()));
            }
            Plan::Train {
                task: parse_task(&a.task)?,
                activation: Activation::parse(&a.activation, variant)?,
                hidden_layers,
                train,
                data: a.opts.data(g),
                checkpoint: a.checkpoint.clone(),
            }
        }
        Command::Task(a) => Plan::Task(experiment(
            parse_task(&a.task)?,
            Activation::parse_list(&a.activations, variant)?,
            &a.seeds,
            &a.hidden,
            &a.opts,
            g,
        )?),
        Command::Convergence(a) => {
            let mut spec = ConvergenceSpec::new(variant);
            spec.activations = Activation::parse_list(&a.activations, variant)?;
            spec.seeds = parse_list("seed", &a.seeds)?;
            spec.train.max_epochs = a.epochs;
            spec.train.patience = spec.train.patience.min(a.epochs);
            spec.train.validate()?;
            spec.data = DataOptions {
                data_dir: resolve_data_dir(g.data_dir.as_deref()),
                data_seed: a.data_seed,
                ..DataOptions::default()
            };
            Plan::Convergence(spec)
        }
        Command::Gradflow(a) => {
            let mut spec = GradFlowSpec::new(Activation::parse_list(&a.activations, variant)?);
            spec.depths = parse_list("depth", &a.depths)?;
            spec.seeds = parse_list("seed", &a.seeds)?;
            spec.width = a.width;
            spec.batch_rows = a.batch_rows;
            spec.train_epochs = a.epochs;
            spec.data.data_dir = resolve_data_dir(g.data_dir.as_deref());
            if spec.depths.contains(&0) || spec.width == 0 || spec.batch_rows == 0 || spec.train_epochs == 0 {
                return Err(Error::InvalidParameter("depths, width, batch rows and epochs must be >= 1".into()));
            }
            Plan::Gradflow(spec)
        }
        Command::Ksweep(a) => {
            let e = experiment(parse_task(&a.task)?, vec![Activation::s4(variant, 1.0)], &a.seeds, &a.hidden, &a.opts, g)?;
            let k_values: Vec<f64> = parse_list("k", &a.k_values)?;
            for &k in &k_values {
                Activation::s4(variant, k).params.validate()?;
            }
            Plan::Ksweep(KSweepSpec {
                task: e.task,
                k_values,
                variant,
                hidden_layers: e.hidden_layers,
                seeds: e.seeds,
                train: e.train,
                data: e.data,
            })
        }
        Command::Rank(a) => {
            if !a.reports.is_empty() {
                Plan::Rank(RankPlan::Reports(a.reports.clone()))
            } else {
                let acts = Activation::parse_list(&a.activations, variant)?;
                let specs = parse_list::<String>("task", &a.tasks)?
                    .iter()
                    .map(|t| experiment(parse_task(t)?, acts.clone(), &a.seeds, &a.hidden, &a.opts, g))
                    .collect::<Result<_>>()?;
                Plan::Rank(RankPlan::Run(specs))
            }
        }
        Command::Bench(a) => {
            Activation::s4(variant, a.k).params.validate()?;
            Plan::Bench {
                variant,
                iterations: a.iterations,
                buffer_len: a.buffer_len,
                k: a.k,
                seed: g.seed,
            }
        }
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => crate::experiments::write_text(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_doc<S: Serialize, R: Serialize>(study: &str, spec: &S, results: &R) -> Result<String> {
    let doc = JsonReport {
        study: study.to_string(),
        spec,
        results,
        environment: Environment::current(),
    };
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn fmt_f64(v: f64) -> String {
    v.to_string()
}

fn execute(g: &GlobalArgs, plan: Plan) -> Result<()> {
    let out = g.out.as_deref();
    let format: ReportFormat = g.format.into();
    let timing = !g.no_timing;
    match &plan {
        Plan::Eval {
            activation,
            x,
            derivative,
        } => {
            let v = if *derivative {
                activation.derivative(*x)?
            } else {
                activation.eval(*x)?
            };
            println!("{v}");
            Ok(())
        }
        Plan::Gradcheck {
            activations,
            lo,
            hi,
            points,
            step,
            tol,
            network,
        } => match network {
            None => {
                let reports = activations
                    .iter()
                    .map(|a| check_activation(a.kind, &a.params, *lo, *hi, *points, *step, *tol))
                    .collect::<Result<Vec<_>>>()?;
                let text = match format {
                    ReportFormat::Csv => {
                        let mut s = String::from("activation,grid_points,excluded,max_rel_error,worst_x,tol,passed\n");
                        for (a, r) in activations.iter().zip(&reports) {
                            s += &format!(
                                "{},{},{},{},{},{},{}\n",
                                a.id(),
                                r.grid_points,
                                r.excluded_points.len(),
                                fmt_f64(r.max_rel_error),
                                fmt_f64(r.worst_x),
                                r.tol,
                                r.passed
                            );
                        }
                        s
                    }
                    ReportFormat::Json => json_doc("gradcheck", &plan, &reports)?,
                };
                emit(out, &text)?;
                let failed = reports.iter().filter(|r| !r.passed).count();
                check_outcome(failed, reports.len())
            }
            Some(np) => {
                let mut reports = Vec::new();
                for a in activations {
                    for loss in [LossKind::Bce, LossKind::Ce, LossKind::Mse] {
                        let batch = gradcheck_batch(loss, np.rows, &np.data)?;
                        let config =
                            NetworkConfig::for_task(batch.num_features(), &np.hidden_layers, batch.task, *a);
                        let net = init_network(&config, np.options.seed)?;
                        reports.push(check_network_gradients(&net, &batch.features, &batch.targets, loss, &np.options)?);
                    }
                }
                let text = match format {
                    ReportFormat::Csv => {
                        let mut s = String::from("activation,loss,params_checked,max_rel_error,worst_param,tol,passed\n");
                        for r in &reports {
                            s += &format!(
                                "{},{:?},{},{},{},{},{}\n",
                                r.activation,
                                r.loss,
                                r.params_checked,
                                fmt_f64(r.max_rel_error),
                                r.worst_param,
                                r.tol,
                                r.passed
                            );
                        }
                        s.replace(",Bce,", ",bce,").replace(",Ce,", ",ce,").replace(",Mse,", ",mse,")
                    }
                    ReportFormat::Json => json_doc("gradcheck-network", &plan, &reports)?,
                };
                emit(out, &text)?;
                let failed = reports.iter().filter(|r| !r.passed).count();
                check_outcome(failed, reports.len())
            }
        },
        Plan::Train {
            task,
            activation,
            hidden_layers,
            train: tc,
            data,
            checkpoint,
        } => {
            let prepared = prepare_task(*task, data)?;
            let config =
                NetworkConfig::for_task(prepared.train.num_features(), hidden_layers, prepared.train.task, *activation);
            let (net, history) = train(&config, &prepared.train, tc)?;
            let metric = evaluate(&net, &prepared.test)?;
            if let Some(path) = checkpoint {
                save_checkpoint(&net, path)?;
            }
            let text = match format {
                ReportFormat::Csv => {
                    let mut s = String::from("epoch,train_loss,val_loss,val_metric\n");
                    for (i, e) in history.epochs.iter().enumerate() {
                        s += &format!("{},{},{},{}\n", i + 1, e.train_loss, e.val_loss, e.val_metric);
                    }
                    s
                }
                ReportFormat::Json => {
                    #[derive(Serialize)]
                    struct TrainReport<'a> {
                        test_metric: f64,
                        history: &'a crate::nn::TrainHistory,
                    }
                    json_doc(
                        "train",
                        &plan,
                        &TrainReport {
                            test_metric: metric,
                            history: &history,
                        },
                    )?
                }
            };
            emit(out, &text)?;
            eprintln!(
                "test {}: {metric} (best epoch {} of {})",
                if task.higher_is_better() { "accuracy" } else { "MSE" },
                history.best_epoch + 1,
                history.epochs_run()
            );
            Ok(())
        }
        Plan::Task(spec) => {
            let mut results = run_task(spec, g.jobs)?;
            if !timing {
                strip_timing(&mut results);
            }
            let text = match format {
                ReportFormat::Csv => results_to_csv("task", &results, timing),
                ReportFormat::Json => json_doc("task", spec, &results)?,
            };
            emit(out, &text)
        }
        Plan::Convergence(spec) => {
            let mut records = run_convergence_study(spec, g.jobs)?;
            if !timing {
                for r in &mut records {
                    strip_timing(std::slice::from_mut(&mut r.result));
                }
            }
            let text = match format {
                ReportFormat::Csv => {
                    let mut s = String::new();
                    for (i, r) in records.iter().enumerate() {
                        let csv = results_to_csv(&format!("convergence-{}", r.architecture), std::slice::from_ref(&r.result), timing);
                        let body = if i == 0 { &csv[..] } else { csv.split_once('\n').map_or("", |(_, b)| b) };
                        s += body;
                    }
                    if s.is_empty() {
                        s = results_to_csv("convergence", &[], timing);
                    }
                    s
                }
                ReportFormat::Json => json_doc("convergence", spec, &records)?,
            };
            emit(out, &text)
        }
        Plan::Gradflow(spec) => {
            let records = run_gradient_flow_probe(spec, g.jobs)?;
            let text = match format {
                ReportFormat::Csv => gradflow_to_csv(&records),
                ReportFormat::Json => json_doc("gradflow", spec, &records)?,
            };
            emit(out, &text)
        }
        Plan::Ksweep(spec) => {
            let mut result = run_k_sweep(spec, g.jobs)?;
            if !timing {
                strip_timing(&mut result.results);
            }
            eprintln!("best k: {}", result.argbest.map_or("none".into(), |k| k.to_string()));
            let text = match format {
                ReportFormat::Csv => results_to_csv("ksweep", &result.results, timing),
                ReportFormat::Json => json_doc("ksweep", spec, &result)?,
            };
            emit(out, &text)
        }
        Plan::Rank(rp) => {
            let scores = match rp {
                RankPlan::Reports(paths) => scores_from_reports(paths)?,
                RankPlan::Run(specs) => {
                    let mut scores = Vec::new();
                    for spec in specs {
                        let results = run_task(spec, g.jobs)?;
                        scores.push(TaskScores {
                            task: spec.task.name().to_string(),
                            higher_is_better: spec.task.higher_is_better(),
                            scores: results
                                .iter()
                                .map(|r| {
                                    r.mean.map(|m| (r.activation.id(), m)).ok_or_else(|| {
                                        Error::Contract(format!("every seed of {} failed on {}", r.activation.id(), r.task))
                                    })
                                })
                                .collect::<Result<_>>()?,
                        });
                    }
                    scores
                }
            };
            let table = rank_functions(&scores)?;
            let text = match format {
                ReportFormat::Csv => rank_to_csv(&table),
                ReportFormat::Json => json_doc("rank", &plan, &table)?,
            };
            emit(out, &text)
        }
        Plan::Bench {
            variant,
            iterations,
            buffer_len,
            k,
            seed,
        } => {
            let mut cmp = compare_modes(*variant, *iterations, *buffer_len, *k, *seed)?;
            if !timing {
                for r in [&mut cmp.naive, &mut cmp.fused] {
                    r.total_seconds = 0.0;
                    r.repetition_seconds.iter_mut().for_each(|t| *t = 0.0);
                }
                cmp.speedup = 0.0;
            }
            if let Some(w) = &cmp.warning {
                eprintln!("warning: {w}");
            }
            emit(out, &json_doc("bench", &plan, &cmp)?)
        }
    }
}

fn check_outcome(failed: usize, total: usize) -> Result<()> {
    if failed == 0 {
        Ok(())
    } else {
        Err(Error::Contract(format!("{failed} of {total} gradient checks exceeded the tolerance")))
    }
}

/// Groups the aggregate rows of CSV task reports by task.
fn scores_from_reports(paths: &[PathBuf]) -> Result<Vec<TaskScores>> {
    let mut tasks: Vec<TaskScores> = Vec::new();
    for path in paths {
        for row in read_csv_report(path)?.into_iter().filter(|r| r.seed == "mean") {
            let kind = parse_task(&row.task)?;
            let name = match (row.activation.as_str(), row.variant.as_str()) {
                ("s3", "literal") => "s3-literal",
                ("s3", "rescaled") => "s3-continuous",
                ("s4", "literal") => "s4-literal",
                ("s4", "rescaled") => "s4-rescaled",
                (other, _) => other,
            };
            let text = match row.k {
                Some(k) => format!("{name}:k={k}"),
                None => name.to_string(),
            };
            let id = Activation::parse(&text, Variant::Rescaled)?.id();
            let metric = row
                .metric
                .ok_or_else(|| Error::Contract(format!("{id} has no {} metric in {}", row.task, path.display())))?;
            match tasks.iter_mut().find(|t| t.task == kind.name()) {
                Some(t) => t.scores.push((id, metric)),
                None => tasks.push(TaskScores {
                    task: kind.name().to_string(),
                    higher_is_better: kind.higher_is_better(),
                    scores: vec![(id, metric)],
                }),
            }
        }
    }
    Ok(tasks)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> i32 {
        dispatch(std::iter::once("hybridact").chain(args.iter().copied()))
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(&["eval", "--fn", "s4", "--k", "10", "--x", "0"]), EXIT_OK);
        assert_eq!(run(&["eval", "--fn", "s4", "--k", "-1", "--x", "0"]), EXIT_USAGE);
        assert_eq!(run(&["eval", "--fn", "relu", "--k", "3", "--x", "0"]), EXIT_USAGE);
        assert_eq!(run(&["eval", "--fn", "s4", "--x", "0", "--bogus"]), EXIT_USAGE);
        assert_eq!(run(&["nope"]), EXIT_USAGE);
        assert_eq!(run(&["--help"]), EXIT_OK);
        assert_eq!(run(&["eval", "--fn", "s3-literal", "--x", "0", "--derivative"]), EXIT_RUNTIME);
    }

    #[test]
    fn missing_data_is_runtime_error() {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        assert_eq!(run(&["task", "--task", "multiclass", "--data-dir", d]), EXIT_RUNTIME);
    }

    #[test]
    fn every_subcommand_has_help() {
        for sub in ["eval", "gradcheck", "train", "task", "convergence", "gradflow", "ksweep", "rank", "bench"] {
            assert_eq!(run(&[sub, "--help"]), EXIT_OK, "{sub}");
        }
    }

    #[test]
    fn report_ids_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let code = run(&[
            "task", "--task", "binary", "--activations", "s4:k=10,relu", "--seeds", "1", "--hidden", "4",
            "--epochs", "2", "--patience", "1", "--out", path.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        let scores = scores_from_reports(&[path]).unwrap();
        assert_eq!(scores.len(), 1);
        let ids: Vec<&str> = scores[0].scores.iter().map(|(n, _)| n.as_str()).collect();
        assert_eq!(ids, ["s4-rescaled:k=10", "relu"]);
    }
}
