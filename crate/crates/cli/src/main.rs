use std::error::Error as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cholcov::io::{format_matrix, ingest_csv, CsvOptions, MatrixHeader};
use cholcov::linalg::Standardization;
use cholcov::simulate::{ScenarioKind, ScenarioSpec};
use cholcov::{estimate, Method};
use cholcov_cli::classification::{classification_rows, run_classification};
use cholcov_cli::config::{DatasetConfig, LabelSpec, OutputFormat, Protocol};
use cholcov_cli::output::{rows_to_csv, write_factors, write_rows};
use cholcov_cli::simulation::{result_rows, run_simulation};
use cholcov_cli::verify::run_verify;
use cholcov_cli::{parse_config, CliError, ExperimentConfig, Result};

#[derive(Parser)]
#[command(
    name = "cholcov",
    version,
    about = "Sparse Cholesky-factor covariance estimation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated simulation over one scenario and one or more dimensions.
    Simulate(SimulateArgs),
    /// QDA classification of a labelled CSV dataset.
    Classify(ClassifyArgs),
    /// Fit one method to a CSV dataset and print the factor.
    Estimate(EstimateArgs),
    /// Check the regression identities of the Cholesky factor on random
    /// positive definite matrices.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct Common {
    /// TOML experiment config; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Comma-separated subset of mband,mlasso,mglik,mgfrob.
    #[arg(long, value_delimiter = ',')]
    methods: Option<Vec<Method>>,
    /// Penalty candidates; a single value fixes the penalty.
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    /// Band candidates; a single value fixes the band.
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long, env = "CHOLCOV_SEED")]
    seed: Option<u64>,
    /// Output directory; results go to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    format: Option<OutputFormat>,
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    scenario: Option<ScenarioKind>,
    /// One or more dimensions, run one after the other.
    #[arg(long, value_delimiter = ',')]
    p: Option<Vec<usize>>,
    #[arg(long)]
    n: Option<usize>,
    /// Nonzero proportion numerator `i` (density `i / p`).
    #[arg(long)]
    density: Option<u32>,
    #[arg(long)]
    replicates: Option<usize>,
    #[arg(long)]
    standardize: bool,
    /// Record wall-clock fit times (output is then no longer reproducible).
    #[arg(long)]
    timing: bool,
    #[arg(long)]
    emit_matrices: bool,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long)]
    header: bool,
    /// `last`, a 0-based index, or a header name.
    #[arg(long)]
    label_column: Option<String>,
    /// `loocv` or `split`.
    #[arg(long)]
    protocol: Option<String>,
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[arg(long)]
    name: Option<String>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    header: bool,
    /// Label column to drop before fitting.
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long, default_value = "mband")]
    method: Method,
    #[arg(long, value_delimiter = ',')]
    lambda_grid: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    k_grid: Option<Vec<usize>>,
    #[arg(long)]
    folds: Option<usize>,
    #[arg(long)]
    standardize: bool,
    /// Write `T T^t` instead of the factor.
    #[arg(long)]
    sigma: bool,
    /// Matrix file to write; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, default_value_t = 100)]
    count: usize,
    #[arg(long, default_value_t = 10)]
    p_max: usize,
    #[arg(long, env = "CHOLCOV_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

fn load_config(path: Option<&PathBuf>) -> Result<ExperimentConfig> {
    match path {
        Some(p) => parse_config(&fs::read_to_string(p).map_err(|e| CliError::Io {
            path: p.clone(),
            source: e,
        })?),
        None => Ok(ExperimentConfig::default()),
    }
}

fn apply_common(config: &mut ExperimentConfig, c: &Common) {
    if let Some(m) = &c.methods {
        config.methods = m.clone();
    }
    if c.lambda_grid.is_some() {
        config.lambda_grid = c.lambda_grid.clone();
    }
    if c.k_grid.is_some() {
        config.k_grid = c.k_grid.clone();
    }
    if let Some(f) = c.folds {
        config.folds = f;
    }
    if c.out.is_some() {
        config.out = c.out.clone();
    }
    if let Some(f) = c.format {
        config.format = f;
    }
}

fn emit<T: serde::Serialize>(rows: &[T], config: &ExperimentConfig, stem: &str) -> Result<()> {
    match &config.out {
        Some(dir) => {
            let path = write_rows(rows, dir, stem, config.format)?;
            eprintln!("wrote {}", path.display());
        }
        None => match config.format {
            OutputFormat::Csv => print!("{}", rows_to_csv(rows)?),
            OutputFormat::Json => println!("{}", serde_json::to_string_pretty(rows)?),
        },
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut config = load_config(args.common.config.as_ref())?;
    apply_common(&mut config, &args.common);
    let base = config.scenario.clone();
    let kind = args
        .scenario
        .or(base.as_ref().map(|s| s.kind))
        .ok_or_else(|| CliError::Config("no scenario given (--scenario or [scenario])".into()))?;
    let dims = args
        .p
        .clone()
        .or_else(|| base.as_ref().map(|s| vec![s.p]))
        .unwrap_or_else(|| vec![30, 100]);
    if let Some(r) = args.replicates {
        config.replicates = r;
    }
    config.standardize |= args.standardize;
    config.timing |= args.timing;
    config.emit_matrices |= args.emit_matrices;

    let mut rows = Vec::new();
    for p in dims {
        let spec = ScenarioSpec {
            kind,
            p,
            density: args.density.or(base.as_ref().and_then(|s| s.density)),
            n: args.n.or(base.as_ref().map(|s| s.n)).unwrap_or(200),
            seed: args
                .common
                .seed
                .or(base.as_ref().map(|s| s.seed))
                .unwrap_or(0),
        };
        let mut run = config.clone();
        run.scenario = Some(spec);
        let outputs = run_simulation(&run)?;
        if run.emit_matrices {
            let dir = run
                .out
                .as_ref()
                .ok_or_else(|| CliError::Config("--emit-matrices needs --out".into()))?;
            write_factors(&outputs, kind.name(), &dir.join(format!("p{p}")))?;
        }
        rows.extend(result_rows(&outputs));
    }
    emit(&rows, &config, "results")
}

fn label_spec(s: &str) -> LabelSpec {
    s.parse()
        .map_or_else(|_| LabelSpec::Name(s.to_owned()), LabelSpec::Index)
}

fn classify(args: ClassifyArgs) -> Result<()> {
    let mut config = load_config(args.common.config.as_ref())?;
    apply_common(&mut config, &args.common);
    let mut dataset = match (config.dataset.take(), &args.data) {
        (_, Some(path)) => DatasetConfig {
            path: path.clone(),
            name: None,
            has_header: args.header,
            label_column: None,
            protocol: Protocol::Loocv,
            seed: 0,
        },
        (Some(d), None) => d,
        (None, None) => {
            return Err(CliError::Config(
                "no dataset given (--data or [dataset])".into(),
            ))
        }
    };
    dataset.has_header |= args.header;
    if let Some(l) = &args.label_column {
        dataset.label_column = Some(label_spec(l));
    }
    match args.protocol.as_deref() {
        None => {}
        Some("loocv") => dataset.protocol = Protocol::Loocv,
        Some("split") => {
            dataset.protocol = Protocol::Split {
                fraction: args.fraction,
            }
        }
        Some(other) => return Err(CliError::Config(format!("unknown protocol {other:?}"))),
    }
    if let Some(s) = args.common.seed {
        dataset.seed = s;
    }
    if args.name.is_some() {
        dataset.name = args.name.clone();
    }
    let name = dataset.display_name();
    let protocol = dataset.protocol;
    config.dataset = Some(dataset);
    let (data, reports) = run_classification(&config)?;
    for r in &reports {
        eprintln!("{:<7} accuracy {:.4}", r.method.name(), r.report.accuracy);
    }
    emit(
        &classification_rows(&name, protocol, &data, &reports),
        &config,
        "classification",
    )
}

fn estimate_cmd(args: EstimateArgs) -> Result<()> {
    let options = CsvOptions {
        has_header: args.header,
        label_column: args
            .label_column
            .as_deref()
            .map(|l| label_spec(l).to_column()),
    };
    let mut data = ingest_csv(&args.data, &options)?;
    if args.standardize {
        data = Standardization::fit(&data)?.apply(&data)?;
    }
    let mut config = ExperimentConfig {
        lambda_grid: args.lambda_grid,
        k_grid: args.k_grid,
        ..Default::default()
    };
    if let Some(f) = args.folds {
        config.folds = f;
    }
    config.validate()?;
    let fit = estimate(&data, &config.estimator(args.method))?;
    eprintln!("{} hyperparameter {}", args.method, fit.hyperparameter);
    let (matrix, kind) = if args.sigma {
        (fit.factor.gram(), "sigma")
    } else {
        (fit.factor.into_dense(), "factor")
    };
    let text = format_matrix(
        &matrix,
        &MatrixHeader::new(data.p(), kind, args.method.name(), ""),
    );
    match args.out {
        Some(path) => fs::write(&path, text).map_err(|e| CliError::Io { path, source: e }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn verify(args: VerifyArgs) -> Result<()> {
    let rows = run_verify(args.count, args.p_max, args.seed)?;
    let worst_prop = rows.iter().map(|r| r.coefficient_identity).fold(0.0, f64::max);
    let worst_app = rows.iter().map(|r| r.recursion_identity).fold(0.0, f64::max);
    let failed = rows
        .iter()
        .filter(|r| !(r.coefficient_identity <= args.tol && r.recursion_identity <= args.tol))
        .count();
    println!("matrices {}  p in 2..={}", rows.len(), args.p_max.max(2));
    println!("coefficient identity   max deviation {worst_prop:.3e}");
    println!("U/L recursion identity max deviation {worst_app:.3e}");
    if failed > 0 {
        return Err(CliError::VerificationFailed {
            failed,
            total: rows.len(),
        });
    }
    Ok(())
}

fn report(err: &CliError) {
    let mut chain = Vec::new();
    let mut source = err.source();
    while let Some(s) = source {
        chain.push(s.to_string());
        source = s.source();
    }
    let payload = serde_json::json!({
        "error": { "kind": err.kind(), "message": err.to_string(), "causes": chain }
    });
    eprintln!("{payload}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Classify(a) => classify(a),
        Command::Estimate(a) => estimate_cmd(a),
        Command::Verify(a) => verify(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}
