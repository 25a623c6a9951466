//! Batch front end: reads algebra, unitary and Hamiltonian specs from JSON
//! files and writes JSON reports or CSV tables.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use gaac_core::io::{descriptor_from_json, hamiltonian_from_json, matrix_from_json};
use gaac_core::{
    build_algebra_with, chaoticity, closed_form, fluctuation_scan, gaac, gaac_distance_oracle, gaac_omega_oracle,
    grid_time_average, haar_average_mc, haar_unitary, nrc_upper_bound, scrambling_witness, time_average_exact,
    time_average_nrc, AlgebraDescriptor64, ClosedFormCase, HamiltonianModel64, OperatorAlgebra64, OperatorMatrix64,
    RandomSeed, Settings,
};
use serde_json::{json, Map, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Parser)]
#[command(name = "gaac", version, about = "Geometric algebra anti-correlator of unitary channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Dimensions, block structure and verification residuals of an algebra.
    Inspect(InspectArgs),
    /// GAAC of one unitary.
    Gaac(GaacArgs),
    /// Haar-averaged GAAC, analytic and Monte-Carlo, one row per algebra.
    Haar(HaarArgs),
    /// Infinite-time average under a Hamiltonian.
    TimeAverage(TimeArgs),
    /// Chaoticity and temporal fluctuations.
    Chaos(ChaosArgs),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum)]
pub enum Format {
    #[default]
    Json,
    Csv,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Relative rank tolerance for subspace decisions.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Write here instead of stdout (atomic replace).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    #[arg(long)]
    pub algebra: PathBuf,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct GaacArgs {
    #[arg(long)]
    pub algebra: PathBuf,
    /// Unitary matrix file.
    #[arg(long, group = "source")]
    pub unitary: Option<PathBuf>,
    /// Draw a Haar unitary from `--seed`.
    #[arg(long, group = "source")]
    pub haar: bool,
    /// Hamiltonian file; the unitary is exp(-iHt) with `--time`.
    #[arg(long, group = "source")]
    pub hamiltonian: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub time: Option<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct HaarArgs {
    /// Algebra file; repeat for several rows.
    #[arg(long, required = true)]
    pub algebra: Vec<PathBuf>,
    /// Substitute these values of `d` into a single-parameter algebra.
    #[arg(long, value_delimiter = ',')]
    pub dims: Vec<usize>,
    #[arg(long, default_value_t = 500)]
    pub samples: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct TimeArgs {
    #[arg(long)]
    pub algebra: PathBuf,
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Also evaluate the grid oracle with horizon T and M points.
    #[arg(long, num_args = 2, value_names = ["T", "M"])]
    pub grid: Option<Vec<String>>,
    /// Require the collinear upper bound; fails on non-collinear algebras.
    #[arg(long)]
    pub bound: bool,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct ChaosArgs {
    #[arg(long)]
    pub algebra: PathBuf,
    #[arg(long)]
    pub hamiltonian: PathBuf,
    /// Sample times t = jT/M for the fluctuation scan.
    #[arg(long, num_args = 2, value_names = ["T", "M"])]
    pub grid: Option<Vec<String>>,
    /// Thresholds for the fluctuation scan.
    #[arg(long, value_delimiter = ',')]
    pub epsilon: Vec<f64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Core(gaac_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use gaac_core::Error as E;
        match self {
            CliError::Input(_) => 2,
            CliError::Core(e) => match e {
                E::Parse(_) | E::Shape(_) | E::ScalarReduction => 2,
                E::Decomposition(_) | E::Degeneracy(_) => 3,
                E::Validation(_) => 4,
                E::Domain(_) | E::UndefinedMetric(_) | E::Resource { .. } => 5,
                E::Internal(_) => 1,
            },
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl From<gaac_core::Error> for CliError {
    fn from(e: gaac_core::Error) -> Self {
        CliError::Core(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn settings(common: &Common) -> Result<Settings> {
    match common.tol {
        Some(t) if !(t > 0.0 && t < 1.0) => Err(CliError::Input(format!("--tol must lie in (0, 1), got {t}"))),
        Some(t) => Ok(Settings::default().with_rank_tolerance(t)),
        None => Ok(Settings::default()),
    }
}

fn load_algebra(path: &Path, settings: &Settings) -> Result<(AlgebraDescriptor64, OperatorAlgebra64)> {
    let desc: AlgebraDescriptor64 = descriptor_from_json(&read_json(path)?)?;
    let alg = build_algebra_with(&desc, settings)?;
    Ok((desc, alg))
}

fn load_hamiltonian(path: &Path, settings: &Settings) -> Result<HamiltonianModel64> {
    Ok(hamiltonian_from_json(&read_json(path)?, settings.tol.resonance)?)
}

fn parse_grid(grid: &Option<Vec<String>>) -> Result<Option<(f64, usize)>> {
    let Some(g) = grid else { return Ok(None) };
    let t: f64 = g[0].parse().map_err(|_| CliError::Input(format!("grid horizon {:?} is not a number", g[0])))?;
    let m: usize = g[1].parse().map_err(|_| CliError::Input(format!("grid size {:?} is not a count", g[1])))?;
    if !(t > 0.0) || m == 0 {
        return Err(CliError::Input("--grid needs T > 0 and M ≥ 1".into()));
    }
    Ok(Some((t, m)))
}

fn require_seed(seed: Option<u64>) -> Result<u64> {
    seed.ok_or_else(|| CliError::Input("--seed is required for stochastic commands".into()))
}

fn algebra_json(alg: &OperatorAlgebra64) -> Value {
    json!({
        "dim": alg.dim,
        "dim_a": alg.dim_a(),
        "dim_aprime": alg.dim_aprime(),
        "blocks": alg.blocks.pairs,
        "collinear": alg.blocks.collinear,
        "lambda": alg.blocks.lambda.map(|l| format!("{}/{}", l.numer(), l.denom())),
        "fingerprint": alg.fingerprint(),
    })
}

fn header(command: &str) -> Map<String, Value> {
    let mut m = Map::new();
    m.insert("tool".into(), json!("gaac"));
    m.insert("version".into(), json!(VERSION));
    m.insert("command".into(), json!(command));
    m
}

/// Output of one command: a JSON document and its CSV rendering.
pub struct Output {
    pub json: Value,
    pub rows: Vec<Map<String, Value>>,
}

impl Output {
    fn single(json: Map<String, Value>) -> Self {
        let row = flatten(&json);
        Output { json: Value::Object(json), rows: vec![row] }
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).map_err(|e| CliError::Input(e.to_string()))?;
                s.push('\n');
                Ok(s.into_bytes())
            }
            Format::Csv => csv_bytes(&self.rows),
        }
    }
}

/// Scalar leaves of a JSON object with dotted keys; arrays become `;`-joined strings.
fn flatten(obj: &Map<String, Value>) -> Map<String, Value> {
    fn walk(prefix: &str, v: &Value, out: &mut Map<String, Value>) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let key = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&key, x, out);
                }
            }
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(cell).collect();
                out.insert(prefix.to_string(), Value::String(parts.join(";")));
            }
            other => {
                out.insert(prefix.to_string(), other.clone());
            }
        }
    }
    let mut out = Map::new();
    walk("", &Value::Object(obj.clone()), &mut out);
    out
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Array(items) => items.iter().map(cell).collect::<Vec<_>>().join("x"),
        other => other.to_string(),
    }
}

fn csv_bytes(rows: &[Map<String, Value>]) -> Result<Vec<u8>> {
    let mut columns: Vec<String> = Vec::new();
    for row in rows {
        for k in row.keys() {
            if !columns.contains(k) {
                columns.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    let io_err = |e: csv::Error| CliError::Input(e.to_string());
    w.write_record(&columns).map_err(io_err)?;
    for row in rows {
        let record: Vec<String> = columns.iter().map(|c| row.get(c).map(cell).unwrap_or_default()).collect();
        w.write_record(&record).map_err(io_err)?;
    }
    w.into_inner().map_err(|e| CliError::Input(e.to_string()))
}

pub fn run_inspect(args: &InspectArgs) -> Result<Output> {
    let settings = settings(&args.common)?;
    let (desc, alg) = load_algebra(&args.algebra, &settings)?;
    let mut out = header("inspect");
    out.insert("kind".into(), json!(desc.kind()));
    out.insert("algebra".into(), algebra_json(&alg));
    out.insert("residuals".into(), serde_json::to_value(alg.residuals).map_err(|e| CliError::Input(e.to_string()))?);
    Ok(Output::single(out))
}

pub fn run_gaac(args: &GaacArgs) -> Result<Output> {
    let settings = settings(&args.common)?;
    let (desc, alg) = load_algebra(&args.algebra, &settings)?;
    let mut out = header("gaac");
    let u: OperatorMatrix64 = if let Some(path) = &args.unitary {
        out.insert("source".into(), json!({ "unitary": path.display().to_string() }));
        matrix_from_json(&read_json(path)?)?
    } else if args.haar {
        let seed = require_seed(args.seed)?;
        out.insert("source".into(), json!({ "haar_seed": seed }));
        haar_unitary(alg.dim, RandomSeed::new(seed, 0))
    } else if let Some(path) = &args.hamiltonian {
        let t = args.time.ok_or_else(|| CliError::Input("--hamiltonian needs --time".into()))?;
        let model = load_hamiltonian(path, &settings)?;
        if model.dim() != alg.dim {
            return Err(gaac_core::Error::Shape(format!(
                "Hamiltonian of dimension {} on an algebra of dimension {}",
                model.dim(),
                alg.dim
            ))
            .into());
        }
        out.insert("source".into(), json!({ "hamiltonian": path.display().to_string(), "time": t }));
        model.evolution(t)
    } else {
        return Err(CliError::Input("one of --unitary, --haar or --hamiltonian is required".into()));
    };

    let report = gaac(&alg, &u)?;
    let mut routes = Map::new();
    if alg.dim <= settings.superop_cap {
        let omega = gaac_omega_oracle(&alg, &u)?;
        let distance = gaac_distance_oracle(&alg, &u)?;
        routes.insert("omega_overlap".into(), json!(omega));
        routes.insert("projector_distance".into(), json!(distance));
        routes.insert(
            "max_route_residual".into(),
            json!((report.value - omega).abs().max((report.value - distance).abs())),
        );
    }
    if let Some(case) = ClosedFormCase::for_descriptor(&desc) {
        routes.insert("closed_form".into(), json!(closed_form(&case, &u)?));
    }
    out.insert("algebra".into(), algebra_json(&alg));
    out.insert("report".into(), serde_json::to_value(&report).map_err(|e| CliError::Input(e.to_string()))?);
    out.insert("cross_routes".into(), Value::Object(routes));
    Ok(Output::single(out))
}

fn with_dim(desc: &AlgebraDescriptor64, d: usize) -> Result<AlgebraDescriptor64> {
    Ok(match desc {
        AlgebraDescriptor64::Diagonal { .. } => AlgebraDescriptor64::Diagonal { d },
        AlgebraDescriptor64::SymmetricSwap { .. } => AlgebraDescriptor64::SymmetricSwap { d },
        AlgebraDescriptor64::GroupZ2 { .. } => AlgebraDescriptor64::GroupZ2 { d },
        other => {
            return Err(CliError::Input(format!(
                "--dims needs an algebra with a single parameter d, not {:?}",
                other.kind()
            )))
        }
    })
}

pub fn run_haar(args: &HaarArgs) -> Result<Output> {
    let settings = settings(&args.common)?;
    let seed = require_seed(args.seed)?;
    if args.samples < 2 {
        return Err(CliError::Input(format!("--samples must be at least 2, got {}", args.samples)));
    }
    let mut descs = Vec::new();
    for path in &args.algebra {
        let desc: AlgebraDescriptor64 = descriptor_from_json(&read_json(path)?)?;
        if args.dims.is_empty() {
            descs.push(desc);
        } else {
            for &d in &args.dims {
                descs.push(with_dim(&desc, d)?);
            }
        }
    }
    let mut rows = Vec::new();
    let mut entries = Vec::new();
    for desc in &descs {
        let alg = build_algebra_with(desc, &settings)?;
        let s = haar_average_mc(&alg, args.samples, RandomSeed::new(seed, 0))?;
        let mut row = Map::new();
        row.insert("dim".into(), json!(s.dim));
        row.insert("d_Aprime".into(), json!(s.dim_aprime));
        row.insert("analytic".into(), json!(s.analytic_mean));
        row.insert("mc_mean".into(), json!(s.mc_mean));
        row.insert("mc_std".into(), json!(s.mc_std));
        row.insert("samples".into(), json!(s.samples));
        row.insert("seed".into(), json!(seed));
        row.insert("standard_error".into(), json!(s.standard_error()));
        row.insert("min".into(), json!(s.min));
        row.insert("max".into(), json!(s.max));
        row.insert("upper_bound".into(), json!(s.upper_bound));
        row.insert("kind".into(), json!(desc.kind()));
        row.insert("fingerprint".into(), json!(alg.fingerprint()));
        row.insert("version".into(), json!(VERSION));
        entries.push(Value::Object(row.clone()));
        rows.push(row);
    }
    let mut out = header("haar");
    out.insert("rows".into(), Value::Array(entries));
    Ok(Output { json: Value::Object(out), rows })
}

fn model_json(model: &HamiltonianModel64) -> Value {
    json!({
        "dim": model.dim(),
        "nrc": model.nrc,
        "degenerate": model.degenerate,
        "near_resonances": model.near_resonances,
        "min_class_gap": model.min_class_gap(),
    })
}

pub fn run_time_average(args: &TimeArgs) -> Result<Output> {
    let settings = settings(&args.common)?;
    let (_, alg) = load_algebra(&args.algebra, &settings)?;
    let model = load_hamiltonian(&args.hamiltonian, &settings)?;
    let grid = parse_grid(&args.grid)?;
    let exact = time_average_exact(&alg, &model)?;
    let formula = time_average_nrc(&alg, &model)?;
    let haar = gaac_core::haar_average_analytic(&alg);
    let mut out = header("time-average");
    out.insert("algebra".into(), algebra_json(&alg));
    out.insert("hamiltonian".into(), model_json(&model));
    out.insert("exact".into(), json!(exact));
    out.insert("nrc_formula".into(), json!(formula));
    out.insert("nrc_certified".into(), json!(model.nrc));
    out.insert("haar_mean".into(), json!(haar));
    out.insert("epsilon".into(), json!(if haar > 0.0 { Some(1.0 - exact / haar) } else { None }));
    if args.bound || alg.blocks.collinear {
        let w = scrambling_witness(&alg, &model)?;
        out.insert("nrc_bound".into(), json!(nrc_upper_bound(&alg)?));
        out.insert("witness".into(), json!({ "commutant_side": w.commutant_side, "algebra_side": w.algebra_side }));
    }
    if let Some((t, m)) = grid {
        out.insert("grid".into(), json!({ "horizon": t, "points": m, "value": grid_time_average(&alg, &model, t, m)? }));
    }
    Ok(Output::single(out))
}

pub fn run_chaos(args: &ChaosArgs) -> Result<Output> {
    let settings = settings(&args.common)?;
    let (_, alg) = load_algebra(&args.algebra, &settings)?;
    let model = load_hamiltonian(&args.hamiltonian, &settings)?;
    let c = chaoticity(&alg, &model)?;
    let mut out = header("chaos");
    out.insert("algebra".into(), algebra_json(&alg));
    out.insert("hamiltonian".into(), model_json(&model));
    out.insert("epsilon".into(), json!(c.epsilon));
    out.insert("time_average".into(), json!(c.time_average));
    out.insert("haar_mean".into(), json!(c.haar_average));
    out.insert("dephased_purity".into(), json!(c.dephased_purity));
    if let Some((t, m)) = parse_grid(&args.grid)? {
        if args.epsilon.is_empty() {
            return Err(CliError::Input("--grid in chaos needs --epsilon values".into()));
        }
        let times: Vec<f64> = (1..=m).map(|j| j as f64 * t / m as f64).collect();
        let rows = fluctuation_scan(&alg, &model, &times, &args.epsilon)?;
        out.insert(
            "fluctuations".into(),
            Value::Array(
                rows.iter()
                    .map(|r| json!({ "epsilon": r.epsilon, "frequency": r.frequency, "markov_bound": r.markov_bound }))
                    .collect(),
            ),
        );
    }
    Ok(Output::single(out))
}

/// Replaces `path` through a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Inspect(a) => &a.common,
        Command::Gaac(a) => &a.common,
        Command::Haar(a) => &a.common,
        Command::TimeAverage(a) => &a.common,
        Command::Chaos(a) => &a.common,
    }
}

/// Runs a parsed command and returns the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let result = match &cli.command {
        Command::Inspect(a) => run_inspect(a),
        Command::Gaac(a) => run_gaac(a),
        Command::Haar(a) => run_haar(a),
        Command::TimeAverage(a) => run_time_average(a),
        Command::Chaos(a) => run_chaos(a),
    };
    let common = common(&cli.command);
    let bytes = match result.and_then(|o| o.render(common.format)) {
        Ok(b) => b,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let written = match &common.out {
        Some(path) => write_atomic(path, &bytes),
        None => std::io::stdout().lock().write_all(&bytes),
    };
    match written {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: cannot write output: {e}");
            2
        }
    }
}

/// Sizes the global worker pool from `SCRAMBLE_THREADS`, if set.
pub fn configure_threads() -> std::result::Result<(), String> {
    let Ok(raw) = std::env::var("SCRAMBLE_THREADS") else { return Ok(()) };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| format!("SCRAMBLE_THREADS must be a positive integer, got {raw:?}"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}
