use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use picklab::extremal::{
    boundary_explorer, candidate_interpolant, dual_extremal_search, quotient_norm_estimate, DualOptions,
};
use picklab::modulus::{modulus_search, ModulusOptions};
use picklab::oracles::{
    agler_feasible_2d, extremal_norm_1d, pick_1d_tol, sample_schur, schur_interpolant_1d, AglerOptions,
    AglerOutcome, SchurExpr,
};
use picklab::pick::{check_interpolation, CertificateStatus, FamilyKind, FamilyParams, InterpolationData, SearchOptions};
use picklab::torus::{LaurentPolynomial, PolydiscPoint, TorusGrid};

const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Parser, Debug)]
#[command(name = "picklab", version, about = "Pick interpolation on the polydisc: weight-family checks, modulus approximation, extremal duals")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Input file (JSON, or CSV for approx-modulus).
    #[arg(long, global = true)]
    input: Option<PathBuf>,
    /// Output JSON path; stdout when absent.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Weights to try (check, extremal-norm) or correction degree (dual-search, boundary-explore).
    #[arg(long, global = true)]
    budget: Option<usize>,
    /// Truncation degree D of kernel grams.
    #[arg(long, global = true, default_value_t = 24)]
    degree: u32,
    #[arg(long, global = true, default_value_t = 1e-9, allow_negative_numbers = true)]
    tol: f64,
    /// Grid resolution per axis, comma separated (one value is repeated on every axis).
    #[arg(long, global = true, value_delimiter = ',')]
    grid: Option<Vec<usize>>,
    #[arg(long = "radius-R", global = true)]
    radius_r: Option<f64>,
    #[arg(long, global = true, value_enum, default_value_t = Family::Both)]
    family: Family,
    #[arg(long, global = true, env = "PICKLAB_THREADS")]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug, Clone)]
enum Command {
    /// Search the weight families for a Pick matrix that is not PSD.
    Check,
    /// Certified |p|² approximation of positive grid samples (CSV rows i1,...,in,value).
    ApproxModulus {
        #[arg(long, default_value_t = 0.1)]
        epsilon: f64,
    },
    /// Lower bound on the quotient norm of the candidate interpolant.
    ExtremalNorm,
    /// Dual element for extremal data.
    DualSearch,
    /// Dual element plus the E/A/B/S boundary-set report and per-k CSV masks.
    BoundaryExplore {
        #[arg(long, default_value_t = 2)]
        k_min: u32,
        #[arg(long, default_value_t = 10)]
        k_max: u32,
    },
    /// Classical ground-truth solvers.
    Oracle {
        #[command(subcommand)]
        which: OracleCommand,
    },
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum OracleCommand {
    Pick1d,
    Extremal1d,
    Agler2d,
    Sample,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Family {
    #[value(name = "pR")]
    PR,
    Mccullough,
    Both,
}

impl From<Family> for FamilyKind {
    fn from(f: Family) -> Self {
        match f {
            Family::PR => FamilyKind::PR,
            Family::Mccullough => FamilyKind::Mccullough,
            Family::Both => FamilyKind::Both,
        }
    }
}

#[derive(Serialize, Debug, Clone)]
struct RunConfig {
    subcommand: String,
    input: Option<String>,
    output: Option<String>,
    seed: u64,
    budget: usize,
    degree: u32,
    tol: f64,
    grid: Vec<usize>,
    #[serde(rename = "R")]
    radius: f64,
    family: FamilyKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    k_range: Option<[u32; 2]>,
}

#[derive(Debug)]
struct CliError {
    kind: String,
    message: String,
}

impl From<picklab::Error> for CliError {
    fn from(e: picklab::Error) -> Self {
        CliError { kind: e.kind().into(), message: e.to_string() }
    }
}

fn err(kind: &str, message: impl Into<String>) -> CliError {
    CliError { kind: kind.into(), message: message.into() }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Status {
    Success,
    Refuted,
    Undecided,
}

impl Status {
    fn code(self) -> u8 {
        match self {
            Status::Success => 0,
            Status::Refuted => 2,
            Status::Undecided => 3,
        }
    }
}

fn subcommand_name(c: &Command) -> String {
    match c {
        Command::Check => "check".into(),
        Command::ApproxModulus { .. } => "approx-modulus".into(),
        Command::ExtremalNorm => "extremal-norm".into(),
        Command::DualSearch => "dual-search".into(),
        Command::BoundaryExplore { .. } => "boundary-explore".into(),
        Command::Oracle { which } => format!(
            "oracle {}",
            match which {
                OracleCommand::Pick1d => "pick1d",
                OracleCommand::Extremal1d => "extremal1d",
                OracleCommand::Agler2d => "agler2d",
                OracleCommand::Sample => "sample",
            }
        ),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            let body = json!({ "error": { "kind": "usage", "message": e.to_string() } });
            println!("{}", serde_json::to_string_pretty(&body).expect("json"));
            return ExitCode::from(1);
        }
    };
    if let Some(t) = cli.threads {
        if t > 0 {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(t).build_global();
        }
    }
    let mut config = RunConfig {
        subcommand: subcommand_name(&cli.command),
        input: cli.input.as_ref().map(|p| p.display().to_string()),
        output: cli.output.as_ref().map(|p| p.display().to_string()),
        seed: cli.seed,
        budget: 0,
        degree: cli.degree,
        tol: cli.tol,
        grid: vec![],
        radius: cli.radius_r.unwrap_or(1.0),
        family: cli.family.into(),
        epsilon: None,
        k_range: None,
    };
    let (body, status) = match run(&cli, &mut config) {
        Ok((result, status)) => (json!({ "config": config, "result": result }), status),
        Err(e) => {
            eprintln!("picklab: {}: {}", e.kind, e.message);
            (json!({ "config": config, "error": { "kind": e.kind, "message": e.message } }), None)
        }
    };
    let text = serde_json::to_string_pretty(&body).expect("json") + "\n";
    let written = match &cli.output {
        Some(p) => std::fs::write(p, &text).map_err(|e| eprintln!("picklab: cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    };
    match (written, status) {
        (Err(()), _) | (Ok(()), None) => ExitCode::from(1),
        (Ok(()), Some(s)) => ExitCode::from(s.code()),
    }
}

fn read_input(cli: &Cli) -> Result<String, CliError> {
    let path = cli.input.as_ref().ok_or_else(|| err("usage", "--input is required"))?;
    std::fs::read_to_string(path).map_err(|e| err("io", format!("cannot read {}: {e}", path.display())))
}

/// Accepts either the bare payload or a previous run's {"config", "result"} envelope.
fn parse_json<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    let mut v: Value = serde_json::from_str(text).map_err(|e| err("schema", e.to_string()))?;
    if let Some(obj) = v.as_object_mut() {
        if obj.contains_key("config") {
            if let Some(inner) = obj.remove("result") {
                v = inner;
            }
        }
    }
    serde_json::from_value(v).map_err(|e| err("schema", e.to_string()))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("results serialize")
}

fn validate(cli: &Cli) -> Result<(), CliError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(err("usage", "--tol must be positive"));
    }
    if cli.degree == 0 {
        return Err(err("usage", "--degree must be positive"));
    }
    if cli.budget == Some(0) {
        return Err(err("usage", "--budget must be positive"));
    }
    if let Some(g) = &cli.grid {
        if g.is_empty() || g.contains(&0) {
            return Err(err("usage", "--grid entries must be positive"));
        }
    }
    if let Some(r) = cli.radius_r {
        if !(r >= 1.0 && r.is_finite()) {
            return Err(err("usage", "--radius-R must be at least 1"));
        }
    }
    Ok(())
}

fn resolve_grid(cli: &Cli, dim: usize, default: usize) -> Result<TorusGrid, CliError> {
    let res = match &cli.grid {
        None => vec![default; dim],
        Some(g) if g.len() == 1 => vec![g[0]; dim],
        Some(g) if g.len() == dim => g.clone(),
        Some(g) => return Err(err("usage", format!("--grid has {} entries for dimension {dim}", g.len()))),
    };
    Ok(TorusGrid::new(res)?)
}

fn load_data(cli: &Cli, config: &mut RunConfig) -> Result<InterpolationData, CliError> {
    let data: InterpolationData = parse_json(&read_input(cli)?)?;
    finish_data(cli, config, data)
}

fn finish_data(cli: &Cli, config: &mut RunConfig, data: InterpolationData) -> Result<InterpolationData, CliError> {
    let data = match cli.radius_r {
        Some(r) => data.with_radius(r)?,
        None => data,
    };
    config.radius = data.radius();
    Ok(data)
}

#[derive(Deserialize)]
struct DualInput {
    data: InterpolationData,
    #[serde(default)]
    phi: Option<LaurentPolynomial>,
}

#[derive(Deserialize)]
struct SampleInput {
    function: SchurExpr,
    nodes: Vec<PolydiscPoint>,
}

fn run(cli: &Cli, config: &mut RunConfig) -> Result<(Value, Option<Status>), CliError> {
    validate(cli)?;
    match &cli.command {
        Command::Check => {
            let data = load_data(cli, config)?;
            config.budget = cli.budget.unwrap_or(200);
            let family = FamilyParams::new(cli.family.into(), data.dim(), data.radius(), config.budget, cli.seed);
            let opts = SearchOptions { degree: cli.degree, tol: cli.tol, ..SearchOptions::default() };
            let cert = check_interpolation(&data, &family, &opts)?;
            let status = match cert.status {
                CertificateStatus::NoRefutation => Status::Success,
                CertificateStatus::Refuted => Status::Refuted,
            };
            Ok((to_value(&cert), Some(status)))
        }
        Command::ApproxModulus { epsilon } => {
            config.epsilon = Some(*epsilon);
            config.budget = cli.budget.unwrap_or(ModulusOptions::default().max_iterations);
            let (samples, grid) = read_modulus_csv(cli)?;
            config.grid = grid.res().to_vec();
            let opts = ModulusOptions { max_iterations: config.budget, ..ModulusOptions::default() };
            let search = modulus_search(&samples, &grid, config.radius, *epsilon, &opts)?;
            let status = if search.certificate.is_some() { Status::Success } else { Status::Undecided };
            Ok((to_value(&search), Some(status)))
        }
        Command::ExtremalNorm => {
            let data = load_data(cli, config)?;
            config.budget = cli.budget.unwrap_or(64);
            let phi = candidate_interpolant(&data)?;
            let family = FamilyParams::new(cli.family.into(), data.dim(), data.radius(), config.budget, cli.seed);
            let estimate = quotient_norm_estimate(&phi, &data, &family, cli.degree)?;
            let oracle = if data.dim() == 1 && data.targets().iter().any(|w| w.norm() > 0.0) {
                Some(extremal_norm_1d(&data)?)
            } else {
                None
            };
            Ok((json!({ "phi": phi, "estimate": estimate, "extremal_norm_1d": oracle }), Some(Status::Success)))
        }
        Command::DualSearch | Command::BoundaryExplore { .. } => {
            let input: DualInput = parse_json(&read_input(cli)?)?;
            let data = finish_data(cli, config, input.data)?;
            config.budget = cli.budget.unwrap_or(8);
            let grid = resolve_grid(cli, data.dim(), 64)?;
            config.grid = grid.res().to_vec();
            let phi = match input.phi {
                Some(p) => p,
                None => candidate_interpolant(&data)?,
            };
            let samples = grid.values_of(&phi)?;
            let budget = i32::try_from(config.budget).map_err(|_| err("usage", "budget too large"))?;
            let dual = dual_extremal_search(&data, &samples, budget, &grid, &DualOptions::default())?;
            let Command::BoundaryExplore { k_min, k_max } = cli.command else {
                return Ok((json!({ "phi": phi, "dual": dual }), Some(Status::Success)));
            };
            if k_min == 0 || k_min > k_max {
                return Err(err("usage", "need 1 <= --k-min <= --k-max"));
            }
            config.k_range = Some([k_min, k_max]);
            let report = boundary_explorer(&samples, &dual, k_min..=k_max, &grid)?;
            let mut files = vec![];
            if let Some(out) = &cli.output {
                for m in &report.masks {
                    let path = mask_path(out, m.k);
                    let mut w = csv::Writer::from_path(&path).map_err(|e| err("io", e.to_string()))?;
                    w.write_record(["index", "E", "A", "B", "S"]).map_err(|e| err("io", e.to_string()))?;
                    for row in m.csv_rows() {
                        w.serialize(row).map_err(|e| err("io", e.to_string()))?;
                    }
                    w.flush().map_err(|e| err("io", e.to_string()))?;
                    files.push(path.file_name().map(|f| f.to_string_lossy().into_owned()).unwrap_or_default());
                }
            }
            Ok((json!({ "phi": phi, "dual": dual, "report": report, "mask_files": files }), Some(Status::Success)))
        }
        Command::Oracle { which } => run_oracle(cli, config, *which),
    }
}

fn mask_path(output: &Path, k: u32) -> PathBuf {
    let stem = output.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "boundary".into());
    output.with_file_name(format!("{stem}.k{k}.csv"))
}

fn run_oracle(cli: &Cli, config: &mut RunConfig, which: OracleCommand) -> Result<(Value, Option<Status>), CliError> {
    match which {
        OracleCommand::Pick1d => {
            let data = load_data(cli, config)?;
            let pick = pick_1d_tol(&data, cli.tol)?;
            let interpolant = if pick.solvable { schur_interpolant_1d(&data).ok() } else { None };
            let status = if pick.solvable { Status::Success } else { Status::Refuted };
            Ok((json!({ "pick": pick, "interpolant": interpolant }), Some(status)))
        }
        OracleCommand::Extremal1d => {
            let data = load_data(cli, config)?;
            Ok((json!({ "extremal_norm": extremal_norm_1d(&data)? }), Some(Status::Success)))
        }
        OracleCommand::Agler2d => {
            let data = load_data(cli, config)?;
            config.budget = cli.budget.unwrap_or(AglerOptions::default().max_iterations);
            let opts = AglerOptions { tol: cli.tol, max_iterations: config.budget, ..AglerOptions::default() };
            let out = agler_feasible_2d(&data, &opts)?;
            let status = match out {
                AglerOutcome::Feasible { .. } => Status::Success,
                AglerOutcome::Infeasible { .. } => Status::Refuted,
                AglerOutcome::Undecided { .. } => Status::Undecided,
            };
            Ok((to_value(&out), Some(status)))
        }
        OracleCommand::Sample => {
            let input: SampleInput = parse_json(&read_input(cli)?)?;
            let data = sample_schur(&input.function, input.nodes)?;
            let data = finish_data(cli, config, data)?;
            Ok((to_value(&data), Some(Status::Success)))
        }
    }
}

/// Rows "i1,...,in,value" with θ-indices; the grid is --grid or one past the largest index.
fn read_modulus_csv(cli: &Cli) -> Result<(Vec<f64>, TorusGrid), CliError> {
    let text = read_input(cli)?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let mut rows: Vec<(Vec<usize>, f64)> = vec![];
    for (line, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| err("schema", e.to_string()))?;
        if rec.len() < 2 {
            return Err(err("schema", format!("row {} needs indices and a value", line + 1)));
        }
        let parsed: Option<(Vec<usize>, f64)> = (|| {
            let idx = rec.iter().take(rec.len() - 1).map(|s| s.parse().ok()).collect::<Option<Vec<usize>>>()?;
            Some((idx, rec[rec.len() - 1].parse().ok()?))
        })();
        match parsed {
            Some(r) => rows.push(r),
            None if line == 0 => continue,
            None => return Err(err("schema", format!("row {} is not numeric", line + 1))),
        }
    }
    let dim = rows.first().map(|r| r.0.len()).ok_or_else(|| err("schema", "no samples"))?;
    if rows.iter().any(|r| r.0.len() != dim) {
        return Err(err("schema", "rows have different numbers of indices"));
    }
    let inferred: Vec<usize> = (0..dim).map(|l| rows.iter().map(|r| r.0[l]).max().unwrap_or(0) + 1).collect();
    let grid = match &cli.grid {
        None => TorusGrid::new(inferred)?,
        Some(_) => resolve_grid(cli, dim, 0)?,
    };
    if rows.len() != grid.len() {
        return Err(err("schema", format!("{} samples for a grid of {} nodes", rows.len(), grid.len())));
    }
    let mut samples = vec![f64::NAN; grid.len()];
    for (idx, v) in rows {
        if idx.iter().zip(grid.res()).any(|(i, m)| i >= m) {
            return Err(err("schema", format!("index {idx:?} outside the grid")));
        }
        let flat = grid.flat_index(&idx);
        if !samples[flat].is_nan() {
            return Err(err("schema", format!("duplicate sample at {idx:?}")));
        }
        samples[flat] = v;
    }
    Ok((samples, grid))
}
