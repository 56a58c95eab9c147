//! `qswitch`: catalog dumps, witness optimization, probability tables,
//! experiment emulation, visibility sweeps and causal tomography.
//!
//! Exit codes: 0 success, 1 configuration error, 2 solver
//! non-convergence, 3 I/O failure. All randomized commands require an
//! explicit `--seed`; payloads are bit-reproducible for a fixed seed and
//! configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use qswitch::born::{causal_tomography, probability_table};
use qswitch::catalog::{self, Catalog};
use qswitch::emulator::{
    run_emulated_experiment, visibility_sweep_emulated, visibility_sweep_ideal, DriftModel,
    EfficiencyModel, NoiseConfig, SweepResult,
};
use qswitch::process::{dephase_control, switch_matrix, ProcessMatrix};
use qswitch::schema::{csv_float, EmulationReport, MatrixFile, WitnessReport, SCHEMA_VERSION};
use qswitch::witness::{optimal_witness, restricted_witness};

#[derive(Parser)]
#[command(name = "qswitch", version, about = "Quantum-switch process toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump the operator catalog (unitaries, waveplate settings, ranks)
    Catalog(CatalogArgs),
    /// Compute an optimal or experimentally restricted causal witness
    Witness(WitnessArgs),
    /// Emit the full 1440-term outcome probability table
    Table(TableArgs),
    /// Run the noisy experiment emulation
    Emulate(EmulateArgs),
    /// Sweep the witness value over control visibilities
    Sweep(SweepArgs),
    /// Reconstruct the accessible part of a process from its probabilities
    Tomo(TomoArgs),
}

#[derive(Args)]
struct ProcessSource {
    /// Use the quantum switch process matrix
    #[arg(long)]
    switch: bool,
    /// Read the process matrix from a JSON file
    #[arg(long, value_name = "FILE")]
    input: Option<PathBuf>,
    /// Dephase the control qubit to this visibility before use
    #[arg(long)]
    visibility: Option<f64>,
}

#[derive(Args)]
struct CatalogArgs {
    /// Output path (stdout when omitted)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[command(flatten)]
    source: ProcessSource,
    /// Optimize over the experimentally accessible witness span
    #[arg(long)]
    restricted: bool,
    /// Optimize over all witnesses
    #[arg(long)]
    optimal: bool,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TableArgs {
    #[command(flatten)]
    source: ProcessSource,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EmulateArgs {
    /// Random seed (required; no wall-clock default)
    #[arg(long)]
    seed: Option<u64>,
    /// Interference visibility
    #[arg(long)]
    visibility: Option<f64>,
    /// Waveplate miscalibration sigma in degrees
    #[arg(long)]
    wp_sigma: Option<f64>,
    /// Expected counts per setting
    #[arg(long)]
    counts: Option<f64>,
    /// Witness coefficients file (JSON array or a witness report); when
    /// omitted, the restricted witness of the ideal switch is solved first
    #[arg(long, value_name = "FILE")]
    alpha: Option<PathBuf>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    /// "ideal" (analytic, noise-free) or "emulated"
    #[arg(long, default_value = "ideal")]
    mode: String,
    /// Number of evenly spaced visibility points in [0, 1]
    #[arg(long, default_value_t = 11)]
    points: usize,
    /// Random seed (required in emulated mode)
    #[arg(long)]
    seed: Option<u64>,
    /// Waveplate miscalibration sigma in degrees (emulated mode)
    #[arg(long)]
    wp_sigma: Option<f64>,
    /// Expected counts per setting (emulated mode)
    #[arg(long)]
    counts: Option<f64>,
    /// Witness coefficients file; solved from the ideal switch if omitted
    #[arg(long, value_name = "FILE")]
    alpha: Option<PathBuf>,
    /// JSON config file; explicit flags override its values
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Write plot-ready CSV points here (fit summary goes to stdout)
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TomoArgs {
    #[command(flatten)]
    source: ProcessSource,
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

enum Failure {
    Config(String),
    Solver(String),
    Io(String),
}

impl Failure {
    fn exit_code(&self) -> ExitCode {
        match self {
            Failure::Config(_) => ExitCode::from(1),
            Failure::Solver(_) => ExitCode::from(2),
            Failure::Io(_) => ExitCode::from(3),
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Solver(m) | Failure::Io(m) => m,
        }
    }
}

fn lift(err: qswitch::Error) -> Failure {
    match err {
        qswitch::Error::SolverStalled { iterations, residual } => Failure::Solver(format!(
            "solver did not converge after {iterations} iterations (residual {residual:.3e})"
        )),
        other => Failure::Config(other.to_string()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help and version are not errors
            use clap::error::ErrorKind;
            let kind = e.kind();
            let _ = e.print();
            return if matches!(kind, ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            };
        }
    };
    let result = match cli.command {
        Command::Catalog(args) => cmd_catalog(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Table(args) => cmd_table(args),
        Command::Emulate(args) => cmd_emulate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Tomo(args) => cmd_tomo(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            f.exit_code()
        }
    }
}

// ---------------------------------------------------------------------------
// output plumbing

/// Write via a sibling temp file and rename, so readers never observe a
/// partial file.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let io = |e: std::io::Error| Failure::Io(format!("{}: {e}", path.display()));
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    std::fs::write(&tmp, bytes).map_err(io)?;
    std::fs::rename(&tmp, path).map_err(|e| {
        let _ = std::fs::remove_file(&tmp);
        io(e)
    })
}

fn emit(out: &Option<PathBuf>, payload: &str) -> Result<(), Failure> {
    match out {
        Some(path) => {
            let mut bytes = payload.as_bytes().to_vec();
            if bytes.last() != Some(&b'\n') {
                bytes.push(b'\n');
            }
            write_atomic(path, &bytes)
        }
        None => {
            println!("{payload}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<String, Failure> {
    serde_json::to_string_pretty(value).map_err(|e| Failure::Io(e.to_string()))
}

fn read_file(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

// ---------------------------------------------------------------------------
// shared inputs

fn load_process(source: &ProcessSource) -> Result<ProcessMatrix, Failure> {
    let base = match (source.switch, &source.input) {
        (true, None) => switch_matrix(),
        (false, Some(path)) => {
            let text = read_file(path)?;
            let op = MatrixFile::from_json(&text)
                .and_then(|f| f.to_operator())
                .map_err(lift)?;
            ProcessMatrix::new(op).map_err(lift)?
        }
        (true, Some(_)) => {
            return Err(Failure::Config("pass either --switch or --input, not both".into()))
        }
        (false, None) => {
            return Err(Failure::Config("a process is required: pass --switch or --input FILE".into()))
        }
    };
    match source.visibility {
        None => Ok(base),
        Some(v) => dephase_control(&base, v).map_err(lift),
    }
}

fn load_alpha(path: &Path) -> Result<Vec<f64>, Failure> {
    let text = read_file(path)?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Failure::Config(format!("{}: {e}", path.display())))?;
    let arr = match &value {
        serde_json::Value::Array(a) => a,
        serde_json::Value::Object(o) => o
            .get("alpha")
            .and_then(|v| v.as_array())
            .ok_or_else(|| Failure::Config("alpha file object lacks an `alpha` array".into()))?,
        _ => return Err(Failure::Config("alpha file must be an array or a witness report".into())),
    };
    let coeffs: Option<Vec<f64>> = arr.iter().map(|v| v.as_f64()).collect();
    let coeffs = coeffs.ok_or_else(|| Failure::Config("alpha entries must be numbers".into()))?;
    if coeffs.len() != catalog::N_TERMS {
        return Err(Failure::Config(format!(
            "alpha has {} entries, expected {}",
            coeffs.len(),
            catalog::N_TERMS
        )));
    }
    Ok(coeffs)
}

fn solve_alpha(path: &Option<PathBuf>) -> Result<Vec<f64>, Failure> {
    match path {
        Some(p) => load_alpha(p),
        None => {
            let cat = Catalog::build().map_err(lift)?;
            let res = restricted_witness(&switch_matrix(), &cat).map_err(lift)?;
            Ok(res.alpha.expect("restricted solve carries coefficients"))
        }
    }
}

// ---------------------------------------------------------------------------
// commands

#[derive(Serialize)]
struct CatalogDump {
    schema_version: u32,
    alice_measurement_unitaries: Vec<Vec<Vec<[f64; 2]>>>,
    alice_repreparation_unitaries: Vec<Vec<Vec<[f64; 2]>>>,
    bob_unitaries: Vec<Vec<Vec<[f64; 2]>>>,
    alice_measurement_waveplates: Vec<Vec<catalog::WaveplateSetting>>,
    alice_repreparation_waveplates: Vec<Vec<catalog::WaveplateSetting>>,
    bob_waveplates: Vec<Vec<catalog::WaveplateSetting>>,
    mr_channel_count: usize,
    mr_outcome_cj_count: usize,
    mr_rank: usize,
    bob_rank: usize,
    n_settings: usize,
    n_terms: usize,
}

fn matrix_entries(m: &qswitch::CMat) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| [m[(r, c)].re, m[(r, c)].im]).collect())
        .collect()
}

fn cmd_catalog(args: CatalogArgs) -> Result<(), Failure> {
    let cat = Catalog::build().map_err(lift)?;
    let dump = CatalogDump {
        schema_version: SCHEMA_VERSION,
        alice_measurement_unitaries: catalog::alice_meas_unitaries()
            .iter()
            .map(matrix_entries)
            .collect(),
        alice_repreparation_unitaries: catalog::alice_reprep_unitaries()
            .iter()
            .map(matrix_entries)
            .collect(),
        bob_unitaries: catalog::bob_unitaries().iter().map(matrix_entries).collect(),
        alice_measurement_waveplates: catalog::alice_meas_waveplates(),
        alice_repreparation_waveplates: catalog::alice_reprep_waveplates(),
        bob_waveplates: catalog::bob_waveplates(),
        mr_channel_count: cat.mr_channel_count(),
        mr_outcome_cj_count: cat.mr_cj.len() * 2,
        mr_rank: cat.mr_rank(),
        bob_rank: cat.bob_rank(),
        n_settings: catalog::N_SETTINGS,
        n_terms: catalog::N_TERMS,
    };
    emit(&args.out, &to_json(&dump)?)
}

fn cmd_witness(args: WitnessArgs) -> Result<(), Failure> {
    let restricted = match (args.restricted, args.optimal) {
        (true, false) => true,
        (false, true) => false,
        _ => {
            return Err(Failure::Config(
                "pass exactly one of --restricted or --optimal".into(),
            ))
        }
    };
    let w = load_process(&args.source)?;
    let result = if restricted {
        let cat = Catalog::build().map_err(lift)?;
        restricted_witness(&w, &cat).map_err(lift)?
    } else {
        optimal_witness(&w).map_err(lift)?
    };
    let report = WitnessReport::new(&result, restricted).map_err(lift)?;
    emit(&args.out, &to_json(&report)?)
}

fn cmd_table(args: TableArgs) -> Result<(), Failure> {
    let w = load_process(&args.source)?;
    let cat = Catalog::build().map_err(lift)?;
    let table = probability_table(&cat, &w).map_err(lift)?;
    let mut text = String::from("z,x,y,a,d,p\n");
    for z in 0..catalog::N_INPUTS {
        for x in 0..catalog::N_ALICE_SETTINGS {
            for y in 0..catalog::N_BOB_SETTINGS {
                for a in 0..2 {
                    for d in 0..2 {
                        let p = table.entry(z, x, y, a, d);
                        text.push_str(&format!("{z},{x},{y},{a},{d},{}\n", csv_float(p)));
                    }
                }
            }
        }
    }
    emit(&args.out, text.trim_end())
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct EmulateConfig {
    visibility: Option<f64>,
    wp_sigma_deg: Option<f64>,
    counts_per_setting: Option<f64>,
    seed: Option<u64>,
    drift: Option<DriftModel>,
    efficiency: Option<EfficiencyModel>,
}

fn load_emulate_config(path: &Option<PathBuf>) -> Result<EmulateConfig, Failure> {
    match path {
        None => Ok(EmulateConfig::default()),
        Some(p) => {
            let text = read_file(p)?;
            serde_json::from_str(&text)
                .map_err(|e| Failure::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn cmd_emulate(args: EmulateArgs) -> Result<(), Failure> {
    let cfg = load_emulate_config(&args.config)?;
    let seed = args
        .seed
        .or(cfg.seed)
        .ok_or_else(|| Failure::Config("emulate requires an explicit --seed".into()))?;
    let noise = NoiseConfig {
        visibility: args.visibility.or(cfg.visibility).unwrap_or(0.9539),
        wp_sigma_deg: args.wp_sigma.or(cfg.wp_sigma_deg).unwrap_or(3.0),
        counts_per_setting: args.counts.or(cfg.counts_per_setting).unwrap_or(7500.0),
        seed,
    };
    let drift = cfg.drift.unwrap_or_default();
    let eff = cfg.efficiency.unwrap_or_else(EfficiencyModel::ideal);
    let alpha = solve_alpha(&args.alpha)?;
    let run = run_emulated_experiment(&alpha, &noise, &drift, &eff).map_err(lift)?;
    let report = EmulationReport {
        schema_version: SCHEMA_VERSION,
        value: run.value,
        cns: run.cns,
        error: run.error,
        noise,
        drift,
        efficiency: eff,
    };
    emit(&args.out, &to_json(&report)?)
}

#[derive(Serialize)]
struct SweepReport {
    schema_version: u32,
    mode: String,
    slope: f64,
    intercept: f64,
    r_squared: f64,
    crossing: Option<f64>,
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Failure> {
    if args.points < 2 {
        return Err(Failure::Config("--points must be at least 2".into()));
    }
    let vis: Vec<f64> =
        (0..args.points).map(|i| i as f64 / (args.points - 1) as f64).collect();
    let alpha = solve_alpha(&args.alpha)?;
    let sweep: SweepResult = match args.mode.as_str() {
        "ideal" => visibility_sweep_ideal(&alpha, &vis).map_err(lift)?,
        "emulated" => {
            let cfg = load_emulate_config(&args.config)?;
            let seed = args
                .seed
                .or(cfg.seed)
                .ok_or_else(|| Failure::Config("emulated sweep requires an explicit --seed".into()))?;
            let noise = NoiseConfig {
                visibility: 1.0,
                wp_sigma_deg: args.wp_sigma.or(cfg.wp_sigma_deg).unwrap_or(3.0),
                counts_per_setting: args.counts.or(cfg.counts_per_setting).unwrap_or(7500.0),
                seed,
            };
            let drift = cfg.drift.unwrap_or_else(DriftModel::none);
            let eff = cfg.efficiency.unwrap_or_else(EfficiencyModel::ideal);
            visibility_sweep_emulated(&alpha, &vis, &noise, &drift, &eff).map_err(lift)?
        }
        other => {
            return Err(Failure::Config(format!(
                "unknown sweep mode `{other}` (expected `ideal` or `emulated`)"
            )))
        }
    };
    let mut csv = String::from("visibility,value,error\n");
    for p in &sweep.points {
        csv.push_str(&format!(
            "{},{},{}\n",
            csv_float(p.visibility),
            csv_float(p.value),
            csv_float(p.error)
        ));
    }
    let report = SweepReport {
        schema_version: SCHEMA_VERSION,
        mode: args.mode.clone(),
        slope: sweep.slope,
        intercept: sweep.intercept,
        r_squared: sweep.r_squared,
        crossing: sweep.crossing,
    };
    match &args.out {
        Some(path) => {
            write_atomic(path, csv.as_bytes())?;
            println!("{}", to_json(&report)?);
            Ok(())
        }
        None => {
            print!("{csv}");
            println!("{}", to_json(&report)?);
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct TomoReport {
    schema_version: u32,
    rank: usize,
    residual: f64,
    reconstruction: MatrixFile,
}

fn cmd_tomo(args: TomoArgs) -> Result<(), Failure> {
    let w = load_process(&args.source)?;
    let cat = Catalog::build().map_err(lift)?;
    let table = probability_table(&cat, &w).map_err(lift)?;
    let result = causal_tomography(&cat, &table).map_err(lift)?;
    let report = TomoReport {
        schema_version: SCHEMA_VERSION,
        rank: result.rank,
        residual: result.residual,
        reconstruction: MatrixFile::from_operator(&result.reconstruction),
    };
    emit(&args.out, &to_json(&report)?)
}
