//! Command-line front end: configuration, orchestration, and emission of
//! figure-ready data tables with machine-readable provenance sidecars.
//!
//! Exit codes: 0 success, 2 configuration/usage error, 3 convergence or
//! basis-quality failure, 4 pole diagnostic (photon energy hits an
//! intermediate resonance).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use twogamma::multipole::Gauge;
use twogamma::spectrum::{build_spectrum, spectrum_report, BasisParams};
use twogamma::twophoton::TwoPhotonError;
use twogamma::{Engine, TransitionSpec, Truncation};

const EXIT_CONFIG: u8 = 2;
const EXIT_CONVERGENCE: u8 = 3;
const EXIT_POLE: u8 = 4;

/// Environment variable selecting the rayon worker count.
const WORKERS_ENV: &str = "TWOGAMMA_WORKERS";

#[derive(Parser)]
#[command(
    name = "twogamma",
    version,
    about = "Two-photon decay of hydrogen-like and helium-like ions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Photon-photon angular correlation W(theta) at fixed energy sharing y
    Correlate(CommonArgs),
    /// Total two-photon rate and the dW/dy spectral distribution
    Rate(CommonArgs),
    /// Basis-quality diagnostics per symmetry block kappa
    SpectrumCheck(CommonArgs),
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// JSON run configuration; flags override individual keys
    #[arg(long)]
    config: Option<PathBuf>,
    /// Nuclear charge
    #[arg(long = "Z")]
    z: Option<f64>,
    /// Transition label, e.g. 2s, 1s2s-1S0, 1s2s-3S1, 1s2p-3P0
    #[arg(long)]
    transition: Option<String>,
    /// Energy-sharing fraction(s) y = omega_1 / (E_i - E_f), comma separated
    #[arg(long, value_delimiter = ',')]
    y: Option<Vec<f64>>,
    /// Number of theta grid points
    #[arg(long)]
    theta_points: Option<usize>,
    /// Multipole truncation L_max
    #[arg(long)]
    lmax: Option<u32>,
    /// Keep only the leading 2E1 dipole channels
    #[arg(long)]
    dipole_only: bool,
    /// Number of B-splines per component
    #[arg(long)]
    splines: Option<usize>,
    /// Radial box size (natural units, 1/(m c / hbar))
    #[arg(long)]
    rmax: Option<f64>,
    /// Output directory
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Output format
    #[arg(long, value_parser = ["csv", "json"])]
    format: Option<String>,
}

/// One run request; a config file holds a base run plus optional variants.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RunConfig {
    z: f64,
    transition: String,
    y: Vec<f64>,
    theta_points: usize,
    theta_min_deg: f64,
    theta_max_deg: f64,
    l_max: u32,
    dipole_only: bool,
    n_splines: Option<usize>,
    order: Option<usize>,
    r_max: Option<f64>,
    rate_y_points: usize,
    rate_theta_points: usize,
    out_dir: PathBuf,
    format: String,
    /// Optional sub-runs: each entry is a partial config overriding the base.
    runs: Vec<serde_json::Value>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            z: 54.0,
            transition: "1s2s-1S0".into(),
            y: vec![0.5],
            theta_points: 61,
            theta_min_deg: 0.0,
            theta_max_deg: 180.0,
            l_max: 5,
            dipole_only: false,
            n_splines: None,
            order: None,
            r_max: None,
            rate_y_points: 32,
            rate_theta_points: 12,
            out_dir: PathBuf::from("out"),
            format: "csv".into(),
            runs: Vec::new(),
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(String),
    Convergence(String),
    Pole(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Convergence(_) => EXIT_CONVERGENCE,
            CliError::Pole(_) => EXIT_POLE,
        }
    }
    fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Convergence(m) | CliError::Pole(m) => m,
        }
    }
}

impl From<TwoPhotonError> for CliError {
    fn from(e: TwoPhotonError) -> Self {
        match e {
            TwoPhotonError::Pole { .. } => CliError::Pole(e.to_string()),
            TwoPhotonError::BadConfig(_) => CliError::Config(e.to_string()),
            other => CliError::Convergence(other.to_string()),
        }
    }
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, CliError> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))?
        }
        None => RunConfig::default(),
    };
    apply_flags(&mut cfg, args);
    Ok(cfg)
}

fn apply_flags(cfg: &mut RunConfig, args: &CommonArgs) {
    if let Some(z) = args.z {
        cfg.z = z;
    }
    if let Some(t) = &args.transition {
        cfg.transition = t.clone();
    }
    if let Some(y) = &args.y {
        cfg.y = y.clone();
    }
    if let Some(n) = args.theta_points {
        cfg.theta_points = n;
    }
    if let Some(l) = args.lmax {
        cfg.l_max = l;
    }
    if args.dipole_only {
        cfg.dipole_only = true;
    }
    if let Some(n) = args.splines {
        cfg.n_splines = Some(n);
    }
    if let Some(r) = args.rmax {
        cfg.r_max = Some(r);
    }
    if let Some(d) = &args.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(f) = &args.format {
        cfg.format = f.clone();
    }
}

/// Expand the optional `runs` list into concrete configs (base + override).
fn expand_runs(cfg: &RunConfig) -> Result<Vec<RunConfig>, CliError> {
    if cfg.runs.is_empty() {
        return Ok(vec![cfg.clone()]);
    }
    let mut base = serde_json::to_value(cfg).expect("config serializes");
    base.as_object_mut().unwrap().remove("runs");
    let mut out = Vec::new();
    for over in &cfg.runs {
        let mut merged = base.clone();
        let obj = merged.as_object_mut().unwrap();
        let over_obj = over
            .as_object()
            .ok_or_else(|| CliError::Config("each entry in `runs` must be an object".into()))?;
        for (k, v) in over_obj {
            obj.insert(k.clone(), v.clone());
        }
        let run: RunConfig = serde_json::from_value(merged)
            .map_err(|e| CliError::Config(format!("bad run override: {e}")))?;
        out.push(run);
    }
    Ok(out)
}

fn basis_params(cfg: &RunConfig) -> BasisParams {
    let mut p = BasisParams::defaults_for(cfg.z);
    if let Some(n) = cfg.n_splines {
        p.n_splines = n;
    }
    if let Some(k) = cfg.order {
        p.order = k;
    }
    if let Some(r) = cfg.r_max {
        p.r_max = r;
    }
    p
}

fn build_engine(cfg: &RunConfig) -> Result<Engine, CliError> {
    let kind = cfg
        .transition
        .parse()
        .map_err(|e: TwoPhotonError| CliError::Config(e.to_string()))?;
    let spec = TransitionSpec::new(cfg.z, kind)?;
    let trunc = Truncation {
        l_max: cfg.l_max,
        dipole_only: cfg.dipole_only,
        include_negative_continuum: true,
        gauge: Gauge::Velocity,
        l_max_magnetic: None,
    };
    Ok(Engine::new(spec, trunc, Some(basis_params(cfg)))?)
}

fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(path, text)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
    println!("wrote {}", path.display());
    Ok(())
}

fn sidecar(cfg: &RunConfig, engine: &Engine, extra: serde_json::Value) -> serde_json::Value {
    serde_json::json!({
        "version": env!("CARGO_PKG_VERSION"),
        "config": {
            "z": cfg.z,
            "transition": cfg.transition,
            "l_max": cfg.l_max,
            "dipole_only": cfg.dipole_only,
            "gauge": "velocity",
        },
        "basis_fingerprint": engine.params.fingerprint(),
        "transition_energy": engine.delta_e,
        "result": extra,
    })
}

fn run_stem(cfg: &RunConfig, y: Option<f64>) -> String {
    let trunc = if cfg.dipole_only {
        "dipole".to_string()
    } else {
        format!("lmax{}", cfg.l_max)
    };
    let label = cfg.transition.replace('/', "");
    match y {
        Some(y) => format!("correlate_Z{}_{}_y{:.4}_{}", cfg.z, label, y, trunc),
        None => format!("rate_Z{}_{}_{}", cfg.z, label, trunc),
    }
}

fn cmd_correlate(cfg: &RunConfig) -> Result<(), CliError> {
    if cfg.theta_points == 0 {
        return Err(CliError::Config("theta_points must be positive".into()));
    }
    if cfg.y.iter().any(|&y| !(y > 0.0 && y < 1.0)) {
        return Err(CliError::Config(
            "energy sharing y must lie strictly inside (0, 1)".into(),
        ));
    }
    let engine = build_engine(cfg)?;
    let (t0, t1) = (
        cfg.theta_min_deg.to_radians(),
        cfg.theta_max_deg.to_radians(),
    );
    let thetas: Vec<f64> = (0..cfg.theta_points)
        .map(|i| {
            if cfg.theta_points == 1 {
                t0
            } else {
                t0 + (t1 - t0) * i as f64 / (cfg.theta_points - 1) as f64
            }
        })
        .collect();

    for &y in &cfg.y {
        let res = engine.correlation_function(y, &thetas)?;
        let w90 = engine.w(std::f64::consts::FRAC_PI_2, y)?;
        let stem = run_stem(cfg, Some(y));
        let sc = sidecar(
            cfg,
            &engine,
            serde_json::json!({ "y": y, "w_at_90deg": w90, "theta_points": cfg.theta_points }),
        );
        if cfg.format == "json" {
            let payload = serde_json::json!({ "provenance": sc, "data": res });
            write_text(
                &cfg.out_dir.join(format!("{stem}.json")),
                &serde_json::to_string_pretty(&payload).unwrap(),
            )?;
        } else {
            let mut csv = String::from("theta_deg,W_absolute,W_normalized_at_90deg\n");
            for (i, &theta) in res.theta.iter().enumerate() {
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt17(theta.to_degrees()),
                    fmt17(res.w[i]),
                    fmt17(res.w[i] / w90)
                ));
            }
            write_text(&cfg.out_dir.join(format!("{stem}.csv")), &csv)?;
            write_text(
                &cfg.out_dir.join(format!("{stem}.provenance.json")),
                &serde_json::to_string_pretty(&sc).unwrap(),
            )?;
        }
    }
    Ok(())
}

fn cmd_rate(cfg: &RunConfig) -> Result<(), CliError> {
    let engine = build_engine(cfg)?;
    let res = engine.total_rate(cfg.rate_y_points, cfg.rate_theta_points)?;
    println!(
        "Z={} {} total two-photon rate: {:.6e} 1/s",
        cfg.z, cfg.transition, res.total
    );
    let stem = run_stem(cfg, None);
    let sc = sidecar(
        cfg,
        &engine,
        serde_json::json!({
            "total_rate_per_s": res.total,
            "rate_y_points": cfg.rate_y_points,
            "rate_theta_points": cfg.rate_theta_points,
        }),
    );
    if cfg.format == "json" {
        let payload = serde_json::json!({ "provenance": sc, "data": res });
        write_text(
            &cfg.out_dir.join(format!("{stem}.json")),
            &serde_json::to_string_pretty(&payload).unwrap(),
        )?;
    } else {
        let mut csv = String::from("y,dW_dy_per_s\n");
        for (y, dw) in &res.spectrum {
            csv.push_str(&format!("{},{}\n", fmt17(*y), fmt17(*dw)));
        }
        write_text(&cfg.out_dir.join(format!("{stem}.csv")), &csv)?;
        write_text(
            &cfg.out_dir.join(format!("{stem}.provenance.json")),
            &serde_json::to_string_pretty(&sc).unwrap(),
        )?;
    }
    Ok(())
}

fn cmd_spectrum_check(cfg: &RunConfig) -> Result<(), CliError> {
    // validate the transition label even though only the basis is exercised
    let _ = cfg
        .transition
        .parse::<twogamma::TransitionKind>()
        .map_err(|e| CliError::Config(e.to_string()))?;
    if !(cfg.z >= 1.0) {
        return Err(CliError::Config(format!("bad nuclear charge Z = {}", cfg.z)));
    }
    let params = basis_params(cfg);
    let kmax = cfg.l_max as i32 + 1;
    let mut all_ok = true;
    println!(
        "basis: {} splines, order {}, r_max {:.3e} (fingerprint {})",
        params.n_splines,
        params.order,
        params.r_max,
        params.fingerprint()
    );
    for kappa in -kmax..=kmax {
        if kappa == 0 {
            continue;
        }
        let spec = build_spectrum(cfg.z, kappa, &params)
            .map_err(|e| CliError::Convergence(e.to_string()))?;
        let report = spectrum_report(cfg.z, &spec, &params, 2);
        let ok = report.passes();
        all_ok &= ok;
        println!(
            "kappa {kappa:+}: {} states ({} negative) | orthonormality {:.2e} | max bound-energy err {:.2e} | max completeness defect {:.2e} -> {}",
            report.n_states,
            report.n_negative,
            report.orthonormality_residual,
            report
                .bound_energy_errors
                .iter()
                .cloned()
                .fold(0.0f64, f64::max),
            report
                .completeness_defects
                .iter()
                .cloned()
                .fold(0.0f64, f64::max),
            if ok { "ok" } else { "FAIL" }
        );
    }
    if all_ok {
        Ok(())
    } else {
        Err(CliError::Convergence(
            "basis diagnostics exceed thresholds".into(),
        ))
    }
}

fn run() -> Result<(), CliError> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .map_err(|_| CliError::Config(format!("{WORKERS_ENV} must be an integer, got {v:?}")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(e.to_string()))?;
    }
    let cli = Cli::parse();
    let (args, f): (&CommonArgs, fn(&RunConfig) -> Result<(), CliError>) = match &cli.command {
        Command::Correlate(a) => (a, cmd_correlate),
        Command::Rate(a) => (a, cmd_rate),
        Command::SpectrumCheck(a) => (a, cmd_spectrum_check),
    };
    let cfg = load_config(args)?;
    for run in expand_runs(&cfg)? {
        f(&run)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.exit_code())
        }
    }
}
