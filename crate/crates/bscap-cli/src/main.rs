//! Command-line front end: reproduces the rate curves, constellation
//! designs, circuit syntheses, region analyses, and ambient-capacity tables
//! as CSV/JSON files with a reproducibility manifest in the header.
//!
//! Exit codes: 0 success, 2 argument/input error, 3 numerical failure.

mod manifest;
mod output;
mod ranges;

use bscap::ambient::{ergodic_capacity, outage_capacity, FadingModel};
use bscap::capacity::{
    capacity_general_sweep, capacity_reactive, capacity_resistive_sweep, rate_uniform_disk,
    CapacityPoint, CapacityTable, InputLaw, SweepConfig, K1_THRESHOLD_DB,
};
use bscap::circuit::{
    optimize_circuit_multi, CircuitDesignFile, CircuitOptimizeOptions, SwitchedLoadTopology,
};
use bscap::constellation::{design_apsk, design_psk, design_qam};
use bscap::mi::{
    mi_complex_discrete, mi_real_discrete, radius_pdf_dauip, radius_pdf_uniform_disk,
    source_entropy, ConstellationFile, DauipDistribution, RealConstellation,
};
use bscap::region::{
    calibrate_q_factor, high_snr_rate_loss, region_from_reactance_band, ReactanceBandConstraint,
};
use bscap::zstats::{
    beta_angle, conditional_angle_pdf, reactance_pdf_unit_circle, resistance_pdf_uniform_real,
    z_pdf_uniform_disk,
};
use bscap::Snr;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use output::OutputTarget;
use ranges::DbRange;
use std::process::ExitCode;

/// Achievable rates and capacity-achieving load modulation for backscatter
/// links on the reflection-coefficient unit disk.
#[derive(Parser)]
#[command(name = "bscap", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity / rate curves per load class over an SNR range.
    Capacity(CapacityArgs),
    /// Mutual information of a constellation file at one SNR.
    Mi(MiArgs),
    /// Generate APSK / PSK / QAM constellation files.
    Design(DesignArgs),
    /// Synthesize a switched lumped-element load circuit.
    Circuit(CircuitArgs),
    /// Rate loss of reactance-band-constrained loads.
    Region(RegionArgs),
    /// Ergodic and outage capacity under a modulated ambient source.
    Ambient(AmbientArgs),
    /// Distribution grids of the impedance-domain statistics.
    Stats(StatsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum LoadClass {
    General,
    Reactive,
    Resistive,
    UniformDisk,
}

#[derive(Args)]
struct CapacityArgs {
    /// Load class to solve.
    #[arg(long, value_enum)]
    load: LoadClass,
    /// SNR grid start:end:step in dB (e.g. 0:25:0.5).
    #[arg(long)]
    snr_db: DbRange,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct MiArgs {
    /// Constellation JSON file ({"points":[{re,im,prob},...]}) or an
    /// emitted circuit design file.
    #[arg(long)]
    constellation: std::path::PathBuf,
    /// Evaluation SNR in dB.
    #[arg(long)]
    snr_db: f64,
    /// Treat the constellation as real (purely resistive): imaginary parts
    /// must be zero and the real channel applies.
    #[arg(long)]
    real: bool,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct DesignArgs {
    /// Constellation family.
    #[arg(value_enum)]
    family: DesignFamily,
    /// Symbol count: 4K² for APSK, ≥2 for PSK, 4^k for QAM.
    #[arg(long)]
    m: usize,
    /// Design SNR in dB (required for APSK).
    #[arg(long)]
    design_snr_db: Option<f64>,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum DesignFamily {
    Apsk,
    Psk,
    Qam,
}

#[derive(Args)]
struct CircuitArgs {
    /// Number of parallel switched capacitors.
    #[arg(long)]
    caps: usize,
    /// Number of series switched resistors.
    #[arg(long)]
    res: usize,
    /// Design SNR in dB.
    #[arg(long)]
    design_snr_db: f64,
    /// Number of multi-start seeds.
    #[arg(long, default_value_t = 16)]
    seeds: u64,
    /// First seed of the multi-start block.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output JSON path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Args)]
struct RegionArgs {
    /// Comma-separated capacitance range fractions Δ in (0,1).
    #[arg(long, value_delimiter = ',')]
    delta: Vec<f64>,
    /// Coil Q-factor x_T; mutually exclusive with --calibrate.
    #[arg(long, conflicts_with = "calibrate")]
    q_factor: Option<f64>,
    /// Calibrate the Q-factor so the first Δ excludes the target fraction.
    #[arg(long)]
    calibrate: bool,
    /// Excluded-area fraction targeted by the calibration.
    #[arg(long, default_value_t = 0.612, requires = "calibrate")]
    target_excluded: f64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FadingArg {
    Constant,
    Gaussian,
    Onoff,
}

#[derive(Args)]
struct AmbientArgs {
    /// Fading model of the ambient factor ψ.
    #[arg(long, value_enum)]
    fading: FadingArg,
    /// On-probability for the on-off model.
    #[arg(long, default_value_t = 0.5)]
    on_probability: f64,
    /// Ambient-to-load symbol ratio N_A.
    #[arg(long)]
    n_ambient: usize,
    /// SNR grid start:end:step in dB.
    #[arg(long)]
    snr_db: DbRange,
    /// Comma-separated outage probabilities ε.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    eps: Vec<f64>,
    /// Monte Carlo sample count.
    #[arg(long, default_value_t = 100_000)]
    n_samples: usize,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatsKind {
    /// Cauchy reactance density of uniform unit-circle signaling.
    Reactance,
    /// Beta-prime resistance density/CDF of uniform real signaling.
    Resistance,
    /// Conditional impedance-angle density for a circle radius.
    Angle,
    /// Impedance-plane density of uniform-disk signaling.
    Zpdf,
    /// Received-radius density of a load class at one SNR.
    RadiusPdf,
}

#[derive(Args)]
struct StatsArgs {
    /// Which distribution grid to emit.
    #[arg(value_enum)]
    kind: StatsKind,
    /// Grid points per axis.
    #[arg(long, default_value_t = 512)]
    points: usize,
    /// Coordinate range limit (|x| ≤ max for reactance, r ≤ max for
    /// resistance/zpdf).
    #[arg(long, default_value_t = 10.0)]
    max: f64,
    /// Circle radius for the angle density.
    #[arg(long, default_value_t = 0.5)]
    radius: f64,
    /// SNR in dB for the radius density.
    #[arg(long, default_value_t = 10.0)]
    snr_db: f64,
    /// Load class for the radius density (reactive or uniform-disk).
    #[arg(long, value_enum, default_value_t = LoadClass::Reactive)]
    load: LoadClass,
    /// Output CSV path (stdout when omitted).
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    configure_threads();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let command_line = argv.join(" ");
    match run(cli, &command_line) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

/// BSCAP_THREADS caps the rayon pool (library parallelism).
fn configure_threads() {
    #[cfg(feature = "parallel")]
    if let Ok(v) = std::env::var("BSCAP_THREADS") {
        if let Ok(n) = v.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
}

#[derive(Debug)]
enum CliError {
    Input(String),
    Numerical(String),
    Io(std::io::Error),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Input(m) => write!(f, "{m}"),
            CliError::Numerical(m) => write!(f, "{m}"),
            CliError::Io(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl From<bscap::Error> for CliError {
    fn from(e: bscap::Error) -> Self {
        match e {
            bscap::Error::InvalidInput(_) | bscap::Error::OpenCircuit => {
                CliError::Input(e.to_string())
            }
            bscap::Error::IntegrationFailure(_) | bscap::Error::OptimizerFailure { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

fn run(cli: Cli, command_line: &str) -> Result<(), CliError> {
    match cli.command {
        Command::Capacity(a) => cmd_capacity(a, command_line),
        Command::Mi(a) => cmd_mi(a, command_line),
        Command::Design(a) => cmd_design(a, command_line),
        Command::Circuit(a) => cmd_circuit(a, command_line),
        Command::Region(a) => cmd_region(a, command_line),
        Command::Ambient(a) => cmd_ambient(a, command_line),
        Command::Stats(a) => cmd_stats(a, command_line),
    }
}

// ---------------------------------------------------------------------------
// capacity
// ---------------------------------------------------------------------------

fn cmd_capacity(a: CapacityArgs, command_line: &str) -> Result<(), CliError> {
    let grid = a.snr_db.grid();
    let mut out = OutputTarget::create(a.out.as_deref())?;
    out.manifest(command_line, None)?;

    match a.load {
        LoadClass::Reactive | LoadClass::UniformDisk => {
            out.line("snr_db,rate_bpcu")?;
            for &db in &grid {
                let rho = Snr::from_db(db).map_err(bscap::Error::from)?;
                let point = match a.load {
                    LoadClass::Reactive => capacity_reactive(rho)?,
                    _ => rate_uniform_disk(rho)?,
                };
                out.line(&format!("{db},{}", point.rate))?;
            }
        }
        LoadClass::General => {
            out.line("snr_db,rate_bpcu,k,radii,probs")?;
            for p in solve_general(&a.snr_db)? {
                let (radii, probs) = match &p.input_law {
                    InputLaw::Dauip(d) => (join(d.radii()), join(d.probs())),
                    _ => unreachable!("general sweep emits circle mixtures"),
                };
                out.line(&format!(
                    "{},{},{},{},{}",
                    p.snr.db(),
                    p.rate,
                    p.circle_count(),
                    radii,
                    probs
                ))?;
            }
        }
        LoadClass::Resistive => {
            out.line("snr_db,rate_bpcu,m,points,probs")?;
            for p in solve_resistive(&a.snr_db)? {
                let (pts, probs) = match &p.input_law {
                    InputLaw::Real(c) => (join(c.points()), join(c.probs())),
                    _ => unreachable!("resistive sweep emits real constellations"),
                };
                out.line(&format!(
                    "{},{},{},{},{}",
                    p.snr.db(),
                    p.rate,
                    p.circle_count(),
                    pts,
                    probs
                ))?;
            }
        }
    }
    out.finish()
}

fn join(v: &[f64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

/// Run the warm-started sweep on an internal grid that contains every
/// requested point, then emit the requested rows. The internal grid starts
/// in the K = 1 regime even when the request does not.
fn solve_general(range: &DbRange) -> Result<Vec<CapacityPoint>, CliError> {
    let requested = range.grid();
    let istep = refine_step(range.step, 0.1);
    let first = requested[0];
    let start = if first <= K1_THRESHOLD_DB {
        first
    } else {
        first - ((first - 4.5) / istep).ceil() * istep
    };
    let cfg = SweepConfig::new(start, *requested.last().unwrap())
        .map_err(CliError::from)?
        .with_step(istep)
        .map_err(CliError::from)?;
    let sweep = capacity_general_sweep(&cfg)?;
    Ok(select_rows(sweep, &requested))
}

fn solve_resistive(range: &DbRange) -> Result<Vec<CapacityPoint>, CliError> {
    let requested = range.grid();
    let istep = refine_step(range.step, 0.1);
    let cfg = SweepConfig {
        snr_db_start: requested[0],
        snr_db_end: *requested.last().unwrap(),
        step_db: istep,
        ppm_keep_threshold: 1e-6,
        trial_prob_fraction: 0.01,
    };
    let sweep = capacity_resistive_sweep(&cfg)?;
    Ok(select_rows(sweep, &requested))
}

/// Largest step ≤ max_istep that divides the user step evenly.
fn refine_step(user_step: f64, max_istep: f64) -> f64 {
    let n = (user_step / max_istep).ceil().max(1.0);
    user_step / n
}

fn select_rows(sweep: Vec<CapacityPoint>, requested: &[f64]) -> Vec<CapacityPoint> {
    let mut rows = Vec::with_capacity(requested.len());
    for &db in requested {
        if let Some(p) = sweep
            .iter()
            .min_by(|a, b| {
                let da = (a.snr.db() - db).abs();
                let db_ = (b.snr.db() - db).abs();
                da.partial_cmp(&db_).unwrap()
            })
            .filter(|p| (p.snr.db() - db).abs() < 1e-6)
        {
            rows.push(p.clone());
        }
    }
    rows
}

// ---------------------------------------------------------------------------
// mi
// ---------------------------------------------------------------------------

fn cmd_mi(a: MiArgs, command_line: &str) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&a.constellation)?;
    let file = parse_constellation(&text)?;
    let rho = Snr::from_db(a.snr_db).map_err(bscap::Error::from)?;
    let constellation = file.to_constellation()?;

    let mi = if a.real {
        let mut pairs: Vec<(f64, f64)> = constellation
            .points()
            .iter()
            .zip(constellation.probs())
            .map(|(p, &q)| {
                if p.im.abs() > 1e-12 {
                    Err(bscap::Error::InvalidInput(format!(
                        "point {p} is not real; --real requires a resistive constellation"
                    )))
                } else {
                    Ok((p.re, q))
                }
            })
            .collect::<Result<_, _>>()?;
        pairs.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        let (points, probs): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        mi_real_discrete(&RealConstellation::new(points, probs)?, rho)?
    } else {
        mi_complex_discrete(&constellation, rho)?
    };

    let record = serde_json::json!({
        "snr_db": a.snr_db,
        "mi_bpcu": mi,
        "source_entropy_bits": source_entropy(constellation.probs()),
    });
    let mut out = OutputTarget::create(a.out.as_deref())?;
    out.raw(&serde_json::to_string_pretty(&record).expect("static schema"))?;
    out.raw("\n")?;
    out.finish_quiet(command_line)
}

/// Accept either the plain constellation schema or an emitted circuit
/// design (whose state table carries the same information).
fn parse_constellation(text: &str) -> Result<ConstellationFile, CliError> {
    let direct: Result<ConstellationFile, serde_json::Error> = serde_json::from_str(text);
    match direct {
        Ok(f) if !f.points.is_empty() => Ok(f),
        _ => match serde_json::from_str::<CircuitDesignFile>(text) {
            Ok(c) => Ok(ConstellationFile {
                points: c
                    .state_table
                    .iter()
                    .map(|s| bscap::mi::ConstellationPointRecord {
                        re: s.gamma_re,
                        im: s.gamma_im,
                        prob: s.prob,
                    })
                    .collect(),
                metadata: None,
            }),
            Err(_) => {
                // Report the original schema failure with line context.
                let err = direct.expect_err("empty points handled above");
                Err(CliError::Input(format!(
                    "malformed constellation JSON (line {}, column {}): {err}",
                    err.line(),
                    err.column()
                )))
            }
        },
    }
}

// ---------------------------------------------------------------------------
// design
// ---------------------------------------------------------------------------

fn cmd_design(a: DesignArgs, command_line: &str) -> Result<(), CliError> {
    let file = match a.family {
        DesignFamily::Apsk => {
            let db = a.design_snr_db.ok_or_else(|| {
                CliError::Input("APSK needs --design-snr-db".to_string())
            })?;
            let design = design_apsk(a.m, Snr::from_db(db).map_err(bscap::Error::from)?)?;
            let mut f = ConstellationFile::from_constellation(&design.constellation);
            f.metadata = Some(design.metadata());
            f
        }
        DesignFamily::Psk => ConstellationFile::from_constellation(&design_psk(a.m)?),
        DesignFamily::Qam => ConstellationFile::from_constellation(&design_qam(a.m)?),
    };
    let mut out = OutputTarget::create(a.out.as_deref())?;
    out.raw(&serde_json::to_string_pretty(&file).expect("static schema"))?;
    out.raw("\n")?;
    out.finish_quiet(command_line)
}

// ---------------------------------------------------------------------------
// circuit
// ---------------------------------------------------------------------------

fn cmd_circuit(a: CircuitArgs, command_line: &str) -> Result<(), CliError> {
    if a.seeds == 0 {
        return Err(CliError::Input("need at least one seed".to_string()));
    }
    let topology = SwitchedLoadTopology::new(a.caps, a.res)?;
    let rho = Snr::from_db(a.design_snr_db).map_err(bscap::Error::from)?;
    let seeds: Vec<u64> = (a.seed..a.seed + a.seeds).collect();
    let best = optimize_circuit_multi(&topology, rho, &seeds, &CircuitOptimizeOptions::default())?;
    let file = CircuitDesignFile::from_design(&best);
    let mut out = OutputTarget::create(a.out.as_deref())?;
    out.raw(&serde_json::to_string_pretty(&file).expect("static schema"))?;
    out.raw("\n")?;
    out.finish_quiet(command_line)
}

// ---------------------------------------------------------------------------
// region
// ---------------------------------------------------------------------------

fn cmd_region(a: RegionArgs, command_line: &str) -> Result<(), CliError> {
    if a.delta.is_empty() {
        return Err(CliError::Input("need at least one Δ".to_string()));
    }
    let q = if a.calibrate {
        calibrate_q_factor(a.delta[0], a.target_excluded)?
    } else {
        a.q_factor
            .ok_or_else(|| CliError::Input("pass --q-factor or --calibrate".to_string()))?
    };
    let mut out = OutputTarget::create(a.out.as_deref())?;
    out.manifest(command_line, None)?;
    out.line("delta,q_factor,excluded_area_fraction,rate_loss_bpcu")?;
    for &delta in &a.delta {
        let c = ReactanceBandConstraint::new(delta, q)?;
        let region = region_from_reactance_band(c);
        let excluded = 1.0 - region.area() / std::f64::consts::PI;
        let loss = high_snr_rate_loss(&region)?;
        out.line(&format!("{delta},{q},{excluded},{loss}"))?;
    }
    out.finish()
}

// ---------------------------------------------------------------------------
// ambient
// ---------------------------------------------------------------------------

fn cmd_ambient(a: AmbientArgs, command_line: &str) -> Result<(), CliError> {
    let model = match a.fading {
        FadingArg::Constant => FadingModel::ConstantEnvelope,
        FadingArg::Gaussian => FadingModel::CircularGaussian,
        FadingArg::Onoff => FadingModel::OnOff {
            on_probability: a.on_probability,
        },
    };
    for &eps in &a.eps {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(CliError::Input(format!("ε = {eps} outside (0,1)")));
        }
    }
    let grid = a.snr_db.grid();
    // Table range: cover the sampled |a|²ρ spread with margin.
    let lo = (grid[0] - 25.0).max(-30.0);
    let hi = grid.last().unwrap() + 12.0;
    let table = CapacityTable::build_general(lo, hi, 0.1)?;

    let mut out = OutputTarget::create(a.out.as_deref())?;
    out.manifest(command_line, Some(a.seed))?;
    out.line("snr_db,ergodic_bpcu,stderr,outage_eps,outage_bpcu")?;
    for &db in &grid {
        let rho = Snr::from_db(db).map_err(bscap::Error::from)?;
        let erg = ergodic_capacity(&table, model, a.n_ambient, rho, a.n_samples, a.seed)?;
        for &eps in &a.eps {
            let outage =
                outage_capacity(&table, model, a.n_ambient, rho, eps, a.n_samples, a.seed)?;
            out.line(&format!(
                "{db},{},{},{eps},{outage}",
                erg.rate_bpcu, erg.std_error
            ))?;
        }
    }
    out.finish()
}

// ---------------------------------------------------------------------------
// stats
// ---------------------------------------------------------------------------

fn cmd_stats(a: StatsArgs, command_line: &str) -> Result<(), CliError> {
    if a.points < 2 {
        return Err(CliError::Input("need at least 2 grid points".to_string()));
    }
    let mut out = OutputTarget::create(a.out.as_deref())?;
    out.manifest(command_line, None)?;
    let n = a.points;
    match a.kind {
        StatsKind::Reactance => {
            out.line("x,density")?;
            for i in 0..n {
                let x = -a.max + 2.0 * a.max * i as f64 / (n - 1) as f64;
                out.line(&format!("{x},{}", reactance_pdf_unit_circle(x)))?;
            }
        }
        StatsKind::Resistance => {
            out.line("r,density,cdf")?;
            for i in 0..n {
                let r = a.max * i as f64 / (n - 1) as f64;
                let (pdf, cdf) = resistance_pdf_uniform_real(r)?;
                out.line(&format!("{r},{pdf},{cdf}"))?;
            }
        }
        StatsKind::Angle => {
            out.line("theta,beta,density")?;
            for i in 0..n {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                let beta = beta_angle(theta, a.radius)?;
                let pdf = conditional_angle_pdf(theta, a.radius)?;
                out.line(&format!("{theta},{beta},{pdf}"))?;
            }
        }
        StatsKind::Zpdf => {
            out.line("r,x,density")?;
            for i in 0..n {
                let re = a.max * (i as f64 + 0.5) / n as f64;
                for j in 0..n {
                    let im = -a.max + 2.0 * a.max * (j as f64 + 0.5) / n as f64;
                    let d = z_pdf_uniform_disk(Complex64::new(re, im))?;
                    out.line(&format!("{re},{im},{d}"))?;
                }
            }
        }
        StatsKind::RadiusPdf => {
            let rho = Snr::from_db(a.snr_db).map_err(bscap::Error::from)?;
            let hi = bscap::mi::radius_integration_limit(rho);
            out.line("b,density")?;
            for i in 0..n {
                let b = hi * i as f64 / (n - 1) as f64;
                let f = match a.load {
                    LoadClass::UniformDisk => radius_pdf_uniform_disk(b, rho),
                    LoadClass::Reactive => {
                        radius_pdf_dauip(b, &DauipDistribution::unit_circle(), rho)
                    }
                    _ => {
                        return Err(CliError::Input(
                            "radius-pdf supports reactive and uniform-disk".to_string(),
                        ))
                    }
                };
                out.line(&format!("{b},{f}"))?;
            }
        }
    }
    out.finish()
}
