//! Command-line front end. `run` parses arguments, merges them over an
//! optional JSON config, executes one pipeline and writes the artifact.
//!
//! Exit codes: 0 success, 1 failed verification, 2 usage or IO error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{BodySpec, OutputFormat, Range, RunConfig};
use crate::energy::{ball_profile, ball_radius, total_energy, total_energy_quadrature, EnergyRow};
use crate::flow::{run_flow, FlowState, FlowStatus};
use crate::proofcheck::{self, ScalarChainReport};
use crate::santalo::{chord_coulomb_bounds, chord_moment_identities, jacobian_check, verify_main_inequalities};
use crate::shapes::{StarShape, StarShapeDocument};
use crate::variation::{mean_convexity_certificate, minkowski_deficit, stationarity_residual, StationarityRow};
use crate::{energy, Body, Error, Result, Vec3, VERSION};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFICATION: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "liquid-drop", version, about = "Liquid drop model laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Volume, perimeter, Coulomb and boundary interaction energies.
    Energy {
        #[command(flatten)]
        common: CommonArgs,
        /// `auto` (closed form or Monte Carlo) or `quadrature`.
        #[arg(long)]
        method: Option<String>,
    },
    /// Chord-moment identities, the two Coulomb inequalities, chord bounds
    /// and the Jacobian check.
    Santalo {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Samples for the Jacobian check (0 disables it).
        #[arg(long)]
        jacobian: Option<usize>,
    },
    /// First-variation residual, Minkowski deficit and mean-convexity
    /// certificate.
    Stationarity {
        #[command(flatten)]
        common: CommonArgs,
        /// Fail unless the residual vanishes within the sigma gate.
        #[arg(long)]
        check: bool,
    },
    /// Volume-constrained gradient flow of a star shape.
    Flow {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        volume: Option<f64>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long)]
        resolution: Option<usize>,
    },
    /// Exact and interval checks of the scalar inequality chains.
    Proofcheck {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        chain: Option<ChainArg>,
        #[arg(long)]
        volume: Option<f64>,
    },
    /// One row per volume of a closed-form or sampled check.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum)]
        check: Option<SweepCheck>,
        /// `start:end:step`.
        #[arg(long)]
        volumes: Option<String>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BodyKind {
    Ball,
    Ellipsoid,
    Star,
    Mesh,
    Cube,
    TwoBalls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ChainArg {
    OuterMin,
    Roundness,
    Binding,
    TwoBall,
    All,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepCheck {
    TwoBall,
    Minkowski,
    Roundness,
    OuterMin,
    Energy,
    Stationarity,
}

fn value_name<T: ValueEnum>(v: T) -> String {
    v.to_possible_value()
        .map(|p| p.get_name().to_string())
        .unwrap_or_default()
}

fn parse_term(s: &str) -> std::result::Result<(usize, i32, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [l, m, c] = parts.as_slice() else {
        return Err(format!("expected l,m,c, got `{s}`"));
    };
    Ok((
        l.trim().parse().map_err(|_| format!("bad degree `{l}`"))?,
        m.trim().parse().map_err(|_| format!("bad order `{m}`"))?,
        c.trim().parse().map_err(|_| format!("bad coefficient `{c}`"))?,
    ))
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON config file; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub body: Option<BodyKind>,
    /// Ball radius, or mean radius of a star shape.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Ellipsoid semi-axes `a,b,c`.
    #[arg(long, value_delimiter = ',')]
    pub axes: Option<Vec<f64>>,
    /// OFF mesh or StarShape JSON.
    #[arg(long)]
    pub file: Option<PathBuf>,
    /// Two-ball radii `r1,r2`.
    #[arg(long, value_delimiter = ',')]
    pub radii: Option<Vec<f64>>,
    #[arg(long)]
    pub separation: Option<f64>,
    /// Cube side length.
    #[arg(long)]
    pub side: Option<f64>,
    #[arg(long)]
    pub subdivisions: Option<usize>,
    /// Star-shape coefficient `l,m,c`; repeatable.
    #[arg(long = "coeff", value_parser = parse_term)]
    pub coeffs: Vec<(usize, i32, f64)>,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Standard-error multiple for verdicts.
    #[arg(long)]
    pub sigma: Option<f64>,
}

impl CommonArgs {
    fn body_spec(&self) -> Result<Option<BodySpec>> {
        let Some(kind) = self.body else {
            return Ok(None);
        };
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| Error::Domain(format!("--body {} needs --{flag}", value_name(kind))))
        };
        let spec = match kind {
            BodyKind::Ball => BodySpec::Ball {
                radius: self.radius.unwrap_or(1.0),
            },
            BodyKind::Ellipsoid => {
                let axes = self
                    .axes
                    .as_deref()
                    .ok_or_else(|| Error::Domain("--body ellipsoid needs --axes a,b,c".into()))?;
                let [a, b, c] = axes else {
                    return Err(Error::Domain(format!("--axes takes three values, got {}", axes.len())));
                };
                BodySpec::Ellipsoid {
                    semi_axes: [*a, *b, *c],
                }
            }
            BodyKind::Star => match &self.file {
                Some(file) => BodySpec::Star {
                    file: Some(file.clone()),
                    shape: None,
                },
                None => {
                    let shape = StarShape::from_terms(Vec3::zeros(), self.radius.unwrap_or(1.0), &self.coeffs)?;
                    BodySpec::Star {
                        file: None,
                        shape: Some(StarShapeDocument::from(&shape)),
                    }
                }
            },
            BodyKind::Mesh => BodySpec::Mesh {
                file: self
                    .file
                    .clone()
                    .ok_or_else(|| Error::Domain("--body mesh needs --file".into()))?,
            },
            BodyKind::Cube => BodySpec::Cube {
                side: self.side.unwrap_or(1.0),
                subdivisions: self.subdivisions.unwrap_or(0),
            },
            BodyKind::TwoBalls => {
                let radii = self.radii.clone().unwrap_or_else(|| vec![1.0, 1.0]);
                let [r1, r2] = radii.as_slice() else {
                    return Err(Error::Domain(format!("--radii takes two values, got {}", radii.len())));
                };
                BodySpec::TwoBalls {
                    radii: [*r1, *r2],
                    separation: need(self.separation, "separation")?,
                }
            }
        };
        Ok(Some(spec))
    }

    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        if let Some(spec) = self.body_spec()? {
            cfg.body = Some(spec);
        }
        if let Some(v) = self.samples {
            cfg.samples = v;
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.output.is_some() {
            cfg.output = self.output.clone();
        }
        if let Some(v) = self.format {
            cfg.format = v;
        }
        if let Some(v) = self.sigma {
            cfg.sigma = v;
        }
        Ok(())
    }
}

/// Merges the config file (if any) and flags into one [`RunConfig`].
pub fn resolve(cli: &Cli) -> Result<RunConfig> {
    let (common, name) = match &cli.command {
        Command::Energy { common, .. } => (common, "energy"),
        Command::Santalo { common, .. } => (common, "santalo"),
        Command::Stationarity { common, .. } => (common, "stationarity"),
        Command::Flow { common, .. } => (common, "flow"),
        Command::Proofcheck { common, .. } => (common, "proofcheck"),
        Command::Sweep { common, .. } => (common, "sweep"),
    };
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig {
            format: if name == "sweep" {
                OutputFormat::Csv
            } else {
                OutputFormat::Json
            },
            ..RunConfig::default()
        },
    };
    cfg.command = name.to_string();
    common.apply(&mut cfg)?;
    match &cli.command {
        Command::Energy { method, .. } => {
            if let Some(m) = method {
                cfg.method = m.clone();
            }
        }
        Command::Santalo { alphas, jacobian, .. } => {
            if let Some(a) = alphas {
                cfg.alphas = a.clone();
            }
            if let Some(j) = jacobian {
                cfg.jacobian_samples = *j;
            }
        }
        Command::Stationarity { check, .. } => {
            if *check {
                cfg.check = Some("stationary".into());
            }
        }
        Command::Flow {
            volume,
            max_steps,
            tolerance,
            resolution,
            ..
        } => {
            if let Some(v) = volume {
                cfg.flow.volume = *v;
            }
            if let Some(v) = max_steps {
                cfg.flow.max_steps = *v;
            }
            if let Some(v) = tolerance {
                cfg.flow.tolerance = *v;
            }
            if let Some(v) = resolution {
                cfg.flow.resolution = *v;
            }
        }
        Command::Proofcheck { chain, volume, .. } => {
            if let Some(c) = chain {
                cfg.chain = Some(value_name(*c));
            }
            if let Some(v) = volume {
                cfg.volume = Some(*v);
            }
            if let Some(r) = common.radius {
                cfg.volume = Some(4.0 * std::f64::consts::PI * r.powi(3) / 3.0);
            }
        }
        Command::Sweep { check, volumes, .. } => {
            if let Some(c) = check {
                cfg.check = Some(value_name(*c));
            }
            if volumes.is_some() {
                cfg.volumes = volumes.clone();
            }
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

/// A finished pipeline: the artifact plus whether its verification passed.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Value,
    /// CSV body without the metadata preamble, when the command has a
    /// tabular form.
    pub csv: Option<String>,
    /// Additional JSON files written next to the main output.
    pub attachments: Vec<(String, Value)>,
    pub passed: bool,
    pub summary: String,
    /// Failing sub-reports, printed on exit 1.
    pub failures: Vec<Value>,
}

impl Outcome {
    fn new(report: Value) -> Self {
        Self {
            report,
            csv: None,
            attachments: Vec::new(),
            passed: true,
            summary: String::new(),
            failures: Vec::new(),
        }
    }
}

fn csv_rows<T: Serialize>(rows: &[T]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable report")
}

/// Runs the pipeline named by `cfg.command`.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.command.as_str() {
        "energy" => run_energy(cfg),
        "santalo" => run_santalo(cfg),
        "stationarity" => run_stationarity(cfg),
        "flow" => run_flow_command(cfg),
        "proofcheck" => run_proofcheck(cfg),
        "sweep" => run_sweep(cfg),
        other => Err(Error::Domain(format!(
            "config field `command`: unknown command `{other}`"
        ))),
    }
}

fn run_energy(cfg: &RunConfig) -> Result<Outcome> {
    let body = cfg.body()?;
    let report = if cfg.method == "quadrature" {
        total_energy_quadrature(&body, crate::surface::DEFAULT_RESOLUTION)?
    } else {
        total_energy(&body, cfg.samples, cfg.seed)
    };
    let mut out = Outcome::new(to_value(&report));
    out.csv = Some(csv_rows(&[report.row()])?);
    out.summary = format!(
        "{}: V = {:.6}  P = {:.6}  D = {:.6} ± {:.2e}  D_bdry = {:.6} ± {:.2e}  E = {:.6} ({})",
        report.body,
        report.volume.value,
        report.perimeter.value,
        report.coulomb.value,
        report.coulomb.std_error,
        report.boundary_interaction.value,
        report.boundary_interaction.std_error,
        report.total.value,
        report.method
    );
    Ok(out)
}

fn run_santalo(cfg: &RunConfig) -> Result<Outcome> {
    let body = cfg.body()?;
    let identities = chord_moment_identities(&body, &cfg.alphas, cfg.samples, cfg.seed)?;
    let inequalities = verify_main_inequalities(&body, cfg.samples, cfg.seed);
    let bounds = chord_coulomb_bounds(&body, cfg.samples, cfg.seed);
    let jacobian = (cfg.jacobian_samples > 0).then(|| jacobian_check(&body, cfg.jacobian_samples, cfg.seed));
    let mut out = Outcome::new(json!({
        "body": body.kind(),
        "identities": identities,
        "inequalities": inequalities,
        "chord_bounds": bounds,
        "jacobian": jacobian,
    }));
    let mut summary = String::new();
    for r in &identities {
        let _ = writeln!(
            summary,
            "alpha = {}: lhs {:.6} ± {:.2e}, rhs {:.6} ± {:.2e}, z = {:.2}",
            r.alpha, r.lhs.value, r.lhs.std_error, r.rhs.value, r.rhs.std_error, r.z_score
        );
        if !r.agrees(cfg.sigma) {
            out.passed = false;
            out.failures.push(to_value(r));
        }
    }
    for r in &inequalities {
        let _ = writeln!(
            summary,
            "{}: slack {:.6} ± {:.2e} (equality {}, strict {})",
            r.name, r.slack.value, r.slack.std_error, r.equality, r.strict
        );
        if !r.holds {
            out.passed = false;
            out.failures.push(to_value(r));
        }
    }
    let rows: Vec<_> = inequalities.iter().map(|r| r.row(body.kind())).collect();
    out.csv = Some(csv_rows(&rows)?);
    out.summary = summary.trim_end().to_string();
    Ok(out)
}

fn run_stationarity(cfg: &RunConfig) -> Result<Outcome> {
    let body = cfg.body()?;
    let report = stationarity_residual(&body, cfg.samples, cfg.seed)?;
    let certificate = mean_convexity_certificate(&body, cfg.samples, cfg.seed);
    let mut out = Outcome::new(json!({ "stationarity": report, "mean_convexity": certificate }));
    out.csv = Some(csv_rows(&[report.row(body.volume().value)])?);
    out.summary = format!(
        "{}: lambda = {:.10}  max |H + v - lambda| = {:.3e}  max z = {:.2}  Minkowski deficit = {:.6}",
        report.body, report.lambda.value, report.residual_max, report.max_z, report.minkowski_deficit.value
    );
    if cfg.check.as_deref() == Some("stationary") && !report.is_stationary(cfg.sigma) {
        out.passed = false;
        out.failures.push(to_value(&report));
    }
    Ok(out)
}

fn flow_start(cfg: &RunConfig) -> Result<StarShape> {
    match &cfg.body {
        None => StarShape::from_terms(Vec3::zeros(), 1.0, &[(2, 0, 0.1)]),
        Some(spec) => match spec.build()? {
            Body::StarShape(s) => Ok(s),
            Body::Ball(b) => StarShape::round(Vec3::zeros(), b.radius),
            other => Err(Error::Domain(format!(
                "config field `body`: the flow needs a star shape, got {}",
                other.kind()
            ))),
        },
    }
}

fn run_flow_command(cfg: &RunConfig) -> Result<Outcome> {
    let options = cfg.flow.options();
    let start = flow_start(cfg)?;
    let state = FlowState::new(&start, cfg.flow.volume, &options)?;
    let trajectory = run_flow(state, cfg.flow.max_steps, cfg.flow.tolerance, &options)?;
    let final_doc = trajectory.final_document()?;
    let profile = ball_profile(cfg.flow.volume)?;
    let f = &trajectory.final_state;
    let mut out = Outcome::new(json!({
        "status": trajectory.status,
        "steps": f.step,
        "final_energy": f.energy,
        "ball_profile": profile,
        "final_asphericity": f.asphericity,
        "final_gradient_norm": f.gradient_norm,
        "trajectory": trajectory.rows,
        "final_shape": final_doc,
    }));
    let mut csv = Vec::new();
    trajectory.write_csv(&mut csv)?;
    out.csv = Some(String::from_utf8(csv).expect("csv output is UTF-8"));
    out.attachments.push(("final".into(), to_value(&final_doc)));
    out.summary = format!(
        "{:?} after {} steps: E = {:.12} ± {:.1e} (ball {:.12}), asphericity {:.3e}, |g| = {:.3e}",
        trajectory.status, f.step, f.energy.value, f.energy.std_error, profile, f.asphericity, f.gradient_norm
    );
    if trajectory.status == FlowStatus::MaxSteps {
        out.passed = false;
        out.failures
            .push(json!({ "status": trajectory.status, "gradient_norm": f.gradient_norm }));
    }
    Ok(out)
}

fn run_proofcheck(cfg: &RunConfig) -> Result<Outcome> {
    let chain = cfg.chain.as_deref().unwrap_or("all");
    let volume = cfg.volume.unwrap_or(1.0);
    let mut reports: Vec<ScalarChainReport> = Vec::new();
    let all = chain == "all";
    if all || chain == "outer-min" {
        reports.push(proofcheck::outer_min_chain(volume)?);
    }
    if all || chain == "roundness" {
        reports.push(proofcheck::roundness_chain_for_volume(volume)?);
    }
    if all || chain == "binding" {
        reports.push(proofcheck::binding_energy_bounds());
    }
    if all || chain == "two-ball" {
        reports.push(proofcheck::two_ball_comparison(volume)?);
    }
    if reports.is_empty() {
        return Err(Error::Domain(format!("config field `chain`: unknown chain `{chain}`")));
    }
    let mut out = Outcome::new(to_value(&reports));
    out.summary = reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    for r in &reports {
        if !r.verdict {
            out.passed = false;
            out.failures.push(to_value(r));
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct TwoBallRow {
    volume: f64,
    single_ball: f64,
    two_balls: f64,
    gap: f64,
    better: &'static str,
    seed: u64,
}

#[derive(Serialize)]
struct MinkowskiRow {
    volume: f64,
    radius: f64,
    min_mean_curvature: f64,
    chain_value: f64,
    amgm_floor: f64,
    certified_margin: f64,
    applies: bool,
    certified: bool,
    minkowski_deficit: f64,
    minkowski_deficit_se: f64,
    seed: u64,
}

#[derive(Serialize)]
struct RoundnessRow {
    volume: f64,
    radius: f64,
    f_r: f64,
    f_r_prime: f64,
    status: String,
    seed: u64,
}

#[derive(Serialize)]
struct OuterMinRow {
    volume: f64,
    status: String,
    seed: u64,
}

#[derive(Serialize)]
struct EnergySweepRow {
    volume: f64,
    ball_profile: f64,
    #[serde(flatten)]
    energy: EnergyRow,
}

#[derive(Serialize)]
struct StationaritySweepRow {
    #[serde(flatten)]
    stationarity: StationarityRow,
    seed: u64,
}

fn status_name(r: &ScalarChainReport) -> String {
    serde_json::to_value(r.status)
        .ok()
        .and_then(|v| v.as_str().map(str::to_string))
        .unwrap_or_default()
}

/// The configured body (or a unit ball) dilated to `volume`.
fn body_at_volume(cfg: &RunConfig, volume: f64) -> Result<Body> {
    match &cfg.body {
        None => Body::ball(ball_radius(volume)?),
        Some(spec) => {
            let body = spec.build()?;
            let t = (volume / body.volume().value).cbrt();
            body.scaled(t)
        }
    }
}

fn sweep_table<T: Serialize>(out: &mut Outcome, rows: &[T]) -> Result<()> {
    out.report = to_value(&rows);
    out.csv = Some(csv_rows(rows)?);
    Ok(())
}

fn run_sweep(cfg: &RunConfig) -> Result<Outcome> {
    let check = cfg
        .check
        .as_deref()
        .ok_or_else(|| Error::Domain("config field `check`: sweep needs a check".into()))?;
    let spec = cfg
        .volumes
        .as_deref()
        .ok_or_else(|| Error::Domain("config field `volumes`: sweep needs start:end:step".into()))?;
    let volumes = Range::parse(spec)?.values();
    let seed = cfg.seed;
    let mut out = Outcome::new(Value::Null);
    match check {
        "two-ball" => {
            let mut rows = Vec::new();
            for &v in &volumes {
                let single = ball_profile(v)?;
                let two = 2.0 * ball_profile(v / 2.0)?;
                rows.push(TwoBallRow {
                    volume: v,
                    single_ball: single,
                    two_balls: two,
                    gap: two - single,
                    better: if two > single { "single" } else { "two" },
                    seed,
                });
            }
            sweep_table(&mut out, &rows)?;
            let first = volumes[0];
            let last = volumes[volumes.len() - 1];
            out.summary = match proofcheck::two_ball_crossover(first, last, 1e-12) {
                Ok(v) => format!("crossover bracketed in [{first}, {last}], bisected to {v:.9}"),
                Err(_) => format!(
                    "no crossover in [{first}, {last}]; splitting volume {:.6}",
                    energy::splitting_threshold()
                ),
            };
        }
        "minkowski" => {
            let mut rows = Vec::new();
            for &v in &volumes {
                let body = body_at_volume(cfg, v)?;
                let c = mean_convexity_certificate(&body, cfg.samples, seed);
                let deficit = minkowski_deficit(&body, cfg.samples, seed)?;
                rows.push(MinkowskiRow {
                    volume: v,
                    radius: c.radius,
                    min_mean_curvature: c.min_mean_curvature,
                    chain_value: c.chain_value.value,
                    amgm_floor: c.amgm_floor,
                    certified_margin: c.certified_margin,
                    applies: c.applies,
                    certified: c.certified,
                    minkowski_deficit: deficit.value,
                    minkowski_deficit_se: deficit.std_error,
                    seed,
                });
            }
            sweep_table(&mut out, &rows)?;
            out.summary = format!(
                "mean-convexity certificate applies up to V = {:.6}",
                crate::variation::mean_convexity_volume_threshold()
            );
        }
        "roundness" => {
            let mut rows = Vec::new();
            for &v in &volumes {
                let r = proofcheck::roundness_chain_for_volume(v)?;
                rows.push(RoundnessRow {
                    volume: v,
                    radius: r.parameters["radius"],
                    f_r: r.values["f_R(4 pi R^2)"],
                    f_r_prime: r.values["f'_R(4 pi R^2)"],
                    status: status_name(&r),
                    seed,
                });
            }
            sweep_table(&mut out, &rows)?;
            out.summary = format!(
                "f'_R(4 pi R^2) changes sign at V = {:.12}",
                proofcheck::roundness_threshold_volume()
            );
        }
        "outer-min" => {
            let mut rows = Vec::new();
            for &v in &volumes {
                let r = proofcheck::outer_min_chain(v)?;
                rows.push(OuterMinRow {
                    volume: v,
                    status: status_name(&r),
                    seed,
                });
            }
            sweep_table(&mut out, &rows)?;
            out.summary = format!("{} volumes checked", rows.len());
        }
        "energy" => {
            let mut rows = Vec::new();
            for &v in &volumes {
                let body = body_at_volume(cfg, v)?;
                rows.push(EnergySweepRow {
                    volume: v,
                    ball_profile: ball_profile(v)?,
                    energy: total_energy(&body, cfg.samples, seed).row(),
                });
            }
            sweep_table(&mut out, &rows)?;
            out.summary = format!("{} volumes evaluated", rows.len());
        }
        "stationarity" => {
            let mut rows = Vec::new();
            for &v in &volumes {
                let body = body_at_volume(cfg, v)?;
                rows.push(StationaritySweepRow {
                    stationarity: stationarity_residual(&body, cfg.samples, seed)?.row(v),
                    seed,
                });
            }
            sweep_table(&mut out, &rows)?;
            out.summary = format!("{} volumes evaluated", rows.len());
        }
        other => {
            return Err(Error::Domain(format!(
                "config field `check`: unknown sweep check `{other}`"
            )))
        }
    }
    Ok(out)
}

/// Metadata embedded in every artifact.
fn envelope(cfg: &RunConfig, report: &Value) -> Value {
    json!({
        "version": VERSION,
        "seed": cfg.seed,
        "config": cfg,
        "report": report,
    })
}

fn csv_with_preamble(cfg: &RunConfig, body: &str) -> String {
    let config = serde_json::to_string(cfg).expect("serializable config");
    format!(
        "# liquid-drop {VERSION}\n# seed: {}\n# config: {config}\n{body}",
        cfg.seed
    )
}

fn attachment_path(output: &Path, name: &str) -> PathBuf {
    let stem = output.file_stem().and_then(|s| s.to_str()).unwrap_or("output");
    output.with_file_name(format!("{stem}.{name}.json"))
}

/// Renders the main artifact in the configured format.
pub fn render(cfg: &RunConfig, out: &Outcome) -> String {
    match (cfg.format, &out.csv) {
        (OutputFormat::Csv, Some(body)) => csv_with_preamble(cfg, body),
        _ => serde_json::to_string_pretty(&envelope(cfg, &out.report)).expect("serializable") + "\n",
    }
}

fn write_outputs(cfg: &RunConfig, out: &Outcome) -> Result<()> {
    let text = render(cfg, out);
    match &cfg.output {
        Some(path) => {
            std::fs::write(path, text)?;
            for (name, value) in &out.attachments {
                let mut doc = value.clone();
                if let Value::Object(map) = &mut doc {
                    map.insert("version".into(), json!(VERSION));
                    map.insert("seed".into(), json!(cfg.seed));
                    map.insert("config".into(), to_value(cfg));
                }
                let body = serde_json::to_string_pretty(&doc).expect("serializable") + "\n";
                std::fs::write(attachment_path(path, name), body)?;
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
        }
    }
    Ok(())
}

fn run_config(cfg: &RunConfig) -> Result<Outcome> {
    match cfg.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Domain(format!("config field `workers`: {e}")))?
            .install(|| execute(cfg)),
        None => execute(cfg),
    }
}

/// Entry point for the binary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let cfg = match resolve(&cli) {
        Ok(cfg) => cfg,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let out = match run_config(&cfg) {
        Ok(out) => out,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    if let Err(e) = write_outputs(&cfg, &out) {
        eprintln!("error: {e}");
        return EXIT_USAGE;
    }
    if !out.summary.is_empty() {
        eprintln!("{}", out.summary);
    }
    if out.passed {
        EXIT_OK
    } else {
        for f in &out.failures {
            eprintln!(
                "verification failed: {}",
                serde_json::to_string(f).expect("serializable")
            );
        }
        EXIT_VERIFICATION
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &[&str]) -> RunConfig {
        let mut full = vec!["liquid-drop"];
        full.extend_from_slice(args);
        resolve(&Cli::try_parse_from(full).unwrap()).unwrap()
    }

    #[test]
    fn flags_build_bodies() {
        let c = cfg(&["energy", "--body", "ellipsoid", "--axes", "1,1,2"]);
        assert_eq!(
            c.body,
            Some(BodySpec::Ellipsoid {
                semi_axes: [1.0, 1.0, 2.0]
            })
        );
        let c = cfg(&["energy", "--body", "star", "--coeff", "2,0,0.1", "--radius", "0.5"]);
        assert!(matches!(c.body.unwrap().build().unwrap(), Body::StarShape(_)));
        assert_eq!(
            cfg(&["sweep", "--check", "two-ball", "--volumes", "1:2:1"]).format,
            OutputFormat::Csv
        );
    }

    #[test]
    fn energy_ball_report() {
        let c = cfg(&["energy", "--body", "ball", "--radius", "1"]);
        let out = execute(&c).unwrap();
        let d = out.report["coulomb"]["value"].as_f64().unwrap();
        assert!((d - 10.5276).abs() < 1e-4);
        let text = render(&c, &out);
        let v: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(v["version"], VERSION);
        assert_eq!(v["seed"], 0);
        assert_eq!(v["config"]["command"], "energy");
    }

    #[test]
    fn sweep_is_seed_independent_for_closed_forms() {
        let a = cfg(&[
            "sweep",
            "--check",
            "two-ball",
            "--volumes",
            "3.4:3.6:0.01",
            "--seed",
            "1",
        ]);
        let b = cfg(&[
            "sweep",
            "--check",
            "two-ball",
            "--volumes",
            "3.4:3.6:0.01",
            "--seed",
            "2",
        ]);
        let (ra, rb) = (execute(&a).unwrap(), execute(&b).unwrap());
        assert_eq!(ra.report.as_array().unwrap().len(), 21);
        for (x, y) in ra.report.as_array().unwrap().iter().zip(rb.report.as_array().unwrap()) {
            assert_eq!(x["gap"], y["gap"]);
        }
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["liquid-drop", "energy", "--body", "mesh"]), EXIT_USAGE);
        assert_eq!(
            run(["liquid-drop", "sweep", "--check", "two-ball", "--volumes", "2:1:1"]),
            EXIT_USAGE
        );
        assert_eq!(run(["liquid-drop", "frobnicate"]), EXIT_USAGE);
    }
}
