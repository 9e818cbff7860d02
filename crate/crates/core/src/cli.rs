//! Command-line interface. Every subcommand reads JSON from `--input` (or a
//! few direct flags), writes JSON or CSV to `--output` (stdout by default),
//! and maps library errors to exit codes: 2 for bad input or geometry, 3 for
//! solver failures.

use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::arrangement::{
    lift_to_hyperplanes, EscapeAnalysis, HyperplaneArrangement, LiftRule, SubspaceArrangement,
    DEFAULT_MAX_HYPERPLANES,
};
use crate::cone::project::DEFAULT_PROJ_TOL;
use crate::cone::{appendix_b_cone, slice_half_width, PolyhedralCone};
use crate::error::{Error, Result};
use crate::jm::{jm_length, EscapePlanner, JmOpts, Polyline};
use crate::nbody::{Configuration, MassSystem};
use crate::quad::QuadOpts;
use crate::verify;

#[derive(Parser, Debug)]
#[command(
    name = "jmbound",
    version,
    about = "Hill-region escape certificates for the N-body problem at negative energy"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Escape rate of a polyhedral cone given by its unit outward normals.
    ConeRate(ConeRateArgs),
    /// Chamber-by-chamber escape rates of a hyperplane arrangement.
    ArrangementRate(ArrangementRateArgs),
    /// Diameter certificate for a mass system.
    NbodyCertificate(CertificateArgs),
    /// Walk one configuration out of the Hill region and tabulate the path.
    EscapeDemo(EscapeDemoArgs),
    /// Cross-sections of the slab cone {z ≥ a|x|, z ≥ b|y|} at K = 1.
    AppendixB(AppendixBArgs),
    /// Run the seeded self-verification suites.
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
struct IoArgs {
    /// Input JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConeRateArgs {
    #[command(flatten)]
    io: IoArgs,
    /// Stopping tolerance for the projection solvers.
    #[arg(long, default_value_t = DEFAULT_PROJ_TOL)]
    tol_proj: f64,
}

#[derive(Args, Debug)]
struct ArrangementRateArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, default_value_t = DEFAULT_PROJ_TOL)]
    tol_proj: f64,
    /// Refuse arrangements with more hyperplanes than this.
    #[arg(long, default_value_t = DEFAULT_MAX_HYPERPLANES)]
    max_hyperplanes: usize,
    /// Complement axis used when the input gives subspaces instead of
    /// hyperplanes: `first-axis` or `axis:<k>`.
    #[arg(long, default_value = "first-axis", value_parser = parse_lift_rule)]
    lift_rule: LiftRule,
}

#[derive(Args, Debug)]
struct CertificateArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, default_value_t = DEFAULT_PROJ_TOL)]
    tol_proj: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_HYPERPLANES)]
    max_hyperplanes: usize,
    /// Complement axis for the collision lift: `first-axis` or `axis:<k>`.
    #[arg(long, default_value = "first-axis", value_parser = parse_lift_rule)]
    lift_rule: LiftRule,
}

#[derive(Args, Debug)]
struct EscapeDemoArgs {
    #[command(flatten)]
    io: IoArgs,
    #[arg(long, default_value_t = DEFAULT_PROJ_TOL)]
    tol_proj: f64,
    #[arg(long, default_value_t = DEFAULT_MAX_HYPERPLANES)]
    max_hyperplanes: usize,
    #[arg(long, default_value = "first-axis", value_parser = parse_lift_rule)]
    lift_rule: LiftRule,
    /// Relative tolerance for the path-length quadrature in the CSV.
    #[arg(long, default_value_t = 1e-8)]
    tol_quad: f64,
    /// Number of arclength samples tabulated along the escape path.
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

#[derive(Args, Debug)]
struct AppendixBArgs {
    /// Slope bound along the x axis.
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    /// Slope bound along the y axis.
    #[arg(long, default_value_t = 0.5)]
    b: f64,
    #[arg(long, default_value_t = 2.0)]
    z_min: f64,
    #[arg(long, default_value_t = 100.0)]
    z_max: f64,
    /// Number of geometrically spaced heights.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Write the full JSON report here; stdout keeps the one-line summaries.
    #[arg(long)]
    output: Option<PathBuf>,
}

fn parse_lift_rule(s: &str) -> std::result::Result<LiftRule, String> {
    if s == "first-axis" {
        return Ok(LiftRule::Axis(0));
    }
    if let Some(rest) = s.strip_prefix("axis:") {
        let k: usize = rest.parse().map_err(|_| format!("bad axis index {rest:?}"))?;
        return Ok(LiftRule::Axis(k));
    }
    Err(format!("unknown lift rule {s:?}; expected `first-axis` or `axis:<k>`"))
}

/// JSON schema for a mass system.
#[derive(Debug, Serialize, Deserialize)]
pub struct SystemSpec {
    pub masses: Vec<f64>,
    pub dim: usize,
    #[serde(default = "default_g", rename = "G")]
    pub g: f64,
}

fn default_g() -> f64 {
    1.0
}

impl SystemSpec {
    pub fn build(&self) -> Result<MassSystem> {
        MassSystem::with_g(self.masses.clone(), self.dim, self.g)
    }
}

/// JSON schema for a cone or arrangement given by normal vectors.
#[derive(Debug, Serialize, Deserialize)]
pub struct NormalsSpec {
    pub normals: Vec<Vec<f64>>,
}

impl NormalsSpec {
    fn vectors(&self) -> Result<Vec<DVector<f64>>> {
        if self.normals.is_empty() {
            return Err(Error::Validation("no normals given".into()));
        }
        Ok(self.normals.iter().map(|n| DVector::from_row_slice(n)).collect())
    }
}

/// JSON schema for an arrangement: either hyperplane `normals` or subspace
/// `complement_bases`, the latter lifted to hyperplanes along the
/// `--lift-rule` axis.
#[derive(Debug, Serialize, Deserialize)]
pub struct ArrangementSpec {
    #[serde(default)]
    pub normals: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub complement_bases: Option<Vec<Vec<Vec<f64>>>>,
}

impl ArrangementSpec {
    fn build(&self, rule: LiftRule) -> Result<HyperplaneArrangement> {
        match (&self.normals, &self.complement_bases) {
            (Some(normals), None) => NormalsSpec { normals: normals.clone() }
                .vectors()
                .and_then(HyperplaneArrangement::new),
            (None, Some(bases)) => {
                let dim = bases
                    .first()
                    .and_then(|b| b.first())
                    .map(|v| v.len())
                    .ok_or_else(|| Error::Validation("empty complement basis".into()))?;
                let vectors = bases
                    .iter()
                    .map(|b| b.iter().map(|v| DVector::from_row_slice(v)).collect())
                    .collect();
                let sub = SubspaceArrangement::new(vectors, dim)?;
                lift_to_hyperplanes(&sub, rule)
            }
            _ => {
                Err(Error::Validation("give exactly one of `normals` or `complement_bases`".into()))
            }
        }
    }
}

/// JSON schema for an escape run: a system plus one configuration.
#[derive(Debug, Serialize, Deserialize)]
pub struct EscapeSpec {
    pub system: SystemSpec,
    /// One coordinate block per body.
    pub coords: Vec<Vec<f64>>,
}

#[derive(Debug, Serialize)]
struct ConeRateOutput {
    rate: f64,
    hull_margin: f64,
    direction: Vec<f64>,
    q_star: Vec<f64>,
}

#[derive(Debug, Serialize)]
struct ChamberRateOutput {
    signs: Vec<i8>,
    rate: f64,
}

#[derive(Debug, Serialize)]
struct ArrangementRateOutput {
    hyperplanes: usize,
    chambers: usize,
    global_rate: f64,
    tightest_chamber: Vec<i8>,
    rates: Vec<ChamberRateOutput>,
}

#[derive(Debug, Serialize)]
struct EscapeSummary {
    start_potential: f64,
    chamber_index: Option<usize>,
    escape_rate: Option<f64>,
    crossing_arclength: f64,
    jm_length: f64,
    bound_single: f64,
    within_bound: bool,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &PathBuf) -> Result<T> {
    let text = fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

fn emit(output: &Option<PathBuf>, content: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, content)?,
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(content.as_bytes())?;
        }
    }
    Ok(())
}

fn json_line<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn cone_rate(args: &ConeRateArgs) -> Result<()> {
    let spec: NormalsSpec = read_json(&args.io.input)?;
    let cone = PolyhedralCone::new(spec.vectors()?)?;
    let cert = cone.escape_rate(args.tol_proj)?;
    let out = ConeRateOutput {
        rate: cert.rate,
        hull_margin: cone.hull_margin(),
        direction: cert.direction.as_slice().to_vec(),
        q_star: cert.q_star.as_slice().to_vec(),
    };
    emit(&args.io.output, &json_line(&out)?)
}

fn arrangement_rate(args: &ArrangementRateArgs) -> Result<()> {
    let spec: ArrangementSpec = read_json(&args.io.input)?;
    let arr = spec.build(args.lift_rule)?;
    let analysis = EscapeAnalysis::analyze(arr, args.max_hyperplanes, args.tol_proj)?;
    let rates: Vec<ChamberRateOutput> = analysis
        .chambers()
        .iter()
        .map(|c| ChamberRateOutput { signs: c.chamber.signs.clone(), rate: c.certificate.rate })
        .collect();
    let out = ArrangementRateOutput {
        hyperplanes: analysis.arrangement().len(),
        chambers: rates.len(),
        global_rate: analysis.global_rate(),
        tightest_chamber: analysis.min_chamber().chamber.signs.clone(),
        rates,
    };
    emit(&args.io.output, &json_line(&out)?)
}

fn nbody_certificate(args: &CertificateArgs) -> Result<()> {
    let spec: SystemSpec = read_json(&args.io.input)?;
    let planner =
        EscapePlanner::new(spec.build()?, args.lift_rule, args.max_hyperplanes, args.tol_proj)?;
    emit(&args.io.output, &json_line(planner.certificate())?)
}

fn escape_demo(args: &EscapeDemoArgs) -> Result<()> {
    let spec: EscapeSpec = read_json(&args.io.input)?;
    let sys = spec.system.build()?;
    let q = Configuration::from_blocks(&spec.coords)?;
    if q.bodies() != sys.n_bodies() || q.dim() != sys.dim() {
        return Err(Error::Shape(format!(
            "coords give {} bodies in dimension {}, system has {} in dimension {}",
            q.bodies(),
            q.dim(),
            sys.n_bodies(),
            sys.dim()
        )));
    }
    let planner =
        EscapePlanner::new(sys.clone(), args.lift_rule, args.max_hyperplanes, args.tol_proj)?;
    let record = planner.escape_to_boundary(&q)?;

    let summary = EscapeSummary {
        start_potential: sys.potential(&q)?,
        chamber_index: record.chamber_index,
        escape_rate: record.escaper.as_ref().map(|e| e.rate),
        crossing_arclength: record.crossing_arclength,
        jm_length: record.jm_length,
        bound_single: planner.certificate().bound_single,
        within_bound: record.jm_length <= planner.certificate().bound_single + 1e-9,
    };
    eprintln!("{}", serde_json::to_string(&summary)?);

    // CSV of the walked path: arclength, configuration, potential, distance
    // to the collision locus, envelope product U·k·s, cumulative metric
    // length.
    let coord_names: Vec<String> = (0..sys.n_bodies())
        .flat_map(|a| (0..sys.dim()).map(move |j| format!("q{a}_{j}")))
        .collect();
    let mut csv =
        format!("s,{},potential,dist_to_collision,envelope,jm_cumlen\n", coord_names.join(","));
    let jm_opts = JmOpts {
        quad: QuadOpts { rel_tol: args.tol_quad, ..QuadOpts::default() },
        improper_endpoints: true,
    };
    let row = |s: f64, cfg: &Configuration, envelope: f64, cumlen: f64| -> Result<String> {
        let coords: Vec<String> = cfg.coords().iter().map(|c| format!("{c}")).collect();
        let u = sys.potential(cfg)?;
        let dist = sys.dist_to_collision(cfg)?;
        Ok(format!("{s},{},{u},{dist},{envelope},{cumlen}\n", coords.join(",")))
    };
    match &record.escaper {
        Some(escaper) => {
            let k = planner.certificate().constants.k;
            let steps = args.samples.max(1);
            let mut cumlen = 0.0;
            let mut prev = sys.unweighted(&escaper.point_at(0.0))?;
            csv.push_str(&row(0.0, &prev, 0.0, 0.0)?);
            for i in 1..=steps {
                let s = record.crossing_arclength * i as f64 / steps as f64;
                let cfg = sys.unweighted(&escaper.point_at(s))?;
                cumlen += jm_length(&Polyline::new(vec![prev, cfg.clone()])?, &sys, &jm_opts)?;
                let u = sys.potential(&cfg)?;
                let envelope = if u.is_finite() { u * k * s } else { f64::NAN };
                csv.push_str(&row(s, &cfg, envelope, cumlen)?);
                prev = cfg;
            }
        }
        None => csv.push_str(&row(0.0, &q, 0.0, 0.0)?),
    }
    emit(&args.io.output, &csv)
}

fn appendix_b(args: &AppendixBArgs) -> Result<()> {
    if args.samples < 2 || args.z_min <= 0.0 || args.z_max <= args.z_min {
        return Err(Error::Validation("need samples ≥ 2 and 0 < z_min < z_max".into()));
    }
    let cone = appendix_b_cone(args.a, args.b)?;
    let mut csv = String::from("z,half_width_x,half_width_y,aspect\n");
    for i in 0..args.samples {
        let t = i as f64 / (args.samples - 1) as f64;
        let z = args.z_min * (args.z_max / args.z_min).powf(t);
        let wx = slice_half_width(&cone, 2, z, 0)?;
        let wy = slice_half_width(&cone, 2, z, 1)?;
        csv.push_str(&format!("{z},{wx},{wy},{}\n", wy / wx));
    }
    emit(&args.output, &csv)
}

fn run_verify(args: &VerifyArgs) -> Result<bool> {
    let report = verify::run_all(args.seed)?;
    for suite in &report.suites {
        println!(
            "{} {} ({} checks)",
            if suite.passed { "PASS" } else { "FAIL" },
            suite.name,
            suite.checks
        );
    }
    let rendered = json_line(&report)?;
    if let Some(path) = &args.output {
        fs::write(path, &rendered)?;
    } else {
        print!("{rendered}");
    }
    Ok(report.passed)
}

fn dispatch(cli: &Cli) -> Result<bool> {
    match &cli.command {
        Command::ConeRate(args) => cone_rate(args).map(|()| true),
        Command::ArrangementRate(args) => arrangement_rate(args).map(|()| true),
        Command::NbodyCertificate(args) => nbody_certificate(args).map(|()| true),
        Command::EscapeDemo(args) => escape_demo(args).map(|()| true),
        Command::AppendixB(args) => appendix_b(args).map(|()| true),
        Command::Verify(args) => run_verify(args),
    }
}

/// Parse arguments and run; returns the process exit code.
pub fn run() -> i32 {
    let cli = Cli::parse();
    match dispatch(&cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    }
}
