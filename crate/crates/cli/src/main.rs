//! `tamed`: batch driver writing CSV and JSON reports for catalog surfaces.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;
use tamed_core::acceptance::{run_criterion, AcceptanceOptions, CriterionOutcome};
use tamed_core::comparison::ComparisonProfile;
use tamed_core::discretize::triangulate;
use tamed_core::error::Error;
use tamed_core::extrinsic::{
    critical_point_scan, direction, fit_growth, flow_bound_check, flow_start_on_ray, growth_curve_on, radial_flow,
    tamedness_on, window_for_radius, FlowBoundCheck, GrowthFit, TamednessOptions,
};
use tamed_core::integrals::{
    band_selector, chern_osserman_check, euler_characteristic, gauss_bonnet_annulus, growth_verdicts, total_curvature,
    ChernOssermanOptions, ExhaustionLimit, GrowthVerdicts,
};
use tamed_core::report::{
    json_report, write_flow_csv, write_geometry_csv, write_growth_csv, write_tone_csv, GeometryRow, ReportMeta,
};
use tamed_core::surface::{catalog, Window, CATALOG_NAMES};
use tamed_core::tone::{core_radius, tone_decay_report, EigenOptions, ToneOptions};
use tamed_core::{Immersion, Mesh, Tamedness};

use config::{ConfigError, Format, RadiiConfig, RunConfig};

const EXIT_CODES: &str = "\
Exit codes:
  0  success
  1  runtime failure (I/O, numerical breakdown)
  2  usage or configuration schema error
  3  window truncation: the parameter window does not cover a requested radius
  4  hypothesis refused: the surface is outside the regime of the requested estimate
  5  verification failure: a computed check did not hold";

#[derive(Parser, Debug)]
#[command(name = "tamed", version, about = "Growth, tamedness, total curvature and fundamental tone of immersed surfaces", after_help = EXIT_CODES)]
struct Cli {
    /// TOML run configuration; built-in defaults apply to omitted keys.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Catalog surface, e.g. `catenoid` or `helicoid(1)`.
    #[arg(long, global = true, value_name = "NAME")]
    surface: Option<String>,
    /// Output directory for reports.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Format of tabular reports.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Mesh cells per side.
    #[arg(long, global = true, value_name = "N")]
    resolution: Option<usize>,
    /// Radius grid.
    #[arg(long, global = true, value_name = "START:STOP:COUNT[:log]", value_parser = RadiiConfig::parse_spec)]
    radii: Option<RadiiConfig>,
    /// Seed of randomized trial functions and profiles.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
enum Command {
    /// List catalog surfaces.
    List,
    /// Pointwise geometry at every mesh vertex.
    Geometry,
    /// Area, perimeter and curvature integrals of extrinsic balls, with power-law fits.
    Growth,
    /// Tamedness estimate of the second fundamental form.
    Tamed,
    /// Gauss-Bonnet bookkeeping on an extrinsic annulus.
    GaussBonnet,
    /// Chern-Osserman sandwich for tamed surfaces of finite total curvature.
    ChernOsserman,
    /// Dirichlet fundamental tone of extrinsic balls against the transplant bound.
    Tone,
    /// Radial gradient flow lines and the angle bound along them.
    Flow,
    /// Full acceptance suite.
    VerifyAll,
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::WindowTruncation { .. } => 3,
            Error::Hypothesis { .. } | Error::RegimeNotEntered { .. } | Error::BallInsideCore { .. } => 4,
            Error::UnknownSurface(_) | Error::Invalid(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Self {
            code: 2,
            message: format!("configuration error in {e}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<bool, Failure>;

fn resolve(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = &cli.surface {
        cfg.surface.name = s.clone();
    }
    if let Some(o) = &cli.out {
        cfg.output.dir = o.clone();
    }
    if let Some(f) = cli.format {
        cfg.output.format = f;
    }
    if let Some(n) = cli.resolution {
        cfg.mesh.resolution = n;
    }
    if let Some(r) = cli.radii {
        cfg.radii = r;
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    Ok(cfg)
}

struct Run {
    cfg: RunConfig,
    meta: ReportMeta,
    radii: Vec<f64>,
}

impl Run {
    fn immersion(&self) -> Result<Immersion, Failure> {
        Ok(catalog(&self.cfg.surface.name)?)
    }

    fn mesh_for(&self, imm: &Immersion, r: f64) -> Result<Mesh, Failure> {
        let window = match self.cfg.surface.window {
            Some([u0, u1, v0, v1]) => Window::new(u0, u1, v0, v1),
            None => window_for_radius(imm, r, self.cfg.mesh.margin)?,
        };
        let n = self.cfg.mesh.resolution;
        Ok(triangulate(imm, window, n, n)?)
    }

    fn rmax(&self) -> f64 {
        self.radii[self.radii.len() - 1]
    }

    fn tamed(&self, mesh: &Mesh, radii: &[f64]) -> Result<Tamedness, Failure> {
        let opts = TamednessOptions {
            slack: self.cfg.tolerances.tamed_slack,
            ..TamednessOptions::default()
        };
        Ok(tamedness_on(mesh, radii, self.cfg.analysis.c, opts)?)
    }

    /// Fine grid for locating the core radius `t_c`.
    fn core_grid(&self) -> Vec<f64> {
        let n = 64;
        (1..=n).map(|k| self.rmax() * k as f64 / n as f64).collect()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.cfg.output.dir.join(name)
    }

    fn write_json<S: Serialize>(&self, name: &str, kind: &str, body: &S) -> Result<PathBuf, Failure> {
        let path = self.path(name);
        fs::write(&path, json_report(kind, &self.meta, body)?)?;
        Ok(path)
    }

    /// Writes a table in the configured format: `csv` through `write_csv`, `json` as an envelope.
    fn write_table<S: Serialize>(
        &self,
        stem: &str,
        kind: &str,
        body: &S,
        write_csv: impl FnOnce(fs::File) -> tamed_core::error::Result<()>,
    ) -> Result<PathBuf, Failure> {
        match self.cfg.output.format {
            Format::Csv => {
                let path = self.path(&format!("{stem}.csv"));
                write_csv(fs::File::create(&path)?)?;
                Ok(path)
            }
            Format::Json => self.write_json(&format!("{stem}.json"), kind, body),
        }
    }
}

fn report_paths(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn cmd_list() -> Outcome {
    for name in CATALOG_NAMES {
        let imm = catalog::<f64>(name)?;
        println!("{name:<24}{}", if imm.is_minimal() { "minimal" } else { "" });
    }
    Ok(true)
}

fn cmd_geometry(run: &Run) -> Outcome {
    let imm = run.immersion()?;
    let mesh = run.mesh_for(&imm, run.rmax())?;
    let rows: Vec<GeometryRow<f64>> = mesh
        .vertices
        .iter()
        .map(|v| {
            let g = &v.geom;
            GeometryRow {
                u: v.u,
                v: v.v,
                position: [g.position[0], g.position[1], g.position[2]],
                k: g.k,
                h_norm: g.mean_curvature_norm(),
                alpha_norm: g.alpha_norm,
                r: v.r,
                grad_r: v.grad_r,
                normal_defect: v.normal_defect,
            }
        })
        .collect();
    let path = run.write_table("geometry", "geometry", &rows, |f| write_geometry_csv(f, &rows))?;
    report_paths(&[path]);
    Ok(true)
}

#[derive(Serialize)]
struct GrowthSummary {
    surface: String,
    fit: GrowthFit<f64>,
    verdicts: GrowthVerdicts,
    total_curvature: ExhaustionLimit<f64>,
    alpha_l2: ExhaustionLimit<f64>,
}

fn cmd_growth(run: &Run) -> Outcome {
    let imm = run.immersion()?;
    let mesh = run.mesh_for(&imm, run.rmax())?;
    let curve = growth_curve_on(&mesh, &run.radii)?;
    let fit = fit_growth(&curve, run.cfg.analysis.tail_fraction)?;
    let summary = GrowthSummary {
        surface: run.cfg.surface.name.clone(),
        verdicts: growth_verdicts(&fit, run.cfg.tolerances.growth),
        total_curvature: total_curvature(&curve)?,
        alpha_l2: tamed_core::integrals::alpha_l2_integral(&curve)?,
        fit,
    };
    let table = run.write_table("growth", "growth_curve", &curve, |f| write_growth_csv(f, &curve))?;
    let json = run.write_json("growth_fit.json", "growth_fit", &summary)?;
    println!(
        "p_area = {:.6}  q_perim = {:.6}  quadratic_area = {}  linear_perimeter = {}",
        summary.fit.p_area, summary.fit.q_perim, summary.verdicts.quadratic_area, summary.verdicts.linear_perimeter
    );
    report_paths(&[table, json]);
    Ok(true)
}

fn cmd_tamed(run: &Run) -> Outcome {
    let imm = run.immersion()?;
    let mesh = run.mesh_for(&imm, run.rmax())?;
    let t = run.tamed(&mesh, &run.radii)?;
    let path = run.write_json("tamed.json", "tamedness", &t)?;
    println!(
        "a_estimate = {:.6}  verdict = {:?}  t_c = {:?}",
        t.a_estimate, t.verdict, t.t_c
    );
    report_paths(&[path]);
    Ok(true)
}

fn cmd_gauss_bonnet(run: &Run) -> Outcome {
    let [r1, r2] = run.cfg.analysis.annulus.unwrap_or([run.radii[0], run.rmax()]);
    let imm = run.immersion()?;
    let mesh = run.mesh_for(&imm, r2)?;
    let a = gauss_bonnet_annulus(&mesh, r1, r2)?;
    let path = run.write_json("gauss_bonnet.json", "gauss_bonnet", &a)?;
    let ok = a.gb_residual <= run.cfg.tolerances.gauss_bonnet;
    println!(
        "annulus ({r1}, {r2}): residual = {:.3e}  chi = {}  critical = {}",
        a.gb_residual, a.expected_chi, a.critical
    );
    report_paths(&[path]);
    Ok(ok)
}

fn cmd_chern_osserman(run: &Run) -> Outcome {
    let imm = run.immersion()?;
    let mesh = run.mesh_for(&imm, run.rmax())?;
    let curve = growth_curve_on(&mesh, &run.radii)?;
    let tamed = run.tamed(&mesh, &run.radii)?;
    let chi = match run.cfg.analysis.chi {
        Some(c) => c,
        None => euler_characteristic(&mesh, band_selector(&mesh, 0.0, run.rmax()))?,
    };
    let opts = ChernOssermanOptions {
        slack: run.cfg.tolerances.sandwich,
        tail_fraction: run.cfg.analysis.tail_fraction,
        shiohama_tolerance: run.cfg.tolerances.shiohama,
    };
    let r = chern_osserman_check(&mesh, chi, &curve, &tamed, opts)?;
    let path = run.write_json("chern_osserman.json", "chern_osserman", &r)?;
    println!(
        "chi = {}  lower = {:.6}  middle = {:.6}  upper = {:.6}  holds = {}  shiohama = {:.6}",
        r.chi, r.lower, r.middle, r.upper, r.holds, r.shiohama
    );
    report_paths(&[path]);
    Ok(r.holds && r.shiohama_holds)
}

fn cmd_tone(run: &Run) -> Outcome {
    let imm = run.immersion()?;
    let core_mesh = run.mesh_for(&imm, run.rmax())?;
    let tamed = run.tamed(&core_mesh, &run.core_grid())?;
    drop(core_mesh);
    let opts = ToneOptions {
        resolution: run.cfg.mesh.resolution,
        margin: run.cfg.mesh.margin,
        delta: run.cfg.analysis.delta.into(),
        eigen: EigenOptions {
            mass: run.cfg.mesh.mass.into(),
            tol: run.cfg.tolerances.eigen,
            ..EigenOptions::default()
        },
    };
    let report = tone_decay_report(&imm, &run.radii, &tamed, run.cfg.analysis.c, &opts)?;
    let est = &report.estimates;
    let table = run.write_table("tone", "tone", est, |f| write_tone_csv(f, est))?;
    let json = run.write_json("tone_summary.json", "tone_summary", &report)?;
    for e in est {
        println!(
            "r = {:<8} lambda1_mesh = {:.6e}  bound = {:.6e}  l = {}",
            e.r, e.lambda1_mesh, e.lambda1_barta, e.l_used
        );
    }
    println!(
        "decay exponent = {:.4}  dominated = {}",
        report.decay_exponent, report.dominated
    );
    report_paths(&[table, json]);
    Ok(report.dominated)
}

#[derive(Serialize)]
struct FlowLine {
    angle: f64,
    start_u: f64,
    start_v: f64,
    samples: usize,
    check: FlowBoundCheck<f64>,
}

#[derive(Serialize)]
struct FlowSummary {
    c: f64,
    r0: f64,
    length: f64,
    min_grad_r_outside: f64,
    lines: Vec<FlowLine>,
    holds: bool,
}

fn cmd_flow(run: &Run) -> Outcome {
    let imm = run.immersion()?;
    let fc = &run.cfg.flow;
    let c = run.cfg.analysis.c;
    let mesh = run.mesh_for(&imm, run.rmax())?;
    let r0 = match fc.r0 {
        Some(r) => r,
        None => {
            let tamed = run.tamed(&mesh, &run.core_grid())?;
            core_radius(&tamed, c).ok_or_else(|| Failure {
                code: 4,
                message: format!(
                    "no core radius: tail suprema never drop below c = {c} on [0, {}]",
                    run.rmax()
                ),
            })?
        }
    };
    let scan = critical_point_scan(&mesh, r0);
    let h = ComparisonProfile::flat(r0 + fc.length + 1.0, 0.01);
    let origin = imm.basepoint();
    let mut lines = Vec::with_capacity(fc.trajectories);
    let mut paths = Vec::new();
    for k in 0..fc.trajectories {
        let angle = std::f64::consts::TAU * (k as f64 + 0.5) / fc.trajectories as f64;
        let start = flow_start_on_ray(&imm, origin, direction(angle), r0)?;
        let traj = radial_flow(&imm, start, fc.length, fc.step)?;
        let check = flow_bound_check(&traj, c, r0, &h, run.cfg.tolerances.flow);
        paths.push(run.write_table(&format!("flow_{k:03}"), "flow_trajectory", &traj, |f| {
            write_flow_csv(f, &traj)
        })?);
        lines.push(FlowLine {
            angle,
            start_u: start.0,
            start_v: start.1,
            samples: traj.samples.len(),
            check,
        });
    }
    let holds = lines.iter().all(|l| l.check.holds);
    let summary = FlowSummary {
        c,
        r0,
        length: fc.length,
        min_grad_r_outside: scan.min_grad,
        holds,
        lines,
    };
    paths.push(run.write_json("flow.json", "flow_bound", &summary)?);
    let held = summary.lines.iter().filter(|l| l.check.holds).count();
    println!(
        "r0 = {r0}  c = {c}: bound holds on {held}/{} trajectories",
        summary.lines.len()
    );
    report_paths(&paths[paths.len() - 1..]);
    Ok(holds)
}

fn cmd_verify_all(run: &Run) -> Outcome {
    let opts = AcceptanceOptions {
        resolution: run.cfg.mesh.resolution,
        seed: run.cfg.seed,
    };
    let mut outcomes: Vec<CriterionOutcome> = Vec::with_capacity(12);
    for id in 1..=12 {
        let o = run_criterion(id, &opts);
        println!("{}", o.summary_line());
        for line in o.detail_lines().iter().filter(|_| !o.passed) {
            println!("{line}");
        }
        outcomes.push(o);
    }
    let path = run.write_json("verify.json", "verify_all", &outcomes)?;
    report_paths(&[path]);
    Ok(outcomes.iter().all(|o| o.passed))
}

fn execute(cli: &Cli) -> Outcome {
    if cli.command == Command::List {
        return cmd_list();
    }
    let cfg = resolve(cli)?;
    fs::create_dir_all(&cfg.output.dir)?;
    let run = Run {
        meta: cfg.meta(),
        radii: cfg.radii.values(),
        cfg,
    };
    match cli.command {
        Command::List => unreachable!(),
        Command::Geometry => cmd_geometry(&run),
        Command::Growth => cmd_growth(&run),
        Command::Tamed => cmd_tamed(&run),
        Command::GaussBonnet => cmd_gauss_bonnet(&run),
        Command::ChernOsserman => cmd_chern_osserman(&run),
        Command::Tone => cmd_tone(&run),
        Command::Flow => cmd_flow(&run),
        Command::VerifyAll => cmd_verify_all(&run),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("tamed: verification failed");
            ExitCode::from(5)
        }
        Err(f) => {
            eprintln!("tamed: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
