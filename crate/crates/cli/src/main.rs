//! Batch front end: fixture generation, pipeline orchestration and report
//! emission. Exit codes: 0 ok, 2 config, 3 mesh, 4 solver, 5 audit.

mod config;

use std::fmt::Write as _;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use mwce_core::bounds::{boundary_distance, sandwich_audit};
use mwce_core::complex::generators::{generate_model, ModelReport, ModelSpec};
use mwce_core::complex::meshio;
use mwce_core::dec::{boundary_spectrum, Bc, MetricOps, Tolerances};
use mwce_core::error::ErrorClass;
use mwce_core::hodge::harmonic_basis;
use mwce_core::les::exactness_audit;
use mwce_core::modes::{oracle_t0, s_matrix, time_delay, PiecewiseCylinderModel};
use mwce_core::scatlen::{q_inverse_csv, report_to_file, run_scatlen};
use mwce_core::CellComplex;
use num_complex::Complex64 as C64;

use config::{parse_f64_list, parse_segments, parse_usize_list, ConfigMap};

#[derive(Parser)]
#[command(name = "mwce", version, about = "Discrete scattering lengths on manifolds with cylindrical ends")]
struct Cli {
    /// Key-value config file; command-line flags override its entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct GeometryArgs {
    /// Builtin model: disk | annulus | flat_cylinder | junction | genus1_one_hole
    #[arg(long)]
    model: Option<String>,
    /// Mesh file in mwce-mesh v1 format (alternative to --model).
    #[arg(long)]
    mesh: Option<PathBuf>,
    /// Circumferential resolution.
    #[arg(long)]
    res: Option<usize>,
    /// Disk radius.
    #[arg(long, visible_alias = "r")]
    radius: Option<f64>,
    #[arg(long)]
    r_inner: Option<f64>,
    #[arg(long)]
    r_outer: Option<f64>,
    /// Cylinder length.
    #[arg(long, visible_alias = "L")]
    length: Option<f64>,
    /// Cylinder circumference.
    #[arg(long, visible_alias = "circ")]
    circumference: Option<f64>,
    #[arg(long)]
    len1: Option<f64>,
    #[arg(long)]
    len2: Option<f64>,
    #[arg(long)]
    vol1: Option<f64>,
    #[arg(long)]
    vol2: Option<f64>,
    /// Junction transition tilt (k = 1 thickness modulation).
    #[arg(long)]
    tilt: Option<f64>,
}

#[derive(Args, Clone, Default)]
struct PipelineArgs {
    /// Degrees to process (comma list).
    #[arg(long, value_name = "P")]
    p: Option<String>,
    /// Cylinder lengths a for the q(a) study (comma list).
    #[arg(long, value_name = "LIST")]
    a: Option<String>,
    /// RNG seed for harmonic-basis draws.
    #[arg(long)]
    seed: Option<u64>,
    /// Admissible slope defect of the affine fit.
    #[arg(long)]
    slope_tol: Option<f64>,
    /// Output directory (stdout summaries otherwise).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Mesh summary: cells, volumes, boundary components, collar.
    MeshInfo {
        #[command(flatten)]
        geo: GeometryArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
    },
    /// Harmonic space dimensions and the long-exact-sequence rank table.
    Hodge {
        #[command(flatten)]
        geo: GeometryArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Dump assembled matrices in coordinate text format.
        #[arg(long)]
        debug_dump: bool,
    },
    /// Scattering length from the q(a) extrapolation.
    Scatlen {
        #[command(flatten)]
        geo: GeometryArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
    },
    /// Transfer-matrix oracle on piecewise-cylinder models.
    Modes {
        /// Segments as LENGTHxWEIGHT, comma separated.
        #[arg(long)]
        segments: Option<String>,
        /// Transverse mode eigenvalue.
        #[arg(long)]
        nu: Option<f64>,
        /// Grid points in (0, lambda_max).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        lambda_max: Option<f64>,
        #[command(flatten)]
        pipe: PipelineArgs,
    },
    /// Geometric bound report (sandwich checks).
    Bounds {
        #[command(flatten)]
        geo: GeometryArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
    },
    /// Resolution ladder: spectra, scattering lengths, star defects, orders.
    Convergence {
        #[command(flatten)]
        geo: GeometryArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Comma list of resolutions (at least 3).
        #[arg(long)]
        resolutions: Option<String>,
    },
    /// Full pipeline: mesh summary, rank table, scattering report, bounds,
    /// oracle comparison.
    Run {
        #[command(flatten)]
        geo: GeometryArgs,
        #[command(flatten)]
        pipe: PipelineArgs,
        /// Compare against the 1-D transfer-matrix oracle.
        #[arg(long)]
        oracle: bool,
    },
}

struct CliError {
    code: i32,
    message: String,
}

impl From<mwce_core::Error> for CliError {
    fn from(e: mwce_core::Error) -> Self {
        let code = match e.class() {
            ErrorClass::Config => 2,
            ErrorClass::Mesh => 3,
            ErrorClass::Solver => 4,
            ErrorClass::Audit => 5,
        };
        CliError { code, message: e.to_string() }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError { code: 2, message: format!("{e:#}") }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError { code: 3, message: e.to_string() }
    }
}

type CliResult<T> = Result<T, CliError>;

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    };
    std::process::exit(code);
}

fn load_config(path: &Option<PathBuf>) -> CliResult<ConfigMap> {
    match path {
        Some(p) => Ok(ConfigMap::from_file(p)?),
        None => Ok(ConfigMap::default()),
    }
}

fn dispatch(cli: Cli) -> CliResult<()> {
    let cfg = load_config(&cli.config)?;
    match cli.command {
        Command::MeshInfo { geo, pipe } => mesh_info(&geo, &pipe, &cfg),
        Command::Hodge { geo, pipe, debug_dump } => hodge_cmd(&geo, &pipe, &cfg, debug_dump),
        Command::Scatlen { geo, pipe } => scatlen_cmd(&geo, &pipe, &cfg),
        Command::Modes { segments, nu, grid, lambda_max, pipe } => {
            modes_cmd(segments, nu, grid, lambda_max, &pipe, &cfg)
        }
        Command::Bounds { geo, pipe } => bounds_cmd(&geo, &pipe, &cfg),
        Command::Convergence { geo, pipe, resolutions } => {
            convergence_cmd(&geo, &pipe, resolutions, &cfg)
        }
        Command::Run { geo, pipe, oracle } => run_cmd(&geo, &pipe, oracle, &cfg),
    }
}

fn build_geometry(
    geo: &GeometryArgs,
    cfg: &ConfigMap,
    res_override: Option<usize>,
) -> CliResult<(CellComplex, Option<ModelReport>)> {
    if let Some(path) = &geo.mesh {
        let m = meshio::read_mesh_file(path)?;
        return Ok((m, None));
    }
    let model = cfg
        .pick_string(geo.model.clone(), "model")?
        .ok_or_else(|| CliError { code: 2, message: "need --model or --mesh".into() })?;
    let res = res_override.or(cfg.pick_usize(geo.res, "res")?).unwrap_or(32);
    let spec = match model.as_str() {
        "disk" => ModelSpec::Disk { radius: cfg.pick_f64(geo.radius, "radius")?.unwrap_or(1.0) },
        "annulus" => ModelSpec::Annulus {
            r_inner: cfg.pick_f64(geo.r_inner, "r_inner")?.unwrap_or(1.0),
            r_outer: cfg.pick_f64(geo.r_outer, "r_outer")?.unwrap_or(2.0),
        },
        "flat_cylinder" => ModelSpec::FlatCylinder {
            length: cfg.pick_f64(geo.length, "length")?.unwrap_or(2.0),
            circumference: cfg.pick_f64(geo.circumference, "circumference")?.unwrap_or(1.0),
        },
        "junction" => ModelSpec::Junction {
            lengths: (
                cfg.pick_f64(geo.len1, "len1")?.unwrap_or(1.0),
                cfg.pick_f64(geo.len2, "len2")?.unwrap_or(1.0),
            ),
            volumes: (
                cfg.pick_f64(geo.vol1, "vol1")?.unwrap_or(2.0),
                cfg.pick_f64(geo.vol2, "vol2")?.unwrap_or(1.0),
            ),
            tilt: cfg.pick_f64(geo.tilt, "tilt")?.unwrap_or(0.35),
        },
        "genus1_one_hole" => ModelSpec::Genus1OneHole,
        other => {
            return Err(CliError { code: 2, message: format!("unknown model `{other}`") });
        }
    };
    let (m, rep) = generate_model(&spec, res)?;
    Ok((m, Some(rep)))
}

struct PipelineSettings {
    degrees: Vec<usize>,
    schedule: Vec<f64>,
    seed: u64,
    slope_tol: f64,
    out: Option<PathBuf>,
    tol: Tolerances,
}

fn require_fit_schedule(set: &PipelineSettings) -> CliResult<()> {
    if set.schedule.len() < 3 {
        return Err(CliError {
            code: 2,
            message: "the affine fit needs at least 3 cylinder lengths in --a".into(),
        });
    }
    Ok(())
}

fn settings(pipe: &PipelineArgs, cfg: &ConfigMap) -> CliResult<PipelineSettings> {
    let degrees = match cfg.pick_string(pipe.p.clone(), "p")? {
        Some(s) => parse_usize_list(&s)?,
        None => vec![0],
    };
    let schedule = match cfg.pick_string(pipe.a.clone(), "a")? {
        Some(s) => parse_f64_list(&s)?,
        None => vec![1.0, 2.0, 3.0],
    };
    if schedule.windows(2).any(|w| w[0] >= w[1]) {
        return Err(CliError { code: 2, message: "schedule `a` must be strictly increasing".into() });
    }
    let seed = cfg.pick_u64(pipe.seed, "seed")?.unwrap_or(0x5eed_0001);
    let slope_tol = cfg.pick_f64(pipe.slope_tol, "slope_tol")?.unwrap_or(1e-3);
    if !(slope_tol > 0.0) {
        return Err(CliError { code: 2, message: "slope_tol must be positive".into() });
    }
    let out = pipe.out.clone().or_else(|| cfg.get("out").map(PathBuf::from));
    Ok(PipelineSettings { degrees, schedule, seed, slope_tol, out, tol: Tolerances::default() })
}

fn emit(out: &Option<PathBuf>, name: &str, content: &str) -> CliResult<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join(name), content)?;
        }
        None => {
            println!("--- {name} ---");
            print!("{content}");
            if !content.ends_with('\n') {
                println!();
            }
        }
    }
    Ok(())
}

fn mesh_summary(m: &CellComplex, rep: Option<&ModelReport>) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "dimension {}", m.dim());
    for k in 0..=m.dim() {
        let _ = writeln!(s, "cells[{k}] {}", m.cell_count(k));
    }
    let _ = writeln!(s, "euler_characteristic {}", m.euler_characteristic());
    let _ = writeln!(s, "volume {}", m.volume());
    if let Some(b) = m.boundary_structure() {
        for (ci, comp) in b.components.iter().enumerate() {
            let _ = writeln!(
                s,
                "boundary {} volume {} vertices {}",
                comp.name,
                m.boundary_component_volume(ci),
                comp.y_vertices.len()
            );
        }
    }
    if let Some(c) = m.collar() {
        let _ = writeln!(s, "collar layers {} thickness {}", c.layers, c.thickness);
        // join quality: collar thickness against the shortest edge anywhere
        let min_edge = m.edge_lengths().iter().cloned().fold(f64::INFINITY, f64::min);
        let _ = writeln!(s, "join_quality thickness/min_edge {}", c.thickness / min_edge);
    }
    if let Some(r) = rep {
        let _ = writeln!(s, "model {}", r.kind);
        let _ = writeln!(s, "volume_nominal {}", r.volume.nominal);
        for b in &r.boundary {
            let _ = writeln!(s, "boundary_nominal {} {}", b.name, b.nominal);
        }
        if let Some(c) = r.calibration_residual {
            let _ = writeln!(s, "calibration_residual {c:e}");
        }
    }
    s
}

fn mesh_info(geo: &GeometryArgs, pipe: &PipelineArgs, cfg: &ConfigMap) -> CliResult<()> {
    let set = settings(pipe, cfg)?;
    let (m, rep) = build_geometry(geo, cfg, None)?;
    emit(&set.out, "mesh_summary.txt", &mesh_summary(&m, rep.as_ref()))
}

fn hodge_cmd(
    geo: &GeometryArgs,
    pipe: &PipelineArgs,
    cfg: &ConfigMap,
    debug_dump: bool,
) -> CliResult<()> {
    let set = settings(pipe, cfg)?;
    let (m, _) = build_geometry(geo, cfg, None)?;
    let ops = MetricOps::assemble(&m)?;
    let mut text = String::new();
    for p in 0..=m.dim() {
        let abs = harmonic_basis(&m, &ops, p, Bc::Absolute, set.seed, &set.tol)?;
        let rel = harmonic_basis(&m, &ops, p, Bc::Relative, set.seed, &set.tol)?;
        let _ = writeln!(
            text,
            "degree {p}: dim H^p(M) = {}, dim H^p(M,Y) = {}, residuals <= {:.3e}",
            abs.dim(),
            rel.dim(),
            abs.residuals.iter().chain(&rel.residuals).cloned().fold(0.0, f64::max)
        );
    }
    let audit = exactness_audit(&m, &ops, set.seed, &set.tol)?;
    emit(&set.out, "harmonic_dims.txt", &text)?;
    emit(&set.out, "rank_table.csv", &audit.to_csv())?;
    if debug_dump {
        for p in 0..=m.dim() {
            let mut buf = Vec::new();
            mwce_core::dec::dump_matrix(ops.mass(p), &mut buf)?;
            emit(&set.out, &format!("mass_{p}.txt"), std::str::from_utf8(&buf).unwrap_or_default())?;
        }
    }
    Ok(())
}

/// First threshold μ₁ of the boundary Laplacian, fed to the fit diagnostics.
fn boundary_mu1(m: &CellComplex, p: usize, tol: &Tolerances) -> CliResult<f64> {
    let y = &m
        .boundary_structure()
        .ok_or_else(|| CliError { code: 3, message: "model has no boundary".into() })?
        .complex;
    let betti = mwce_core::homology::betti_numbers(y, mwce_core::homology::Flavor::Absolute)?;
    let count = betti.iter().sum::<usize>() + 2;
    let spec = boundary_spectrum(y, p, count, tol)?;
    Ok(spec.mu1)
}

fn scatlen_cmd(geo: &GeometryArgs, pipe: &PipelineArgs, cfg: &ConfigMap) -> CliResult<()> {
    let set = settings(pipe, cfg)?;
    require_fit_schedule(&set)?;
    let (m, _) = build_geometry(geo, cfg, None)?;
    let ops = MetricOps::assemble(&m)?;
    for &p in &set.degrees {
        let mu1 = boundary_mu1(&m, p, &set.tol)?;
        let out = run_scatlen(&m, &ops, p, &set.schedule, mu1, set.seed, set.slope_tol, &set.tol)?;
        let file = report_to_file(&out.report, Some(&out.audit), &out.scattering.y_basis_p);
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| CliError { code: 4, message: e.to_string() })?;
        emit(&set.out, &format!("scattering_report_p{p}.json"), &json)?;
        emit(&set.out, &format!("q_inverse_p{p}.csv"), &q_inverse_csv(&out.samples_p))?;
        println!(
            "p = {p}: T0 eigenvalues {:?}, slope defect {:.3e}, kappa {:.4}",
            out.report.eigenvalues, out.report.fit.slope_defect, out.report.fit.kappa
        );
    }
    Ok(())
}

fn modes_cmd(
    segments: Option<String>,
    nu: Option<f64>,
    grid: Option<usize>,
    lambda_max: Option<f64>,
    pipe: &PipelineArgs,
    cfg: &ConfigMap,
) -> CliResult<()> {
    let set = settings(pipe, cfg)?;
    let segs = match cfg.pick_string(segments, "segments")? {
        Some(s) => parse_segments(&s)?,
        None => return Err(CliError { code: 2, message: "need --segments LxW,LxW,...".into() }),
    };
    let nu = cfg.pick_f64(nu, "nu")?.unwrap_or(0.0);
    let model = PiecewiseCylinderModel::new(segs, nu)?;
    let grid = cfg.pick_usize(grid, "grid")?.unwrap_or(100);
    let lambda_max =
        cfg.pick_f64(lambda_max, "lambda_max")?.unwrap_or(0.9 * 2.0 * std::f64::consts::PI);
    let mut csv = String::from(
        "lambda,re_s11,im_s11,re_s12,im_s12,re_s21,im_s21,re_s22,im_s22,\
         re_t11,im_t11,re_t12,im_t12,re_t21,im_t21,re_t22,im_t22\n",
    );
    let lo = if nu > 0.0 { nu.sqrt() * (1.0 + 1e-9) } else { 0.0 };
    for k in 1..=grid {
        let lam = lo + (lambda_max - lo) * k as f64 / grid as f64;
        let sm = s_matrix(&model, C64::new(lam, 0.0))?;
        let t = time_delay(&model, C64::new(lam, 0.0))?;
        let _ = write!(csv, "{lam}");
        for i in 0..2 {
            for j in 0..2 {
                let _ = write!(csv, ",{},{}", sm.s[i][j].re, sm.s[i][j].im);
            }
        }
        for i in 0..2 {
            for j in 0..2 {
                let _ = write!(csv, ",{},{}", t[i][j].re, t[i][j].im);
            }
        }
        csv.push('\n');
    }
    emit(&set.out, "modes_grid.csv", &csv)?;
    if nu == 0.0 {
        let t0 = oracle_t0(&model)?;
        println!("oracle T0: t1 = {}, t2 = {}", t0.t1, t0.t2);
    }
    Ok(())
}

fn bounds_csv(report: &mwce_core::bounds::BoundReport) -> String {
    let mut s = String::from("quantity,value,flag,margin\n");
    let _ = writeln!(s, "vol_m,{},exact,", report.vol_m);
    for (i, v) in report.vol_y.iter().enumerate() {
        let _ = writeln!(s, "vol_y{},{},exact,", i + 1, v);
    }
    let _ = writeln!(s, "vol_star,{},discretized,", report.vol_star);
    let _ = writeln!(s, "nu1,{},discretized,", report.nu1);
    if let Some(d) = report.dist_y1_y2 {
        let _ = writeln!(s, "dist_y1_y2,{d},upper_bound,");
    }
    for (name, st) in &report.stable_norms {
        let flag = if st.exact { "exact" } else { "upper_bound" };
        let _ = writeln!(s, "stable_norm {name},{},{flag},", st.value);
    }
    if let Some(c1) = report.c1 {
        let _ = writeln!(s, "C1,{c1},bound,");
    }
    if let Some(c2) = report.c2 {
        let _ = writeln!(s, "C2,{c2},bound,");
    }
    for c in &report.checks {
        let _ = writeln!(
            s,
            "check {},{},{:?},{}",
            c.name.replace(',', ";"),
            c.value,
            c.verdict,
            c.margin_lower.min(c.margin_upper)
        );
    }
    s
}

fn bounds_cmd(geo: &GeometryArgs, pipe: &PipelineArgs, cfg: &ConfigMap) -> CliResult<()> {
    let set = settings(pipe, cfg)?;
    require_fit_schedule(&set)?;
    let (m, _) = build_geometry(geo, cfg, None)?;
    let ops = MetricOps::assemble(&m)?;
    for &p in &set.degrees {
        let mu1 = boundary_mu1(&m, p, &set.tol)?;
        let out = run_scatlen(&m, &ops, p, &set.schedule, mu1, set.seed, set.slope_tol, &set.tol)?;
        let y = &m.boundary_structure().unwrap().complex;
        let betti = mwce_core::homology::betti_numbers(y, mwce_core::homology::Flavor::Absolute)?;
        let spec = boundary_spectrum(y, p, betti.iter().sum::<usize>() + 2, &set.tol)?;
        // generated product models realize the axial distance exactly
        let dist_exact = geo.mesh.is_none();
        let report = sandwich_audit(&m, &out.report, &spec, dist_exact)?;
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError { code: 4, message: e.to_string() })?;
        emit(&set.out, &format!("bound_report_p{p}.json"), &json)?;
        emit(&set.out, &format!("bounds_p{p}.csv"), &bounds_csv(&report))?;
        for c in &report.checks {
            println!("p = {p}: {} -> {:?}", c.name, c.verdict);
        }
    }
    Ok(())
}

fn convergence_cmd(
    geo: &GeometryArgs,
    pipe: &PipelineArgs,
    resolutions: Option<String>,
    cfg: &ConfigMap,
) -> CliResult<()> {
    let set = settings(pipe, cfg)?;
    let res_list = match cfg.pick_string(resolutions, "resolutions")? {
        Some(s) => parse_usize_list(&s)?,
        None => vec![16, 32, 64],
    };
    if res_list.len() < 3 {
        return Err(CliError { code: 2, message: "need at least 3 resolutions".into() });
    }
    require_fit_schedule(&set)?;
    let p = *set.degrees.first().unwrap_or(&0);
    use rayon::prelude::*;
    type Row = (usize, f64, Vec<f64>, f64, f64, f64);
    let rows: Vec<CliResult<Row>> = res_list
        .par_iter()
        .map(|&res| {
            let (m, _) = build_geometry(geo, cfg, Some(res))?;
            let ops = MetricOps::assemble(&m)?;
            let mu1 = boundary_mu1(&m, p, &set.tol)?;
            let out =
                run_scatlen(&m, &ops, p, &set.schedule, mu1, set.seed, set.slope_tol, &set.tol)?;
            let spec = {
                let y = &m.boundary_structure().unwrap().complex;
                let betti =
                    mwce_core::homology::betti_numbers(y, mwce_core::homology::Flavor::Absolute)?;
                boundary_spectrum(y, p, betti.iter().sum::<usize>() + 2, &set.tol)?
            };
            Ok((
                res,
                spec.nu1,
                out.report.eigenvalues.clone(),
                out.scattering.eps_star,
                out.report.fit.slope_defect,
                out.audit.gram_identity_defect,
            ))
        })
        .collect();
    let mut csv = String::from("res,nu1,t_eigenvalues,eps_star,slope_defect,gram_defect\n");
    let mut ts = Vec::new();
    let mut eps = Vec::new();
    for row in rows {
        let (res, nu1, eigs, eps_star, slope, gram) = row?;
        let eig_text: Vec<String> = eigs.iter().map(|v| v.to_string()).collect();
        let _ = writeln!(csv, "{res},{nu1},{},{eps_star},{slope},{gram}", eig_text.join(";"));
        ts.push(*eigs.last().unwrap_or(&f64::NAN));
        eps.push(eps_star);
    }
    // self-convergence order of the largest scattering length
    let mut orders = String::from("quantity,value\n");
    if ts.len() >= 3 {
        let d1 = (ts[0] - ts[1]).abs();
        let d2 = (ts[1] - ts[2]).abs();
        let _ = writeln!(orders, "t_order,{}", (d1 / d2).log2());
    }
    // values at the solver floor count as converged
    let eps_monotone = eps.windows(2).all(|w| w[1] <= w[0] + 1e-14 || w[1] < 1e-10);
    let _ = writeln!(orders, "eps_star_monotone,{eps_monotone}");
    emit(&set.out, "convergence.csv", &csv)?;
    emit(&set.out, "convergence_orders.csv", &orders)?;
    Ok(())
}

fn oracle_of_model(geo: &GeometryArgs, cfg: &ConfigMap) -> CliResult<Option<PiecewiseCylinderModel>> {
    let model = cfg.pick_string(geo.model.clone(), "model")?;
    let m = match model.as_deref() {
        Some("flat_cylinder") => {
            let l = cfg.pick_f64(geo.length, "length")?.unwrap_or(2.0);
            let c = cfg.pick_f64(geo.circumference, "circumference")?.unwrap_or(1.0);
            Some(PiecewiseCylinderModel::new(vec![(l, c)], 0.0)?)
        }
        Some("junction") => {
            let l1 = cfg.pick_f64(geo.len1, "len1")?.unwrap_or(1.0);
            let l2 = cfg.pick_f64(geo.len2, "len2")?.unwrap_or(1.0);
            let v1 = cfg.pick_f64(geo.vol1, "vol1")?.unwrap_or(2.0);
            let v2 = cfg.pick_f64(geo.vol2, "vol2")?.unwrap_or(1.0);
            Some(PiecewiseCylinderModel::new(vec![(l1, v1 / l1), (l2, v2 / l2)], 0.0)?)
        }
        _ => None,
    };
    Ok(m)
}

fn run_cmd(geo: &GeometryArgs, pipe: &PipelineArgs, oracle: bool, cfg: &ConfigMap) -> CliResult<()> {
    let set = settings(pipe, cfg)?;
    require_fit_schedule(&set)?;
    let (m, rep) = build_geometry(geo, cfg, None)?;
    emit(&set.out, "mesh_summary.txt", &mesh_summary(&m, rep.as_ref()))?;
    let ops = MetricOps::assemble(&m)?;
    let audit = exactness_audit(&m, &ops, set.seed, &set.tol)?;
    emit(&set.out, "rank_table.csv", &audit.to_csv())?;
    for &p in &set.degrees {
        let mu1 = boundary_mu1(&m, p, &set.tol)?;
        let out = run_scatlen(&m, &ops, p, &set.schedule, mu1, set.seed, set.slope_tol, &set.tol)?;
        let file = report_to_file(&out.report, Some(&out.audit), &out.scattering.y_basis_p);
        let json = serde_json::to_string_pretty(&file)
            .map_err(|e| CliError { code: 4, message: e.to_string() })?;
        emit(&set.out, &format!("scattering_report_p{p}.json"), &json)?;
        emit(&set.out, &format!("q_inverse_p{p}.csv"), &q_inverse_csv(&out.samples_p))?;
        let y = &m.boundary_structure().unwrap().complex;
        let betti = mwce_core::homology::betti_numbers(y, mwce_core::homology::Flavor::Absolute)?;
        let spec = boundary_spectrum(y, p, betti.iter().sum::<usize>() + 2, &set.tol)?;
        let bound = sandwich_audit(&m, &out.report, &spec, geo.mesh.is_none())?;
        emit(
            &set.out,
            &format!("bound_report_p{p}.json"),
            &serde_json::to_string_pretty(&bound)
                .map_err(|e| CliError { code: 4, message: e.to_string() })?,
        )?;
        println!(
            "p = {p}: T0 eigenvalues {:?}, commutator defect {:.3e}",
            out.report.eigenvalues, out.report.commutator_defect
        );
        if oracle {
            if let Some(model) = oracle_of_model(geo, cfg)? {
                let t0 = oracle_t0(&model)?;
                let mut text = String::new();
                let _ = writeln!(text, "oracle_t1 {}", t0.t1);
                let _ = writeln!(text, "oracle_t2 {}", t0.t2);
                let mut eigs = vec![t0.t1, t0.t2];
                eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for (ev, oe) in out.report.eigenvalues.iter().zip(&eigs) {
                    let _ = writeln!(
                        text,
                        "eigenvalue {} oracle {} rel_dev {:e}",
                        ev,
                        oe,
                        (ev - oe).abs() / oe.abs().max(1e-300)
                    );
                }
                emit(&set.out, &format!("oracle_comparison_p{p}.txt"), &text)?;
            } else {
                println!("p = {p}: no 1-D oracle for this geometry; skipping comparison");
            }
        }
    }
    if m.boundary_structure().map(|b| b.components.len()).unwrap_or(0) >= 2 {
        let d = boundary_distance(&m, 0, 1)?;
        println!("dist(Y1, Y2) = {d}");
    }
    Ok(())
}
