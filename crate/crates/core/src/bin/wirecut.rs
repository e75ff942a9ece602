use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use wirecut::fit::{fit, FitConfig};
use wirecut::material::{mesh_volume, MaterialState};
use wirecut::pipeline::*;
use wirecut::viewpoint::{fibonacci_sample, run_ga, GaConfig, ViewEvaluator};
use wirecut::{Error, Result};

/// Hot-wire rough machining planner.
#[derive(Parser)]
#[command(name = "wirecut", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Plan a sequence of cuts for a mesh.
    Plan(PlanArgs),
    /// Replay a plan and write the remnant surface.
    Simulate(SimulateArgs),
    /// Pick the next view for untouched stock.
    Viewselect(ViewArgs),
    /// Fit a closed curve around a 2D contour.
    Fit2d(FitArgs),
    /// Write the ruled cutting surfaces of a plan as OBJ files.
    Export(ExportArgs),
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Stop once the remnant exceeds the mesh by less than this volume.
    #[arg(long, default_value_t = 0.025)]
    alpha: f64,
    /// Read --alpha as a fraction of the normalized mesh volume.
    #[arg(long)]
    alpha_relative: bool,
    #[arg(long, default_value_t = 15)]
    max_cuts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 200)]
    candidates: usize,
    #[arg(long, default_value_t = 256)]
    resolution: usize,
    /// Glue the stock to a workbench, search only views from above and
    /// finish with a planar cut on the box floor.
    #[arg(long)]
    fabrication: bool,
    /// Search only views from above.
    #[arg(long)]
    hemisphere: bool,
    /// Directory for per-cut contours and fit traces.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    plan: PathBuf,
    /// Remnant surface OBJ, in normalized units.
    #[arg(long)]
    out: PathBuf,
    /// Mesh the plan was made for; defaults to the path stored in the plan.
    #[arg(long)]
    mesh: Option<PathBuf>,
    #[arg(long, default_value_t = 128)]
    grid: usize,
    /// Report JSON; printed to stdout when absent.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct ViewArgs {
    #[arg(long)]
    mesh: PathBuf,
    #[arg(long, default_value_t = 200)]
    candidates: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    hemisphere: bool,
    /// Also score every candidate and report the true maximum.
    #[arg(long)]
    exhaustive: bool,
}

#[derive(Args)]
struct FitArgs {
    /// CSV with one `x,y` vertex per line.
    #[arg(long)]
    contour: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Per-iteration CSV trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long)]
    surfaces: PathBuf,
    /// Samples around each curve.
    #[arg(long, default_value_t = 256)]
    samples: usize,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Plan(a) => cmd_plan(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Viewselect(a) => cmd_viewselect(a),
        Command::Fit2d(a) => cmd_fit2d(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Aborted(_)
        | Error::InitializationFailed(_)
        | Error::InvalidCut(_)
        | Error::InvalidCollisionState(_) => 3,
        _ => 2,
    }
}

fn print_json(value: &impl Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.to_path_buf(),
        source: e,
    })
}

fn cmd_plan(a: PlanArgs) -> Result<()> {
    let mesh = load_obj(&a.mesh)?;
    let mut alpha = a.alpha;
    if a.alpha_relative {
        let (normalized, _) = normalize_input(&mesh)?;
        alpha *= mesh_volume(&normalized);
    }
    let cfg = PlanConfig {
        alpha,
        max_cuts: a.max_cuts,
        seed: a.seed,
        candidates: a.candidates,
        resolution: a.resolution,
        hemisphere: a.hemisphere || a.fabrication,
        ..PlanConfig::default()
    };
    let fab = if a.fabrication {
        FabricationOptions::desk()
    } else {
        FabricationOptions::default()
    };
    let (mut p, traces) = plan_traced(&mesh, &cfg, &fab)?;
    p.mesh.path = Some(a.mesh.display().to_string());
    write_plan(&p, &a.out)?;
    if let Some(dir) = &a.trace {
        create_dir(dir)?;
        for (k, (cut, trace)) in p.cuts.iter().zip(&traces).enumerate() {
            write_contour_csv(&cut.contour_polygon()?, &dir.join(format!("cut_{:02}_contour.csv", k + 1)))?;
            write_trace_csv(&trace.fit, &dir.join(format!("cut_{:02}_fit.csv", k + 1)))?;
        }
    }
    log::info!(
        "{} cuts, termination {:?}, remnant volume {:.4} for mesh volume {:.4}",
        p.cut_count(),
        p.termination,
        p.cuts.last().map_or(1.0, |c| c.metrics.volume),
        p.mesh.volume
    );
    Ok(())
}

fn cmd_simulate(a: SimulateArgs) -> Result<()> {
    let p = read_plan(&a.plan)?;
    let mesh_path = match (&a.mesh, &p.mesh.path) {
        (Some(m), _) => m.clone(),
        (None, Some(m)) => PathBuf::from(m),
        (None, None) => {
            return Err(Error::InvalidArgument(
                "plan stores no mesh path; pass --mesh".into(),
            ))
        }
    };
    let mesh = load_obj(&mesh_path)?;
    let (surface, report) = simulate(&p, &mesh, a.grid)?;
    write_obj(&surface, &a.out)?;
    match &a.report {
        Some(path) => std::fs::write(path, serde_json::to_string_pretty(&report)?).map_err(|e| Error::Io {
            path: path.clone(),
            source: e,
        }),
        None => print_json(&report),
    }
}

#[derive(Serialize)]
struct ViewReport {
    phi: f64,
    theta: f64,
    r: f64,
    fitness_px2: f64,
    evaluations: usize,
    candidates: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    exhaustive_max_px2: Option<f64>,
}

fn cmd_viewselect(a: ViewArgs) -> Result<()> {
    let mesh = load_obj(&a.mesh)?;
    let (normalized, _) = normalize_input(&mesh)?;
    let material = MaterialState::pristine();
    let cfg = PlanConfig::default();
    let mut evaluator = ViewEvaluator::new(normalized, cfg.resolution, image_half_extent(&material));
    let mut candidates = fibonacci_sample(a.candidates, cfg.view_radius)?;
    if a.hemisphere {
        candidates = candidates.upper_hemisphere()?;
    }
    let ga = GaConfig {
        seed: a.seed,
        ..cfg.ga
    };
    let out = run_ga(&material, &mut evaluator, &candidates, &ga)?;
    let exhaustive_max_px2 = if a.exhaustive {
        let mut best: f64 = 0.0;
        for v in candidates.viewpoints() {
            best = best.max(evaluator.fitness(&material, v)?);
        }
        Some(best)
    } else {
        None
    };
    print_json(&ViewReport {
        phi: out.viewpoint.phi,
        theta: out.viewpoint.theta,
        r: out.viewpoint.r,
        fitness_px2: out.fitness,
        evaluations: out.evaluations,
        candidates: candidates.len(),
        exhaustive_max_px2,
    })
}

#[derive(Serialize)]
struct FitReport {
    curve: CurveData,
    d_avg: f64,
    d_bb: f64,
    iterations: usize,
    switched_at: Option<usize>,
}

fn cmd_fit2d(a: FitArgs) -> Result<()> {
    let contour = read_contour_csv(&a.contour)?;
    let mut cfg = FitConfig::default();
    if let Some(n) = a.max_iter {
        cfg.max_iter = n;
    }
    let result = fit(&contour, &cfg)?;
    if let Some(path) = &a.trace {
        write_trace_csv(&result.trace, path)?;
    }
    let report = FitReport {
        curve: CurveData::from(&result.curve),
        d_avg: result.d_avg,
        d_bb: contour.bbox_diagonal(),
        iterations: result.iterations,
        switched_at: result.switched_at,
    };
    std::fs::write(&a.out, serde_json::to_string_pretty(&report)?).map_err(|e| Error::Io {
        path: a.out.clone(),
        source: e,
    })?;
    log::info!(
        "d_avg {:.3e} ({:.3e} of d_bb) after {} iterations",
        report.d_avg,
        report.d_avg / report.d_bb,
        report.iterations
    );
    Ok(())
}

fn cmd_export(a: ExportArgs) -> Result<()> {
    let p = read_plan(&a.plan)?;
    let inverse = p.similarity()?.inverse();
    create_dir(&a.surfaces)?;
    for (k, cut) in p.cuts.iter().enumerate() {
        let surface = cut.ruled_surface()?;
        write_obj(&surface.to_mesh(a.samples), &a.surfaces.join(format!("cut_{:02}.obj", k + 1)))?;
        write_obj(
            &surface.to_mesh_with(a.samples, &inverse),
            &a.surfaces.join(format!("cut_{:02}_original.obj", k + 1)),
        )?;
    }
    log::info!("wrote {} surfaces to {}", p.cuts.len(), a.surfaces.display());
    Ok(())
}
