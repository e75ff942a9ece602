//! End-to-end planning on a synthetic mesh: plan, replay, simulate and
//! export the cutting surfaces.
//!
//! `cargo run --release --example plan_cuts [out_dir]`

use std::path::PathBuf;
use wirecut::geom::TriMesh;
use wirecut::pipeline::*;

fn main() -> wirecut::Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "wirecut_out".into()));
    std::fs::create_dir_all(&out).map_err(|e| wirecut::Error::Io { path: out.clone(), source: e })?;

    let mesh = TriMesh::blob(0.35, 0.25, 3);
    let p = plan(&mesh, &PlanConfig::default(), &FabricationOptions::default())?;
    for (k, cut) in p.cuts.iter().enumerate() {
        println!(
            "cut {:>2}: view ({:+.3}, {:.3}) mismatch {:>6.0} px, d_avg {:.4}, volume {:.4}",
            k + 1,
            cut.phi,
            cut.theta,
            cut.metrics.fitness_px2,
            cut.metrics.d_avg,
            cut.metrics.volume
        );
    }
    println!("termination {:?}, mesh volume {:.4}", p.termination, p.mesh.volume);
    write_plan(&p, &out.join("plan.json"))?;

    let (remnant, report) = simulate(&p, &mesh, 128)?;
    write_obj(&remnant, &out.join("remnant.obj"))?;
    println!(
        "remnant: volume {:.4}, mean distance to mesh {:.4}",
        report.final_volume, report.d_result_avg
    );

    for (k, cut) in p.cuts.iter().enumerate() {
        write_obj(&cut.ruled_surface()?.to_mesh(256), &out.join(format!("cut_{:02}.obj", k + 1)))?;
    }
    println!("wrote plan, remnant and surfaces to {}", out.display());
    Ok(())
}
