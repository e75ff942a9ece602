//! The stock as a box intersected with prism cuts: membership, Monte-Carlo
//! volume and a marching-cubes surface.

use wirecut::geom::{ClosedBSpline2, Vec2};
use wirecut::material::*;
use wirecut::projection::{camera_frame, Viewpoint};

fn main() -> wirecut::Result<()> {
    let top = camera_frame(&Viewpoint::new(std::f64::consts::FRAC_PI_2, 0.0, 2.0)?);
    let side = camera_frame(&Viewpoint::new(0.0, 0.0, 2.0)?);
    let disc = ClosedBSpline2::circle(Vec2::zeros(), 0.25, 16)?;

    let one = MaterialState::pristine().apply_cut_unchecked(PrismCut::new(top, disc.clone()));
    let (v, se) = estimate_volume(&one, 400_000, 1)?;
    let exact = std::f64::consts::PI / 16.0;
    println!("cylinder r=0.25: {v:.5} +- {se:.5} (exact {exact:.5}, {:.1} sigma)", (v - exact).abs() / se);

    let two = one.apply_cut_unchecked(PrismCut::new(side, disc));
    let (v, se) = estimate_volume(&two, 400_000, 2)?;
    // two perpendicular cylinders of radius r intersect in 16 r^3 / 3
    let exact = 16.0 * 0.25f64.powi(3) / 3.0;
    println!("Steinmetz solid: {v:.5} +- {se:.5} (exact {exact:.5})");

    let surface = extract_surface_mesh(&two, 96)?;
    println!(
        "surface: {} triangles, enclosed volume {:.5}",
        surface.triangles.len(),
        mesh_volume(&surface)
    );
    Ok(())
}
