//! Fitting a closed B-spline around a star-shaped contour without ever
//! crossing it.

use wirecut::fit::{check_polygon_constraints, fit, FitConfig};
use wirecut::geom::{Polygon2, Vec2};

fn main() -> wirecut::Result<()> {
    let star = Polygon2::star(5, 1.0, 0.45, 20, Vec2::new(0.3, -0.2))?;
    let d_bb = star.bbox_diagonal();
    let result = fit(&star, &FitConfig::default())?;
    for row in &result.trace {
        println!(
            "iter {:>2}: energy {:.3e} control points {:>3} d_avg/d_bb {:.2e}",
            row.iteration,
            row.energy,
            row.control_points,
            row.d_avg / d_bb
        );
    }
    check_polygon_constraints(&result.curve, &star)?;
    println!(
        "{} vertices -> {} control points, d_avg = {:.2e} d_bb, closest-point mode from iteration {:?}",
        star.len(),
        result.curve.len(),
        result.d_avg / d_bb,
        result.switched_at
    );
    Ok(())
}
