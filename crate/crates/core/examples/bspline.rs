//! Periodic cubic B-spline: evaluation, derivatives, Frenet frame and knot
//! insertion.

use wirecut::geom::{ClosedBSpline2, Vec2};

fn main() -> wirecut::Result<()> {
    let circle = ClosedBSpline2::circle(Vec2::zeros(), 1.0, 12)?;
    println!("{} control points, degree {}", circle.len(), circle.degree());

    for u in [0.0, 0.25, 0.5] {
        let [p, d1, d2] = circle.point_and_derivs(u);
        let f = circle.frenet(u)?;
        println!(
            "u={u:.2} p=({:+.4}, {:+.4}) |p|={:.4} |d1|={:.3} |d2|={:.3} radius={:.4}",
            p.x,
            p.y,
            p.norm(),
            d1.norm(),
            d2.norm(),
            f.radius
        );
    }

    // inserting knots changes the representation, not the curve
    let mut refined = circle.clone();
    for u in [0.1, 0.37, 0.37, 0.8] {
        refined = refined.insert_knot(u)?;
    }
    let drift = (0..1000)
        .map(|k| k as f64 / 1000.0)
        .map(|u| (refined.point(u) - circle.point(u)).norm())
        .fold(0.0, f64::max);
    println!("after 4 insertions: {} control points, max drift {drift:.2e}", refined.len());
    Ok(())
}
