//! Continuous collision detection: how far a moving polyline can travel
//! before it touches a fixed polygon.

use wirecut::geom::{ccd_max_step, Polygon2, Vec2};

fn main() -> wirecut::Result<()> {
    let obstacle = Polygon2::star(5, 0.6, 0.25, 1, Vec2::zeros())?;

    // a horizontal bar above the star falling straight down
    let samples: Vec<Vec2> = (0..=20).map(|i| Vec2::new(-1.0 + 0.1 * i as f64, 1.0)).collect();
    let velocities = vec![Vec2::new(0.0, -1.0); samples.len()];
    let t = ccd_max_step(&samples, &velocities, &obstacle, 2.0)?;
    let top = obstacle.vertices().iter().map(|v| v.y).fold(f64::MIN, f64::max);
    println!("falling bar: first contact at t = {t:.6} (bar at y = 1, star top at y = {top:.6})");

    // a bar drawn in towards the center while turning
    let samples: Vec<Vec2> = (0..=20).map(|i| Vec2::new(0.7 + 0.02 * i as f64, 0.0)).collect();
    let velocities: Vec<Vec2> = samples.iter().map(|p| Vec2::new(-p.y, p.x) * 0.3 - p).collect();
    let t = ccd_max_step(&samples, &velocities, &obstacle, 1.0)?;
    println!("turning bar: first contact at t = {t:.6}");

    // moving by slightly less than t_max stays clear
    let moved: Vec<Vec2> = samples.iter().zip(&velocities).map(|(p, v)| p + v * (0.999 * t)).collect();
    let clear = moved
        .windows(2)
        .all(|w| obstacle.edges().all(|(c, d)| !wirecut::geom::segments_intersect(w[0], w[1], c, d)));
    println!("clear after 0.999 t: {clear}");
    Ok(())
}
