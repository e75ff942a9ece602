//! Convex hull of a point cloud and its greedy simplification under a
//! Hausdorff tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirecut::geom::{convex_hull, hausdorff_convex, simplify_convex_hull, Vec2};

fn main() -> wirecut::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let points: Vec<Vec2> = (0..2000)
        .map(|_| {
            let a = rng.gen::<f64>() * std::f64::consts::TAU;
            let r = rng.gen::<f64>().sqrt();
            Vec2::new(r * a.cos(), 0.6 * r * a.sin())
        })
        .collect();
    let hull = convex_hull(&points)?;
    println!("hull of {} points: {} vertices", points.len(), hull.len());
    for beta in [0.001, 0.01, 0.05] {
        let simple = simplify_convex_hull(&hull, beta, 8);
        println!(
            "beta {beta:<5}: {:>3} vertices, Hausdorff distance {:.5}",
            simple.len(),
            hausdorff_convex(&hull, &simple)
        );
    }
    Ok(())
}
