//! Genetic next-best-view search compared with scoring every candidate.

use wirecut::geom::TriMesh;
use wirecut::material::MaterialState;
use wirecut::viewpoint::*;

fn main() -> wirecut::Result<()> {
    let mesh = TriMesh::ellipsoid(wirecut::geom::Vec3::new(0.45, 0.3, 0.15), 3);
    let material = MaterialState::pristine();
    let candidates = fibonacci_sample(200, 2.0)?;
    let mut evaluator = ViewEvaluator::with_defaults(mesh);

    let scores: Vec<f64> = candidates
        .viewpoints()
        .iter()
        .map(|v| evaluator.fitness(&material, v))
        .collect::<wirecut::Result<_>>()?;
    let best = scores.iter().copied().fold(0.0, f64::max);
    println!("exhaustive: best {best} px over {} candidates", candidates.len());

    for seed in 0..5 {
        let cfg = GaConfig { seed, ..GaConfig::desk() };
        let out = run_ga_with(&candidates, &cfg, |i| Ok(scores[i]))?;
        println!(
            "seed {seed}: {:.0} px ({:.1}% of best) after {} generations, {} evaluations",
            out.fitness,
            100.0 * out.fitness / best,
            out.generations,
            out.evaluations
        );
    }
    Ok(())
}
