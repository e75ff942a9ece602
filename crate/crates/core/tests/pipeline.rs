use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::OnceLock;
use wirecut::geom::{TriMesh, Vec2};
use wirecut::pipeline::*;
use wirecut::Error;

fn quick_config() -> PlanConfig {
    PlanConfig {
        resolution: 128,
        contour_supersample: 2,
        candidates: 100,
        max_cuts: 4,
        volume_samples: 50_000,
        seed: 5,
        ..PlanConfig::default()
    }
}

fn shape() -> TriMesh {
    TriMesh::blob(0.35, 0.25, 2)
}

fn shared_plan() -> &'static CutPlan {
    static PLAN: OnceLock<CutPlan> = OnceLock::new();
    PLAN.get_or_init(|| plan(&shape(), &quick_config(), &FabricationOptions::default()).unwrap())
}

#[test]
fn cuts_never_touch_the_mesh() {
    let p = shared_plan();
    assert!(!p.cuts.is_empty() && p.cuts.len() <= 4);
    let normalized = p.similarity().unwrap().transform_mesh(&shape());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let samples = normalized.sample_surface(3000, &mut rng);
    let mut material = p.initial_material();
    for cut in &p.cuts {
        let prism = cut.prism().unwrap();
        prism.encloses(&normalized).unwrap();
        material = material.apply_cut_unchecked(prism);
        assert!(samples.iter().all(|s| material.contains(s)));
    }
}

#[test]
fn volume_decreases() {
    let p = shared_plan();
    let mut last = (1.0, 0.0);
    for cut in &p.cuts {
        let m = &cut.metrics;
        let sigma = (m.volume_stderr.powi(2) + last.1 * last.1).sqrt();
        assert!(m.volume <= last.0 + 3.0 * sigma, "{} after {}", m.volume, last.0);
        assert!(m.volume >= p.mesh.volume - 3.0 * m.volume_stderr);
        last = (m.volume, m.volume_stderr);
    }
}

#[test]
fn curves_enclose_their_contours() {
    let p = shared_plan();
    for cut in &p.cuts {
        let prism = cut.prism().unwrap();
        let contour = cut.contour_polygon().unwrap();
        assert!(contour.vertices().iter().all(|&q| prism.polygon().contains(q)));
        assert!(cut.metrics.ga_evaluations <= 40);
    }
}

#[test]
fn plans_are_reproducible() {
    let p = shared_plan();
    let again = plan(&shape(), &quick_config(), &FabricationOptions::default()).unwrap();
    assert_eq!(plan_to_string(p).unwrap(), plan_to_string(&again).unwrap());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("plan.json");
    write_plan(p, &path).unwrap();
    assert_eq!(&read_plan(&path).unwrap(), p);
}

#[test]
fn simulation_replays_recorded_volumes() {
    let p = shared_plan();
    let (surface, report) = simulate(p, &shape(), 48).unwrap();
    assert!(!surface.triangles.is_empty());
    assert_eq!(report.steps.len(), p.cuts.len());
    assert_eq!(report.max_volume_z, 0.0);
    assert!(report.d_result_avg > 0.0 && report.d_result_avg < 0.1);

    let other = TriMesh::icosphere(0.35, 2);
    assert!(matches!(simulate(p, &other, 48), Err(Error::PlanMismatch(_))));
}

#[test]
fn exported_surfaces_follow_the_cuts() {
    let p = shared_plan();
    let inverse = p.similarity().unwrap().inverse();
    for cut in &p.cuts {
        let surface = cut.ruled_surface().unwrap();
        let strip = surface.to_mesh(64);
        let original = surface.to_mesh_with(64, &inverse);
        assert_eq!(strip.triangles.len(), 128);
        for (a, b) in strip.vertices.iter().zip(&original.vertices) {
            assert!((inverse.apply(a) - b).norm() < 1e-12);
            let q: Vec2 = cut.frame.project(a);
            assert!(prism_boundary_distance(&cut.prism().unwrap(), q) < 1e-3);
        }
    }
}

fn prism_boundary_distance(prism: &wirecut::material::PrismCut, q: Vec2) -> f64 {
    let curve = prism.curve();
    let u = curve.closest_param(q, 256);
    (curve.point(curve.refine_closest(q, u)) - q).norm()
}

#[test]
fn fabrication_keeps_the_workbench() {
    let cfg = PlanConfig {
        max_cuts: 2,
        hemisphere: true,
        ..quick_config()
    };
    let fab = FabricationOptions::desk();
    let p = plan(&shape(), &cfg, &fab).unwrap();
    assert_eq!(p.bottom_plane, fab.bottom_plane);
    assert_eq!(p.cut_count(), p.cuts.len() + 1);
    let bench = fab.workbench.unwrap().mesh(64);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let samples = bench.sample_surface(2000, &mut rng);
    for cut in &p.cuts {
        assert!(cut.viewpoint().phi >= 0.0);
        let prism = cut.prism().unwrap();
        assert!(samples.iter().all(|s| prism.contains(s)));
    }
    let remnant = replay(&p).unwrap();
    assert_eq!(remnant.cut_count(), p.cut_count());
    assert!(!remnant.contains(&wirecut::geom::Vec3::new(0.0, 0.0, -0.6)));
}

#[test]
fn bad_inputs_are_rejected() {
    let flat = TriMesh::new(
        vec![
            wirecut::geom::Vec3::zeros(),
            wirecut::geom::Vec3::zeros(),
            wirecut::geom::Vec3::zeros(),
        ],
        vec![[0, 1, 2]],
    )
    .unwrap();
    assert!(plan(&flat, &quick_config(), &FabricationOptions::default()).is_err());
    let cfg = PlanConfig {
        alpha: -1.0,
        ..quick_config()
    };
    assert!(matches!(
        plan(&shape(), &cfg, &FabricationOptions::default()),
        Err(Error::InvalidArgument(_))
    ));
}
