//! Orthographic area images of a mesh and of the stock, their mismatch, and
//! the outer contour of the mesh silhouette.

use wirecut::geom::TriMesh;
use wirecut::material::MaterialState;
use wirecut::projection::*;

fn main() -> wirecut::Result<()> {
    let mesh = TriMesh::blob(0.35, 0.25, 3);
    let material = MaterialState::pristine();
    let v = Viewpoint::new(0.4, 1.0, 2.0)?;
    let frame = camera_frame(&v);

    let m = rasterize_mesh_area(&mesh, &frame, DEFAULT_RESOLUTION)?;
    let b = rasterize_material_area(&material, &frame, DEFAULT_RESOLUTION, DEFAULT_DEPTH_SAMPLES)?;
    println!("mesh pixels {}, stock pixels {}", m.count(), b.count());
    println!("area mismatch {} px", area_mismatch(&b, &m)?);

    let contour = extract_outer_contour(&m, &frame)?;
    println!(
        "outer contour: {} vertices, area {:.4}, perimeter {:.4}",
        contour.len(),
        contour.area(),
        contour.perimeter()
    );

    if let Some(dir) = std::env::args().nth(1) {
        let dir = std::path::Path::new(&dir);
        m.write_pgm(&dir.join("mesh.pgm"))?;
        b.write_pgm(&dir.join("stock.pgm"))?;
        println!("images written to {}", dir.display());
    }
    Ok(())
}
