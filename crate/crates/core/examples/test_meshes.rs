//! Writes the synthetic test meshes as OBJ files for use with the CLI.

use std::path::PathBuf;
use wirecut::geom::{TriMesh, Vec3};
use wirecut::pipeline::write_obj;

fn main() -> wirecut::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    let meshes = [
        ("icosphere", TriMesh::icosphere(0.35, 3)),
        ("cube", TriMesh::cuboid(Vec3::repeat(-0.5), Vec3::repeat(0.5))),
        ("blob", TriMesh::blob(0.35, 0.25, 3)),
        ("convex_blob", TriMesh::blob(0.35, 0.15, 3)),
        ("perforated", TriMesh::perforated_blob(0.35, 3)),
    ];
    for (name, mesh) in meshes {
        let path = out.join(format!("{name}.obj"));
        write_obj(&mesh, &path)?;
        println!("{}: {} vertices, {} triangles", path.display(), mesh.vertices.len(), mesh.triangles.len());
    }
    Ok(())
}
