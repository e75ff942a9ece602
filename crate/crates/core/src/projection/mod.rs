//! Orthographic views on the view sphere, binary area images and outer
//! contour extraction.

mod camera;
mod contour;
mod image;
mod raster;

pub use camera::{camera_frame, CameraFrame, Viewpoint, DEFAULT_HALF_EXTENT};
pub use contour::{extract_outer_contour, trace_loops};
pub use image::{area_mismatch, BinaryImage, DEFAULT_RESOLUTION};
pub use raster::{
    rasterize_material_area, rasterize_material_area_exact, rasterize_mesh_area,
    rasterize_mesh_conservative, rasterize_polygon, DEFAULT_DEPTH_SAMPLES,
};
