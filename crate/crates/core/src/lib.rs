//! Planning of collision-free ruled cutting surfaces for linear hot-wire rough
//! machining.
//!
//! A triangle mesh scaled into a unit stock box is carved by a short sequence of
//! prism cuts. Each cut is the vertical extrusion of a smooth closed cubic
//! B-spline that hugs the outer silhouette contour of the mesh under some view
//! direction without ever crossing it. Views are chosen by a genetic search
//! over a Fibonacci lattice of directions, scored by how much silhouette area
//! of the remaining stock exceeds the silhouette of the shape.
//!
//! The crate is organized bottom-up:
//!
//! * [`geom`]: meshes, polygons, convex hulls, periodic B-splines, continuous
//!   collision detection.
//! * [`projection`]: orthographic cameras, binary area images, contour tracing.
//! * [`material`]: the implicit remnant solid and its volume / surface.
//! * [`viewpoint`]: the genetic view search.
//! * [`fit`]: constrained curve fitting of a contour polygon.
//! * [`pipeline`]: the end-to-end planner, extrusion, simulation and file I/O.

pub mod error;
pub mod fit;
pub mod geom;
pub mod material;
pub mod pipeline;
pub mod projection;
pub mod viewpoint;

pub use error::{Error, Result};
