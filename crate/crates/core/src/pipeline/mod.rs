//! End-to-end planning: normalization, the view / contour / fit / cut loop,
//! ruled-surface extrusion, replay and file formats.

mod io;
mod normalize;
mod plan;
mod simulate;
mod surface;

pub use io::{
    load_obj, obj_string, parse_contour_csv, parse_obj, plan_to_string, read_contour_csv, read_plan,
    write_contour_csv, write_obj, write_plan, write_trace_csv,
};
pub use normalize::{normalize_input, Similarity, MARGIN};
pub use plan::{
    derive_seed, image_half_extent, mesh_digest, plan, plan_traced, replay, CurveData, CutMetrics,
    CutPlan, CutRecord, CutTrace, FabricationOptions, MeshInfo, PlanConfig, Termination, PLAN_VERSION,
};
pub use simulate::{simulate, SimulationReport, StepReport, DISTANCE_SAMPLES};
pub use surface::{extrude_ruled_surface, RuledSurface, EXTRUSION_HALF_LENGTH};
