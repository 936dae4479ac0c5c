//! Iterated function systems built from affine maps.
//!
//! * [`AffineMap`] and its algebra: application, iteration, operator norm,
//!   projection onto the contractive set and the fixed point.
//! * [`IfsModel`]: forward Hutchinson iteration, full or chaos-game.
//! * Hausdorff distance and collage error between point sets.
//! * [`fit_affine_ifs`]: fits a single contractive affine map and an
//!   iteration count that carry initial states onto observed states.
//! * [`synthetic`]: generators with known ground truth for tests.

mod fit;
mod map;
pub mod synthetic;
mod system;

pub use fit::{fit_affine_ifs, fit_candidate, objective_and_gradient, select_fit, FitOptions, FitResult, Objective};
pub use map::{affine_apply, fixed_point, iterate_map, operator_norm, project_contractive, AffineMap};
pub use system::{
    collage_error, directed_hausdorff, hausdorff_distance, hutchinson_apply, simulate_ifs, IfsModel, PointSet,
    SimulationMode, DEDUP_TOLERANCE, EXPLOSION_LIMIT,
};
