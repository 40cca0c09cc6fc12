//! Perception and path planning: pinhole/stereo camera geometry, the
//! depth-resolution law, and navigation-function planning over sphere
//! worlds.

mod camera;
mod potential;

pub use camera::{
    back_project, measure_obstacle, project_point, range_for_resolution, resolution_at_depth,
    triangulate, CameraModel, ObstacleDimensions,
};
pub use potential::{
    evaluate_grid, evaluate_grid_serial, multi_start_sweep, multi_start_sweep_serial,
    navigation_potential, plan_path, potential_gradient, sample_free_points, Obstacle, PathResult,
    PlannerOptions, PotentialGrid, SphereWorld,
};
