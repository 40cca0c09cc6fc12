//! Navigation functions over sphere worlds: a potential that is 0 at the
//! goal, exactly 1 on every obstacle boundary, and free of spurious local
//! minima for a large enough tuning exponent. Paths follow the negative
//! gradient.

use nalgebra::Vector2;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// A disk obstacle in the plane.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Obstacle {
    pub center: [f64; 2],
    pub radius: f64,
}

impl Obstacle {
    pub fn new(x: f64, y: f64, radius: f64) -> Self {
        Self { center: [x, y], radius }
    }

    fn center_vec(&self) -> Vector2<f64> {
        Vector2::new(self.center[0], self.center[1])
    }

    /// beta_i(q) = |q - c|^2 - r^2. Positive outside, zero on the boundary.
    pub fn boundary_fn(&self, q: &Vector2<f64>) -> f64 {
        (q - self.center_vec()).norm_squared() - self.radius * self.radius
    }

    pub fn clearance(&self, q: &Vector2<f64>) -> f64 {
        (q - self.center_vec()).norm() - self.radius
    }
}

/// Planar workspace with disjoint disk obstacles and a goal point.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SphereWorld {
    pub obstacles: Vec<Obstacle>,
    pub goal: [f64; 2],
    /// Radius of the bounding disk used for sampling and grids.
    pub workspace_radius: f64,
    /// Tuning exponent kappa >= 2. Larger values sharpen the potential
    /// and remove spurious stationary points.
    pub kappa: u32,
}

impl SphereWorld {
    pub fn goal_vec(&self) -> Vector2<f64> {
        Vector2::new(self.goal[0], self.goal[1])
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.workspace_radius > 0.0) {
            return Err(Error::validation("workspace_radius must be positive"));
        }
        if self.kappa < 2 {
            return Err(Error::validation(format!(
                "kappa must be >= 2, got {}",
                self.kappa
            )));
        }
        for (i, o) in self.obstacles.iter().enumerate() {
            if !(o.radius > 0.0) {
                return Err(Error::validation(format!(
                    "obstacles[{i}].radius must be positive, got {}",
                    o.radius
                )));
            }
        }
        for i in 0..self.obstacles.len() {
            for j in (i + 1)..self.obstacles.len() {
                let a = &self.obstacles[i];
                let b = &self.obstacles[j];
                let dist = (a.center_vec() - b.center_vec()).norm();
                if dist <= a.radius + b.radius {
                    return Err(Error::validation(format!(
                        "obstacles[{i}] and obstacles[{j}] overlap: center distance {dist:.4} <= radius sum {:.4}",
                        a.radius + b.radius
                    )));
                }
            }
        }
        let goal = self.goal_vec();
        for (i, o) in self.obstacles.iter().enumerate() {
            if o.boundary_fn(&goal) <= 0.0 {
                return Err(Error::validation(format!(
                    "goal lies inside or on obstacles[{i}]"
                )));
            }
        }
        Ok(())
    }

    /// The four-obstacle benchmark world used throughout the crate's
    /// examples and tests.
    pub fn reference_world() -> Self {
        Self {
            obstacles: vec![
                Obstacle::new(-0.2, -0.35, 0.17),
                Obstacle::new(0.4, 0.46, 0.19),
                Obstacle::new(0.43, -0.38, 0.22),
                Obstacle::new(-0.58, 0.44, 0.24),
            ],
            goal: [-0.4, 0.0],
            workspace_radius: 1.0,
            kappa: 5,
        }
    }
}

// Relative slack for deciding that a point sits on (rather than inside)
// an obstacle boundary, to absorb rounding in sampled boundary points.
const BOUNDARY_SLACK: f64 = 1e-12;

fn obstacle_terms(q: &Vector2<f64>, world: &SphereWorld) -> Result<Vec<f64>> {
    world
        .obstacles
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let b = o.boundary_fn(q);
            let scale = (q - o.center_vec()).norm_squared() + o.radius * o.radius;
            if b < -BOUNDARY_SLACK * scale {
                Err(Error::domain(format!(
                    "point ({}, {}) lies inside obstacles[{i}]",
                    q.x, q.y
                )))
            } else {
                Ok(b.max(0.0))
            }
        })
        .collect()
}

/// Navigation potential phi(q) = d^2 / (d^(2k) + beta)^(1/k), in [0, 1].
///
/// d is the distance to the goal and beta the product of the obstacle
/// boundary functions. 0 at the goal, exactly 1 on every obstacle
/// boundary. Errors if q lies strictly inside an obstacle.
pub fn navigation_potential(q: &Vector2<f64>, world: &SphereWorld) -> Result<f64> {
    let betas = obstacle_terms(q, world)?;
    let beta: f64 = betas.iter().product();
    let d2 = (q - world.goal_vec()).norm_squared();
    if d2 == 0.0 {
        return Ok(0.0);
    }
    if beta == 0.0 {
        return Ok(1.0);
    }
    let k = world.kappa as i32;
    Ok(d2 / (d2.powi(k) + beta).powf(1.0 / world.kappa as f64))
}

/// Analytic gradient of [`navigation_potential`]. The point must lie
/// strictly in free space (beta > 0).
pub fn potential_gradient(q: &Vector2<f64>, world: &SphereWorld) -> Result<Vector2<f64>> {
    let betas = obstacle_terms(q, world)?;
    if betas.contains(&0.0) {
        return Err(Error::domain(format!(
            "gradient undefined on an obstacle boundary at ({}, {})",
            q.x, q.y
        )));
    }
    let beta: f64 = betas.iter().product();
    let e = q - world.goal_vec();
    let d2 = e.norm_squared();
    if d2 == 0.0 {
        return Ok(Vector2::zeros());
    }

    // grad beta = sum_i 2 (q - c_i) * prod_{j != i} beta_j
    let mut grad_beta = Vector2::zeros();
    for (i, o) in world.obstacles.iter().enumerate() {
        let partial: f64 = betas
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, b)| *b)
            .product();
        grad_beta += 2.0 * (q - o.center_vec()) * partial;
    }

    let k = world.kappa as f64;
    let s = d2.powi(world.kappa as i32) + beta;
    let grad_s = 2.0 * k * d2.powi(world.kappa as i32 - 1) * e + grad_beta;
    let s_pow = s.powf(-1.0 / k);
    Ok(s_pow * (2.0 * e - (d2 / (k * s)) * grad_s))
}

/// Result of a gradient-descent planning run.
#[derive(Debug, Clone, Serialize)]
pub struct PathResult {
    pub waypoints: Vec<[f64; 2]>,
    pub converged: bool,
    pub closest_obstacle_clearance: f64,
    pub iterations: usize,
}

/// Normalized gradient descent: q <- q - step * grad/|grad| until the goal
/// is within `tolerance` or `max_iters` is exhausted. An exhausted budget
/// yields an unconverged result, not an error; it usually signals that
/// kappa is too small for the world.
pub fn plan_path(
    start: &Vector2<f64>,
    world: &SphereWorld,
    step: f64,
    tolerance: f64,
    max_iters: usize,
) -> Result<PathResult> {
    world.validate()?;
    if !(step > 0.0) {
        return Err(Error::validation("step must be positive"));
    }
    if !(tolerance > 0.0) {
        return Err(Error::validation("tolerance must be positive"));
    }

    let goal = world.goal_vec();
    let mut q = *start;
    let mut waypoints = vec![[q.x, q.y]];
    let mut converged = (q - goal).norm() < tolerance;
    let mut iterations = 0;

    if !converged {
        // Fail fast if the start is in collision.
        obstacle_terms(&q, world)?;
    }

    while !converged && iterations < max_iters {
        let grad = potential_gradient(&q, world)?;
        let norm = grad.norm();
        if norm < 1e-14 {
            break; // stationary point away from the goal
        }
        q -= step * grad / norm;
        waypoints.push([q.x, q.y]);
        iterations += 1;
        if (q - goal).norm() < tolerance {
            converged = true;
        }
    }

    let clearance = waypoints
        .iter()
        .flat_map(|w| {
            let p = Vector2::new(w[0], w[1]);
            world.obstacles.iter().map(move |o| o.clearance(&p)).collect::<Vec<_>>()
        })
        .fold(f64::INFINITY, f64::min);

    Ok(PathResult {
        waypoints,
        converged,
        closest_obstacle_clearance: clearance,
        iterations,
    })
}

/// Parameters for [`plan_path`] runs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PlannerOptions {
    pub step: f64,
    pub tolerance: f64,
    pub max_iters: usize,
}

impl Default for PlannerOptions {
    fn default() -> Self {
        Self { step: 0.005, tolerance: 0.01, max_iters: 20_000 }
    }
}

/// Plan from every start in order. Runs starts in parallel when the
/// `parallel` feature is enabled; results keep the input order either way.
pub fn multi_start_sweep(
    starts: &[Vector2<f64>],
    world: &SphereWorld,
    opts: &PlannerOptions,
) -> Result<Vec<PathResult>> {
    world.validate()?;
    #[cfg(feature = "parallel")]
    {
        starts
            .par_iter()
            .map(|s| plan_path(s, world, opts.step, opts.tolerance, opts.max_iters))
            .collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        multi_start_sweep_serial(starts, world, opts)
    }
}

/// Single-threaded variant of [`multi_start_sweep`].
pub fn multi_start_sweep_serial(
    starts: &[Vector2<f64>],
    world: &SphereWorld,
    opts: &PlannerOptions,
) -> Result<Vec<PathResult>> {
    world.validate()?;
    starts
        .iter()
        .map(|s| plan_path(s, world, opts.step, opts.tolerance, opts.max_iters))
        .collect()
}

/// Deterministically sample points uniformly over the workspace disk,
/// rejecting any closer than `margin` to an obstacle.
pub fn sample_free_points(
    world: &SphereWorld,
    count: usize,
    seed: u64,
    margin: f64,
) -> Vec<Vector2<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(count);
    let r = world.workspace_radius;
    while points.len() < count {
        let x = rng.gen_range(-r..r);
        let y = rng.gen_range(-r..r);
        let q = Vector2::new(x, y);
        if q.norm() > r {
            continue;
        }
        if world.obstacles.iter().all(|o| o.clearance(&q) > margin) {
            points.push(q);
        }
    }
    points
}

/// Potential sampled on a regular grid over [x0,x1] x [y0,y1].
/// Nodes inside an obstacle hold NaN.
#[derive(Debug, Clone)]
pub struct PotentialGrid {
    pub nx: usize,
    pub ny: usize,
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    /// Row-major: values[iy * nx + ix].
    pub values: Vec<f64>,
}

impl PotentialGrid {
    pub fn x(&self, ix: usize) -> f64 {
        self.x0 + (self.x1 - self.x0) * ix as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, iy: usize) -> f64 {
        self.y0 + (self.y1 - self.y0) * iy as f64 / (self.ny - 1) as f64
    }

    pub fn value(&self, ix: usize, iy: usize) -> f64 {
        self.values[iy * self.nx + ix]
    }

    /// Strict local minima over defined nodes (8-neighborhood).
    pub fn local_minima(&self) -> Vec<(usize, usize)> {
        let mut minima = Vec::new();
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                let v = self.value(ix, iy);
                if v.is_nan() {
                    continue;
                }
                let mut defined = 0;
                let mut is_min = true;
                for dy in -1i64..=1 {
                    for dx in -1i64..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let (jx, jy) = (ix as i64 + dx, iy as i64 + dy);
                        if jx < 0 || jy < 0 || jx >= self.nx as i64 || jy >= self.ny as i64 {
                            continue;
                        }
                        let w = self.value(jx as usize, jy as usize);
                        if w.is_nan() {
                            continue;
                        }
                        defined += 1;
                        if w <= v {
                            is_min = false;
                        }
                    }
                }
                if is_min && defined > 0 {
                    minima.push((ix, iy));
                }
            }
        }
        minima
    }
}

fn grid_row(world: &SphereWorld, nx: usize, x0: f64, x1: f64, y: f64) -> Vec<f64> {
    (0..nx)
        .map(|ix| {
            let x = x0 + (x1 - x0) * ix as f64 / (nx - 1) as f64;
            navigation_potential(&Vector2::new(x, y), world).unwrap_or(f64::NAN)
        })
        .collect()
}

/// Evaluate the potential over an n x n grid spanning the workspace
/// bounding square. Rows are evaluated in parallel when the `parallel`
/// feature is enabled; the numeric result is identical either way.
pub fn evaluate_grid(world: &SphereWorld, n: usize) -> Result<PotentialGrid> {
    world.validate()?;
    if n < 2 {
        return Err(Error::validation("grid size must be at least 2"));
    }
    let r = world.workspace_radius;
    let (x0, x1, y0, y1) = (-r, r, -r, r);

    #[cfg(feature = "parallel")]
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|iy| {
            let y = y0 + (y1 - y0) * iy as f64 / (n - 1) as f64;
            grid_row(world, n, x0, x1, y)
        })
        .collect();

    #[cfg(not(feature = "parallel"))]
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|iy| {
            let y = y0 + (y1 - y0) * iy as f64 / (n - 1) as f64;
            grid_row(world, n, x0, x1, y)
        })
        .collect();

    Ok(PotentialGrid {
        nx: n,
        ny: n,
        x0,
        x1,
        y0,
        y1,
        values: rows.into_iter().flatten().collect(),
    })
}

/// Single-threaded variant of [`evaluate_grid`].
pub fn evaluate_grid_serial(world: &SphereWorld, n: usize) -> Result<PotentialGrid> {
    world.validate()?;
    if n < 2 {
        return Err(Error::validation("grid size must be at least 2"));
    }
    let r = world.workspace_radius;
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|iy| {
            let y = -r + 2.0 * r * iy as f64 / (n - 1) as f64;
            grid_row(world, n, -r, r, y)
        })
        .collect();
    Ok(PotentialGrid {
        nx: n,
        ny: n,
        x0: -r,
        x1: r,
        y0: -r,
        y1: r,
        values: rows.into_iter().flatten().collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn world() -> SphereWorld {
        SphereWorld::reference_world()
    }

    #[test]
    fn potential_zero_at_goal() {
        let w = world();
        let phi = navigation_potential(&w.goal_vec(), &w).unwrap();
        assert_eq!(phi, 0.0);
    }

    #[test]
    fn potential_one_on_boundaries() {
        let w = world();
        for o in &w.obstacles {
            for k in 0..32 {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 32.0;
                let q = Vector2::new(
                    o.center[0] + o.radius * theta.cos(),
                    o.center[1] + o.radius * theta.sin(),
                );
                let phi = navigation_potential(&q, &w).unwrap();
                assert_abs_diff_eq!(phi, 1.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn potential_bounded_in_free_space() {
        let w = world();
        for q in sample_free_points(&w, 500, 42, 1e-6) {
            let phi = navigation_potential(&q, &w).unwrap();
            assert!((0.0..=1.0).contains(&phi), "phi = {phi} at {q:?}");
        }
    }

    #[test]
    fn potential_rejects_interior_points() {
        let w = world();
        let inside = Vector2::new(-0.2, -0.35);
        assert!(navigation_potential(&inside, &w).is_err());
        assert!(potential_gradient(&inside, &w).is_err());
    }

    #[test]
    fn gradient_zero_at_goal() {
        let w = world();
        let g = potential_gradient(&w.goal_vec(), &w).unwrap();
        assert_eq!(g, Vector2::zeros());
    }

    #[test]
    fn gradient_errors_on_boundary() {
        let w = world();
        let o = &w.obstacles[0];
        let q = Vector2::new(o.center[0] + o.radius, o.center[1]);
        assert!(potential_gradient(&q, &w).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let w = world();
        let h = 1e-6;
        for q in sample_free_points(&w, 1000, 9, 2e-3) {
            let g = potential_gradient(&q, &w).unwrap();
            let fd = Vector2::new(
                (navigation_potential(&(q + Vector2::new(h, 0.0)), &w).unwrap()
                    - navigation_potential(&(q - Vector2::new(h, 0.0)), &w).unwrap())
                    / (2.0 * h),
                (navigation_potential(&(q + Vector2::new(0.0, h)), &w).unwrap()
                    - navigation_potential(&(q - Vector2::new(0.0, h)), &w).unwrap())
                    / (2.0 * h),
            );
            let denom = g.norm().max(1e-9);
            assert!(
                (g - fd).norm() / denom < 1e-6,
                "gradient mismatch at {q:?}: analytic {g:?}, fd {fd:?}"
            );
        }
    }

    #[test]
    fn gradient_is_axial_on_symmetry_axis() {
        // One obstacle directly between the probe and the goal: by symmetry
        // the gradient points along the axis.
        let w = SphereWorld {
            obstacles: vec![Obstacle::new(0.5, 0.0, 0.2)],
            goal: [0.0, 0.0],
            workspace_radius: 2.0,
            kappa: 3,
        };
        let g = potential_gradient(&Vector2::new(1.0, 0.0), &w).unwrap();
        assert_abs_diff_eq!(g.y, 0.0, epsilon = 1e-14);
        assert!(g.x.abs() > 0.0);
    }

    #[test]
    fn plan_trivial_start_at_goal() {
        let w = world();
        let r = plan_path(&w.goal_vec(), &w, 0.005, 0.01, 100).unwrap();
        assert!(r.converged);
        assert_eq!(r.waypoints.len(), 1);
    }

    #[test]
    fn plan_reference_scenario_converges_with_clearance() {
        let w = world();
        let r = plan_path(&Vector2::new(0.6, 0.73), &w, 0.005, 0.01, 20_000).unwrap();
        assert!(r.converged, "planner failed in {} iterations", r.iterations);
        assert!(r.closest_obstacle_clearance > 0.0);
        let last = r.waypoints.last().unwrap();
        let dist = (Vector2::new(last[0], last[1]) - w.goal_vec()).norm();
        assert!(dist < 0.01);
    }

    #[test]
    fn plan_detects_unconverged_budget() {
        let w = world();
        let r = plan_path(&Vector2::new(0.6, 0.73), &w, 0.005, 0.01, 5).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 5);
    }

    #[test]
    fn multi_start_sweep_converges_everywhere() {
        let w = world();
        let starts = sample_free_points(&w, 100, 2024, 5e-3);
        let results = multi_start_sweep(&starts, &w, &PlannerOptions::default()).unwrap();
        for (i, r) in results.iter().enumerate() {
            assert!(r.converged, "start {i} at {:?} failed", starts[i]);
            assert!(r.closest_obstacle_clearance > 0.0);
        }
    }

    #[test]
    fn parallel_and_serial_sweeps_agree() {
        let w = world();
        let starts = sample_free_points(&w, 16, 5, 5e-3);
        let opts = PlannerOptions::default();
        let a = multi_start_sweep(&starts, &w, &opts).unwrap();
        let b = multi_start_sweep_serial(&starts, &w, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.waypoints.len(), y.waypoints.len());
            assert_eq!(x.waypoints.last(), y.waypoints.last());
        }
    }

    #[test]
    fn grid_topology_single_minimum_at_goal() {
        let w = world();
        let grid = evaluate_grid(&w, 200).unwrap();
        let minima = grid.local_minima();
        assert_eq!(minima.len(), 1, "expected one local minimum, got {minima:?}");
        let (ix, iy) = minima[0];
        let spacing = 2.0 * w.workspace_radius / 199.0;
        assert!((grid.x(ix) - w.goal[0]).abs() <= spacing);
        assert!((grid.y(iy) - w.goal[1]).abs() <= spacing);
    }

    #[test]
    fn grid_parallel_serial_identical() {
        let w = world();
        let a = evaluate_grid(&w, 64).unwrap();
        let b = evaluate_grid_serial(&w, 64).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!(x.to_bits() == y.to_bits() || (x.is_nan() && y.is_nan()));
        }
    }

    #[test]
    fn world_validation_catches_overlap_and_bad_goal() {
        let mut w = world();
        w.obstacles.push(Obstacle::new(-0.25, -0.35, 0.2));
        assert!(w.validate().is_err());

        let mut w = world();
        w.goal = [-0.2, -0.35];
        assert!(w.validate().is_err());

        let mut w = world();
        w.kappa = 1;
        assert!(w.validate().is_err());
    }

    #[test]
    fn potential_scaling_invariance() {
        // kappa-independent anchors: 0 at the goal, 1 on boundaries.
        for kappa in [2u32, 3, 5, 8] {
            let mut w = world();
            w.kappa = kappa;
            assert_eq!(navigation_potential(&w.goal_vec(), &w).unwrap(), 0.0);
            let o = &w.obstacles[2];
            let q = Vector2::new(o.center[0], o.center[1] + o.radius);
            assert_abs_diff_eq!(
                navigation_potential(&q, &w).unwrap(),
                1.0,
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn sampled_points_are_deterministic() {
        let w = world();
        let a = sample_free_points(&w, 20, 7, 1e-3);
        let b = sample_free_points(&w, 20, 7, 1e-3);
        assert_eq!(a, b);
        let c = sample_free_points(&w, 20, 8, 1e-3);
        assert_ne!(a, c);
    }

    #[test]
    fn descent_path_decreases_potential() {
        let w = world();
        let r = plan_path(&Vector2::new(0.6, 0.73), &w, 0.005, 0.01, 20_000).unwrap();
        let first = navigation_potential(
            &Vector2::new(r.waypoints[0][0], r.waypoints[0][1]),
            &w,
        )
        .unwrap();
        let last = navigation_potential(
            &Vector2::new(
                r.waypoints.last().unwrap()[0],
                r.waypoints.last().unwrap()[1],
            ),
            &w,
        )
        .unwrap();
        assert!(last < first);
        assert_relative_eq!(last, 0.0, epsilon = 0.05);
    }
}
