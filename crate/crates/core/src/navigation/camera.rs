//! Pinhole camera geometry: projection, stereo triangulation, obstacle
//! sizing, and the depth-resolution law used to size mapping surveys.

use nalgebra::{Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Pinhole camera with pose. Lengths in meters, pixels in counts.
///
/// The extrinsics map world points into camera coordinates,
/// X_cam = R * X_world + T, with the optical axis along +z.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CameraModel {
    pub pixels_h: u32,
    pub pixels_v: u32,
    /// Focal length, m.
    pub focal_length: f64,
    /// Sensor width, m.
    pub sensor_width: f64,
    /// Sensor height, m.
    pub sensor_height: f64,
    #[serde(default = "identity_rotation")]
    pub rotation: [[f64; 3]; 3],
    #[serde(default)]
    pub translation: [f64; 3],
}

fn identity_rotation() -> [[f64; 3]; 3] {
    [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]
}

impl CameraModel {
    /// Build from a field of view: sensor dimensions follow from
    /// l = 2 f tan(fov/2), so the configured FOVs are reproduced exactly.
    pub fn from_fov(
        pixels_h: u32,
        pixels_v: u32,
        focal_length: f64,
        fov_h_rad: f64,
        fov_v_rad: f64,
    ) -> Result<Self> {
        if !(focal_length > 0.0) {
            return Err(Error::validation("focal_length must be positive"));
        }
        if pixels_h == 0 || pixels_v == 0 {
            return Err(Error::validation("pixel counts must be positive"));
        }
        if !(fov_h_rad > 0.0 && fov_h_rad < std::f64::consts::PI) {
            return Err(Error::validation("horizontal FOV must lie in (0, pi)"));
        }
        if !(fov_v_rad > 0.0 && fov_v_rad < std::f64::consts::PI) {
            return Err(Error::validation("vertical FOV must lie in (0, pi)"));
        }
        Ok(Self {
            pixels_h,
            pixels_v,
            focal_length,
            sensor_width: 2.0 * focal_length * (fov_h_rad / 2.0).tan(),
            sensor_height: 2.0 * focal_length * (fov_v_rad / 2.0).tan(),
            rotation: identity_rotation(),
            translation: [0.0; 3],
        })
    }

    /// The stock mapping camera: 1280x800 pixels, 2.5 mm focal length,
    /// 75 deg x 47 deg field of view.
    pub fn default_mapping_camera() -> Self {
        Self::from_fov(
            1280,
            800,
            2.5e-3,
            75.0_f64.to_radians(),
            47.0_f64.to_radians(),
        )
        .expect("stock camera parameters are valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.pixels_h == 0 || self.pixels_v == 0 {
            return Err(Error::validation("pixel counts must be positive"));
        }
        if !(self.focal_length > 0.0) {
            return Err(Error::validation("focal_length must be positive"));
        }
        if !(self.sensor_width > 0.0 && self.sensor_height > 0.0) {
            return Err(Error::validation("sensor dimensions must be positive"));
        }
        let r = self.rotation_matrix();
        let defect = (r.transpose() * r - Matrix3::identity()).norm();
        if defect > 1e-9 {
            return Err(Error::validation(format!(
                "rotation is not orthonormal (defect {defect:.2e})"
            )));
        }
        Ok(())
    }

    /// Place the camera center at `center` (world frame), keeping the
    /// current orientation: T = -R * center.
    pub fn at_position(mut self, center: Vector3<f64>) -> Self {
        let r = self.rotation_matrix();
        let t = -(r * center);
        self.translation = [t.x, t.y, t.z];
        self
    }

    pub fn rotation_matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.rotation[i][j])
    }

    pub fn translation_vector(&self) -> Vector3<f64> {
        Vector3::from_column_slice(&self.translation)
    }

    /// Camera center in world coordinates, -R^T * T.
    pub fn center(&self) -> Vector3<f64> {
        -(self.rotation_matrix().transpose() * self.translation_vector())
    }

    pub fn fov_h(&self) -> f64 {
        2.0 * (self.sensor_width / (2.0 * self.focal_length)).atan()
    }

    pub fn fov_v(&self) -> f64 {
        2.0 * (self.sensor_height / (2.0 * self.focal_length)).atan()
    }

    /// Pixel pitch along the horizontal axis, m.
    pub fn pixel_pitch_h(&self) -> f64 {
        self.sensor_width / self.pixels_h as f64
    }

    pub fn pixel_pitch_v(&self) -> f64 {
        self.sensor_height / self.pixels_v as f64
    }

    /// Intrinsic matrix with focal lengths in pixels and the principal
    /// point at the image center.
    pub fn intrinsic_matrix(&self) -> Matrix3<f64> {
        let fx = self.focal_length / self.pixel_pitch_h();
        let fy = self.focal_length / self.pixel_pitch_v();
        Matrix3::new(
            fx,
            0.0,
            self.pixels_h as f64 / 2.0,
            0.0,
            fy,
            self.pixels_v as f64 / 2.0,
            0.0,
            0.0,
            1.0,
        )
    }

    /// Unit ray through a pixel, in world coordinates, with its origin at
    /// the camera center.
    pub fn pixel_ray(&self, pixel: &Vector2<f64>) -> (Vector3<f64>, Vector3<f64>) {
        let fx = self.focal_length / self.pixel_pitch_h();
        let fy = self.focal_length / self.pixel_pitch_v();
        let cx = self.pixels_h as f64 / 2.0;
        let cy = self.pixels_v as f64 / 2.0;
        let dir_cam = Vector3::new((pixel.x - cx) / fx, (pixel.y - cy) / fy, 1.0);
        let dir = (self.rotation_matrix().transpose() * dir_cam).normalize();
        (self.center(), dir)
    }
}

/// Project a world point M through the camera: s * m' = A [R T] M'.
/// Returns the pixel and the scale s (the depth along the optical axis).
pub fn project_point(camera: &CameraModel, point: &Vector3<f64>) -> Result<(Vector2<f64>, f64)> {
    camera.validate()?;
    let x_cam = camera.rotation_matrix() * point + camera.translation_vector();
    if x_cam.z <= 0.0 {
        return Err(Error::domain(format!(
            "point lies behind the camera (depth {})",
            x_cam.z
        )));
    }
    let a = camera.intrinsic_matrix();
    let homog = a * x_cam;
    Ok((Vector2::new(homog.x / homog.z, homog.y / homog.z), x_cam.z))
}

/// Invert the projection at a known depth along the optical axis.
pub fn back_project(camera: &CameraModel, pixel: &Vector2<f64>, depth: f64) -> Result<Vector3<f64>> {
    camera.validate()?;
    if !(depth > 0.0) {
        return Err(Error::domain("depth must be positive"));
    }
    let fx = camera.focal_length / camera.pixel_pitch_h();
    let fy = camera.focal_length / camera.pixel_pitch_v();
    let cx = camera.pixels_h as f64 / 2.0;
    let cy = camera.pixels_v as f64 / 2.0;
    let x_cam = Vector3::new(
        (pixel.x - cx) / fx * depth,
        (pixel.y - cy) / fy * depth,
        depth,
    );
    Ok(camera.rotation_matrix().transpose() * (x_cam - camera.translation_vector()))
}

/// Triangulate a point from a stereo observation: the midpoint of the
/// common perpendicular of the two back-projected rays. The returned
/// range is measured from the left camera center.
pub fn triangulate(
    left: &CameraModel,
    right: &CameraModel,
    pixel_left: &Vector2<f64>,
    pixel_right: &Vector2<f64>,
) -> Result<(Vector3<f64>, f64)> {
    left.validate()?;
    right.validate()?;
    let (o1, d1) = left.pixel_ray(pixel_left);
    let (o2, d2) = right.pixel_ray(pixel_right);
    if (o1 - o2).norm() < 1e-12 {
        return Err(Error::validation("stereo cameras share the same center"));
    }

    // Closest points on the two rays.
    let w = o1 - o2;
    let b = d1.dot(&d2);
    let d = d1.dot(&w);
    let e = d2.dot(&w);
    let denom = 1.0 - b * b;
    if denom.abs() < 1e-12 {
        return Err(Error::InfiniteRange);
    }
    let t1 = (b * e - d) / denom;
    let t2 = (e - b * d) / denom;
    let point = 0.5 * ((o1 + t1 * d1) + (o2 + t2 * d2));
    Ok((point, (point - o1).norm()))
}

/// Physical extent of an observed object.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObstacleDimensions {
    pub width: f64,
    pub height: f64,
}

/// Size an object from its bounding pixels and a triangulated range:
/// the angular extent between the bounding rays, converted to a chord at
/// that range (width = 2 R tan(alpha/2), exact for a centered object).
pub fn measure_obstacle(
    camera: &CameraModel,
    pixel_min: &Vector2<f64>,
    pixel_max: &Vector2<f64>,
    range: f64,
) -> Result<ObstacleDimensions> {
    camera.validate()?;
    if !(range > 0.0) {
        return Err(Error::validation(format!(
            "range must be positive, got {range}"
        )));
    }
    let vc = 0.5 * (pixel_min.y + pixel_max.y);
    let uc = 0.5 * (pixel_min.x + pixel_max.x);
    let angle = |a: &Vector2<f64>, b: &Vector2<f64>| {
        let (_, ra) = camera.pixel_ray(a);
        let (_, rb) = camera.pixel_ray(b);
        ra.dot(&rb).clamp(-1.0, 1.0).acos()
    };
    let alpha_w = angle(&Vector2::new(pixel_min.x, vc), &Vector2::new(pixel_max.x, vc));
    let alpha_h = angle(&Vector2::new(uc, pixel_min.y), &Vector2::new(uc, pixel_max.y));
    Ok(ObstacleDimensions {
        width: 2.0 * range * (alpha_w / 2.0).tan(),
        height: 2.0 * range * (alpha_h / 2.0).tan(),
    })
}

// The depth-resolution law is quoted in mm^2 of observed area per pixel,
// matching the survey tables; inputs are SI meters.
const M2_TO_MM2: f64 = 1e6;

/// Observed area per pixel at depth D:
/// R(D) = l_H * l_V * D^2 / (N_H * N_V * f^2), in mm^2/pixel.
/// Exactly quadratic in D.
pub fn resolution_at_depth(camera: &CameraModel, depth: f64) -> Result<f64> {
    camera.validate()?;
    if !(depth > 0.0) {
        return Err(Error::validation(format!(
            "depth must be positive, got {depth}"
        )));
    }
    let n = camera.pixels_h as f64 * camera.pixels_v as f64;
    Ok(M2_TO_MM2 * camera.sensor_width * camera.sensor_height * depth * depth
        / (n * camera.focal_length * camera.focal_length))
}

/// Depth at which the camera reaches a target resolution; inverse of
/// [`resolution_at_depth`].
pub fn range_for_resolution(camera: &CameraModel, target_resolution: f64) -> Result<f64> {
    camera.validate()?;
    if !(target_resolution > 0.0) {
        return Err(Error::validation(format!(
            "target resolution must be positive, got {target_resolution}"
        )));
    }
    let n = camera.pixels_h as f64 * camera.pixels_v as f64;
    Ok(camera.focal_length
        * (target_resolution / M2_TO_MM2 * n / (camera.sensor_width * camera.sensor_height))
            .sqrt())
}
