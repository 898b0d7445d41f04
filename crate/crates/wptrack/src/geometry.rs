//! Analytic geometry of the bistatic ellipse model.
//!
//! Everything here works in the canonical frame: the transmitter at the
//! origin, the receiver at `(d_los, 0)`. A moving target at `(x, y)`
//! reflects the signal, so the reflected path length is the sum of the
//! two focal distances and iso-path-length curves are confocal ellipses
//! with the devices at the foci.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::real::{wrap_angle, Real};

/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(&'static str),
    #[error("degenerate ellipse: path length {path_length} <= focal distance {d_los}")]
    DegenerateEllipse { path_length: f64, d_los: f64 },
    #[error("invalid scene: {0}")]
    InvalidScene(&'static str),
}

/// 2D point / vector in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2<F> {
    pub x: F,
    pub y: F,
}

impl<F: Real> Point2<F> {
    pub fn new(x: F, y: F) -> Self {
        Self { x, y }
    }

    pub fn norm(self) -> F {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Self) -> F {
        (self - other).norm()
    }

    pub fn dot(self, other: Self) -> F {
        self.x * other.x + self.y * other.y
    }

    /// 2D cross product (z component).
    pub fn cross(self, other: Self) -> F {
        self.x * other.y - self.y * other.x
    }
}

impl<F: Real> std::ops::Sub for Point2<F> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl<F: Real> std::ops::Add for Point2<F> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.x + rhs.x, self.y + rhs.y)
    }
}

/// Axis-aligned rectangle (canonical frame).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect<F> {
    pub x_min: F,
    pub x_max: F,
    pub y_min: F,
    pub y_max: F,
}

impl<F: Real> Rect<F> {
    pub fn contains(&self, p: Point2<F>) -> bool {
        p.x >= self.x_min && p.x <= self.x_max && p.y >= self.y_min && p.y <= self.y_max
    }
}

/// Rigid transform mapping world coordinates into the canonical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RigidTransform<F> {
    /// Rotation angle applied after translating tx to the origin.
    pub rotation: F,
    /// World position of the canonical origin (the transmitter).
    pub origin: Point2<F>,
}

impl<F: Real> RigidTransform<F> {
    pub fn to_canonical(&self, p: Point2<F>) -> Point2<F> {
        let q = p - self.origin;
        let (s, c) = (-self.rotation).sin_cos();
        Point2::new(c * q.x - s * q.y, s * q.x + c * q.y)
    }

    pub fn to_world(&self, p: Point2<F>) -> Point2<F> {
        let (s, c) = self.rotation.sin_cos();
        Point2::new(c * p.x - s * p.y, s * p.x + c * p.y) + self.origin
    }
}

/// Device placement and RF constants. Construction normalizes arbitrary
/// Tx/Rx placements into the canonical frame and records the transform.
/// The sensing area is given in canonical coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene<F> {
    d_los: F,
    carrier_freq: F,
    antenna_spacing: F,
    area: Rect<F>,
    transform: RigidTransform<F>,
}

impl<F: Real> Scene<F> {
    pub fn new(
        tx: Point2<F>,
        rx: Point2<F>,
        carrier_freq: F,
        antenna_spacing: F,
        area: Rect<F>,
    ) -> Result<Self, GeometryError> {
        let d_los = tx.dist(rx);
        if !(d_los > F::zero()) {
            return Err(GeometryError::InvalidScene("tx and rx coincide"));
        }
        if !(carrier_freq > F::zero()) {
            return Err(GeometryError::InvalidScene("carrier frequency must be positive"));
        }
        if !(antenna_spacing > F::zero()) {
            return Err(GeometryError::InvalidScene("antenna spacing must be positive"));
        }
        if area.x_min >= area.x_max || area.y_min >= area.y_max {
            return Err(GeometryError::InvalidScene("empty sensing area"));
        }
        let delta = rx - tx;
        let transform = RigidTransform {
            rotation: delta.y.atan2(delta.x),
            origin: tx,
        };
        Ok(Self {
            d_los,
            carrier_freq,
            antenna_spacing,
            area,
            transform,
        })
    }

    pub fn d_los(&self) -> F {
        self.d_los
    }

    pub fn carrier_freq(&self) -> F {
        self.carrier_freq
    }

    pub fn antenna_spacing(&self) -> F {
        self.antenna_spacing
    }

    pub fn area(&self) -> Rect<F> {
        self.area
    }

    pub fn wavelength(&self) -> F {
        F::val(SPEED_OF_LIGHT) / self.carrier_freq
    }

    /// Transmitter position in the canonical frame.
    pub fn tx(&self) -> Point2<F> {
        Point2::new(F::zero(), F::zero())
    }

    /// Receiver position in the canonical frame.
    pub fn rx(&self) -> Point2<F> {
        Point2::new(self.d_los, F::zero())
    }

    pub fn transform(&self) -> RigidTransform<F> {
        self.transform
    }

    /// Departure and arrival angles of the reflected path at the devices.
    pub fn angles_from_position(&self, pos: Point2<F>) -> Result<(F, F), GeometryError> {
        let eps = F::val(1e-12);
        if pos.dist(self.tx()) < eps {
            return Err(GeometryError::DegenerateGeometry("position coincides with tx"));
        }
        if pos.dist(self.rx()) < eps {
            return Err(GeometryError::DegenerateGeometry("position coincides with rx"));
        }
        let alpha_t = wrap_angle(pos.y.atan2(pos.x));
        let alpha_r = wrap_angle(pos.y.atan2(pos.x - self.d_los));
        Ok((alpha_t, alpha_r))
    }

    /// Reflected path length tx -> pos -> rx.
    pub fn path_length(&self, pos: Point2<F>) -> F {
        pos.dist(self.tx()) + pos.dist(self.rx())
    }
}

/// Estimated target state: position and heading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TargetState<F> {
    pub x: F,
    pub y: F,
    /// Heading in radians, (-pi, pi].
    pub phi: F,
}

impl<F: Real> TargetState<F> {
    pub fn new(x: F, y: F, phi: F) -> Self {
        Self { x, y, phi: wrap_angle(phi) }
    }

    pub fn pos(&self) -> Point2<F> {
        Point2::new(self.x, self.y)
    }

    /// Advance a distance d along the current heading.
    pub fn propagate(&self, d: F) -> Self {
        Self {
            x: self.x + d * self.phi.cos(),
            y: self.y + d * self.phi.sin(),
            phi: self.phi,
        }
    }
}

/// Confocal-ellipse parameters for a given reflected path length.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipseParams<F> {
    /// Semi-major axis.
    pub a: F,
    /// Semi-minor axis.
    pub b: F,
    /// Focal half-distance.
    pub c: F,
}

/// Ellipse of all points whose reflected path length equals `path_length`,
/// centered at `(d_los / 2, 0)` with the devices at the foci.
pub fn ellipse_from_path_length<F: Real>(
    path_length: F,
    d_los: F,
) -> Result<EllipseParams<F>, GeometryError> {
    if path_length <= d_los {
        return Err(GeometryError::DegenerateEllipse {
            path_length: path_length.to_f64().unwrap_or(f64::NAN),
            d_los: d_los.to_f64().unwrap_or(f64::NAN),
        });
    }
    let a = path_length * F::half();
    let c = d_los * F::half();
    let b = (a * a - c * c).sqrt();
    Ok(EllipseParams { a, b, c })
}

impl<F: Real> EllipseParams<F> {
    /// Left side of the normalized ellipse equation at a point
    /// (equals 1 exactly on the ellipse).
    pub fn eval(&self, pos: Point2<F>) -> F {
        let cx = pos.x - self.c;
        cx * cx / (self.a * self.a) + pos.y * pos.y / (self.b * self.b)
    }
}

/// Instantaneous ratio of path-length change rate to walking speed for a
/// target with departure/arrival angles `alpha_t`/`alpha_r` moving along
/// heading `phi`. This is the directional derivative of the reflected
/// path length along the motion direction.
pub fn doppler_ratio<F: Real>(alpha_t: F, alpha_r: F, phi: F) -> F {
    F::two()
        * ((alpha_t - alpha_r) * F::half()).cos()
        * ((alpha_t + alpha_r) * F::half() - phi).cos()
}

/// Recover the departure angle at time t from the positions at t and t+1:
/// the angle at t+1 plus the signed angle swept between the two positions
/// as seen from the transmitter. Exactly equals `atan2(y_t, x_t)`.
pub fn departure_angle_recursion<F: Real>(
    pos_t: Point2<F>,
    pos_t1: Point2<F>,
) -> Result<F, GeometryError> {
    let eps = F::val(1e-12);
    if pos_t.norm() < eps || pos_t1.norm() < eps {
        return Err(GeometryError::DegenerateGeometry("position coincides with tx"));
    }
    let alpha_t1 = pos_t1.y.atan2(pos_t1.x);
    // Signed sweep from pos_t1 back to pos_t around the origin.
    let beta = pos_t1.cross(pos_t).atan2(pos_t1.dot(pos_t));
    Ok(wrap_angle(alpha_t1 + beta))
}
