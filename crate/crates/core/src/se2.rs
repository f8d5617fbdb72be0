//! Planar rigid poses and oriented bounding boxes.

use crate::error::{Error, Result};

/// Raw-heading squared norm below which a rotation is undefined.
pub const HEADING_NORM2_MIN: f64 = 1e-12;

/// Planar rigid transform: position plus unit heading stored as `(sin θ, cos θ)`.
///
/// Poses at API boundaries carry a normalized heading, `s² + c² = 1` within
/// 1e-9. Raw (unnormalized) sine/cosine channels exist only transiently inside
/// polynomial evaluation and fitting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SE2Pose {
    pub x: f64,
    pub y: f64,
    /// sin θ
    pub s: f64,
    /// cos θ
    pub c: f64,
}

impl SE2Pose {
    /// Pose from position and heading angle (radians).
    pub fn new(x: f64, y: f64, theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { x, y, s, c }
    }

    /// Identity pose at the origin.
    pub fn identity() -> Self {
        Self { x: 0.0, y: 0.0, s: 0.0, c: 1.0 }
    }

    /// Pose from raw sine/cosine channels, normalizing the heading.
    ///
    /// Fails with [`Error::DegenerateHeading`] when `s² + c²` is below
    /// [`HEADING_NORM2_MIN`].
    pub fn from_raw(x: f64, y: f64, s_raw: f64, c_raw: f64) -> Result<Self> {
        let (s, c) = normalize_heading(s_raw, c_raw)?;
        Ok(Self { x, y, s, c })
    }

    /// Heading angle in radians, in (-π, π].
    pub fn theta(&self) -> f64 {
        self.s.atan2(self.c)
    }

    /// Unit heading vector `(cos θ, sin θ)`.
    pub fn heading(&self) -> [f64; 2] {
        [self.c, self.s]
    }

    /// Position `(x, y)`.
    pub fn position(&self) -> [f64; 2] {
        [self.x, self.y]
    }

    /// Euclidean distance between the centroids of two poses.
    pub fn distance(&self, other: &SE2Pose) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

/// Normalize raw `(sin, cos)` channels to the unit circle.
pub fn normalize_heading(s_raw: f64, c_raw: f64) -> Result<(f64, f64)> {
    let norm2 = s_raw * s_raw + c_raw * c_raw;
    if !(norm2 >= HEADING_NORM2_MIN) {
        return Err(Error::DegenerateHeading { norm2 });
    }
    let norm = norm2.sqrt();
    Ok((s_raw / norm, c_raw / norm))
}

/// Axis-aligned body-frame box of fixed size, centered on the actor centroid.
///
/// Corner offsets in the body frame are `(±length/2, ±width/2)`; the corner
/// order is fixed as front-left, front-right, rear-right, rear-left so that
/// corner-wise errors are well defined across representations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrientedBox {
    length: f64,
    width: f64,
}

impl OrientedBox {
    pub fn new(length: f64, width: f64) -> Result<Self> {
        if !(length > 0.0) || !(width > 0.0) || !length.is_finite() || !width.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "box dimensions must be positive and finite, got {length} x {width}"
            )));
        }
        Ok(Self { length, width })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// Body-frame corner offsets in FL, FR, RR, RL order.
    pub fn corner_offsets(&self) -> [[f64; 2]; 4] {
        let hl = 0.5 * self.length;
        let hw = 0.5 * self.width;
        [[hl, hw], [hl, -hw], [-hl, -hw], [-hl, hw]]
    }

    /// World-frame corner positions of the box placed at `pose`,
    /// in FL, FR, RR, RL order.
    ///
    /// `corner_i = (x + c·ox_i − s·oy_i, y + s·ox_i + c·oy_i)`.
    pub fn corners_at(&self, pose: &SE2Pose) -> [[f64; 2]; 4] {
        self.corner_offsets().map(|[ox, oy]| {
            [
                pose.x + pose.c * ox - pose.s * oy,
                pose.y + pose.s * ox + pose.c * oy,
            ]
        })
    }
}
