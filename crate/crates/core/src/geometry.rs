//! Geometric primitives: positions, direction cosines, elevation angles and
//! the conversion from a general planar conic to ellipse parameters.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Semi-axes shorter than this are treated as a degenerate ellipse.
pub const MIN_SEMI_AXIS: f64 = 1e-9;

/// A position in meters; `h` is the altitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub h: f64,
}

impl Point3 {
    pub const fn new(x: f64, y: f64, h: f64) -> Self {
        Self { x, y, h }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.h.is_finite()
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dh) = (other.x - self.x, other.y - self.y, other.h - self.h);
        (dx * dx + dy * dy + dh * dh).sqrt()
    }

    pub fn horizontal_distance(&self, other: &Point3) -> f64 {
        (other.x - self.x).hypot(other.y - self.y)
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.h]
    }
}

impl From<[f64; 3]> for Point3 {
    fn from(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }
}

/// Direction cosines of a unit-length vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnitVector3 {
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
}

impl UnitVector3 {
    pub fn to_array(self) -> [f64; 3] {
        [self.q1, self.q2, self.q3]
    }

    pub fn dot(&self, v: &[f64; 3]) -> f64 {
        self.q1 * v[0] + self.q2 * v[1] + self.q3 * v[2]
    }

    pub fn norm(&self) -> f64 {
        (self.q1 * self.q1 + self.q2 * self.q2 + self.q3 * self.q3).sqrt()
    }
}

impl std::ops::Neg for UnitVector3 {
    type Output = UnitVector3;

    fn neg(self) -> UnitVector3 {
        UnitVector3 {
            q1: -self.q1,
            q2: -self.q2,
            q3: -self.q3,
        }
    }
}

/// Unit vector pointing from `from` to `to`.
///
/// The localization formulas use the direction from a target location toward
/// an anchor, so callers pass `(target, anchor)`.
pub fn unit_vector(from: &Point3, to: &Point3) -> Result<UnitVector3> {
    let d = from.distance(to);
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::DegenerateGeometry("unit vector between coincident points"));
    }
    Ok(UnitVector3 {
        q1: (to.x - from.x) / d,
        q2: (to.y - from.y) / d,
        q3: (to.h - from.h) / d,
    })
}

/// Elevation angle in degrees of the link between a ground node and an
/// aerial node, in `[0, 90]`.
pub fn elevation_angle_deg(ue: &Point3, uav: &Point3) -> Result<f64> {
    let d = ue.distance(uav);
    if !(d > 0.0) {
        return Err(Error::DegenerateGeometry("elevation angle between coincident points"));
    }
    // Rounding can push the ratio a hair above one for vertical links.
    let s = ((uav.h - ue.h).abs() / d).min(1.0);
    Ok(s.asin().to_degrees())
}

/// General conic `A x^2 + B xy + C y^2 + D x + E y + F = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[allow(non_snake_case)]
pub struct Conic2D {
    pub A: f64,
    pub B: f64,
    pub C: f64,
    pub D: f64,
    pub E: f64,
    pub F: f64,
}

impl Conic2D {
    #[allow(non_snake_case)]
    pub const fn new(A: f64, B: f64, C: f64, D: f64, E: f64, F: f64) -> Self {
        Self { A, B, C, D, E, F }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.A * x * x + self.B * x * y + self.C * y * y + self.D * x + self.E * y + self.F
    }

    pub fn discriminant(&self) -> f64 {
        self.B * self.B - 4.0 * self.A * self.C
    }

    pub fn max_abs_coefficient(&self) -> f64 {
        [self.A, self.B, self.C, self.D, self.E, self.F]
            .iter()
            .fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    fn scaled(&self, s: f64) -> Conic2D {
        Conic2D::new(
            self.A * s,
            self.B * s,
            self.C * s,
            self.D * s,
            self.E * s,
            self.F * s,
        )
    }
}

/// Center, major-axis angle and semi-axes of an ellipse in the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub center: (f64, f64),
    /// Angle of the major axis from the x axis, radians.
    pub rotation: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
}

impl EllipseParams {
    /// Point on the boundary at parametric angle `t`.
    pub fn boundary_point(&self, t: f64) -> (f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        let (u, v) = (self.semi_major * t.cos(), self.semi_minor * t.sin());
        (self.center.0 + u * c - v * s, self.center.1 + u * s + v * c)
    }

    /// Normalized radial coordinate: `< 1` inside, `1` on the boundary.
    pub fn normalized_radius(&self, x: f64, y: f64) -> f64 {
        let (s, c) = self.rotation.sin_cos();
        let (dx, dy) = (x - self.center.0, y - self.center.1);
        let u = dx * c + dy * s;
        let v = -dx * s + dy * c;
        ((u / self.semi_major).powi(2) + (v / self.semi_minor).powi(2)).sqrt()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.normalized_radius(x, y) <= 1.0
    }

    /// Axis-aligned bounding box `(x_min, x_max, y_min, y_max)`.
    pub fn bounding_box(&self) -> (f64, f64, f64, f64) {
        let (s, c) = self.rotation.sin_cos();
        let hx = ((self.semi_major * c).powi(2) + (self.semi_minor * s).powi(2)).sqrt();
        let hy = ((self.semi_major * s).powi(2) + (self.semi_minor * c).powi(2)).sqrt();
        (
            self.center.0 - hx,
            self.center.0 + hx,
            self.center.1 - hy,
            self.center.1 + hy,
        )
    }

    /// Conic whose zero set is this ellipse, normalized so that `F = -1`
    /// in the centered frame.
    pub fn to_conic(&self) -> Conic2D {
        let (s, c) = self.rotation.sin_cos();
        let (a2, b2) = (self.semi_major.powi(2), self.semi_minor.powi(2));
        let a = c * c / a2 + s * s / b2;
        let b = 2.0 * c * s * (1.0 / a2 - 1.0 / b2);
        let cc = s * s / a2 + c * c / b2;
        let (x0, y0) = self.center;
        Conic2D::new(
            a,
            b,
            cc,
            -2.0 * a * x0 - b * y0,
            -b * x0 - 2.0 * cc * y0,
            a * x0 * x0 + b * x0 * y0 + cc * y0 * y0 - 1.0,
        )
    }
}

/// True iff the conic is an ellipse by the discriminant test `B^2 - 4AC < 0`.
pub fn is_ellipse(c: &Conic2D) -> bool {
    c.discriminant() < 0.0
}

/// Center, rotation and semi-axes of an elliptic conic.
pub fn conic_to_ellipse(conic: &Conic2D) -> Result<EllipseParams> {
    if !is_ellipse(conic) {
        return Err(Error::InvalidConic("discriminant is not negative"));
    }
    // The axis formula pairs the `+` root with the major axis only when
    // A + C > 0.
    let k = if conic.A + conic.C < 0.0 { -1.0 } else { 1.0 };
    let Conic2D { A, B, C, D, E, F } = conic.scaled(k / conic.max_abs_coefficient());

    let disc = B * B - 4.0 * A * C;
    let center = ((2.0 * C * D - B * E) / disc, (2.0 * A * E - B * D) / disc);
    let root = ((A - C).powi(2) + B * B).sqrt();
    let rotation = if B == 0.0 {
        if A <= C {
            0.0
        } else {
            FRAC_PI_2
        }
    } else {
        ((C - A - root) / B).atan()
    };

    let q = 2.0 * (A * E * E + C * D * D - B * D * E + disc * F);
    let major_sq = q * (A + C + root);
    let minor_sq = q * (A + C - root);
    if !(major_sq > 0.0) || !(minor_sq > 0.0) {
        return Err(Error::InvalidConic("ellipse has no real points"));
    }
    let semi_major = -major_sq.sqrt() / disc;
    let semi_minor = -minor_sq.sqrt() / disc;
    if !(semi_minor >= MIN_SEMI_AXIS) || !semi_major.is_finite() {
        return Err(Error::InvalidConic("degenerate ellipse"));
    }
    Ok(EllipseParams {
        center,
        rotation: wrap_half_turn(rotation),
        semi_major,
        semi_minor,
    })
}

/// Maps an axis angle into `[0, pi)`.
pub fn wrap_half_turn(angle: f64) -> f64 {
    let r = angle.rem_euclid(PI);
    if r >= PI {
        0.0
    } else {
        r
    }
}
