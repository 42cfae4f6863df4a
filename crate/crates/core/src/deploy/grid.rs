use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Result};
use crate::geometry::Point3;
use crate::scenario::Area;

/// Regular lattice of candidate hovering points at a fixed altitude,
/// including the area boundary, stored row by row from `y_min`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateGrid {
    pub spacing: f64,
    pub altitude: f64,
    pub area: Area,
    pub nx: usize,
    pub ny: usize,
    pub points: Vec<Point3>,
}

impl CandidateGrid {
    pub fn new(area: Area, spacing: f64, altitude: f64) -> Result<Self> {
        check_domain("grid spacing", spacing, spacing > 0.0, "> 0")?;
        check_domain("altitude", altitude, true, "finite")?;
        let count = |len: f64| (len / spacing + 1e-9).floor() as usize + 1;
        let (nx, ny) = (count(area.width()), count(area.height()));
        let mut points = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            for ix in 0..nx {
                let x = (area.x_min + ix as f64 * spacing).min(area.x_max);
                let y = (area.y_min + iy as f64 * spacing).min(area.y_max);
                points.push(Point3::new(x, y, altitude));
            }
        }
        Ok(Self {
            spacing,
            altitude,
            area,
            nx,
            ny,
            points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// `(ix, iy)` lattice coordinates of a point index.
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }
}
