use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{CandidateGrid, RegionKind, RegionSet};
use crate::error::{Error, Result};
use crate::geometry::Point3;

/// Region descriptor as seen by the solvers. The extent is the bounding box
/// of the grid points inside the region.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionInfo {
    pub label: String,
    pub ue_index: usize,
    pub kind: RegionKind,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl RegionInfo {
    pub fn diameter(&self) -> f64 {
        (self.x_max - self.x_min).hypot(self.y_max - self.y_min)
    }
}

/// Point-region membership over the grid points lying in at least one
/// region. Point order follows the grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionIncidence {
    pub regions: Vec<RegionInfo>,
    pub points: Vec<Point3>,
    /// Lattice coordinates of each point.
    pub coords: Vec<(usize, usize)>,
    pub grid_shape: (usize, usize),
    /// Regions containing each point, ascending.
    pub point_regions: Vec<Vec<usize>>,
    /// Points inside each region, ascending.
    pub region_points: Vec<Vec<usize>>,
}

impl RegionIncidence {
    /// Assembles an incidence from explicit memberships; regions without
    /// any point are reported.
    pub fn from_membership(
        regions: Vec<RegionInfo>,
        points: Vec<Point3>,
        coords: Vec<(usize, usize)>,
        grid_shape: (usize, usize),
        membership: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let mut region_points = vec![Vec::new(); regions.len()];
        let mut keep = Vec::new();
        for (i, m) in membership.iter().enumerate() {
            if !m.is_empty() {
                keep.push(i);
            }
        }
        let mut inc = Self {
            regions,
            points: keep.iter().map(|&i| points[i]).collect(),
            coords: keep.iter().map(|&i| coords[i]).collect(),
            grid_shape,
            point_regions: Vec::with_capacity(keep.len()),
            region_points: Vec::new(),
        };
        for (l, &i) in keep.iter().enumerate() {
            let mut m = membership[i].clone();
            m.sort_unstable();
            m.dedup();
            for &r in &m {
                region_points[r].push(l);
            }
            inc.point_regions.push(m);
        }
        if let Some(r) = region_points.iter().position(Vec::is_empty) {
            return Err(Error::GridTooCoarse {
                region: r,
                label: inc.regions[r].label.clone(),
            });
        }
        inc.region_points = region_points;
        Ok(inc)
    }

    pub fn region_count(&self) -> usize {
        self.regions.len()
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    /// Number of regions containing point `l`.
    pub fn depth(&self, l: usize) -> usize {
        self.point_regions[l].len()
    }

    /// Indices of regions not hit by any of `chosen`.
    pub fn unhit(&self, chosen: &[usize]) -> Vec<usize> {
        let mut hit = vec![false; self.regions.len()];
        for &p in chosen {
            for &r in &self.point_regions[p] {
                hit[r] = true;
            }
        }
        (0..hit.len()).filter(|&r| !hit[r]).collect()
    }

    pub fn hits_all(&self, chosen: &[usize]) -> bool {
        self.unhit(chosen).is_empty()
    }
}

/// Evaluates every region at every grid point, in parallel over points.
pub fn build_incidence(grid: &CandidateGrid, set: &RegionSet) -> Result<RegionIncidence> {
    let membership: Vec<Vec<usize>> = grid
        .points
        .par_iter()
        .map(|p| {
            set.regions
                .iter()
                .enumerate()
                .filter(|(_, r)| r.contains(p))
                .map(|(j, _)| j)
                .collect()
        })
        .collect();
    let mut regions: Vec<RegionInfo> = set
        .regions
        .iter()
        .map(|r| RegionInfo {
            label: r.label(),
            ue_index: r.ue_index(),
            kind: r.kind(),
            x_min: f64::INFINITY,
            x_max: f64::NEG_INFINITY,
            y_min: f64::INFINITY,
            y_max: f64::NEG_INFINITY,
        })
        .collect();
    for (p, m) in grid.points.iter().zip(&membership) {
        for &j in m {
            let info = &mut regions[j];
            info.x_min = info.x_min.min(p.x);
            info.x_max = info.x_max.max(p.x);
            info.y_min = info.y_min.min(p.y);
            info.y_max = info.y_max.max(p.y);
        }
    }
    let coords = (0..grid.len()).map(|i| grid.coords(i)).collect();
    RegionIncidence::from_membership(
        regions,
        grid.points.clone(),
        coords,
        (grid.nx, grid.ny),
        membership,
    )
}
