//! Fourth-anchor study: for each target position, the best placement of a
//! fourth terrestrial anchor versus a UAV anchor, judged by the CRLB.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::deploy::CandidateGrid;
use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::localization::{crlb_with_anchor, toa_variance_g2a, toa_variance_g2g, SystemParams};
use crate::scenario::{Area, ScenarioConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnchorMode {
    Ground,
    Uav,
}

impl AnchorMode {
    pub fn name(self) -> &'static str {
        match self {
            AnchorMode::Ground => "ground",
            AnchorMode::Uav => "uav",
        }
    }
}

/// Best fourth anchor for one target.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnchorChoice {
    /// `None` when every candidate leaves the Fisher information singular.
    pub best: Option<Point3>,
    pub horiz_var: f64,
    pub vert_var: f64,
}

impl AnchorChoice {
    pub fn singular(&self) -> bool {
        self.best.is_none()
    }
}

fn anchor_variance(
    target: &Point3,
    anchor: &Point3,
    mode: AnchorMode,
    p: &SystemParams,
) -> Result<f64> {
    match mode {
        AnchorMode::Ground => toa_variance_g2g(anchor, target, &p.bs, &p.env, &p.noise),
        AnchorMode::Uav => toa_variance_g2a(anchor, target, &p.uav, &p.env, &p.noise),
    }
}

/// Exhaustive search over `candidates` for the anchor minimizing the total
/// CRLB; the first minimizer wins.
pub fn optimize_fourth_anchor(
    target: &Point3,
    bs: &[Point3; 3],
    candidates: &[Point3],
    mode: AnchorMode,
    p: &SystemParams,
) -> Result<AnchorChoice> {
    if candidates.is_empty() {
        return Err(Error::Config("no candidate anchor positions".into()));
    }
    let mut base = [0.0; 3];
    for (s, b) in base.iter_mut().zip(bs) {
        *s = toa_variance_g2g(b, target, &p.bs, &p.env, &p.noise)?;
    }
    let mut best = AnchorChoice {
        best: None,
        horiz_var: f64::NAN,
        vert_var: f64::NAN,
    };
    let mut best_total = f64::INFINITY;
    for c in candidates {
        let Ok(s4) = anchor_variance(target, c, mode, p) else {
            continue;
        };
        let Ok(Some(b)) = crlb_with_anchor(target, bs, c, [base[0], base[1], base[2], s4]) else {
            continue;
        };
        if b.total < best_total {
            best_total = b.total;
            best = AnchorChoice {
                best: Some(*c),
                horiz_var: b.horizontal,
                vert_var: b.vertical,
            };
        }
    }
    Ok(best)
}

/// Candidate anchor positions at one altitude.
pub fn candidate_positions(area: Area, spacing: f64, altitude: f64) -> Result<Vec<Point3>> {
    Ok(CandidateGrid::new(area, spacing, altitude)?.points)
}

/// Box centers covering the area.
pub fn box_centers(area: Area, box_size: f64, height: f64) -> Vec<Point3> {
    let nx = (area.width() / box_size + 1e-9).floor() as usize;
    let ny = (area.height() / box_size + 1e-9).floor() as usize;
    let mut out = Vec::with_capacity(nx * ny);
    for iy in 0..ny {
        for ix in 0..nx {
            out.push(Point3::new(
                area.x_min + (ix as f64 + 0.5) * box_size,
                area.y_min + (iy as f64 + 0.5) * box_size,
                height,
            ));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeatmapRow {
    pub x: f64,
    pub y: f64,
    pub mode: AnchorMode,
    pub horiz_var: f64,
    pub vert_var: f64,
}

/// Both anchor modes for `targets`, target-major, ground before UAV.
pub fn sweep(
    targets: &[Point3],
    bs: &[Point3; 3],
    p: &SystemParams,
    ground: &[Point3],
    uav: &[Point3],
) -> Result<Vec<(AnchorChoice, AnchorChoice)>> {
    targets
        .par_iter()
        .map(|t| {
            Ok((
                optimize_fourth_anchor(t, bs, ground, AnchorMode::Ground, p)?,
                optimize_fourth_anchor(t, bs, uav, AnchorMode::Uav, p)?,
            ))
        })
        .collect()
}

/// Sweeps all boxes of the area for both modes.
pub fn run_heatmap(cfg: &ScenarioConfig) -> Result<Vec<HeatmapRow>> {
    let h = &cfg.heatmap;
    let p = cfg.system_params()?;
    let targets = box_centers(cfg.area, h.box_size, h.target_height);
    let ground = candidate_positions(cfg.area, h.candidate_spacing, h.ground_altitude)?;
    let uav = candidate_positions(cfg.area, h.candidate_spacing, h.uav_altitude)?;
    let results = sweep(&targets, &cfg.bs, &p, &ground, &uav)?;
    let mut rows = Vec::with_capacity(2 * targets.len());
    for (t, (g, u)) in targets.iter().zip(results) {
        for (mode, c) in [(AnchorMode::Ground, g), (AnchorMode::Uav, u)] {
            rows.push(HeatmapRow {
                x: t.x,
                y: t.y,
                mode,
                horiz_var: c.horiz_var,
                vert_var: c.vert_var,
            });
        }
    }
    Ok(rows)
}

/// Relative reduction of the mean variance when the fourth anchor is a UAV
/// instead of a ground node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Reduction {
    pub horizontal: f64,
    pub vertical: f64,
    pub samples: usize,
}

/// For each seed, draws `targets_per_seed` uniform targets (heights from the
/// random UE range), compares the mean variances of both modes, and
/// averages the resulting reductions over seeds. Singular targets are
/// skipped.
pub fn nlos_reduction(
    cfg: &ScenarioConfig,
    targets_per_seed: usize,
    seeds: std::ops::Range<u64>,
) -> Result<Reduction> {
    let h = &cfg.heatmap;
    let p = cfg.system_params()?;
    let a = cfg.area;
    let ground = candidate_positions(a, h.candidate_spacing, h.ground_altitude)?;
    let uav = candidate_positions(a, h.candidate_spacing, h.uav_altitude)?;
    let (mut red_h, mut red_v, mut samples, mut groups) = (0.0, 0.0, 0usize, 0usize);
    for seed in seeds {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let targets: Vec<Point3> = (0..targets_per_seed)
            .map(|_| {
                Point3::new(
                    rng.gen_range(a.x_min..=a.x_max),
                    rng.gen_range(a.y_min..=a.y_max),
                    rng.gen_range(cfg.random.height_min..=cfg.random.height_max),
                )
            })
            .collect();
        let mut sum = [0.0; 4];
        let mut n = 0;
        for (g, u) in sweep(&targets, &cfg.bs, &p, &ground, &uav)? {
            if g.singular() || u.singular() {
                continue;
            }
            for (s, v) in sum.iter_mut().zip([g.horiz_var, u.horiz_var, g.vert_var, u.vert_var]) {
                *s += v;
            }
            n += 1;
        }
        if n > 0 {
            red_h += 1.0 - sum[1] / sum[0];
            red_v += 1.0 - sum[3] / sum[2];
            samples += n;
            groups += 1;
        }
    }
    if groups == 0 {
        return Err(Error::Singular("every sampled target"));
    }
    Ok(Reduction {
        horizontal: red_h / groups as f64,
        vertical: red_v / groups as f64,
        samples,
    })
}
