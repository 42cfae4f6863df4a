//! Region set construction and minimum hitting-set deployment.
//!
//! Every UE contributes a localization region and, unless a BS already
//! carries its uplink, a communication disk. The deployment area is
//! discretized at the hovering altitude and a set of grid points hitting
//! every region is chosen by one of several solvers.

mod exact;
mod grid;
mod heuristics;
mod incidence;
mod plan;

use serde::{Deserialize, Serialize};

pub use exact::{solve_exact, ExactOutcome};
pub use grid::CandidateGrid;
pub use heuristics::{
    default_strip_width, depth_first, lowest_index, solve_comm_first, solve_df, solve_spiral,
    solve_strip, spiral_order,
};
pub use incidence::{build_incidence, RegionIncidence, RegionInfo};
pub use plan::{verify_plan, DeploymentPlan, UeReport, VerifyReport, PLAN_SCHEMA_VERSION};

use crate::error::{Error, Result, UeDiagnostic};
use crate::geometry::Point3;
use crate::regions::{
    alpha_coefficients, bs_covers, comm_region_uav, region_from_alphas, CaseTag, CommRegion,
    LocalizationConstraint, LocalizationRegion,
};
use crate::scenario::Scenario;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionKind {
    Comm,
    Localization,
}

/// One hovering region of the set to be hit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Comm(CommRegion),
    Localization {
        constraint: LocalizationConstraint,
        /// Closed-form section, present when the threshold lies in the
        /// single-ellipse interval.
        ellipse: Option<LocalizationRegion>,
    },
}

impl Region {
    pub fn ue_index(&self) -> usize {
        match self {
            Region::Comm(c) => c.ue_index,
            Region::Localization { constraint, .. } => constraint.ue_index,
        }
    }

    pub fn kind(&self) -> RegionKind {
        match self {
            Region::Comm(_) => RegionKind::Comm,
            Region::Localization { .. } => RegionKind::Localization,
        }
    }

    /// `C<k>` or `E<k>` with one-based UE numbering.
    pub fn label(&self) -> String {
        let prefix = match self.kind() {
            RegionKind::Comm => 'C',
            RegionKind::Localization => 'E',
        };
        format!("{prefix}{}", self.ue_index() + 1)
    }

    pub fn contains(&self, p: &Point3) -> bool {
        match self {
            Region::Comm(c) => c.contains(p),
            Region::Localization { constraint, .. } => constraint.contains(p),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionSet {
    pub regions: Vec<Region>,
    /// UEs whose uplink a BS already supports.
    pub served_by_bs: Vec<usize>,
    /// Resolved localization threshold per UE.
    pub epsilons: Vec<f64>,
}

/// Builds the regions every deployment must hit. A UE with threshold zero
/// has no localization region; a UE reachable by a BS has no disk.
pub fn build_region_set(s: &Scenario) -> Result<RegionSet> {
    let mut regions = Vec::new();
    let mut served_by_bs = Vec::new();
    let mut epsilons = Vec::with_capacity(s.ues.len());
    let mut diagnostics = Vec::new();
    for (k, ue) in s.ues.iter().enumerate() {
        let fail = |reason: String| UeDiagnostic { ue_index: k, reason };
        let m = &ue.position;
        let covered = s.bs.iter().any(|b| bs_covers(m, b, &s.params.ue, &s.params.env, ue.rate_bps));
        let comm = if covered {
            served_by_bs.push(k);
            None
        } else {
            match comm_region_uav(k, m, &s.params.ue, &s.params.env, s.altitude, ue.rate_bps) {
                Ok(c) => Some(c),
                Err(e) => {
                    diagnostics.push(fail(e.to_string()));
                    None
                }
            }
        };
        let loc = s.epsilon(k).and_then(|eps| {
            let alphas = alpha_coefficients(m, &s.bs, &s.params)?;
            let hi = alphas.eps_max(CaseTag::Case1).max(alphas.eps_max(CaseTag::Case2));
            if !(0.0..=hi).contains(&eps) {
                return Err(Error::InvalidThreshold { epsilon: eps, lo: 0.0, hi });
            }
            Ok((eps, alphas))
        });
        match loc {
            Ok((eps, alphas)) => {
                epsilons.push(eps);
                if let Some(c) = comm {
                    regions.push(Region::Comm(c));
                }
                if eps > 0.0 {
                    let constraint = LocalizationConstraint {
                        ue_index: k,
                        ue: *m,
                        alphas,
                        epsilon: eps,
                    };
                    let ellipse = region_from_alphas(k, m, alphas, eps, s.altitude).ok();
                    regions.push(Region::Localization { constraint, ellipse });
                }
            }
            Err(e) => {
                epsilons.push(f64::NAN);
                diagnostics.push(fail(e.to_string()));
            }
        }
    }
    if !diagnostics.is_empty() {
        return Err(Error::Infeasible(diagnostics));
    }
    Ok(RegionSet {
        regions,
        served_by_bs,
        epsilons,
    })
}

/// Deployment algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Exact,
    Df,
    CommFirst,
    Spiral,
    Strip,
}

impl Solver {
    pub const ALL: [Solver; 5] = [
        Solver::Exact,
        Solver::Df,
        Solver::CommFirst,
        Solver::Spiral,
        Solver::Strip,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Solver::Exact => "exact",
            Solver::Df => "df",
            Solver::CommFirst => "comm-first",
            Solver::Spiral => "spiral",
            Solver::Strip => "strip",
        }
    }
}

impl std::fmt::Display for Solver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Solver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Solver::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown solver `{s}`")))
    }
}

/// Tuning knobs shared by the solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    pub restarts: u32,
    pub seed: u64,
    pub time_budget: std::time::Duration,
    pub strip_width: Option<f64>,
}

/// Chosen incidence points plus the exact solver's optimality flag.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub points: Vec<usize>,
    pub optimal: Option<bool>,
}

pub fn solve(inc: &RegionIncidence, solver: Solver, opts: &SolveOptions) -> Solution {
    let heuristic = |points| Solution {
        points,
        optimal: None,
    };
    match solver {
        Solver::Exact => {
            let out = solve_exact(inc, opts.time_budget);
            Solution {
                points: out.points,
                optimal: Some(out.optimal),
            }
        }
        Solver::Df => heuristic(solve_df(inc, opts.restarts, opts.seed)),
        Solver::CommFirst => heuristic(solve_comm_first(inc)),
        Solver::Spiral => heuristic(solve_spiral(inc)),
        Solver::Strip => {
            let w = opts.strip_width.unwrap_or_else(|| default_strip_width(inc));
            heuristic(solve_strip(inc, w))
        }
    }
}
