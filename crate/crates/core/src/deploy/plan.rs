use serde::{Deserialize, Serialize};

use crate::channel::{g2a_rate, g2g_rate};
use crate::geometry::Point3;
use crate::localization::{opt_d, opt_d1};
use crate::scenario::Scenario;

pub const PLAN_SCHEMA_VERSION: u32 = 1;

/// Per-UE check of a deployment against the exact criteria.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UeReport {
    pub ue_index: usize,
    pub epsilon: f64,
    pub rate_threshold_bps: f64,
    /// Best `opt_d` over the deployed UAVs; zero without UAVs.
    pub best_opt_d: f64,
    pub best_opt_d1: f64,
    /// Best uplink rate over the BSs and UAVs.
    pub best_rate_bps: f64,
    /// `bs<n>` or `uav<n>`, zero-based.
    pub serving_node: String,
    pub localization_ok: bool,
    pub rate_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub ues: Vec<UeReport>,
    pub valid: bool,
}

/// Checks every UE against its threshold under the exact D-optimality value
/// and the exact rate formulas. Never fails: unusable inputs mark the UE as
/// not satisfied.
pub fn verify_plan(uavs: &[Point3], s: &Scenario) -> VerifyReport {
    let ues: Vec<UeReport> = s
        .ues
        .iter()
        .enumerate()
        .map(|(k, ue)| {
            let m = &ue.position;
            let epsilon = s.epsilon(k).unwrap_or(f64::NAN);
            let mut best_opt_d = 0.0f64;
            let mut best_opt_d1 = 0.0f64;
            for u in uavs {
                if let Ok(v) = opt_d(m, &s.bs, u, &s.params) {
                    best_opt_d = best_opt_d.max(v);
                }
                if let Ok(v) = opt_d1(m, &s.bs, u, &s.params) {
                    best_opt_d1 = best_opt_d1.max(v);
                }
            }
            let links = s
                .bs
                .iter()
                .enumerate()
                .map(|(n, b)| (format!("bs{n}"), g2g_rate(b, m, &s.params.ue, &s.params.env)))
                .chain(
                    uavs.iter()
                        .enumerate()
                        .map(|(n, u)| (format!("uav{n}"), g2a_rate(u, m, &s.params.ue, &s.params.env))),
                );
            let mut best_rate_bps = 0.0;
            let mut serving_node = String::from("none");
            for (name, rate) in links {
                if let Ok(r) = rate {
                    if r > best_rate_bps {
                        best_rate_bps = r;
                        serving_node = name;
                    }
                }
            }
            UeReport {
                ue_index: k,
                epsilon,
                rate_threshold_bps: ue.rate_bps,
                best_opt_d,
                best_opt_d1,
                best_rate_bps,
                serving_node,
                localization_ok: epsilon == 0.0 || best_opt_d >= epsilon,
                rate_ok: best_rate_bps >= ue.rate_bps,
            }
        })
        .collect();
    let valid = ues.iter().all(|u| u.localization_ok && u.rate_ok);
    VerifyReport { ues, valid }
}

/// Solver output as written to disk. Wall-clock time is kept out so that
/// identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeploymentPlan {
    pub schema_version: u32,
    pub scenario: String,
    pub solver: String,
    pub seed: u64,
    /// Set by the exact solver only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub optimal: Option<bool>,
    pub uav_count: usize,
    pub uav_positions: Vec<Point3>,
    pub ue_reports: Vec<UeReport>,
    pub valid: bool,
}

impl DeploymentPlan {
    pub fn new(
        s: &Scenario,
        solver: &str,
        seed: u64,
        optimal: Option<bool>,
        uav_positions: Vec<Point3>,
    ) -> Self {
        let report = verify_plan(&uav_positions, s);
        Self {
            schema_version: PLAN_SCHEMA_VERSION,
            scenario: s.name.clone(),
            solver: solver.to_string(),
            seed,
            optimal,
            uav_count: uav_positions.len(),
            uav_positions,
            ue_reports: report.ues,
            valid: report.valid,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plan serializes") + "\n"
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
