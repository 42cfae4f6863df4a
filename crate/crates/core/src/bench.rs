//! End-to-end deployment runs and randomized benchmark campaigns.

use std::io::Write;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::Serialize;

use crate::deploy::{
    build_incidence, build_region_set, solve, CandidateGrid, DeploymentPlan, Region,
    RegionIncidence, RegionKind, RegionSet, SolveOptions, Solver,
};
use crate::error::{Error, Result};
use crate::scenario::{Scenario, ScenarioConfig, UeSpec};

/// Region set, incidence and grid of a scenario.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub scenario: Scenario,
    pub grid: CandidateGrid,
    pub regions: RegionSet,
    pub incidence: RegionIncidence,
}

pub fn prepare(scenario: Scenario) -> Result<Prepared> {
    let grid = CandidateGrid::new(scenario.area, scenario.grid_spacing, scenario.altitude)?;
    let regions = build_region_set(&scenario)?;
    let incidence = build_incidence(&grid, &regions)?;
    Ok(Prepared {
        scenario,
        grid,
        regions,
        incidence,
    })
}

pub fn solve_options(cfg: &ScenarioConfig) -> SolveOptions {
    SolveOptions {
        restarts: cfg.solver.restarts,
        seed: cfg.seed,
        time_budget: Duration::from_secs_f64(cfg.solver.time_budget_s.max(0.0)),
        strip_width: cfg.solver.strip_width,
    }
}

#[derive(Debug, Clone)]
pub struct DeployOutcome {
    pub plan: DeploymentPlan,
    pub runtime: Duration,
}

/// Runs one solver and verifies its plan.
pub fn run_deploy(p: &Prepared, solver: Solver, opts: &SolveOptions) -> DeployOutcome {
    let start = Instant::now();
    let sol = solve(&p.incidence, solver, opts);
    let runtime = start.elapsed();
    let positions = sol.points.iter().map(|&l| p.incidence.points[l]).collect();
    DeployOutcome {
        plan: DeploymentPlan::new(&p.scenario, solver.name(), opts.seed, sol.optimal, positions),
        runtime,
    }
}

/// True when the UE alone yields a region set the candidate grid can hit.
fn ue_is_deployable(cfg: &ScenarioConfig, grid: &CandidateGrid, ue: UeSpec) -> bool {
    cfg.build_with(vec![ue])
        .and_then(|s| build_region_set(&s))
        .and_then(|set| build_incidence(grid, &set))
        .is_ok()
}

/// `k` random UEs for one campaign cell. UEs whose requirements cannot be
/// met on the grid are redrawn.
pub fn random_scenario(cfg: &ScenarioConfig, k: usize, trial: usize) -> Result<Prepared> {
    let grid = CandidateGrid::new(cfg.area, cfg.grid_spacing, cfg.altitude)?;
    let mut rng = cfg.trial_rng(k, trial);
    let mut ues = Vec::with_capacity(k);
    for i in 0..k {
        let mut attempts = 0;
        loop {
            let ue = cfg.sample_ue(&mut rng);
            if ue_is_deployable(cfg, &grid, ue) {
                ues.push(ue);
                break;
            }
            attempts += 1;
            if attempts >= cfg.random.max_attempts {
                return Err(Error::Config(format!(
                    "UE {i}: no deployable draw in {attempts} attempts"
                )));
            }
        }
    }
    let mut scenario = cfg.build_with(ues)?;
    scenario.name = format!("{}-k{k}-t{trial}", cfg.name);
    prepare(scenario)
}

/// One solver run inside a campaign.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub k: usize,
    pub trial: usize,
    pub solver: String,
    pub uav_count: Option<usize>,
    pub valid: Option<bool>,
    pub optimal: Option<bool>,
    /// Kept out of files so campaigns stay byte-reproducible.
    #[serde(skip)]
    pub runtime_ms: f64,
    pub error: Option<String>,
}

/// Mean result of one `(K, solver)` campaign cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRow {
    pub k: usize,
    pub solver: String,
    pub trials: usize,
    pub failed: usize,
    pub mean_uavs: f64,
    pub min_uavs: usize,
    pub max_uavs: usize,
    pub valid_fraction: f64,
    pub optimal_fraction: f64,
}

#[derive(Debug, Clone)]
pub struct Campaign {
    pub records: Vec<TrialRecord>,
    pub rows: Vec<CampaignRow>,
}

/// Runs every solver on `trials` random scenarios per `K`. Trials run in
/// parallel; each owns the RNG stream of its `(K, trial)` cell.
pub fn run_bench(cfg: &ScenarioConfig, ks: &[usize], trials: usize, solvers: &[Solver]) -> Campaign {
    let opts = solve_options(cfg);
    let cells: Vec<(usize, usize)> = ks
        .iter()
        .flat_map(|&k| (0..trials).map(move |t| (k, t)))
        .collect();
    let per_cell: Vec<Vec<TrialRecord>> = cells
        .par_iter()
        .map(|&(k, trial)| match random_scenario(cfg, k, trial) {
            Ok(p) => solvers
                .iter()
                .map(|&s| {
                    let out = run_deploy(&p, s, &opts);
                    TrialRecord {
                        k,
                        trial,
                        solver: s.name().to_string(),
                        uav_count: Some(out.plan.uav_count),
                        valid: Some(out.plan.valid),
                        optimal: out.plan.optimal,
                        runtime_ms: out.runtime.as_secs_f64() * 1e3,
                        error: None,
                    }
                })
                .collect(),
            Err(e) => solvers
                .iter()
                .map(|&s| TrialRecord {
                    k,
                    trial,
                    solver: s.name().to_string(),
                    uav_count: None,
                    valid: None,
                    optimal: None,
                    runtime_ms: 0.0,
                    error: Some(e.to_string()),
                })
                .collect(),
        })
        .collect();
    let records: Vec<TrialRecord> = per_cell.into_iter().flatten().collect();
    let mut rows = Vec::new();
    for &k in ks {
        for s in solvers {
            let cell: Vec<&TrialRecord> = records
                .iter()
                .filter(|r| r.k == k && r.solver == s.name())
                .collect();
            let counts: Vec<usize> = cell.iter().filter_map(|r| r.uav_count).collect();
            let ok = counts.len();
            let frac = |f: &dyn Fn(&TrialRecord) -> bool| {
                if ok == 0 {
                    0.0
                } else {
                    cell.iter().filter(|r| f(r)).count() as f64 / ok as f64
                }
            };
            rows.push(CampaignRow {
                k,
                solver: s.name().to_string(),
                trials: cell.len(),
                failed: cell.len() - ok,
                mean_uavs: if ok == 0 {
                    f64::NAN
                } else {
                    counts.iter().sum::<usize>() as f64 / ok as f64
                },
                min_uavs: counts.iter().copied().min().unwrap_or(0),
                max_uavs: counts.iter().copied().max().unwrap_or(0),
                valid_fraction: frac(&|r| r.valid == Some(true)),
                optimal_fraction: frac(&|r| r.optimal == Some(true)),
            });
        }
    }
    Campaign { records, rows }
}

/// One line of the region dump. Fields that do not apply stay empty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionRow {
    pub label: String,
    #[serde(rename = "type")]
    pub kind: RegionKind,
    pub ue_index: usize,
    pub center_x: Option<f64>,
    pub center_y: Option<f64>,
    pub radius: Option<f64>,
    pub semi_major: Option<f64>,
    pub semi_minor: Option<f64>,
    /// Major-axis angle from the x axis, radians in `[0, pi)`.
    pub rotation: Option<f64>,
    pub epsilon: Option<f64>,
}

pub fn region_rows(set: &RegionSet) -> Vec<RegionRow> {
    set.regions
        .iter()
        .map(|r| {
            let mut row = RegionRow {
                label: r.label(),
                kind: r.kind(),
                ue_index: r.ue_index(),
                center_x: None,
                center_y: None,
                radius: None,
                semi_major: None,
                semi_minor: None,
                rotation: None,
                epsilon: None,
            };
            match r {
                Region::Comm(c) => {
                    row.center_x = Some(c.center.0);
                    row.center_y = Some(c.center.1);
                    row.radius = Some(c.radius);
                }
                Region::Localization { constraint, ellipse } => {
                    row.epsilon = Some(constraint.epsilon);
                    if let Some(e) = ellipse {
                        row.center_x = Some(e.ellipse.center.0);
                        row.center_y = Some(e.ellipse.center.1);
                        row.semi_major = Some(e.ellipse.semi_major);
                        row.semi_minor = Some(e.ellipse.semi_minor);
                        row.rotation = Some(e.ellipse.rotation);
                    }
                }
            }
            row
        })
        .collect()
}

/// One line of the per-run summary.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub scenario: String,
    pub solver: String,
    pub k: usize,
    pub uav_count: usize,
    pub runtime_ms: f64,
    pub valid: bool,
}

impl SummaryRow {
    pub fn new(p: &Prepared, out: &DeployOutcome) -> Self {
        Self {
            scenario: p.scenario.name.clone(),
            solver: out.plan.solver.clone(),
            k: p.scenario.ues.len(),
            uav_count: out.plan.uav_count,
            runtime_ms: out.runtime.as_secs_f64() * 1e3,
            valid: out.plan.valid,
        }
    }
}

/// Writes records as CSV with a header row.
pub fn write_csv<T: Serialize, W: Write>(rows: &[T], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Config(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::Config(e.to_string()))
}
