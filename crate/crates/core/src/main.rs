use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use uavdeploy::bench::{
    prepare, region_rows, run_bench, run_deploy, solve_options, write_csv, SummaryRow,
};
use uavdeploy::deploy::{build_region_set, verify_plan, DeploymentPlan, Solver};
use uavdeploy::heatmap::{run_heatmap, AnchorMode};
use uavdeploy::scenario::ScenarioConfig;
use uavdeploy::Error;

const EXIT_INTERNAL: u8 = 1;
const EXIT_INFEASIBLE: u8 = 2;
const EXIT_INVALID_PLAN: u8 = 3;

/// Plan UAV hovering positions that serve NB-IoT UEs for both uplink data
/// and 3D positioning.
#[derive(Parser)]
#[command(name = "uavdeploy", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Best fourth anchor per target box, ground node versus UAV.
    Heatmap {
        #[command(flatten)]
        common: Common,
        /// Residual NLoS ToA variance, s².
        #[arg(long)]
        sigma_nlos: Option<f64>,
    },
    /// Dump the hovering regions of every UE.
    Regions {
        #[command(flatten)]
        common: Common,
    },
    /// Build regions, solve, verify and write the plan.
    Deploy {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = Solver::Df)]
        solver: Solver,
    },
    /// Random-UE campaign over several UE counts.
    Bench {
        #[command(flatten)]
        common: Common,
        /// UE counts, comma separated.
        #[arg(long, value_delimiter = ',', default_value = "10,20,30,40")]
        k: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Solvers to run, comma separated (default: all).
        #[arg(long, value_enum, value_delimiter = ',')]
        solvers: Vec<Solver>,
    },
    /// Check a plan file against a scenario.
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        plan: PathBuf,
    },
}

#[derive(Args)]
struct Common {
    /// Scenario TOML file, or `preset:standard` / `preset:triangle`.
    #[arg(long, default_value = "preset:standard")]
    config: PathBuf,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Candidate grid spacing, m.
    #[arg(long)]
    spacing: Option<f64>,
    /// UAV hovering altitude, m.
    #[arg(long)]
    altitude: Option<f64>,
    #[arg(long)]
    restarts: Option<u32>,
    /// Exact solver budget, seconds.
    #[arg(long)]
    time_budget: Option<f64>,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = ScenarioConfig::load(&self.config)?;
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if let Some(v) = self.spacing {
            cfg.grid_spacing = v;
        }
        if let Some(v) = self.altitude {
            cfg.altitude = v;
        }
        if let Some(v) = self.restarts {
            cfg.solver.restarts = v;
        }
        if let Some(v) = self.time_budget {
            cfg.solver.time_budget_s = v;
        }
        fs::create_dir_all(&self.out)
            .with_context(|| format!("creating {}", self.out.display()))?;
        Ok(cfg)
    }
}

fn write_rows<T: serde::Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    write_csv(rows, std::io::BufWriter::new(f))?;
    Ok(())
}

fn heatmap(common: &Common, sigma_nlos: Option<f64>) -> Result<u8> {
    let mut cfg = common.load()?;
    if let Some(s) = sigma_nlos {
        cfg.noise.sigma_nlos_sq = s;
    }
    let rows = run_heatmap(&cfg)?;
    let path = common.out.join("heatmap.csv");
    write_rows(&path, &rows)?;
    for mode in [AnchorMode::Ground, AnchorMode::Uav] {
        let (mut h, mut v) = ((f64::INFINITY, 0.0f64), (f64::INFINITY, 0.0f64));
        let mut singular = 0;
        for r in rows.iter().filter(|r| r.mode == mode) {
            if !r.horiz_var.is_finite() {
                singular += 1;
                continue;
            }
            h = (h.0.min(r.horiz_var), h.1.max(r.horiz_var));
            v = (v.0.min(r.vert_var), v.1.max(r.vert_var));
        }
        println!(
            "{:6}  horizontal [{:.3}, {:.3}]  vertical [{:.3}, {:.3}]  singular {}",
            mode.name(),
            h.0,
            h.1,
            v.0,
            v.1,
            singular
        );
    }
    println!("wrote {}", path.display());
    Ok(0)
}

/// Prints infeasibility diagnostics and maps them to an exit code.
fn report_setup_error(e: Error) -> Result<u8> {
    match e {
        Error::Infeasible(d) => {
            eprintln!("{}", serde_json::to_string_pretty(&d)?);
            Ok(EXIT_INFEASIBLE)
        }
        e @ (Error::GridTooCoarse { .. } | Error::InvalidThreshold { .. }) => {
            eprintln!("infeasible: {e}");
            Ok(EXIT_INFEASIBLE)
        }
        e => Err(e.into()),
    }
}

fn regions(common: &Common) -> Result<u8> {
    let cfg = common.load()?;
    let set = match build_region_set(&cfg.build()?) {
        Ok(s) => s,
        Err(e) => return report_setup_error(e),
    };
    let path = common.out.join("regions.csv");
    write_rows(&path, &region_rows(&set))?;
    println!(
        "{} regions, {} UE(s) served by a BS; wrote {}",
        set.regions.len(),
        set.served_by_bs.len(),
        path.display()
    );
    Ok(0)
}

fn deploy(common: &Common, solver: Solver) -> Result<u8> {
    let cfg = common.load()?;
    let p = match prepare(cfg.build()?) {
        Ok(p) => p,
        Err(e) => return report_setup_error(e),
    };
    let out = run_deploy(&p, solver, &solve_options(&cfg));
    fs::write(common.out.join("plan.json"), out.plan.to_json())?;
    write_rows(&common.out.join("regions.csv"), &region_rows(&p.regions))?;
    write_rows(&common.out.join("summary.csv"), &[SummaryRow::new(&p, &out)])?;
    println!(
        "{}: {} UAV(s) for {} UE(s), {} ms, plan {}",
        solver,
        out.plan.uav_count,
        p.scenario.ues.len(),
        out.runtime.as_millis(),
        if out.plan.valid { "valid" } else { "INVALID" }
    );
    if out.plan.optimal == Some(false) {
        println!("time budget exhausted: plan may not be minimal");
    }
    Ok(if out.plan.valid { 0 } else { EXIT_INVALID_PLAN })
}

fn bench(common: &Common, ks: &[usize], trials: usize, solvers: &[Solver]) -> Result<u8> {
    let cfg = common.load()?;
    let solvers = if solvers.is_empty() { &Solver::ALL[..] } else { solvers };
    let c = run_bench(&cfg, ks, trials, solvers);
    write_rows(&common.out.join("campaign.csv"), &c.rows)?;
    write_rows(&common.out.join("trials.csv"), &c.records)?;
    println!("{:>4}  {:<10} {:>9} {:>7} {:>7}", "K", "solver", "mean", "valid", "failed");
    for r in &c.rows {
        println!(
            "{:>4}  {:<10} {:>9.3} {:>7.3} {:>7}",
            r.k, r.solver, r.mean_uavs, r.valid_fraction, r.failed
        );
    }
    Ok(0)
}

fn validate(common: &Common, plan_path: &Path) -> Result<u8> {
    let cfg = common.load()?;
    let text = fs::read_to_string(plan_path)
        .with_context(|| format!("reading {}", plan_path.display()))?;
    let plan = DeploymentPlan::from_json(&text)
        .with_context(|| format!("parsing {}", plan_path.display()))?;
    let scenario = cfg.build()?;
    let report = verify_plan(&plan.uav_positions, &scenario);
    for u in &report.ues {
        if !(u.localization_ok && u.rate_ok) {
            println!(
                "UE {}: opt_d {:.4e} vs {:.4e} ({}), rate {:.0} vs {:.0} bit/s ({})",
                u.ue_index,
                u.best_opt_d,
                u.epsilon,
                if u.localization_ok { "ok" } else { "FAIL" },
                u.best_rate_bps,
                u.rate_threshold_bps,
                if u.rate_ok { "ok" } else { "FAIL" }
            );
        }
    }
    if let Ok(set) = build_region_set(&scenario) {
        let unhit: Vec<String> = set
            .regions
            .iter()
            .filter(|r| !plan.uav_positions.iter().any(|p| r.contains(p)))
            .map(|r| r.label())
            .collect();
        if !unhit.is_empty() {
            println!("regions not hit: {}", unhit.join(", "));
        }
    }
    println!(
        "{} UAV(s), plan {}",
        plan.uav_positions.len(),
        if report.valid { "valid" } else { "INVALID" }
    );
    Ok(if report.valid { 0 } else { EXIT_INVALID_PLAN })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Heatmap { common, sigma_nlos } => heatmap(common, *sigma_nlos),
        Command::Regions { common } => regions(common),
        Command::Deploy { common, solver } => deploy(common, *solver),
        Command::Bench {
            common,
            k,
            trials,
            solvers,
        } => bench(common, k, *trials, solvers),
        Command::Validate { common, plan } => validate(common, plan),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INTERNAL)
        }
    }
}
