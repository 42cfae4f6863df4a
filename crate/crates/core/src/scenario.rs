//! Scenario configuration: deployment area, anchors, UEs and radio settings.
//!
//! Configurations are TOML documents. [`ScenarioConfig`] mirrors the file
//! one-to-one; [`ScenarioConfig::build`] validates it into a [`Scenario`].

use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{LinkBudget, RadioEnvironment};
use crate::error::{check_domain, Error, Result};
use crate::geometry::Point3;
use crate::localization::{nprs_psi, NprsConfig, SystemParams, ToaNoiseModel};
use crate::regions::{alpha_coefficients, epsilon_at_fraction};

/// Axis-aligned deployment area, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Area {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl Area {
    pub fn square(side: f64) -> Self {
        Self {
            x_min: 0.0,
            x_max: side,
            y_min: 0.0,
            y_max: side,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_max - self.x_min
    }

    pub fn height(&self) -> f64 {
        self.y_max - self.y_min
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        (self.x_min..=self.x_max).contains(&x) && (self.y_min..=self.y_max).contains(&y)
    }

    fn validate(&self) -> Result<()> {
        for v in [self.x_min, self.x_max, self.y_min, self.y_max] {
            check_domain("area bound", v, true, "finite")?;
        }
        if !(self.x_max > self.x_min && self.y_max > self.y_min) {
            return Err(Error::Config("area must have positive width and height".into()));
        }
        Ok(())
    }
}

/// Localization threshold of a UE: an absolute `opt_d1` value or a position
/// inside the interval where its hovering region is a single ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonSpec {
    Absolute(f64),
    Fraction(f64),
}

impl Default for EpsilonSpec {
    fn default() -> Self {
        EpsilonSpec::Fraction(0.5)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UeSpec {
    pub position: Point3,
    /// Uplink rate requirement, bit/s.
    pub rate_bps: f64,
    #[serde(default)]
    pub epsilon: EpsilonSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadioConfig {
    pub e1: f64,
    pub e2: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub fc_hz: f64,
    pub n0_dbm_per_hz: f64,
    pub outage_eps: f64,
    /// Overrides the exponential fading quantile of `outage_eps`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub f_inv: Option<f64>,
}

impl Default for RadioConfig {
    fn default() -> Self {
        Self {
            e1: 15.0,
            e2: 0.5,
            kappa: 0.2,
            alpha: 2.0,
            beta: 2.2,
            fc_hz: 2.1e9,
            n0_dbm_per_hz: -174.0,
            outage_eps: 0.1,
            f_inv: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PowerConfig {
    pub bs_w: f64,
    pub uav_w: f64,
    pub ue_w: f64,
    /// Reference signal bandwidth, Hz.
    pub nprs_bandwidth_hz: f64,
    /// UE uplink bandwidth, Hz.
    pub uplink_bandwidth_hz: f64,
}

impl Default for PowerConfig {
    fn default() -> Self {
        Self {
            bs_w: 1.0,
            uav_w: 1.0,
            ue_w: 0.01,
            nprs_bandwidth_hz: 180e3,
            uplink_bandwidth_hz: 180e3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    /// Residual NLoS ToA variance on terrestrial links, s².
    pub sigma_nlos_sq: f64,
    /// Overrides the ToA scale derived from the NPRS layout.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub psi: Option<f64>,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma_nlos_sq: 4e-17,
            psi: None,
        }
    }
}

/// Sampling ranges for randomly placed UEs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RandomUeConfig {
    pub height_min: f64,
    pub height_max: f64,
    pub rate_min_bps: f64,
    pub rate_max_bps: f64,
    pub fraction_min: f64,
    pub fraction_max: f64,
    /// Redraws allowed per UE before a trial is abandoned.
    pub max_attempts: u32,
}

impl Default for RandomUeConfig {
    fn default() -> Self {
        Self {
            height_min: 10.0,
            height_max: 20.0,
            rate_min_bps: 2.9e6,
            rate_max_bps: 3.1e6,
            fraction_min: 0.0,
            fraction_max: 1.0,
            max_attempts: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    /// Depth-first runs; runs after the first break ties at random.
    pub restarts: u32,
    /// Wall-clock budget of the exact solver, seconds.
    pub time_budget_s: f64,
    /// Strip width of the strip baseline; defaults to the widest
    /// communication region.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strip_width: Option<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            restarts: 10,
            time_budget_s: 60.0,
            strip_width: None,
        }
    }
}

/// Settings of the fourth-anchor heatmap sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapConfig {
    /// Side of the target boxes; targets sit at box centers.
    pub box_size: f64,
    pub target_height: f64,
    pub ground_altitude: f64,
    pub uav_altitude: f64,
    /// Spacing of candidate fourth-anchor positions.
    pub candidate_spacing: f64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        Self {
            box_size: 10.0,
            target_height: 10.0,
            ground_altitude: 30.0,
            uav_altitude: 200.0,
            candidate_spacing: 10.0,
        }
    }
}

/// On-disk scenario description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: String,
    #[serde(default)]
    pub seed: u64,
    /// UAV hovering altitude, meters.
    pub altitude: f64,
    pub grid_spacing: f64,
    pub area: Area,
    pub bs: [Point3; 3],
    #[serde(default)]
    pub radio: RadioConfig,
    #[serde(default)]
    pub power: PowerConfig,
    #[serde(default)]
    pub noise: NoiseConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nprs: Option<NprsConfig>,
    #[serde(default)]
    pub random: RandomUeConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub heatmap: HeatmapConfig,
    #[serde(default)]
    pub ues: Vec<UeSpec>,
}

pub const PRESETS: [&str; 2] = ["standard", "triangle"];

impl ScenarioConfig {
    /// Built-in scenarios: `standard` (deployment layout) and `triangle`
    /// (heatmap layout). Neither lists UEs.
    pub fn preset(name: &str) -> Result<Self> {
        let bs = match name {
            "standard" => [
                Point3::new(100.0, 100.0, 30.0),
                Point3::new(250.0, 433.0, 30.0),
                Point3::new(500.0, 250.0, 30.0),
            ],
            "triangle" => [
                Point3::new(0.0, 0.0, 30.0),
                Point3::new(500.0, 0.0, 30.0),
                Point3::new(250.0, 433.0, 30.0),
            ],
            other => {
                return Err(Error::Config(format!(
                    "unknown preset `{other}` (expected one of {})",
                    PRESETS.join(", ")
                )))
            }
        };
        Ok(Self {
            name: name.to_string(),
            seed: 0,
            altitude: 100.0,
            grid_spacing: 10.0,
            area: Area::square(600.0),
            bs,
            radio: RadioConfig::default(),
            power: PowerConfig::default(),
            noise: NoiseConfig::default(),
            nprs: None,
            random: RandomUeConfig::default(),
            solver: SolverConfig::default(),
            heatmap: HeatmapConfig::default(),
            ues: Vec::new(),
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a TOML file, or a preset when `path` is `preset:<name>`.
    pub fn load(path: &Path) -> Result<Self> {
        if let Some(name) = path.to_str().and_then(|s| s.strip_prefix("preset:")) {
            return Self::preset(name);
        }
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn system_params(&self) -> Result<SystemParams> {
        let r = &self.radio;
        let env = RadioEnvironment::new(
            r.e1,
            r.e2,
            r.kappa,
            r.alpha,
            r.beta,
            r.fc_hz,
            r.n0_dbm_per_hz,
            r.outage_eps,
            r.f_inv,
        )?;
        let psi = match self.noise.psi {
            Some(psi) => psi,
            None => nprs_psi(&self.nprs.clone().unwrap_or_default())?,
        };
        let p = &self.power;
        Ok(SystemParams {
            env,
            bs: LinkBudget::new(p.bs_w, p.nprs_bandwidth_hz)?,
            uav: LinkBudget::new(p.uav_w, p.nprs_bandwidth_hz)?,
            ue: LinkBudget::new(p.ue_w, p.uplink_bandwidth_hz)?,
            noise: ToaNoiseModel::new(psi, self.noise.sigma_nlos_sq)?,
        })
    }

    /// Validated scenario with the configured UEs.
    pub fn build(&self) -> Result<Scenario> {
        self.build_with(self.ues.clone())
    }

    /// Validated scenario with an explicit UE list.
    pub fn build_with(&self, ues: Vec<UeSpec>) -> Result<Scenario> {
        self.area.validate()?;
        check_domain("grid_spacing", self.grid_spacing, self.grid_spacing > 0.0, "> 0")?;
        for b in &self.bs {
            if !b.is_finite() {
                return Err(Error::Config("BS position is not finite".into()));
            }
        }
        let params = self.system_params()?;
        for (k, ue) in ues.iter().enumerate() {
            if !ue.position.is_finite() {
                return Err(Error::Config(format!("UE {k}: position is not finite")));
            }
            check_domain("UE rate_bps", ue.rate_bps, ue.rate_bps >= 0.0, ">= 0")?;
            if !(self.altitude > ue.position.h) {
                return Err(Error::Config(format!(
                    "UE {k}: altitude {} m does not exceed UE height {} m",
                    self.altitude, ue.position.h
                )));
            }
            match ue.epsilon {
                EpsilonSpec::Absolute(e) => check_domain("epsilon", e, e >= 0.0, ">= 0")?,
                EpsilonSpec::Fraction(f) => {
                    check_domain("epsilon fraction", f, (0.0..=1.0).contains(&f), "[0, 1]")?
                }
            }
        }
        Ok(Scenario {
            name: self.name.clone(),
            seed: self.seed,
            area: self.area,
            bs: self.bs,
            params,
            altitude: self.altitude,
            grid_spacing: self.grid_spacing,
            ues,
        })
    }

    /// Independent RNG stream for a `(k, trial)` cell of a campaign.
    pub fn trial_rng(&self, k: usize, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(((k as u64) << 32) | trial as u64);
        rng
    }

    /// One random UE inside the area per the sampling ranges.
    pub fn sample_ue<R: Rng>(&self, rng: &mut R) -> UeSpec {
        let a = &self.area;
        let r = &self.random;
        let x = rng.gen_range(a.x_min..=a.x_max);
        let y = rng.gen_range(a.y_min..=a.y_max);
        let h = rng.gen_range(r.height_min..=r.height_max);
        let rate = rng.gen_range(r.rate_min_bps..=r.rate_max_bps);
        let f = rng.gen_range(r.fraction_min..=r.fraction_max);
        UeSpec {
            position: Point3::new(x, y, h),
            rate_bps: rate,
            epsilon: EpsilonSpec::Fraction(f),
        }
    }
}

/// Validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    pub area: Area,
    pub bs: [Point3; 3],
    pub params: SystemParams,
    pub altitude: f64,
    pub grid_spacing: f64,
    pub ues: Vec<UeSpec>,
}

impl Scenario {
    /// Absolute localization threshold of UE `k`.
    pub fn epsilon(&self, k: usize) -> Result<f64> {
        let ue = &self.ues[k];
        match ue.epsilon {
            EpsilonSpec::Absolute(e) => Ok(e),
            EpsilonSpec::Fraction(f) => {
                let a = alpha_coefficients(&ue.position, &self.bs, &self.params)?;
                epsilon_at_fraction(&a, f)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_ues() -> ScenarioConfig {
        let mut c = ScenarioConfig::preset("standard").unwrap();
        c.ues = vec![
            UeSpec {
                position: Point3::new(100.0, 50.0, 10.0),
                rate_bps: 3e6,
                epsilon: EpsilonSpec::Fraction(0.25),
            },
            UeSpec {
                position: Point3::new(300.0, 250.0, 15.0),
                rate_bps: 2.9e6,
                epsilon: EpsilonSpec::Absolute(1e-3),
            },
        ];
        c.nprs = Some(NprsConfig::default());
        c.radio.f_inv = Some(0.11);
        c
    }

    #[test]
    fn toml_round_trip() {
        let c = with_ues();
        let text = c.to_toml_string().unwrap();
        let back = ScenarioConfig::from_toml_str(&text).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.build().unwrap(), c.build().unwrap());
        assert_eq!(back.to_toml_string().unwrap(), text);
    }

    #[test]
    fn minimal_document_uses_defaults() {
        let text = r#"
            name = "tiny"
            altitude = 100.0
            grid_spacing = 10.0
            area = { x_min = 0.0, x_max = 600.0, y_min = 0.0, y_max = 600.0 }
            bs = [{ x = 100.0, y = 100.0, h = 30.0 },
                  { x = 250.0, y = 433.0, h = 30.0 },
                  { x = 500.0, y = 250.0, h = 30.0 }]

            [[ues]]
            position = { x = 10.0, y = 20.0, h = 12.0 }
            rate_bps = 3.0e6
        "#;
        let c = ScenarioConfig::from_toml_str(text).unwrap();
        let preset = ScenarioConfig::preset("standard").unwrap();
        assert_eq!(c.radio, preset.radio);
        assert_eq!(c.ues[0].epsilon, EpsilonSpec::Fraction(0.5));
        let s = c.build().unwrap();
        assert_eq!(s.params, preset.system_params().unwrap());
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(ScenarioConfig::from_toml_str("name = 1").is_err());
        assert!(ScenarioConfig::preset("nope").is_err());
        let mut c = with_ues();
        c.ues[0].position.h = 150.0;
        assert!(c.build().is_err());
        let mut c = with_ues();
        c.ues[0].epsilon = EpsilonSpec::Fraction(1.5);
        assert!(c.build().is_err());
        let mut c = with_ues();
        c.area.x_max = -1.0;
        assert!(c.build().is_err());
        let mut c = with_ues();
        c.radio.kappa = 0.0;
        assert!(c.build().is_err());
        let text = with_ues().to_toml_string().unwrap() + "\nbogus = 3\n";
        assert!(ScenarioConfig::from_toml_str(&text).is_err());
    }

    #[test]
    fn trial_streams_are_independent_and_reproducible() {
        let c = with_ues();
        let draw = |k, t| {
            let mut rng = c.trial_rng(k, t);
            c.sample_ue(&mut rng)
        };
        assert_eq!(draw(10, 3), draw(10, 3));
        assert_ne!(draw(10, 3), draw(10, 4));
        assert_ne!(draw(10, 3), draw(11, 3));
        let ue = draw(5, 0);
        assert!(c.area.contains(ue.position.x, ue.position.y));
        assert!((10.0..=20.0).contains(&ue.position.h));
    }

    #[test]
    fn epsilon_resolution() {
        let s = with_ues().build().unwrap();
        assert_eq!(s.epsilon(1).unwrap(), 1e-3);
        let a = alpha_coefficients(&s.ues[0].position, &s.bs, &s.params).unwrap();
        let (lo, hi) = a.epsilon_interval().unwrap();
        let e = s.epsilon(0).unwrap();
        assert!(e > lo && e < hi);
    }
}
