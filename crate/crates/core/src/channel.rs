//! Air-to-ground probabilistic line-of-sight and ground-to-ground Rayleigh
//! channel models.
//!
//! Powers are in watts, bandwidths in hertz and gains are linear. Decibel
//! quantities only appear in the constructors that accept configuration
//! values.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{check_domain, Result};
use crate::geometry::{elevation_angle_deg, Point3};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Propagation environment shared by every link in a scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioEnvironment {
    /// Sigmoid offset/scale of the LoS probability (`a` in the parameter table).
    pub e1: f64,
    /// Sigmoid steepness (`b` in the parameter table).
    pub e2: f64,
    /// Extra attenuation of NLoS air-to-ground links, in `(0, 1]`.
    pub kappa: f64,
    /// Air-to-ground path-loss exponent.
    pub alpha: f64,
    /// Ground-to-ground path-loss exponent.
    pub beta: f64,
    pub fc_hz: f64,
    /// Free-space loss at 1 m, `(4 pi fc / c)^2`.
    pub gamma0: f64,
    /// Noise power spectral density, W/Hz.
    pub n0: f64,
    pub outage_eps: f64,
    /// Fading power quantile `F^-1(outage_eps)`.
    pub f_inv: f64,
}

impl RadioEnvironment {
    /// Builds an environment from configuration units. `f_inv` defaults to
    /// the unit-mean exponential quantile of `outage_eps`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        e1: f64,
        e2: f64,
        kappa: f64,
        alpha: f64,
        beta: f64,
        fc_hz: f64,
        n0_dbm_per_hz: f64,
        outage_eps: f64,
        f_inv: Option<f64>,
    ) -> Result<Self> {
        check_domain("e1", e1, e1 > 0.0, "> 0")?;
        check_domain("e2", e2, e2 > 0.0, "> 0")?;
        check_domain("kappa", kappa, kappa > 0.0 && kappa <= 1.0, "(0, 1]")?;
        check_domain("alpha", alpha, alpha >= 2.0, ">= 2")?;
        check_domain("beta", beta, beta > 0.0, "> 0")?;
        check_domain("fc_hz", fc_hz, fc_hz > 0.0, "> 0")?;
        check_domain("n0_dbm_per_hz", n0_dbm_per_hz, true, "finite")?;
        let f_inv = match f_inv {
            Some(v) => {
                check_domain("f_inv", v, v > 0.0, "> 0")?;
                v
            }
            None => rayleigh_power_quantile(outage_eps)?,
        };
        check_domain("outage_eps", outage_eps, outage_eps > 0.0 && outage_eps < 1.0, "(0, 1)")?;
        Ok(Self {
            e1,
            e2,
            kappa,
            alpha,
            beta,
            fc_hz,
            gamma0: free_space_gain_at_1m(fc_hz),
            n0: dbm_to_watts(n0_dbm_per_hz),
            outage_eps,
            f_inv,
        })
    }

    /// Urban setting at 2.1 GHz used by the deployment experiments.
    pub fn reference() -> Self {
        Self::new(15.0, 0.5, 0.2, 2.0, 2.2, 2.1e9, -174.0, 0.1, None)
            .expect("built-in parameters are valid")
    }
}

/// Transmit power and bandwidth of one link role.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    pub bandwidth_hz: f64,
}

impl LinkBudget {
    pub fn new(tx_power_w: f64, bandwidth_hz: f64) -> Result<Self> {
        check_domain("tx_power_w", tx_power_w, tx_power_w > 0.0, "> 0")?;
        check_domain("bandwidth_hz", bandwidth_hz, bandwidth_hz > 0.0, "> 0")?;
        Ok(Self {
            tx_power_w,
            bandwidth_hz,
        })
    }

    /// Noise power `W * N0` over this link's bandwidth.
    pub fn noise_power(&self, env: &RadioEnvironment) -> f64 {
        self.bandwidth_hz * env.n0
    }

    /// SNR-equivalent factor `2^(R/W) - 1` for a target rate.
    pub fn snr_for_rate(&self, rate_bps: f64) -> f64 {
        (rate_bps / self.bandwidth_hz * std::f64::consts::LN_2).exp_m1()
    }
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) / 1000.0
}

pub fn free_space_gain_at_1m(fc_hz: f64) -> f64 {
    (4.0 * PI * fc_hz / SPEED_OF_LIGHT).powi(2)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// LoS probability of an air-to-ground link at elevation `theta_deg`.
pub fn los_probability(theta_deg: f64, env: &RadioEnvironment) -> Result<f64> {
    check_domain(
        "theta_deg",
        theta_deg,
        (0.0..=90.0).contains(&theta_deg),
        "[0, 90] degrees",
    )?;
    Ok(1.0 / (1.0 + env.e1 * (-env.e2 * (theta_deg - env.e1)).exp()))
}

/// LoS/NLoS mixture `P(LoS) + (1 - P(LoS)) kappa` at elevation `theta_deg`.
pub fn effective_los(theta_deg: f64, env: &RadioEnvironment) -> Result<f64> {
    let p = los_probability(theta_deg, env)?;
    Ok(p + (1.0 - p) * env.kappa)
}

/// Expected air-to-ground power gain.
pub fn g2a_gain(uav: &Point3, ue: &Point3, env: &RadioEnvironment) -> Result<f64> {
    let theta = elevation_angle_deg(ue, uav)?;
    let d = ue.distance(uav);
    Ok(effective_los(theta, env)? / (env.gamma0 * d.powf(env.alpha)))
}

/// Ground-to-ground power gain at the outage quantile.
pub fn g2g_gain(bs: &Point3, ue: &Point3, env: &RadioEnvironment) -> Result<f64> {
    let d = bs.distance(ue);
    if !(d > 0.0) {
        return Err(crate::Error::DegenerateGeometry("BS and UE coincide"));
    }
    Ok(env.f_inv / (env.gamma0 * d.powf(env.beta)))
}

/// Shannon rate for a given linear gain.
pub fn rate_from_gain(gain: f64, budget: &LinkBudget, env: &RadioEnvironment) -> f64 {
    budget.bandwidth_hz * (budget.tx_power_w * gain / budget.noise_power(env)).ln_1p()
        / std::f64::consts::LN_2
}

/// Uplink rate from a UE to a UAV.
pub fn g2a_rate(
    uav: &Point3,
    ue: &Point3,
    budget: &LinkBudget,
    env: &RadioEnvironment,
) -> Result<f64> {
    Ok(rate_from_gain(g2a_gain(uav, ue, env)?, budget, env))
}

/// Outage-guaranteed uplink rate from a UE to a terrestrial BS.
pub fn g2g_rate(
    bs: &Point3,
    ue: &Point3,
    budget: &LinkBudget,
    env: &RadioEnvironment,
) -> Result<f64> {
    Ok(rate_from_gain(g2g_gain(bs, ue, env)?, budget, env))
}

/// Quantile of a unit-mean exponential fading power: `-ln(1 - eps)`.
pub fn rayleigh_power_quantile(outage_eps: f64) -> Result<f64> {
    check_domain(
        "outage_eps",
        outage_eps,
        outage_eps > 0.0 && outage_eps < 1.0,
        "(0, 1)",
    )?;
    Ok(-(-outage_eps).ln_1p())
}
