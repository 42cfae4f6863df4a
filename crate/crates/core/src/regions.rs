//! Closed-form feasible UAV hovering regions for one UE.
//!
//! Localization: with three fixed BSs, `det(H)` is affine in the UAV's unit
//! direction `q_u`, `det(H) = alpha . q_u - c2`, so `opt_d1 >= eps` is a pair
//! of circular cones around `alpha`. At a fixed altitude the admissible cone
//! cuts an ellipse. Communication: a conservative elevation angle makes the
//! air-to-ground rate constraint a horizontal disk.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::channel::{effective_los, LinkBudget, RadioEnvironment};
use crate::error::{check_domain, Error, Result};
use crate::geometry::{unit_vector, wrap_half_turn, Conic2D, EllipseParams, Point3, MIN_SEMI_AXIS};
use crate::localization::{det_r_closed_form, toa_variance_g2g, SystemParams};

/// Relative inward nudge applied to the admissible `sqrt(D1 eps)` interval.
pub const INTERVAL_NUDGE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    /// `det(H) >= 0` branch.
    Case1,
    /// `det(H) < 0` branch.
    Case2,
}

impl CaseTag {
    fn sign(self) -> f64 {
        match self {
            CaseTag::Case1 => 1.0,
            CaseTag::Case2 => -1.0,
        }
    }

    pub fn other(self) -> CaseTag {
        match self {
            CaseTag::Case1 => CaseTag::Case2,
            CaseTag::Case2 => CaseTag::Case1,
        }
    }
}

/// Cone coefficients of one UE with respect to the three BSs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaCoefficients {
    /// `(q2 - q1) x (q3 - q1)`.
    pub alpha: [f64; 3],
    /// Unit vector from the UE toward BS 1.
    pub q1: [f64; 3],
    /// `|alpha|`.
    pub c1: f64,
    /// `alpha . q1`.
    pub c2: f64,
    /// Horizontal norm of `alpha`.
    pub c3: f64,
    /// UAV-independent part of `det(c² R_TDoA)`, m⁶.
    pub d1: f64,
}

impl AlphaCoefficients {
    /// `det(H)` for a UAV whose direction from the UE is `q_u`.
    pub fn det_h(&self, q_u: &[f64; 3]) -> f64 {
        let a = &self.alpha;
        a[0] * (q_u[0] - self.q1[0]) + a[1] * (q_u[1] - self.q1[1]) + a[2] * (q_u[2] - self.q1[2])
    }

    /// Branch whose cone yields the bounded region: the `det(H) >= 0` cone
    /// when `c2 >= 0`, the other one otherwise.
    pub fn corollary_case(&self) -> CaseTag {
        if self.c2 >= 0.0 {
            CaseTag::Case1
        } else {
            CaseTag::Case2
        }
    }

    /// Largest threshold the given branch can meet for any UAV direction.
    pub fn eps_max(&self, case: CaseTag) -> f64 {
        (self.c1 - case.sign() * self.c2).powi(2) / self.d1
    }

    /// Signed cone offset `±sqrt(D1 eps) + c2` of the given branch.
    pub fn tilde_eps(&self, case: CaseTag, epsilon: f64) -> f64 {
        case.sign() * (self.d1 * epsilon).sqrt() + self.c2
    }

    /// Admissible interval of `sqrt(D1 eps)` for a single bounded ellipse:
    /// the cone must cut the horizontal plane in an ellipse of its own
    /// branch only, and the cone must be non-empty.
    pub fn sqrt_interval(&self) -> Option<(f64, f64)> {
        let ac2 = self.c2.abs();
        let lo = (self.c3 - ac2).abs();
        let hi = (self.c3 + ac2).min(self.c1 - ac2);
        let pad = INTERVAL_NUDGE * hi.abs().max(f64::MIN_POSITIVE);
        let (lo, hi) = (lo + pad, hi - pad);
        (hi > lo && self.d1 > 0.0).then_some((lo, hi))
    }

    /// The same interval in threshold units.
    pub fn epsilon_interval(&self) -> Option<(f64, f64)> {
        self.sqrt_interval()
            .map(|(lo, hi)| (lo * lo / self.d1, hi * hi / self.d1))
    }
}

/// Cone direction coefficients without the noise factor.
fn alpha_geometry(ue: &Point3, bs: &[Point3; 3]) -> Result<([f64; 3], [f64; 3])> {
    let q1 = unit_vector(ue, &bs[0])?.to_array();
    let q2 = unit_vector(ue, &bs[1])?.to_array();
    let q3 = unit_vector(ue, &bs[2])?.to_array();
    let u = [q2[0] - q1[0], q2[1] - q1[1], q2[2] - q1[2]];
    let v = [q3[0] - q1[0], q3[1] - q1[1], q3[2] - q1[2]];
    let alpha = [
        u[1] * v[2] - u[2] * v[1],
        u[2] * v[0] - u[0] * v[2],
        u[0] * v[1] - u[1] * v[0],
    ];
    Ok((alpha, q1))
}

pub fn alpha_coefficients(
    ue: &Point3,
    bs: &[Point3; 3],
    p: &SystemParams,
) -> Result<AlphaCoefficients> {
    let (alpha, q1) = alpha_geometry(ue, bs)?;
    let mut sigma = [0.0; 4];
    for (s, b) in sigma.iter_mut().zip(bs) {
        *s = toa_variance_g2g(b, ue, &p.bs, &p.env, &p.noise)?;
    }
    // The UAV term does not enter D1; any positive placeholder works.
    sigma[3] = 1.0;
    let d1 = det_r_closed_form(sigma)?.d1;
    let c1 = (alpha[0] * alpha[0] + alpha[1] * alpha[1] + alpha[2] * alpha[2]).sqrt();
    Ok(AlphaCoefficients {
        alpha,
        q1,
        c1,
        c2: alpha[0] * q1[0] + alpha[1] * q1[1] + alpha[2] * q1[2],
        c3: alpha[0].hypot(alpha[1]),
        d1,
    })
}

/// `det(H)` evaluated through the cone coefficients.
pub fn det_h_via_alphas(ue: &Point3, bs: &[Point3; 3], uav: &Point3) -> Result<f64> {
    let (alpha, q1) = alpha_geometry(ue, bs)?;
    let qu = unit_vector(ue, uav)?.to_array();
    Ok((0..3).map(|i| alpha[i] * (qu[i] - q1[i])).sum())
}

/// Largest feasible threshold on the given `det(H)` branch.
pub fn feasibility_range(
    ue: &Point3,
    bs: &[Point3; 3],
    p: &SystemParams,
    case: CaseTag,
) -> Result<f64> {
    Ok(alpha_coefficients(ue, bs, p)?.eps_max(case))
}

/// Threshold at `fraction` of the admissible `sqrt(D1 eps)` interval, so that
/// exactly one branch's fixed-altitude section is a bounded ellipse.
pub fn choose_epsilon(
    ue: &Point3,
    bs: &[Point3; 3],
    p: &SystemParams,
    fraction: f64,
) -> Result<f64> {
    check_domain("fraction", fraction, (0.0..=1.0).contains(&fraction), "[0, 1]")?;
    let a = alpha_coefficients(ue, bs, p)?;
    epsilon_at_fraction(&a, fraction)
}

pub fn epsilon_at_fraction(a: &AlphaCoefficients, fraction: f64) -> Result<f64> {
    let (lo, hi) = a
        .sqrt_interval()
        .ok_or(Error::DegenerateGeometry("empty admissible threshold interval"))?;
    let s = lo + fraction * (hi - lo);
    Ok(s * s / a.d1)
}

/// Planar section at relative altitude `h_r` of the squared cone
/// `(alpha . v)^2 = tilde_eps^2 |v|^2`, in coordinates relative to the UE.
pub fn cone_section_conic(alpha: &[f64; 3], tilde_eps: f64, h_r: f64) -> Conic2D {
    let t2 = tilde_eps * tilde_eps;
    let [a1, a2, a3] = *alpha;
    Conic2D::new(
        a1 * a1 / t2 - 1.0,
        2.0 * a1 * a2 / t2,
        a2 * a2 / t2 - 1.0,
        2.0 * a1 * a3 * h_r / t2,
        2.0 * a2 * a3 * h_r / t2,
        (a3 * a3 / t2 - 1.0) * h_r * h_r,
    )
}

/// The localization requirement `opt_d1 >= eps` of one UE, valid for any
/// threshold up to the branch maximum whether or not its section is an
/// ellipse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalizationConstraint {
    pub ue_index: usize,
    pub ue: Point3,
    pub alphas: AlphaCoefficients,
    pub epsilon: f64,
}

impl LocalizationConstraint {
    pub fn contains(&self, p: &Point3) -> bool {
        match unit_vector(&self.ue, p) {
            Ok(q) => {
                let det = self.alphas.det_h(&q.to_array());
                det * det >= self.alphas.d1 * self.epsilon
            }
            Err(_) => false,
        }
    }
}

/// Localization-feasible hovering region of one UE at a fixed altitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalizationRegion {
    pub ue_index: usize,
    pub ue: Point3,
    pub case_tag: CaseTag,
    pub tilde_eps: f64,
    pub altitude: f64,
    pub h_r: f64,
    pub ellipse: EllipseParams,
    pub alphas: AlphaCoefficients,
    pub epsilon: f64,
}

impl LocalizationRegion {
    pub fn constraint(&self) -> LocalizationConstraint {
        LocalizationConstraint {
            ue_index: self.ue_index,
            ue: self.ue,
            alphas: self.alphas,
            epsilon: self.epsilon,
        }
    }

    /// `opt_d1 >= eps` evaluated directly at `p`.
    pub fn contains(&self, p: &Point3) -> bool {
        self.constraint().contains(p)
    }

    /// Conic of the selected branch in absolute coordinates.
    pub fn conic(&self) -> Conic2D {
        translate(
            &cone_section_conic(&self.alphas.alpha, self.tilde_eps, self.h_r),
            self.ue.x,
            self.ue.y,
        )
    }

    /// Conic of the opposite branch at the same threshold.
    pub fn other_conic(&self) -> Conic2D {
        let t = self.alphas.tilde_eps(self.case_tag.other(), self.epsilon);
        translate(&cone_section_conic(&self.alphas.alpha, t, self.h_r), self.ue.x, self.ue.y)
    }

    /// Residual of the cone equality `|alpha . q| = |tilde_eps|`, relative to `c1`.
    pub fn cone_residual(&self, p: &Point3) -> f64 {
        let q = unit_vector(&self.ue, p).map(|q| q.to_array()).unwrap_or([0.0; 3]);
        let a = &self.alphas.alpha;
        let dot = a[0] * q[0] + a[1] * q[1] + a[2] * q[2];
        (dot.abs() - self.tilde_eps.abs()).abs() / self.alphas.c1
    }
}

/// Conic in `(x - dx, y - dy)` rewritten in `(x, y)`.
fn translate(c: &Conic2D, dx: f64, dy: f64) -> Conic2D {
    Conic2D::new(
        c.A,
        c.B,
        c.C,
        c.D - 2.0 * c.A * dx - c.B * dy,
        c.E - c.B * dx - 2.0 * c.C * dy,
        c.A * dx * dx + c.B * dx * dy + c.C * dy * dy - c.D * dx - c.E * dy + c.F,
    )
}

/// Builds the fixed-altitude ellipse for a UE and threshold.
pub fn localization_region(
    ue_index: usize,
    ue: &Point3,
    bs: &[Point3; 3],
    p: &SystemParams,
    epsilon: f64,
    altitude: f64,
) -> Result<LocalizationRegion> {
    let alphas = alpha_coefficients(ue, bs, p)?;
    region_from_alphas(ue_index, ue, alphas, epsilon, altitude)
}

pub fn region_from_alphas(
    ue_index: usize,
    ue: &Point3,
    alphas: AlphaCoefficients,
    epsilon: f64,
    altitude: f64,
) -> Result<LocalizationRegion> {
    let h_r = altitude - ue.h;
    check_domain("relative altitude", h_r, h_r > 0.0, "> 0")?;
    let case_tag = alphas.corollary_case();
    let eps_max = alphas.eps_max(case_tag);
    let eps_min = (alphas.c3 - alphas.c2.abs()).powi(2) / alphas.d1;
    let invalid = Error::InvalidThreshold {
        epsilon,
        lo: eps_min,
        hi: eps_max,
    };
    if !(epsilon >= 0.0) || epsilon > eps_max {
        return Err(invalid);
    }
    let tilde_eps = alphas.tilde_eps(case_tag, epsilon);
    let t2 = tilde_eps * tilde_eps;
    let den = t2 - alphas.c3 * alphas.c3;
    if !(den > 0.0) {
        return Err(invalid);
    }
    let spread = (alphas.c1 * alphas.c1 - t2).max(0.0).sqrt();
    let [a1, a2, a3] = alphas.alpha;
    let semi_major = h_r * tilde_eps.abs() * spread / den;
    let semi_minor = h_r * spread / den.sqrt();
    if !(semi_minor >= MIN_SEMI_AXIS) {
        return Err(Error::InvalidConic("degenerate ellipse"));
    }
    let rotation = if alphas.c3 > 0.0 {
        wrap_half_turn(a2.atan2(a1))
    } else {
        0.0
    };
    Ok(LocalizationRegion {
        ue_index,
        ue: *ue,
        case_tag,
        tilde_eps,
        altitude,
        h_r,
        ellipse: EllipseParams {
            center: (ue.x + a1 * a3 * h_r / den, ue.y + a2 * a3 * h_r / den),
            rotation,
            semi_major,
            semi_minor,
        },
        alphas,
        epsilon,
    })
}

pub fn in_localization_region(region: &LocalizationRegion, p: &Point3) -> bool {
    region.contains(p)
}

/// `W N0 gamma0 (2^(R/W) - 1) / P`: inverse of the distance-power budget.
fn rate_cost(budget: &LinkBudget, env: &RadioEnvironment, rate_bps: f64) -> f64 {
    budget.noise_power(env) * env.gamma0 * budget.snr_for_rate(rate_bps) / budget.tx_power_w
}

/// Conservative elevation angle (degrees) below which no feasible placement
/// can lie.
pub fn hat_theta(
    ue: &Point3,
    budget: &LinkBudget,
    env: &RadioEnvironment,
    altitude: f64,
    rate_bps: f64,
) -> Result<f64> {
    check_domain("rate_bps", rate_bps, rate_bps >= 0.0, ">= 0")?;
    let arg = (altitude - ue.h).abs() * rate_cost(budget, env, rate_bps).powf(1.0 / env.alpha);
    if !(arg <= 1.0) {
        return Err(Error::CommInfeasible { rate_bps, altitude });
    }
    Ok(arg.asin() * 180.0 / PI)
}

/// Horizontal disk of UAV positions meeting a UE's uplink rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommRegion {
    pub ue_index: usize,
    pub center: (f64, f64),
    pub radius: f64,
    pub altitude: f64,
    /// Bound on the 3D UE-UAV distance.
    pub d_max: f64,
}

impl CommRegion {
    pub fn contains(&self, p: &Point3) -> bool {
        (p.x - self.center.0).hypot(p.y - self.center.1) <= self.radius
    }
}

pub fn comm_region_uav(
    ue_index: usize,
    ue: &Point3,
    budget: &LinkBudget,
    env: &RadioEnvironment,
    altitude: f64,
    rate_bps: f64,
) -> Result<CommRegion> {
    let theta = hat_theta(ue, budget, env, altitude, rate_bps)?;
    let d_max = (effective_los(theta, env)? / rate_cost(budget, env, rate_bps)).powf(1.0 / env.alpha);
    let dh = (altitude - ue.h).abs();
    if d_max < dh {
        return Err(Error::CommInfeasible { rate_bps, altitude });
    }
    Ok(CommRegion {
        ue_index,
        center: (ue.x, ue.y),
        radius: (d_max * d_max - dh * dh).sqrt(),
        altitude,
        d_max,
    })
}

/// Largest BS-UE distance that still supports `rate_bps`.
pub fn bs_coverage_radius(budget: &LinkBudget, env: &RadioEnvironment, rate_bps: f64) -> f64 {
    (env.f_inv / rate_cost(budget, env, rate_bps)).powf(1.0 / env.beta)
}

pub fn bs_covers(
    ue: &Point3,
    bs: &Point3,
    budget: &LinkBudget,
    env: &RadioEnvironment,
    rate_bps: f64,
) -> bool {
    bs.distance(ue) <= bs_coverage_radius(budget, env, rate_bps)
}
