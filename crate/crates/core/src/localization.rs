//! ToA/TDoA measurement statistics, Fisher information, the Cramer-Rao bound
//! and the D-optimality criterion with its two determinant approximations.
//!
//! BS 1 is the TDoA reference. Covariances are carried in s² and converted to
//! m² with `c²` before entering the Fisher information, so `H` is the
//! dimensionless matrix of direction-cosine differences.

use std::f64::consts::PI;

use nalgebra::{Matrix3, RowVector3};
use serde::{Deserialize, Serialize};

use crate::channel::{g2a_gain, g2g_gain, LinkBudget, RadioEnvironment, SPEED_OF_LIGHT};
use crate::error::{check_domain, Error, Result};
use crate::geometry::{unit_vector, Point3};

/// One NPRS-bearing subcarrier: signed index and relative power weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Subcarrier {
    pub index: i32,
    pub weight: f64,
}

/// Positioning reference signal layout within a localization period.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NprsConfig {
    pub symbol_duration_s: f64,
    pub subframes: u32,
    /// Subcarriers carrying the reference signal, per symbol.
    pub symbols: Vec<Vec<Subcarrier>>,
}

impl Default for NprsConfig {
    /// 4 symbols per subframe, subcarriers -6..-1 and 1..6 at full weight,
    /// 66.7 us symbols over 160 subframes.
    fn default() -> Self {
        let carriers: Vec<Subcarrier> = (-6..=6)
            .filter(|&i| i != 0)
            .map(|index| Subcarrier { index, weight: 1.0 })
            .collect();
        Self {
            symbol_duration_s: 1.0 / 1.5e4,
            subframes: 160,
            symbols: vec![carriers; 4],
        }
    }
}

/// ToA variance scale `psi` such that `var = psi / SNR`.
pub fn nprs_psi(cfg: &NprsConfig) -> Result<f64> {
    check_domain(
        "symbol_duration_s",
        cfg.symbol_duration_s,
        cfg.symbol_duration_s > 0.0,
        "> 0",
    )?;
    if cfg.subframes == 0 {
        return Err(Error::Config("NPRS subframe count must be at least 1".into()));
    }
    let mut energy = 0.0;
    for sc in cfg.symbols.iter().flatten() {
        check_domain("subcarrier weight", sc.weight, (0.0..=1.0).contains(&sc.weight), "[0, 1]")?;
        energy += (sc.weight * sc.index as f64).powi(2);
    }
    if !(energy > 0.0) {
        return Err(Error::Config(
            "NPRS layout has no weighted non-DC subcarrier".into(),
        ));
    }
    Ok(cfg.symbol_duration_s.powi(2) / (cfg.subframes as f64 * 8.0 * PI * PI * energy))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToaNoiseModel {
    pub psi: f64,
    /// Residual NLoS error variance on ground-to-ground ToA, s².
    pub sigma_nlos_sq: f64,
}

impl ToaNoiseModel {
    pub fn new(psi: f64, sigma_nlos_sq: f64) -> Result<Self> {
        check_domain("psi", psi, psi > 0.0, "> 0")?;
        check_domain("sigma_nlos_sq", sigma_nlos_sq, sigma_nlos_sq >= 0.0, ">= 0")?;
        Ok(Self { psi, sigma_nlos_sq })
    }
}

/// Everything the per-link formulas need besides positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub env: RadioEnvironment,
    /// BS downlink NPRS transmission.
    pub bs: LinkBudget,
    /// UAV downlink NPRS transmission.
    pub uav: LinkBudget,
    /// UE uplink data transmission.
    pub ue: LinkBudget,
    pub noise: ToaNoiseModel,
}

impl SystemParams {
    pub fn reference(sigma_nlos_sq: f64) -> Self {
        let psi = nprs_psi(&NprsConfig::default()).expect("default layout is valid");
        Self {
            env: RadioEnvironment::reference(),
            bs: LinkBudget::new(1.0, 180e3).unwrap(),
            uav: LinkBudget::new(1.0, 180e3).unwrap(),
            ue: LinkBudget::new(0.01, 180e3).unwrap(),
            noise: ToaNoiseModel::new(psi, sigma_nlos_sq).unwrap(),
        }
    }

    pub fn snr_uav(&self, uav: &Point3, ue: &Point3) -> Result<f64> {
        Ok(g2a_gain(uav, ue, &self.env)? * self.uav.tx_power_w / self.uav.noise_power(&self.env))
    }

    pub fn snr_bs(&self, bs: &Point3, ue: &Point3) -> Result<f64> {
        Ok(g2g_gain(bs, ue, &self.env)? * self.bs.tx_power_w / self.bs.noise_power(&self.env))
    }
}

/// ToA variance (s²) of the UAV anchor's signal at the UE.
pub fn toa_variance_g2a(
    uav: &Point3,
    ue: &Point3,
    budget: &LinkBudget,
    env: &RadioEnvironment,
    noise: &ToaNoiseModel,
) -> Result<f64> {
    let g = g2a_gain(uav, ue, env)?;
    Ok(noise.psi * budget.noise_power(env) / (g * budget.tx_power_w))
}

/// ToA variance (s²) of a terrestrial BS's signal at the UE, including the
/// NLoS residual.
pub fn toa_variance_g2g(
    bs: &Point3,
    ue: &Point3,
    budget: &LinkBudget,
    env: &RadioEnvironment,
    noise: &ToaNoiseModel,
) -> Result<f64> {
    let g = g2g_gain(bs, ue, env)?;
    Ok(noise.psi * budget.noise_power(env) / (g * budget.tx_power_w) + noise.sigma_nlos_sq)
}

/// ToA variances `[s1, s2, s3, su]` for the three BSs and the UAV.
pub fn anchor_variances(
    ue: &Point3,
    bs: &[Point3; 3],
    uav: &Point3,
    p: &SystemParams,
) -> Result<[f64; 4]> {
    Ok([
        toa_variance_g2g(&bs[0], ue, &p.bs, &p.env, &p.noise)?,
        toa_variance_g2g(&bs[1], ue, &p.bs, &p.env, &p.noise)?,
        toa_variance_g2g(&bs[2], ue, &p.bs, &p.env, &p.noise)?,
        toa_variance_g2a(uav, ue, &p.uav, &p.env, &p.noise)?,
    ])
}

/// TDoA covariance in s² with BS 1 as reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdoaCovariance(pub Matrix3<f64>);

impl TdoaCovariance {
    /// Range-difference covariance in m².
    pub fn to_meters(&self) -> Matrix3<f64> {
        self.0 * (SPEED_OF_LIGHT * SPEED_OF_LIGHT)
    }
}

pub fn tdoa_covariance(sigma_sq: [f64; 4]) -> Result<TdoaCovariance> {
    for s in sigma_sq {
        check_domain("ToA variance", s, s > 0.0, "> 0")?;
    }
    let [s1, s2, s3, su] = sigma_sq;
    Ok(TdoaCovariance(Matrix3::new(
        s1 + s2,
        s1,
        s1,
        s1,
        s1 + s3,
        s1,
        s1,
        s1,
        s1 + su,
    )))
}

/// TDoA Jacobian with rows `q2 - q1`, `q3 - q1`, `qu - q1`, where `qn` is the
/// unit vector from the UE toward anchor `n`.
///
/// Each row is the gradient of `|b1 - m| - |bn - m|` with respect to `m`.
pub fn jacobian_h(ue: &Point3, bs: &[Point3; 3], uav: &Point3) -> Result<Matrix3<f64>> {
    let q1 = unit_vector(ue, &bs[0])?.to_array();
    let row = |anchor: &Point3| -> Result<RowVector3<f64>> {
        let q = unit_vector(ue, anchor)?.to_array();
        Ok(RowVector3::new(q[0] - q1[0], q[1] - q1[1], q[2] - q1[2]))
    };
    Ok(Matrix3::from_rows(&[row(&bs[1])?, row(&bs[2])?, row(uav)?]))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FisherInfo {
    pub matrix: Matrix3<f64>,
    pub det_h: f64,
    pub det_r: f64,
}

impl FisherInfo {
    pub fn det(&self) -> f64 {
        self.matrix.determinant()
    }
}

/// Fisher information `H^T R^-1 H` for a range-difference covariance in m².
pub fn fim(h: &Matrix3<f64>, r_m2: &Matrix3<f64>) -> Result<FisherInfo> {
    let r_inv = r_m2
        .try_inverse()
        .ok_or(Error::Singular("range-difference covariance"))?;
    let f = h.transpose() * r_inv * h;
    Ok(FisherInfo {
        matrix: 0.5 * (f + f.transpose()),
        det_h: h.determinant(),
        det_r: r_m2.determinant(),
    })
}

/// Variance split of the Cramer-Rao bound, m².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crlb {
    pub horizontal: f64,
    pub vertical: f64,
    pub total: f64,
}

/// Cramer-Rao bound from the Fisher information, or `None` when the
/// information matrix is singular (no 3D observability).
pub fn crlb(f: &FisherInfo) -> Option<Crlb> {
    let m = &f.matrix;
    let scale = m.norm();
    if !(scale > 0.0) || m.determinant().abs() <= 1e-12 * scale.powi(3) {
        return None;
    }
    let inv = m.try_inverse()?;
    let (horizontal, vertical) = (inv[(0, 0)] + inv[(1, 1)], inv[(2, 2)]);
    if !(horizontal > 0.0 && vertical > 0.0) {
        return None;
    }
    Some(Crlb {
        horizontal,
        vertical,
        total: horizontal + vertical,
    })
}

/// Cramer-Rao bound for a UE served by three BSs and one extra anchor whose
/// ToA variance is given explicitly.
pub fn crlb_with_anchor(
    ue: &Point3,
    bs: &[Point3; 3],
    anchor: &Point3,
    sigma_sq: [f64; 4],
) -> Result<Option<Crlb>> {
    let h = jacobian_h(ue, bs, anchor)?;
    let r = tdoa_covariance(sigma_sq)?.to_meters();
    Ok(crlb(&fim(&h, &r)?))
}

/// `det(c² R_TDoA)` split into its UAV-independent part `d1` and the factor
/// `d2` multiplying the UAV's ToA variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetDecomposition {
    pub det: f64,
    pub d1: f64,
    pub d2: f64,
}

pub fn det_r_closed_form(sigma_sq: [f64; 4]) -> Result<DetDecomposition> {
    for s in sigma_sq {
        check_domain("ToA variance", s, s > 0.0, "> 0")?;
    }
    let [s1, s2, s3, su] = sigma_sq;
    let c6 = SPEED_OF_LIGHT.powi(6);
    let d1 = c6 * s1 * s2 * s3;
    let d2 = c6 * (s1 * s3 + s1 * s2 + s2 * s3);
    Ok(DetDecomposition {
        det: d1 + d2 * su,
        d1,
        d2,
    })
}

/// D-optimality value `det(H)^2 / det(R)` of a UE with a UAV as fourth
/// anchor. Larger is better.
pub fn opt_d(ue: &Point3, bs: &[Point3; 3], uav: &Point3, p: &SystemParams) -> Result<f64> {
    let det_h = jacobian_h(ue, bs, uav)?.determinant();
    let dec = det_r_closed_form(anchor_variances(ue, bs, uav, p)?)?;
    Ok(det_h * det_h / dec.det)
}

/// `det(H)^2 / D1`: drops the UAV's ToA noise from `det(R)`.
pub fn opt_d1(ue: &Point3, bs: &[Point3; 3], uav: &Point3, p: &SystemParams) -> Result<f64> {
    let det_h = jacobian_h(ue, bs, uav)?.determinant();
    let dec = det_r_closed_form(anchor_variances(ue, bs, uav, p)?)?;
    Ok(det_h * det_h / dec.d1)
}

/// `det(H)^2 / (D2 * psi / SNR_u)`: keeps only the UAV-dependent term.
pub fn opt_d2(ue: &Point3, bs: &[Point3; 3], uav: &Point3, p: &SystemParams) -> Result<f64> {
    let det_h = jacobian_h(ue, bs, uav)?.determinant();
    let v = anchor_variances(ue, bs, uav, p)?;
    let dec = det_r_closed_form(v)?;
    Ok(det_h * det_h / (dec.d2 * v[3]))
}

/// Sufficient condition under which `opt_d1` tracks `opt_d`:
/// `SNR_u / SNR_n >= margin * (3 - sigma_nlos² SNR_u / psi)` for every BS.
pub fn d1_approximation_holds(
    ue: &Point3,
    bs: &[Point3; 3],
    uav: &Point3,
    p: &SystemParams,
    margin: f64,
) -> bool {
    let Ok(snr_u) = p.snr_uav(uav, ue) else {
        return false;
    };
    let rhs = margin * (3.0 - p.noise.sigma_nlos_sq * snr_u / p.noise.psi);
    bs.iter().all(|b| match p.snr_bs(b, ue) {
        Ok(snr_n) => snr_u / snr_n >= rhs,
        Err(_) => false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    const C: f64 = SPEED_OF_LIGHT;

    fn reference_bs() -> [Point3; 3] {
        [
            Point3::new(100.0, 100.0, 30.0),
            Point3::new(250.0, 433.0, 30.0),
            Point3::new(500.0, 250.0, 30.0),
        ]
    }

    #[test]
    fn psi_examples() {
        let single = NprsConfig {
            symbol_duration_s: 1e-4,
            subframes: 1,
            symbols: vec![vec![Subcarrier { index: 1, weight: 1.0 }]],
        };
        assert_relative_eq!(nprs_psi(&single).unwrap(), 1e-8 / (8.0 * PI * PI), max_relative = 1e-15);
        let doubled = NprsConfig {
            subframes: 2,
            ..single.clone()
        };
        assert_relative_eq!(nprs_psi(&doubled).unwrap(), nprs_psi(&single).unwrap() / 2.0);
        assert_relative_eq!(
            nprs_psi(&NprsConfig::default()).unwrap(),
            4.832_550_349_241_537e-16,
            max_relative = 1e-12
        );
        let dead = NprsConfig {
            symbols: vec![vec![Subcarrier { index: 3, weight: 0.0 }]],
            ..single
        };
        assert!(matches!(nprs_psi(&dead), Err(Error::Config(_))));
    }

    #[test]
    fn toa_variance_examples() {
        let p = SystemParams::reference(4e-17);
        let ue = Point3::new(100.0, 50.0, 10.0);
        let uav = Point3::new(100.0, 50.0, 110.0);
        let v = toa_variance_g2a(&uav, &ue, &p.uav, &p.env, &p.noise).unwrap();
        assert_relative_eq!(v, 2.683_278_830_268_930e-23, max_relative = 1e-10);

        let doubled = LinkBudget::new(2.0, 180e3).unwrap();
        assert_relative_eq!(
            toa_variance_g2a(&uav, &ue, &doubled, &p.env, &p.noise).unwrap(),
            v / 2.0,
            max_relative = 1e-14
        );

        let bs = Point3::new(0.0, 0.0, 0.0);
        let v = toa_variance_g2g(&bs, &Point3::new(300.0, 0.0, 0.0), &p.bs, &p.env, &p.noise)
            .unwrap();
        assert_relative_eq!(v, 4.000_717_223_774_645e-17, max_relative = 1e-10);
        assert!(v >= p.noise.sigma_nlos_sq);

        let clean = SystemParams::reference(0.0);
        let v = toa_variance_g2g(&bs, &Point3::new(1e-3, 0.0, 0.0), &clean.bs, &clean.env, &clean.noise)
            .unwrap();
        assert!(v < 1e-30);
    }

    #[test]
    fn covariance_template() {
        let r = tdoa_covariance([2.0; 4]).unwrap().0;
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(r[(i, j)], if i == j { 4.0 } else { 2.0 });
            }
        }
        let r = tdoa_covariance([1e-16, 2e-16, 3e-16, 4e-16]).unwrap().0;
        let expect = Matrix3::new(3e-16, 1e-16, 1e-16, 1e-16, 4e-16, 1e-16, 1e-16, 1e-16, 5e-16);
        assert_relative_eq!(r, expect, max_relative = 1e-15);
        // Reference variance vanishing decouples the differences.
        let r = tdoa_covariance([1e-300, 1.0, 2.0, 3.0]).unwrap().0;
        assert!(r[(0, 1)] < 1e-299 && r[(1, 1)] == 2.0);
        assert!(tdoa_covariance([0.0, 1.0, 1.0, 1.0]).is_err());
        assert!(tdoa_covariance([1.0, -1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn jacobian_degenerate_cases() {
        let bs = reference_bs();
        let ue = Point3::new(250.0, 135.0, 10.0);
        let h = jacobian_h(&ue, &bs, &bs[1]).unwrap();
        assert_eq!(h.row(2), h.row(0));
        assert_eq!(h.determinant(), 0.0);

        let flat = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(100.0, 0.0, 0.0),
            Point3::new(0.0, 100.0, 0.0),
        ];
        let h = jacobian_h(&Point3::new(30.0, 30.0, 0.0), &flat, &Point3::new(60.0, 70.0, 0.0))
            .unwrap();
        assert!(h.column(2).iter().all(|&v| v == 0.0));
        assert_eq!(h.determinant(), 0.0);
        assert!(jacobian_h(&bs[0], &bs, &Point3::new(0.0, 0.0, 100.0)).is_err());
    }

    /// Central difference of `|b1 - m| - |bn - m|`, step 1e-3 m.
    fn fd_jacobian(ue: &Point3, bs: &[Point3; 3], uav: &Point3) -> Matrix3<f64> {
        let anchors = [bs[1], bs[2], *uav];
        let step = 1e-3;
        Matrix3::from_fn(|r, c| {
            let f = |m: Point3| bs[0].distance(&m) - anchors[r].distance(&m);
            let mut plus = ue.to_array();
            let mut minus = ue.to_array();
            plus[c] += step;
            minus[c] -= step;
            (f(plus.into()) - f(minus.into())) / (2.0 * step)
        })
    }

    #[test]
    fn jacobian_matches_finite_differences_fixture() {
        let bs = reference_bs();
        let ue = Point3::new(250.0, 135.0, 10.0);
        let uav = Point3::new(250.0, 250.0, 200.0);
        let h = jacobian_h(&ue, &bs, &uav).unwrap();
        let fd = fd_jacobian(&ue, &bs, &uav);
        let scale = h.abs().max();
        for (a, b) in h.iter().zip(fd.iter()) {
            assert!((a - b).abs() <= 1e-5 * scale, "{a} vs {b}");
        }
    }

    /// Adjugate inverse, written out by hand.
    fn inverse_3x3(m: &Matrix3<f64>) -> Matrix3<f64> {
        let a = |r: usize, c: usize| m[(r, c)];
        let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        Matrix3::new(
            a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1),
            a(0, 2) * a(2, 1) - a(0, 1) * a(2, 2),
            a(0, 1) * a(1, 2) - a(0, 2) * a(1, 1),
            a(1, 2) * a(2, 0) - a(1, 0) * a(2, 2),
            a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0),
            a(0, 2) * a(1, 0) - a(0, 0) * a(1, 2),
            a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0),
            a(0, 1) * a(2, 0) - a(0, 0) * a(2, 1),
            a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0),
        ) / det
    }

    #[test]
    fn fim_examples() {
        let i = Matrix3::identity();
        assert_relative_eq!(fim(&i, &i).unwrap().matrix, i);
        let h = Matrix3::new(1.0, 0.2, 0.0, 0.3, 1.1, -0.4, 0.0, 0.5, 0.9);
        let r = Matrix3::new(3.0, 1.0, 1.0, 1.0, 4.0, 1.0, 1.0, 1.0, 5.0);
        let f = fim(&h, &r).unwrap().matrix;
        let f3 = fim(&h, &(r * 3.0)).unwrap().matrix;
        assert_relative_eq!(f3, f / 3.0, max_relative = 1e-14);

        let p = SystemParams::reference(4e-17);
        let bs = reference_bs();
        let ue = Point3::new(250.0, 135.0, 10.0);
        let uav = Point3::new(250.0, 250.0, 200.0);
        let h = jacobian_h(&ue, &bs, &uav).unwrap();
        let r = tdoa_covariance(anchor_variances(&ue, &bs, &uav, &p).unwrap())
            .unwrap()
            .to_meters();
        let oracle = h.transpose() * inverse_3x3(&r) * h;
        assert_relative_eq!(fim(&h, &r).unwrap().matrix, oracle, max_relative = 1e-10);
        assert!(matches!(fim(&h, &Matrix3::zeros()), Err(Error::Singular(_))));
    }

    #[test]
    fn crlb_examples() {
        let f = FisherInfo {
            matrix: Matrix3::from_diagonal(&nalgebra::Vector3::new(2.0, 4.0, 5.0)),
            det_h: 1.0,
            det_r: 1.0,
        };
        let b = crlb(&f).unwrap();
        assert_relative_eq!(b.horizontal, 0.75);
        assert_relative_eq!(b.vertical, 0.2);
        assert_relative_eq!(b.total, 0.95);

        let flat = [
            Point3::new(0.0, 0.0, 0.0),
            Point3::new(100.0, 0.0, 0.0),
            Point3::new(0.0, 100.0, 0.0),
        ];
        let out = crlb_with_anchor(
            &Point3::new(30.0, 30.0, 0.0),
            &flat,
            &Point3::new(60.0, 70.0, 0.0),
            [1e-17; 4],
        )
        .unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn det_closed_form_examples() {
        let s = 3e-17;
        let d = det_r_closed_form([s; 4]).unwrap();
        assert_relative_eq!(d.det, 4.0 * C.powi(6) * s.powi(3), max_relative = 1e-14);
        let d = det_r_closed_form([1e-16, 2e-16, 3e-16, 1e-300]).unwrap();
        assert_relative_eq!(d.det, d.d1, max_relative = 1e-14);
        assert!(det_r_closed_form([1e-16, 0.0, 1e-16, 1e-16]).is_err());
    }

    #[test]
    fn opt_d_examples() {
        let p = SystemParams::reference(4e-17);
        let bs = reference_bs();
        let ue = Point3::new(250.0, 135.0, 10.0);
        assert_eq!(opt_d(&ue, &bs, &bs[1], &p).unwrap(), 0.0);
        assert_eq!(opt_d1(&ue, &bs, &bs[1], &p).unwrap(), 0.0);
        assert_eq!(opt_d2(&ue, &bs, &bs[1], &p).unwrap(), 0.0);

        let uav = Point3::new(250.0, 250.0, 200.0);
        let base = opt_d(&ue, &bs, &uav, &p).unwrap();
        let v = anchor_variances(&ue, &bs, &uav, &p).unwrap();
        let det_h = jacobian_h(&ue, &bs, &uav).unwrap().determinant();
        let scaled = det_h.powi(2) / det_r_closed_form(v.map(|s| s * 2.0)).unwrap().det;
        assert_relative_eq!(scaled, base / 8.0, max_relative = 1e-12);
        assert!(opt_d1(&ue, &bs, &uav, &p).unwrap() >= base);
    }

    #[test]
    fn approximation_ordering_over_snr_sweep() {
        // Vary the UAV transmit power so SNR_u / SNR_n spans 1e-2..10 and
        // compare the approximations on a log scale.
        let bs = reference_bs();
        let ue = Point3::new(250.0, 135.0, 10.0);
        let uav = Point3::new(250.0, 250.0, 200.0);
        let base = SystemParams::reference(4e-17);
        let snr_n = bs
            .iter()
            .map(|b| base.snr_bs(b, &ue).unwrap())
            .fold(f64::INFINITY, f64::min);
        let snr_u_unit = base.snr_uav(&uav, &ue).unwrap() / base.uav.tx_power_w;
        for k in 0..=30 {
            let ratio = 10f64.powf(-2.0 + k as f64 / 10.0);
            let p = SystemParams {
                uav: LinkBudget::new(ratio * snr_n / snr_u_unit, 180e3).unwrap(),
                ..base
            };
            let d = opt_d(&ue, &bs, &uav, &p).unwrap().ln();
            let d1 = opt_d1(&ue, &bs, &uav, &p).unwrap().ln();
            let d2 = opt_d2(&ue, &bs, &uav, &p).unwrap().ln();
            assert!((d1 - d).abs() < (d2 - d).abs(), "ratio {ratio}");
        }
    }

    #[test]
    fn d1_approximation_condition_examples() {
        let bs = reference_bs();
        let ue = Point3::new(250.0, 135.0, 10.0);
        let uav = Point3::new(250.0, 250.0, 200.0);
        let noisy = SystemParams::reference(1e-6);
        assert!(d1_approximation_holds(&ue, &bs, &uav, &noisy, 1e6));

        // Equal SNRs with no NLoS residual: 1 >= 3 fails.
        let clean = SystemParams::reference(0.0);
        let snr_u = clean.snr_uav(&uav, &ue).unwrap();
        let gain_u = snr_u * clean.uav.noise_power(&clean.env);
        let tuned = bs.map(|b| {
            let g = crate::channel::g2g_gain(&b, &ue, &clean.env).unwrap();
            gain_u / g
        });
        for (b, power) in bs.iter().zip(tuned) {
            let p = SystemParams {
                bs: LinkBudget::new(power, 180e3).unwrap(),
                ..clean
            };
            assert_relative_eq!(p.snr_bs(b, &ue).unwrap(), snr_u, max_relative = 1e-12);
            assert!(!d1_approximation_holds(&ue, &[*b; 3], &uav, &p, 1.0));
        }

        let p = SystemParams::reference(4e-17);
        for x in (0..=600).step_by(50) {
            for y in (0..=600).step_by(50) {
                let uav = Point3::new(x as f64, y as f64, 100.0);
                assert!(d1_approximation_holds(&ue, &bs, &uav, &p, 1.0));
            }
        }
    }

    fn arb_variances() -> impl Strategy<Value = [f64; 4]> {
        proptest::array::uniform4(-20.0..-14.0f64).prop_map(|e| e.map(|x| 10f64.powf(x)))
    }

    proptest! {
        #[test]
        fn closed_form_matches_direct_determinant(v in arb_variances()) {
            let direct = tdoa_covariance(v).unwrap().to_meters().determinant();
            let closed = det_r_closed_form(v).unwrap().det;
            // LU cancellation is bounded by the Hadamard product of the diagonal.
            let m = tdoa_covariance(v).unwrap().to_meters();
            let scale = m[(0, 0)] * m[(1, 1)] * m[(2, 2)];
            prop_assert!((direct - closed).abs() <= 1e-12 * scale);
        }

        #[test]
        fn opt_d_is_det_of_fisher_information(
            x in 0.0..600.0f64, y in 0.0..600.0f64, h in 5.0..25.0f64,
            ux in 0.0..600.0f64, uy in 0.0..600.0f64, uh in 50.0..300.0f64,
        ) {
            let p = SystemParams::reference(4e-17);
            let bs = reference_bs();
            let ue = Point3::new(x, y, h);
            let uav = Point3::new(ux, uy, uh);
            let h = jacobian_h(&ue, &bs, &uav).unwrap();
            prop_assume!(h.determinant().abs() > 1e-3);
            let r = tdoa_covariance(anchor_variances(&ue, &bs, &uav, &p).unwrap()).unwrap().to_meters();
            let f = fim(&h, &r).unwrap();
            let d = opt_d(&ue, &bs, &uav, &p).unwrap();
            prop_assert!((f.det() - d).abs() <= 1e-9 * d);
            let eig = f.matrix.symmetric_eigenvalues();
            prop_assert!(eig.iter().all(|&e| e >= -1e-12 * eig.amax()));
            let b = crlb(&f).unwrap();
            prop_assert!(b.horizontal > 0.0 && b.vertical > 0.0);
        }
    }
}
