//! Constellation visibility and urban-canyon blockage geometry.
//!
//! Angles follow the in-plane picture of a circular orbit passing straight
//! over the street: `beta` is the Earth-central angle between the ground
//! point and the satellite, `alpha` the elevation seen from the ground.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{CanyonScenario, Vec3, EARTH_RADIUS_M};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstellationSpec {
    /// Orbit altitude in meters.
    pub altitude: f64,
    pub sats_per_orbit: u32,
    pub earth_radius: f64,
}

impl ConstellationSpec {
    pub fn new(altitude: f64, sats_per_orbit: u32) -> Result<Self> {
        let spec = ConstellationSpec {
            altitude,
            sats_per_orbit,
            earth_radius: EARTH_RADIUS_M,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.altitude > 0.0) || !self.altitude.is_finite() {
            return Err(Error::config(
                "constellation.altitude_km",
                format!("must be positive, got {} m", self.altitude),
            ));
        }
        if self.sats_per_orbit == 0 {
            return Err(Error::config(
                "constellation.sats_per_orbit",
                "must be at least 1",
            ));
        }
        if !(self.earth_radius > 0.0) {
            return Err(Error::config(
                "constellation.earth_radius_km",
                "must be positive",
            ));
        }
        Ok(())
    }
}

/// Named constellation shells with built-in `(h, Q)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Preset {
    TelesatPolar,
    TelesatInclined,
    Starlink1Shell1,
    Starlink1Shell2,
    Starlink1Shell3,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::TelesatPolar,
        Preset::TelesatInclined,
        Preset::Starlink1Shell1,
        Preset::Starlink1Shell2,
        Preset::Starlink1Shell3,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::TelesatPolar => "telesat-polar",
            Preset::TelesatInclined => "telesat-inclined",
            Preset::Starlink1Shell1 => "starlink-1-1",
            Preset::Starlink1Shell2 => "starlink-1-2",
            Preset::Starlink1Shell3 => "starlink-1-3",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Preset::TelesatPolar => "Telesat, polar orbit",
            Preset::TelesatInclined => "Telesat, inclined orbit",
            Preset::Starlink1Shell1 => "Starlink Phase 1, Shell 1",
            Preset::Starlink1Shell2 => "Starlink Phase 1, Shell 2",
            Preset::Starlink1Shell3 => "Starlink Phase 1, Shell 3",
        }
    }

    /// `(altitude km, satellites per orbit)`.
    fn parameters(self) -> (f64, u32) {
        match self {
            Preset::TelesatPolar => (1015.0, 13),
            Preset::TelesatInclined => (1325.0, 11),
            Preset::Starlink1Shell1 => (550.0, 22),
            Preset::Starlink1Shell2 => (570.0, 20),
            Preset::Starlink1Shell3 => (560.0, 58),
        }
    }

    /// The Telesat shells per-orbit counts are fitted, not published.
    pub fn is_fitted(self) -> bool {
        matches!(self, Preset::TelesatPolar | Preset::TelesatInclined)
    }

    pub fn spec(self) -> ConstellationSpec {
        let (h_km, q) = self.parameters();
        ConstellationSpec {
            altitude: h_km * 1e3,
            sats_per_orbit: q,
            earth_radius: EARTH_RADIUS_M,
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
                Error::config(
                    "constellation.preset",
                    format!("unknown preset `{s}`, expected one of {}", names.join(", ")),
                )
            })
    }
}

/// Canyon aspect ratios of the published blockage table.
pub const TABLE_ASPECT_RATIOS: [f64; 3] = [1.4, 2.0, 2.4];

/// Published blockage ratios in percent, per preset, at
/// [`TABLE_ASPECT_RATIOS`].
pub const BLOCKAGE_TABLE: [(Preset, [f64; 3]); 5] = [
    (Preset::TelesatPolar, [80.3, 86.0, 88.3]),
    (Preset::TelesatInclined, [79.3, 85.2, 87.6]),
    (Preset::Starlink1Shell1, [80.5, 86.2, 88.5]),
    (Preset::Starlink1Shell2, [81.7, 87.1, 89.2]),
    (Preset::Starlink1Shell3, [47.8, 63.1, 69.1]),
];

impl Preset {
    /// Allowed deviation from [`BLOCKAGE_TABLE`] in percentage points.
    pub fn table_tolerance(self) -> f64 {
        if self.is_fitted() {
            1.0
        } else {
            0.3
        }
    }
}

/// Half of the orbital arc served by one satellite.
pub fn coverage_half_angle(sats_per_orbit: u32) -> f64 {
    PI / sats_per_orbit as f64
}

/// Elevation below which a user against one wall loses sight over the other.
pub fn blockage_start_elevation(height: f64, width: f64) -> f64 {
    (height / width).atan()
}

/// Central angle between zenith and the point where the satellite sinks
/// below `blockage_elevation`.
pub fn unblocked_central_angle(blockage_elevation: f64, altitude: f64, earth_radius: f64) -> f64 {
    central_angle_at_elevation(blockage_elevation, altitude, earth_radius)
}

pub fn central_angle_at_elevation(elevation: f64, altitude: f64, earth_radius: f64) -> f64 {
    (earth_radius / (earth_radius + altitude) * elevation.cos()).acos() - elevation
}

/// Elevation seen from the ground for a satellite at central angle `beta`
/// (sign ignored). Negative when below the horizon.
pub fn elevation_at_central_angle(beta: f64, altitude: f64, earth_radius: f64) -> f64 {
    let rs = earth_radius + altitude;
    let beta = beta.abs();
    (rs * beta.cos() - earth_radius).atan2(rs * beta.sin())
}

/// Satellite position for a signed central angle; positive `beta` is on the
/// `+x` side of `ground`.
pub fn sat_position_at_central_angle(
    beta: f64,
    altitude: f64,
    earth_radius: f64,
    ground: Vec3,
) -> Vec3 {
    let rs = earth_radius + altitude;
    let (s, c) = beta.sin_cos();
    ground + Vec3::new(rs * s, 0.0, rs * c - earth_radius)
}

pub fn blockage_ratio(sats_per_orbit: u32, unblocked_angle: f64) -> f64 {
    let beta_max = coverage_half_angle(sats_per_orbit);
    (1.0 - unblocked_angle / (2.0 * beta_max)).clamp(0.0, 1.0)
}

/// Satellites per orbit needed for an always-visible direct link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QMin {
    pub exact: f64,
    /// `exact` rounded to the nearest integer.
    pub count: u64,
}

pub fn q_min(unblocked_angle: f64) -> QMin {
    let exact = TAU / unblocked_angle;
    QMin {
        exact,
        count: exact.round() as u64,
    }
}

/// Largest per-orbit count with at most one satellite above the horizon.
pub fn q_threshold(altitude: f64, earth_radius: f64) -> u64 {
    let beta = 2.0 * (earth_radius / (earth_radius + altitude)).acos();
    (TAU / beta).floor() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    SingleVisible,
    PartialBlockage,
    AlwaysLos,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Regime::SingleVisible => "single_visible",
            Regime::PartialBlockage => "partial_blockage",
            Regime::AlwaysLos => "always_los",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeClass {
    pub regime: Regime,
    /// `Q` sits exactly on `Q_th` or `Q_min`.
    pub on_boundary: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockageReport {
    pub blockage_elevation: f64,
    pub unblocked_angle: f64,
    pub coverage_half_angle: f64,
    pub blockage_ratio: f64,
    pub q_min: QMin,
    pub q_threshold: u64,
}

pub fn blockage_report(spec: &ConstellationSpec, canyon: &CanyonScenario) -> BlockageReport {
    let alpha_b = blockage_start_elevation(canyon.height, canyon.width);
    let beta_b = unblocked_central_angle(alpha_b, spec.altitude, spec.earth_radius);
    BlockageReport {
        blockage_elevation: alpha_b,
        unblocked_angle: beta_b,
        coverage_half_angle: coverage_half_angle(spec.sats_per_orbit),
        blockage_ratio: blockage_ratio(spec.sats_per_orbit, beta_b),
        q_min: q_min(beta_b),
        q_threshold: q_threshold(spec.altitude, spec.earth_radius),
    }
}

pub fn classify_regime(spec: &ConstellationSpec, canyon: &CanyonScenario) -> RegimeClass {
    let report = blockage_report(spec, canyon);
    let q = spec.sats_per_orbit as u64;
    let (regime, on_boundary) = if q <= report.q_threshold {
        (Regime::SingleVisible, q == report.q_threshold)
    } else if q <= report.q_min.count {
        (Regime::PartialBlockage, q == report.q_min.count)
    } else {
        (Regime::AlwaysLos, false)
    };
    RegimeClass {
        regime,
        on_boundary,
    }
}

/// Whether the straight path from `user` to `sat` passes below the roof line
/// of either building. Buildings are `x <= 0` and `x >= W`, both `H` tall and
/// unbounded along the street.
pub fn los_blocked(user: Vec3, sat: Vec3, canyon: &CanyonScenario) -> bool {
    let d = sat - user;
    if d.z <= 0.0 {
        return true;
    }
    let wall_x = if d.x > 0.0 {
        canyon.width
    } else if d.x < 0.0 {
        0.0
    } else {
        return false;
    };
    let t = (wall_x - user.x) / d.x;
    if t >= 1.0 {
        // Satellite is inside the street volume.
        return false;
    }
    user.z + t * d.z < canyon.height
}

/// Elevation above which a user at `x` sees over the wall in direction
/// `toward_plus_x`.
pub fn clearance_elevation(user_x: f64, toward_plus_x: bool, canyon: &CanyonScenario) -> f64 {
    let run = if toward_plus_x {
        canyon.width - user_x
    } else {
        user_x
    };
    if run <= 0.0 {
        FRAC_PI_2
    } else {
        (canyon.height / run).atan()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const R: f64 = EARTH_RADIUS_M;

    #[test]
    fn half_angle_examples() {
        assert_eq!(coverage_half_angle(1), PI);
        assert!((coverage_half_angle(22) - 0.142800).abs() < 1e-6);
        assert!((coverage_half_angle(75) - 0.041888).abs() < 1e-6);
    }

    #[test]
    fn blockage_start_examples() {
        assert!((blockage_start_elevation(50.0, 50.0) - PI / 4.0).abs() < 1e-15);
        assert!((blockage_start_elevation(100.0, 50.0) - 1.10715).abs() < 1e-5);
        assert!((blockage_start_elevation(70.0, 50.0) - 0.95055).abs() < 1e-5);
    }

    /// Root-finds the central angle where the ground ray at elevation `alpha`
    /// meets the orbit sphere, by bisection on the ray parameter.
    fn central_angle_by_ray(alpha: f64, h: f64) -> f64 {
        let (s, c) = alpha.sin_cos();
        let point = |t: f64| (t * c, R + t * s);
        let (mut lo, mut hi) = (0.0, 1e8);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            let (x, z) = point(mid);
            if x.hypot(z) < R + h {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let (x, z) = point(0.5 * (lo + hi));
        x.atan2(z)
    }

    #[test]
    fn unblocked_angle_matches_ray_oracle() {
        for (h, hw) in [(550e3, 1.4f64), (1300e3, 2.0), (1000e3, 2.4)] {
            let a = hw.atan();
            let closed = unblocked_central_angle(a, h, R);
            assert!((closed - central_angle_by_ray(a, h)).abs() < 1e-10);
        }
        assert!((unblocked_central_angle(1.4f64.atan(), 550e3, R) - 0.05568).abs() < 1e-5);
        assert!((unblocked_central_angle(2f64.atan(), 1300e3, R) - 0.08310).abs() < 1e-5);
        let a = 0.7;
        assert!((unblocked_central_angle(a, 1e15, R) - (FRAC_PI_2 - a)).abs() < 1e-8);
    }

    #[test]
    fn central_angle_round_trip() {
        for alpha in [0.1, 0.5, 1.0, 1.5] {
            let beta = central_angle_at_elevation(alpha, 1.3e6, R);
            assert!((elevation_at_central_angle(beta, 1.3e6, R) - alpha).abs() < 1e-12);
            let p = sat_position_at_central_angle(beta, 1.3e6, R, Vec3::ZERO);
            assert!((p.z.atan2(p.x) - alpha).abs() < 1e-9);
        }
    }

    #[test]
    fn published_table_rows() {
        for (preset, expected) in BLOCKAGE_TABLE {
            let spec = preset.spec();
            for (hw, e) in TABLE_ASPECT_RATIOS.into_iter().zip(expected) {
                let canyon = CanyonScenario::new(hw * 50.0, 50.0, 100.0).unwrap();
                let t = 100.0 * blockage_report(&spec, &canyon).blockage_ratio;
                assert!(
                    (t - e).abs() <= preset.table_tolerance(),
                    "{preset} H/W={hw}: {t}"
                );
            }
        }
    }

    #[test]
    fn blockage_ratio_clamps() {
        assert_eq!(blockage_ratio(10, 10.0), 0.0);
        assert_eq!(blockage_ratio(10, 0.0), 1.0);
    }

    #[test]
    fn q_examples() {
        let b1 = unblocked_central_angle(1.4f64.atan(), 550e3, R);
        assert_eq!(q_min(b1).count, 113);
        assert_eq!(q_min(TAU).count, 1);
        assert_eq!(q_threshold(1300e3, R), 5);
        assert_eq!(q_threshold(550e3, R), 7);
        // Far orbit: the half-sphere is visible, so two satellites fit.
        assert_eq!(q_threshold(1e15, R), 2);
    }

    #[test]
    fn regimes() {
        let canyon = CanyonScenario::new(100.0, 50.0, 100.0).unwrap();
        let at = |q| classify_regime(&ConstellationSpec::new(1300e3, q).unwrap(), &canyon);
        assert_eq!(at(3).regime, Regime::SingleVisible);
        assert_eq!(at(20).regime, Regime::PartialBlockage);
        assert_eq!(at(100).regime, Regime::AlwaysLos);
        let edge = at(5);
        assert_eq!(edge.regime, Regime::SingleVisible);
        assert!(edge.on_boundary);
    }

    #[test]
    fn los_examples() {
        let canyon = CanyonScenario::new(100.0, 50.0, 100.0).unwrap();
        let user = Vec3::new(0.01, 0.0, 0.0);
        let zenith = Vec3::new(0.01, 0.0, 1.3e6);
        assert!(!los_blocked(user, zenith, &canyon));
        let eps = 1e-3;
        let a = (100.0f64 / 49.99).atan();
        let low = user + Vec3::new((a - eps).cos(), 0.0, (a - eps).sin()) * 1e6;
        assert!(los_blocked(user, low, &canyon));
        let high = user + Vec3::new((a + eps).cos(), 0.0, (a + eps).sin()) * 1e6;
        assert!(!los_blocked(user, high, &canyon));

        let mid = Vec3::new(25.0, 0.0, 0.0);
        let a = (2.0f64 * 100.0 / 50.0).atan() + eps;
        let sat = mid + Vec3::new(a.cos(), 0.0, a.sin()) * 1e6;
        assert!(!los_blocked(mid, sat, &canyon));
    }

    #[test]
    fn preset_parsing() {
        assert_eq!(
            "starlink-1-3".parse::<Preset>().unwrap(),
            Preset::Starlink1Shell3
        );
        let err = "oneweb".parse::<Preset>().unwrap_err().to_string();
        assert!(err.contains("constellation.preset"));
    }
}
