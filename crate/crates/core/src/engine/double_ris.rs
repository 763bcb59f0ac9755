use std::f64::consts::TAU;
use std::fmt;

use crate::constellation::{
    central_angle_at_elevation, elevation_at_central_angle, ConstellationSpec,
};
use crate::error::Result;
use crate::geometry::{
    sat_position, sat_position_mirrored, CanyonScenario, Facing, PanelGeometry, RisPanel, Vec3,
};
use crate::link::{snr_los, snr_ris, LinkKind, LinkParams, SnrResult};

use super::Orbit;

/// How the SAT -> RIS elevation is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SatElevationModel {
    /// From the actual SAT and panel-center positions.
    #[default]
    Exact,
    /// Reuse the elevation seen from the street center for each panel.
    StreetCenter,
}

/// Two panels facing each other across the street, each lit by the SAT on
/// the opposite side.
#[derive(Debug, Clone)]
pub struct DoubleRisScenario {
    pub canyon: CanyonScenario,
    /// On the building at `x = 0`, facing `+x`; served by SAT1.
    pub panel_left: RisPanel,
    /// On the building at `x = W`, facing `-x`; served by SAT2.
    pub panel_right: RisPanel,
    pub orbit: Orbit,
    /// SAT1 elevation from the street center, on the `+x` side.
    pub sat1_elevation: f64,
    /// SAT2 elevation from the street center, on the `-x` side; `None` when
    /// no second satellite is above the horizon.
    pub sat2_elevation: Option<f64>,
}

impl DoubleRisScenario {
    /// Builds both panels from `template` (size, spacing, exponent, tilt).
    pub fn new(
        canyon: CanyonScenario,
        template: &RisPanel,
        orbit: Orbit,
        sat1_elevation: f64,
        sat2_elevation: Option<f64>,
    ) -> Self {
        let mut left = template.clone().with_facing(Facing::PlusX);
        left.center = Vec3::new(0.0, 0.0, canyon.height);
        let mut right = template.clone().with_facing(Facing::MinusX);
        right.center = Vec3::new(canyon.width, 0.0, canyon.height);
        DoubleRisScenario {
            canyon,
            panel_left: left,
            panel_right: right,
            orbit,
            sat1_elevation,
            sat2_elevation: sat2_elevation.filter(|&e| e > 0.0),
        }
    }

    /// SAT2 is the next satellite behind SAT1 in the same orbit.
    pub fn from_constellation(
        canyon: CanyonScenario,
        template: &RisPanel,
        spec: &ConstellationSpec,
        sat1_elevation: f64,
    ) -> Self {
        let orbit = Orbit {
            altitude: spec.altitude,
            earth_radius: spec.earth_radius,
        };
        let spacing = TAU / spec.sats_per_orbit as f64;
        let beta1 = central_angle_at_elevation(sat1_elevation, orbit.altitude, orbit.earth_radius);
        // First satellite strictly on the far side of zenith.
        let steps = (beta1 / spacing).floor() + 1.0;
        let beta2 = beta1 - steps * spacing;
        let sat2 = elevation_at_central_angle(beta2, orbit.altitude, orbit.earth_radius);
        Self::new(canyon, template, orbit, sat1_elevation, Some(sat2))
    }

    /// Reflection `x -> W - x` with the two SATs swapped.
    pub fn mirrored(&self) -> Option<Self> {
        let sat2 = self.sat2_elevation?;
        Some(Self::new(
            self.canyon,
            &self.panel_left,
            self.orbit,
            sat2,
            Some(self.sat1_elevation),
        ))
    }

    fn street_center(&self) -> Vec3 {
        self.canyon.street_center()
    }

    pub fn sat1(&self) -> Result<Vec3> {
        sat_position(
            self.sat1_elevation,
            self.orbit.altitude,
            self.orbit.earth_radius,
            self.street_center(),
        )
    }

    pub fn sat2(&self) -> Result<Option<Vec3>> {
        self.sat2_elevation
            .map(|e| {
                sat_position_mirrored(
                    e,
                    self.orbit.altitude,
                    self.orbit.earth_radius,
                    self.street_center(),
                )
            })
            .transpose()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServingLink {
    Los1,
    Los2,
    Ris1,
    Ris2,
}

impl ServingLink {
    pub const ORDER: [ServingLink; 4] = [
        ServingLink::Los1,
        ServingLink::Los2,
        ServingLink::Ris1,
        ServingLink::Ris2,
    ];
}

impl fmt::Display for ServingLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ServingLink::Los1 => "los1",
            ServingLink::Los2 => "los2",
            ServingLink::Ris1 => "ris1",
            ServingLink::Ris2 => "ris2",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DoubleRisResult {
    pub los1: SnrResult,
    pub los2: SnrResult,
    pub ris1: SnrResult,
    pub ris2: SnrResult,
    /// Best unblocked link; `None` when all four are blocked.
    pub serving: Option<ServingLink>,
}

impl DoubleRisResult {
    pub fn link(&self, which: ServingLink) -> &SnrResult {
        match which {
            ServingLink::Los1 => &self.los1,
            ServingLink::Los2 => &self.los2,
            ServingLink::Ris1 => &self.ris1,
            ServingLink::Ris2 => &self.ris2,
        }
    }
}

/// A scenario with both element grids materialized.
#[derive(Debug, Clone)]
pub struct DoubleRisEvaluator {
    left: PanelGeometry,
    right: PanelGeometry,
    sat1: Vec3,
    sat2: Option<Vec3>,
    /// Where each panel believes its SAT is, per the elevation model.
    ris_sat1: Vec3,
    ris_sat2: Option<Vec3>,
    canyon: CanyonScenario,
}

impl DoubleRisEvaluator {
    pub fn new(scenario: &DoubleRisScenario, model: SatElevationModel) -> Result<Self> {
        let left = PanelGeometry::new(&scenario.panel_left)?;
        let right = PanelGeometry::new(&scenario.panel_right)?;
        let sat1 = scenario.sat1()?;
        let sat2 = scenario.sat2()?;
        let o = scenario.orbit;
        let (ris_sat1, ris_sat2) = match model {
            SatElevationModel::Exact => (sat1, sat2),
            SatElevationModel::StreetCenter => (
                sat_position(
                    scenario.sat1_elevation,
                    o.altitude,
                    o.earth_radius,
                    left.center,
                )?,
                scenario
                    .sat2_elevation
                    .map(|e| sat_position_mirrored(e, o.altitude, o.earth_radius, right.center))
                    .transpose()?,
            ),
        };
        Ok(DoubleRisEvaluator {
            left,
            right,
            sat1,
            sat2,
            ris_sat1,
            ris_sat2,
            canyon: scenario.canyon,
        })
    }

    pub fn evaluate(&self, params: &LinkParams, user: Vec3) -> Result<DoubleRisResult> {
        let los1 = snr_los(params, self.sat1, user, &self.canyon);
        let los2 = match self.sat2 {
            Some(s) => snr_los(params, s, user, &self.canyon),
            None => SnrResult::blocked(LinkKind::Los),
        };
        let ris1 = snr_ris(params, &self.left, self.ris_sat1, user)?;
        let ris2 = match self.ris_sat2 {
            Some(s) => snr_ris(params, &self.right, s, user)?,
            None => SnrResult::blocked(LinkKind::Ris),
        };
        let mut result = DoubleRisResult {
            los1,
            los2,
            ris1,
            ris2,
            serving: None,
        };
        let mut best = f64::NEG_INFINITY;
        for which in ServingLink::ORDER {
            let r = result.link(which);
            if !r.blocked && r.snr_linear > best {
                best = r.snr_linear;
                result.serving = Some(which);
            }
        }
        Ok(result)
    }
}

pub fn double_ris_evaluate(
    scenario: &DoubleRisScenario,
    params: &LinkParams,
    user: Vec3,
    model: SatElevationModel,
) -> Result<DoubleRisResult> {
    DoubleRisEvaluator::new(scenario, model)?.evaluate(params, user)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scenario(a1: f64, a2: Option<f64>) -> DoubleRisScenario {
        let canyon = CanyonScenario::default();
        let lambda = LinkParams::reference().wavelength;
        let template = RisPanel::new(0.4, 0.3, lambda / 2.0, Vec3::ZERO).unwrap();
        DoubleRisScenario::new(canyon, &template, Orbit::default(), a1, a2)
    }

    #[test]
    fn symmetric_user_sees_equal_ris_links() {
        let s = scenario(0.8, Some(0.8));
        let p = LinkParams::reference();
        let r = double_ris_evaluate(&s, &p, Vec3::new(25.0, 0.0, 0.0), SatElevationModel::Exact)
            .unwrap();
        let rel = (r.ris1.snr_linear - r.ris2.snr_linear).abs() / r.ris1.snr_linear;
        assert!(rel < 1e-9, "{rel}");
    }

    #[test]
    fn mirror_swaps_ris_links() {
        let s = scenario(0.9, Some(0.6));
        let m = s.mirrored().unwrap();
        let p = LinkParams::reference();
        let ev = DoubleRisEvaluator::new(&s, SatElevationModel::Exact).unwrap();
        let evm = DoubleRisEvaluator::new(&m, SatElevationModel::Exact).unwrap();
        for x in [1.0, 7.5, 20.0, 33.0, 49.0] {
            let a = ev.evaluate(&p, Vec3::new(x, 0.0, 0.0)).unwrap();
            let b = evm.evaluate(&p, Vec3::new(50.0 - x, 0.0, 0.0)).unwrap();
            assert!((a.ris1.snr_linear / b.ris2.snr_linear - 1.0).abs() < 1e-12);
            assert!((a.ris2.snr_linear / b.ris1.snr_linear - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn serving_link_is_best_unblocked() {
        let s = scenario(0.7, Some(1.2));
        let p = LinkParams::reference();
        for x in [0.5, 10.0, 25.0, 40.0, 49.5] {
            let r = double_ris_evaluate(&s, &p, Vec3::new(x, 0.0, 0.0), SatElevationModel::Exact)
                .unwrap();
            let best = ServingLink::ORDER
                .into_iter()
                .filter(|&l| !r.link(l).blocked)
                .map(|l| r.link(l).snr_linear)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(r.link(r.serving.unwrap()).snr_linear, best);
        }
    }

    #[test]
    fn near_left_wall_is_served_by_right_panel() {
        let s = scenario(45f64.to_radians(), Some(45f64.to_radians()));
        let p = LinkParams::reference();
        let r = double_ris_evaluate(&s, &p, Vec3::new(0.5, 0.0, 0.0), SatElevationModel::Exact)
            .unwrap();
        assert!(r.ris2.snr_linear > r.ris1.snr_linear);
        assert!(r.los1.blocked && r.los2.blocked);
        assert_eq!(r.serving, Some(ServingLink::Ris2));
    }

    #[test]
    fn next_satellite_lands_on_far_side() {
        let canyon = CanyonScenario::default();
        let spec = ConstellationSpec::new(1.3e6, 20).unwrap();
        let template = RisPanel::new(0.1, 0.1, 0.05, Vec3::ZERO).unwrap();
        for deg in [35.0f64, 45.0, 55.0, 65.0] {
            let s =
                DoubleRisScenario::from_constellation(canyon, &template, &spec, deg.to_radians());
            let sat2 = s.sat2().unwrap().unwrap();
            assert!(sat2.x < canyon.width / 2.0);
        }
    }
}
