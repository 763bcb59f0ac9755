//! Link-budget composition for the RIS-assisted and direct links.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::antenna::{element_gain, radiation_profile, CascadeChannels};
use crate::constellation::los_blocked;
use crate::error::{Error, Result};
use crate::geometry::{facing_cos, CanyonScenario, PanelGeometry, Vec3, SPEED_OF_LIGHT};
use crate::ris::optimal_amplitude;

/// SAT elevations closer than this (in cosine) to the panel plane count as
/// grazing and carry no energy.
const GRAZING_COS: f64 = 1e-12;

pub fn db(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(10.0 * x.log10())
    } else {
        Err(Error::Domain(format!("cannot take dB of {x}")))
    }
}

pub fn from_db(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    pub tx_power_w: f64,
    pub tx_gain: f64,
    pub rx_gain: f64,
    pub wavelength: f64,
    pub noise_power_w: f64,
    /// Linear power factor in `(0, 1]`.
    pub atmospheric_loss: f64,
    /// Element area `d_y d_z` in m^2.
    pub element_area: f64,
    pub tx_antennas: u32,
    pub rx_antennas: u32,
}

impl LinkParams {
    /// 11.54 GHz Ku-band downlink from a 1300 km shell.
    pub fn reference() -> Self {
        let wavelength = SPEED_OF_LIGHT / 11.54e9;
        LinkParams {
            tx_power_w: from_db(15.0),
            tx_gain: from_db(24.6),
            rx_gain: from_db(27.6),
            wavelength,
            noise_power_w: from_db(-120.5),
            atmospheric_loss: from_db(-0.0166),
            element_area: (wavelength / 2.0).powi(2),
            tx_antennas: 12 * 24,
            rx_antennas: 24 * 24,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("link.tx_power_dbw", self.tx_power_w),
            ("link.tx_gain_db", self.tx_gain),
            ("link.rx_gain_db", self.rx_gain),
            ("link.frequency_ghz", self.wavelength),
            ("link.noise_power_dbw", self.noise_power_w),
            ("link.element_area", self.element_area),
        ];
        for (key, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(
                    key,
                    format!("must be positive and finite, got {v}"),
                ));
            }
        }
        if !(self.atmospheric_loss > 0.0 && self.atmospheric_loss <= 1.0) {
            return Err(Error::config(
                "link.atmospheric_loss_db",
                "must be a nonnegative loss (linear factor in (0, 1])",
            ));
        }
        if self.tx_antennas == 0 || self.rx_antennas == 0 {
            return Err(Error::config(
                "link.tx_antennas",
                "antenna counts must be positive",
            ));
        }
        Ok(())
    }

    /// `P_t G_t G_r L_atm (lambda / 4 pi)^2 / sigma^2`, shared by every link.
    fn base_snr(&self) -> f64 {
        let f = self.wavelength / (4.0 * PI);
        self.tx_power_w * self.tx_gain * self.rx_gain * self.atmospheric_loss * f * f
            / self.noise_power_w
    }
}

/// Amplitude coefficient of the RIS cascade.
pub fn coef(params: &LinkParams, ris_gain: f64) -> f64 {
    (params.tx_power_w
        * params.tx_gain
        * params.rx_gain
        * ris_gain
        * params.element_area
        * params.atmospheric_loss)
        .sqrt()
        * params.wavelength
        / (4.0 * PI)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    Ris,
    RisTilted,
    Los,
}

impl fmt::Display for LinkKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LinkKind::Ris => "ris",
            LinkKind::RisTilted => "ris_tilted",
            LinkKind::Los => "los",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrResult {
    pub snr_linear: f64,
    /// `-inf` when blocked.
    pub snr_db: f64,
    pub kind: LinkKind,
    pub blocked: bool,
}

impl SnrResult {
    fn from_linear(snr_linear: f64, kind: LinkKind) -> Self {
        if snr_linear > 0.0 {
            SnrResult {
                snr_linear,
                snr_db: 10.0 * snr_linear.log10(),
                kind,
                blocked: false,
            }
        } else {
            SnrResult::blocked(kind)
        }
    }

    pub fn blocked(kind: LinkKind) -> Self {
        SnrResult {
            snr_linear: 0.0,
            snr_db: f64::NEG_INFINITY,
            kind,
            blocked: true,
        }
    }

    /// SNR in dB, or `None` when blocked.
    pub fn db(&self) -> Option<f64> {
        (!self.blocked).then_some(self.snr_db)
    }
}

/// `(|p_1|, F_1)` of the SAT as seen from the panel center.
fn sat_factor(panel: &PanelGeometry, sat: Vec3) -> Result<(f64, f64)> {
    let v = sat - panel.center;
    let d1 = v.norm();
    let cos1 = facing_cos(v, panel.boresight)?;
    let f1 = if cos1 > GRAZING_COS {
        radiation_profile(cos1, panel.radiation_exponent)
    } else {
        0.0
    };
    Ok((d1, f1))
}

fn ris_snr(
    params: &LinkParams,
    panel: &PanelGeometry,
    sat: Vec3,
    user: Vec3,
    kind: LinkKind,
) -> Result<SnrResult> {
    let (_, f1) = sat_factor(panel, sat)?;
    if f1 == 0.0 {
        return Ok(SnrResult::blocked(kind));
    }
    let amp = optimal_amplitude(panel, user)?;
    snr_ris_from_amplitude(params, panel, sat, amp, kind)
}

/// RIS SNR from a precomputed optimal-phase amplitude. The amplitude does
/// not depend on the SAT, so pass sweeps compute it once per user.
pub fn snr_ris_from_amplitude(
    params: &LinkParams,
    panel: &PanelGeometry,
    sat: Vec3,
    amplitude: f64,
    kind: LinkKind,
) -> Result<SnrResult> {
    let (d1, f1) = sat_factor(panel, sat)?;
    if f1 == 0.0 {
        return Ok(SnrResult::blocked(kind));
    }
    let g_ris = element_gain(panel.radiation_exponent);
    let snr =
        params.base_snr() * g_ris * params.element_area * f1 / (d1 * d1) * amplitude * amplitude;
    Ok(SnrResult::from_linear(snr, kind))
}

/// SNR of the SAT -> RIS -> user link under optimal phases and matched
/// beamformers, with the SAT seen from the panel center.
pub fn snr_ris(
    params: &LinkParams,
    panel: &PanelGeometry,
    sat: Vec3,
    user: Vec3,
) -> Result<SnrResult> {
    ris_snr(params, panel, sat, user, LinkKind::Ris)
}

/// RIS SNR for a down-tilted panel. `panel` must be built from the tilted
/// `RisPanel` so elements and boresight are already rotated.
pub fn snr_ris_tilted(
    params: &LinkParams,
    panel: &PanelGeometry,
    sat: Vec3,
    user: Vec3,
) -> Result<SnrResult> {
    ris_snr(params, panel, sat, user, LinkKind::RisTilted)
}

/// RIS SNR with per-element SAT distances and radiation factors; for
/// checking how much the panel-center substitution costs.
pub fn snr_ris_per_element(
    params: &LinkParams,
    panel: &PanelGeometry,
    sat: Vec3,
    user: Vec3,
) -> Result<SnrResult> {
    let b = panel.radiation_exponent;
    let mut amp = 0.0;
    for &p in &panel.elements {
        let vs = sat - p;
        let vu = user - p;
        let (ds, du) = (vs.norm(), vu.norm());
        if !(ds > 0.0 && du > 0.0) {
            return Err(Error::DegenerateGeometry(
                "point coincides with an element".into(),
            ));
        }
        let fs = radiation_profile(vs.dot(panel.boresight) / ds, b);
        let fu = radiation_profile(vu.dot(panel.boresight) / du, b);
        amp += (fs * fu).sqrt() / (ds * du);
    }
    let snr = params.base_snr() * element_gain(b) * params.element_area * amp * amp;
    Ok(SnrResult::from_linear(snr, LinkKind::Ris))
}

/// Linear SNR of an explicit cascade `w^H H diag(e^{j psi}) G f` under the
/// given phases. Serves as the reference for the closed forms above.
pub fn snr_cascade(
    params: &LinkParams,
    channels: &CascadeChannels,
    phases: &[f64],
    radiation_exponent: f64,
) -> Result<f64> {
    let a = channels.received_amplitude(phases)?;
    let c = coef(params, element_gain(radiation_exponent));
    Ok(c * c * a.norm_sqr() / params.noise_power_w)
}

/// Direct SAT -> user link, blocked when the canyon walls cut the ray.
pub fn snr_los(params: &LinkParams, sat: Vec3, user: Vec3, canyon: &CanyonScenario) -> SnrResult {
    if los_blocked(user, sat, canyon) {
        return SnrResult::blocked(LinkKind::Los);
    }
    let d = (sat - user).norm();
    SnrResult::from_linear(params.base_snr() / (d * d), LinkKind::Los)
}

/// Direct-link SNR ignoring the canyon.
pub fn snr_free_space(params: &LinkParams, distance: f64) -> f64 {
    params.base_snr() / (distance * distance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{RisPanel, EARTH_RADIUS_M};

    #[test]
    fn db_examples() {
        assert_eq!(db(1.0).unwrap(), 0.0);
        assert!((db(100.0).unwrap() - 20.0).abs() < 1e-15);
        assert!((db(0.5).unwrap() + 3.0103).abs() < 1e-4);
        assert!(db(0.0).is_err());
        assert!(db(-2.0).is_err());
        for x in [1e-9, 0.37, 4.2e7] {
            assert!(((from_db(db(x).unwrap()) - x) / x).abs() < 1e-12);
        }
    }

    fn unit_params() -> LinkParams {
        LinkParams {
            tx_power_w: 1.0,
            tx_gain: 1.0,
            rx_gain: 1.0,
            wavelength: 4.0 * PI,
            noise_power_w: 1.0,
            atmospheric_loss: 1.0,
            element_area: 1.0,
            tx_antennas: 1,
            rx_antennas: 1,
        }
    }

    #[test]
    fn coef_examples() {
        let p = unit_params();
        assert!((coef(&p, 1.0) - 1.0).abs() < 1e-15);
        let doubled = LinkParams {
            tx_power_w: 2.0,
            ..p
        };
        assert!((coef(&doubled, 1.0) / coef(&p, 1.0) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn reference_coef() {
        // sqrt(10^1.5 * 10^2.46 * 10^2.76 * 6 * (lambda/2)^2 * 10^-0.00166) * lambda / 4pi
        let lambda: f64 = 0.025969;
        let p = LinkParams {
            wavelength: lambda,
            element_area: (lambda / 2.0).powi(2),
            ..LinkParams::reference()
        };
        let expected =
            (10f64.powf(1.5 + 2.46 + 2.76 - 0.00166) * 6.0).sqrt() * (lambda / 2.0) * lambda
                / (4.0 * PI);
        assert!((coef(&p, 6.0) - expected).abs() < 1e-12 * expected);
        assert!((expected - 0.150285201605).abs() < 1e-11, "{expected}");
    }

    #[test]
    fn zenith_los_reference() {
        let p = LinkParams::reference();
        let canyon = CanyonScenario::default();
        let user = Vec3::new(25.0, 0.0, 0.0);
        let sat = user + Vec3::new(0.0, 0.0, 1.3e6);
        let s = snr_los(&p, sat, user, &canyon);
        assert!(!s.blocked);
        assert!((s.snr_db - 11.71).abs() < 0.01, "{}", s.snr_db);
        let far = user + Vec3::new(0.0, 0.0, 2.6e6);
        let s2 = snr_los(&p, far, user, &canyon);
        assert!((s.snr_db - s2.snr_db - 6.0206).abs() < 1e-3);
        let low = user + Vec3::new(1e6, 0.0, 1e6);
        assert!(snr_los(&p, low, user, &canyon).blocked);
    }

    #[test]
    fn single_element_two_hop() {
        let p = LinkParams::reference();
        let s = p.wavelength / 2.0;
        let panel =
            PanelGeometry::new(&RisPanel::new(s, s, s, Vec3::new(0.0, 0.0, 100.0)).unwrap())
                .unwrap();
        let sat = Vec3::new(1.2e6, 0.0, 1.2e6);
        let user = Vec3::new(20.0, 5.0, 0.0);
        let r = snr_ris(&p, &panel, sat, user).unwrap();

        let vs = sat - panel.center;
        let vu = user - panel.center;
        let f1 = (vs.x / vs.norm()).powi(2);
        let fu = (vu.x / vu.norm()).powi(2);
        let c = coef(&p, 6.0);
        let expect = c * c / p.noise_power_w * f1 * fu / (vs.norm_sq() * vu.norm_sq());
        assert!(((r.snr_linear - expect) / expect).abs() < 1e-12);
    }

    #[test]
    fn user_behind_panel_is_blocked() {
        let p = LinkParams::reference();
        let panel =
            PanelGeometry::new(&RisPanel::new(0.1, 0.1, 0.05, Vec3::new(0.0, 0.0, 100.0)).unwrap())
                .unwrap();
        let sat = Vec3::new(1.2e6, 0.0, 1.2e6);
        let r = snr_ris(&p, &panel, sat, Vec3::new(-10.0, 0.0, 0.0)).unwrap();
        assert!(r.blocked);
        assert_eq!(r.snr_db, f64::NEG_INFINITY);
        let r = snr_ris(
            &p,
            &panel,
            Vec3::new(-1.2e6, 0.0, 1.2e6),
            Vec3::new(10.0, 0.0, 0.0),
        )
        .unwrap();
        assert!(r.blocked);
    }

    #[test]
    fn tilt_past_sat_blocks() {
        let p = LinkParams::reference();
        let c = Vec3::new(0.0, 0.0, 100.0);
        let sat = crate::geometry::sat_position(PI / 4.0, 1.3e6, EARTH_RADIUS_M, c).unwrap();
        let tilted = RisPanel::new(0.1, 0.1, 0.05, c)
            .unwrap()
            .with_tilt(PI / 4.0)
            .unwrap();
        let g = PanelGeometry::new(&tilted).unwrap();
        assert!(
            snr_ris_tilted(&p, &g, sat, Vec3::new(10.0, 0.0, 0.0))
                .unwrap()
                .blocked
        );
    }

    #[test]
    fn scales_linearly_with_power_and_gains() {
        let p = LinkParams::reference();
        let panel = PanelGeometry::new(
            &RisPanel::new(0.2, 0.1, p.wavelength / 2.0, Vec3::new(0.0, 0.0, 100.0)).unwrap(),
        )
        .unwrap();
        let sat = Vec3::new(1.2e6, 0.0, 1.2e6);
        let user = Vec3::new(20.0, 5.0, 0.0);
        let base = snr_ris(&p, &panel, sat, user).unwrap().snr_linear;
        for q in [
            LinkParams {
                tx_power_w: 3.0 * p.tx_power_w,
                ..p
            },
            LinkParams {
                tx_gain: 3.0 * p.tx_gain,
                ..p
            },
            LinkParams {
                rx_gain: 3.0 * p.rx_gain,
                ..p
            },
        ] {
            let s = snr_ris(&q, &panel, sat, user).unwrap().snr_linear;
            assert!((s / base - 3.0).abs() < 1e-12);
        }
    }
}
