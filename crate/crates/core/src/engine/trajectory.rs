use std::f64::consts::FRAC_PI_2;
use std::fmt;

use crate::constellation::{
    coverage_half_angle, elevation_at_central_angle, sat_position_at_central_angle,
    ConstellationSpec,
};
use crate::error::{Error, Result};
use crate::geometry::{CanyonScenario, PanelGeometry, RisPanel, Vec3};
use crate::link::{snr_los, snr_ris_from_amplitude, LinkKind, LinkParams};
use crate::ris::optimal_amplitude;

use super::ordered_map;

/// One satellite's serving arc, sampled uniformly in orbital angle so each
/// sample stands for the same amount of time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassSweep {
    /// Orbital-angle step in radians.
    pub step: f64,
    /// Only samples with elevation (seen from the street center) inside
    /// `[min_elevation, max_elevation]` are kept.
    pub min_elevation: f64,
    pub max_elevation: f64,
}

impl PassSweep {
    pub fn full(step: f64) -> Self {
        PassSweep {
            step,
            min_elevation: -FRAC_PI_2,
            max_elevation: FRAC_PI_2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PassLink {
    Los,
    /// RIS link through the panel at this index.
    Ris(usize),
}

impl fmt::Display for PassLink {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PassLink::Los => f.write_str("los"),
            PassLink::Ris(i) => write!(f, "ris{}", i + 1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PassSample {
    /// Signed orbital angle from the zenith of the street center.
    pub central_angle: f64,
    pub elevation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PassSeries {
    pub samples: Vec<PassSample>,
    pub users: Vec<Vec3>,
    /// `best[sample][user]`: best unblocked link and its SNR in dB.
    pub best: Vec<Vec<Option<(PassLink, f64)>>>,
}

impl PassSeries {
    /// Share of samples in which `user` had no unblocked link.
    pub fn blocked_fraction(&self, user: usize) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let blocked = self.best.iter().filter(|row| row[user].is_none()).count();
        blocked as f64 / self.samples.len() as f64
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }
}

/// Sweeps one satellite across its `2 beta_max` arc over the street and
/// records, per user, the best of the direct link and a RIS link through
/// each panel.
pub fn trajectory_sweep(
    spec: &ConstellationSpec,
    canyon: &CanyonScenario,
    params: &LinkParams,
    panels: &[RisPanel],
    users: &[Vec3],
    sweep: &PassSweep,
    workers: usize,
) -> Result<PassSeries> {
    if !(sweep.step > 0.0) {
        return Err(Error::config("sweep.step", "must be positive"));
    }
    let beta_max = coverage_half_angle(spec.sats_per_orbit);
    let n = (2.0 * beta_max / sweep.step - 1e-9).ceil().max(1.0) as usize;
    let width = 2.0 * beta_max / n as f64;
    let ground = canyon.street_center();

    let mut angles = Vec::with_capacity(n);
    if sweep.max_elevation > sweep.min_elevation {
        for k in 0..n {
            let beta = -beta_max + (k as f64 + 0.5) * width;
            let elevation = elevation_at_central_angle(beta, spec.altitude, spec.earth_radius);
            if (sweep.min_elevation..=sweep.max_elevation).contains(&elevation) {
                angles.push((beta, elevation));
            }
        }
    }

    let geometries = panels
        .iter()
        .map(PanelGeometry::new)
        .collect::<Result<Vec<_>>>()?;
    // amplitude[panel][user]; independent of where the SAT is.
    let amplitudes = geometries
        .iter()
        .map(|g| {
            users
                .iter()
                .map(|&u| optimal_amplitude(g, u))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;

    let best = ordered_map(&angles, workers, |&(beta, elevation)| {
        let sat = sat_position_at_central_angle(beta, spec.altitude, spec.earth_radius, ground);
        let visible = elevation > 0.0;
        users
            .iter()
            .enumerate()
            .map(|(ui, &user)| {
                let mut best: Option<(PassLink, f64)> = None;
                if !visible {
                    return Ok(None);
                }
                let mut consider = |link: PassLink, db: Option<f64>| {
                    if let Some(v) = db {
                        if best.is_none_or(|(_, b)| v > b) {
                            best = Some((link, v));
                        }
                    }
                };
                consider(PassLink::Los, snr_los(params, sat, user, canyon).db());
                for (pi, g) in geometries.iter().enumerate() {
                    let r =
                        snr_ris_from_amplitude(params, g, sat, amplitudes[pi][ui], LinkKind::Ris)?;
                    consider(PassLink::Ris(pi), r.db());
                }
                Ok(best)
            })
            .collect::<Result<Vec<_>>>()
    })?;

    Ok(PassSeries {
        samples: angles
            .iter()
            .map(|&(central_angle, elevation)| PassSample {
                central_angle,
                elevation,
            })
            .collect(),
        users: users.to_vec(),
        best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::{blockage_report, Preset};

    #[test]
    fn empty_elevation_range_gives_empty_series() {
        let spec = Preset::Starlink1Shell1.spec();
        let canyon = CanyonScenario::default();
        let sweep = PassSweep {
            step: 0.001,
            min_elevation: 0.5,
            max_elevation: 0.5,
        };
        let s = trajectory_sweep(
            &spec,
            &canyon,
            &LinkParams::reference(),
            &[],
            &[Vec3::new(25.0, 0.0, 0.0)],
            &sweep,
            1,
        )
        .unwrap();
        assert!(s.is_empty());
        assert_eq!(s.blocked_fraction(0), 0.0);
    }

    #[test]
    fn los_only_fraction_tracks_blockage_ratio() {
        let spec = Preset::Starlink1Shell1.spec();
        let canyon = CanyonScenario::new(70.0, 50.0, 100.0).unwrap();
        let user = [Vec3::new(25.0, 0.0, 0.0)];
        let s = trajectory_sweep(
            &spec,
            &canyon,
            &LinkParams::reference(),
            &[],
            &user,
            &PassSweep::full(0.1f64.to_radians()),
            2,
        )
        .unwrap();
        let tb = blockage_report(&spec, &canyon).blockage_ratio;
        assert!((s.blocked_fraction(0) - tb).abs() < 0.01);
    }
}
