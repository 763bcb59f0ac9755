use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};
use crate::geometry::{PanelGeometry, Vec3};
use crate::link::{snr_ris_tilted, SnrResult};

use super::Scene;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TiltOptimum {
    pub tilt: f64,
    pub snr: SnrResult,
}

/// `min, min + step, ...` up to `max` inclusive.
pub fn tilt_samples(min: f64, max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::config("sweep.tilt_step_deg", "must be positive"));
    }
    if !(min >= 0.0) || !(max < FRAC_PI_2) {
        return Err(Error::config(
            "sweep.tilt_max_deg",
            "tilt range must lie within [0, 90) degrees",
        ));
    }
    if max < min {
        return Err(Error::config("sweep.tilt_max_deg", "empty tilt range"));
    }
    let n = ((max - min) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| min + i as f64 * step).collect())
}

/// Tilted-RIS SNR at `user` for each tilt. The SAT stays fixed relative to
/// the panel center, which the tilt does not move.
pub fn tilt_curve(
    scene: &Scene,
    sat_elevation: f64,
    user: Vec3,
    tilts: &[f64],
) -> Result<Vec<(f64, SnrResult)>> {
    let sat = scene.sat_for_elevation(sat_elevation)?;
    tilts
        .iter()
        .map(|&t| {
            let panel = scene.panel.clone().with_tilt(t)?;
            let g = PanelGeometry::new(&panel)?;
            Ok((t, snr_ris_tilted(&scene.params, &g, sat, user)?))
        })
        .collect()
}

/// Grid-search maximizer of the tilted-RIS SNR; ties go to the smaller tilt.
pub fn optimal_tilt(
    scene: &Scene,
    sat_elevation: f64,
    user: Vec3,
    min: f64,
    max: f64,
    step: f64,
) -> Result<TiltOptimum> {
    let tilts = tilt_samples(min, max, step)?;
    let curve = tilt_curve(scene, sat_elevation, user, &tilts)?;
    let mut best = TiltOptimum {
        tilt: curve[0].0,
        snr: curve[0].1,
    };
    for &(tilt, snr) in &curve[1..] {
        if snr.snr_linear > best.snr.snr_linear {
            best = TiltOptimum { tilt, snr };
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::RisPanel;
    use crate::link::snr_ris;

    fn scene() -> Scene {
        let mut s = Scene::reference();
        s.panel =
            RisPanel::new(1.0, 0.6, s.params.wavelength / 2.0, s.canyon.ris_center()).unwrap();
        s
    }

    #[test]
    fn sample_counts() {
        let t = tilt_samples(0.0, 60f64.to_radians(), 1f64.to_radians()).unwrap();
        assert_eq!(t.len(), 61);
        assert_eq!(tilt_samples(0.0, 0.0, 0.1).unwrap(), vec![0.0]);
        assert!(tilt_samples(0.3, 0.1, 0.1).is_err());
        assert!(tilt_samples(0.0, FRAC_PI_2, 0.1).is_err());
    }

    #[test]
    fn zero_tilt_matches_untilted() {
        let s = scene();
        let user = Vec3::new(12.0, 3.0, 0.0);
        let el = 45f64.to_radians();
        let opt = optimal_tilt(&s, el, user, 0.0, 0.0, 0.01).unwrap();
        assert_eq!(opt.tilt, 0.0);
        let g = PanelGeometry::new(&s.panel).unwrap();
        let plain = snr_ris(&s.params, &g, s.sat_for_elevation(el).unwrap(), user).unwrap();
        assert!(((opt.snr.snr_linear - plain.snr_linear) / plain.snr_linear).abs() < 1e-12);
    }

    #[test]
    fn optimum_dominates_curve() {
        let s = scene();
        let el = 45f64.to_radians();
        let user = Vec3::new(5.0, 0.0, 0.0);
        let (lo, hi, step) = (0.0, 60f64.to_radians(), 1f64.to_radians());
        let opt = optimal_tilt(&s, el, user, lo, hi, step).unwrap();
        for (_, snr) in tilt_curve(&s, el, user, &tilt_samples(lo, hi, step).unwrap()).unwrap() {
            assert!(opt.snr.snr_linear >= snr.snr_linear);
        }
        assert!(opt.tilt > 0.0);
    }
}
