//! RIS phase configuration and the coherent element sum.

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::antenna::{radiation_profile, wrapped_phase};
use crate::error::{Error, Result};
use crate::geometry::{PanelGeometry, Vec3};

/// Per-element phase shifts, canonical in `[0, 2 pi)`, ordered like the grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig(Vec<f64>);

impl PhaseConfig {
    pub fn new(phases: impl IntoIterator<Item = f64>) -> Self {
        PhaseConfig(phases.into_iter().map(wrap_phase).collect())
    }

    pub fn zeros(n: usize) -> Self {
        PhaseConfig(vec![0.0; n])
    }

    pub fn phases(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Reduces `phase` to `[0, 2 pi)`.
pub fn wrap_phase(phase: f64) -> f64 {
    let w = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs.
    if w >= TAU {
        0.0
    } else {
        w
    }
}

fn element_distance(element: Vec3, target: Vec3) -> Result<f64> {
    let d = (target - element).norm();
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::DegenerateGeometry(format!(
            "point {target:?} coincides with an element"
        )))
    }
}

/// Closed-form optimal phases `psi_n = k (|p_{u,n}| + |p_1|) mod 2 pi`.
pub fn optimal_phases(
    elements: &[Vec3],
    user: Vec3,
    sat_distance: f64,
    wavelength: f64,
) -> Result<PhaseConfig> {
    if !(wavelength > 0.0) {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    let sat_phase = wrapped_phase(sat_distance, wavelength);
    elements
        .iter()
        .map(|&p| {
            element_distance(p, user).map(|d| wrap_phase(wrapped_phase(d, wavelength) + sat_phase))
        })
        .collect::<Result<Vec<_>>>()
        .map(PhaseConfig)
}

/// Optimal phases using every element's own SAT distance.
pub fn optimal_phases_per_element(
    elements: &[Vec3],
    user: Vec3,
    sat: Vec3,
    wavelength: f64,
) -> Result<PhaseConfig> {
    if !(wavelength > 0.0) {
        return Err(Error::Domain(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    elements
        .iter()
        .map(|&p| {
            let du = element_distance(p, user)?;
            let ds = element_distance(p, sat)?;
            Ok(wrap_phase(
                wrapped_phase(du, wavelength) + wrapped_phase(ds, wavelength),
            ))
        })
        .collect::<Result<Vec<_>>>()
        .map(PhaseConfig)
}

/// `sqrt(F_{u,n}) / |p_{u,n}|` for one element.
#[inline]
fn user_term(element: Vec3, user: Vec3, boresight: Vec3, b: f64) -> Result<f64> {
    let v = user - element;
    let d = element_distance(element, user)?;
    let cos = v.dot(boresight) / d;
    Ok(radiation_profile(cos, b).sqrt() / d)
}

/// `sum_n sqrt(F_{u,n}) / |p_{u,n}| e^{j psi_n} e^{-j k (|p_{u,n}| + |p_1|)}`.
pub fn coherent_amplitude(
    panel: &PanelGeometry,
    user: Vec3,
    config: &PhaseConfig,
    sat_distance: f64,
    wavelength: f64,
) -> Result<Complex64> {
    if config.len() != panel.len() {
        return Err(Error::LengthMismatch {
            expected: panel.len(),
            got: config.len(),
        });
    }
    let sat_phase = wrapped_phase(sat_distance, wavelength);
    let b = panel.radiation_exponent;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&p, &psi) in panel.elements.iter().zip(config.phases()) {
        let d = element_distance(p, user)?;
        let amp = user_term(p, user, panel.boresight, b)?;
        let phase = psi - wrapped_phase(d, wavelength) - sat_phase;
        acc += Complex64::from_polar(amp, phase);
    }
    Ok(acc)
}

/// Same sum with each element's own SAT distance in the propagation phase.
pub fn coherent_amplitude_per_element(
    panel: &PanelGeometry,
    user: Vec3,
    config: &PhaseConfig,
    sat: Vec3,
    wavelength: f64,
) -> Result<Complex64> {
    if config.len() != panel.len() {
        return Err(Error::LengthMismatch {
            expected: panel.len(),
            got: config.len(),
        });
    }
    let b = panel.radiation_exponent;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&p, &psi) in panel.elements.iter().zip(config.phases()) {
        let du = element_distance(p, user)?;
        let ds = element_distance(p, sat)?;
        let amp = user_term(p, user, panel.boresight, b)?;
        let phase = psi - wrapped_phase(du, wavelength) - wrapped_phase(ds, wavelength);
        acc += Complex64::from_polar(amp, phase);
    }
    Ok(acc)
}

/// The coherent sum at optimal phases, `sum_n sqrt(F_{u,n}) / |p_{u,n}|`.
///
/// This is the hot loop of every coverage sweep; it skips the phase algebra
/// since optimal phases cancel it exactly.
pub fn optimal_amplitude(panel: &PanelGeometry, user: Vec3) -> Result<f64> {
    let axis = panel.boresight;
    let b = panel.radiation_exponent;
    let mut acc = 0.0;
    if b == 2.0 {
        // sqrt(cos^2) / d = <v, axis> / d^2
        for &p in &panel.elements {
            let v = user - p;
            let d2 = v.norm_sq();
            if !(d2 > 0.0) {
                return Err(Error::DegenerateGeometry(format!(
                    "point {user:?} coincides with an element"
                )));
            }
            let dot = v.dot(axis);
            if dot > 0.0 {
                acc += dot / d2;
            }
        }
    } else {
        for &p in &panel.elements {
            acc += user_term(p, user, axis, b)?;
        }
    }
    Ok(acc)
}

/// Rounds every phase to the nearest of `2^bits` uniform levels.
pub fn quantize_phases(config: &PhaseConfig, bits: u32) -> PhaseConfig {
    let levels = 1u64 << bits.clamp(1, 32);
    let step = TAU / levels as f64;
    PhaseConfig(
        config
            .phases()
            .iter()
            .map(|&psi| {
                let idx = (psi / step).round() as u64 % levels;
                idx as f64 * step
            })
            .collect(),
    )
}
