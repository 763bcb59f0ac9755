//! Self-check suite run by `risleo validate`: closed forms against slower
//! independent computations, and the blockage model against the published
//! table.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::antenna::{assemble_channels, element_gain, element_gain_quadrature, CascadeSetup};
use crate::constellation::{blockage_report, BLOCKAGE_TABLE, TABLE_ASPECT_RATIOS};
use crate::error::Result;
use crate::geometry::{
    sat_position, CanyonScenario, PanelGeometry, RisPanel, Vec3, EARTH_RADIUS_M,
};
use crate::link::{snr_cascade, snr_ris, LinkParams};
use crate::ris::{coherent_amplitude, optimal_amplitude, optimal_phases, PhaseConfig};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            residual,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }
}

/// A random single-panel geometry with the SAT in front of the panel.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub panel: RisPanel,
    pub sat: Vec3,
    pub user: Vec3,
}

/// Panels of up to `max_side x max_side` half-wavelength elements.
pub fn random_instance(
    rng: &mut impl Rng,
    wavelength: f64,
    max_side: usize,
) -> Result<RandomInstance> {
    let spacing = wavelength / 2.0;
    let ny = rng.gen_range(1..=max_side);
    let nz = rng.gen_range(1..=max_side);
    let height = rng.gen_range(20.0..100.0);
    let elevation: f64 = rng.gen_range(15f64..80.0).to_radians();
    let max_tilt = (85f64.to_radians() - elevation).min(40f64.to_radians());
    let tilt = rng.gen_range(0.0..max_tilt);
    let b = [0.0, 0.5, 1.0, 2.0, 3.0][rng.gen_range(0..5)];
    let center = Vec3::new(0.0, 0.0, height);
    let panel = RisPanel::new(ny as f64 * spacing, nz as f64 * spacing, spacing, center)?
        .with_tilt(tilt)?
        .with_radiation_exponent(b)?;
    let sat = sat_position(elevation, 1.3e6, EARTH_RADIUS_M, center)?;
    let user = Vec3::new(rng.gen_range(0.5..50.0), rng.gen_range(-50.0..50.0), 0.0);
    Ok(RandomInstance { panel, sat, user })
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / a.abs().max(b.abs())
    }
}

/// Closed-form phases reach the coherent bound and no random phase setting
/// beats them.
fn phase_optimality(rng: &mut ChaCha8Rng, params: &LinkParams) -> Result<Vec<Check>> {
    let mut bound_residual: f64 = 0.0;
    let mut excess: f64 = 0.0;
    for _ in 0..20 {
        let inst = random_instance(rng, params.wavelength, 16)?;
        let g = PanelGeometry::new(&inst.panel)?;
        let d1 = inst.sat.distance(g.center);
        let opt = optimal_phases(&g.elements, inst.user, d1, params.wavelength)?;
        let best = coherent_amplitude(&g, inst.user, &opt, d1, params.wavelength)?.norm();
        let bound = optimal_amplitude(&g, inst.user)?;
        bound_residual = bound_residual.max(rel(best, bound));
        for _ in 0..200 {
            let cfg = PhaseConfig::new((0..g.len()).map(|_| rng.gen_range(0.0..TAU)));
            let a = coherent_amplitude(&g, inst.user, &cfg, d1, params.wavelength)?.norm();
            excess = excess.max(a / best - 1.0);
        }
    }
    Ok(vec![
        Check::new("phase_optimality/coherent_bound", bound_residual, 1e-9),
        Check::new("phase_optimality/random_configs", excess.max(0.0), 1e-12),
    ])
}

/// The full channel-matrix product under optimal phases against the
/// closed-form RIS SNR.
fn matrix_path(rng: &mut ChaCha8Rng, params: &LinkParams) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let inst = random_instance(rng, params.wavelength, 8)?;
        let side = rng.gen_range(1..=2);
        let setup = CascadeSetup::square(side, params.wavelength);
        let ch = assemble_channels(&inst.panel, inst.sat, inst.user, &setup)?;
        let g = PanelGeometry::new(&inst.panel)?;
        let d1 = inst.sat.distance(g.center);
        let phases = optimal_phases(&g.elements, inst.user, d1, params.wavelength)?;
        let explicit = snr_cascade(params, &ch, phases.phases(), inst.panel.radiation_exponent)?;
        let closed = snr_ris(params, &g, inst.sat, inst.user)?.snr_linear;
        worst = worst.max(rel(explicit, closed));
    }
    Ok(Check::new("matrix_path", worst, 1e-9))
}

fn quadrature_gain() -> Check {
    let worst = [0.0, 0.5, 1.0, 2.0, 3.0, 5.0]
        .into_iter()
        .map(|b| rel(element_gain_quadrature(b), element_gain(b)))
        .fold(0.0, f64::max);
    Check::new("element_gain_quadrature", worst, 1e-6)
}

fn blockage_table() -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for (preset, published) in BLOCKAGE_TABLE {
        let spec = preset.spec();
        let mut worst: f64 = 0.0;
        for (hw, pct) in TABLE_ASPECT_RATIOS.into_iter().zip(published) {
            let canyon = CanyonScenario::new(hw * 50.0, 50.0, 100.0)?;
            let t = 100.0 * blockage_report(&spec, &canyon).blockage_ratio;
            worst = worst.max((t - pct).abs());
        }
        out.push(Check::new(
            format!("blockage_table/{}", preset.name()),
            worst,
            preset.table_tolerance(),
        ));
    }
    Ok(out)
}

/// Runs every check; `seed` fixes the random geometries.
pub fn run_suite(seed: u64) -> Result<ValidationReport> {
    let params = LinkParams::reference();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = phase_optimality(&mut rng, &params)?;
    checks.push(matrix_path(&mut rng, &params)?);
    checks.push(quadrature_gain());
    checks.extend(blockage_table()?);
    Ok(ValidationReport { checks })
}
