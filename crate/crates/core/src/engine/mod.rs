//! Composite experiments built on the link budget: coverage maps, tilt
//! search, double-RIS serving, and satellite pass sweeps.
//!
//! Every work unit (grid cell, sweep sample) is an independent pure function
//! of shared read-only state, and results are collected in input order, so
//! output does not depend on the worker count.

mod coverage;
mod double_ris;
mod tilt;
mod trajectory;

pub use coverage::{coverage_map, GridSpec, SnrGrid};
pub use double_ris::{
    double_ris_evaluate, DoubleRisEvaluator, DoubleRisResult, DoubleRisScenario, SatElevationModel,
    ServingLink,
};
pub use tilt::{optimal_tilt, tilt_curve, tilt_samples, TiltOptimum};
pub use trajectory::{trajectory_sweep, PassLink, PassSample, PassSeries, PassSweep};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{sat_position, CanyonScenario, RisPanel, Vec3, EARTH_RADIUS_M};
use crate::link::LinkParams;

/// Circular orbit shell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Orbit {
    pub altitude: f64,
    pub earth_radius: f64,
}

impl Default for Orbit {
    fn default() -> Self {
        Orbit {
            altitude: 1.3e6,
            earth_radius: EARTH_RADIUS_M,
        }
    }
}

/// Everything a single-panel experiment needs.
#[derive(Debug, Clone)]
pub struct Scene {
    pub canyon: CanyonScenario,
    pub panel: RisPanel,
    pub params: LinkParams,
    pub orbit: Orbit,
}

impl Scene {
    /// 100 m x 50 m canyon, 5 m x 3 m half-wavelength panel on the left roof
    /// edge, 1300 km shell at 11.54 GHz.
    pub fn reference() -> Self {
        let canyon = CanyonScenario::default();
        let params = LinkParams::reference();
        let panel = RisPanel::new(5.0, 3.0, params.wavelength / 2.0, canyon.ris_center())
            .expect("reference panel is valid");
        Scene {
            canyon,
            panel,
            params,
            orbit: Orbit::default(),
        }
    }

    /// SAT at `elevation` above the panel center, on the side the panel faces.
    pub fn sat_for_elevation(&self, elevation: f64) -> Result<Vec3> {
        sat_position(
            elevation,
            self.orbit.altitude,
            self.orbit.earth_radius,
            self.panel.center,
        )
    }
}

/// Maps `f` over `items` on `workers` threads, preserving order. One worker
/// runs inline on the caller's thread.
pub(crate) fn ordered_map<T, U, F>(items: &[T], workers: usize, f: F) -> Result<Vec<U>>
where
    T: Sync,
    U: Send,
    F: Fn(&T) -> Result<U> + Sync + Send,
{
    if workers <= 1 {
        return items.iter().map(&f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("run.workers", e.to_string()))?;
    pool.install(|| items.par_iter().map(&f).collect())
}
