use crate::error::{Error, Result};
use crate::geometry::{PanelGeometry, Vec3};
use crate::link::{snr_los, snr_ris, snr_ris_tilted, LinkKind, SnrResult};

use super::{ordered_map, Scene};

/// Ground grid at `z = 0`; cells are `spacing` squares over the extents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub spacing: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl GridSpec {
    /// The street between the buildings over the region length.
    pub fn street(scene: &Scene, spacing: f64) -> Self {
        let half = scene.canyon.region_length / 2.0;
        GridSpec {
            spacing,
            x_min: 0.0,
            x_max: scene.canyon.width,
            y_min: -half,
            y_max: half,
        }
    }

    pub fn dims(&self) -> Result<(usize, usize)> {
        if !(self.spacing > 0.0) || !self.spacing.is_finite() {
            return Err(Error::config(
                "grid.spacing",
                format!("must be positive, got {}", self.spacing),
            ));
        }
        let count = |lo: f64, hi: f64| ((hi - lo) / self.spacing + 1e-9).floor().max(0.0) as usize;
        let nx = count(self.x_min, self.x_max);
        let ny = count(self.y_min, self.y_max);
        if nx == 0 || ny == 0 {
            return Err(Error::config("grid", "grid has no cells"));
        }
        Ok((nx, ny))
    }

    /// Cell centers, `y` rows outer and `x` inner.
    pub fn cells(&self) -> Result<Vec<Vec3>> {
        let (nx, ny) = self.dims()?;
        let mut out = Vec::with_capacity(nx * ny);
        for iy in 0..ny {
            let y = self.y_min + (iy as f64 + 0.5) * self.spacing;
            for ix in 0..nx {
                let x = self.x_min + (ix as f64 + 0.5) * self.spacing;
                out.push(Vec3::new(x, y, 0.0));
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SnrGrid {
    pub grid: GridSpec,
    pub nx: usize,
    pub ny: usize,
    pub sat_elevation: f64,
    pub kind: LinkKind,
    pub panel_tilt: f64,
    pub element_count: usize,
    pub cells: Vec<Vec3>,
    /// Per-cell SNR in dB; `None` marks a blocked link.
    pub values: Vec<Option<f64>>,
}

impl SnrGrid {
    pub fn value(&self, ix: usize, iy: usize) -> Option<f64> {
        self.values[iy * self.nx + ix]
    }

    pub fn cell(&self, ix: usize, iy: usize) -> Vec3 {
        self.cells[iy * self.nx + ix]
    }
}

/// SNR heat map over `grid` for a SAT at `sat_elevation` above the panel.
///
/// `LinkKind::Ris` evaluates the vertical panel, `RisTilted` the panel at its
/// configured tilt, and `Los` the direct link.
pub fn coverage_map(
    scene: &Scene,
    sat_elevation: f64,
    grid: &GridSpec,
    kind: LinkKind,
    workers: usize,
) -> Result<SnrGrid> {
    let cells = grid.cells()?;
    let (nx, ny) = grid.dims()?;
    let sat = scene.sat_for_elevation(sat_elevation)?;
    let panel = match kind {
        LinkKind::Ris => scene.panel.clone().with_tilt(0.0)?,
        _ => scene.panel.clone(),
    };
    let geometry = match kind {
        LinkKind::Los => None,
        _ => Some(PanelGeometry::new(&panel)?),
    };

    let eval = |user: &Vec3| -> Result<SnrResult> {
        match (&geometry, kind) {
            (Some(g), LinkKind::Ris) => snr_ris(&scene.params, g, sat, *user),
            (Some(g), _) => snr_ris_tilted(&scene.params, g, sat, *user),
            (None, _) => Ok(snr_los(&scene.params, sat, *user, &scene.canyon)),
        }
    };
    let results = ordered_map(&cells, workers, |u| eval(u).map(|r| r.db()))?;

    Ok(SnrGrid {
        grid: *grid,
        nx,
        ny,
        sat_elevation,
        kind,
        panel_tilt: panel.tilt,
        element_count: panel.element_count(),
        cells,
        values: results,
    })
}
