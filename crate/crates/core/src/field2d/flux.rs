//! The ε-flux probe: hold the lattice nodes within ε of `p` at 1, the outer
//! (Dirichlet) boundary at 0, and measure the heat leaving the core.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom2d::Grid2D;

use super::sparse::SolveStats;
use super::system::{Bc, System};

/// Relative tolerance for the flux solves.
pub const FLUX_TOL: f64 = 1e-12;
/// Largest relative disagreement allowed between the two contours.
pub const CONTOUR_AGREEMENT: f64 = 1e-6;
/// ε and the core's clearance from the boundary, in cells.
pub const MIN_CELLS: f64 = 3.0;

#[derive(Debug, Clone, Serialize)]
pub struct FluxProbe {
    pub p: (f64, f64),
    pub eps: f64,
    /// Flux across the inner contour.
    pub flux: f64,
    /// Radii of the two contours and the fluxes across them.
    pub radii: [f64; 2],
    pub contour_flux: [f64; 2],
    pub pinned: usize,
    /// `sqrt(pinned · h² / π)`: radius of a disk with the core's area.
    pub effective_radius: f64,
    pub stats: SolveStats,
}

pub fn flux_probe(grid: &Grid2D, p: (f64, f64), eps: f64, bc: Bc) -> Result<FluxProbe> {
    let h = grid.h;
    if !(eps >= MIN_CELLS * h * (1.0 - 1e-12)) {
        return Err(Error::InvalidArgument(format!(
            "eps = {eps} is below {MIN_CELLS} cells (h = {h})"
        )));
    }
    let (px, py) = p;
    let rho = if grid.spec.contains(px, py) {
        grid.spec.distance_to_boundary(px, py)
    } else {
        0.0
    };
    if rho < eps + MIN_CELLS * h * (1.0 - 1e-12) {
        return Err(Error::TooCloseToBoundary { x: px, y: py });
    }
    let dist = |id: usize| {
        let (x, y) = grid.xy(id);
        (x - px).hypot(y - py)
    };
    let mut pinned = vec![false; grid.class.len()];
    let mut count = 0;
    for &id in &grid.unknowns {
        if dist(id) <= eps {
            pinned[id] = true;
            count += 1;
        }
    }
    let system = System::new(grid, bc, Some(pinned))?;
    let b = system.rhs(&|_, _| 0.0, 1.0);
    let (u, stats) = system.solve(&b, None, FLUX_TOL)?;
    let values = system.scatter(&u, 1.0);

    // Σ over lattice edges leaving the disk of radius r
    let across = |r: f64| {
        let mut acc = 0.0;
        for &id in &grid.unknowns {
            if dist(id) >= r {
                continue;
            }
            for d in 0..4 {
                if grid.legs[id][d].boundary.is_some() {
                    continue;
                }
                let nb = grid.neighbor(id, d).unwrap();
                if dist(nb) >= r {
                    acc += system.stencil.w[id][d] * (values[id] - values[nb]);
                }
            }
        }
        acc
    };
    let radii = [eps + (rho - eps) / 3.0, eps + 2.0 * (rho - eps) / 3.0];
    let contour_flux = [across(radii[0]), across(radii[1])];
    let gap = (contour_flux[0] - contour_flux[1]).abs();
    if gap > CONTOUR_AGREEMENT * contour_flux[0].abs() {
        return Err(Error::ContourMismatch {
            first: contour_flux[0],
            second: contour_flux[1],
        });
    }
    Ok(FluxProbe {
        p,
        eps,
        flux: contour_flux[0],
        radii,
        contour_flux,
        pinned: count,
        effective_radius: (count as f64 * h * h / std::f64::consts::PI).sqrt(),
        stats,
    })
}
