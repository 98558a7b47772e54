//! The Robin function `v_p(p)`: the value at `p` of the harmonic function
//! with boundary values `ln|z − p|`. The least capacity point of a planar
//! domain is its maximizer, the harmonic center.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom2d::{DomainKind, Grid2D};
use crate::numeric::{argmax, golden_min};

use super::system::{Bc, System};
use super::{interpolate, solve_with, vertex_offset, ScalarField2D};

/// Robin-function evaluations need `p` at least this many `h` inside.
pub const MIN_DISTANCE_CELLS: f64 = 2.0;
/// Candidate count aimed at by the first pass of the disk sweep.
const COARSE_CANDIDATES: f64 = 256.0;

/// One factored Dirichlet operator reused for every `p`.
pub struct RobinSolver<'g> {
    system: System<'g>,
}

impl<'g> RobinSolver<'g> {
    pub fn new(grid: &'g Grid2D) -> Result<RobinSolver<'g>> {
        Ok(RobinSolver {
            system: System::new(grid, Bc::Dirichlet, None)?,
        })
    }

    pub fn grid(&self) -> &'g Grid2D {
        self.system.grid
    }

    pub fn admissible(&self, x: f64, y: f64) -> bool {
        let grid = self.grid();
        grid.spec.contains(x, y)
            && grid.spec.distance_to_boundary(x, y) >= MIN_DISTANCE_CELLS * grid.h * (1.0 - 1e-12)
    }

    /// The harmonic extension of `ln|z − p|`.
    pub fn field(&self, x: f64, y: f64) -> Result<ScalarField2D<'g>> {
        if !self.admissible(x, y) {
            return Err(Error::TooCloseToBoundary { x, y });
        }
        let g = move |zx: f64, zy: f64| (zx - x).hypot(zy - y).ln();
        solve_with(&self.system, &g, &format!("ln|z - ({x}, {y})|"))
    }

    /// `v_p(p)`.
    pub fn value(&self, x: f64, y: f64) -> Result<f64> {
        let field = self.field(x, y)?;
        interpolate(self.grid(), &field.values, x, y)
    }
}

pub fn robin_value(grid: &Grid2D, x: f64, y: f64) -> Result<f64> {
    RobinSolver::new(grid)?.value(x, y)
}

#[derive(Debug, Clone, Serialize)]
pub struct RobinProfile {
    /// Candidate points evaluated, in sweep order.
    pub candidates: Vec<(f64, f64)>,
    pub values: Vec<f64>,
    /// Index of the best candidate (first among equals).
    pub argmax: usize,
    /// Refined maximizer `c(D)`.
    pub maximizer: (f64, f64),
}

/// The maximizer of `v_p(p)`.
///
/// Profile domains: every admissible node on the axis, then golden-section
/// refinement between the neighbours of the best one to width `h/10`.
/// Disks: a coarse-to-fine sweep over the admissible nodes.
pub fn harmonic_center(grid: &Grid2D) -> Result<((f64, f64), RobinProfile)> {
    let solver = RobinSolver::new(grid)?;
    let profile = match &grid.spec.kind {
        DomainKind::Profile { .. } => axis_sweep(&solver)?,
        DomainKind::Disk { .. } => plane_sweep(&solver)?,
    };
    Ok((profile.maximizer, profile))
}

fn axis_sweep(solver: &RobinSolver) -> Result<RobinProfile> {
    let grid = solver.grid();
    let h = grid.h;
    let candidates: Vec<(f64, f64)> = grid
        .axis
        .iter()
        .map(|&id| grid.xy(id))
        .filter(|&(x, y)| solver.admissible(x, y))
        .collect();
    if candidates.is_empty() {
        return Err(Error::NoCandidates);
    }
    let values = candidates
        .par_iter()
        .map(|&(x, y)| solver.value(x, y))
        .collect::<Result<Vec<_>>>()?;
    let k = argmax(&values);
    let mut maximizer = candidates[k];
    if candidates.len() >= 3 {
        let lo = candidates[k.saturating_sub(1)].0;
        let hi = candidates[(k + 1).min(candidates.len() - 1)].0;
        let g = golden_min(
            |x| match solver.value(x, 0.0) {
                Ok(v) => Ok(-v),
                Err(Error::TooCloseToBoundary { .. }) => Ok(f64::INFINITY),
                Err(e) => Err(e),
            },
            lo,
            hi,
            0.1 * h,
        )?;
        if -g.value > values[k] {
            maximizer = (g.x, 0.0);
        }
    }
    Ok(RobinProfile {
        candidates,
        values,
        argmax: k,
        maximizer,
    })
}

fn plane_sweep(solver: &RobinSolver) -> Result<RobinProfile> {
    let grid = solver.grid();
    let lattice = |id: usize| {
        let (ix, iy) = grid.coords(id);
        (grid.i0 + ix as i64, grid.j0 + iy as i64)
    };
    let admissible: HashMap<(i64, i64), usize> = grid
        .unknowns
        .iter()
        .filter(|&&id| {
            let (x, y) = grid.xy(id);
            solver.admissible(x, y)
        })
        .map(|&id| (lattice(id), id))
        .collect();
    if admissible.is_empty() {
        return Err(Error::NoCandidates);
    }
    let mut evaluated: HashMap<(i64, i64), f64> = HashMap::new();
    let mut order: Vec<(i64, i64)> = Vec::new();
    let evaluate = |pts: Vec<(i64, i64)>,
                        evaluated: &mut HashMap<(i64, i64), f64>,
                        order: &mut Vec<(i64, i64)>|
     -> Result<()> {
        let fresh: Vec<(i64, i64)> = pts.into_iter().filter(|p| !evaluated.contains_key(p)).collect();
        let vals = fresh
            .par_iter()
            .map(|p| {
                let (x, y) = grid.xy(admissible[p]);
                solver.value(x, y)
            })
            .collect::<Result<Vec<_>>>()?;
        for (p, v) in fresh.into_iter().zip(vals) {
            evaluated.insert(p, v);
            order.push(p);
        }
        Ok(())
    };
    // ties: smaller x, then smaller y
    let best_of = |evaluated: &HashMap<(i64, i64), f64>| {
        let mut keys: Vec<&(i64, i64)> = evaluated.keys().collect();
        keys.sort();
        let mut best = *keys[0];
        for &k in keys {
            if evaluated[&k] > evaluated[&best] {
                best = k;
            }
        }
        best
    };

    let mut stride = ((admissible.len() as f64 / COARSE_CANDIDATES).sqrt().ceil() as i64).max(1);
    let coarse: Vec<(i64, i64)> = admissible
        .keys()
        .filter(|(i, j)| i.rem_euclid(stride) == 0 && j.rem_euclid(stride) == 0)
        .copied()
        .collect();
    let mut coarse = if coarse.is_empty() { admissible.keys().copied().collect() } else { coarse };
    coarse.sort();
    evaluate(coarse, &mut evaluated, &mut order)?;
    loop {
        let best = best_of(&evaluated);
        let next = (stride + 1) / 2;
        let window: Vec<(i64, i64)> = (-stride..=stride)
            .flat_map(|a| (-stride..=stride).map(move |b| (a, b)))
            .filter(|(a, b)| a % next == 0 && b % next == 0)
            .map(|(a, b)| (best.0 + a, best.1 + b))
            .filter(|p| admissible.contains_key(p))
            .collect();
        evaluate(window, &mut evaluated, &mut order)?;
        if stride == 1 {
            break;
        }
        stride = next;
    }

    let best = best_of(&evaluated);
    let h = grid.h;
    let get = |p: (i64, i64)| evaluated.get(&p).copied();
    let c = evaluated[&best];
    let mut refined = (best.0 as f64 * h, best.1 as f64 * h);
    if let (Some(l), Some(r)) = (get((best.0 - 1, best.1)), get((best.0 + 1, best.1))) {
        refined.0 += h * vertex_offset(1.0, 1.0, l, c, r);
    }
    if let (Some(l), Some(r)) = (get((best.0, best.1 - 1)), get((best.0, best.1 + 1))) {
        refined.1 += h * vertex_offset(1.0, 1.0, l, c, r);
    }
    let candidates: Vec<(f64, f64)> = order.iter().map(|&p| grid.xy(admissible[&p])).collect();
    let values: Vec<f64> = order.iter().map(|p| evaluated[p]).collect();
    let argmax = order.iter().position(|&p| p == best).unwrap();
    Ok(RobinProfile {
        candidates,
        values,
        argmax,
        maximizer: refined,
    })
}
