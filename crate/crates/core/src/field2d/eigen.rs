//! Principal eigenpair of `−Δ` on a grid and its warmest point `m(D)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom2d::{DomainKind, Grid2D, EAST, NORTH, SOUTH, WEST};
use crate::numeric::{dot, norm};

use super::system::{Bc, System};
use super::vertex_offset;

/// Eigen-residual `‖K u − λ M u‖ / (λ ‖M u‖)` accepted.
pub const EIGEN_TOL: f64 = 1e-10;
const INNER_TOL: f64 = 1e-12;
const MAX_OUTER: usize = 500;

#[derive(Debug, Clone, Serialize)]
pub struct EigenPair2D {
    pub bc: Bc,
    pub lambda: f64,
    /// Lattice-wide values, normalized to max 1 (zero off the unknowns).
    #[serde(skip)]
    pub values: Vec<f64>,
    /// Node id of the largest value (first among equals).
    pub argmax_node: usize,
    /// Refined maximizer.
    pub m: (f64, f64),
    pub residual: f64,
    pub iterations: usize,
}

/// Smallest eigenvalue by inverse iteration from the all-ones vector.
pub fn principal_eigen2d(grid: &Grid2D, bc: Bc) -> Result<EigenPair2D> {
    let system = System::new(grid, bc, None)?;
    let mass: Vec<f64> = system.free.iter().map(|&id| system.stencil.mass[id]).collect();
    let a = &system.solver.a;
    let n = system.free.len();
    let mut u = vec![1.0; n];
    let mut guess: Option<Vec<f64>> = None;
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut iterations = 0;
    while iterations < MAX_OUTER {
        iterations += 1;
        let mu: Vec<f64> = u.iter().zip(&mass).map(|(x, m)| x * m).collect();
        let (next, _) = system.solve(&mu, guess.as_deref(), INNER_TOL)?;
        let scale = 1.0 / norm(&next);
        u = next.iter().map(|v| v * scale).collect();
        let ku = a.matvec(&u);
        let mu: Vec<f64> = u.iter().zip(&mass).map(|(x, m)| x * m).collect();
        lambda = dot(&u, &ku) / dot(&u, &mu);
        let r: Vec<f64> = ku.iter().zip(&mu).map(|(k, m)| k - lambda * m).collect();
        residual = norm(&r) / (lambda * norm(&mu));
        if residual <= EIGEN_TOL {
            break;
        }
        guess = Some(u.iter().map(|v| v / lambda).collect());
    }
    if residual > EIGEN_TOL {
        return Err(Error::IterationCap {
            solver: "inverse iteration",
            iterations: MAX_OUTER,
            residual,
        });
    }
    let peak = u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let trough = u.iter().cloned().fold(f64::INFINITY, f64::min);
    let scale = if peak.abs() >= trough.abs() { 1.0 / peak } else { 1.0 / trough };
    let u: Vec<f64> = u.iter().map(|v| v * scale).collect();
    let values = system.scatter(&u, 0.0);

    let mut argmax_node = grid.unknowns[0];
    for &id in &grid.unknowns {
        if values[id] > values[argmax_node] {
            argmax_node = id;
        }
    }
    let m = match &grid.spec.kind {
        DomainKind::Profile { .. } => {
            let mut best = *grid.axis.first().ok_or(Error::NoAxisRow)?;
            for &id in &grid.axis {
                if values[id] > values[best] {
                    best = id;
                }
            }
            let (x, y) = grid.xy(best);
            (x + refine(grid, &values, best, EAST, WEST), y)
        }
        DomainKind::Disk { .. } => {
            let (x, y) = grid.xy(argmax_node);
            (
                x + refine(grid, &values, argmax_node, EAST, WEST),
                y + refine(grid, &values, argmax_node, NORTH, SOUTH),
            )
        }
    };
    Ok(EigenPair2D {
        bc,
        lambda,
        values,
        argmax_node,
        m,
        residual,
        iterations,
    })
}

/// Parabolic offset of the maximum along one lattice line; a leg ending on
/// the boundary contributes the boundary value 0 at its true distance.
fn refine(grid: &Grid2D, values: &[f64], id: usize, fwd: usize, back: usize) -> f64 {
    let side = |d: usize| {
        let leg = grid.legs[id][d];
        let v = match leg.boundary {
            None => values[grid.neighbor(id, d).unwrap()],
            Some(_) => 0.0,
        };
        (leg.frac * grid.h, v)
    };
    let (b, r) = side(fwd);
    let (a, l) = side(back);
    vertex_offset(a, b, l, values[id], r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2d::{build_grid, DomainSpec};
    use std::f64::consts::PI;

    #[test]
    fn unit_square() {
        let g = build_grid(&DomainSpec::profile_str("0.5").unwrap(), 1.0 / 64.0).unwrap();
        let e = principal_eigen2d(&g, Bc::Dirichlet).unwrap();
        let want = 2.0 * PI * PI;
        assert!((e.lambda / want - 1.0).abs() < 0.01, "{}", e.lambda);
        assert!((e.m.0 - 0.5).abs() < 1e-9 && e.m.1 == 0.0);
        assert!(g.unknowns.iter().all(|&id| e.values[id] > 0.0));
        assert!(e.residual <= EIGEN_TOL);
    }

    #[test]
    fn unit_disk() {
        let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 64.0).unwrap();
        let e = principal_eigen2d(&g, Bc::Dirichlet).unwrap();
        let j01 = 2.404_825_557_695_773f64;
        assert!((e.lambda / (j01 * j01) - 1.0).abs() < 0.01, "{}", e.lambda);
        assert!(e.m.0.hypot(e.m.1) <= 2.0 * g.h);
        assert!(g.unknowns.iter().all(|&id| e.values[id] > 0.0));
    }

    #[test]
    fn thin_rectangle_mixed_is_one_dimensional() {
        let g = build_grid(&DomainSpec::profile_str("0.1").unwrap(), 1.0 / 64.0).unwrap();
        let e = principal_eigen2d(&g, Bc::Mixed).unwrap();
        assert!((e.lambda / (PI * PI) - 1.0).abs() < 0.02, "{}", e.lambda);
        assert!((e.m.0 - 0.5).abs() < 1e-9);
    }

    #[test]
    fn eigenvalue_convergence_order() {
        let spec = DomainSpec::profile_str("0.5").unwrap();
        let want = 2.0 * PI * PI;
        let errs: Vec<f64> = [16.0, 32.0, 64.0]
            .iter()
            .map(|n| (principal_eigen2d(&build_grid(&spec, 1.0 / n).unwrap(), Bc::Dirichlet).unwrap().lambda - want).abs())
            .collect();
        assert!(errs[0] / errs[1] >= 3.0 && errs[1] / errs[2] >= 3.0, "{errs:?}");
    }

    #[test]
    fn argmax_is_scale_invariant() {
        let g = build_grid(&DomainSpec::profile_str("0.2+0.3*x").unwrap(), 1.0 / 32.0).unwrap();
        let e = principal_eigen2d(&g, Bc::Dirichlet).unwrap();
        for k in [0.5, 3.0, 1e3] {
            let scaled: Vec<f64> = e.values.iter().map(|v| v * k).collect();
            let mut best = g.unknowns[0];
            for &id in &g.unknowns {
                if scaled[id] > scaled[best] {
                    best = id;
                }
            }
            assert_eq!(best, e.argmax_node);
            let (x, _) = g.xy(best);
            let off = refine(&g, &scaled, best, EAST, WEST);
            assert!((x + off - e.m.0).abs() < 1e-12);
        }
    }
}
