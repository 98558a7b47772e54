//! Fields on masked lattices: Dirichlet solves, the Robin function and the
//! harmonic center, principal eigenpairs, ε-flux probes, and the
//! grid-refinement experiment comparing `c` and `m` on profile domains.

mod eigen;
mod experiment;
mod flux;
mod robin;
pub mod sparse;
mod system;

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::geom2d::Grid2D;

pub use eigen::{principal_eigen2d, EigenPair2D, EIGEN_TOL};
pub use experiment::{
    open_problem_experiment, richardson, ConjectureStatus, Extrapolated, ExperimentReport,
    LevelResult,
};
pub use flux::{flux_probe, FluxProbe};
pub use robin::{harmonic_center, robin_value, RobinProfile, RobinSolver};
pub use sparse::{Method, SolveStats};
pub use system::{Bc, Stencil, System};

/// Relative residual for Dirichlet solves.
pub const SOLVE_TOL: f64 = 1e-12;
/// Slack allowed in the discrete maximum principle.
pub const MAX_PRINCIPLE_SLACK: f64 = 1e-10;

/// Range of the boundary values a solve actually used.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundaryData {
    pub description: String,
    pub min: f64,
    pub max: f64,
}

/// A discrete field over a grid: solved values at unknowns, zero elsewhere.
#[derive(Debug, Clone)]
pub struct ScalarField2D<'g> {
    pub grid: &'g Grid2D,
    pub values: Vec<f64>,
    pub boundary: BoundaryData,
    pub stats: SolveStats,
}

impl ScalarField2D<'_> {
    pub fn unknown_values(&self) -> impl Iterator<Item = f64> + '_ {
        self.grid.unknowns.iter().map(|&id| self.values[id])
    }

    /// Interior values within the boundary data range, up to `slack`.
    pub fn satisfies_max_principle(&self, slack: f64) -> bool {
        let (lo, hi) = (self.boundary.min - slack, self.boundary.max + slack);
        self.unknown_values().all(|v| v >= lo && v <= hi)
    }

    pub fn value_at(&self, x: f64, y: f64) -> Result<f64> {
        interpolate(self.grid, &self.values, x, y)
    }

    pub fn csv(&self) -> String {
        field_csv(self.grid, &self.values)
    }
}

/// "x,y,value" rows over the unknowns.
pub fn field_csv(grid: &Grid2D, values: &[f64]) -> String {
    let mut out = String::from("x,y,value\n");
    for &id in &grid.unknowns {
        let (x, y) = grid.xy(id);
        let _ = writeln!(out, "{x},{y},{}", values[id]);
    }
    out
}

/// Solves the discrete Laplace equation with boundary values `g`.
pub fn solve_dirichlet<'g>(
    grid: &'g Grid2D,
    g: &dyn Fn(f64, f64) -> f64,
    description: &str,
) -> Result<ScalarField2D<'g>> {
    let system = System::new(grid, Bc::Dirichlet, None)?;
    solve_with(&system, g, description)
}

pub(crate) fn solve_with<'g>(
    system: &System<'g>,
    g: &dyn Fn(f64, f64) -> f64,
    description: &str,
) -> Result<ScalarField2D<'g>> {
    let grid = system.grid;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for &id in &grid.unknowns {
        for d in 0..4 {
            if grid.legs[id][d].boundary.is_some() {
                let (x, y) = grid.leg_end(id, d);
                let v = g(x, y);
                if !v.is_finite() {
                    return Err(Error::InvalidArgument(format!(
                        "boundary data not finite at ({x}, {y})"
                    )));
                }
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
    }
    let b = system.rhs(g, 0.0);
    let (u, stats) = system.solve(&b, None, SOLVE_TOL)?;
    Ok(ScalarField2D {
        grid,
        values: system.scatter(&u, 0.0),
        boundary: BoundaryData {
            description: description.to_string(),
            min: lo,
            max: hi,
        },
        stats,
    })
}

fn lagrange4(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Reads a lattice field at an arbitrary point: cubic Lagrange in each
/// direction when the 4×4 neighbourhood consists of unknowns, bilinear when
/// only the surrounding cell does. Lattice points return the nodal value.
pub fn interpolate(grid: &Grid2D, values: &[f64], x: f64, y: f64) -> Result<f64> {
    let gx = x / grid.h - grid.i0 as f64;
    let gy = y / grid.h - grid.j0 as f64;
    let (fx, fy) = (gx.floor(), gy.floor());
    let (tx, ty) = (gx - fx, gy - fy);
    let (bx, by) = (fx as i64, fy as i64);
    let try_weights = |wx: &[f64], wy: &[f64], off: i64| -> Option<f64> {
        let mut acc = 0.0;
        for (a, &cy) in wy.iter().enumerate() {
            for (b, &cx) in wx.iter().enumerate() {
                let w = cx * cy;
                if w == 0.0 {
                    continue;
                }
                let ix = bx + b as i64 - off;
                let iy = by + a as i64 - off;
                if ix < 0 || iy < 0 || ix >= grid.nx as i64 || iy >= grid.ny as i64 {
                    return None;
                }
                let id = grid.id(ix as usize, iy as usize);
                grid.unknown_of[id]?;
                acc += w * values[id];
            }
        }
        Some(acc)
    };
    if let Some(v) = try_weights(&lagrange4(tx), &lagrange4(ty), 1) {
        return Ok(v);
    }
    try_weights(&[1.0 - tx, tx], &[1.0 - ty, ty], 0).ok_or(Error::TooCloseToBoundary { x, y })
}

/// Vertex of the parabola through `(−a, l)`, `(0, c)`, `(b, r)`, as an
/// offset clamped to `[−a, b]`.
pub(crate) fn vertex_offset(a: f64, b: f64, l: f64, c: f64, r: f64) -> f64 {
    // divided differences
    let d1 = (c - l) / a;
    let d2 = (r - c) / b;
    let curv = (d2 - d1) / (a + b);
    if curv == 0.0 {
        return 0.0;
    }
    // Newton form p(s) = l + d1 (s + a) + curv (s + a) s
    let slope0 = d1 + curv * a;
    (-slope0 / (2.0 * curv)).clamp(-a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom2d::{build_grid, DomainSpec};

    #[test]
    fn constants_are_harmonic() {
        for spec in [DomainSpec::unit_disk(), DomainSpec::profile_str("0.2+0.3*x").unwrap()] {
            let g = build_grid(&spec, 1.0 / 32.0).unwrap();
            let f = solve_dirichlet(&g, &|_, _| 1.0, "1").unwrap();
            let err = f.unknown_values().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
            assert!(err <= 1e-10, "{err} {:?}", f.stats);
            assert!(f.satisfies_max_principle(MAX_PRINCIPLE_SLACK));
        }
    }

    #[test]
    fn linear_data_reproduced() {
        let g = build_grid(&DomainSpec::profile_str("0.5").unwrap(), 1.0 / 32.0).unwrap();
        let f = solve_dirichlet(&g, &|x, _| x, "x").unwrap();
        for &id in &g.unknowns {
            assert!((f.values[id] - g.xy(id).0).abs() <= 1e-9);
        }
        let c = build_grid(&DomainSpec::profile_str("0.3+0.1*sin(5*x)").unwrap(), 1.0 / 64.0).unwrap();
        let f = solve_dirichlet(&c, &|x, y| 2.0 * x - y, "2x-y").unwrap();
        for &id in &c.unknowns {
            let (x, y) = c.xy(id);
            assert!((f.values[id] - (2.0 * x - y)).abs() <= 1e-9);
        }
        assert!(f.satisfies_max_principle(MAX_PRINCIPLE_SLACK));
    }

    fn disk_error(h: f64, u: &dyn Fn(f64, f64) -> f64) -> f64 {
        let g = build_grid(&DomainSpec::unit_disk(), h).unwrap();
        let f = solve_dirichlet(&g, u, "exact").unwrap();
        assert!(f.satisfies_max_principle(MAX_PRINCIPLE_SLACK));
        g.unknowns
            .iter()
            .map(|&id| {
                let (x, y) = g.xy(id);
                (f.values[id] - u(x, y)).abs()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn harmonic_quadratic_is_reproduced() {
        // three-point (also uneven) second differences are exact on quadratics
        for h in [1.0 / 16.0, 1.0 / 32.0] {
            assert!(disk_error(h, &|x, y| x * x - y * y) < 1e-9);
        }
    }

    #[test]
    fn second_order_convergence() {
        let u = |x: f64, y: f64| x.exp() * y.cos();
        let e: Vec<f64> = [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]
            .iter()
            .map(|&h| disk_error(h, &u))
            .collect();
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!(ratio > 3.0 && ratio < 5.5, "{e:?}");
        }
    }

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let g = build_grid(&DomainSpec::unit_disk(), 1.0 / 16.0).unwrap();
        let poly = |x: f64, y: f64| x * x * x - 3.0 * x * y * y + 0.5 * y;
        let values: Vec<f64> = (0..g.class.len())
            .map(|id| {
                let (x, y) = g.xy(id);
                poly(x, y)
            })
            .collect();
        let v = interpolate(&g, &values, 0.123, -0.271).unwrap();
        assert!((v - poly(0.123, -0.271)).abs() < 1e-12);
        let node = interpolate(&g, &values, 0.25, 0.5).unwrap();
        assert_eq!(node, values[g.node_at(0.25, 0.5).unwrap()]);
        assert!(interpolate(&g, &values, 0.999, 0.0).is_err());
    }

    #[test]
    fn parabola_vertex_nonuniform() {
        let q = |s: f64| -(s - 0.013) * (s - 0.013);
        let v = vertex_offset(0.02, 0.05, q(-0.02), q(0.0), q(0.05));
        assert!((v - 0.013).abs() < 1e-12);
    }
}
