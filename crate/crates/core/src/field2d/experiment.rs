//! Grid-refinement experiment: `c_x` and `m_x` on a profile domain over
//! halving `h`, with Richardson extrapolation and a conservative verdict on
//! whether `c < m`.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom2d::{axis_candidates, build_grid, DomainSpec};
use crate::numeric::{argmin, parabolic_vertex};

use super::eigen::principal_eigen2d;
use super::flux::flux_probe;
use super::robin::harmonic_center;
use super::system::Bc;

/// Core radius of the mixed-mode flux probe, in cells.
pub const MIXED_EPS_CELLS: f64 = 5.0;
/// Drift multiple a separation must exceed to count as evidence.
pub const DRIFT_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelResult {
    pub h: f64,
    pub c_x: f64,
    pub m_x: f64,
    /// `|m_x − c_x|`.
    pub gap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Extrapolated {
    pub c_x: f64,
    pub m_x: f64,
    pub order_c: Option<f64>,
    pub order_m: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConjectureStatus {
    Supports,
    Contradicts,
    Unresolved,
}

impl ConjectureStatus {
    pub fn name(self) -> &'static str {
        match self {
            ConjectureStatus::Supports => "supports",
            ConjectureStatus::Contradicts => "contradicts",
            ConjectureStatus::Unresolved => "unresolved",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub domain: String,
    pub bc: Bc,
    pub levels: Vec<LevelResult>,
    pub extrapolated: Extrapolated,
    /// `max(|Δc_x|, |Δm_x|)` between the two finest levels.
    pub drift: f64,
    pub status: ConjectureStatus,
}

/// Richardson extrapolation from the last three values of a sequence
/// computed at `h, h/2, h/4`. Returns the limit and the observed order; the
/// finest value (and no order) when the differences do not contract.
pub fn richardson(values: &[f64]) -> (f64, Option<f64>) {
    let n = values.len();
    let (a, b, c) = (values[n - 3], values[n - 2], values[n - 1]);
    let (d1, d2) = (b - a, c - b);
    if d2 == 0.0 {
        return (c, None);
    }
    if d1 == 0.0 {
        return (c, None);
    }
    let p = (d1.abs() / d2.abs()).log2();
    if p > 0.0 && p.is_finite() {
        (c + d2 / (2f64.powf(p) - 1.0), Some(p))
    } else {
        (c, Some(p))
    }
}

/// Runs the experiment at the given `h` levels (at least three, each half
/// the previous).
pub fn open_problem_experiment(spec: &DomainSpec, bc: Bc, hs: &[f64]) -> Result<ExperimentReport> {
    if !spec.is_profile() {
        return Err(Error::InvalidArgument("the experiment needs a profile domain".into()));
    }
    if hs.len() < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 levels, got {}", hs.len())));
    }
    if hs.windows(2).any(|w| (w[1] * 2.0 - w[0]).abs() > 1e-12 * w[0]) {
        return Err(Error::InvalidArgument("levels must halve h".into()));
    }
    let levels = hs
        .iter()
        .map(|&h| level(spec, bc, h))
        .collect::<Result<Vec<_>>>()?;
    let cs: Vec<f64> = levels.iter().map(|l| l.c_x).collect();
    let ms: Vec<f64> = levels.iter().map(|l| l.m_x).collect();
    let (c_x, order_c) = richardson(&cs);
    let (m_x, order_m) = richardson(&ms);
    let n = levels.len();
    let drift = (cs[n - 1] - cs[n - 2]).abs().max((ms[n - 1] - ms[n - 2]).abs());
    let margin = DRIFT_FACTOR * drift + 0.1 * hs[n - 1];
    let status = if c_x + margin < m_x {
        ConjectureStatus::Supports
    } else if m_x + margin < c_x {
        ConjectureStatus::Contradicts
    } else {
        ConjectureStatus::Unresolved
    };
    Ok(ExperimentReport {
        domain: spec.label().to_string(),
        bc,
        levels,
        extrapolated: Extrapolated {
            c_x,
            m_x,
            order_c,
            order_m,
        },
        drift,
        status,
    })
}

fn level(spec: &DomainSpec, bc: Bc, h: f64) -> Result<LevelResult> {
    let grid = build_grid(spec, h)?;
    let c_x = match bc {
        Bc::Dirichlet => harmonic_center(&grid)?.0 .0,
        Bc::Mixed => flux_minimizer(&grid, MIXED_EPS_CELLS * grid.h)?,
    };
    let m_x = principal_eigen2d(&grid, bc)?.m.0;
    Ok(LevelResult {
        h: grid.h,
        c_x,
        m_x,
        gap: (m_x - c_x).abs(),
    })
}

/// Axis point of least ε-flux under mixed conditions, refined by a parabola
/// through the best candidate and its neighbours.
fn flux_minimizer(grid: &crate::geom2d::Grid2D, eps: f64) -> Result<f64> {
    let xs = axis_candidates(grid)?;
    let probes: Vec<(f64, Option<f64>)> = xs
        .par_iter()
        .map(|&x| match flux_probe(grid, (x, 0.0), eps, Bc::Mixed) {
            Ok(f) => Ok((x, Some(f.flux))),
            Err(Error::TooCloseToBoundary { .. }) => Ok((x, None)),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    let admissible: Vec<(f64, f64)> = probes
        .into_iter()
        .filter_map(|(x, f)| f.map(|f| (x, f)))
        .collect();
    if admissible.is_empty() {
        return Err(Error::NoCandidates);
    }
    let fluxes: Vec<f64> = admissible.iter().map(|a| a.1).collect();
    let k = argmin(&fluxes);
    let x = admissible[k].0;
    if k == 0 || k + 1 == admissible.len() {
        return Ok(x);
    }
    // the parabola's vertex for −F is the minimizer of F
    Ok(parabolic_vertex(x, grid.h, -fluxes[k - 1], -fluxes[k], -fluxes[k + 1]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn richardson_recovers_second_order() {
        let seq: Vec<f64> = [0.1, 0.05, 0.025].iter().map(|h| 0.3 + 2.0 * h * h).collect();
        let (lim, p) = richardson(&seq);
        assert!((lim - 0.3).abs() < 1e-12);
        assert!((p.unwrap() - 2.0).abs() < 1e-9);
        assert_eq!(richardson(&[0.5, 0.5, 0.5]), (0.5, None));
    }

    #[test]
    fn rectangle_is_the_equality_case() {
        let spec = DomainSpec::profile_str("0.5").unwrap();
        let r = open_problem_experiment(&spec, Bc::Dirichlet, &[1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0])
            .unwrap();
        for l in &r.levels {
            assert!((l.c_x - 0.5).abs() <= 2.0 * l.h, "{l:?}");
            assert!((l.m_x - 0.5).abs() < 1e-9);
        }
        assert_eq!(r.status, ConjectureStatus::Unresolved);
    }

    #[test]
    fn level_checks() {
        let spec = DomainSpec::profile_str("0.5").unwrap();
        assert!(open_problem_experiment(&spec, Bc::Dirichlet, &[0.0625, 0.03125]).is_err());
        assert!(open_problem_experiment(&spec, Bc::Dirichlet, &[0.0625, 0.03125, 0.02]).is_err());
        assert!(open_problem_experiment(&DomainSpec::unit_disk(), Bc::Dirichlet, &[0.1, 0.05, 0.025]).is_err());
    }
}
