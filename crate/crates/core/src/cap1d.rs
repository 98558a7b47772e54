//! The 1D flux `F(s) = a(s)(u₋′(s) − u₊′(s))` out of an interior point
//! held at unit potential, and the minimal capacity point `c[L]`.
//!
//! With `u₋(x) = R(x)/R(s)` on `[0, s]` and `u₊(x) = (R(1) − R(x))/(R(1) − R(s))`
//! on `[s, 1]` the flux collapses to `1/R(s) + 1/(R(1) − R(s))`, which is
//! smallest where `R(s) = R(1)/2`.

use crate::coeffs::ResistanceMap;
use crate::error::{Error, Result};
use crate::numeric::{argmin, bisect_increasing, golden_min, parabolic_vertex};

fn check_interior(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "s",
            value: s,
            lo: 0.0,
            hi: 1.0,
        })
    }
}

/// Closed-form flux `1/R(s) + 1/(R(1) − R(s))`.
pub fn flux(rm: &ResistanceMap, s: f64) -> Result<f64> {
    check_interior(s)?;
    let r = rm.resistance(s)?;
    Ok(1.0 / r + 1.0 / (rm.total() - r))
}

/// Flux from the definition: the two one-sided potentials are built from
/// quadrature and differentiated with second-order one-sided stencils of
/// step `h`.
pub fn flux_direct(rm: &ResistanceMap, s: f64, h: f64) -> Result<f64> {
    check_interior(s)?;
    if !(h > 0.0) || s - 2.0 * h < 0.0 || s + 2.0 * h > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "stencil [s-2h, s+2h] = [{}, {}] leaves [0, 1]",
            s - 2.0 * h,
            s + 2.0 * h
        )));
    }
    let total = rm.total();
    let rs = rm.resistance(s)?;
    let u_minus = |x: f64| -> Result<f64> { Ok(rm.resistance(x)? / rs) };
    let u_plus = |x: f64| -> Result<f64> { Ok((total - rm.resistance(x)?) / (total - rs)) };
    let d_minus = (3.0 * u_minus(s)? - 4.0 * u_minus(s - h)? + u_minus(s - 2.0 * h)?) / (2.0 * h);
    let d_plus = (-3.0 * u_plus(s)? + 4.0 * u_plus(s + h)? - u_plus(s + 2.0 * h)?) / (2.0 * h);
    Ok(rm.profile().value(s) * (d_minus - d_plus))
}

/// `c[L]`: the point bisecting the total resistance.
pub fn capacity_point(rm: &ResistanceMap) -> Result<f64> {
    let half = 0.5 * rm.total();
    bisect_increasing(|s| Ok(rm.resistance(s)? - half), 0.0, 1.0, rm.abs_tol())
}

/// Sampled flux curve with its refined minimizer.
#[derive(Debug, Clone)]
pub struct FluxCurve {
    pub s: Vec<f64>,
    pub flux: Vec<f64>,
    pub argmin: usize,
    pub minimizer: f64,
    /// False when golden-section refinement misbehaved and `minimizer` is
    /// the grid argmin instead.
    pub refined: bool,
}

/// Samples `F` at `s_i = i/(N+1)`, `i = 1..=N`, then refines the grid argmin
/// by golden section to width `1e-9` and a final parabolic polish.
pub fn flux_curve(rm: &ResistanceMap, n: usize) -> Result<FluxCurve> {
    if n < 16 {
        return Err(Error::InvalidArgument(format!("grid count {n} < 16")));
    }
    let s: Vec<f64> = (1..=n).map(|i| i as f64 / (n + 1) as f64).collect();
    let values = s.iter().map(|&x| flux(rm, x)).collect::<Result<Vec<_>>>()?;
    let k = argmin(&values);
    let lo = if k == 0 { 0.5 * s[0] } else { s[k - 1] };
    let hi = if k + 1 == n { 0.5 * (s[k] + 1.0) } else { s[k + 1] };
    let g = golden_min(|x| flux(rm, x), lo, hi, 1e-9)?;
    let (minimizer, refined) = if g.clean && g.value <= values[k] {
        (polish(rm, g.x, lo, hi)?, true)
    } else {
        (s[k], false)
    };
    Ok(FluxCurve {
        s,
        flux: values,
        argmin: k,
        minimizer,
        refined,
    })
}

/// Near its minimum `F` is flat to rounding over a window of roughly
/// `1e-8`, which is as far as comparisons alone can narrow it. Two
/// three-point parabola fits at spacing `POLISH_STEP`, where curvature still
/// dominates rounding, pin the vertex down further.
const POLISH_STEP: f64 = 1e-5;

fn polish(rm: &ResistanceMap, x0: f64, lo: f64, hi: f64) -> Result<f64> {
    let d = POLISH_STEP;
    let mut x = x0;
    for _ in 0..2 {
        if x - d <= lo.max(0.0) || x + d >= hi.min(1.0) {
            return Ok(x0);
        }
        let (l, c, r) = (flux(rm, x - d)?, flux(rm, x)?, flux(rm, x + d)?);
        if !(l - 2.0 * c + r > 0.0) {
            return Ok(x0);
        }
        x = parabolic_vertex(x, d, l, c, r);
    }
    // a polish that wanders off the golden bracket has been fooled
    Ok(if (x - x0).abs() <= 1e-6 { x } else { x0 })
}

/// The flux minimizer; independent check on [`capacity_point`].
pub fn flux_argmin(rm: &ResistanceMap, n: usize) -> Result<f64> {
    Ok(flux_curve(rm, n)?.minimizer)
}
