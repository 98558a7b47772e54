//! Heat flow `u̇ = (a u′)′` with cold ends, to watch the temperature
//! maximum settle at the warmest point.
//!
//! Second-order backward differences (BDF2) on the finite-difference
//! operator, started by two backward-Euler half-steps. Crank–Nicolson would
//! be the textbook choice, but its stiff modes decay at a rate near 1 per
//! step and, over long horizons, outlive the principal mode they are meant
//! to reveal; BDF2 damps them to zero.

use crate::coeffs::CoefficientProfile;
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::numeric::{argmax, parabolic_vertex};

use super::fd::{fd_grid, fd_operator};

#[derive(Debug, Clone, Copy)]
pub struct HeatOptions {
    /// Interior grid nodes.
    pub n: usize,
}

impl Default for HeatOptions {
    fn default() -> Self {
        HeatOptions { n: 4096 }
    }
}

/// One record per time step, the initial state included.
#[derive(Debug, Clone, Default)]
pub struct HeatTrajectory {
    pub times: Vec<f64>,
    pub argmax: Vec<f64>,
    pub max: Vec<f64>,
    /// Grid spacing of the underlying discretization.
    pub h: f64,
}

impl HeatTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_argmax(&self) -> f64 {
        *self.argmax.last().unwrap()
    }

    /// Least-squares slope of `ln max` against time over the later half of
    /// the records; approaches `−λ₀`.
    pub fn decay_rate(&self) -> f64 {
        let start = self.len() / 2;
        let t = &self.times[start..];
        let y: Vec<f64> = self.max[start..].iter().map(|m| m.ln()).collect();
        let n = t.len() as f64;
        let tm = t.iter().sum::<f64>() / n;
        let ym = y.iter().sum::<f64>() / n;
        let sxy: f64 = t.iter().zip(&y).map(|(a, b)| (a - tm) * (b - ym)).sum();
        let sxx: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
        sxy / sxx
    }
}

/// Evolves `u0` from `t = 0` to `t_end`.
pub fn heat_evolve(
    profile: &CoefficientProfile,
    u0: &Expr,
    t_end: f64,
    dt: f64,
    opts: HeatOptions,
) -> Result<HeatTrajectory> {
    let x = fd_grid(opts.n);
    let ends = [u0.eval(0.0)?, u0.eval(1.0)?];
    let interior = x[1..=opts.n]
        .iter()
        .map(|&xi| u0.eval(xi))
        .collect::<Result<Vec<_>>>()?;
    let peak = interior.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if ends.iter().any(|e| e.abs() > 1e-8 * peak.max(f64::MIN_POSITIVE)) {
        return Err(Error::InvalidArgument(format!(
            "initial condition must vanish at both ends (u0(0) = {}, u0(1) = {})",
            ends[0], ends[1]
        )));
    }
    heat_evolve_samples(profile, &interior, t_end, dt)
}

/// Evolves interior samples `u0` on the grid `x_i = i/(n+1)`,
/// `n = u0.len()`.
pub fn heat_evolve_samples(
    profile: &CoefficientProfile,
    u0: &[f64],
    t_end: f64,
    dt: f64,
) -> Result<HeatTrajectory> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    if !(t_end >= 0.0) || !t_end.is_finite() {
        return Err(Error::InvalidArgument(format!("t_end = {t_end} must be nonnegative")));
    }
    let n = u0.len();
    if let Some(i) = u0.iter().position(|v| !(*v >= 0.0)) {
        return Err(Error::InvalidArgument(format!(
            "initial condition negative at x = {}",
            (i + 1) as f64 / (n + 1) as f64
        )));
    }
    if u0.iter().all(|&v| v == 0.0) {
        return Err(Error::InvalidArgument("initial condition is identically zero".into()));
    }
    let op = fd_operator(profile, n)?;
    let h = 1.0 / (n + 1) as f64;
    let x = fd_grid(n);
    let half = op.affine(1.0, 0.5 * dt).factor();
    let bdf = op.affine(1.0, 2.0 * dt / 3.0).factor();

    let mut traj = HeatTrajectory {
        h,
        ..Default::default()
    };
    let mut record = |t: f64, u: &[f64]| {
        let i = argmax(u);
        let l = if i == 0 { 0.0 } else { u[i - 1] };
        let r = if i + 1 == n { 0.0 } else { u[i + 1] };
        traj.times.push(t);
        traj.argmax.push(parabolic_vertex(x[i + 1], h, l, u[i], r));
        traj.max.push(u[i]);
    };

    let steps = (t_end / dt).round() as usize;
    let mut u = u0.to_vec();
    record(0.0, &u);
    if steps == 0 {
        return Ok(traj);
    }
    let mut prev = u.clone();
    u = half.solve(&half.solve(&u));
    record(dt, &u);
    for step in 2..=steps {
        let rhs: Vec<f64> = u.iter().zip(&prev).map(|(a, b)| (4.0 * a - b) / 3.0).collect();
        prev = std::mem::replace(&mut u, bdf.solve(&rhs));
        record(step as f64 * dt, &u);
    }
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::ResistanceMap;
    use crate::expr::parse;
    use crate::sturm::{fd_eigen_oracle, principal_eigen};

    const ROUGH: &str = "x*(1-x)*(1+0.5*sin(7*pi*x))";

    #[test]
    fn constant_settles_at_midpoint() {
        let one = CoefficientProfile::from_expr("1").unwrap();
        let tr = heat_evolve(&one, &parse(ROUGH).unwrap(), 1.0, 1e-3, HeatOptions::default())
            .unwrap();
        assert!((tr.final_argmax() - 0.5).abs() <= 2.0 * tr.h);
        assert_eq!(tr.len(), 1001);
    }

    #[test]
    fn exponential_settles_at_warmest_point() {
        let p = CoefficientProfile::from_expr("exp(x)").unwrap();
        let m = principal_eigen(&ResistanceMap::new(&p).unwrap()).unwrap().m;
        let tr = heat_evolve(&p, &parse(ROUGH).unwrap(), 1.0, 1e-3, HeatOptions::default())
            .unwrap();
        assert!((tr.final_argmax() - m).abs() <= 2.0 * tr.h);
    }

    #[test]
    fn eigenmode_stays_put_and_decays_at_lambda() {
        let p = CoefficientProfile::from_expr("1+2*x").unwrap();
        let mode = fd_eigen_oracle(&p, 1023, 0).unwrap();
        let tr = heat_evolve_samples(&p, &mode.u[1..=1023], 0.2, 1e-3).unwrap();
        let first = tr.argmax[0];
        assert!(tr.argmax.iter().all(|a| (a - first).abs() <= tr.h));
        let rate = tr.decay_rate();
        assert!((rate / -mode.lambda - 1.0).abs() < 0.01, "{rate} vs {}", mode.lambda);
    }

    #[test]
    fn rejects_bad_input() {
        let one = CoefficientProfile::from_expr("1").unwrap();
        let ok = parse(ROUGH).unwrap();
        let o = HeatOptions { n: 255 };
        assert!(heat_evolve(&one, &ok, 1.0, 0.0, o).is_err());
        assert!(heat_evolve(&one, &ok, 1.0, -1e-3, o).is_err());
        assert!(heat_evolve(&one, &parse("x*(1-x)-0.01").unwrap(), 1.0, 1e-3, o).is_err());
        assert!(heat_evolve(&one, &parse("1+x").unwrap(), 1.0, 1e-3, o).is_err());
        assert!(heat_evolve(&one, &parse("0*x").unwrap(), 1.0, 1e-3, o).is_err());
    }
}
