//! Prüfer angle in resistance time.
//!
//! With `t = R(x)` and `A(t) = a(x(t))`, the eigen equation
//! `(a u′)′ = −λu` becomes `U̇ = V`, `V̇ = −λ A(t) U`, and the angle
//! `θ = arg(U + iV)` obeys `θ̇ = −sin²θ − λ A(t) cos²θ` with `θ(0) = π/2`.

use std::f64::consts::FRAC_PI_2;

use crate::coeffs::ResistanceMap;
use crate::error::{Error, Result};
use crate::numeric::hermite;

/// `x(t)` and `A(t)` on a uniform grid of half-steps over `[0, T]`.
#[derive(Debug, Clone)]
pub(crate) struct TimeTable {
    pub total: f64,
    /// Number of half-step intervals; the grid has `halves + 1` points.
    pub halves: usize,
    pub x: Vec<f64>,
    pub a: Vec<f64>,
}

impl TimeTable {
    /// Table fit for RK4 with any step count dividing `halves / 2`.
    pub fn new(rm: &ResistanceMap, halves: usize) -> Result<TimeTable> {
        let total = rm.total();
        let mut x = Vec::with_capacity(halves + 1);
        let mut a = Vec::with_capacity(halves + 1);
        for j in 0..=halves {
            let t = if j == halves { total } else { total * j as f64 / halves as f64 };
            let xj = rm.inverse(t)?;
            x.push(xj);
            a.push(rm.profile().value(xj));
        }
        Ok(TimeTable { total, halves, x, a })
    }

    fn stride(&self, steps: usize) -> usize {
        assert!(self.halves % (2 * steps) == 0, "step count does not divide the table");
        self.halves / (2 * steps)
    }
}

#[inline]
pub(crate) fn angle_rate(theta: f64, lambda: f64, a: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    -s * s - lambda * a * c * c
}

/// Sampled Prüfer angle for one trial eigenvalue.
#[derive(Debug, Clone)]
pub struct PruferTrace {
    pub lambda: f64,
    pub steps: usize,
    /// `T = R(1)`.
    pub total: f64,
    pub times: Vec<f64>,
    pub theta: Vec<f64>,
    /// `θ̇` at each sample, from the right-hand side.
    pub rate: Vec<f64>,
    /// First time `θ` reaches 0, if it does.
    pub t_m: Option<f64>,
}

/// RK4 for θ over `steps` steps; returns `θ(T)` and optionally the samples.
pub(crate) fn integrate_theta(
    table: &TimeTable,
    lambda: f64,
    steps: usize,
    record: bool,
) -> (f64, Vec<f64>, Vec<f64>) {
    let stride = table.stride(steps);
    let dt = table.total / steps as f64;
    let mut theta = FRAC_PI_2;
    let mut thetas = Vec::new();
    let mut rates = Vec::new();
    if record {
        thetas.reserve(steps + 1);
        rates.reserve(steps + 1);
    }
    for n in 0..steps {
        let a0 = table.a[2 * n * stride];
        let ah = table.a[(2 * n + 1) * stride];
        let a1 = table.a[(2 * n + 2) * stride];
        let k1 = angle_rate(theta, lambda, a0);
        if record {
            thetas.push(theta);
            rates.push(k1);
        }
        let k2 = angle_rate(theta + 0.5 * dt * k1, lambda, ah);
        let k3 = angle_rate(theta + 0.5 * dt * k2, lambda, ah);
        let k4 = angle_rate(theta + dt * k3, lambda, a1);
        theta += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    if record {
        thetas.push(theta);
        rates.push(angle_rate(theta, lambda, table.a[table.halves]));
    }
    (theta, thetas, rates)
}

/// RK4 for `(U, V)` from `U(0) = 0`, `V(0) = 1`.
pub(crate) fn integrate_uv(table: &TimeTable, lambda: f64, steps: usize) -> (Vec<f64>, Vec<f64>) {
    let stride = table.stride(steps);
    let dt = table.total / steps as f64;
    let (mut u, mut v) = (0.0, 1.0);
    let mut us = Vec::with_capacity(steps + 1);
    let mut vs = Vec::with_capacity(steps + 1);
    us.push(u);
    vs.push(v);
    for n in 0..steps {
        let a0 = table.a[2 * n * stride];
        let ah = table.a[(2 * n + 1) * stride];
        let a1 = table.a[(2 * n + 2) * stride];
        let (k1u, k1v) = (v, -lambda * a0 * u);
        let (k2u, k2v) = (v + 0.5 * dt * k1v, -lambda * ah * (u + 0.5 * dt * k1u));
        let (k3u, k3v) = (v + 0.5 * dt * k2v, -lambda * ah * (u + 0.5 * dt * k2u));
        let (k4u, k4v) = (v + dt * k3v, -lambda * a1 * (u + dt * k3u));
        u += dt / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        us.push(u);
        vs.push(v);
    }
    (us, vs)
}

impl PruferTrace {
    pub(crate) fn build(
        rm: &ResistanceMap,
        table: &TimeTable,
        lambda: f64,
        steps: usize,
    ) -> Result<PruferTrace> {
        let (_, theta, rate) = integrate_theta(table, lambda, steps, true);
        let total = table.total;
        let times = (0..=steps)
            .map(|j| if j == steps { total } else { total * j as f64 / steps as f64 })
            .collect();
        let mut trace = PruferTrace {
            lambda,
            steps,
            total,
            times,
            theta,
            rate,
            t_m: None,
        };
        trace.t_m = trace.crossing(rm, 0.0)?;
        Ok(trace)
    }

    pub fn theta_end(&self) -> f64 {
        *self.theta.last().unwrap()
    }

    /// θ at an arbitrary time by cubic Hermite interpolation of the samples.
    pub fn theta_at(&self, t: f64) -> f64 {
        let n = self.steps;
        let dt = self.total / n as f64;
        let j = ((t / dt).floor() as isize).clamp(0, n as isize - 1) as usize;
        hermite(
            self.times[j],
            self.times[j + 1],
            self.theta[j],
            self.theta[j + 1],
            self.rate[j],
            self.rate[j + 1],
            t,
        )
    }

    /// First time θ falls through `level`: linear interpolation of the
    /// sign change, then Newton polish with θ̇ from the right-hand side.
    pub fn crossing(&self, rm: &ResistanceMap, level: f64) -> Result<Option<f64>> {
        let Some(j) = self
            .theta
            .windows(2)
            .position(|w| w[0] > level && w[1] <= level)
        else {
            return Ok(None);
        };
        let (t0, t1) = (self.times[j], self.times[j + 1]);
        let (y0, y1) = (self.theta[j] - level, self.theta[j + 1] - level);
        let mut t = t0 + (t1 - t0) * y0 / (y0 - y1);
        for _ in 0..3 {
            let th = self.theta_at(t);
            let a = rm.profile().value(rm.inverse(t.clamp(0.0, self.total))?);
            let step = (th - level) / angle_rate(th, self.lambda, a);
            t = (t - step).clamp(t0, t1);
            if step.abs() <= 1e-15 * self.total {
                break;
            }
        }
        Ok(Some(t))
    }
}

/// Integrates θ for a given λ over the full resistance interval.
pub fn prufer_shoot(rm: &ResistanceMap, lambda: f64, steps: usize) -> Result<PruferTrace> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidArgument(format!("λ = {lambda} must be positive")));
    }
    if steps == 0 {
        return Err(Error::InvalidArgument("steps must be positive".into()));
    }
    let table = TimeTable::new(rm, 2 * steps)?;
    PruferTrace::build(rm, &table, lambda, steps)
}
