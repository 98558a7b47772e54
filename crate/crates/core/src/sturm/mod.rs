//! Eigenpairs of `(a u′)′ = −λu`, `u(0) = u(1) = 0`, by Prüfer-angle
//! shooting in resistance time, and the warmest point `m[L]`.
//!
//! The `k`-th eigenvalue is the λ for which the angle starting at `π/2`
//! ends at `−π/2 − kπ`. Along the way the angle passes `−jπ` at the extrema
//! of `u` and `−π/2 − jπ` at its interior nodes, which is how both are
//! located here.

mod fd;
mod heat;
mod prufer;

use std::f64::consts::{FRAC_PI_2, PI};

pub use fd::{fd_eigen_oracle, fd_operator};
pub use heat::{heat_evolve, heat_evolve_samples, HeatOptions, HeatTrajectory};
pub use prufer::{prufer_shoot, PruferTrace};

use crate::coeffs::{Monotonicity, ResistanceMap};
use crate::error::{Error, Result};
use crate::numeric::hermite;
use prufer::{integrate_theta, integrate_uv, TimeTable};

/// Starting RK4 step count.
pub const DEFAULT_STEPS: usize = 4096;
/// Step count past which a failed step-doubling check becomes an error.
pub const MAX_STEPS: usize = 65536;
/// Largest relative change of λ tolerated under step doubling.
pub const STEP_DOUBLING_TOL: f64 = 1e-7;
/// Upper end of the eigenvalue bracket search.
pub const LAMBDA_LIMIT: f64 = 1.152_921_504_606_847e18; // 2^60

/// Equality slack when comparing `c` and `m` on symmetric problems.
pub const EQUALITY_TOL: f64 = 1e-9;

/// An eigenpair sampled on `[0, 1]`, normalized to `max |u| = 1` with
/// `u > 0` near `x = 0`.
#[derive(Debug, Clone)]
pub struct EigenPair1D {
    pub index: usize,
    pub lambda: f64,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    /// Location of the largest `|u|`.
    pub m: f64,
    /// Extrema of `u`, left to right (`index + 1` of them).
    pub extrema: Vec<f64>,
    /// Interior zeros of `u`, left to right (`index` of them).
    pub nodes: Vec<f64>,
    /// RK4 steps used (0 for the finite-difference oracle).
    pub steps: usize,
}

impl EigenPair1D {
    pub fn sign_changes(&self) -> usize {
        let inner = &self.u[1..self.u.len() - 1];
        inner.windows(2).filter(|w| (w[0] > 0.0) != (w[1] > 0.0)).count()
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ShootingOptions {
    pub steps: usize,
    pub max_steps: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            steps: DEFAULT_STEPS,
            max_steps: MAX_STEPS,
        }
    }
}

/// Bisection on `θ(T; λ) + π/2 + kπ`, which decreases in λ.
fn shoot_lambda(table: &TimeTable, steps: usize, k: usize) -> Result<f64> {
    let target = -FRAC_PI_2 - k as f64 * PI;
    let g = |lambda: f64| integrate_theta(table, lambda, steps, false).0 - target;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while g(hi) >= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > LAMBDA_LIMIT {
            return Err(Error::BracketNotFound { limit: LAMBDA_LIMIT });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if hi - lo <= 4.0 * f64::EPSILON * hi || mid <= lo || mid >= hi {
            break;
        }
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Eigenvalue with step-doubling control, plus the table and step count it
/// was accepted at.
fn converged_lambda(
    rm: &ResistanceMap,
    k: usize,
    opts: ShootingOptions,
) -> Result<(f64, TimeTable, usize)> {
    let mut steps = opts.steps.max(1);
    loop {
        let table = TimeTable::new(rm, 4 * steps)?;
        let coarse = shoot_lambda(&table, steps, k)?;
        let fine = shoot_lambda(&table, 2 * steps, k)?;
        let shift = (coarse - fine).abs() / fine;
        if shift <= STEP_DOUBLING_TOL {
            return Ok((fine, table, 2 * steps));
        }
        if 2 * steps > opts.max_steps {
            return Err(Error::Precision { shift });
        }
        steps *= 2;
    }
}

pub(crate) struct Shot {
    pub pair: EigenPair1D,
    pub trace: PruferTrace,
}

pub(crate) fn shoot(rm: &ResistanceMap, k: usize, opts: ShootingOptions) -> Result<Shot> {
    let (lambda, table, steps) = converged_lambda(rm, k, opts)?;
    let trace = PruferTrace::build(rm, &table, lambda, steps)?;
    let (mut us, vs) = integrate_uv(&table, lambda, steps);
    let stride = table.halves / steps;
    let mut x: Vec<f64> = (0..=steps).map(|j| table.x[j * stride]).collect();
    x[steps] = 1.0;

    let mut extremum_times = Vec::with_capacity(k + 1);
    for j in 0..=k {
        let t = trace.crossing(rm, -(j as f64) * PI)?.ok_or(Error::NoCrossing)?;
        extremum_times.push(t);
    }
    let mut nodes = Vec::with_capacity(k);
    for j in 0..k {
        let t = trace
            .crossing(rm, -FRAC_PI_2 - j as f64 * PI)?
            .ok_or(Error::NoCrossing)?;
        nodes.push(rm.inverse(t)?);
    }

    let dt = table.total / steps as f64;
    let u_at = |t: f64| {
        let j = ((t / dt).floor() as usize).min(steps - 1);
        hermite(trace.times[j], trace.times[j + 1], us[j], us[j + 1], vs[j], vs[j + 1], t)
    };
    let amplitudes: Vec<f64> = extremum_times.iter().map(|&t| u_at(t).abs()).collect();
    let peak = amplitudes.iter().cloned().fold(0.0, f64::max);
    let best = amplitudes
        .iter()
        .position(|&a| a >= peak * (1.0 - 1e-12))
        .unwrap_or(0);
    let extrema = extremum_times
        .iter()
        .map(|&t| rm.inverse(t))
        .collect::<Result<Vec<_>>>()?;

    let scale = 1.0 / peak;
    us.iter_mut().for_each(|u| *u *= scale);
    us[0] = 0.0;
    us[steps] = 0.0;

    Ok(Shot {
        pair: EigenPair1D {
            index: k,
            lambda,
            x,
            u: us,
            m: extrema[best],
            extrema,
            nodes,
            steps,
        },
        trace,
    })
}

/// The principal eigenpair and the warmest point `m[L]`.
pub fn principal_eigen(rm: &ResistanceMap) -> Result<EigenPair1D> {
    kth_eigen(rm, 0)
}

/// The `k`-th eigenpair (`k` interior nodes).
pub fn kth_eigen(rm: &ResistanceMap, k: usize) -> Result<EigenPair1D> {
    kth_eigen_with(rm, k, ShootingOptions::default())
}

pub fn kth_eigen_with(rm: &ResistanceMap, k: usize, opts: ShootingOptions) -> Result<EigenPair1D> {
    Ok(shoot(rm, k, opts)?.pair)
}

fn require_monotone(rm: &ResistanceMap) -> Result<()> {
    if rm.profile().monotone() == Monotonicity::Verified {
        Ok(())
    } else {
        Err(Error::InvalidArgument(
            "coefficient is not verified monotone increasing".into(),
        ))
    }
}

/// One interval between consecutive zeros of an overtone.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodalInterval {
    pub lo: f64,
    pub hi: f64,
    /// Capacity point of the coefficient restricted to `[lo, hi]`.
    pub c_sub: f64,
    /// Extremum of the eigenfunction inside `[lo, hi]`.
    pub m_sub: f64,
    pub pass: bool,
}

impl NodalInterval {
    pub fn margin(&self) -> f64 {
        self.m_sub - self.c_sub
    }
}

/// Checks `c < m` on every nodal interval of the `k`-th eigenfunction.
pub fn nodal_interval_check(rm: &ResistanceMap, k: usize) -> Result<Vec<NodalInterval>> {
    if k == 0 {
        return Err(Error::InvalidArgument("nodal intervals need k ≥ 1".into()));
    }
    require_monotone(rm)?;
    let pair = kth_eigen(rm, k)?;
    let mut ends = vec![0.0];
    ends.extend_from_slice(&pair.nodes);
    ends.push(1.0);
    ends.windows(2)
        .zip(&pair.extrema)
        .map(|(w, &m_sub)| {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (rm.resistance(lo)? + rm.resistance(hi)?);
            let c_sub = rm.inverse(mid)?;
            Ok(NodalInterval {
                lo,
                hi,
                c_sub,
                m_sub,
                pass: c_sub < m_sub + EQUALITY_TOL,
            })
        })
        .collect()
}

/// The angles on either side of the zero crossing, compared at equal time
/// offsets: `φ(τ) = −θ(t_m − τ)` and `ψ(τ) = θ(t_m + τ)`.
#[derive(Debug, Clone)]
pub struct ComparisonWitness {
    pub tau: Vec<f64>,
    pub phi: Vec<f64>,
    pub psi: Vec<f64>,
    pub t_m: f64,
    /// Time after `t_m` at which `ψ` reaches `−π/2`.
    pub tau_star: f64,
    pub total: f64,
    /// `min (φ − ψ)` over `τ ∈ (0, τ*]`.
    pub margin: f64,
    /// `max |φ − ψ|` over all samples.
    pub max_gap: f64,
}

impl ComparisonWitness {
    /// `|t_m + τ* − T|`.
    pub fn endpoint_residual(&self) -> f64 {
        (self.t_m + self.tau_star - self.total).abs()
    }
}

pub fn comparison_witness(rm: &ResistanceMap) -> Result<ComparisonWitness> {
    require_monotone(rm)?;
    let shot = shoot(rm, 0, ShootingOptions::default())?;
    let trace = shot.trace;
    let t_m = trace.t_m.ok_or(Error::NoCrossing)?;
    let total = trace.total;
    let t_end = trace.crossing(rm, -FRAC_PI_2)?.unwrap_or(total).min(total);
    let tau_star = t_end - t_m;
    let reach = tau_star.min(t_m);
    let dt = total / trace.steps as f64;
    let mut tau: Vec<f64> = (0..).map(|j| j as f64 * dt).take_while(|&t| t < reach).collect();
    tau.push(reach);
    let phi: Vec<f64> = tau.iter().map(|&s| -trace.theta_at((t_m - s).max(0.0))).collect();
    let psi: Vec<f64> = tau.iter().map(|&s| trace.theta_at(t_m + s)).collect();
    let gaps: Vec<f64> = phi.iter().zip(&psi).map(|(p, q)| p - q).collect();
    let margin = gaps[1..].iter().cloned().fold(f64::INFINITY, f64::min);
    let max_gap = gaps.iter().map(|g| g.abs()).fold(0.0, f64::max);
    Ok(ComparisonWitness {
        tau,
        phi,
        psi,
        t_m,
        tau_star,
        total,
        margin,
        max_gap,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::CoefficientProfile;

    fn rm(src: &str) -> ResistanceMap {
        ResistanceMap::new(&CoefficientProfile::from_expr(src).unwrap()).unwrap()
    }

    #[test]
    fn prufer_examples() {
        let one = rm("1");
        let pi2 = PI * PI;
        let tr = prufer_shoot(&one, pi2, 4096).unwrap();
        assert!((tr.theta_end() + FRAC_PI_2).abs() < 1e-8);
        assert!((tr.t_m.unwrap() - 0.5).abs() < 1e-8);
        assert_eq!(tr.theta[0], FRAC_PI_2);
        assert!(tr.theta.windows(2).all(|w| w[1] < w[0]));
        let under = prufer_shoot(&one, pi2 / 4.0, 4096).unwrap();
        assert!(under.theta_end() > -FRAC_PI_2);
        let tiny = prufer_shoot(&rm("exp(x)"), 1e-9, 512).unwrap();
        assert!(tiny.theta_end() > -FRAC_PI_2);
        assert!(prufer_shoot(&one, 0.0, 16).is_err());
    }

    #[test]
    fn constant_coefficient_pair() {
        let p = principal_eigen(&rm("1")).unwrap();
        assert!((p.lambda - PI * PI).abs() / (PI * PI) < 1e-6);
        assert!((p.m - 0.5).abs() < 1e-6);
        assert!(p.u[1..p.u.len() - 1].iter().all(|&u| u > 0.0));
        assert_eq!((p.u[0], *p.u.last().unwrap()), (0.0, 0.0));
    }

    #[test]
    fn overtones_of_constant_coefficient() {
        let one = rm("1");
        let p1 = kth_eigen(&one, 1).unwrap();
        assert!((p1.lambda - 4.0 * PI * PI).abs() / (4.0 * PI * PI) < 1e-6);
        assert!((p1.nodes[0] - 0.5).abs() < 1e-6);
        assert!((p1.extrema[0] - 0.25).abs() < 1e-6);
        assert!((p1.extrema[1] - 0.75).abs() < 1e-6);
        let p2 = kth_eigen(&one, 2).unwrap();
        assert!((p2.nodes[0] - 1.0 / 3.0).abs() < 1e-6);
        assert!((p2.nodes[1] - 2.0 / 3.0).abs() < 1e-6);
        assert_eq!(p2.sign_changes(), 2);
    }

    #[test]
    fn first_overtone_of_exponential_has_one_node() {
        let e = rm("exp(x)");
        let p = kth_eigen(&e, 1).unwrap();
        assert_eq!(p.sign_changes(), 1);
        let fd = fd_eigen_oracle(e.profile(), 4096, 1).unwrap();
        assert_eq!(fd.sign_changes(), 1);
        assert!((p.nodes[0] - fd.nodes[0]).abs() < 1e-5);
    }

    #[test]
    fn theorem_instance() {
        let map = rm("1+5*x");
        let c = crate::cap1d::capacity_point(&map).unwrap();
        assert!(principal_eigen(&map).unwrap().m > c);
    }

    #[test]
    fn nodal_intervals() {
        let one = nodal_interval_check(&rm("1"), 1).unwrap();
        assert_eq!(one.len(), 2);
        for iv in &one {
            assert!((iv.c_sub - 0.5 * (iv.lo + iv.hi)).abs() < 1e-6);
            assert!(iv.margin().abs() < 1e-6 && iv.pass);
        }
        let e = nodal_interval_check(&rm("exp(x)"), 1).unwrap();
        assert_eq!(e.len(), 2);
        assert!(e.iter().all(|iv| iv.pass && iv.margin() > 0.0));
        let l = nodal_interval_check(&rm("1+x"), 2).unwrap();
        assert_eq!(l.len(), 3);
        assert!(l.iter().all(|iv| iv.pass && iv.margin() > 0.0));
        assert!(nodal_interval_check(&rm("sin(pi*x)+0.1"), 1).is_err());
    }

    #[test]
    fn witness_constant_is_symmetric() {
        let w = comparison_witness(&rm("1")).unwrap();
        assert!(w.max_gap <= 1e-9, "{}", w.max_gap);
        assert!(w.margin.abs() <= 1e-9);
        assert!(w.endpoint_residual() < 1e-8);
        assert_eq!(w.phi.len(), w.psi.len());
        assert!(w.phi[0].abs() < 1e-12 && w.psi[0].abs() < 1e-12);
    }

    #[test]
    fn witness_monotone_profiles() {
        for src in ["exp(x)", "1+5*x"] {
            let w = comparison_witness(&rm(src)).unwrap();
            assert!(w.margin > 0.0, "{src}: {}", w.margin);
            assert!(w.t_m > 0.5 * w.total);
            assert!(w.endpoint_residual() < 1e-6);
        }
    }

    #[test]
    fn scaling_covariance() {
        let base = rm("1+2*x");
        let p = principal_eigen(&base).unwrap();
        for kappa in [0.25, 4.0, 3.0] {
            let s = principal_eigen(&ResistanceMap::new(&base.profile().scaled(kappa).unwrap()).unwrap())
                .unwrap();
            assert!((s.lambda / (kappa * p.lambda) - 1.0).abs() < 1e-8, "{kappa}");
            assert!((s.m - p.m).abs() < 1e-8, "{kappa}");
        }
    }

    #[test]
    fn reflection() {
        let base = rm("exp(x)");
        let p = principal_eigen(&base).unwrap();
        let r = principal_eigen(&ResistanceMap::new(&base.profile().reflected().unwrap()).unwrap())
            .unwrap();
        assert!((r.m - (1.0 - p.m)).abs() < 1e-7);
    }

    #[test]
    fn table_profiles_run_outside_hypotheses() {
        use crate::coeffs::{Source, Table};
        let t = Table::from_csv("x,a\n0,1\n0.5,1.5\n1,3\n").unwrap();
        let profile = CoefficientProfile::new(Source::Table(t)).unwrap();
        assert!(!profile.within_theorem_hypotheses());
        let map = ResistanceMap::new(&profile).unwrap();
        let p = principal_eigen(&map).unwrap();
        assert!(p.m > crate::cap1d::capacity_point(&map).unwrap());
    }
}
