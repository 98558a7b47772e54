//! Finite-difference oracle for the shooting solver.
//!
//! `−(a u′)′` on `n` interior nodes `x_i = i/(n+1)` in flux form, with `a`
//! taken at the cell midpoints, gives a symmetric positive definite
//! tridiagonal matrix whose lowest eigenpairs approximate the continuous
//! ones to second order.

use crate::coeffs::CoefficientProfile;
use crate::error::{Error, Result};
use crate::numeric::{dot, norm, parabolic_vertex, SymTridiagonal};

use super::EigenPair1D;

/// Rayleigh-quotient convergence tolerance (relative).
pub const FD_TOL: f64 = 1e-12;
const FD_MAX_ITER: usize = 20_000;

/// The matrix of `−(a u′)′` on `n` interior nodes.
pub fn fd_operator(profile: &CoefficientProfile, n: usize) -> Result<SymTridiagonal> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("node count {n} < 2")));
    }
    let h = 1.0 / (n + 1) as f64;
    let ih2 = 1.0 / (h * h);
    // a at x_{i+1/2}, i = 0..=n
    let mid: Vec<f64> = (0..=n).map(|i| profile.value((i as f64 + 0.5) * h)).collect();
    if let Some(i) = mid.iter().position(|a| !(*a > 0.0)) {
        return Err(Error::Nonpositive { x: (i as f64 + 0.5) * h });
    }
    Ok(SymTridiagonal {
        diag: (0..n).map(|i| (mid[i] + mid[i + 1]) * ih2).collect(),
        off: (1..n).map(|i| -mid[i] * ih2).collect(),
    })
}

/// Grid `[0, x_1, …, x_n, 1]`.
pub(crate) fn fd_grid(n: usize) -> Vec<f64> {
    let h = 1.0 / (n + 1) as f64;
    let mut x: Vec<f64> = (0..=n + 1).map(|i| i as f64 * h).collect();
    x[n + 1] = 1.0;
    x
}

/// Eigenpair `k` of the discrete operator by inverse iteration with
/// deflation against the `k` lower eigenvectors.
pub fn fd_eigen_oracle(profile: &CoefficientProfile, n: usize, k: usize) -> Result<EigenPair1D> {
    if n < 64 {
        return Err(Error::InvalidArgument(format!("oracle needs n ≥ 64, got {n}")));
    }
    let op = fd_operator(profile, n)?;
    let factor = op.factor();
    let x = fd_grid(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    let mut lambda = 0.0;
    for j in 0..=k {
        let freq = (j + 1) as f64 * std::f64::consts::PI;
        let mut v: Vec<f64> = x[1..=n].iter().map(|&xi| (freq * xi).sin()).collect();
        let mut prev = f64::INFINITY;
        let mut converged = false;
        for _ in 0..FD_MAX_ITER {
            orthogonalize(&mut v, &basis);
            let nv = norm(&v);
            v.iter_mut().for_each(|e| *e /= nv);
            let mut w = factor.solve(&v);
            orthogonalize(&mut w, &basis);
            let nw = norm(&w);
            v = w.into_iter().map(|e| e / nw).collect();
            lambda = dot(&v, &op.apply(&v));
            if (lambda - prev).abs() <= FD_TOL * lambda {
                converged = true;
                break;
            }
            prev = lambda;
        }
        if !converged {
            return Err(Error::IterationCap {
                solver: "fd inverse iteration",
                iterations: FD_MAX_ITER,
                residual: (lambda - prev).abs() / lambda,
            });
        }
        basis.push(v);
    }
    let v = basis.pop().unwrap();
    Ok(pair_from_samples(k, lambda, x, &v))
}

fn orthogonalize(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let p = dot(v, b);
        v.iter_mut().zip(b).for_each(|(e, bi)| *e -= p * bi);
    }
}

/// Packs interior samples into an [`EigenPair1D`]: sign fixed so `u > 0`
/// near 0, scaled to `max |u| = 1`, nodes by linear interpolation of sign
/// changes, extrema by parabolic refinement within each nodal interval.
pub(crate) fn pair_from_samples(k: usize, lambda: f64, x: Vec<f64>, interior: &[f64]) -> EigenPair1D {
    let n = interior.len();
    let h = 1.0 / (n + 1) as f64;
    let first = interior.iter().find(|v| v.abs() > 0.0).copied().unwrap_or(1.0);
    let peak = interior.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let scale = first.signum() / peak;
    let mut u = Vec::with_capacity(n + 2);
    u.push(0.0);
    u.extend(interior.iter().map(|v| v * scale));
    u.push(0.0);

    let mut nodes = Vec::new();
    let mut cuts = vec![0];
    for i in 1..=n {
        if i < n && (u[i] > 0.0) != (u[i + 1] > 0.0) {
            nodes.push(x[i] + h * u[i] / (u[i] - u[i + 1]));
            cuts.push(i + 1);
        }
    }
    cuts.push(n + 2);
    let abs: Vec<f64> = u.iter().map(|v| v.abs()).collect();
    let mut extrema = Vec::new();
    let mut best = (0.0, 0.0);
    for w in cuts.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mut i = lo;
        for j in lo..hi {
            if abs[j] > abs[i] {
                i = j;
            }
        }
        let xm = if i > 0 && i <= n {
            parabolic_vertex(x[i], h, abs[i - 1], abs[i], abs[i + 1])
        } else {
            x[i]
        };
        extrema.push(xm);
        if abs[i] > best.0 {
            best = (abs[i], xm);
        }
    }
    EigenPair1D {
        index: k,
        lambda,
        x,
        u,
        m: best.1,
        extrema,
        nodes,
        steps: 0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn constant_spectrum() {
        let one = CoefficientProfile::from_expr("1").unwrap();
        let p0 = fd_eigen_oracle(&one, 4096, 0).unwrap();
        assert!((p0.lambda / (PI * PI) - 1.0).abs() < 1e-5);
        assert!((p0.m - 0.5).abs() < 1e-9);
        let p1 = fd_eigen_oracle(&one, 4096, 1).unwrap();
        assert!((p1.lambda / (4.0 * PI * PI) - 1.0).abs() < 1e-4);
        assert_eq!(p1.sign_changes(), 1);
        assert!((p1.nodes[0] - 0.5).abs() < 1e-9);
        assert_eq!(p1.u[0], 0.0);
        assert_eq!(*p1.u.last().unwrap(), 0.0);
    }

    #[test]
    fn second_order_convergence() {
        let p = CoefficientProfile::from_expr("1+x").unwrap();
        let exact = crate::sturm::principal_eigen(
            &crate::coeffs::ResistanceMap::new(&p).unwrap(),
        )
        .unwrap()
        .lambda;
        let e1 = (fd_eigen_oracle(&p, 127, 0).unwrap().lambda - exact).abs();
        let e2 = (fd_eigen_oracle(&p, 255, 0).unwrap().lambda - exact).abs();
        let ratio = e1 / e2;
        assert!((ratio - 4.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn small_grids_rejected() {
        let one = CoefficientProfile::from_expr("1").unwrap();
        assert!(fd_eigen_oracle(&one, 32, 0).is_err());
    }
}
