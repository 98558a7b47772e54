//! Small numerical kernels shared by the 1D and 2D modules.

use crate::error::{Error, Result};

/// Maximum recursion depth of [`adaptive_simpson`].
pub const SIMPSON_MAX_DEPTH: u32 = 40;

/// Adaptive Simpson quadrature of `f` over `[a, b]` with absolute
/// tolerance `tol`, using the usual `|S₂ − S₁| ≤ 15·tol` acceptance test and
/// Richardson correction of accepted panels.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let v = simpson_step(f, a, b, fa, fm, fb, whole, tol, SIMPSON_MAX_DEPTH)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Quadrature { a, b })
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if !delta.is_finite() {
        return Err(Error::Quadrature { a, b });
    }
    if delta.abs() <= 15.0 * tol {
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 || m <= a || m >= b {
        return Err(Error::Quadrature { a, b });
    }
    Ok(simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
}

/// Composite Simpson rule with `panels` (even) uniform panels.
pub fn composite_simpson<F>(f: F, a: f64, b: f64, panels: usize) -> f64
where
    F: Fn(f64) -> f64,
{
    let n = panels + panels % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * f(a + i as f64 * h);
    }
    acc * h / 3.0
}

/// Outcome of a golden-section search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoldenResult {
    pub x: f64,
    pub value: f64,
    /// False when the bracket stopped behaving like a unimodal one.
    pub clean: bool,
}

/// Golden-section minimization of `f` on `[lo, hi]` until the bracket is
/// narrower than `width`.
pub fn golden_min<F>(f: F, mut lo: f64, mut hi: f64, width: f64) -> Result<GoldenResult>
where
    F: Fn(f64) -> Result<f64>,
{
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let f_lo = f(lo)?;
    let f_hi = f(hi)?;
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = f1.min(f2);
    let mut clean = best <= f_lo && best <= f_hi;
    let mut iters = 0;
    while hi - lo > width && iters < 200 {
        iters += 1;
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = f(x2)?;
        }
        let now = f1.min(f2);
        if now > best {
            clean = false;
        }
        best = best.min(now);
    }
    let (x, value) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(GoldenResult { x, value, clean })
}

/// Bisection for a root of an increasing function `g` on `[lo, hi]`.
/// Stops when `|g(mid)| ≤ ftol` or the bracket cannot be split further.
pub fn bisect_increasing<G>(g: G, mut lo: f64, mut hi: f64, ftol: f64) -> Result<f64>
where
    G: Fn(f64) -> Result<f64>,
{
    loop {
        let mid = 0.5 * (lo + hi);
        let v = g(mid)?;
        if v.abs() <= ftol || mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if v < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
}

/// Vertex of the parabola through `(x−h, l)`, `(x, c)`, `(x+h, r)`, clamped
/// to the cell `[x−h, x+h]`.
pub fn parabolic_vertex(x: f64, h: f64, l: f64, c: f64, r: f64) -> f64 {
    let denom = l - 2.0 * c + r;
    if denom == 0.0 {
        return x;
    }
    let shift = 0.5 * h * (l - r) / denom;
    x + shift.clamp(-h, h)
}

/// Index of the largest value; ties go to the smallest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Index of the smallest value; ties go to the smallest index.
pub fn argmin(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v < values[best] {
            best = i;
        }
    }
    best
}

/// Cubic Hermite interpolation on `[t0, t1]` from values and derivatives.
#[allow(clippy::too_many_arguments)]
pub fn hermite(t0: f64, t1: f64, y0: f64, y1: f64, d0: f64, d1: f64, t: f64) -> f64 {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    (2.0 * s3 - 3.0 * s2 + 1.0) * y0
        + (s3 - 2.0 * s2 + s) * h * d0
        + (-2.0 * s3 + 3.0 * s2) * y1
        + (s3 - s2) * h * d1
}

/// Symmetric tridiagonal matrix stored by its diagonal and off-diagonal.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut v = self.diag[i] * x[i];
                if i > 0 {
                    v += self.off[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    v += self.off[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    /// `(α·I + β·T)` as a new matrix.
    pub fn affine(&self, alpha: f64, beta: f64) -> SymTridiagonal {
        SymTridiagonal {
            diag: self.diag.iter().map(|d| alpha + beta * d).collect(),
            off: self.off.iter().map(|o| beta * o).collect(),
        }
    }

    /// Thomas factorization without pivoting; valid for the diagonally
    /// dominant matrices used here.
    pub fn factor(&self) -> TridiagonalFactor {
        let n = self.len();
        let mut c_prime = vec![0.0; n];
        let mut denom = vec![0.0; n];
        denom[0] = self.diag[0];
        for i in 1..n {
            c_prime[i - 1] = self.off[i - 1] / denom[i - 1];
            denom[i] = self.diag[i] - self.off[i - 1] * c_prime[i - 1];
        }
        TridiagonalFactor {
            off: self.off.clone(),
            c_prime,
            denom,
        }
    }
}

#[derive(Debug, Clone)]
pub struct TridiagonalFactor {
    off: Vec<f64>,
    c_prime: Vec<f64>,
    denom: Vec<f64>,
}

impl TridiagonalFactor {
    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.denom.len();
        let mut y = vec![0.0; n];
        y[0] = rhs[0] / self.denom[0];
        for i in 1..n {
            y[i] = (rhs[i] - self.off[i - 1] * y[i - 1]) / self.denom[i];
        }
        for i in (0..n.saturating_sub(1)).rev() {
            y[i] -= self.c_prime[i] * y[i + 1];
        }
        y
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_exact() {
        let v = adaptive_simpson(&|x: f64| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_reports_nonconvergence() {
        let r = adaptive_simpson(&|x: f64| 1.0 / x.abs().max(1e-300), -1.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn golden_finds_parabola_min() {
        let r = golden_min(|x| Ok((x - 0.3).powi(2)), 0.0, 1.0, 1e-9).unwrap();
        assert!((r.x - 0.3).abs() < 1e-8);
        assert!(r.clean);
    }

    #[test]
    fn thomas_solves() {
        let t = SymTridiagonal {
            diag: vec![2.0; 5],
            off: vec![-1.0; 4],
        };
        let x = vec![1.0, -2.0, 0.5, 3.0, 1.0];
        let b = t.apply(&x);
        let y = t.factor().solve(&b);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn ties_break_low() {
        assert_eq!(argmax(&[1.0, 3.0, 3.0]), 1);
        assert_eq!(argmin(&[2.0, 1.0, 1.0]), 1);
    }

    #[test]
    fn parabola_vertex_exact_for_quadratic() {
        let q = |x: f64| -(x - 0.37) * (x - 0.37);
        let v = parabolic_vertex(0.4, 0.05, q(0.35), q(0.4), q(0.45));
        assert!((v - 0.37).abs() < 1e-14);
    }
}
