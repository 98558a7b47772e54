//! Validated coefficients `a(x) > 0` on `[0, 1]` and the resistance map
//! `R(s) = ∫₀ˢ a⁻¹(t) dt` together with its inverse `t ↦ x(t)`.

use std::fmt;
use std::path::Path;

use rand::Rng;

use crate::error::{Error, Result};
use crate::expr::{BinaryOp, Expr};
use crate::numeric::adaptive_simpson;

/// Default number of validation samples.
pub const DEFAULT_SAMPLES: usize = 1001;
/// Default absolute quadrature tolerance (for a profile with `min a = 1`).
pub const DEFAULT_TOL: f64 = 1e-10;

/// Number of fixed panels the resistance of a smooth profile is cached on.
const PANELS: usize = 1024;

/// Piecewise-linear coefficient table on `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    xs: Vec<f64>,
    values: Vec<f64>,
}

impl Table {
    pub fn new(xs: Vec<f64>, values: Vec<f64>) -> Result<Table> {
        if xs.len() != values.len() {
            return Err(Error::TableFormat("column lengths differ".into()));
        }
        if xs.len() < 2 {
            return Err(Error::TableFormat("need at least two rows".into()));
        }
        if xs[0] != 0.0 || *xs.last().unwrap() != 1.0 {
            return Err(Error::TableFormat("x must run from 0 to 1".into()));
        }
        if let Some(w) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::TableFormat(format!(
                "x not strictly increasing at row {}",
                w + 2
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::TableFormat(format!("non-finite a at row {}", i + 1)));
        }
        Ok(Table { xs, values })
    }

    /// Parses CSV text with header `x,a`.
    pub fn from_csv(text: &str) -> Result<Table> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        match lines.next() {
            Some((_, h)) if h.trim().replace(' ', "") == "x,a" => {}
            _ => return Err(Error::TableFormat("expected header \"x,a\"".into())),
        }
        let mut xs = Vec::new();
        let mut values = Vec::new();
        for (n, line) in lines {
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            let parsed = match cols.as_slice() {
                [x, a] => x.parse::<f64>().ok().zip(a.parse::<f64>().ok()),
                _ => None,
            };
            let (x, a) = parsed
                .ok_or_else(|| Error::TableFormat(format!("malformed row at line {}", n + 1)))?;
            xs.push(x);
            values.push(a);
        }
        Table::new(xs, values)
    }

    pub fn load(path: &Path) -> Result<Table> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::TableFormat(format!("{}: {e}", path.display())))?;
        Table::from_csv(&text)
    }

    fn segment(&self, x: f64) -> usize {
        let i = self.xs.partition_point(|&k| k <= x);
        i.clamp(1, self.xs.len() - 1) - 1
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.segment(x);
        let (x0, x1) = (self.xs[i], self.xs[i + 1]);
        let (a0, a1) = (self.values[i], self.values[i + 1]);
        a0 + (a1 - a0) * (x - x0) / (x1 - x0)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.values[i + 1] - self.values[i]) / (self.xs[i + 1] - self.xs[i])
    }

    /// `∫_{x_i}^{x} 1/a` inside segment `i`, in closed form.
    fn partial(&self, i: usize, x: f64) -> f64 {
        let a0 = self.values[i];
        let m = self.slope(i);
        let d = x - self.xs[i];
        let z = m * d / a0;
        if z.abs() < 1e-8 {
            d / a0 * (1.0 - z / 2.0 + z * z / 3.0)
        } else {
            z.ln_1p() / m
        }
    }

    /// Inverse of [`Table::partial`]: `x` with `partial(i, x) = r`.
    fn partial_inverse(&self, i: usize, r: f64) -> f64 {
        let a0 = self.values[i];
        let m = self.slope(i);
        let z = m * r;
        let d = if z.abs() < 1e-8 {
            a0 * r * (1.0 + z / 2.0 + z * z / 6.0)
        } else {
            a0 / m * z.exp_m1()
        };
        (self.xs[i] + d).min(self.xs[i + 1])
    }

    fn reflected(&self) -> Table {
        let xs = self.xs.iter().rev().map(|x| 1.0 - x).collect();
        let values = self.values.iter().rev().copied().collect();
        Table { xs, values }
    }

    fn scaled(&self, kappa: f64) -> Table {
        Table {
            xs: self.xs.clone(),
            values: self.values.iter().map(|v| kappa * v).collect(),
        }
    }
}

/// A C² increasing coefficient `a(x) = base + ∫₀ˣ g`, where `g ≥ 0` is the
/// monotone piecewise-cubic Hermite interpolant of nonnegative data.
#[derive(Debug, Clone, PartialEq)]
pub struct MonotoneSpline {
    base: f64,
    knots: Vec<f64>,
    g: Vec<f64>,
    dg: Vec<f64>,
    cumulative: Vec<f64>,
}

impl MonotoneSpline {
    pub fn new(base: f64, knots: Vec<f64>, g: Vec<f64>) -> Result<MonotoneSpline> {
        if knots.len() != g.len() || knots.len() < 2 {
            return Err(Error::InvalidArgument("spline needs matching knots and slopes".into()));
        }
        if knots[0] != 0.0 || *knots.last().unwrap() != 1.0 || knots.windows(2).any(|w| w[1] <= w[0])
        {
            return Err(Error::InvalidArgument("spline knots must increase from 0 to 1".into()));
        }
        if g.iter().any(|&v| !(v >= 0.0)) || !(base > 0.0) {
            return Err(Error::InvalidArgument("spline needs base > 0 and slopes ≥ 0".into()));
        }
        let dg = pchip_derivatives(&knots, &g);
        let mut spline = MonotoneSpline {
            base,
            knots,
            g,
            dg,
            cumulative: Vec::new(),
        };
        let mut cumulative = vec![0.0];
        for i in 0..spline.knots.len() - 1 {
            let next = cumulative[i] + spline.integral_in(i, 1.0);
            cumulative.push(next);
        }
        spline.cumulative = cumulative;
        Ok(spline)
    }

    /// `∫` of the Hermite piece on segment `i` from its left end to local
    /// coordinate `s ∈ [0, 1]`.
    fn integral_in(&self, i: usize, s: f64) -> f64 {
        let w = self.knots[i + 1] - self.knots[i];
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        let i00 = s4 / 2.0 - s3 + s;
        let i10 = s4 / 4.0 - 2.0 * s3 / 3.0 + s2 / 2.0;
        let i01 = -s4 / 2.0 + s3;
        let i11 = s4 / 4.0 - s3 / 3.0;
        w * (self.g[i] * i00 + w * self.dg[i] * i10 + self.g[i + 1] * i01 + w * self.dg[i + 1] * i11)
    }

    pub fn value(&self, x: f64) -> f64 {
        let i = self.knots.partition_point(|&k| k <= x).clamp(1, self.knots.len() - 1) - 1;
        let s = (x - self.knots[i]) / (self.knots[i + 1] - self.knots[i]);
        self.base + self.cumulative[i] + self.integral_in(i, s)
    }

    fn reflected_error() -> Error {
        Error::InvalidArgument("a reflected increasing spline is decreasing; use a table".into())
    }

    fn scaled(&self, kappa: f64) -> MonotoneSpline {
        MonotoneSpline::new(
            kappa * self.base,
            self.knots.clone(),
            self.g.iter().map(|v| kappa * v).collect(),
        )
        .expect("scaling by κ > 0 keeps a valid spline")
    }
}

/// Fritsch–Carlson derivative estimates for monotone cubic interpolation.
fn pchip_derivatives(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut d = vec![0.0; n];
    if n == 2 {
        d[0] = delta[0];
        d[1] = delta[0];
        return d;
    }
    for i in 1..n - 1 {
        if delta[i - 1] * delta[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    let end = |h0: f64, h1: f64, d0: f64, d1: f64| {
        let v = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if v * d0 <= 0.0 {
            0.0
        } else if d0 * d1 <= 0.0 && v.abs() > 3.0 * d0.abs() {
            3.0 * d0
        } else {
            v
        }
    };
    d[0] = end(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    d
}

/// Where a coefficient comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    Expr(Expr),
    Table(Table),
    Spline(MonotoneSpline),
}

impl Source {
    /// Parses either a CSV path (anything ending in `.csv`) or an expression.
    pub fn from_arg(arg: &str) -> Result<Source> {
        if arg.trim_end().ends_with(".csv") {
            Ok(Source::Table(Table::load(Path::new(arg.trim()))?))
        } else {
            Ok(Source::Expr(Expr::parse(arg)?))
        }
    }

    fn eval(&self, x: f64) -> Result<f64> {
        match self {
            Source::Expr(e) => e.eval(x),
            Source::Table(t) => Ok(t.value(x)),
            Source::Spline(s) => Ok(s.value(x)),
        }
    }
}

impl fmt::Display for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::Expr(e) => write!(f, "{e}"),
            Source::Table(t) => write!(f, "table[{} rows]", t.xs.len()),
            Source::Spline(s) => write!(f, "spline[{} knots]", s.knots.len()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Monotonicity {
    Verified,
    Violated,
    /// Only roundoff-sized decreases were seen.
    Unknown,
}

/// A coefficient validated positive on a dense sample of `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientProfile {
    source: Source,
    min_value: f64,
    samples: usize,
    monotone: Monotonicity,
}

impl CoefficientProfile {
    pub fn new(source: Source) -> Result<CoefficientProfile> {
        make_profile(source, DEFAULT_SAMPLES)
    }

    pub fn from_expr(src: &str) -> Result<CoefficientProfile> {
        CoefficientProfile::new(Source::Expr(Expr::parse(src)?))
    }

    pub fn source(&self) -> &Source {
        &self.source
    }

    pub fn min_value(&self) -> f64 {
        self.min_value
    }

    pub fn samples(&self) -> usize {
        self.samples
    }

    pub fn monotone(&self) -> Monotonicity {
        self.monotone
    }

    /// Piecewise-linear tables are only C⁰ and fall outside the C²
    /// hypothesis under which `c < m` is guaranteed.
    pub fn is_smooth(&self) -> bool {
        !matches!(self.source, Source::Table(_))
    }

    pub fn within_theorem_hypotheses(&self) -> bool {
        self.is_smooth() && self.monotone == Monotonicity::Verified
    }

    /// `a(x)`; NaN where an expression leaves its domain off the
    /// validation samples.
    pub fn value(&self, x: f64) -> f64 {
        self.source.eval(x).unwrap_or(f64::NAN)
    }

    /// The profile `κ·a`.
    pub fn scaled(&self, kappa: f64) -> Result<CoefficientProfile> {
        if !(kappa > 0.0 && kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale factor {kappa} must be positive")));
        }
        let source = match &self.source {
            Source::Expr(e) => Source::Expr(Expr::binary(BinaryOp::Mul, Expr::Const(kappa), e.clone())),
            Source::Table(t) => Source::Table(t.scaled(kappa)),
            Source::Spline(s) => Source::Spline(s.scaled(kappa)),
        };
        make_profile(source, self.samples)
    }

    /// The profile `a(1 − x)`.
    pub fn reflected(&self) -> Result<CoefficientProfile> {
        let source = match &self.source {
            Source::Expr(e) => {
                let flip = Expr::binary(BinaryOp::Sub, Expr::Const(1.0), Expr::Var);
                Source::Expr(e.compose(&flip))
            }
            Source::Table(t) => Source::Table(t.reflected()),
            Source::Spline(_) => return Err(MonotoneSpline::reflected_error()),
        };
        make_profile(source, self.samples)
    }
}

/// Validates `source` on `m ≥ 1001` uniform samples of `[0, 1]`.
pub fn make_profile(source: Source, m: usize) -> Result<CoefficientProfile> {
    if m < DEFAULT_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "need at least {DEFAULT_SAMPLES} validation samples, got {m}"
        )));
    }
    let mut min_value = f64::INFINITY;
    let mut max_seen = f64::NEG_INFINITY;
    let mut prev = f64::NEG_INFINITY;
    let mut strict_drop = false;
    let mut noise_drop = false;
    for i in 0..m {
        let x = i as f64 / (m - 1) as f64;
        let a = source.eval(x).map_err(|e| match e {
            Error::Domain(msg) => Error::Domain(format!("{msg} at x={x}")),
            other => other,
        })?;
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Nonpositive { x });
        }
        if a < prev {
            if prev - a > 1e-12 * prev {
                strict_drop = true;
            } else {
                noise_drop = true;
            }
        }
        min_value = min_value.min(a);
        max_seen = max_seen.max(a);
        prev = a;
    }
    let monotone = if strict_drop {
        Monotonicity::Violated
    } else if noise_drop {
        Monotonicity::Unknown
    } else {
        Monotonicity::Verified
    };
    Ok(CoefficientProfile {
        source,
        min_value,
        samples: m,
        monotone,
    })
}

/// Resistance `R(s)` cached at construction on fixed panels, plus the
/// monotone inverse.
///
/// Tolerances are absolute for `min a = 1` and scale with `1 / min a`, so
/// that `κ·a` produces exactly `1/κ` times the values of `a` when `κ` is a
/// power of two.
#[derive(Debug, Clone)]
pub struct ResistanceMap {
    profile: CoefficientProfile,
    tol: f64,
    scale: f64,
    knots: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ResistanceMap {
    pub fn new(profile: &CoefficientProfile) -> Result<ResistanceMap> {
        ResistanceMap::with_tol(profile, DEFAULT_TOL)
    }

    pub fn with_tol(profile: &CoefficientProfile, tol: f64) -> Result<ResistanceMap> {
        if !(tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
        }
        let knots: Vec<f64> = match profile.source() {
            Source::Table(t) => t.xs.clone(),
            _ => (0..=PANELS).map(|i| i as f64 / PANELS as f64).collect(),
        };
        let mut rm = ResistanceMap {
            profile: profile.clone(),
            tol,
            scale: 1.0 / profile.min_value(),
            knots,
            cumulative: Vec::new(),
        };
        let mut cumulative = Vec::with_capacity(rm.knots.len());
        cumulative.push(0.0);
        for i in 0..rm.knots.len() - 1 {
            let next = cumulative[i] + rm.partial(i, rm.knots[i + 1])?;
            cumulative.push(next);
        }
        rm.cumulative = cumulative;
        Ok(rm)
    }

    pub fn profile(&self) -> &CoefficientProfile {
        &self.profile
    }

    pub fn tol(&self) -> f64 {
        self.tol
    }

    /// The absolute accuracy the map is built to: `tol / min a`.
    pub fn abs_tol(&self) -> f64 {
        self.tol * self.scale
    }

    /// `R(1)`.
    pub fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn segment_of_x(&self, x: f64) -> usize {
        self.knots.partition_point(|&k| k <= x).clamp(1, self.knots.len() - 1) - 1
    }

    fn partial(&self, i: usize, x: f64) -> Result<f64> {
        match self.profile.source() {
            Source::Table(t) => Ok(t.partial(i, x)),
            _ => {
                let inv = |s: f64| 1.0 / self.profile.value(s);
                let local = self.abs_tol() / (self.knots.len() - 1) as f64;
                adaptive_simpson(&inv, self.knots[i], x, local)
            }
        }
    }

    /// `R(s) = ∫₀ˢ 1/a`.
    pub fn resistance(&self, s: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::OutOfRange {
                what: "s",
                value: s,
                lo: 0.0,
                hi: 1.0,
            });
        }
        if s == 1.0 {
            return Ok(self.total());
        }
        let i = self.segment_of_x(s);
        Ok(self.cumulative[i] + self.partial(i, s)?)
    }

    /// `x(t)`: the point where the resistance reaches `t`.
    pub fn inverse(&self, t: f64) -> Result<f64> {
        let total = self.total();
        if !(t >= 0.0 && t <= total) {
            return Err(Error::OutOfRange {
                what: "t",
                value: t,
                lo: 0.0,
                hi: total,
            });
        }
        if t == total {
            return Ok(1.0);
        }
        if t == 0.0 {
            return Ok(0.0);
        }
        let i = self.cumulative.partition_point(|&c| c <= t).clamp(1, self.knots.len() - 1) - 1;
        let r = t - self.cumulative[i];
        let (lo0, hi0) = (self.knots[i], self.knots[i + 1]);
        if let Source::Table(table) = self.profile.source() {
            return Ok(table.partial_inverse(i, r));
        }
        // safeguarded Newton on the panel, R' = 1/a
        let (mut lo, mut hi) = (lo0, hi0);
        let mut x = (lo0 + r * self.profile.value(lo0)).clamp(lo0, hi0);
        let ftol = 0.1 * self.abs_tol();
        for _ in 0..100 {
            let g = self.partial(i, x)? - r;
            if g.abs() <= ftol {
                return Ok(x);
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let step = g * self.profile.value(x);
            let next = x - step;
            x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
            if hi - lo <= 4.0 * f64::EPSILON * hi.max(1e-300) {
                return Ok(x);
            }
        }
        Ok(x)
    }
}

/// Stock coefficient families used in sweeps and reports.
pub mod stock {
    use super::*;

    pub fn constant() -> CoefficientProfile {
        CoefficientProfile::from_expr("1").expect("stock profile")
    }

    /// `1 + k·x`.
    pub fn linear(k: f64) -> Result<CoefficientProfile> {
        CoefficientProfile::new(Source::Expr(Expr::binary(
            BinaryOp::Add,
            Expr::Const(1.0),
            Expr::binary(BinaryOp::Mul, Expr::Const(k), Expr::Var),
        )))
    }

    /// `exp(k·x)`.
    pub fn exponential(k: f64) -> Result<CoefficientProfile> {
        CoefficientProfile::new(Source::Expr(Expr::unary(
            crate::expr::UnaryOp::Exp,
            Expr::binary(BinaryOp::Mul, Expr::Const(k), Expr::Var),
        )))
    }

    /// `(1 + x)^k`.
    pub fn power(k: f64) -> Result<CoefficientProfile> {
        CoefficientProfile::new(Source::Expr(Expr::binary(
            BinaryOp::Pow,
            Expr::binary(BinaryOp::Add, Expr::Const(1.0), Expr::Var),
            Expr::Const(k),
        )))
    }

    /// Named monotone-increasing stock profiles: linear `k ∈ {0.5, 1, 2, 5,
    /// 10}`, exponential `k ∈ {0.5, 1, 2}` and the cubic `(1 + x)³`.
    pub fn monotone() -> Vec<(String, CoefficientProfile)> {
        let mut out = Vec::new();
        for k in [0.5, 1.0, 2.0, 5.0, 10.0] {
            out.push((format!("1+{k}*x"), linear(k).expect("stock profile")));
        }
        for k in [0.5, 1.0, 2.0] {
            out.push((format!("exp({k}*x)"), exponential(k).expect("stock profile")));
        }
        out.push(("(1+x)^3".to_string(), power(3.0).expect("stock profile")));
        out
    }

    /// The constant profile followed by [`monotone`].
    pub fn all() -> Vec<(String, CoefficientProfile)> {
        let mut out = vec![("1".to_string(), constant())];
        out.extend(monotone());
        out
    }
}

/// A random C² increasing spline profile whose mean slope is at least
/// `0.3·a(0)`.
pub fn random_monotone_spline<R: Rng + ?Sized>(rng: &mut R) -> CoefficientProfile {
    let interior = rng.gen_range(2..=5);
    let mut knots: Vec<f64> = (0..interior).map(|_| rng.gen_range(0.05..0.95)).collect();
    knots.sort_by(f64::total_cmp);
    knots.dedup_by(|a, b| (*a - *b).abs() < 0.02);
    knots.insert(0, 0.0);
    knots.push(1.0);
    let base = rng.gen_range(0.5..2.0);
    let mut g: Vec<f64> = knots.iter().map(|_| rng.gen_range(0.0..3.0)).collect();
    let mean = g.iter().sum::<f64>() / g.len() as f64;
    if mean < 0.3 * base {
        let bump = 0.3 * base - mean;
        g.iter_mut().for_each(|v| *v += bump);
    }
    let spline = MonotoneSpline::new(base, knots, g).expect("generated spline is valid");
    CoefficientProfile::new(Source::Spline(spline)).expect("generated spline is positive")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rm(src: &str) -> ResistanceMap {
        ResistanceMap::new(&CoefficientProfile::from_expr(src).unwrap()).unwrap()
    }

    #[test]
    fn profile_flags() {
        let p = CoefficientProfile::from_expr("1").unwrap();
        assert_eq!(p.monotone(), Monotonicity::Verified);
        assert_eq!(p.min_value(), 1.0);
        let p = CoefficientProfile::from_expr("exp(x)").unwrap();
        assert_eq!(p.monotone(), Monotonicity::Verified);
        assert_eq!(p.min_value(), 1.0);
        let p = make_profile(Source::Expr(Expr::parse("sin(pi*x)+0.001").unwrap()), 1001).unwrap();
        assert_eq!(p.monotone(), Monotonicity::Violated);
        assert!(p.min_value() > 0.0);
    }

    #[test]
    fn nonpositive_reports_location() {
        assert_eq!(
            CoefficientProfile::from_expr("x-2").unwrap_err(),
            Error::Nonpositive { x: 0.0 }
        );
        assert_eq!(
            CoefficientProfile::from_expr("0.5-x").unwrap_err(),
            Error::Nonpositive { x: 0.5 }
        );
        assert!(matches!(
            CoefficientProfile::from_expr("ln(x)+5"),
            Err(Error::Domain(_))
        ));
        assert!(make_profile(Source::Expr(Expr::Var), 10).is_err());
    }

    #[test]
    fn resistance_examples() {
        assert!((rm("1").resistance(0.7).unwrap() - 0.7).abs() < 1e-12);
        let e = rm("exp(x)");
        assert!((e.resistance(1.0).unwrap() - (1.0 - (-1.0f64).exp())).abs() < 1e-10);
        assert_eq!(e.resistance(0.0).unwrap(), 0.0);
        assert!(e.resistance(1.5).is_err());
    }

    #[test]
    fn inverse_examples() {
        assert!((rm("1").inverse(0.25).unwrap() - 0.25).abs() < 1e-12);
        let e = rm("exp(x)");
        let t = (1.0 - (-1.0f64).exp()) / 2.0;
        // 1 − e^{−x} = t  ⇒  x = −ln(1 − t)
        let want = -(1.0 - t).ln();
        assert!((want - 0.379885).abs() < 1e-6);
        assert!((e.inverse(t).unwrap() - want).abs() < 1e-8);
        assert_eq!(e.inverse(e.total()).unwrap(), 1.0);
        assert!(e.inverse(-0.1).is_err());
        assert!(e.inverse(e.total() * 1.01).is_err());
    }

    #[test]
    fn agrees_with_fine_fixed_step_simpson() {
        for src in ["1", "exp(x)", "1+5*x", "(1+x)^3", "1+0.5*sin(3*x)"] {
            let map = rm(src);
            let p = map.profile().clone();
            for s in [0.13, 0.5, 0.77, 1.0] {
                // 10× the cached panel count
                let oracle = crate::numeric::composite_simpson(|x| 1.0 / p.value(x), 0.0, s, 10 * PANELS);
                let got = map.resistance(s).unwrap();
                assert!((got - oracle).abs() <= 100.0 * map.abs_tol(), "{src} s={s}");
            }
        }
    }

    #[test]
    fn table_closed_form() {
        let t = Table::from_csv("x,a\n0,1\n0.5,2\n1,2\n").unwrap();
        let map = ResistanceMap::new(&CoefficientProfile::new(Source::Table(t)).unwrap()).unwrap();
        // ∫₀^½ dx/(1+2x) = ln(2)/2, then ½·½
        let want = 2f64.ln() / 2.0 + 0.25;
        assert!((map.total() - want).abs() < 1e-15);
        for t in [0.1, 0.3, 0.5, 0.59] {
            let x = map.inverse(t).unwrap();
            assert!((map.resistance(x).unwrap() - t).abs() < 1e-14);
        }
    }

    #[test]
    fn table_format_errors() {
        assert!(Table::from_csv("x,b\n0,1\n1,1\n").is_err());
        assert!(Table::from_csv("x,a\n0,1\n0.5\n1,1\n").is_err());
        assert!(Table::from_csv("x,a\n0,1\n0.7,1\n0.5,1\n1,1\n").is_err());
        assert!(Table::from_csv("x,a\n0.1,1\n1,1\n").is_err());
    }

    #[test]
    fn spline_is_increasing_and_c1_in_slope() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let p = random_monotone_spline(&mut rng);
            assert_eq!(p.monotone(), Monotonicity::Verified);
            assert!(p.value(1.0) > 1.1 * p.value(0.0));
        }
        let s = MonotoneSpline::new(1.0, vec![0.0, 0.5, 1.0], vec![2.0, 2.0, 2.0]).unwrap();
        assert!((s.value(0.3) - 1.6).abs() < 1e-14);
        assert!((s.value(1.0) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn scaling_by_powers_of_two_is_exact() {
        let map = rm("1+5*x");
        for kappa in [0.25, 2.0, 8.0] {
            let scaled = ResistanceMap::new(&map.profile().scaled(kappa).unwrap()).unwrap();
            for s in [0.1, 0.42, 0.9] {
                assert_eq!(scaled.resistance(s).unwrap(), map.resistance(s).unwrap() / kappa);
            }
        }
    }

    proptest! {
        #[test]
        fn reflection(s in 0.0f64..1.0) {
            let map = rm("1+5*x");
            let refl = ResistanceMap::new(&map.profile().reflected().unwrap()).unwrap();
            let tol = 10.0 * map.abs_tol();
            prop_assert!((refl.total() - map.total()).abs() <= tol);
            let want = map.total() - map.resistance(1.0 - s).unwrap();
            prop_assert!((refl.resistance(s).unwrap() - want).abs() <= tol);
        }

        #[test]
        fn scaling(s in 0.0f64..1.0, kappa in 0.1f64..10.0) {
            let map = rm("exp(2*x)");
            let scaled = ResistanceMap::new(&map.profile().scaled(kappa).unwrap()).unwrap();
            let want = map.resistance(s).unwrap() / kappa;
            prop_assert!((scaled.resistance(s).unwrap() - want).abs() <= 10.0 * map.abs_tol());
        }

        #[test]
        fn increasing_and_invertible(s1 in 0.0f64..1.0, s2 in 0.0f64..1.0) {
            let map = rm("1+10*x^2");
            let (lo, hi) = if s1 < s2 { (s1, s2) } else { (s2, s1) };
            if lo < hi {
                prop_assert!(map.resistance(lo).unwrap() < map.resistance(hi).unwrap());
            }
            let t = map.resistance(s1).unwrap();
            let x = map.inverse(t).unwrap();
            prop_assert!((map.resistance(x).unwrap() - t).abs() <= 10.0 * map.abs_tol());
        }
    }
}
