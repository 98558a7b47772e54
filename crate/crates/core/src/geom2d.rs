//! Masked lattices for domains `{0 < x < 1, |y| < f(x)}` and for disks.
//!
//! Nodes sit at `(i h, j h)`. Each node inside the domain records, for each
//! of the four axis directions, how far the next lattice node or the
//! boundary is, as a fraction of `h`. These are the leg lengths of the
//! Shortley–Weller stencil.

use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::expr::{BinaryOp, Expr};
use crate::numeric::golden_min;

/// Positivity of `f` is checked at this many uniform samples.
pub const PROFILE_SAMPLES: usize = 2001;
/// Legs shorter than this fraction of `h` snap the node onto the boundary.
pub const SNAP_FRACTION: f64 = 1e-6;
const LEG_TOL: f64 = 1e-12;
/// A boundary point counts as lying on a wall `x = 0`/`x = 1` (rather than on
/// a curve `y = ±f(x)`) when it is this close to one.
const WALL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum DomainKind {
    /// `0 < x < 1`, `|y| < f(x)`.
    Profile { f: Expr },
    Disk { cx: f64, cy: f64, r: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DomainSpec {
    pub kind: DomainKind,
    label: String,
}

impl DomainSpec {
    pub fn profile(f: Expr) -> Result<DomainSpec> {
        let label = f.to_string();
        Self::profile_labelled(f, label)
    }

    /// Parses `f` and keeps the source text as the label.
    pub fn profile_str(src: &str) -> Result<DomainSpec> {
        Self::profile_labelled(Expr::parse(src)?, src.trim().to_string())
    }

    fn profile_labelled(f: Expr, label: String) -> Result<DomainSpec> {
        for k in 0..PROFILE_SAMPLES {
            let x = k as f64 / (PROFILE_SAMPLES - 1) as f64;
            let v = f.eval(x)?;
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("f(x) = {v} is not positive at x={x}")));
            }
        }
        Ok(DomainSpec {
            kind: DomainKind::Profile { f },
            label,
        })
    }

    pub fn disk(cx: f64, cy: f64, r: f64) -> Result<DomainSpec> {
        if !(r > 0.0) || !r.is_finite() || !cx.is_finite() || !cy.is_finite() {
            return Err(Error::InvalidArgument(format!("disk radius {r} must be positive")));
        }
        Ok(DomainSpec {
            kind: DomainKind::Disk { cx, cy, r },
            label: format!("disk(center=({cx}, {cy}), r={r})"),
        })
    }

    pub fn unit_disk() -> DomainSpec {
        Self::disk(0.0, 0.0, 1.0).unwrap()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn is_profile(&self) -> bool {
        matches!(self.kind, DomainKind::Profile { .. })
    }

    /// `f(x)`, NaN where it cannot be evaluated (profile kind only).
    pub fn f(&self, x: f64) -> f64 {
        match &self.kind {
            DomainKind::Profile { f } => f.eval(x).unwrap_or(f64::NAN),
            DomainKind::Disk { .. } => f64::NAN,
        }
    }

    /// True if `f` is nondecreasing at the validation samples.
    pub fn is_monotone(&self) -> bool {
        match &self.kind {
            DomainKind::Profile { .. } => {
                let v: Vec<f64> = (0..PROFILE_SAMPLES)
                    .map(|k| self.f(k as f64 / (PROFILE_SAMPLES - 1) as f64))
                    .collect();
                v.windows(2).all(|w| w[1] >= w[0])
            }
            DomainKind::Disk { .. } => false,
        }
    }

    /// Mirror image under `x ↦ 1 − x` (profile kind).
    pub fn reflected(&self) -> Result<DomainSpec> {
        match &self.kind {
            DomainKind::Profile { f } => {
                let flip = Expr::binary(BinaryOp::Sub, Expr::constant(1.0), Expr::Var);
                let mut spec = DomainSpec::profile(f.compose(&flip))?;
                spec.label = format!("reflected({})", self.label);
                Ok(spec)
            }
            DomainKind::Disk { .. } => {
                Err(Error::InvalidArgument("reflection is defined for profile domains".into()))
            }
        }
    }

    /// Profile `κ·f` (the thin-domain family for small κ).
    pub fn scaled(&self, kappa: f64) -> Result<DomainSpec> {
        match &self.kind {
            DomainKind::Profile { f } => {
                let g = Expr::binary(BinaryOp::Mul, Expr::constant(kappa), f.clone());
                let mut spec = DomainSpec::profile(g)?;
                spec.label = format!("{kappa}*({})", self.label);
                Ok(spec)
            }
            DomainKind::Disk { .. } => {
                Err(Error::InvalidArgument("scaling is defined for profile domains".into()))
            }
        }
    }

    /// Split of the level function into its wall part (`x = 0`, `x = 1`)
    /// and curved part; the domain is where both are negative.
    fn level_parts(&self, x: f64, y: f64) -> (f64, f64) {
        match &self.kind {
            DomainKind::Profile { .. } => ((-x).max(x - 1.0), y.abs() - self.f(x)),
            DomainKind::Disk { cx, cy, r } => (f64::NEG_INFINITY, (x - cx).hypot(y - cy) - r),
        }
    }

    fn level(&self, x: f64, y: f64) -> f64 {
        let (w, c) = self.level_parts(x, y);
        w.max(c)
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.level(x, y) < 0.0
    }

    fn boundary_kind(&self, x: f64, y: f64) -> BoundaryKind {
        match &self.kind {
            DomainKind::Disk { .. } => BoundaryKind::Circle,
            DomainKind::Profile { .. } => {
                if self.level_parts(x, y).0 >= -WALL_TOL {
                    BoundaryKind::Wall
                } else {
                    BoundaryKind::Curve
                }
            }
        }
    }

    /// `2∫f` or `πr²`.
    pub fn area(&self) -> f64 {
        match &self.kind {
            DomainKind::Profile { .. } => {
                2.0 * crate::numeric::composite_simpson(|x| self.f(x), 0.0, 1.0, 4000)
            }
            DomainKind::Disk { r, .. } => std::f64::consts::PI * r * r,
        }
    }

    /// Euclidean distance from an interior point to `∂D`.
    pub fn distance_to_boundary(&self, x: f64, y: f64) -> f64 {
        match &self.kind {
            DomainKind::Disk { cx, cy, r } => r - (x - cx).hypot(y - cy),
            DomainKind::Profile { .. } => {
                let y = y.abs();
                let d2 = |s: f64| (s - x).powi(2) + (self.f(s) - y).powi(2);
                let n = PROFILE_SAMPLES - 1;
                let mut best = (f64::INFINITY, 0usize);
                for k in 0..=n {
                    let v = d2(k as f64 / n as f64);
                    if v < best.0 {
                        best = (v, k);
                    }
                }
                let lo = best.1.saturating_sub(1) as f64 / n as f64;
                let hi = (best.1 + 1).min(n) as f64 / n as f64;
                let refined = golden_min(|s| Ok(d2(s)), lo, hi, 1e-12)
                    .map(|g| g.value)
                    .unwrap_or(best.0);
                x.min(1.0 - x).min(refined.min(best.0).sqrt())
            }
        }
    }
}

impl fmt::Display for DomainSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// What a shortened leg runs into.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryKind {
    /// `x = 0` or `x = 1`.
    Wall,
    /// `y = ±f(x)`.
    Curve,
    Circle,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Leg {
    /// Distance to the neighbour or boundary, in units of `h`; in `(0, 1]`.
    pub frac: f64,
    /// `None` when the leg ends at another unknown.
    pub boundary: Option<BoundaryKind>,
}

impl Leg {
    const FULL: Leg = Leg {
        frac: 1.0,
        boundary: None,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeClass {
    Exterior,
    Interior,
    NearBoundary,
}

impl NodeClass {
    pub fn name(self) -> &'static str {
        match self {
            NodeClass::Exterior => "exterior",
            NodeClass::Interior => "interior",
            NodeClass::NearBoundary => "near-boundary",
        }
    }

    pub fn is_unknown(self) -> bool {
        self != NodeClass::Exterior
    }
}

/// Direction order used for legs: east, west, north, south.
pub const DIRECTIONS: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
pub const EAST: usize = 0;
pub const WEST: usize = 1;
pub const NORTH: usize = 2;
pub const SOUTH: usize = 3;

#[derive(Debug, Clone, Copy)]
pub struct GridOptions {
    /// Fewest unknowns allowed across the narrowest section.
    pub min_nodes_across: usize,
}

impl Default for GridOptions {
    fn default() -> Self {
        GridOptions { min_nodes_across: 8 }
    }
}

#[derive(Debug, Clone)]
pub struct Grid2D {
    pub h: f64,
    pub spec: DomainSpec,
    /// Lattice index of the first column and row.
    pub i0: i64,
    pub j0: i64,
    pub nx: usize,
    pub ny: usize,
    pub class: Vec<NodeClass>,
    /// Legs of unknown nodes (full legs elsewhere).
    pub legs: Vec<[Leg; 4]>,
    /// Node id → unknown number.
    pub unknown_of: Vec<Option<usize>>,
    /// Unknown number → node id.
    pub unknowns: Vec<usize>,
    /// Node ids of unknowns on the symmetry axis, left to right.
    pub axis: Vec<usize>,
}

impl Grid2D {
    pub fn id(&self, ix: usize, iy: usize) -> usize {
        iy * self.nx + ix
    }

    pub fn coords(&self, id: usize) -> (usize, usize) {
        (id % self.nx, id / self.nx)
    }

    pub fn xy(&self, id: usize) -> (f64, f64) {
        let (ix, iy) = self.coords(id);
        (
            (self.i0 + ix as i64) as f64 * self.h,
            (self.j0 + iy as i64) as f64 * self.h,
        )
    }

    /// Neighbouring node id in direction `d`, if it is on the lattice.
    pub fn neighbor(&self, id: usize, d: usize) -> Option<usize> {
        let (ix, iy) = self.coords(id);
        let (dx, dy) = DIRECTIONS[d];
        let jx = ix as i64 + dx;
        let jy = iy as i64 + dy;
        if jx < 0 || jy < 0 || jx >= self.nx as i64 || jy >= self.ny as i64 {
            None
        } else {
            Some(self.id(jx as usize, jy as usize))
        }
    }

    /// Point where the leg of `id` in direction `d` ends.
    pub fn leg_end(&self, id: usize, d: usize) -> (f64, f64) {
        let (x, y) = self.xy(id);
        let (dx, dy) = DIRECTIONS[d];
        let t = self.legs[id][d].frac * self.h;
        (x + dx as f64 * t, y + dy as f64 * t)
    }

    pub fn unknown_count(&self) -> usize {
        self.unknowns.len()
    }

    /// Lattice node nearest to `(x, y)`, if it is an unknown.
    pub fn node_at(&self, x: f64, y: f64) -> Option<usize> {
        let ix = (x / self.h).round() as i64 - self.i0;
        let iy = (y / self.h).round() as i64 - self.j0;
        if ix < 0 || iy < 0 || ix >= self.nx as i64 || iy >= self.ny as i64 {
            return None;
        }
        let id = self.id(ix as usize, iy as usize);
        self.unknown_of[id].map(|_| id)
    }

    pub fn count(&self, class: NodeClass) -> usize {
        self.class.iter().filter(|&&c| c == class).count()
    }

    /// "x,y,class" rows for every lattice node.
    pub fn classes_csv(&self) -> String {
        let mut out = String::from("x,y,class\n");
        for id in 0..self.class.len() {
            let (x, y) = self.xy(id);
            let _ = writeln!(out, "{x},{y},{}", self.class[id].name());
        }
        out
    }
}

/// Builds the grid with default options.
pub fn build_grid(spec: &DomainSpec, h: f64) -> Result<Grid2D> {
    build_grid_with(spec, h, GridOptions::default())
}

pub fn build_grid_with(spec: &DomainSpec, h: f64, opts: GridOptions) -> Result<Grid2D> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::InvalidArgument(format!("h = {h} must be positive")));
    }
    let (h, i_range, j_range) = match &spec.kind {
        DomainKind::Profile { .. } => {
            let n = (1.0 / h).round();
            if n < 2.0 || ((n * h) - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!("1/h must be an integer ≥ 2, got h = {h}")));
            }
            let h = 1.0 / n;
            let fmax = (0..PROFILE_SAMPLES)
                .map(|k| spec.f(k as f64 / (PROFILE_SAMPLES - 1) as f64))
                .fold(0.0, f64::max);
            let jmax = (fmax / h).ceil() as i64 + 1;
            (h, (0, n as i64), (-jmax, jmax))
        }
        DomainKind::Disk { cx, cy, r } => (
            h,
            (((cx - r) / h).floor() as i64 - 1, ((cx + r) / h).ceil() as i64 + 1),
            (((cy - r) / h).floor() as i64 - 1, ((cy + r) / h).ceil() as i64 + 1),
        ),
    };
    let nx = (i_range.1 - i_range.0 + 1) as usize;
    let ny = (j_range.1 - j_range.0 + 1) as usize;
    let mut grid = Grid2D {
        h,
        spec: spec.clone(),
        i0: i_range.0,
        j0: j_range.0,
        nx,
        ny,
        class: vec![NodeClass::Exterior; nx * ny],
        legs: vec![[Leg::FULL; 4]; nx * ny],
        unknown_of: vec![None; nx * ny],
        unknowns: Vec::new(),
        axis: Vec::new(),
    };
    let total = nx * ny;
    let mut inside: Vec<bool> = (0..total)
        .map(|id| {
            let (x, y) = grid.xy(id);
            spec.contains(x, y)
        })
        .collect();

    // Leg to the boundary by bisection along the lattice line.
    let leg_to_boundary = |grid: &Grid2D, id: usize, d: usize| -> Leg {
        let (x, y) = grid.xy(id);
        let (dx, dy) = DIRECTIONS[d];
        let at = |t: f64| (x + dx as f64 * t * h, y + dy as f64 * t * h);
        let (ex, ey) = at(1.0);
        if spec.level(ex, ey) <= 0.0 {
            // the neighbour lies exactly on the boundary
            return Leg {
                frac: 1.0,
                boundary: Some(spec.boundary_kind(ex, ey)),
            };
        }
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while hi - lo > LEG_TOL {
            let mid = 0.5 * (lo + hi);
            let (px, py) = at(mid);
            if spec.level(px, py) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t = 0.5 * (lo + hi);
        let (px, py) = at(t);
        Leg {
            frac: if t > 1.0 - LEG_TOL { 1.0 } else { t },
            boundary: Some(spec.boundary_kind(px, py)),
        }
    };

    let compute_legs = |grid: &mut Grid2D, inside: &[bool]| {
        for id in 0..total {
            if !inside[id] {
                continue;
            }
            for d in 0..4 {
                grid.legs[id][d] = match grid.neighbor(id, d) {
                    Some(nb) if inside[nb] => Leg::FULL,
                    _ => leg_to_boundary(grid, id, d),
                };
            }
        }
    };
    compute_legs(&mut grid, &inside);
    let snapped: Vec<usize> = (0..total)
        .filter(|&id| inside[id] && grid.legs[id].iter().any(|l| l.frac < SNAP_FRACTION))
        .collect();
    if !snapped.is_empty() {
        for &id in &snapped {
            inside[id] = false;
        }
        compute_legs(&mut grid, &inside);
    }

    for id in 0..total {
        if inside[id] {
            grid.class[id] = if grid.legs[id].iter().all(|l| l.boundary.is_none()) {
                NodeClass::Interior
            } else {
                NodeClass::NearBoundary
            };
            grid.unknown_of[id] = Some(grid.unknowns.len());
            grid.unknowns.push(id);
        } else {
            grid.legs[id] = [Leg::FULL; 4];
        }
    }

    let axis_row = match &spec.kind {
        DomainKind::Profile { .. } => Some(0.0),
        DomainKind::Disk { cy, .. } => {
            let j = (cy / h).round();
            ((j * h - cy).abs() <= 1e-12 * h.max(cy.abs())).then_some(j * h)
        }
    };
    if let Some(y0) = axis_row {
        let iy = ((y0 / h).round() as i64 - grid.j0) as usize;
        grid.axis = (0..nx)
            .map(|ix| grid.id(ix, iy))
            .filter(|&id| inside[id])
            .collect();
    }

    let across = nodes_across(&grid, &inside);
    if across < opts.min_nodes_across {
        return Err(Error::TooThin { h, nodes: across });
    }
    Ok(grid)
}

/// Unknowns in the thinnest lattice column (profile kind) or in the row
/// through the centre (disk kind).
fn nodes_across(grid: &Grid2D, inside: &[bool]) -> usize {
    match &grid.spec.kind {
        DomainKind::Profile { .. } => (1..grid.nx - 1)
            .map(|ix| (0..grid.ny).filter(|&iy| inside[grid.id(ix, iy)]).count())
            .min()
            .unwrap_or(0),
        DomainKind::Disk { cy, .. } => {
            let iy = ((cy / grid.h).round() as i64 - grid.j0) as usize;
            (0..grid.nx).filter(|&ix| inside[grid.id(ix, iy)]).count()
        }
    }
}

/// x-coordinates of the unknowns on the symmetry axis, sorted.
pub fn axis_candidates(grid: &Grid2D) -> Result<Vec<f64>> {
    if grid.axis.is_empty() {
        return Err(Error::NoAxisRow);
    }
    Ok(grid.axis.iter().map(|&id| grid.xy(id).0).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn loose() -> GridOptions {
        GridOptions { min_nodes_across: 3 }
    }

    fn unknown_points(g: &Grid2D) -> Vec<(i64, i64)> {
        g.unknowns
            .iter()
            .map(|&id| {
                let (ix, iy) = g.coords(id);
                (g.i0 + ix as i64, g.j0 + iy as i64)
            })
            .collect()
    }

    #[test]
    fn rectangle_counting() {
        let spec = DomainSpec::profile_str("0.5").unwrap();
        let g = build_grid_with(&spec, 0.25, loose()).unwrap();
        let mut pts = unknown_points(&g);
        pts.sort();
        let want: Vec<(i64, i64)> = (1..=3).flat_map(|i| (-1..=1).map(move |j| (i, j))).collect();
        assert_eq!(pts, want);
        assert_eq!(g.count(NodeClass::Interior), 1);
        assert_eq!(g.count(NodeClass::NearBoundary), 8);
        let corner = g.node_at(0.25, 0.25).unwrap();
        assert_eq!(g.legs[corner][WEST].boundary, Some(BoundaryKind::Wall));
        assert_eq!(g.legs[corner][NORTH].boundary, Some(BoundaryKind::Curve));
        assert!(g.legs[corner].iter().all(|l| l.frac == 1.0));
        assert_eq!(axis_candidates(&g).unwrap(), vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn disk_is_dihedrally_symmetric() {
        let g = build_grid_with(&DomainSpec::unit_disk(), 0.5, GridOptions { min_nodes_across: 1 })
            .unwrap();
        let pts: HashSet<(i64, i64)> = unknown_points(&g).into_iter().collect();
        assert_eq!(pts.len(), 9);
        for &(i, j) in &pts {
            for q in [(-i, j), (i, -j), (j, i), (-j, -i), (-i, -j), (j, -i), (-j, i)] {
                assert!(pts.contains(&q));
            }
        }
        let fine = build_grid(&DomainSpec::unit_disk(), 0.1).unwrap();
        let pts: HashSet<(i64, i64)> = unknown_points(&fine).into_iter().collect();
        for &(i, j) in &pts {
            assert!(pts.contains(&(j, -i)) && pts.contains(&(-i, j)));
        }
    }

    #[test]
    fn area_matches_riemann_count() {
        let spec = DomainSpec::profile_str("0.2 + 0.3*x").unwrap();
        let g = build_grid(&spec, 0.01).unwrap();
        let approx = g.unknown_count() as f64 * 1e-4;
        assert!((spec.area() - 0.7).abs() < 1e-12);
        assert!((approx / 0.7 - 1.0).abs() < 0.02, "{approx}");
    }

    #[test]
    fn axis_lists() {
        let spec = DomainSpec::profile_str("0.2+0.3*x").unwrap();
        let g = build_grid_with(&spec, 0.1, loose()).unwrap();
        let xs = axis_candidates(&g).unwrap();
        assert_eq!(xs.len(), 9);
        for (k, x) in xs.iter().enumerate() {
            assert!((x - 0.1 * (k + 1) as f64).abs() < 1e-12);
        }
        let off = build_grid(&DomainSpec::disk(0.0, 0.05, 1.0).unwrap(), 0.1).unwrap();
        assert!(matches!(axis_candidates(&off), Err(Error::NoAxisRow)));
        let on = build_grid(&DomainSpec::disk(0.0, 0.2, 1.0).unwrap(), 0.1).unwrap();
        assert_eq!(axis_candidates(&on).unwrap().len(), 19);
    }

    #[test]
    fn legs_are_fractions() {
        let spec = DomainSpec::profile_str("0.3 + 0.2*sin(3*x)").unwrap();
        let g = build_grid(&spec, 1.0 / 40.0).unwrap();
        for &id in &g.unknowns {
            for d in 0..4 {
                let leg = g.legs[id][d];
                assert!(leg.frac > 0.0 && leg.frac <= 1.0);
                if leg.boundary.is_some() {
                    let (x, y) = g.leg_end(id, d);
                    assert!(spec.level(x, y).abs() < 1e-9);
                } else {
                    assert!(g.unknown_of[g.neighbor(id, d).unwrap()].is_some());
                }
            }
            let (x, y) = g.xy(id);
            assert!(x > 0.0 && x < 1.0 && y.abs() < spec.f(x));
        }
        let unknowns: HashSet<usize> = g.unknowns.iter().copied().collect();
        for id in 0..g.class.len() {
            let (x, y) = g.xy(id);
            let inside = x > 0.0 && x < 1.0 && y.abs() < spec.f(x);
            assert_eq!(unknowns.contains(&id), inside, "({x}, {y})");
        }
    }

    #[test]
    fn reflection_mirrors_mask() {
        let spec = DomainSpec::profile_str("0.2+0.3*x").unwrap();
        let a = build_grid(&spec, 1.0 / 32.0).unwrap();
        let b = build_grid(&spec.reflected().unwrap(), 1.0 / 32.0).unwrap();
        let pa: HashSet<(i64, i64)> = unknown_points(&a).into_iter().collect();
        let pb: HashSet<(i64, i64)> = unknown_points(&b).into_iter().map(|(i, j)| (32 - i, j)).collect();
        assert_eq!(pa, pb);
    }

    #[test]
    fn refinement_nests() {
        let spec = DomainSpec::profile_str("0.2 + 0.1*cos(6*x)").unwrap();
        let coarse = build_grid(&spec, 1.0 / 64.0).unwrap();
        let fine = build_grid(&spec, 1.0 / 128.0).unwrap();
        let fine_pts: HashSet<(i64, i64)> = unknown_points(&fine).into_iter().collect();
        for (i, j) in unknown_points(&coarse) {
            assert!(fine_pts.contains(&(2 * i, 2 * j)));
        }
    }

    #[test]
    fn thin_domains_rejected() {
        let spec = DomainSpec::profile_str("0.02").unwrap();
        assert!(matches!(build_grid(&spec, 0.05), Err(Error::TooThin { .. })));
        assert!(build_grid(&spec, 1.0 / 256.0).is_ok());
        assert!(build_grid(&spec, 0.3).is_err());
        assert!(DomainSpec::profile_str("x - 0.5").is_err());
        assert!(DomainSpec::disk(0.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn distances() {
        let d = DomainSpec::unit_disk();
        assert!((d.distance_to_boundary(0.25, 0.0) - 0.75).abs() < 1e-15);
        let r = DomainSpec::profile_str("0.5").unwrap();
        assert!((r.distance_to_boundary(0.5, 0.1) - 0.4).abs() < 1e-9);
        assert!((r.distance_to_boundary(0.1, 0.0) - 0.1).abs() < 1e-12);
        let s = DomainSpec::profile_str("0.2+0.3*x").unwrap();
        // distance to the line y = 0.2 + 0.3x from (0.5, 0)
        let want = 0.35 / (1.0f64 + 0.09).sqrt();
        assert!((s.distance_to_boundary(0.5, 0.0) - want).abs() < 1e-9);
    }

    #[test]
    fn classes_csv_shape() {
        let spec = DomainSpec::profile_str("0.5").unwrap();
        let g = build_grid_with(&spec, 0.25, loose()).unwrap();
        let csv = g.classes_csv();
        assert!(csv.starts_with("x,y,class\n"));
        assert_eq!(csv.lines().count(), 1 + g.nx * g.ny);
        assert!(csv.contains("0.5,0,interior"));
    }
}
