//! Compressed sparse rows, ILU(0), and preconditioned CG / BiCGSTAB.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::numeric::{dot, norm};

pub const MAX_ITERATIONS: usize = 20_000;
/// Krylov restarts from the true residual before giving up.
const RESTARTS: usize = 4;

#[derive(Debug, Clone)]
pub struct Csr {
    pub n: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl Csr {
    /// Builds from per-row `(column, value)` lists; duplicates are summed.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Csr {
        let n = rows.len();
        let mut indptr = Vec::with_capacity(n + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (j, v) in row {
                if indices.len() > *indptr.last().unwrap() && *indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    indices.push(j);
                    values.push(v);
                }
            }
            indptr.push(indices.len());
        }
        Csr {
            n,
            indptr,
            indices,
            values,
        }
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.indptr[i]..self.indptr[i + 1]).map(move |k| (self.indices[k], self.values[k]))
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for k in self.indptr[i]..self.indptr[i + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            *yi = acc;
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    fn get(&self, i: usize, j: usize) -> f64 {
        let cols = &self.indices[self.indptr[i]..self.indptr[i + 1]];
        match cols.binary_search(&j) {
            Ok(k) => self.values[self.indptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// Exact symmetry of the stored entries (up to `tol` relative).
    pub fn is_symmetric(&self, tol: f64) -> bool {
        (0..self.n).all(|i| {
            self.row(i)
                .all(|(j, v)| (v - self.get(j, i)).abs() <= tol * v.abs().max(1.0))
        })
    }
}

/// Incomplete LU with the sparsity pattern of the matrix.
#[derive(Debug, Clone)]
pub struct Ilu0 {
    lu: Csr,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr) -> Result<Ilu0> {
        let mut lu = a.clone();
        let n = a.n;
        let mut diag = vec![usize::MAX; n];
        for i in 0..n {
            for k in lu.indptr[i]..lu.indptr[i + 1] {
                if lu.indices[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(Error::InvalidArgument(format!("row {i} has no diagonal entry")));
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (start, end) = (lu.indptr[i], lu.indptr[i + 1]);
            for k in start..end {
                pos[lu.indices[k]] = k;
            }
            for k in start..end {
                let col = lu.indices[k];
                if col >= i {
                    break;
                }
                let factor = lu.values[k] / lu.values[diag[col]];
                lu.values[k] = factor;
                for kk in diag[col] + 1..lu.indptr[col + 1] {
                    let p = pos[lu.indices[kk]];
                    if p != usize::MAX {
                        lu.values[p] -= factor * lu.values[kk];
                    }
                }
            }
            for k in start..end {
                pos[lu.indices[k]] = usize::MAX;
            }
            if !(lu.values[diag[i]].abs() > 0.0) {
                return Err(Error::InvalidArgument(format!("zero pivot in row {i}")));
            }
        }
        Ok(Ilu0 { lu, diag })
    }

    pub fn apply_into(&self, r: &[f64], z: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut acc = r[i];
            for k in lu.indptr[i]..self.diag[i] {
                acc -= lu.values[k] * z[lu.indices[k]];
            }
            z[i] = acc;
        }
        for i in (0..lu.n).rev() {
            let mut acc = z[i];
            for k in self.diag[i] + 1..lu.indptr[i + 1] {
                acc -= lu.values[k] * z[lu.indices[k]];
            }
            z[i] = acc / lu.values[self.diag[i]];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// ILU(0)-preconditioned conjugate gradients (symmetric systems).
    Cg,
    /// ILU(0)-preconditioned BiCGSTAB (Shortley–Weller rows).
    BiCgStab,
}

/// How a linear solve went.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolveStats {
    pub method: Method,
    pub iterations: usize,
    /// Final `‖D⁻¹(b − Ax)‖ / ‖D⁻¹b‖`, `D` the diagonal.
    pub residual: f64,
}

/// Matrix with its preconditioner and a choice of Krylov method.
#[derive(Debug, Clone)]
pub struct Solver {
    pub a: Csr,
    ilu: Ilu0,
    pub method: Method,
    /// `1/|a_ii|`: residuals are measured row-scaled, so that rows with
    /// very short boundary legs do not swamp the rest.
    scale: Vec<f64>,
    /// `‖D⁻¹A‖∞`, for the backward-error test.
    scaled_norm_a: f64,
}

impl Solver {
    pub fn new(a: Csr) -> Result<Solver> {
        let method = if a.is_symmetric(1e-14) {
            Method::Cg
        } else {
            Method::BiCgStab
        };
        let ilu = Ilu0::new(&a)?;
        let scale = (0..a.n)
            .map(|i| {
                let d = a.row(i).find(|&(j, _)| j == i).map_or(0.0, |(_, v)| v.abs());
                if d > 0.0 { 1.0 / d } else { 1.0 }
            })
            .collect::<Vec<f64>>();
        let scaled_norm_a = (0..a.n)
            .map(|i| scale[i] * a.row(i).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        Ok(Solver {
            a,
            ilu,
            method,
            scale,
            scaled_norm_a,
        })
    }

    /// Solves `A x = b` to relative residual `tol`, starting from `x0`.
    pub fn solve(&self, b: &[f64], x0: Option<&[f64]>, tol: f64) -> Result<(Vec<f64>, SolveStats)> {
        let n = self.a.n;
        let mut x = x0.map(|v| v.to_vec()).unwrap_or_else(|| vec![0.0; n]);
        let bn = self.scaled_norm(b);
        if bn == 0.0 {
            return Ok((
                vec![0.0; n],
                SolveStats {
                    method: self.method,
                    iterations: 0,
                    residual: 0.0,
                },
            ));
        }
        // the recurrences drift from the true residual; restart until it holds
        let mut iterations = 0;
        let mut r = self.residual(b, &x);
        for _ in 0..RESTARTS {
            if r <= tol * bn {
                break;
            }
            iterations += match self.method {
                Method::Cg => self.cg(b, &mut x, tol * bn)?,
                Method::BiCgStab => self.bicgstab(b, &mut x, tol * bn)?,
            };
            r = self.residual(b, &x);
        }
        // when restarts no longer help, the residual sits at rounding level:
        // accept it if the normwise backward error meets `tol`
        if r > tol * bn && r > tol * (bn + self.scaled_norm_a * norm(&x)) {
            return Err(self.cap(r, tol * bn));
        }
        Ok((
            x,
            SolveStats {
                method: self.method,
                iterations,
                residual: r / bn,
            },
        ))
    }

    fn residual(&self, b: &[f64], x: &[f64]) -> f64 {
        let ax = self.a.matvec(x);
        let r: Vec<f64> = b.iter().zip(&ax).map(|(p, q)| p - q).collect();
        self.scaled_norm(&r)
    }

    fn scaled_norm(&self, v: &[f64]) -> f64 {
        v.iter().zip(&self.scale).map(|(x, s)| (x * s) * (x * s)).sum::<f64>().sqrt()
    }

    fn cap(&self, residual: f64, bnorm_tol: f64) -> Error {
        Error::IterationCap {
            solver: match self.method {
                Method::Cg => "preconditioned CG",
                Method::BiCgStab => "preconditioned BiCGSTAB",
            },
            iterations: MAX_ITERATIONS,
            residual: residual / bnorm_tol.max(f64::MIN_POSITIVE),
        }
    }

    fn cg(&self, b: &[f64], x: &mut [f64], target: f64) -> Result<usize> {
        let n = b.len();
        let mut r: Vec<f64> = self.a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
        let mut z = vec![0.0; n];
        self.ilu.apply_into(&r, &mut z);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut q = vec![0.0; n];
        for it in 0..MAX_ITERATIONS {
            if self.scaled_norm(&r) <= target {
                return Ok(it);
            }
            self.a.matvec_into(&p, &mut q);
            let alpha = rz / dot(&p, &q);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * q[i];
            }
            self.ilu.apply_into(&r, &mut z);
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        let res = self.scaled_norm(&r);
        if res <= target {
            Ok(MAX_ITERATIONS)
        } else {
            Err(self.cap(res, target))
        }
    }

    fn bicgstab(&self, b: &[f64], x: &mut [f64], target: f64) -> Result<usize> {
        let n = b.len();
        let mut r: Vec<f64> = self.a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect();
        let mut shadow = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut ph = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut sh = vec![0.0; n];
        let mut t = vec![0.0; n];
        for it in 0..MAX_ITERATIONS {
            if self.scaled_norm(&r) <= target {
                return Ok(it);
            }
            let rho_new = dot(&shadow, &r);
            if rho_new.abs() < 1e-300 || omega == 0.0 {
                // breakdown: restart from the current residual
                shadow.copy_from_slice(&r);
                rho = 1.0;
                alpha = 1.0;
                omega = 1.0;
                v.iter_mut().for_each(|e| *e = 0.0);
                p.iter_mut().for_each(|e| *e = 0.0);
                continue;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            self.ilu.apply_into(&p, &mut ph);
            self.a.matvec_into(&ph, &mut v);
            alpha = rho / dot(&shadow, &v);
            for i in 0..n {
                s[i] = r[i] - alpha * v[i];
            }
            if self.scaled_norm(&s) <= target {
                for i in 0..n {
                    x[i] += alpha * ph[i];
                }
                r.copy_from_slice(&s);
                return Ok(it + 1);
            }
            self.ilu.apply_into(&s, &mut sh);
            self.a.matvec_into(&sh, &mut t);
            let tt = dot(&t, &t);
            omega = if tt > 0.0 { dot(&t, &s) / tt } else { 0.0 };
            for i in 0..n {
                x[i] += alpha * ph[i] + omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
        }
        let res = self.scaled_norm(&r);
        if res <= target {
            Ok(MAX_ITERATIONS)
        } else {
            Err(self.cap(res, target))
        }
    }
}
