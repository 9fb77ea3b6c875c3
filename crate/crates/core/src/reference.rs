//! Exact dense solvers used to check the estimators: LU with partial
//! pivoting, a symmetric pseudo-inverse through cyclic Jacobi rotations,
//! the ∞-norm condition number, range membership and the Friedkin–Johnsen
//! fixed-point iteration. Desk scale only; nothing here is tuned for speed.

use crate::error::{Error, Result};
use crate::system::SparseDDSystem;

pub const DENSE_LIMIT: usize = 5000;
pub const EIGEN_LIMIT: usize = 2000;
const PIVOT_RTOL: f64 = 1e-12;
const EIGEN_RTOL: f64 = 1e-10;
const SYMMETRY_TOL: f64 = 1e-12;
const RANGE_RTOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct DenseSolveResult {
    pub z: Vec<f64>,
    /// `‖Sz − b‖∞`.
    pub residual_inf: f64,
    pub singular_flag: bool,
}

pub fn mat_vec(a: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(x).map(|(s, v)| s * v).sum()).collect()
}

pub fn residual_inf(a: &[Vec<f64>], z: &[f64], b: &[f64]) -> f64 {
    mat_vec(a, z).iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn inf_norm_vec(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn inf_norm_mat(a: &[Vec<f64>]) -> f64 {
    a.iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}

/// LU factors of a square matrix with partial pivoting.
struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    singular: bool,
}

impl Lu {
    fn factor(a: &[Vec<f64>]) -> Lu {
        let n = a.len();
        let mut lu: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let row_norm: Vec<f64> = a.iter().map(|r| r.iter().fold(0.0f64, |m, v| m.max(v.abs()))).collect();
        let mut singular = false;
        for k in 0..n {
            let p = (k..n)
                .max_by(|&i, &j| lu[i * n + k].abs().total_cmp(&lu[j * n + k].abs()))
                .unwrap();
            if p != k {
                for c in 0..n {
                    lu.swap(k * n + c, p * n + c);
                }
                perm.swap(k, p);
            }
            let pivot = lu[k * n + k];
            if pivot.abs() <= PIVOT_RTOL * row_norm[perm[k]] || pivot == 0.0 {
                singular = true;
                lu[k * n + k] = 0.0;
                continue;
            }
            for i in k + 1..n {
                let f = lu[i * n + k] / pivot;
                lu[i * n + k] = f;
                if f != 0.0 {
                    for c in k + 1..n {
                        lu[i * n + c] -= f * lu[k * n + c];
                    }
                }
            }
        }
        Lu { n, lu, perm, singular }
    }

    /// Solves with the factors; free variables of a singular factor are 0.
    fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let s: f64 = (0..i).map(|c| self.lu[i * n + c] * y[c]).sum();
            y[i] -= s;
        }
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|c| self.lu[i * n + c] * y[c]).sum();
            let d = self.lu[i * n + i];
            y[i] = if d == 0.0 { 0.0 } else { (y[i] - s) / d };
        }
        y
    }
}

/// Gaussian elimination with partial pivoting on a dense copy of `S`.
pub fn dense_solve(s: &SparseDDSystem, b: &[f64]) -> Result<DenseSolveResult> {
    dense_solve_matrix(&s.to_dense(), b)
}

pub fn dense_solve_matrix(a: &[Vec<f64>], b: &[f64]) -> Result<DenseSolveResult> {
    let n = a.len();
    if n > DENSE_LIMIT {
        return Err(Error::TooLarge { n, limit: DENSE_LIMIT });
    }
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let lu = Lu::factor(a);
    let z = lu.solve(b);
    let residual_inf = residual_inf(a, &z, b);
    Ok(DenseSolveResult { z, residual_inf, singular_flag: lu.singular })
}

/// Eigenpairs of a symmetric matrix: `values[i]` belongs to column `i` of
/// `vectors` (row-major `n × n`).
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    pub vectors: Vec<f64>,
}

impl SymmetricEigen {
    pub fn vector(&self, i: usize) -> Vec<f64> {
        let n = self.values.len();
        (0..n).map(|r| self.vectors[r * n + i]).collect()
    }
}

fn check_symmetric(a: &[Vec<f64>]) -> Result<()> {
    let scale = a.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            let gap = (a[i][j] - a[j][i]).abs();
            if gap > SYMMETRY_TOL * scale {
                return Err(Error::NotSymmetric(gap));
            }
        }
    }
    Ok(())
}

/// Cyclic Jacobi eigendecomposition of a symmetric matrix.
pub fn symmetric_eigen(a: &[Vec<f64>]) -> Result<SymmetricEigen> {
    let n = a.len();
    if n > EIGEN_LIMIT {
        return Err(Error::TooLarge { n, limit: EIGEN_LIMIT });
    }
    check_symmetric(a)?;
    let mut m: Vec<f64> = a.iter().flat_map(|r| r.iter().copied()).collect();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let total: f64 = m.iter().map(|x| x * x).sum::<f64>().sqrt();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j] * m[i * n + j])
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * total || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = m[p * n + p];
                let aqq = m[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let values = (0..n).map(|i| m[i * n + i]).collect();
    Ok(SymmetricEigen { values, vectors: v })
}

/// `VΣ⁺Vᵀ` applied to each of `rhs`, with eigenvalues at most
/// `1e-10·max|λ|` in magnitude treated as zero.
fn pseudo_apply(e: &SymmetricEigen, rhs: &[&[f64]]) -> Vec<Vec<f64>> {
    let n = e.values.len();
    let lmax = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let keep: Vec<usize> = (0..n).filter(|&i| e.values[i].abs() > EIGEN_RTOL * lmax).collect();
    rhs.iter()
        .map(|b| {
            let mut z = vec![0.0; n];
            for &i in &keep {
                let coef: f64 = (0..n).map(|r| e.vectors[r * n + i] * b[r]).sum::<f64>() / e.values[i];
                for r in 0..n {
                    z[r] += coef * e.vectors[r * n + i];
                }
            }
            z
        })
        .collect()
}

/// `z = S⁺b` for symmetric `S`.
pub fn pseudo_solve_symmetric(s: &SparseDDSystem, b: &[f64]) -> Result<DenseSolveResult> {
    pseudo_solve_matrix(&s.to_dense(), b)
}

pub fn pseudo_solve_matrix(a: &[Vec<f64>], b: &[f64]) -> Result<DenseSolveResult> {
    let n = a.len();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    let e = symmetric_eigen(a)?;
    let lmax = e.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let singular_flag = e.values.iter().any(|v| v.abs() <= EIGEN_RTOL * lmax);
    let z = pseudo_apply(&e, &[b]).pop().unwrap();
    let residual_inf = residual_inf(a, &z, b);
    Ok(DenseSolveResult { z, residual_inf, singular_flag })
}

/// `κ∞(S) = ‖S‖∞·‖S⁻¹‖∞`, with the pseudo-inverse when `S` is singular
/// (which then has to be symmetric).
pub fn kappa_inf(s: &SparseDDSystem) -> Result<f64> {
    kappa_inf_matrix(&s.to_dense())
}

pub fn kappa_inf_matrix(a: &[Vec<f64>]) -> Result<f64> {
    let n = a.len();
    if n > EIGEN_LIMIT {
        return Err(Error::TooLarge { n, limit: EIGEN_LIMIT });
    }
    let unit = |j: usize| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect::<Vec<f64>>();
    let lu = Lu::factor(a);
    let cols: Vec<Vec<f64>> = if !lu.singular {
        (0..n).map(|j| lu.solve(&unit(j))).collect()
    } else {
        let e = symmetric_eigen(a).map_err(|err| match err {
            Error::NotSymmetric(_) => Error::SingularNonSymmetric,
            other => other,
        })?;
        let units: Vec<Vec<f64>> = (0..n).map(unit).collect();
        let refs: Vec<&[f64]> = units.iter().map(|u| u.as_slice()).collect();
        pseudo_apply(&e, &refs)
    };
    // cols[j] is column j of the inverse; the ∞-norm sums |·| along rows
    let inv_norm = (0..n).map(|i| cols.iter().map(|c| c[i].abs()).sum::<f64>()).fold(0.0, f64::max);
    Ok(inf_norm_mat(a) * inv_norm)
}

/// Whether `b` lies in the range of symmetric `S`:
/// `‖S·S⁺b − b‖∞ ≤ 1e-8·max(1, ‖b‖∞)`.
pub fn in_range(s: &SparseDDSystem, b: &[f64]) -> Result<bool> {
    let a = s.to_dense();
    let r = pseudo_solve_matrix(&a, b)?;
    Ok(r.residual_inf <= RANGE_RTOL * inf_norm_vec(b).max(1.0))
}

/// Iterates `z_u ← (b_u + Σ w_uv z_v)/(1 + Σ w_uv)` from `z = innate` until
/// successive iterates differ by at most `tol` in ∞-norm.
pub fn fj_fixed_point(
    n: usize,
    edges: &[(usize, usize, f64)],
    innate: &[f64],
    tol: f64,
    max_iters: usize,
) -> Result<Vec<f64>> {
    if innate.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: innate.len() });
    }
    for (u, &x) in innate.iter().enumerate() {
        if !(0.0..=1.0).contains(&x) {
            return Err(Error::OpinionOutOfRange { vertex: u, value: x });
        }
    }
    let mut adj: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
    for &(u, v, w) in edges {
        if u >= n || v >= n {
            return Err(Error::IndexOutOfRange { index: u.max(v), bound: n });
        }
        if !(w > 0.0) {
            return Err(Error::NegativeWeight(u, v, w));
        }
        adj[u].push((v, w));
        adj[v].push((u, w));
    }
    let mut z = innate.to_vec();
    let mut next = vec![0.0; n];
    let mut gap = f64::INFINITY;
    for _ in 0..max_iters {
        for u in 0..n {
            let (num, den) = adj[u].iter().fold((innate[u], 1.0), |(a, d), &(v, w)| (a + w * z[v], d + w));
            next[u] = num / den;
        }
        gap = z.iter().zip(&next).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        std::mem::swap(&mut z, &mut next);
        if gap <= tol {
            return Ok(z);
        }
    }
    Err(Error::NonConvergence { iters: max_iters, gap })
}
