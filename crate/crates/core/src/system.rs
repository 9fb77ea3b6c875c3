//! Sparse storage for a diagonally dominant pair `(S, b)`.
//!
//! Off-diagonal entries are kept per row in construction order; that order
//! is the one neighbor queries expose. Each row also carries the prefix sums
//! of `|S_uv|`, which is the table random-walk queries sample from.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Relative tolerance used when re-checking cached weighted degrees.
pub const DOUT_RTOL: f64 = 1e-12;

/// Coordinate-list form of a system, as read from or written to disk.
#[derive(Debug, Clone, PartialEq)]
pub struct Triplets {
    pub n: usize,
    pub diag: Vec<(usize, f64)>,
    pub offdiag: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseDDSystem {
    n: usize,
    diag: Vec<f64>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    weights: Vec<f64>,
    cumw: Vec<f64>,
    dout: Vec<f64>,
    b: Vec<f64>,
    // packed copies of the above that the oracle reads on every query
    nodes: Vec<Node>,
    arcs: Vec<Arc>,
}

/// Everything a vertex query reports, plus the row's range in `arcs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Node {
    pub s_uu: f64,
    pub d_out: f64,
    pub b_u: f64,
    pub start: usize,
    pub end: usize,
}

/// One off-diagonal entry with the running sum of `|S_uv|` up to and
/// including it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Arc {
    pub to: usize,
    pub weight: f64,
    pub cum: f64,
}

fn check_finite(x: f64) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NonFinite(x))
    }
}

impl SparseDDSystem {
    /// Builds a system from coordinate entries. Diagonal entries that are not
    /// listed are zero. Row order follows the order of `offdiag`.
    pub fn from_triplets(
        n: usize,
        diag_entries: &[(usize, f64)],
        offdiag: &[(usize, usize, f64)],
        b: Vec<f64>,
    ) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameters("dimension must be positive".into()));
        }
        if b.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: b.len() });
        }
        for &x in &b {
            check_finite(x)?;
        }

        let mut diag = vec![0.0; n];
        let mut seen_diag = vec![false; n];
        for &(i, v) in diag_entries {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, bound: n });
            }
            if seen_diag[i] {
                return Err(Error::DuplicateEntry(i, i));
            }
            seen_diag[i] = true;
            diag[i] = check_finite(v)?;
        }

        let mut seen = HashSet::with_capacity(offdiag.len());
        let mut counts = vec![0usize; n];
        for &(i, j, w) in offdiag {
            if i >= n {
                return Err(Error::IndexOutOfRange { index: i, bound: n });
            }
            if j >= n {
                return Err(Error::IndexOutOfRange { index: j, bound: n });
            }
            if i == j {
                return Err(Error::SelfLoop(i));
            }
            check_finite(w)?;
            if w == 0.0 {
                return Err(Error::ZeroWeight(i, j));
            }
            if !seen.insert((i, j)) {
                return Err(Error::DuplicateEntry(i, j));
            }
            counts[i] += 1;
        }

        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        for c in &counts {
            row_ptr.push(row_ptr.last().unwrap() + c);
        }
        let nnz = offdiag.len();
        let mut fill = row_ptr[..n].to_vec();
        let mut cols = vec![0usize; nnz];
        let mut weights = vec![0.0; nnz];
        for &(i, j, w) in offdiag {
            cols[fill[i]] = j;
            weights[fill[i]] = w;
            fill[i] += 1;
        }

        let mut cumw = vec![0.0; nnz];
        let mut dout = vec![0.0; n];
        for u in 0..n {
            let mut acc = 0.0;
            for k in row_ptr[u]..row_ptr[u + 1] {
                acc += weights[k].abs();
                cumw[k] = acc;
            }
            dout[u] = acc;
        }

        Ok(Self { n, diag, row_ptr, cols, weights, cumw, dout, b, nodes: Vec::new(), arcs: Vec::new() }.packed())
    }

    /// `S = I + L` for an undirected weighted graph with innate opinions `b`.
    pub fn fj_system(n: usize, edges: &[(usize, usize, f64)], innate: Vec<f64>) -> Result<Self> {
        if innate.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: innate.len() });
        }
        for (u, &x) in innate.iter().enumerate() {
            if !(0.0..=1.0).contains(&x) {
                return Err(Error::OpinionOutOfRange { vertex: u, value: x });
            }
        }
        let mut diag = vec![1.0; n];
        let mut offdiag = Vec::with_capacity(2 * edges.len());
        for &(u, v, w) in edges {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::NegativeWeight(u, v, w));
            }
            if u >= n || v >= n {
                return Err(Error::IndexOutOfRange { index: u.max(v), bound: n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            diag[u] += w;
            diag[v] += w;
            offdiag.push((u, v, -w));
            offdiag.push((v, u, -w));
        }
        let diag: Vec<_> = diag.into_iter().enumerate().collect();
        Self::from_triplets(n, &diag, &offdiag, innate)
    }

    pub fn from_parts(t: &Triplets) -> Result<Self> {
        Self::from_triplets(t.n, &t.diag, &t.offdiag, t.b.clone())
    }

    pub fn to_triplets(&self) -> Triplets {
        let diag = self.diag.iter().copied().enumerate().collect();
        let mut offdiag = Vec::with_capacity(self.cols.len());
        for u in 0..self.n {
            for (v, w) in self.row(u) {
                offdiag.push((u, v, w));
            }
        }
        Triplets { n: self.n, diag, offdiag, b: self.b.clone() }
    }

    /// Same matrix, different right-hand side.
    pub fn with_rhs(&self, b: Vec<f64>) -> Result<Self> {
        if b.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: b.len() });
        }
        for &x in &b {
            check_finite(x)?;
        }
        Ok(Self { b, ..self.clone() }.packed())
    }

    /// `(-S, -b)`; every sample distribution of the walk estimators is
    /// unchanged by this map.
    pub fn negated(&self) -> Self {
        Self {
            diag: self.diag.iter().map(|x| -x).collect(),
            weights: self.weights.iter().map(|x| -x).collect(),
            b: self.b.iter().map(|x| -x).collect(),
            ..self.clone()
        }
        .packed()
    }

    fn packed(mut self) -> Self {
        self.nodes = (0..self.n)
            .map(|u| Node {
                s_uu: self.diag[u],
                d_out: self.dout[u],
                b_u: self.b[u],
                start: self.row_ptr[u],
                end: self.row_ptr[u + 1],
            })
            .collect();
        self.arcs = (0..self.cols.len())
            .map(|k| Arc { to: self.cols[k], weight: self.weights[k], cum: self.cumw[k] })
            .collect();
        self
    }

    #[inline]
    pub(crate) fn node(&self, u: usize) -> Option<&Node> {
        self.nodes.get(u)
    }

    #[inline]
    pub(crate) fn arcs(&self, node: &Node) -> &[Arc] {
        &self.arcs[node.start..node.end]
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn diag(&self, u: usize) -> f64 {
        self.diag[u]
    }

    pub fn diagonal(&self) -> &[f64] {
        &self.diag
    }

    pub fn rhs(&self) -> &[f64] {
        &self.b
    }

    #[inline]
    pub fn b(&self, u: usize) -> f64 {
        self.b[u]
    }

    /// Weighted out-degree `Σ_{v≠u} |S_uv|`.
    #[inline]
    pub fn dout(&self, u: usize) -> f64 {
        self.dout[u]
    }

    /// Number of off-diagonal entries in row `u`.
    #[inline]
    pub fn degree(&self, u: usize) -> usize {
        self.row_ptr[u + 1] - self.row_ptr[u]
    }

    pub fn nnz_offdiag(&self) -> usize {
        self.cols.len()
    }

    #[inline]
    pub fn row_cols(&self, u: usize) -> &[usize] {
        &self.cols[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    #[inline]
    pub fn row_weights(&self, u: usize) -> &[f64] {
        &self.weights[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    /// Prefix sums of `|S_uv|` over row `u`.
    #[inline]
    pub fn row_cumw(&self, u: usize) -> &[f64] {
        &self.cumw[self.row_ptr[u]..self.row_ptr[u + 1]]
    }

    pub fn row(&self, u: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.row_cols(u).iter().copied().zip(self.row_weights(u).iter().copied())
    }

    /// Position `k` (0-based) of row `u`.
    #[inline]
    pub fn entry(&self, u: usize, k: usize) -> (usize, f64) {
        let at = self.row_ptr[u] + k;
        (self.cols[at], self.weights[at])
    }

    /// Exact sampling probabilities `|S_uv| / d_out(u)` read off the table.
    pub fn walk_probabilities(&self, u: usize) -> Vec<(usize, f64)> {
        let cum = self.row_cumw(u);
        let total = self.dout[u];
        let mut prev = 0.0;
        self.row_cols(u)
            .iter()
            .zip(cum)
            .map(|(&v, &c)| {
                let p = (c - prev) / total;
                prev = c;
                (v, p)
            })
            .collect()
    }

    /// Largest `δ` with `|S_uu| ≥ δ + d_out(u)` for all `u`; negative when
    /// `S` is not diagonally dominant.
    pub fn max_delta(&self) -> f64 {
        self.diag
            .iter()
            .zip(&self.dout)
            .map(|(d, o)| d.abs() - o)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn is_delta_dd(&self, delta: f64) -> bool {
        self.diag.iter().zip(&self.dout).all(|(d, o)| d.abs() >= delta + o)
    }

    pub fn s_max(&self) -> f64 {
        self.diag.iter().fold(0.0, |m, d| m.max(d.abs()))
    }

    /// `max_u d_out(u)`; the maximum weighted degree `W` for FJ systems.
    pub fn weighted_max_degree(&self) -> f64 {
        self.dout.iter().copied().fold(0.0, f64::max)
    }

    pub fn b_inf(&self) -> f64 {
        self.b.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    /// `‖S‖∞`, the maximum absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|u| self.diag[u].abs() + self.dout[u]).fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut a = vec![vec![0.0; self.n]; self.n];
        for u in 0..self.n {
            a[u][u] = self.diag[u];
            for (v, w) in self.row(u) {
                a[u][v] = w;
            }
        }
        a
    }

    /// Re-checks the structural invariants of the cached tables.
    pub fn validate(&self) -> Result<()> {
        for u in 0..self.n {
            let mut seen = HashSet::new();
            let mut sum = 0.0;
            let mut prev = 0.0;
            for (k, (v, w)) in self.row(u).enumerate() {
                if v == u {
                    return Err(Error::SelfLoop(u));
                }
                if w == 0.0 {
                    return Err(Error::ZeroWeight(u, v));
                }
                if !seen.insert(v) {
                    return Err(Error::DuplicateEntry(u, v));
                }
                sum += w.abs();
                let c = self.row_cumw(u)[k];
                if !(c > prev) {
                    return Err(Error::InvalidParameters(format!("sampling table of row {u} not increasing")));
                }
                prev = c;
            }
            let tol = DOUT_RTOL * sum.max(f64::MIN_POSITIVE);
            if (self.dout[u] - sum).abs() > tol || (prev - self.dout[u]).abs() > tol {
                return Err(Error::InvalidParameters(format!("cached degree of row {u} is stale")));
            }
        }
        Ok(())
    }
}
