//! The `(S, b)` query oracle: vertex, neighbor and random-walk queries at
//! unit cost each, with an optional hard budget.
//!
//! The ledger is passed to every query rather than stored in the oracle so
//! that one oracle can be shared across workers, each charging its own
//! sub-ledger; sub-ledgers are combined with [`QueryLedger::merge`].

use rand::Rng;

use crate::error::{Error, Result};
use crate::system::SparseDDSystem;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryKind {
    Vertex,
    Neighbor,
    Walk,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct QueryLedger {
    pub vertex_queries: u64,
    pub neighbor_queries: u64,
    pub walk_queries: u64,
    budget: Option<u64>,
}

impl QueryLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_budget(budget: u64) -> Self {
        Self { budget: Some(budget), ..Self::default() }
    }

    pub fn budget(&self) -> Option<u64> {
        self.budget
    }

    #[inline]
    pub fn total(&self) -> u64 {
        self.vertex_queries + self.neighbor_queries + self.walk_queries
    }

    pub fn remaining(&self) -> Option<u64> {
        self.budget.map(|b| b.saturating_sub(self.total()))
    }

    pub fn is_exhausted(&self) -> bool {
        self.remaining() == Some(0)
    }

    /// Records one query, refusing it once the budget is spent.
    #[inline]
    pub fn charge(&mut self, kind: QueryKind) -> Result<()> {
        if self.total() >= self.budget.unwrap_or(u64::MAX) {
            return Err(self.refused());
        }
        match kind {
            QueryKind::Vertex => self.vertex_queries += 1,
            QueryKind::Neighbor => self.neighbor_queries += 1,
            QueryKind::Walk => self.walk_queries += 1,
        }
        Ok(())
    }

    #[cold]
    fn refused(&self) -> Error {
        Error::BudgetExhausted { budget: self.budget.unwrap_or(u64::MAX) }
    }

    /// Adds the counters of a worker's sub-ledger. The budget is not touched.
    pub fn merge(&mut self, other: &QueryLedger) {
        self.vertex_queries += other.vertex_queries;
        self.neighbor_queries += other.neighbor_queries;
        self.walk_queries += other.walk_queries;
    }

    /// Counters only, budget dropped.
    pub fn snapshot(&self) -> QueryLedger {
        QueryLedger { budget: None, ..*self }
    }

    /// Queries charged since `earlier` was taken from this ledger.
    pub fn since(&self, earlier: &QueryLedger) -> QueryLedger {
        QueryLedger {
            vertex_queries: self.vertex_queries - earlier.vertex_queries,
            neighbor_queries: self.neighbor_queries - earlier.neighbor_queries,
            walk_queries: self.walk_queries - earlier.walk_queries,
            budget: None,
        }
    }
}

/// Answer to a vertex query.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexInfo {
    pub delta_out: usize,
    pub d_out: f64,
    pub s_uu: f64,
    pub b_u: f64,
}

/// Answer to a random-walk query; `Bottom` is the `⊥` returned on an empty row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WalkStep {
    Move { to: usize, weight: f64 },
    Bottom,
}

pub trait Oracle {
    fn n(&self) -> usize;

    fn vertex_query(&self, ledger: &mut QueryLedger, u: usize) -> Result<VertexInfo>;

    /// `i` is 1-based: `1 ≤ i ≤ Δ_out(u)`.
    fn neighbor_query(&self, ledger: &mut QueryLedger, u: usize, i: usize) -> Result<usize>;

    fn random_walk_query<R: Rng + ?Sized>(
        &self,
        ledger: &mut QueryLedger,
        u: usize,
        rng: &mut R,
    ) -> Result<WalkStep>;
}

/// Oracle answering from a stored system.
#[derive(Debug, Clone, Copy)]
pub struct SystemOracle<'a> {
    system: &'a SparseDDSystem,
}

impl<'a> SystemOracle<'a> {
    pub fn new(system: &'a SparseDDSystem) -> Self {
        Self { system }
    }

    pub fn system(&self) -> &'a SparseDDSystem {
        self.system
    }

    #[inline]
    fn check(&self, u: usize) -> Result<()> {
        if u >= self.system.n() {
            Err(Error::IndexOutOfRange { index: u, bound: self.system.n() })
        } else {
            Ok(())
        }
    }
}

impl SparseDDSystem {
    pub fn oracle(&self) -> SystemOracle<'_> {
        SystemOracle::new(self)
    }
}

impl Oracle for SystemOracle<'_> {
    fn n(&self) -> usize {
        self.system.n()
    }

    #[inline]
    fn vertex_query(&self, ledger: &mut QueryLedger, u: usize) -> Result<VertexInfo> {
        ledger.charge(QueryKind::Vertex)?;
        let Some(v) = self.system.node(u) else {
            return Err(Error::IndexOutOfRange { index: u, bound: self.system.n() });
        };
        Ok(VertexInfo { delta_out: v.end - v.start, d_out: v.d_out, s_uu: v.s_uu, b_u: v.b_u })
    }

    fn neighbor_query(&self, ledger: &mut QueryLedger, u: usize, i: usize) -> Result<usize> {
        ledger.charge(QueryKind::Neighbor)?;
        self.check(u)?;
        let deg = self.system.degree(u);
        if i == 0 || i > deg {
            return Err(Error::IndexOutOfRange { index: i, bound: deg });
        }
        Ok(self.system.entry(u, i - 1).0)
    }

    #[inline]
    fn random_walk_query<R: Rng + ?Sized>(
        &self,
        ledger: &mut QueryLedger,
        u: usize,
        rng: &mut R,
    ) -> Result<WalkStep> {
        ledger.charge(QueryKind::Walk)?;
        let Some(v) = self.system.node(u) else {
            return Err(Error::IndexOutOfRange { index: u, bound: self.system.n() });
        };
        let arc = match self.system.arcs(v) {
            [] => return Ok(WalkStep::Bottom),
            [only] => only,
            row => {
                let r = rng.random::<f64>() * row[row.len() - 1].cum;
                &row[row.partition_point(|a| a.cum <= r).min(row.len() - 1)]
            }
        };
        Ok(WalkStep::Move { to: arc.to, weight: arc.weight })
    }
}

/// Oracle for `S + σI'`: only the diagonal reported by vertex queries moves,
/// by `σ·sgn(S_uu)` (or `+σ` on a zero diagonal). `d_out` is reported
/// unchanged.
#[derive(Debug, Clone, Copy)]
pub struct ShiftedOracle<'a, O> {
    inner: &'a O,
    sigma: f64,
}

impl<'a, O: Oracle> ShiftedOracle<'a, O> {
    pub fn new(inner: &'a O, sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::NonPositiveSigma(sigma));
        }
        Ok(Self { inner, sigma })
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// `s + σ·sgn(s)`, with `sgn(0)` taken as `+1`.
#[inline]
pub fn shift_diagonal(s: f64, sigma: f64) -> f64 {
    if s < 0.0 {
        s - sigma
    } else {
        s + sigma
    }
}

pub fn shifted_oracle<O: Oracle>(inner: &O, sigma: f64) -> Result<ShiftedOracle<'_, O>> {
    ShiftedOracle::new(inner, sigma)
}

impl<O: Oracle> Oracle for ShiftedOracle<'_, O> {
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[inline]
    fn vertex_query(&self, ledger: &mut QueryLedger, u: usize) -> Result<VertexInfo> {
        let mut info = self.inner.vertex_query(ledger, u)?;
        info.s_uu = shift_diagonal(info.s_uu, self.sigma);
        Ok(info)
    }

    fn neighbor_query(&self, ledger: &mut QueryLedger, u: usize, i: usize) -> Result<usize> {
        self.inner.neighbor_query(ledger, u, i)
    }

    #[inline]
    fn random_walk_query<R: Rng + ?Sized>(
        &self,
        ledger: &mut QueryLedger,
        u: usize,
        rng: &mut R,
    ) -> Result<WalkStep> {
        self.inner.random_walk_query(ledger, u, rng)
    }
}
