//! Synthetic graphs for benchmarks and hard instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};

/// Uniform-ish simple `d`-regular graph on `n` vertices by the pairing model:
/// stubs are paired at random, pairs that would form a loop or a repeated
/// edge are returned to the pool, and the construction restarts if the pool
/// can no longer be completed.
pub fn random_regular<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if d >= n || (n * d) % 2 != 0 {
        return Err(Error::InvalidParameters(format!(
            "a {d}-regular graph on {n} vertices needs d < n and n·d even"
        )));
    }
    if d == 0 {
        return Ok(Vec::new());
    }
    'restart: loop {
        let mut adj = vec![Vec::with_capacity(d); n];
        let mut edges = Vec::with_capacity(n * d / 2);
        let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
        while !stubs.is_empty() {
            stubs.shuffle(rng);
            let mut left = Vec::new();
            for pair in stubs.chunks_exact(2) {
                let (u, v) = (pair[0], pair[1]);
                if u != v && !adj[u].contains(&v) {
                    adj[u].push(v);
                    adj[v].push(u);
                    edges.push((u.min(v), u.max(v)));
                } else {
                    left.extend_from_slice(pair);
                }
            }
            if left.len() == stubs.len() && !completable(&left, &adj) {
                continue 'restart;
            }
            stubs = left;
        }
        return Ok(edges);
    }
}

fn completable(stubs: &[usize], adj: &[Vec<usize>]) -> bool {
    let mut open: Vec<usize> = stubs.to_vec();
    open.sort_unstable();
    open.dedup();
    open.iter().enumerate().any(|(i, &u)| open[i + 1..].iter().any(|&v| !adj[u].contains(&v)))
}

/// G(n, p): each of the `n(n−1)/2` pairs independently with probability `p`.
pub fn erdos_renyi<R: Rng + ?Sized>(n: usize, p: f64, rng: &mut R) -> Result<Vec<(usize, usize)>> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameters(format!("edge probability must lie in (0, 1], got {p}")));
    }
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Ok(edges)
}

/// Innate opinions drawn uniformly from `[0, 1)`.
pub fn uniform_opinions<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| rng.random::<f64>()).collect()
}

pub fn with_unit_weights(edges: &[(usize, usize)]) -> Vec<(usize, usize, f64)> {
    edges.iter().map(|&(u, v)| (u, v, 1.0)).collect()
}
