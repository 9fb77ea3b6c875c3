//! Equilibrium opinions in the Friedkin–Johnsen model on a random graph,
//! one vertex at a time.

use ddwalk::graphgen::{erdos_renyi, uniform_opinions, with_unit_weights};
use ddwalk::reference::fj_fixed_point;
use ddwalk::rng::stream;
use ddwalk::{estimate_fj_opinion, QueryLedger, SparseDDSystem};

fn main() -> ddwalk::Result<()> {
    let n = 500;
    let mut rng = stream(7, 0);
    let edges = with_unit_weights(&erdos_renyi(n, 0.01, &mut rng)?);
    let innate = uniform_opinions(n, &mut rng);
    let system = SparseDDSystem::fj_system(n, &edges, innate.clone())?;
    let truth = fj_fixed_point(n, &edges, &innate, 1e-12, 100_000)?;
    println!("{n} people, {} friendships, max degree {}", edges.len(), system.s_max() - 1.0);

    for u in [0, 42, 250, 499] {
        let mut ledger = QueryLedger::new();
        let r = estimate_fj_opinion(&system.oracle(), &mut ledger, u, 0.02, &mut rng)?;
        println!(
            "vertex {u:>3}: innate {:.3}  expressed ≈ {:.3} (fixed point {:.3}), {} queries",
            innate[u],
            r.estimate,
            truth[u],
            ledger.total()
        );
    }
    Ok(())
}
