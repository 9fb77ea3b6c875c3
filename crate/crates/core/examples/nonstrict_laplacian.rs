//! Laplacians are only weakly dominant. Shifting the diagonal by a small σ
//! makes the walk terminate while moving the solution by at most ε/2.

use ddwalk::reference::{kappa_inf, pseudo_solve_symmetric};
use ddwalk::rng::stream;
use ddwalk::solver::shift_sigma;
use ddwalk::{estimate_entry_nonstrict, QueryLedger, SparseDDSystem};

fn main() -> ddwalk::Result<()> {
    // single edge of weight 2, rhs (1, -1): the minimum-norm solution is (1/4, -1/4)
    let l = SparseDDSystem::from_triplets(2, &[(0, 2.0), (1, 2.0)], &[(0, 1, -2.0), (1, 0, -2.0)], vec![1.0, -1.0])?;
    let z = pseudo_solve_symmetric(&l, l.rhs())?.z;
    let kappa = kappa_inf(&l)?;
    let eps = 0.5;
    println!("κ∞ = {kappa:.3}, σ = {:.4}", shift_sigma(l.s_max(), eps, kappa));

    let mut rng = stream(17, 0);
    for u in 0..2 {
        let mut ledger = QueryLedger::new();
        let r = estimate_entry_nonstrict(&l.oracle(), &mut ledger, u, kappa, eps, l.b_inf(), l.s_max(), &mut rng)?;
        println!("z_{u} ≈ {:+.4} (exact {:+.4}), {} queries", r.estimate, z[u], ledger.total());
    }
    Ok(())
}
