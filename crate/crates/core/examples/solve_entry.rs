//! Estimate one coordinate of a strictly diagonally dominant system and
//! compare it with a dense solve.

use ddwalk::reference::dense_solve;
use ddwalk::rng::stream;
use ddwalk::{estimate_entry, estimate_entry_boosted, EstimateParams, Mode, QueryLedger, SparseDDSystem};

fn main() -> ddwalk::Result<()> {
    // 3·I minus a path: every row has margin at least 1
    let s = SparseDDSystem::from_triplets(
        3,
        &[(0, 3.0), (1, 3.0), (2, 3.0)],
        &[(0, 1, -1.0), (1, 0, -1.0), (1, 2, -1.0), (2, 1, -1.0)],
        vec![1.0, 0.0, 0.0],
    )?;
    let exact = dense_solve(&s, s.rhs())?.z;
    let mut rng = stream(2024, 0);

    for mode in [Mode::Expected, Mode::WorstCase] {
        let params = EstimateParams::new(s.max_delta(), 0.02, s.b_inf(), mode);
        let mut ledger = QueryLedger::new();
        let r = estimate_entry(&s.oracle(), &mut ledger, 0, params, &mut rng)?;
        println!(
            "{mode:?}: z_0 ≈ {:.5} (exact {:.5}) from {} walks, {} queries",
            r.estimate,
            exact[0],
            r.samples,
            ledger.total()
        );
    }

    let params = EstimateParams::new(s.max_delta(), 0.02, s.b_inf(), Mode::WorstCase);
    let r = estimate_entry_boosted(&s.oracle(), &mut QueryLedger::new(), 0, params, 1e-3, &mut rng)?;
    println!("median of {} runs: {:.5}", r.runs, r.estimate);
    Ok(())
}
