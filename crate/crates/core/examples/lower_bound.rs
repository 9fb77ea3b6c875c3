//! The hard instance pair behind the query lower bound: two expanders
//! joined by a single bridge. With few queries an estimator cannot tell
//! whether the far side carries any right-hand side.

use ddwalk::bench::{lb_csv, run_lb};
use ddwalk::hardgen::{c0, default_min_gamma, sample_mu_n, verify_gap};
use ddwalk::rng::stream;

fn main() -> ddwalk::Result<()> {
    let (n, k, d) = (900, 30, 8);
    let gate = default_min_gamma(d);
    let mut rng = stream(5, 0);

    let h = sample_mu_n(n, k, d, gate, &mut rng)?;
    let gap = verify_gap(&h, 20, &mut rng)?;
    println!("expansion gate {gate:.3}; largest |z| under b0: {}", gap.max_abs_family0);
    println!("smallest z under b1: {:.4} (guaranteed at least {:.2e})", gap.min_family1, c0(d));

    let rows = run_lb(n, k, d, gate, &[10, 100, 1_000, 10_000], 60, 1)?;
    print!("{}", lb_csv(&rows));
    Ok(())
}
