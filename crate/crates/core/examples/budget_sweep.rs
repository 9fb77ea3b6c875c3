//! How the absolute error of the opinion estimate falls as the query
//! budget doubles.

use ddwalk::bench::{run_bench, sweep_csv, BenchConfig};
use ddwalk::graphgen::{random_regular, uniform_opinions, with_unit_weights};
use ddwalk::reference::fj_fixed_point;
use ddwalk::rng::stream;
use ddwalk::{EstimateParams, Mode, SparseDDSystem};

fn main() -> ddwalk::Result<()> {
    let n = 1000;
    let mut rng = stream(11, 0);
    let edges = with_unit_weights(&random_regular(n, 4, &mut rng)?);
    let innate = uniform_opinions(n, &mut rng);
    let truth = fj_fixed_point(n, &edges, &innate, 1e-12, 100_000)?;
    let system = SparseDDSystem::fj_system(n, &edges, innate)?;

    let cfg = BenchConfig {
        vertices: 500,
        budgets: vec![2_500, 5_000, 10_000, 20_000, 40_000],
        params: EstimateParams::new(1.0, 0.01, 1.0, Mode::Expected),
        seed: 3,
        timing: true,
    };
    let out = run_bench(&system.oracle(), &truth, &cfg)?;
    print!("{}", sweep_csv(&out.rows));
    for w in out.rows.windows(2) {
        println!("budget {:>6} → {:>6}: error ratio {:.3}", w[0].budget, w[1].budget, w[1].abs_err_mean / w[0].abs_err_mean);
    }
    Ok(())
}
