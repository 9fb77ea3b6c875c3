//! Runs the built-in verification suites against the real oracle and
//! against one that flips the sign of every walk step.

use ddwalk::verify::{run_suites, Mutant};

fn main() {
    for (label, mutant) in [("honest oracle", None), ("sign-flipping oracle", Some(Mutant::SignFlip))] {
        println!("{label}:");
        for r in run_suites(1, mutant) {
            println!("  {:<22} {:<4} {}", r.name, if r.passed { "pass" } else { "FAIL" }, r.detail);
        }
    }
}
