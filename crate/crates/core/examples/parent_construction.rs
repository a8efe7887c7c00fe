//! Explicit joint measurements for noisy rank-one measurements: the pair
//! construction and its recursive extension, verified constraint by constraint.

use hdsteer::bounds::{h_pair, h_recursive};
use hdsteer::parent::{parent_pair_rank1, parent_recursive_with, verify_parent, RecursionMode};
use hdsteer::quantum::random::{random_projective_measurements, rng};
use hdsteer::quantum::MeasurementSet;

fn main() -> hdsteer::Result<()> {
    for n in 2..=5 {
        let m = MeasurementSet::mubs(n, 2)?;
        let g = parent_pair_rank1(m.povm(0), m.povm(1))?;
        let v = verify_parent(&g, &m, h_pair(n))?;
        println!(
            "MUB pair n={n}: eta = {:.6}, worst slack {:.1e}",
            h_pair(n),
            v.worst_slack()
        );
    }

    let mut r = rng(7);
    for (k, n) in [(3, 2), (4, 3), (5, 3)] {
        let m = random_projective_measurements(n, k, &mut r)?;
        for mode in [RecursionMode::Refine, RecursionMode::Direct] {
            let p = match parent_recursive_with(&m, mode) {
                Ok(p) => p,
                Err(e) => {
                    println!("random k={k} n={n} {mode:?}: construction failed: {e}");
                    continue;
                }
            };
            println!(
                "random k={k} n={n} {mode:?}: guarantee {:.6} (bound {:.6}), {} terms, passed {}",
                p.averaged.eta_guarantee,
                h_recursive(k, n),
                p.terms.len(),
                p.verdict.passed
            );
            if let Some(c) = &p.counterexample {
                println!("  {c}");
            }
        }
    }
    Ok(())
}
