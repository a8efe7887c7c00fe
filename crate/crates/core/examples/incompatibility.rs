//! Generalised incompatibility robustness of MUB subsets against the
//! universal lower bounds.

use hdsteer::bounds::h_best;
use hdsteer::quantum::MeasurementSet;
use hdsteer::sdp::incompat::incompatibility_eta_g;

fn main() -> hdsteer::Result<()> {
    println!(
        "{:>2} {:>2} {:>10} {:>10} {:>18}",
        "d", "k", "eta_g", "bound", "source"
    );
    for (d, k) in [
        (2, 2),
        (3, 2),
        (4, 2),
        (5, 2),
        (2, 3),
        (3, 3),
        (4, 3),
        (3, 4),
    ] {
        let sol = incompatibility_eta_g(&MeasurementSet::mubs(d, k)?)?;
        let b = h_best(k, d)?;
        println!(
            "{d:>2} {k:>2} {:>10.6} {:>10.6} {:>18}",
            sol.value,
            b.eta_lower,
            b.source.as_str()
        );
    }
    let parent = incompatibility_eta_g(&MeasurementSet::mubs(2, 2)?)?.primal_witness;
    println!(
        "optimal parent for two qubit MUBs has {} elements",
        parent.len()
    );
    Ok(())
}
