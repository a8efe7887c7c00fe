//! From measured coincidences to a dimension certificate: the correlation
//! functional gives a lower bound on SR that never exceeds the SDP value.

use hdsteer::certify::{certified_schmidt_number, lhs_norm, sr_lower_from_correlations};
use hdsteer::quantum::{make_assemblage, transpose_measurements, BipartiteState, MeasurementSet};
use hdsteer::sdp::steering_robustness;

fn main() -> hdsteer::Result<()> {
    let (d, k) = (4, 3);
    let a = MeasurementSet::mubs(d, k)?;
    let b = transpose_measurements(&a);
    println!("d={d}, k={k}: LHS normalisation {:.6}", lhs_norm(&b)?);
    println!("{:>5} {:>10} {:>10} {:>6}", "v", "estimate", "SDP", "n >=");
    for v in [1.0, 0.95, 0.9, 0.8, 0.6] {
        let state = BipartiteState::isotropic(d, v)?;
        let est = sr_lower_from_correlations(&state, &a, &b)?;
        let sr = steering_robustness(&make_assemblage(&state, &a)?)?.value;
        let cert = certified_schmidt_number(est, k)?;
        println!("{v:>5.2} {est:>10.6} {sr:>10.6} {:>6}", cert.certified_n);
    }
    Ok(())
}
