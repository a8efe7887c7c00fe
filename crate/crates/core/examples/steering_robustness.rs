//! Steering robustness of a maximally entangled state measured in k MUBs,
//! with the dual functional and an LHS test of a noisy version.
//!
//! `cargo run --release --example steering_robustness -- 3 3`

use hdsteer::quantum::{make_assemblage, BipartiteState, MeasurementSet};
use hdsteer::sdp::{lhs_membership, sr_bisection_oracle, steering_robustness, LhsVerdict};

fn main() -> hdsteer::Result<()> {
    let mut args = std::env::args().skip(1).map(|s| s.parse::<usize>().ok());
    let d = args.next().flatten().unwrap_or(3);
    let k = args.next().flatten().unwrap_or(3);

    let m = MeasurementSet::mubs(d, k)?;
    let asm = make_assemblage(&BipartiteState::maximally_entangled(d), &m)?;
    let sol = steering_robustness(&asm)?;
    println!(
        "SR(d={d}, k={k}) = {:.6}  gap {:.1e}  {:?}",
        sol.value, sol.gap, sol.status
    );
    println!(
        "  {} iterations, {} constraints",
        sol.diagnostics.iterations, sol.diagnostics.constraints
    );
    let f = &sol.dual_witness;
    println!(
        "  dual functional: {} operators, trace of F_(0|0) = {:.4}",
        f.len(),
        f[0].trace()
    );
    if d.pow(k as u32) <= 100 {
        println!(
            "  bisection on the literal definition: {:.6}",
            sr_bisection_oracle(&asm, 1e-7)?
        );
    }

    // isotropic state below the steering onset
    let noisy = make_assemblage(&BipartiteState::isotropic(d, 0.3)?, &m)?;
    match lhs_membership(&noisy)? {
        LhsVerdict::Feasible {
            decomposition,
            residual,
        } => {
            println!(
                "v = 0.3: LHS model with {} strategies, residual {residual:.1e}",
                decomposition.len()
            )
        }
        LhsVerdict::Infeasible { value, .. } => {
            println!("v = 0.3: steerable, functional value {value:.4}")
        }
    }
    Ok(())
}
