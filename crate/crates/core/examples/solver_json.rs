//! Building a small semidefinite program directly, exporting it as JSON and
//! plugging in a custom engine through the solver trait.

use std::sync::Arc;

use hdsteer::sdp::ipm::InteriorPoint;
use hdsteer::sdp::{ConeProblem, ConeSolution, ConicSolver, ProblemBuilder, SdpConfig};

/// Wraps the built-in engine and logs each call.
struct Logged(InteriorPoint);

impl ConicSolver for Logged {
    fn name(&self) -> &'static str {
        "logged-ipm"
    }

    fn solve(&self, p: &ConeProblem) -> hdsteer::Result<ConeSolution> {
        let s = self.0.solve(p)?;
        eprintln!(
            "[{}] {} constraints, {} iterations",
            self.name(),
            p.num_constraints(),
            s.iterations
        );
        Ok(s)
    }
}

fn main() -> hdsteer::Result<()> {
    // min <C, X> s.t. Tr X = 1, X ⪰ 0: the smallest eigenvalue of C
    let mut pb = ProblemBuilder::new();
    let x = pb.real_block(2);
    for (i, j, v) in [(0, 0, 2.0), (1, 1, 1.0), (1, 0, 1.0)] {
        pb.objective_entry(x, i, j, v);
    }
    let c = pb.constraint(1.0);
    pb.entry(c, x, 0, 0, 1.0);
    pb.entry(c, x, 1, 1, 1.0);
    let problem = pb.build()?;
    println!("{}", problem.to_json()?);

    let solver = Logged(InteriorPoint::default());
    let sol = solver.solve(&problem)?;
    println!(
        "minimum eigenvalue {:.8} (exact {:.8})",
        sol.primal_objective,
        1.5 - 5f64.sqrt() / 2.0
    );

    // the same engine can drive every program in the crate
    let cfg = SdpConfig {
        solver: Arc::new(solver),
        ..SdpConfig::default()
    };
    let m = hdsteer::quantum::MeasurementSet::mubs(2, 2)?;
    let eta = hdsteer::sdp::incompat::incompatibility_eta_g_with(&m, &cfg)?.value;
    println!("eta_g for two qubit MUBs: {eta:.6}");
    Ok(())
}
