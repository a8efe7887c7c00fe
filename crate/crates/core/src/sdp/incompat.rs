//! Generalised incompatibility robustness.

use super::cone::{
    basis_coordinates, complex_value, from_basis_coordinates, ProblemBuilder, SolveStatus,
};
use super::{enumerate_strategies, Diagnostics, SdpConfig, SdpSolution};
use crate::error::Result;
use crate::linalg::HermMatrix;
use crate::quantum::MeasurementSet;

/// `η^g = max η` s.t. `G_j ⪰ 0`, `Σ_j G_j = 𝟙`, `Σ_j δ_{j_x,a} G_j ⪰ η A_{a|x}`.
///
/// The primal witness lists the parent elements `G_j` over the `d^k`
/// outcome grid in lexicographic order.
pub fn incompatibility_eta_g(m: &MeasurementSet) -> Result<SdpSolution> {
    incompatibility_eta_g_with(m, &SdpConfig::from_env()?)
}

pub fn incompatibility_eta_g_with(m: &MeasurementSet, cfg: &SdpConfig) -> Result<SdpSolution> {
    let (k, d, n) = (m.k(), m.outcomes(), m.dim());
    let nn = n * n;
    let grid = enumerate_strategies(d, k, cfg.strategy_cap)?;

    let mut pb = ProblemBuilder::new();
    let g: Vec<usize> = grid.iter().map(|_| pb.complex_block(n)).collect();
    let z: Vec<usize> = (0..k * d).map(|_| pb.complex_block(n)).collect();
    let eta = pb.real_block(1);
    pb.objective_entry(eta, 0, 0, -1.0);

    let norm_rows: Vec<usize> = basis_coordinates(&HermMatrix::identity(n))
        .into_iter()
        .map(|rhs| pb.constraint(rhs))
        .collect();
    let mut marg_rows = Vec::with_capacity(k * d * nn);
    for x in 0..k {
        for a in 0..d {
            let coords = basis_coordinates(m.effect(a, x));
            for (beta, &ca) in coords.iter().enumerate() {
                let c = pb.constraint(0.0);
                pb.basis_entry(c, z[x * d + a], beta, -1.0);
                pb.entry(c, eta, 0, 0, -ca);
                marg_rows.push(c);
            }
        }
    }
    for (j, &l) in grid.iter().zip(&g) {
        for beta in 0..nn {
            pb.basis_entry(norm_rows[beta], l, beta, 1.0);
        }
        for x in 0..k {
            let a = j.outcome(x);
            for beta in 0..nn {
                pb.basis_entry(marg_rows[(x * d + a) * nn + beta], l, beta, 1.0);
            }
        }
    }
    let problem = pb.build()?;
    let sol = cfg.solver.solve(&problem)?;

    let parent: Vec<HermMatrix> = g.iter().map(|&l| complex_value(&sol.x[l])).collect();
    let duals: Vec<HermMatrix> = (0..k * d)
        .map(|xa| {
            let start = nn + xa * nn;
            from_basis_coordinates(n, &sol.y.as_slice()[start..start + nn])
        })
        .collect();
    let value = -sol.primal_objective;
    let gap = sol.primal_objective - sol.dual_objective;
    let mut status = sol.status;
    if status == SolveStatus::Optimal && gap.abs() > 1e-6 {
        status = SolveStatus::Inaccurate;
    }
    Ok(SdpSolution {
        value,
        primal_witness: parent,
        dual_witness: duals,
        gap,
        status,
        diagnostics: Diagnostics::new(cfg.solver.name(), &problem, &sol),
    })
}

/// `IR = 1/η^g − 1`.
pub fn incompatibility_robustness(m: &MeasurementSet) -> Result<f64> {
    Ok(1.0 / incompatibility_eta_g(m)?.value - 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::Povm;

    fn h_pair(n: f64) -> f64 {
        0.5 * (1.0 + 1.0 / n.sqrt())
    }

    #[test]
    fn mub_pairs_reach_the_pair_value() {
        for n in [2, 3, 4] {
            let sol = incompatibility_eta_g(&MeasurementSet::mubs(n, 2).unwrap()).unwrap();
            assert_eq!(sol.status, SolveStatus::Optimal);
            assert!(
                (sol.value - h_pair(n as f64)).abs() < 1e-6,
                "n={n}: {}",
                sol.value
            );
        }
    }

    #[test]
    fn identical_measurements_are_compatible() {
        let z = Povm::from_basis(&crate::linalg::CMatrix::identity(3, 3)).unwrap();
        let m = MeasurementSet::new(vec![z.clone(), z]).unwrap();
        assert!((incompatibility_eta_g(&m).unwrap().value - 1.0).abs() < 1e-6);
        assert!(incompatibility_robustness(&m).unwrap().abs() < 1e-6);
    }

    #[test]
    fn qubit_triplet() {
        let v = incompatibility_eta_g(&MeasurementSet::mubs(2, 3).unwrap())
            .unwrap()
            .value;
        assert!((v - h_pair(3.0)).abs() < 1e-4, "{v}");
    }

    #[test]
    fn parent_witness_is_a_measurement() {
        let sol = incompatibility_eta_g(&MeasurementSet::mubs(2, 2).unwrap()).unwrap();
        let total = crate::linalg::sum(2, &sol.primal_witness);
        assert!(total.max_abs_diff(&HermMatrix::identity(2)) < 1e-7);
        for g in &sol.primal_witness {
            assert!(g.is_psd(1e-9));
        }
    }
}
