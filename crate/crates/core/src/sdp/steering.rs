//! Steering robustness, LHS membership and a literal bisection oracle.

use serde::Serialize;

use super::cone::{
    basis_coordinates, complex_value, from_basis_coordinates, ProblemBuilder, SolveStatus,
};
use super::{enumerate_strategies, DeterministicStrategy, Diagnostics, SdpConfig, SdpSolution};
use crate::error::{Error, Result};
use crate::linalg::{self, herm_eig, max_eig, HermMatrix};
use crate::quantum::Assemblage;

/// Largest `d^k` accepted by [`sr_bisection_oracle`].
pub const ORACLE_CAP: usize = 1_000;

/// Assemblages with SR below this are reported as LHS.
pub const LHS_TOL: f64 = 1e-7;

fn constraint_index(d: usize, nn: usize, a: usize, x: usize, beta: usize) -> usize {
    (x * d + a) * nn + beta
}

/// `SR(σ)` via `min Σ_λ Tr σ_λ − 1` s.t. `Σ_λ δ_{λ(x),a} σ_λ ⪰ σ_{a|x}`, `σ_λ ⪰ 0`.
///
/// The dual variables are the `F_{a|x}` of the steering functional; the
/// returned dual witness is rescaled so that its LHS bound is exactly 1.
pub fn steering_robustness(asm: &Assemblage) -> Result<SdpSolution> {
    steering_robustness_with(asm, &SdpConfig::from_env()?)
}

pub fn steering_robustness_with(asm: &Assemblage, cfg: &SdpConfig) -> Result<SdpSolution> {
    let (k, d, n) = (asm.k(), asm.outcomes(), asm.dim());
    let nn = n * n;
    let strategies = enumerate_strategies(d, k, cfg.strategy_cap)?;

    let mut pb = ProblemBuilder::new();
    let lam_blocks: Vec<usize> = strategies.iter().map(|_| pb.complex_block(n)).collect();
    let z_blocks: Vec<usize> = (0..k * d).map(|_| pb.complex_block(n)).collect();
    for &l in &lam_blocks {
        pb.objective_trace(l, 1.0);
    }
    for x in 0..k {
        for a in 0..d {
            let coords = basis_coordinates(asm.state(a, x));
            for (beta, &rhs) in coords.iter().enumerate() {
                let c = pb.constraint(rhs);
                debug_assert_eq!(c, constraint_index(d, nn, a, x, beta));
                pb.basis_entry(c, z_blocks[x * d + a], beta, -1.0);
            }
        }
    }
    for (s, &l) in strategies.iter().zip(&lam_blocks) {
        for x in 0..k {
            let a = s.outcome(x);
            for beta in 0..nn {
                pb.basis_entry(constraint_index(d, nn, a, x, beta), l, beta, 1.0);
            }
        }
    }
    let problem = pb.build()?;
    let sol = cfg.solver.solve(&problem)?;

    let weights: Vec<HermMatrix> = lam_blocks
        .iter()
        .map(|&l| complex_value(&sol.x[l]))
        .collect();
    let raw: Vec<HermMatrix> = (0..k * d)
        .map(|xa| from_basis_coordinates(n, &sol.y.as_slice()[xa * nn..(xa + 1) * nn]))
        .collect();
    let (functional, dual_value) = certify_functional(asm, &strategies, &raw)?;
    let value = sol.primal_objective - 1.0;
    let gap = value - dual_value;
    let mut status = sol.status;
    if status == SolveStatus::Optimal && gap.abs() > 1e-6 {
        status = SolveStatus::Inaccurate;
    }
    Ok(SdpSolution {
        value,
        primal_witness: weights,
        dual_witness: functional,
        gap,
        status,
        diagnostics: Diagnostics::new(cfg.solver.name(), &problem, &sol),
    })
}

/// Projects candidate `F_{a|x}` onto the PSD cone and rescales so that
/// `max_λ λ_max(Σ_x F_{λ(x)|x}) = 1`; returns them with `Σ Tr(F σ) − 1`.
fn certify_functional(
    asm: &Assemblage,
    strategies: &[DeterministicStrategy],
    raw: &[HermMatrix],
) -> Result<(Vec<HermMatrix>, f64)> {
    let d = asm.outcomes();
    let n = asm.dim();
    let psd: Vec<HermMatrix> = raw
        .iter()
        .map(|f| herm_eig(f).map(|e| e.reconstruct_with(|v| v.max(0.0))))
        .collect::<Result<_>>()?;
    let bound = lhs_bound(&psd, strategies, d, n);
    if bound <= 0.0 {
        return Ok((psd, -1.0));
    }
    let scaled: Vec<HermMatrix> = psd.iter().map(|f| f.scale(1.0 / bound)).collect();
    let value = functional_value(&scaled, asm);
    Ok((scaled, value - 1.0))
}

/// `max_λ λ_max(Σ_x F_{λ(x)|x})` with `F` indexed `x·d + a`.
pub(crate) fn lhs_bound(
    f: &[HermMatrix],
    strategies: &[DeterministicStrategy],
    d: usize,
    n: usize,
) -> f64 {
    strategies
        .iter()
        .map(|s| {
            let sum = linalg::sum(
                n,
                s.assignment.iter().enumerate().map(|(x, &a)| &f[x * d + a]),
            );
            max_eig(&sum)
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

fn functional_value(f: &[HermMatrix], asm: &Assemblage) -> f64 {
    let d = asm.outcomes();
    (0..asm.k())
        .flat_map(|x| (0..d).map(move |a| (a, x)))
        .map(|(a, x)| f[x * d + a].inner(asm.state(a, x)))
        .sum()
}

/// Outcome of an LHS membership test.
#[derive(Clone, Debug, Serialize)]
pub enum LhsVerdict {
    /// `σ_{a|x} ≈ Σ_λ δ_{λ(x),a} σ_λ`; `residual` is the largest entry-wise mismatch.
    Feasible {
        decomposition: Vec<(DeterministicStrategy, HermMatrix)>,
        residual: f64,
    },
    /// `F_{a|x}` (index `x·d + a`) bounded by 1 on every LHS assemblage, with `value = Σ Tr(F σ) > 1`.
    Infeasible {
        functional: Vec<HermMatrix>,
        value: f64,
    },
}

impl LhsVerdict {
    pub fn is_feasible(&self) -> bool {
        matches!(self, LhsVerdict::Feasible { .. })
    }
}

pub fn lhs_membership(asm: &Assemblage) -> Result<LhsVerdict> {
    lhs_membership_with(asm, &SdpConfig::from_env()?)
}

pub fn lhs_membership_with(asm: &Assemblage, cfg: &SdpConfig) -> Result<LhsVerdict> {
    let sol = steering_robustness_with(asm, cfg)?;
    if sol.value <= LHS_TOL {
        let strategies = enumerate_strategies(asm.outcomes(), asm.k(), cfg.strategy_cap)?;
        // rescale the weights to unit total trace before comparing
        let total: f64 = sol.primal_witness.iter().map(HermMatrix::trace).sum();
        let weights: Vec<HermMatrix> = sol
            .primal_witness
            .iter()
            .map(|w| w.scale(1.0 / total))
            .collect();
        let n = asm.dim();
        let mut residual: f64 = 0.0;
        for x in 0..asm.k() {
            for a in 0..asm.outcomes() {
                let rebuilt = linalg::sum(
                    n,
                    strategies
                        .iter()
                        .zip(&weights)
                        .filter(|(s, _)| s.outcome(x) == a)
                        .map(|(_, w)| w),
                );
                residual = residual.max(rebuilt.max_abs_diff(asm.state(a, x)));
            }
        }
        let decomposition = strategies
            .into_iter()
            .zip(weights)
            .filter(|(_, w)| w.trace() > 1e-12)
            .collect();
        Ok(LhsVerdict::Feasible {
            decomposition,
            residual,
        })
    } else {
        Ok(LhsVerdict::Infeasible {
            functional: sol.dual_witness,
            value: 1.0 + sol.value - sol.gap,
        })
    }
}

/// SR by bisection on `t` in the literal definition: `t` is feasible iff
/// some valid assemblage `τ` makes `(σ + tτ)/(1 + t)` LHS.
///
/// At fixed `t` this solves `max s` s.t. `Σ_λ δ_{λ(x),a} ω_λ ⪰ σ_{a|x} + (s − 1)𝟙`,
/// `Σ_λ Tr ω_λ = 1 + t`, `ω_λ ⪰ 0`, `s ≥ 0`; `t` is feasible iff `s* ≥ 1`.
pub fn sr_bisection_oracle(asm: &Assemblage, tol: f64) -> Result<f64> {
    sr_bisection_oracle_with(asm, tol, &SdpConfig::from_env()?)
}

pub fn sr_bisection_oracle_with(asm: &Assemblage, tol: f64, cfg: &SdpConfig) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!(
            "bisection tolerance must be positive, got {tol}"
        )));
    }
    let strategies =
        enumerate_strategies(asm.outcomes(), asm.k(), cfg.strategy_cap.min(ORACLE_CAP))?;
    let feasible =
        |t: f64| -> Result<bool> { Ok(phase_one(asm, &strategies, t, cfg)? >= 1.0 - 1e-9) };
    if feasible(0.0)? {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while !feasible(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e6 {
            return Err(Error::Solver("bisection bracket diverged".into()));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if feasible(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn phase_one(
    asm: &Assemblage,
    strategies: &[DeterministicStrategy],
    t: f64,
    cfg: &SdpConfig,
) -> Result<f64> {
    let (k, d, n) = (asm.k(), asm.outcomes(), asm.dim());
    let nn = n * n;
    let id = HermMatrix::identity(n);
    let id_coords = basis_coordinates(&id);

    let mut pb = ProblemBuilder::new();
    let omega: Vec<usize> = strategies.iter().map(|_| pb.complex_block(n)).collect();
    let z: Vec<usize> = (0..k * d).map(|_| pb.complex_block(n)).collect();
    let s = pb.real_block(1);
    pb.objective_entry(s, 0, 0, -1.0);
    for x in 0..k {
        for a in 0..d {
            let coords = basis_coordinates(&(asm.state(a, x) - &id));
            for (beta, &rhs) in coords.iter().enumerate() {
                let c = pb.constraint(rhs);
                pb.basis_entry(c, z[x * d + a], beta, -1.0);
                pb.entry(c, s, 0, 0, -id_coords[beta]);
            }
        }
    }
    for (st, &l) in strategies.iter().zip(&omega) {
        for x in 0..k {
            for beta in 0..nn {
                pb.basis_entry(
                    constraint_index(d, nn, st.outcome(x), x, beta),
                    l,
                    beta,
                    1.0,
                );
            }
        }
    }
    let tr = pb.constraint(1.0 + t);
    for &l in &omega {
        pb.herm_entry(tr, l, &id, 1.0);
    }
    let sol = cfg.solver.solve(&pb.build()?)?;
    if sol.status == SolveStatus::Infeasible {
        return Err(Error::Solver(format!(
            "phase-one problem at t={t} reported infeasible"
        )));
    }
    Ok(-0.5 * (sol.primal_objective + sol.dual_objective))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::{make_assemblage, BipartiteState, MeasurementSet};

    fn mub_assemblage(d: usize, k: usize, v: f64) -> Assemblage {
        let m = MeasurementSet::mubs(d, k).unwrap();
        make_assemblage(&BipartiteState::isotropic(d, v).unwrap(), &m).unwrap()
    }

    #[test]
    fn qubit_pair_value() {
        let sol = steering_robustness(&mub_assemblage(2, 2, 1.0)).unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.value - 0.1716).abs() < 1e-3, "{}", sol.value);
        // exact value 2/(1 + 1/√2) − 1
        assert!((sol.value - (2.0 / (1.0 + std::f64::consts::FRAC_1_SQRT_2) - 1.0)).abs() < 1e-7);
        assert!(sol.gap.abs() < 1e-6);
    }

    #[test]
    fn qutrit_triple_value() {
        let sol = steering_robustness(&mub_assemblage(3, 3, 1.0)).unwrap();
        assert!((sol.value - 0.4037).abs() < 1e-3, "{}", sol.value);
        assert!(sol.gap.abs() < 1e-6);
    }

    #[test]
    fn product_state_is_unsteerable() {
        let ra = HermMatrix::from_real_diagonal(&[0.6, 0.4]);
        let rb = HermMatrix::from_real_diagonal(&[0.3, 0.7]);
        let state = BipartiteState::product(&ra, &rb).unwrap();
        let asm = make_assemblage(&state, &MeasurementSet::mubs(2, 3).unwrap()).unwrap();
        let sol = steering_robustness(&asm).unwrap();
        assert!(sol.value.abs() < 1e-6);
        match lhs_membership(&asm).unwrap() {
            LhsVerdict::Feasible { residual, .. } => assert!(residual < 1e-7, "{residual}"),
            other => panic!("expected LHS, got {other:?}"),
        }
    }

    #[test]
    fn dual_functional_is_bounded_on_every_strategy() {
        let asm = mub_assemblage(3, 2, 1.0);
        let sol = steering_robustness(&asm).unwrap();
        let strategies = enumerate_strategies(3, 2, 100).unwrap();
        for f in &sol.dual_witness {
            assert!(f.is_psd(1e-12));
        }
        assert!(lhs_bound(&sol.dual_witness, &strategies, 3, 3) <= 1.0 + 1e-12);
    }

    #[test]
    fn entangled_pair_is_separated() {
        match lhs_membership(&mub_assemblage(2, 2, 1.0)).unwrap() {
            LhsVerdict::Infeasible { value, .. } => assert!((value - 1.1716).abs() < 1e-3),
            other => panic!("expected a separating functional, got {other:?}"),
        }
    }

    #[test]
    fn oracle_agrees_on_small_cases() {
        for (d, k) in [(2, 2), (2, 3), (3, 2)] {
            let asm = mub_assemblage(d, k, 1.0);
            let sr = steering_robustness(&asm).unwrap().value;
            let oracle = sr_bisection_oracle(&asm, 1e-6).unwrap();
            assert!((sr - oracle).abs() < 1e-4, "d={d} k={k}: {sr} vs {oracle}");
        }
    }
}
