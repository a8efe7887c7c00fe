//! Infeasible primal–dual path-following method with the HKM search
//! direction and Mehrotra predictor–corrector steps.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, SymmetricEigen};
use rayon::prelude::*;

use super::cone::{ConeProblem, ConeSolution, ConicSolver, SolveStatus, SparseSym};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct IpmSettings {
    pub max_iterations: usize,
    /// Relative gap, primal and dual infeasibility targets.
    pub tolerance: f64,
    /// Looser targets accepted when progress stalls.
    pub fallback_tolerance: f64,
}

impl Default for IpmSettings {
    fn default() -> Self {
        Self {
            max_iterations: 120,
            tolerance: 1e-10,
            fallback_tolerance: 1e-7,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct InteriorPoint {
    pub settings: IpmSettings,
}

impl InteriorPoint {
    pub fn new(settings: IpmSettings) -> Self {
        Self { settings }
    }
}

type Blocks = Vec<DMatrix<f64>>;

fn inner(a: &[DMatrix<f64>], b: &[DMatrix<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

fn norm(a: &[DMatrix<f64>]) -> f64 {
    a.iter().map(|x| x.norm_squared()).sum::<f64>().sqrt()
}

fn sym(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Largest `α ≤ cap` keeping `X + α ΔX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(chol: &Cholesky<f64, Dyn>, dx: &DMatrix<f64>) -> f64 {
    let l = chol.l();
    let n = l.nrows();
    if n == 1 {
        let x = l[(0, 0)] * l[(0, 0)];
        return if dx[(0, 0)] >= 0.0 {
            f64::INFINITY
        } else {
            -x / dx[(0, 0)]
        };
    }
    let linv_dx = l
        .solve_lower_triangular(dx)
        .expect("Cholesky factor is nonsingular");
    let w = l
        .solve_lower_triangular(&linv_dx.transpose())
        .expect("Cholesky factor is nonsingular");
    let lo = SymmetricEigen::new(sym(w)).eigenvalues.min();
    if lo >= 0.0 {
        f64::INFINITY
    } else {
        -1.0 / lo
    }
}

fn factor(m: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    Cholesky::new(m.clone())
}

const SCHUR_CHUNKS: usize = 8;

/// `M_ij = Σ_l ⟨A_{l,i}, X_l A_{l,j} Z_l⟩` with `Z = S⁻¹`.
fn schur(p: &ConeProblem, x: &Blocks, z: &Blocks) -> DMatrix<f64> {
    let m = p.num_constraints();
    // fixed chunking keeps the summation order independent of the thread count
    let blocks = p.sizes.len();
    let chunk = blocks.div_ceil(SCHUR_CHUNKS).max(1);
    let partials: Vec<DMatrix<f64>> = (0..blocks)
        .step_by(chunk)
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|start| {
            let mut acc = DMatrix::<f64>::zeros(m, m);
            for l in start..(start + chunk).min(blocks) {
                let list = &p.by_block[l];
                let (xl, zl) = (&x[l], &z[l]);
                let n = xl.nrows();
                let mut g = DMatrix::<f64>::zeros(n, n);
                for (j, aj) in list {
                    g.fill(0.0);
                    add_xaz(&mut g, xl, aj, zl);
                    for (i, ai) in list {
                        if i <= j {
                            acc[(*i, *j)] += ai.dot(&g);
                        }
                    }
                }
            }
            acc
        })
        .collect();
    let mut out = DMatrix::<f64>::zeros(m, m);
    for part in partials {
        out += part;
    }
    for j in 0..m {
        for i in 0..j {
            out[(j, i)] = out[(i, j)];
        }
    }
    out
}

/// `g += X A Z` for sparse symmetric `A`.
fn add_xaz(g: &mut DMatrix<f64>, x: &DMatrix<f64>, a: &SparseSym, z: &DMatrix<f64>) {
    let n = x.nrows();
    for &(i, j, v) in &a.entries {
        for c in 0..n {
            let zj = v * z[(j, c)];
            let zi = v * z[(i, c)];
            for r in 0..n {
                g[(r, c)] += x[(r, i)] * zj;
                if i != j {
                    g[(r, c)] += x[(r, j)] * zi;
                }
            }
        }
    }
}

struct Direction {
    dx: Blocks,
    dy: DVector<f64>,
    ds: Blocks,
}

struct Workspace<'a> {
    p: &'a ConeProblem,
    x: &'a Blocks,
    z: &'a Blocks,
    rp: &'a DVector<f64>,
    rd: &'a Blocks,
    schur: &'a Cholesky<f64, Dyn>,
}

impl Workspace<'_> {
    /// Newton direction for the complementarity target `ΔX + sym(X ΔS Z) = Rc`.
    fn direction(&self, rc: &Blocks) -> Direction {
        let p = self.p;
        let nb = p.sizes.len();
        let mut t: Blocks = Vec::with_capacity(nb);
        for l in 0..nb {
            t.push(&rc[l] - &self.x[l] * &self.rd[l] * &self.z[l]);
        }
        let rhs = self.rp - p.apply(&t);
        let dy = self.schur.solve(&rhs);
        let mut ds = Vec::with_capacity(nb);
        let mut dx = Vec::with_capacity(nb);
        for l in 0..nb {
            let dsl = &self.rd[l] - p.adjoint_block(l, &dy);
            let dxl = sym(&rc[l] - &self.x[l] * &dsl * &self.z[l]);
            ds.push(dsl);
            dx.push(dxl);
        }
        Direction { dx, dy, ds }
    }
}

impl ConicSolver for InteriorPoint {
    fn name(&self) -> &'static str {
        "ipm"
    }

    fn solve(&self, p: &ConeProblem) -> Result<ConeSolution> {
        let nb = p.sizes.len();
        let m = p.num_constraints();
        if m == 0 {
            return Err(Error::Solver("problem has no constraints".into()));
        }
        let b = DVector::from_column_slice(&p.rhs);
        let c: Blocks = (0..nb).map(|l| p.objective_dense(l)).collect();
        let total: usize = p.sizes.iter().sum();
        let b_norm = b.norm();
        let c_norm = norm(&c);

        let mut x: Blocks = Vec::with_capacity(nb);
        let mut s: Blocks = Vec::with_capacity(nb);
        for l in 0..nb {
            let n = p.sizes[l] as f64;
            let mut xi: f64 = 10f64.max(n.sqrt());
            let mut eta: f64 = 10f64.max(n.sqrt()).max(p.objective[l].frobenius_norm());
            for (i, a) in &p.by_block[l] {
                let an = a.frobenius_norm();
                xi = xi.max(n.sqrt() * (1.0 + p.rhs[*i].abs()) / (1.0 + an));
                eta = eta.max(an);
            }
            x.push(DMatrix::identity(p.sizes[l], p.sizes[l]) * xi);
            s.push(DMatrix::identity(p.sizes[l], p.sizes[l]) * eta);
        }
        let mut y = DVector::zeros(m);

        let mut status = SolveStatus::Inaccurate;
        let mut iterations = 0;
        let mut stalls = 0;
        let (mut pinf, mut dinf);
        loop {
            let ax = p.apply(&x);
            let rp = &b - &ax;
            let rd: Blocks = (0..nb)
                .map(|l| &c[l] - &s[l] - p.adjoint_block(l, &y))
                .collect();
            let pobj = inner(&c, &x);
            let dobj = b.dot(&y);
            let xs = inner(&x, &s);
            let mu = xs / total as f64;
            pinf = rp.norm() / (1.0 + b_norm);
            dinf = norm(&rd) / (1.0 + c_norm);
            let rel_gap = (pobj - dobj).abs().max(xs.abs()) / (1.0 + pobj.abs() + dobj.abs());
            let tol = self.settings.tolerance;
            if rel_gap < tol && pinf < tol && dinf < tol {
                status = SolveStatus::Optimal;
                break;
            }
            if norm(&x) > 1e14 || y.norm() > 1e14 {
                status = SolveStatus::Infeasible;
                break;
            }
            let loose = self.settings.fallback_tolerance;
            let acceptable = rel_gap < loose && pinf < loose && dinf < loose;
            if iterations >= self.settings.max_iterations || stalls >= 4 {
                if acceptable {
                    status = SolveStatus::Optimal;
                }
                break;
            }
            iterations += 1;

            let xchol: Vec<Cholesky<f64, Dyn>> = x
                .iter()
                .map(factor)
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Solver("primal iterate left the cone".into()))?;
            let schol: Vec<Cholesky<f64, Dyn>> = s
                .iter()
                .map(factor)
                .collect::<Option<_>>()
                .ok_or_else(|| Error::Solver("dual iterate left the cone".into()))?;
            let z: Blocks = schol.iter().map(|ch| sym(ch.inverse())).collect();

            let mut mat = schur(p, &x, &z);
            let diag_max = mat.diagonal().amax().max(1e-300);
            let mut reg = 0.0;
            let schur_chol = loop {
                if let Some(ch) = factor(&mat) {
                    break ch;
                }
                let bump = if reg == 0.0 {
                    1e-14 * diag_max
                } else {
                    reg * 100.0
                };
                for i in 0..m {
                    mat[(i, i)] += bump - reg;
                }
                reg = bump;
                if reg > 1e-4 * diag_max {
                    return Err(Error::Solver(
                        "Schur complement is numerically singular".into(),
                    ));
                }
            };
            let ws = Workspace {
                p,
                x: &x,
                z: &z,
                rp: &rp,
                rd: &rd,
                schur: &schur_chol,
            };

            // predictor
            let rc: Blocks = x.iter().map(|xl| -xl.clone()).collect();
            let aff = ws.direction(&rc);
            let ap = step_bound(&xchol, &aff.dx).min(1.0);
            let ad = step_bound(&schol, &aff.ds).min(1.0);
            let mut mu_aff = 0.0;
            for l in 0..nb {
                mu_aff += (&x[l] + &aff.dx[l] * ap).dot(&(&s[l] + &aff.ds[l] * ad));
            }
            mu_aff /= total as f64;
            let expon = if ap.min(ad) > 0.3 { 3.0 } else { 2.0 };
            let sigma = (mu_aff / mu).max(0.0).powf(expon).clamp(0.0, 1.0);

            // corrector
            let rc: Blocks = (0..nb)
                .map(|l| &z[l] * (sigma * mu) - &x[l] - &aff.dx[l] * &aff.ds[l] * &z[l])
                .collect();
            let dir = ws.direction(&rc);
            let gamma = 0.9 + 0.09 * ap.min(ad);
            let ap = (gamma * step_bound(&xchol, &dir.dx)).min(1.0);
            let ad = (gamma * step_bound(&schol, &dir.ds)).min(1.0);
            // rounding can put a full fraction-to-boundary step just outside the cone
            let (x_next, ap) = interior_step(&x, &dir.dx, ap);
            let (s_next, ad) = interior_step(&s, &dir.ds, ad);
            if ap.max(ad) < 1e-8 {
                stalls += 1;
            } else {
                stalls = 0;
            }
            x = x_next;
            s = s_next;
            y += &dir.dy * ad;
        }
        let primal_objective = inner(&c, &x);
        let dual_objective = b.dot(&y);
        Ok(ConeSolution {
            x,
            y,
            s,
            primal_objective,
            dual_objective,
            primal_infeasibility: pinf,
            dual_infeasibility: dinf,
            iterations,
            status,
        })
    }
}

fn interior_step(v: &Blocks, d: &Blocks, mut alpha: f64) -> (Blocks, f64) {
    for _ in 0..30 {
        let next: Blocks = v
            .iter()
            .zip(d)
            .map(|(vl, dl)| sym(vl + dl * alpha))
            .collect();
        if next.iter().all(|b| factor(b).is_some()) {
            return (next, alpha);
        }
        alpha *= 0.5;
    }
    (v.clone(), 0.0)
}

fn step_bound(chols: &[Cholesky<f64, Dyn>], d: &Blocks) -> f64 {
    chols
        .iter()
        .zip(d)
        .map(|(ch, dl)| max_step(ch, dl))
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdp::cone::ProblemBuilder;

    #[test]
    fn linear_program_in_scalar_blocks() {
        // min x1 + 2 x2 s.t. x1 + x2 = 1 → x = (1, 0), value 1
        let mut pb = ProblemBuilder::new();
        let a = pb.real_block(1);
        let b = pb.real_block(1);
        pb.objective_entry(a, 0, 0, 1.0);
        pb.objective_entry(b, 0, 0, 2.0);
        let c = pb.constraint(1.0);
        pb.entry(c, a, 0, 0, 1.0);
        pb.entry(c, b, 0, 0, 1.0);
        let sol = InteriorPoint::default()
            .solve(&pb.build().unwrap())
            .unwrap();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - 1.0).abs() < 1e-8);
        assert!((sol.dual_objective - 1.0).abs() < 1e-8);
    }

    #[test]
    fn minimum_eigenvalue_as_sdp() {
        // min ⟨C, X⟩ s.t. Tr X = 1 gives λ_min(C)
        let cm = [[2.0, 1.0, 0.0], [1.0, 3.0, -1.0], [0.0, -1.0, 1.5]];
        let mut pb = ProblemBuilder::new();
        let l = pb.real_block(3);
        for i in 0..3 {
            for j in 0..=i {
                pb.objective_entry(l, i, j, cm[i][j]);
            }
        }
        let t = pb.constraint(1.0);
        for i in 0..3 {
            pb.entry(t, l, i, i, 1.0);
        }
        let sol = InteriorPoint::default()
            .solve(&pb.build().unwrap())
            .unwrap();
        let expected = SymmetricEigen::new(DMatrix::from_fn(3, 3, |i, j| cm[i][j]))
            .eigenvalues
            .min();
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert!((sol.primal_objective - expected).abs() < 1e-8);
        assert!((sol.dual_objective - expected).abs() < 1e-8);
    }

    #[test]
    fn complex_block_eigenvalue() {
        use crate::linalg::{min_eig, HermMatrix, C64};
        let h = HermMatrix::from_rows(
            2,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        let mut pb = ProblemBuilder::new();
        let l = pb.complex_block(2);
        pb.objective_herm(l, &h, 1.0);
        let t = pb.constraint(1.0);
        pb.herm_entry(t, l, &HermMatrix::identity(2), 1.0);
        let sol = InteriorPoint::default()
            .solve(&pb.build().unwrap())
            .unwrap();
        assert!((sol.primal_objective - min_eig(&h)).abs() < 1e-8);
    }
}
