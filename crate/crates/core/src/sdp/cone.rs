//! Standard-form conic problems over products of real PSD cones.
//!
//! Primal: `min Σ_l ⟨C_l, X_l⟩  s.t.  Σ_l ⟨A_{l,i}, X_l⟩ = b_i,  X_l ⪰ 0`.
//! Dual:   `max bᵀy  s.t.  S_l = C_l − Σ_i y_i A_{l,i} ⪰ 0`.
//!
//! Complex Hermitian variables of size `n` are stored as real blocks of size
//! `2n` through `[[Re W, −Im W], [Im W, Re W]]`; coefficient matrices are
//! scaled by ½ so that `⟨A, X⟩ = Re Tr(H W)` with `W = compress(X)/2`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{real_compress, HermMatrix, C64};

/// Lower-triangle triplets `(row ≥ col, value)` of a symmetric matrix.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SparseSym {
    pub entries: Vec<(usize, usize, f64)>,
}

impl SparseSym {
    /// `⟨A, X⟩` for dense symmetric `X` (only the symmetric part of `X` contributes).
    pub fn dot(&self, x: &DMatrix<f64>) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| {
                if i == j {
                    v * x[(i, i)]
                } else {
                    v * (x[(i, j)] + x[(j, i)])
                }
            })
            .sum()
    }

    /// `out += f · A`.
    pub fn add_to(&self, out: &mut DMatrix<f64>, f: f64) {
        for &(i, j, v) in &self.entries {
            out[(i, j)] += f * v;
            if i != j {
                out[(j, i)] += f * v;
            }
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries
            .iter()
            .map(|&(i, j, v)| if i == j { v * v } else { 2.0 * v * v })
            .sum::<f64>()
            .sqrt()
    }

    fn canonicalise(mut entries: Vec<(usize, usize, f64)>) -> Self {
        for e in entries.iter_mut() {
            if e.0 < e.1 {
                std::mem::swap(&mut e.0, &mut e.1);
            }
        }
        entries.sort_by_key(|a| (a.0, a.1));
        let mut out: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
        for (i, j, v) in entries {
            match out.last_mut() {
                Some(last) if last.0 == i && last.1 == j => last.2 += v,
                _ => out.push((i, j, v)),
            }
        }
        out.retain(|e| e.2 != 0.0);
        Self { entries: out }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum BlockKind {
    Real,
    /// Embedding of a complex Hermitian block of the given size.
    Complex,
}

/// A problem in standard conic form.
#[derive(Clone, Debug, Serialize)]
pub struct ConeProblem {
    pub(crate) sizes: Vec<usize>,
    pub(crate) kinds: Vec<BlockKind>,
    pub(crate) objective: Vec<SparseSym>,
    /// Per block, the constraints that touch it with their coefficients.
    pub(crate) by_block: Vec<Vec<(usize, SparseSym)>>,
    pub(crate) rhs: Vec<f64>,
}

impl ConeProblem {
    pub fn num_constraints(&self) -> usize {
        self.rhs.len()
    }

    pub fn block_sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// `𝒜(X)`.
    pub fn apply(&self, x: &[DMatrix<f64>]) -> DVector<f64> {
        let mut out = DVector::zeros(self.rhs.len());
        for (l, list) in self.by_block.iter().enumerate() {
            for (i, a) in list {
                out[*i] += a.dot(&x[l]);
            }
        }
        out
    }

    /// `𝒜*(y)` for one block.
    pub fn adjoint_block(&self, l: usize, y: &DVector<f64>) -> DMatrix<f64> {
        let n = self.sizes[l];
        let mut out = DMatrix::zeros(n, n);
        for (i, a) in &self.by_block[l] {
            a.add_to(&mut out, y[*i]);
        }
        out
    }

    pub fn objective_dense(&self, l: usize) -> DMatrix<f64> {
        let n = self.sizes[l];
        let mut out = DMatrix::zeros(n, n);
        self.objective[l].add_to(&mut out, 1.0);
        out
    }

    pub fn objective_value(&self, x: &[DMatrix<f64>]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c.dot(x)).sum()
    }

    /// Compact description for JSON export.
    pub fn summary(&self) -> ProblemSummary {
        ProblemSummary {
            blocks: self.sizes.clone(),
            constraints: self.rhs.len(),
            nonzeros: self
                .by_block
                .iter()
                .flatten()
                .map(|(_, a)| a.entries.len())
                .sum(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ProblemSummary {
    pub blocks: Vec<usize>,
    pub constraints: usize,
    pub nonzeros: usize,
}

/// Incremental construction of a [`ConeProblem`].
#[derive(Default)]
pub struct ProblemBuilder {
    sizes: Vec<usize>,
    kinds: Vec<BlockKind>,
    objective: Vec<Vec<(usize, usize, f64)>>,
    constraints: Vec<Vec<(usize, usize, usize, f64)>>,
    rhs: Vec<f64>,
}

impl ProblemBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn real_block(&mut self, n: usize) -> usize {
        self.sizes.push(n);
        self.kinds.push(BlockKind::Real);
        self.objective.push(Vec::new());
        self.sizes.len() - 1
    }

    /// A complex Hermitian `n × n` variable.
    pub fn complex_block(&mut self, n: usize) -> usize {
        let l = self.real_block(2 * n);
        self.kinds[l] = BlockKind::Complex;
        l
    }

    pub fn constraint(&mut self, rhs: f64) -> usize {
        self.constraints.push(Vec::new());
        self.rhs.push(rhs);
        self.rhs.len() - 1
    }

    pub fn objective_entry(&mut self, block: usize, i: usize, j: usize, v: f64) {
        self.objective[block].push((i, j, v));
    }

    pub fn entry(&mut self, con: usize, block: usize, i: usize, j: usize, v: f64) {
        self.constraints[con].push((block, i, j, v));
    }

    /// Objective term `f · Re Tr(H W)` on a complex block.
    pub fn objective_herm(&mut self, block: usize, h: &HermMatrix, f: f64) {
        for (i, j, v) in embed_entries(h, f) {
            self.objective[block].push((i, j, v));
        }
    }

    /// Objective term `f · Tr W` on a complex block.
    pub fn objective_trace(&mut self, block: usize, f: f64) {
        for i in 0..self.sizes[block] {
            self.objective[block].push((i, i, 0.5 * f));
        }
    }

    /// Constraint term `f · Re Tr(H W)` on a complex block.
    pub fn herm_entry(&mut self, con: usize, block: usize, h: &HermMatrix, f: f64) {
        for (i, j, v) in embed_entries(h, f) {
            self.constraints[con].push((block, i, j, v));
        }
    }

    /// Constraint term `f · ⟨B_β, W⟩` for element `beta` of the Hermitian basis.
    pub fn basis_entry(&mut self, con: usize, block: usize, beta: usize, f: f64) {
        let n = self.sizes[block] / 2;
        for (r, s, h) in basis_element(n, beta) {
            for (i, j, v) in embed_one(n, r, s, h, f) {
                self.constraints[con].push((block, i, j, v));
            }
        }
    }

    pub fn build(self) -> Result<ConeProblem> {
        let nb = self.sizes.len();
        let mut by_block: Vec<Vec<(usize, SparseSym)>> = vec![Vec::new(); nb];
        for (c, mut entries) in self.constraints.into_iter().enumerate() {
            if entries.is_empty() {
                return Err(Error::Solver(format!("constraint {c} has no coefficients")));
            }
            entries.sort_by_key(|e| e.0);
            let mut start = 0;
            while start < entries.len() {
                let l = entries[start].0;
                let end = start + entries[start..].iter().take_while(|e| e.0 == l).count();
                let a = SparseSym::canonicalise(
                    entries[start..end]
                        .iter()
                        .map(|e| (e.1, e.2, e.3))
                        .collect(),
                );
                if let Some(&(i, _, _)) = a.entries.iter().find(|e| e.0 >= self.sizes[l]) {
                    return Err(Error::Solver(format!(
                        "index {i} outside block {l} of size {}",
                        self.sizes[l]
                    )));
                }
                if !a.entries.is_empty() {
                    by_block[l].push((c, a));
                }
                start = end;
            }
        }
        let objective = self
            .objective
            .into_iter()
            .map(SparseSym::canonicalise)
            .collect();
        Ok(ConeProblem {
            sizes: self.sizes,
            kinds: self.kinds,
            objective,
            by_block,
            rhs: self.rhs,
        })
    }
}

/// Lower-triangle entries `(r ≥ s, H_rs)` of Hermitian basis element `beta`:
/// diagonal units first, then for each `r > s` the real and imaginary pair.
pub fn basis_element(n: usize, beta: usize) -> Vec<(usize, usize, C64)> {
    if beta < n {
        return vec![(beta, beta, C64::new(1.0, 0.0))];
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let k = (beta - n) / 2;
    let (mut r, mut s) = (1, 0);
    let mut count = 0;
    'outer: for rr in 1..n {
        for ss in 0..rr {
            if count == k {
                r = rr;
                s = ss;
                break 'outer;
            }
            count += 1;
        }
    }
    if (beta - n).is_multiple_of(2) {
        vec![(r, s, C64::new(h, 0.0))]
    } else {
        vec![(r, s, C64::new(0.0, h))]
    }
}

/// `Re Tr(B_β W)` for every basis element, in basis order.
pub fn basis_coordinates(w: &HermMatrix) -> Vec<f64> {
    let n = w.dim();
    (0..n * n)
        .map(|beta| {
            basis_element(n, beta)
                .into_iter()
                .map(|(r, s, h)| {
                    if r == s {
                        (h * w.matrix()[(r, r)]).re
                    } else {
                        (h * w.matrix()[(s, r)] + h.conj() * w.matrix()[(r, s)]).re
                    }
                })
                .sum()
        })
        .collect()
}

/// `Σ_β c_β B_β`.
pub fn from_basis_coordinates(n: usize, c: &[f64]) -> HermMatrix {
    let mut m = crate::linalg::CMatrix::zeros(n, n);
    for (beta, &cb) in c.iter().enumerate() {
        for (r, s, h) in basis_element(n, beta) {
            m[(r, s)] += h * cb;
            if r != s {
                m[(s, r)] += h.conj() * cb;
            }
        }
    }
    HermMatrix::new(m).expect("basis expansion is Hermitian")
}

fn embed_one(n: usize, r: usize, s: usize, h: C64, f: f64) -> Vec<(usize, usize, f64)> {
    let c = 0.5 * f;
    let mut out = vec![(r, s, c * h.re), (r + n, s + n, c * h.re)];
    if h.im != 0.0 {
        out.push((r + n, s, c * h.im));
        if r != s {
            out.push((s + n, r, -c * h.im));
        }
    }
    out
}

fn embed_entries(h: &HermMatrix, f: f64) -> Vec<(usize, usize, f64)> {
    let n = h.dim();
    let mut out = Vec::new();
    for r in 0..n {
        for s in 0..=r {
            let z = h.matrix()[(r, s)];
            if z.norm() > 0.0 {
                let z = if r == s { C64::new(z.re, 0.0) } else { z };
                out.extend(embed_one(n, r, s, z, f));
            }
        }
    }
    out
}

/// Hermitian matrix represented by a complex block: `compress(X)/2`.
pub fn complex_value(x: &DMatrix<f64>) -> HermMatrix {
    real_compress(x)
        .expect("complex blocks have even size")
        .scale(0.5)
}

/// Termination status of a conic solve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Inaccurate,
    Infeasible,
}

/// Primal–dual point returned by a [`ConicSolver`].
#[derive(Clone, Debug)]
pub struct ConeSolution {
    pub x: Vec<DMatrix<f64>>,
    pub y: DVector<f64>,
    pub s: Vec<DMatrix<f64>>,
    pub primal_objective: f64,
    pub dual_objective: f64,
    pub primal_infeasibility: f64,
    pub dual_infeasibility: f64,
    pub iterations: usize,
    pub status: SolveStatus,
}

/// Any engine that solves [`ConeProblem`]s. Implementations must be reentrant.
pub trait ConicSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, problem: &ConeProblem) -> Result<ConeSolution>;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_basis, real_embed};

    #[test]
    fn basis_matches_linalg_ordering_up_to_pairs() {
        for n in 1..5 {
            let reference = hermitian_basis(n);
            let ours: Vec<HermMatrix> = (0..n * n)
                .map(|b| {
                    let mut c = vec![0.0; n * n];
                    c[b] = 1.0;
                    from_basis_coordinates(n, &c)
                })
                .collect();
            // both orthonormal and spanning: the Gram matrix is orthogonal
            for a in &ours {
                let norm: f64 = reference.iter().map(|r| a.inner(r).powi(2)).sum();
                assert!((norm - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn coordinates_round_trip() {
        let w = HermMatrix::from_rows(
            3,
            &[
                C64::new(1.0, 0.0),
                C64::new(0.2, 0.3),
                C64::new(-0.5, 0.1),
                C64::new(0.2, -0.3),
                C64::new(2.0, 0.0),
                C64::new(0.0, 0.7),
                C64::new(-0.5, -0.1),
                C64::new(0.0, -0.7),
                C64::new(-1.0, 0.0),
            ],
        )
        .unwrap();
        let c = basis_coordinates(&w);
        assert!(from_basis_coordinates(3, &c).max_abs_diff(&w) < 1e-14);
    }

    #[test]
    fn embedded_coefficients_reproduce_trace_pairing() {
        let h = HermMatrix::from_rows(
            2,
            &[
                C64::new(0.3, 0.0),
                C64::new(0.1, -0.4),
                C64::new(0.1, 0.4),
                C64::new(-0.2, 0.0),
            ],
        )
        .unwrap();
        let w = HermMatrix::from_rows(
            2,
            &[
                C64::new(0.6, 0.0),
                C64::new(0.2, 0.1),
                C64::new(0.2, -0.1),
                C64::new(0.4, 0.0),
            ],
        )
        .unwrap();
        let a = SparseSym::canonicalise(embed_entries(&h, 1.0));
        assert!((a.dot(&real_embed(&w)) - h.inner(&w)).abs() < 1e-14);
        assert!(complex_value(&real_embed(&w)).max_abs_diff(&w) < 1e-15);
    }
}
