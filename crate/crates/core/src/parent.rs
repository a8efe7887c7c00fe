//! Explicit parent measurements.
//!
//! For rank-one POVMs `A`, `B` in dimension `n` the elements
//!
//! ```text
//! G_ab ∝ {A_a, B_b} + (Tr(B_b) A_a + Tr(A_a) B_b)/(2√n)
//!        + (√n/2)(A_a^½ B_b A_a^½ + B_b^½ A_a B_b^½)
//! ```
//!
//! sum to `(2 + 2√n)𝟙` and have marginals dominating `h_pair(n)·A_a` and
//! `h_pair(n)·B_b`. Larger sets are handled by nesting this pairing and
//! averaging over cyclic shifts of the setting order.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::bounds::{h_pair, h_recursive};
use crate::error::{Error, Result};
use crate::linalg::{self, herm_eig, min_eig, psd_sqrt, CVector, HermMatrix, PSD_TOL};
use crate::quantum::{MeasurementSet, Povm};
use crate::sdp::{strategy_count, DEFAULT_STRATEGY_CAP};

/// Marginal slack tolerated by [`verify_parent`].
pub const MARGINAL_TOL: f64 = 1e-7;

const RANK_TOL: f64 = 1e-9;

/// A POVM on the outcome grid `[d]^k`, elements in lexicographic label order.
#[derive(Clone, Debug, Serialize)]
pub struct ParentMeasurement {
    pub dim: usize,
    pub k: usize,
    /// Outcomes per child measurement.
    pub outcomes: usize,
    pub elements: Vec<HermMatrix>,
    /// Smallest entry of `eta_per_setting`.
    pub eta_guarantee: f64,
    /// Guaranteed shrinking factor for each child.
    pub eta_per_setting: Vec<f64>,
}

impl ParentMeasurement {
    /// Label `(j_0, …, j_{k−1})` of grid position `idx`.
    pub fn label(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.k];
        for slot in out.iter_mut().rev() {
            *slot = idx % self.outcomes;
            idx /= self.outcomes;
        }
        out
    }

    pub fn index(&self, label: &[usize]) -> usize {
        label.iter().fold(0, |acc, &j| acc * self.outcomes + j)
    }

    /// `Σ_j δ_{j_x,a} G_j`.
    pub fn marginal(&self, a: usize, x: usize) -> HermMatrix {
        linalg::sum(
            self.dim,
            self.elements
                .iter()
                .enumerate()
                .filter(|(j, _)| self.label(*j)[x] == a)
                .map(|(_, g)| g),
        )
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }
}

/// Outcome of [`verify_parent`]; slacks are minimum eigenvalues, so negative means violated.
#[derive(Clone, Debug, Serialize)]
pub struct ParentVerdict {
    pub passed: bool,
    pub positivity_slack: f64,
    pub normalization_error: f64,
    pub marginal_slack: f64,
    /// `(a, x)` where the marginal slack is smallest.
    pub worst_marginal: (usize, usize),
}

impl ParentVerdict {
    pub fn worst_slack(&self) -> f64 {
        self.positivity_slack.min(self.marginal_slack)
    }
}

/// Checks `G_j ⪰ 0`, `Σ_j G_j = 𝟙` and `Σ_j δ_{j_x,a} G_j ⪰ η A_{a|x}`.
pub fn verify_parent(g: &ParentMeasurement, m: &MeasurementSet, eta: f64) -> Result<ParentVerdict> {
    verify_parent_per_setting(g, m, &vec![eta; m.k()])
}

pub fn verify_parent_per_setting(
    g: &ParentMeasurement,
    m: &MeasurementSet,
    eta: &[f64],
) -> Result<ParentVerdict> {
    if g.k != m.k() || g.outcomes != m.outcomes() || g.dim != m.dim() || eta.len() != m.k() {
        return Err(Error::Shape(format!(
            "parent grid {}^{} in dimension {} does not match {} settings with {} outcomes in dimension {}",
            g.outcomes,
            g.k,
            g.dim,
            m.k(),
            m.outcomes(),
            m.dim()
        )));
    }
    let positivity_slack = g.elements.iter().map(min_eig).fold(f64::INFINITY, f64::min);
    let normalization_error =
        linalg::sum(g.dim, &g.elements).max_abs_diff(&HermMatrix::identity(g.dim));
    let mut marginal_slack = f64::INFINITY;
    let mut worst_marginal = (0, 0);
    for x in 0..m.k() {
        for a in 0..m.outcomes() {
            let s = min_eig(&(&g.marginal(a, x) - &m.effect(a, x).scale(eta[x])));
            if s < marginal_slack {
                marginal_slack = s;
                worst_marginal = (a, x);
            }
        }
    }
    Ok(ParentVerdict {
        passed: positivity_slack >= -PSD_TOL
            && normalization_error <= PSD_TOL
            && marginal_slack >= -MARGINAL_TOL,
        positivity_slack,
        normalization_error,
        marginal_slack,
        worst_marginal,
    })
}

/// `min_a λ_min(Σ_b B_b^½ A_a B_b^½ − A_a/n)`.
pub fn operator_inequality_check(a: &Povm, b: &Povm) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::Shape("POVMs act on different dimensions".into()));
    }
    let n = a.dim();
    let roots: Vec<HermMatrix> = b.effects().iter().map(psd_sqrt).collect::<Result<_>>()?;
    Ok(a.effects()
        .iter()
        .map(|aa| {
            let lhs = linalg::sum(n, &roots.iter().map(|r| aa.sandwich(r)).collect::<Vec<_>>());
            min_eig(&(&lhs - &aa.scale(1.0 / n as f64)))
        })
        .fold(f64::INFINITY, f64::min))
}

/// PSD operator with its square root and trace, ready for pairing.
struct Piece {
    op: HermMatrix,
    root: HermMatrix,
    trace: f64,
}

impl Piece {
    fn new(op: HermMatrix) -> Result<Self> {
        let root = psd_sqrt(&op)?;
        let trace = op.trace();
        Ok(Self { op, root, trace })
    }

    fn rank_one(value: f64, v: CVector) -> Self {
        let proj = HermMatrix::outer(&v);
        Self {
            op: proj.scale(value),
            root: proj.scale(value.sqrt()),
            trace: value,
        }
    }
}

/// Unnormalised pairing formula.
fn pair_element(a: &Piece, b: &Piece, n: usize) -> HermMatrix {
    let sn = (n as f64).sqrt();
    let anti = a.op.anticommutator(&b.op);
    let traces = &a.op.scale(b.trace) + &b.op.scale(a.trace);
    let roots = &b.op.sandwich(&a.root) + &a.op.sandwich(&b.root);
    &(&anti + &traces.scale(0.5 / sn)) + &roots.scale(0.5 * sn)
}

fn check_rank_one(p: &Povm, what: &str) -> Result<()> {
    if p.is_rank_one() {
        Ok(())
    } else {
        Err(Error::Precondition(format!(
            "{what} is not rank-one; the explicit pairing needs rank-one effects"
        )))
    }
}

/// Pairing of two rank-one POVMs with `η = h_pair(n)`; labels `(a, b)`.
pub fn parent_pair_rank1(a: &Povm, b: &Povm) -> Result<ParentMeasurement> {
    if a.dim() != b.dim() {
        return Err(Error::Shape("POVMs act on different dimensions".into()));
    }
    if a.num_outcomes() != b.num_outcomes() {
        return Err(Error::Shape("POVMs have different outcome counts".into()));
    }
    check_rank_one(a, "first POVM")?;
    check_rank_one(b, "second POVM")?;
    let n = a.dim();
    let pa: Vec<Piece> = a
        .effects()
        .iter()
        .cloned()
        .map(Piece::new)
        .collect::<Result<_>>()?;
    let pb: Vec<Piece> = b
        .effects()
        .iter()
        .cloned()
        .map(Piece::new)
        .collect::<Result<_>>()?;
    let mut raw = Vec::with_capacity(pa.len() * pb.len());
    for x in &pa {
        for y in &pb {
            raw.push(pair_element(x, y, n));
        }
    }
    let norm = 2.0 + 2.0 * (n as f64).sqrt();
    let dev = linalg::sum(n, &raw).max_abs_diff(&HermMatrix::identity(n).scale(norm));
    if dev > PSD_TOL * norm {
        return Err(Error::Consistency(format!(
            "pairing elements miss (2+2√n)𝟙 by {dev:e}"
        )));
    }
    let h = h_pair(n);
    Ok(ParentMeasurement {
        dim: n,
        k: 2,
        outcomes: a.num_outcomes(),
        elements: raw.into_iter().map(|g| g.scale(1.0 / norm)).collect(),
        eta_guarantee: h,
        eta_per_setting: vec![h, h],
    })
}

/// How non-rank-one intermediate parents are fed back into the pairing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RecursionMode {
    /// Split every element into rank-one eigencomponents, pair those, then
    /// merge the pieces back under their original labels.
    Refine,
    /// Apply the pairing formula to the elements as they are.
    Direct,
}

/// Measurements covered so far and the labelled elements of their joint parent.
struct Node {
    settings: Vec<usize>,
    items: Vec<(Vec<usize>, HermMatrix)>,
}

impl Node {
    fn leaf(x: usize, p: &Povm) -> Self {
        Self {
            settings: vec![x],
            items: p
                .effects()
                .iter()
                .enumerate()
                .map(|(a, e)| (vec![a], e.clone()))
                .collect(),
        }
    }

    fn pieces(&self, mode: RecursionMode) -> Result<Vec<(&[usize], Piece)>> {
        let mut out = Vec::new();
        for (label, op) in &self.items {
            match mode {
                RecursionMode::Direct => out.push((label.as_slice(), Piece::new(op.clone())?)),
                RecursionMode::Refine => {
                    let e = herm_eig(op)?;
                    let top = e.values.last().copied().unwrap_or(0.0).max(0.0);
                    for (i, &val) in e.values.iter().enumerate() {
                        if val > RANK_TOL * top.max(1e-300) && val > 0.0 {
                            out.push((
                                label.as_slice(),
                                Piece::rank_one(val, e.vectors.column(i).into_owned()),
                            ));
                        }
                    }
                }
            }
        }
        Ok(out)
    }
}

fn combine(p: &Node, q: &Node, n: usize, mode: RecursionMode) -> Result<Node> {
    let norm = 2.0 + 2.0 * (n as f64).sqrt();
    let pp = p.pieces(mode)?;
    let qq = q.pieces(mode)?;
    let mut merged: BTreeMap<Vec<usize>, HermMatrix> = BTreeMap::new();
    for (la, a) in &pp {
        for (lb, b) in &qq {
            let g = pair_element(a, b, n).scale(1.0 / norm);
            let label: Vec<usize> = la.iter().chain(lb.iter()).copied().collect();
            match merged.get_mut(&label) {
                Some(acc) => *acc = &*acc + &g,
                None => {
                    merged.insert(label, g);
                }
            }
        }
    }
    Ok(Node {
        settings: p.settings.iter().chain(&q.settings).copied().collect(),
        items: merged.into_iter().collect(),
    })
}

/// One pairing tree for the settings in `order`: the first `2l` are paired
/// first, then a balanced binary tree joins the remaining `2^r` nodes.
fn tree_parent(
    m: &MeasurementSet,
    order: &[usize],
    mode: RecursionMode,
) -> Result<ParentMeasurement> {
    let k = order.len();
    let n = m.dim();
    let d = m.outcomes();
    let r = (usize::BITS - 1 - k.leading_zeros()) as i32;
    let l = k - (1usize << r);
    let h = h_pair(n);

    let mut nodes = Vec::with_capacity(k);
    for i in 0..l {
        let (x, y) = (order[2 * i], order[2 * i + 1]);
        nodes.push(combine(
            &Node::leaf(x, m.povm(x)),
            &Node::leaf(y, m.povm(y)),
            n,
            mode,
        )?);
    }
    for &x in &order[2 * l..] {
        nodes.push(Node::leaf(x, m.povm(x)));
    }
    while nodes.len() > 1 {
        let mut next = Vec::with_capacity(nodes.len() / 2);
        for pair in nodes.chunks(2) {
            next.push(combine(&pair[0], &pair[1], n, mode)?);
        }
        nodes = next;
    }
    let root = nodes.pop().expect("k >= 1");

    let mut eta = vec![h.powi(r); k];
    for &x in &order[..2 * l] {
        eta[x] = h.powi(r + 1);
    }
    let mut elements = vec![HermMatrix::zeros(n); d.pow(k as u32)];
    for (label, g) in root.items {
        let mut canonical = vec![0; k];
        for (pos, &x) in root.settings.iter().enumerate() {
            canonical[x] = label[pos];
        }
        let idx = canonical.iter().fold(0, |acc, &j| acc * d + j);
        elements[idx] = &elements[idx] + &g;
    }
    Ok(ParentMeasurement {
        dim: n,
        k,
        outcomes: d,
        elements,
        eta_guarantee: eta.iter().copied().fold(f64::INFINITY, f64::min),
        eta_per_setting: eta,
    })
}

/// Averaged parent for `k` rank-one measurements with its building blocks.
#[derive(Clone, Debug, Serialize)]
pub struct RecursiveParent {
    /// One term per cyclic shift (a single term when `k` is a power of two).
    pub terms: Vec<ParentMeasurement>,
    pub averaged: ParentMeasurement,
    pub mode: RecursionMode,
    /// Verification of the averaged parent at its guarantee.
    pub verdict: ParentVerdict,
    /// Set when verification failed: which constraint broke and by how much.
    pub counterexample: Option<String>,
}

pub fn parent_recursive(m: &MeasurementSet) -> Result<RecursiveParent> {
    parent_recursive_with(m, RecursionMode::Refine)
}

pub fn parent_recursive_with(m: &MeasurementSet, mode: RecursionMode) -> Result<RecursiveParent> {
    let k = m.k();
    if k < 2 {
        return Err(Error::Precondition(
            "a parent construction needs at least two measurements".into(),
        ));
    }
    for (x, p) in m.povms().iter().enumerate() {
        check_rank_one(p, &format!("measurement {x}"))?;
    }
    strategy_count(m.outcomes(), k, DEFAULT_STRATEGY_CAP)?;
    let n = m.dim();
    let l = k - (1usize << (usize::BITS - 1 - k.leading_zeros()));
    let shifts = if l == 0 { 1 } else { k };
    let terms: Vec<ParentMeasurement> = (0..shifts)
        .map(|s| {
            let order: Vec<usize> = (0..k).map(|i| (i + s) % k).collect();
            tree_parent(m, &order, mode)
        })
        .collect::<Result<_>>()?;

    let w = 1.0 / shifts as f64;
    let grid = terms[0].elements.len();
    let elements: Vec<HermMatrix> = (0..grid)
        .map(|j| linalg::sum(n, terms.iter().map(|t| &t.elements[j])).scale(w))
        .collect();
    let eta_per_setting: Vec<f64> = (0..k)
        .map(|x| terms.iter().map(|t| t.eta_per_setting[x]).sum::<f64>() * w)
        .collect();
    let guarantee = h_recursive(k, n);
    debug_assert!(eta_per_setting
        .iter()
        .all(|e| (e - guarantee).abs() < 1e-12));
    let averaged = ParentMeasurement {
        dim: n,
        k,
        outcomes: m.outcomes(),
        elements,
        eta_guarantee: guarantee,
        eta_per_setting: vec![guarantee; k],
    };
    let verdict = verify_parent(&averaged, m, guarantee)?;
    let counterexample = (!verdict.passed).then(|| {
        format!(
            "{mode:?} recursion at k={k}, n={n}: positivity {:.3e}, normalisation {:.3e}, marginal {:.3e} at (a={}, x={}) for eta={guarantee:.6}",
            verdict.positivity_slack,
            verdict.normalization_error,
            verdict.marginal_slack,
            verdict.worst_marginal.0,
            verdict.worst_marginal.1
        )
    });
    Ok(RecursiveParent {
        terms,
        averaged,
        mode,
        verdict,
        counterexample,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::random::{random_projective_measurements, random_rank_one_povm, rng};

    #[test]
    fn qubit_mub_pair_meets_the_bound_tightly() {
        let m = MeasurementSet::mubs(2, 2).unwrap();
        let g = parent_pair_rank1(m.povm(0), m.povm(1)).unwrap();
        assert_eq!(g.elements.len(), 4);
        let ok = verify_parent(&g, &m, h_pair(2)).unwrap();
        assert!(ok.passed, "{ok:?}");
        assert!(ok.marginal_slack.abs() < 1e-10);
        let over = verify_parent(&g, &m, h_pair(2) + 0.01).unwrap();
        assert!(!over.passed);
        assert!(verify_parent(&g, &m, 0.0).unwrap().passed);
    }

    #[test]
    fn identical_children_have_slack() {
        let m = MeasurementSet::mubs(3, 1).unwrap();
        let z = m.povm(0);
        let both = MeasurementSet::new(vec![z.clone(), z.clone()]).unwrap();
        let g = parent_pair_rank1(z, z).unwrap();
        let v = verify_parent(&g, &both, h_pair(3)).unwrap();
        assert!(v.passed && v.marginal_slack > 0.01, "{v:?}");
    }

    #[test]
    fn mub_pairs_up_to_nine() {
        for n in [2, 3, 4, 5, 7, 8, 9] {
            let m = MeasurementSet::mubs(n, 2).unwrap();
            let g = parent_pair_rank1(m.povm(0), m.povm(1)).unwrap();
            assert!((g.eta_guarantee - h_pair(n)).abs() < 1e-15);
            assert!(
                verify_parent(&g, &m, g.eta_guarantee).unwrap().passed,
                "n={n}"
            );
        }
    }

    #[test]
    fn non_rank_one_input_is_rejected() {
        let half = HermMatrix::identity(2).scale(0.5);
        let p = Povm::new(vec![half.clone(), half]).unwrap();
        let z = MeasurementSet::mubs(2, 1).unwrap().povm(0).clone();
        assert!(matches!(
            parent_pair_rank1(&p, &z),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn operator_inequality_examples() {
        let m = MeasurementSet::mubs(3, 2).unwrap();
        assert!(
            operator_inequality_check(m.povm(0), m.povm(1))
                .unwrap()
                .abs()
                < 1e-10
        );
        assert!(operator_inequality_check(m.povm(0), m.povm(0)).unwrap() >= -1e-12);
        let mut r = rng(11);
        for n in 2..=6 {
            for _ in 0..5 {
                let a = random_rank_one_povm(n, n + 1, &mut r).unwrap();
                let b = random_rank_one_povm(n, n + 2, &mut r).unwrap();
                assert!(operator_inequality_check(&a, &b).unwrap() >= -1e-10);
            }
        }
    }

    #[test]
    fn qubit_triplet_recursion() {
        let m = MeasurementSet::mubs(2, 3).unwrap();
        let p = parent_recursive(&m).unwrap();
        assert_eq!(p.terms.len(), 3);
        // h(2h + 1)/3 with h = h_pair(2); its ceiling is (53 − 36√2)/7
        assert!((p.averaged.eta_guarantee - 0.770_220).abs() < 1e-6);
        let ceiling = 1.0 / p.averaged.eta_guarantee - 1.0;
        assert!((ceiling - (53.0 - 36.0 * 2f64.sqrt()) / 7.0).abs() < 1e-12);
        assert!(p.verdict.passed, "{:?}", p.counterexample);
        for t in &p.terms {
            assert!(
                verify_parent_per_setting(t, &m, &t.eta_per_setting)
                    .unwrap()
                    .passed
            );
        }
    }

    #[test]
    fn four_mubs_in_dimension_five() {
        let m = MeasurementSet::mubs(5, 4).unwrap();
        let p = parent_recursive(&m).unwrap();
        assert_eq!(p.terms.len(), 1);
        assert!((p.averaged.eta_guarantee - h_pair(5).powi(2)).abs() < 1e-12);
        assert!(p.verdict.passed, "{:?}", p.counterexample);
    }

    #[test]
    fn two_settings_reduce_to_the_pairing() {
        let m = MeasurementSet::mubs(3, 2).unwrap();
        let p = parent_recursive(&m).unwrap();
        let g = parent_pair_rank1(m.povm(0), m.povm(1)).unwrap();
        assert_eq!(p.terms.len(), 1);
        for (x, y) in p.averaged.elements.iter().zip(&g.elements) {
            assert!(x.max_abs_diff(y) < 1e-12);
        }
    }

    #[test]
    fn random_sets_pass_at_their_guarantee() {
        let mut r = rng(5);
        for (k, n) in [(3, 2), (3, 3), (5, 2)] {
            let m = random_projective_measurements(n, k, &mut r).unwrap();
            let p = parent_recursive(&m).unwrap();
            assert!(p.verdict.passed, "k={k} n={n}: {:?}", p.counterexample);
        }
    }

    #[test]
    fn labels_round_trip() {
        let m = MeasurementSet::mubs(3, 3).unwrap();
        let p = parent_recursive(&m).unwrap().averaged;
        for j in 0..27 {
            assert_eq!(p.index(&p.label(j)), j);
        }
        assert!(p.to_json().unwrap().contains("eta_per_setting"));
    }
}
