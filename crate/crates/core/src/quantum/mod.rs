//! States, measurements and assemblages.
//!
//! Alice's measurement `x` with outcome `a` is the effect `A_{a|x}`; Bob is
//! left with the conditional states `σ_{a|x} = Tr_A[(A_{a|x} ⊗ 𝟙) ρ_AB]`.
//! Alice is always the first tensor factor.

pub mod galois;
pub mod mub;
pub mod random;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, kron, min_eig, partial_trace_first, CVector, HermMatrix, C64, PSD_TOL};

pub use mub::{mub_bases, Basis};

/// A positive operator-valued measure.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    dim: usize,
    outcomes: Vec<HermMatrix>,
}

#[derive(Serialize, Deserialize)]
struct PovmRepr {
    dim: usize,
    outcomes: Vec<HermMatrix>,
}

impl TryFrom<PovmRepr> for Povm {
    type Error = Error;
    fn try_from(r: PovmRepr) -> Result<Self> {
        let p = Povm::new(r.outcomes)?;
        if p.dim != r.dim {
            return Err(Error::Validation(format!(
                "declared dim {} but effects have dim {}",
                r.dim, p.dim
            )));
        }
        Ok(p)
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> Self {
        PovmRepr {
            dim: p.dim,
            outcomes: p.outcomes,
        }
    }
}

impl Povm {
    /// Validates positivity and completeness (both within `1e-8`).
    pub fn new(outcomes: Vec<HermMatrix>) -> Result<Self> {
        let dim = outcomes
            .first()
            .ok_or_else(|| Error::Validation("a POVM needs at least one outcome".into()))?
            .dim();
        if outcomes.iter().any(|e| e.dim() != dim) {
            return Err(Error::Shape("POVM effects of different dimensions".into()));
        }
        for (a, e) in outcomes.iter().enumerate() {
            let lo = min_eig(e);
            if lo < -PSD_TOL {
                return Err(Error::Validation(format!(
                    "effect {a} is not PSD (min eigenvalue {lo:e})"
                )));
            }
        }
        let dev = linalg::sum(dim, &outcomes).max_abs_diff(&HermMatrix::identity(dim));
        if dev > PSD_TOL {
            return Err(Error::Validation(format!(
                "effects sum to identity only within {dev:e}"
            )));
        }
        Ok(Self { dim, outcomes })
    }

    /// Rank-one projective measurement onto the columns of an orthonormal basis.
    pub fn from_basis(basis: &Basis) -> Result<Self> {
        if basis.nrows() != basis.ncols() {
            return Err(Error::Shape("basis matrix must be square".into()));
        }
        let dev = mub::orthonormality_violation(basis);
        if dev > PSD_TOL {
            return Err(Error::Validation(format!(
                "basis is not orthonormal (deviation {dev:e})"
            )));
        }
        let outcomes = basis
            .column_iter()
            .map(|c| HermMatrix::outer(&c.into_owned()))
            .collect();
        Self::new(outcomes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_outcomes(&self) -> usize {
        self.outcomes.len()
    }

    pub fn effects(&self) -> &[HermMatrix] {
        &self.outcomes
    }

    pub fn effect(&self, a: usize) -> &HermMatrix {
        &self.outcomes[a]
    }

    pub fn transpose(&self) -> Self {
        Self {
            dim: self.dim,
            outcomes: self.outcomes.iter().map(HermMatrix::transpose).collect(),
        }
    }

    /// True when every effect has numerical rank at most one.
    pub fn is_rank_one(&self) -> bool {
        self.outcomes
            .iter()
            .all(|e| linalg::numerical_rank(e, 1e-9) <= 1)
    }
}

/// `k` measurements with a common dimension and outcome count.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MeasurementSetRepr", into = "MeasurementSetRepr")]
pub struct MeasurementSet {
    povms: Vec<Povm>,
}

#[derive(Serialize, Deserialize)]
struct MeasurementSetRepr {
    k: usize,
    povms: Vec<Povm>,
}

impl TryFrom<MeasurementSetRepr> for MeasurementSet {
    type Error = Error;
    fn try_from(r: MeasurementSetRepr) -> Result<Self> {
        if r.k != r.povms.len() {
            return Err(Error::Validation(format!(
                "declared k={} but {} POVMs given",
                r.k,
                r.povms.len()
            )));
        }
        MeasurementSet::new(r.povms)
    }
}

impl From<MeasurementSet> for MeasurementSetRepr {
    fn from(m: MeasurementSet) -> Self {
        MeasurementSetRepr {
            k: m.povms.len(),
            povms: m.povms,
        }
    }
}

impl MeasurementSet {
    pub fn new(povms: Vec<Povm>) -> Result<Self> {
        let first = povms
            .first()
            .ok_or_else(|| Error::Validation("a measurement set needs at least one POVM".into()))?;
        let (dim, d) = (first.dim(), first.num_outcomes());
        if povms
            .iter()
            .any(|p| p.dim() != dim || p.num_outcomes() != d)
        {
            return Err(Error::Validation(
                "ragged measurement set: all POVMs need the same dimension and outcome count"
                    .into(),
            ));
        }
        Ok(Self { povms })
    }

    /// Projective measurements onto the first `k` MUBs in dimension `d`.
    pub fn mubs(d: usize, k: usize) -> Result<Self> {
        let povms = mub_bases(d, k)?
            .iter()
            .map(Povm::from_basis)
            .collect::<Result<Vec<_>>>()?;
        Self::new(povms)
    }

    /// Projective measurements onto the listed bases of the largest constructible MUB set.
    pub fn mub_subset(d: usize, subset: &[usize]) -> Result<Self> {
        let total = mub::max_mubs(d)
            .ok_or_else(|| Error::Capability(format!("no MUB construction for d={d}")))?;
        let mut seen = vec![false; total];
        for &i in subset {
            if i >= total || std::mem::replace(&mut seen[i], true) {
                return Err(Error::Validation(format!(
                    "invalid MUB subset {subset:?} for d={d} ({total} bases)"
                )));
            }
        }
        let all = mub_bases(d, total)?;
        Self::from_bases(&subset.iter().map(|&i| all[i].clone()).collect::<Vec<_>>())
    }

    pub fn from_bases(bases: &[Basis]) -> Result<Self> {
        Self::new(
            bases
                .iter()
                .map(Povm::from_basis)
                .collect::<Result<Vec<_>>>()?,
        )
    }

    /// Number of settings.
    pub fn k(&self) -> usize {
        self.povms.len()
    }

    /// Number of outcomes per setting.
    pub fn outcomes(&self) -> usize {
        self.povms[0].num_outcomes()
    }

    pub fn dim(&self) -> usize {
        self.povms[0].dim()
    }

    pub fn povms(&self) -> &[Povm] {
        &self.povms
    }

    pub fn povm(&self, x: usize) -> &Povm {
        &self.povms[x]
    }

    pub fn effect(&self, a: usize, x: usize) -> &HermMatrix {
        self.povms[x].effect(a)
    }

    /// Drops setting `x`.
    pub fn without(&self, x: usize) -> Result<Self> {
        let povms = self
            .povms
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != x)
            .map(|(_, p)| p.clone())
            .collect();
        Self::new(povms)
    }

    pub fn is_rank_one(&self) -> bool {
        self.povms.iter().all(Povm::is_rank_one)
    }
}

/// Element-wise transpose of every effect, `B_{a|x} = A_{a|x}ᵀ`.
pub fn transpose_measurements(m: &MeasurementSet) -> MeasurementSet {
    MeasurementSet {
        povms: m.povms.iter().map(Povm::transpose).collect(),
    }
}

/// A normalised bipartite density operator on `C^{dim_a} ⊗ C^{dim_b}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BipartiteRepr", into = "BipartiteRepr")]
pub struct BipartiteState {
    dim_a: usize,
    dim_b: usize,
    matrix: HermMatrix,
}

#[derive(Serialize, Deserialize)]
struct BipartiteRepr {
    dim_a: usize,
    dim_b: usize,
    matrix: HermMatrix,
}

impl TryFrom<BipartiteRepr> for BipartiteState {
    type Error = Error;
    fn try_from(r: BipartiteRepr) -> Result<Self> {
        BipartiteState::new(r.dim_a, r.dim_b, r.matrix)
    }
}

impl From<BipartiteState> for BipartiteRepr {
    fn from(s: BipartiteState) -> Self {
        BipartiteRepr {
            dim_a: s.dim_a,
            dim_b: s.dim_b,
            matrix: s.matrix,
        }
    }
}

impl BipartiteState {
    pub fn new(dim_a: usize, dim_b: usize, matrix: HermMatrix) -> Result<Self> {
        if matrix.dim() != dim_a * dim_b {
            return Err(Error::Shape(format!(
                "state of dimension {} is not {dim_a} x {dim_b}",
                matrix.dim()
            )));
        }
        let lo = min_eig(&matrix);
        if lo < -PSD_TOL {
            return Err(Error::Validation(format!(
                "state is not PSD (min eigenvalue {lo:e})"
            )));
        }
        let tr = matrix.trace();
        if (tr - 1.0).abs() > 1e-10 {
            return Err(Error::Validation(format!("state has trace {tr}")));
        }
        Ok(Self {
            dim_a,
            dim_b,
            matrix,
        })
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_b(&self) -> usize {
        self.dim_b
    }

    pub fn matrix(&self) -> &HermMatrix {
        &self.matrix
    }

    /// `ρ_B = Tr_A ρ_AB`.
    pub fn reduced_b(&self) -> HermMatrix {
        partial_trace_first(&self.matrix, self.dim_a, self.dim_b)
            .expect("dimensions checked at construction")
    }

    /// `|φ_d⟩ = Σ_i |ii⟩ / √d`.
    pub fn maximally_entangled(d: usize) -> Self {
        Self::isotropic(d, 1.0).expect("v = 1 is always valid")
    }

    pub fn product(rho_a: &HermMatrix, rho_b: &HermMatrix) -> Result<Self> {
        Self::new(rho_a.dim(), rho_b.dim(), kron(rho_a, rho_b))
    }

    /// `v |φ_d⟩⟨φ_d| + (1 - v) 𝟙/d²`, valid for `-1/(d²-1) ≤ v ≤ 1`.
    pub fn isotropic(d: usize, v: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::Domain("dimension must be positive".into()));
        }
        let lower = if d == 1 {
            f64::NEG_INFINITY
        } else {
            -1.0 / ((d * d - 1) as f64)
        };
        if !v.is_finite() || v > 1.0 + 1e-12 || v < lower - 1e-12 {
            return Err(Error::Domain(format!(
                "mixing parameter v={v} outside the PSD range [{lower}, 1] for d={d}"
            )));
        }
        let mut phi = CVector::zeros(d * d);
        for i in 0..d {
            phi[i * d + i] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let pure = HermMatrix::outer(&phi);
        let noise = HermMatrix::identity(d * d).scale(1.0 / (d * d) as f64);
        let m = &pure.scale(v) + &noise.scale(1.0 - v);
        Self::new(d, d, m)
    }
}

/// Bob's conditional states `σ_{a|x}`, indexed `[x][a]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AssemblageRepr", into = "AssemblageRepr")]
pub struct Assemblage {
    states: Vec<Vec<HermMatrix>>,
    reduced_state: HermMatrix,
}

#[derive(Serialize, Deserialize)]
struct AssemblageRepr {
    k: usize,
    d: usize,
    states: Vec<Vec<HermMatrix>>,
    reduced_state: HermMatrix,
}

impl TryFrom<AssemblageRepr> for Assemblage {
    type Error = Error;
    fn try_from(r: AssemblageRepr) -> Result<Self> {
        if r.states.len() != r.k || r.states.iter().any(|s| s.len() != r.d) {
            return Err(Error::Validation(
                "assemblage shape does not match (k, d)".into(),
            ));
        }
        let a = Assemblage::new(r.states)?;
        let dev = a.reduced_state.max_abs_diff(&r.reduced_state);
        if dev > PSD_TOL {
            return Err(Error::Validation(format!(
                "declared reduced state off by {dev:e}"
            )));
        }
        Ok(a)
    }
}

impl From<Assemblage> for AssemblageRepr {
    fn from(a: Assemblage) -> Self {
        AssemblageRepr {
            k: a.k(),
            d: a.outcomes(),
            states: a.states,
            reduced_state: a.reduced_state,
        }
    }
}

impl Assemblage {
    /// Validates positivity, no-signalling and normalisation (within `1e-8`).
    pub fn new(states: Vec<Vec<HermMatrix>>) -> Result<Self> {
        let first = states
            .first()
            .and_then(|s| s.first())
            .ok_or_else(|| Error::Validation("empty assemblage".into()))?;
        let dim = first.dim();
        let d = states[0].len();
        if states
            .iter()
            .any(|s| s.len() != d || s.iter().any(|m| m.dim() != dim))
        {
            return Err(Error::Validation("ragged assemblage".into()));
        }
        for (x, row) in states.iter().enumerate() {
            for (a, s) in row.iter().enumerate() {
                let lo = min_eig(s);
                if lo < -PSD_TOL {
                    return Err(Error::Validation(format!(
                        "σ(a={a}|x={x}) is not PSD (min eigenvalue {lo:e})"
                    )));
                }
            }
        }
        let reduced_state = linalg::sum(dim, &states[0]);
        for (x, row) in states.iter().enumerate().skip(1) {
            let dev = linalg::sum(dim, row).max_abs_diff(&reduced_state);
            if dev > PSD_TOL {
                return Err(Error::Validation(format!(
                    "no-signalling violated at setting {x} (deviation {dev:e})"
                )));
            }
        }
        let tr = reduced_state.trace();
        if (tr - 1.0).abs() > PSD_TOL {
            return Err(Error::Validation(format!("reduced state has trace {tr}")));
        }
        Ok(Self {
            states,
            reduced_state,
        })
    }

    pub fn k(&self) -> usize {
        self.states.len()
    }

    pub fn outcomes(&self) -> usize {
        self.states[0].len()
    }

    /// Dimension of Bob's system.
    pub fn dim(&self) -> usize {
        self.reduced_state.dim()
    }

    pub fn state(&self, a: usize, x: usize) -> &HermMatrix {
        &self.states[x][a]
    }

    pub fn states(&self) -> &[Vec<HermMatrix>] {
        &self.states
    }

    pub fn reduced_state(&self) -> &HermMatrix {
        &self.reduced_state
    }

    /// Keeps only the settings listed in `settings`.
    pub fn restrict(&self, settings: &[usize]) -> Result<Self> {
        let states = settings
            .iter()
            .map(|&x| {
                self.states
                    .get(x)
                    .cloned()
                    .ok_or_else(|| Error::Validation(format!("setting {x} out of range")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(states)
    }
}

/// `σ_{a|x} = Tr_A[(A_{a|x} ⊗ 𝟙_B) ρ_AB]`.
pub fn make_assemblage(
    state: &BipartiteState,
    measurements: &MeasurementSet,
) -> Result<Assemblage> {
    if measurements.dim() != state.dim_a() {
        return Err(Error::Shape(format!(
            "measurements act on dimension {} but Alice's system has dimension {}",
            measurements.dim(),
            state.dim_a()
        )));
    }
    let id_b = HermMatrix::identity(state.dim_b());
    let states = measurements
        .povms()
        .iter()
        .map(|p| {
            p.effects()
                .iter()
                .map(|e| {
                    let op = kron(e, &id_b);
                    let prod = HermMatrix::from_hermitian_unchecked(
                        // (A ⊗ 𝟙) ρ is not Hermitian, but its partial trace is
                        (op.matrix() * state.matrix().matrix()
                            + state.matrix().matrix() * op.matrix())
                            * C64::new(0.5, 0.0),
                    );
                    partial_trace_first(&prod, state.dim_a(), state.dim_b())
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Assemblage::new(states)
}
