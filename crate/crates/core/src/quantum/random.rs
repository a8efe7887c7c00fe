//! Seeded random states and measurements.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{Basis, BipartiteState, MeasurementSet, Povm};
use crate::error::Result;
use crate::linalg::{CMatrix, CVector, HermMatrix, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn gaussian(rng: &mut impl Rng) -> C64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix.
pub fn haar_unitary(d: usize, rng: &mut impl Rng) -> CMatrix {
    let g = CMatrix::from_fn(d, d, |_, _| gaussian(rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    // absorb the phases of diag(R) so the distribution is exactly Haar
    for j in 0..d {
        let rj = r[(j, j)];
        if rj.norm() > 0.0 {
            let phase = rj / rj.norm();
            for i in 0..d {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

/// `k` independent Haar-random orthonormal bases.
pub fn random_bases(d: usize, k: usize, rng: &mut impl Rng) -> Vec<Basis> {
    (0..k).map(|_| haar_unitary(d, rng)).collect()
}

pub fn random_projective_measurements(
    d: usize,
    k: usize,
    rng: &mut impl Rng,
) -> Result<MeasurementSet> {
    MeasurementSet::from_bases(&random_bases(d, k, rng))
}

/// Rank-one POVM with `n` outcomes, `n ≥ d`, from a random isometry `C^d → C^n`.
pub fn random_rank_one_povm(d: usize, n: usize, rng: &mut impl Rng) -> Result<Povm> {
    let u = haar_unitary(n.max(d), rng);
    let iso = u.columns(0, d).into_owned();
    let effects = (0..n)
        .map(|a| {
            let v: CVector = iso.row(a).adjoint();
            HermMatrix::outer(&v)
        })
        .collect();
    Povm::new(effects)
}

/// Random pure state on `C^d` as a density matrix.
pub fn random_pure_state(d: usize, rng: &mut impl Rng) -> HermMatrix {
    let v = CVector::from_fn(d, |_, _| gaussian(rng));
    let n = v.norm();
    HermMatrix::outer(&(v / C64::new(n, 0.0)))
}

/// Random mixed bipartite state `G G† / Tr` with a `d_a d_b × r` Ginibre factor.
pub fn random_bipartite_state(
    dim_a: usize,
    dim_b: usize,
    rank: usize,
    rng: &mut impl Rng,
) -> Result<BipartiteState> {
    let n = dim_a * dim_b;
    let g = CMatrix::from_fn(n, rank.max(1), |_, _| gaussian(rng));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    let rho = HermMatrix::new(m / C64::new(tr, 0.0))?;
    BipartiteState::new(dim_a, dim_b, rho)
}
