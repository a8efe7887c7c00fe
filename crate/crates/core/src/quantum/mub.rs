//! Mutually unbiased bases.
//!
//! * odd prime powers `q`: `|e^r_s⟩ = q^{-1/2} Σ_x ω_p^{tr(r x² + s x)} |x⟩`, one basis per `r ∈ GF(q)`;
//! * powers of two: common eigenbases of the `q + 1` maximal commuting classes
//!   of Pauli strings `X(a) Z(M_r a)`, where `M_r` is the Gram matrix of the
//!   trace form `(a, b) ↦ tr(r a b)` on GF(2^m);
//! * `d = 6`: products of the first three bases in dimensions 2 and 3.
//!
//! The computational basis always comes first; subsets are prefixes.

use nalgebra::SymmetricEigen;

use super::galois::{prime_power, GaloisField};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};

/// An orthonormal basis stored as the columns of a unitary matrix.
pub type Basis = CMatrix;

/// Largest number of MUBs this crate constructs in dimension `d`.
pub fn max_mubs(d: usize) -> Option<usize> {
    if d == 6 {
        return Some(3);
    }
    match prime_power(d) {
        Some(_) if d <= 1024 => Some(d + 1),
        _ => None,
    }
}

/// The first `k` bases of the construction in dimension `d`.
pub fn mub_bases(d: usize, k: usize) -> Result<Vec<Basis>> {
    if k == 0 {
        return Err(Error::Domain("at least one basis must be requested".into()));
    }
    if d == 1 {
        return if k == 1 {
            Ok(vec![CMatrix::identity(1, 1)])
        } else {
            Err(Error::Capability("only 1 basis exists for d=1".into()))
        };
    }
    let limit = max_mubs(d)
        .ok_or_else(|| Error::Capability(format!("no MUB construction available for d={d}")))?;
    if k > limit {
        return Err(Error::Capability(format!(
            "only {limit} MUBs constructible for d={d}, requested {k}"
        )));
    }
    let mut bases = if d == 6 {
        product_bases(d)?
    } else {
        let (p, _) = prime_power(d).expect("checked by max_mubs");
        let field = GaloisField::new(d)?;
        if p == 2 {
            even_bases(&field)
        } else {
            odd_bases(&field)
        }
    };
    bases.truncate(k);
    Ok(bases)
}

fn odd_bases(f: &GaloisField) -> Vec<Basis> {
    let q = f.order();
    let p = f.characteristic();
    let norm = 1.0 / (q as f64).sqrt();
    let omega = |t: usize| C64::from_polar(norm, 2.0 * std::f64::consts::PI * t as f64 / p as f64);
    let mut out = vec![CMatrix::identity(q, q)];
    for r in 0..q {
        out.push(CMatrix::from_fn(q, q, |x, s| {
            let phase = f.add(f.mul(r, f.mul(x, x)), f.mul(s, x));
            omega(f.trace(phase))
        }));
    }
    out
}

fn even_bases(f: &GaloisField) -> Vec<Basis> {
    let q = f.order();
    let m = f.degree();
    let mut out = vec![CMatrix::identity(q, q)];
    for r in 0..q {
        // generator i: X(e_i) Z(M_r e_i)
        let generators: Vec<CMatrix> = (0..m)
            .map(|i| {
                let x_bits: Vec<bool> = (0..m).map(|j| j == i).collect();
                let z_bits: Vec<bool> = (0..m)
                    .map(|j| {
                        let prod = f.mul(r, f.mul(f.basis_element(i), f.basis_element(j)));
                        f.trace(prod) == 1
                    })
                    .collect();
                hermitian_pauli(&x_bits, &z_bits)
            })
            .collect();
        // the weighted sum separates all 2^m joint sign patterns
        let mut w = CMatrix::zeros(q, q);
        for (i, g) in generators.iter().enumerate() {
            w += g * C64::new((1u64 << i) as f64, 0.0);
        }
        out.push(sorted_eigenbasis(w));
    }
    out
}

/// `i^c · ⊗_j X^{x_j} Z^{z_j}` where `c` counts the factors carrying both bits; Hermitian.
fn hermitian_pauli(x_bits: &[bool], z_bits: &[bool]) -> CMatrix {
    let x = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(0., 0.),
            C64::new(1., 0.),
            C64::new(1., 0.),
            C64::new(0., 0.),
        ],
    );
    let z = CMatrix::from_row_slice(
        2,
        2,
        &[
            C64::new(1., 0.),
            C64::new(0., 0.),
            C64::new(0., 0.),
            C64::new(-1., 0.),
        ],
    );
    let mut acc = CMatrix::identity(1, 1);
    let mut both = 0;
    for (&xb, &zb) in x_bits.iter().zip(z_bits) {
        let mut factor = CMatrix::identity(2, 2);
        if xb {
            factor = &factor * &x;
        }
        if zb {
            factor = &factor * &z;
        }
        if xb && zb {
            both += 1;
        }
        acc = acc.kronecker(&factor);
    }
    let phase = [
        C64::new(1., 0.),
        C64::new(0., 1.),
        C64::new(-1., 0.),
        C64::new(0., -1.),
    ][both % 4];
    acc * phase
}

fn sorted_eigenbasis(w: CMatrix) -> Basis {
    let n = w.nrows();
    let eig = SymmetricEigen::new(w);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let mut out = CMatrix::zeros(n, n);
    for (c, &src) in order.iter().enumerate() {
        let mut v: CVector = eig.eigenvectors.column(src).into_owned();
        // fix the phase: first significant component real and positive
        if let Some(lead) = v.iter().find(|z| z.norm() > 1e-8).copied() {
            let rot = lead.conj() / lead.norm();
            v *= rot;
        }
        out.set_column(c, &v);
    }
    out
}

fn product_bases(d: usize) -> Result<Vec<Basis>> {
    debug_assert_eq!(d, 6);
    let two = mub_bases(2, 3)?;
    let three = mub_bases(3, 3)?;
    Ok(two
        .iter()
        .zip(&three)
        .map(|(a, b)| a.kronecker(b))
        .collect())
}

/// Largest deviation of `|⟨φ_i|ψ_j⟩|` from `1/√d` over all pairs of distinct bases.
pub fn max_unbiasedness_violation(bases: &[Basis]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, a) in bases.iter().enumerate() {
        let target = 1.0 / (a.nrows() as f64).sqrt();
        for b in &bases[i + 1..] {
            let overlaps = a.adjoint() * b;
            for z in overlaps.iter() {
                worst = worst.max((z.norm() - target).abs());
            }
        }
    }
    worst
}

/// Largest deviation of `B†B` from the identity.
pub fn orthonormality_violation(basis: &Basis) -> f64 {
    let g = basis.adjoint() * basis - CMatrix::identity(basis.ncols(), basis.ncols());
    g.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn qubit_mubs_are_z_x_y() {
        let b = mub_bases(2, 3).unwrap();
        assert_eq!(b[0], CMatrix::identity(2, 2));
        let h = std::f64::consts::FRAC_1_SQRT_2;
        // X eigenbasis: each vector has equal-magnitude real components
        for c in 0..2 {
            let v = b[1].column(c);
            assert!((v[0].im).abs() < 1e-12 && (v[1].im).abs() < 1e-12);
            assert!((v[0].norm() - h).abs() < 1e-12);
        }
        // Y eigenbasis: relative phase ±i
        for c in 0..2 {
            let v = b[2].column(c);
            let ratio = v[1] / v[0];
            assert!(ratio.re.abs() < 1e-12 && (ratio.im.abs() - 1.0).abs() < 1e-12);
        }
        assert!(max_unbiasedness_violation(&b) < 1e-12);
    }

    #[test]
    fn qutrit_complete_set_is_unbiased() {
        // direct overlap check over all 6 basis pairs
        let b = mub_bases(3, 4).unwrap();
        assert_eq!(b.len(), 4);
        for (i, x) in b.iter().enumerate() {
            for y in &b[i + 1..] {
                for z in (x.adjoint() * y).iter() {
                    assert!((z.norm() - 1.0 / 3f64.sqrt()).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn every_supported_dimension_gives_unbiased_orthonormal_bases() {
        for d in [2, 3, 4, 5, 7, 8, 9] {
            let b = mub_bases(d, d + 1).unwrap();
            assert_eq!(b.len(), d + 1);
            for basis in &b {
                assert!(orthonormality_violation(basis) < 1e-10, "d={d}");
            }
            assert!(max_unbiasedness_violation(&b) < 1e-10, "d={d}");
        }
        let six = mub_bases(6, 3).unwrap();
        assert!(max_unbiasedness_violation(&six) < 1e-10);
    }

    #[test]
    fn unsupported_requests_name_the_limit() {
        match mub_bases(6, 4) {
            Err(Error::Capability(msg)) => {
                assert!(msg.contains("only 3 MUBs constructible for d=6"))
            }
            other => panic!("expected capability error, got {other:?}"),
        }
        assert!(matches!(mub_bases(3, 5), Err(Error::Capability(_))));
        assert!(matches!(mub_bases(10, 2), Err(Error::Capability(_))));
        assert!(matches!(mub_bases(3, 0), Err(Error::Domain(_))));
    }

    #[test]
    fn subsets_are_prefixes_and_deterministic() {
        let full = mub_bases(5, 6).unwrap();
        let part = mub_bases(5, 3).unwrap();
        assert_eq!(&full[..3], &part[..]);
        assert_eq!(mub_bases(8, 9).unwrap(), mub_bases(8, 9).unwrap());
    }
}
