//! Finite fields GF(p^m) with full addition/multiplication tables.
//!
//! Elements are integers in `0..q` whose base-`p` digits are the polynomial
//! coefficients (lowest degree first) modulo a monic irreducible polynomial.

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct GaloisField {
    p: usize,
    m: usize,
    q: usize,
    /// Coefficients `c_0..c_{m-1}` of the modulus `x^m + Σ c_i x^i`.
    modulus: Vec<usize>,
    add: Vec<usize>,
    mul: Vec<usize>,
    trace: Vec<usize>,
}

/// Returns `(p, m)` with `q = p^m` when `q` is a prime power.
pub fn prime_power(q: usize) -> Option<(usize, usize)> {
    if q < 2 {
        return None;
    }
    let p = (2..=q).find(|f| q.is_multiple_of(*f))?;
    let mut rest = q;
    let mut m = 0;
    while rest.is_multiple_of(p) {
        rest /= p;
        m += 1;
    }
    (rest == 1).then_some((p, m))
}

impl GaloisField {
    /// Field of order `q`, using the lexicographically smallest monic irreducible modulus.
    pub fn new(q: usize) -> Result<Self> {
        let (p, m) =
            prime_power(q).ok_or_else(|| Error::Capability(format!("{q} is not a prime power")))?;
        if q > 1024 {
            return Err(Error::Capability(format!(
                "field tables limited to q <= 1024, got {q}"
            )));
        }
        if m == 1 {
            return Ok(Self::with_modulus(p, 1, vec![0]).with_trace());
        }
        for code in 0..q {
            let modulus = digits(code, p, m);
            if modulus[0] == 0 {
                continue; // divisible by x
            }
            let field = Self::with_modulus(p, m, modulus);
            if field.is_field() {
                return Ok(field.with_trace());
            }
        }
        Err(Error::Consistency(format!(
            "no irreducible polynomial of degree {m} over GF({p})"
        )))
    }

    fn with_modulus(p: usize, m: usize, modulus: Vec<usize>) -> Self {
        let q = p.pow(m as u32);
        let mut add = vec![0; q * q];
        let mut mul = vec![0; q * q];
        for a in 0..q {
            let da = digits(a, p, m);
            for b in 0..q {
                let db = digits(b, p, m);
                let sum: Vec<usize> = da.iter().zip(&db).map(|(x, y)| (x + y) % p).collect();
                add[a * q + b] = undigits(&sum, p);
                mul[a * q + b] = undigits(&poly_mulmod(&da, &db, &modulus, p), p);
            }
        }
        Self {
            p,
            m,
            q,
            modulus,
            add,
            mul,
            trace: Vec::new(),
        }
    }

    fn with_trace(mut self) -> Self {
        self.trace = (0..self.q).map(|x| self.compute_trace(x)).collect();
        self
    }

    fn is_field(&self) -> bool {
        (1..self.q).all(|a| (1..self.q).any(|b| self.mul(a, b) == 1))
    }

    fn compute_trace(&self, x: usize) -> usize {
        // tr(x) = x + x^p + ... + x^{p^{m-1}}, an element of the prime subfield
        let mut acc = 0;
        let mut pow = x;
        for _ in 0..self.m {
            acc = self.add(acc, pow);
            pow = self.pow(pow, self.p);
        }
        debug_assert!(acc < self.p, "trace left the prime subfield");
        acc
    }

    pub fn order(&self) -> usize {
        self.q
    }

    pub fn characteristic(&self) -> usize {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.m
    }

    pub fn modulus(&self) -> &[usize] {
        &self.modulus
    }

    pub fn add(&self, a: usize, b: usize) -> usize {
        self.add[a * self.q + b]
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.q + b]
    }

    pub fn pow(&self, a: usize, mut e: usize) -> usize {
        let mut base = a;
        let mut acc = 1;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Absolute trace to GF(p), returned as an integer in `0..p`.
    pub fn trace(&self, a: usize) -> usize {
        self.trace[a]
    }

    /// The element `x^i` of the polynomial basis.
    pub fn basis_element(&self, i: usize) -> usize {
        self.p.pow(i as u32)
    }
}

fn digits(mut x: usize, p: usize, m: usize) -> Vec<usize> {
    let mut out = vec![0; m];
    for d in out.iter_mut() {
        *d = x % p;
        x /= p;
    }
    out
}

fn undigits(d: &[usize], p: usize) -> usize {
    d.iter().rev().fold(0, |acc, &c| acc * p + c)
}

fn poly_mulmod(a: &[usize], b: &[usize], modulus: &[usize], p: usize) -> Vec<usize> {
    let m = modulus.len();
    let mut prod = vec![0; 2 * m - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            prod[i + j] = (prod[i + j] + x * y) % p;
        }
    }
    // x^m = -Σ c_i x^i
    for deg in (m..prod.len()).rev() {
        let c = prod[deg];
        if c == 0 {
            continue;
        }
        prod[deg] = 0;
        for (i, &mc) in modulus.iter().enumerate() {
            let idx = deg - m + i;
            prod[idx] = (prod[idx] + (p - (c * mc) % p)) % p;
        }
    }
    prod.truncate(m);
    prod
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prime_power_detection() {
        assert_eq!(prime_power(9), Some((3, 2)));
        assert_eq!(prime_power(8), Some((2, 3)));
        assert_eq!(prime_power(7), Some((7, 1)));
        assert_eq!(prime_power(6), None);
        assert_eq!(prime_power(1), None);
    }

    #[test]
    fn standard_moduli_are_chosen() {
        // x^2 + x + 1, x^3 + x + 1, x^2 + 1
        assert_eq!(GaloisField::new(4).unwrap().modulus(), &[1, 1]);
        assert_eq!(GaloisField::new(8).unwrap().modulus(), &[1, 1, 0]);
        assert_eq!(GaloisField::new(9).unwrap().modulus(), &[1, 0]);
    }

    #[test]
    fn field_axioms_hold() {
        for q in [2, 3, 4, 5, 7, 8, 9, 16, 25, 27] {
            let f = GaloisField::new(q).unwrap();
            for a in 0..q {
                assert_eq!(f.add(a, 0), a);
                assert_eq!(f.mul(a, 1), a);
                for b in 0..q {
                    assert_eq!(f.mul(a, b), f.mul(b, a));
                    for c in 0..q {
                        let lhs = f.mul(a, f.add(b, c));
                        let rhs = f.add(f.mul(a, b), f.mul(a, c));
                        assert_eq!(lhs, rhs);
                    }
                }
            }
            assert!(f.is_field(), "GF({q}) has a zero divisor");
        }
    }

    #[test]
    fn trace_is_additive_and_onto() {
        for q in [4, 8, 9, 27] {
            let f = GaloisField::new(q).unwrap();
            for a in 0..q {
                for b in 0..q {
                    let t = (f.trace(a) + f.trace(b)) % f.characteristic();
                    assert_eq!(f.trace(f.add(a, b)), t);
                }
            }
            // each value of GF(p) is hit q/p times
            for t in 0..f.characteristic() {
                let hits = (0..q).filter(|&a| f.trace(a) == t).count();
                assert_eq!(hits, q / f.characteristic());
            }
        }
    }
}
