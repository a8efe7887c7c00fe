//! Universal lower bounds on `H^g_{k,n}`, the smallest generalised
//! incompatibility robustness `η^g` of `k` measurements in dimension `n`,
//! and the steering-robustness ceilings `1/H − 1` they imply for
//! assemblages prepared from states of Schmidt number at most `n`.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

/// Which formula produced a bound.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSource {
    PairExact,
    QubitTripletExact,
    Recursive,
    Cloning,
}

impl BoundSource {
    /// Tie-breaking rank: lower wins.
    fn priority(self) -> u8 {
        match self {
            BoundSource::PairExact => 0,
            BoundSource::QubitTripletExact => 1,
            BoundSource::Recursive => 2,
            BoundSource::Cloning => 3,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            BoundSource::PairExact => "pair_exact",
            BoundSource::QubitTripletExact => "qubit_triplet_exact",
            BoundSource::Recursive => "recursive",
            BoundSource::Cloning => "cloning",
        }
    }

    /// Everything except the cloning bound improves on the generic construction.
    pub fn is_improvement(self) -> bool {
        self != BoundSource::Cloning
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BoundValue {
    pub k: usize,
    pub n: usize,
    pub eta_lower: f64,
    pub source: BoundSource,
    pub sr_ceiling: f64,
}

impl BoundValue {
    fn new(k: usize, n: usize, eta_lower: f64, source: BoundSource) -> Self {
        Self {
            k,
            n,
            eta_lower,
            source,
            sr_ceiling: 1.0 / eta_lower - 1.0,
        }
    }

    /// Four-decimal rendering with trailing zeros dropped (`0.6`, `1`, `1.25`).
    pub fn render(&self) -> String {
        render4(self.sr_ceiling)
    }
}

pub fn render4(v: f64) -> String {
    let s = format!("{:.4}", v);
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// `½(1 + 1/√n)`, exact for two measurements.
pub fn h_pair(n: usize) -> f64 {
    0.5 * (1.0 + 1.0 / (n as f64).sqrt())
}

/// Optimal asymmetric cloning bound `(1/k)(1 + 2(k − 1)/(n + 1))`.
pub fn h_cloning(k: usize, n: usize) -> f64 {
    let (kf, nf) = (k as f64, n as f64);
    (1.0 + 2.0 * (kf - 1.0) / (nf + 1.0)) / kf
}

/// `h^r [1 − 2(1 − h)(1 − 2^r/k)]` with `h = h_pair(n)` and `r = ⌊log₂ k⌋`.
pub fn h_recursive(k: usize, n: usize) -> f64 {
    assert!(k >= 1, "k must be positive");
    let r = usize::BITS - 1 - k.leading_zeros();
    let h = h_pair(n);
    let pow2 = (1usize << r) as f64;
    h.powi(r as i32) * (1.0 - 2.0 * (1.0 - h) * (1.0 - pow2 / k as f64))
}

/// Exact value for three qubit measurements, `(1 + 1/√3)/2`.
pub fn h_qubit_triplet() -> f64 {
    0.5 * (1.0 + 1.0 / 3f64.sqrt())
}

pub fn h_best(k: usize, n: usize) -> Result<BoundValue> {
    if k < 2 || n < 1 {
        return Err(Error::Domain(format!(
            "h_best needs k >= 2 and n >= 1, got k={k}, n={n}"
        )));
    }
    let mut candidates = vec![
        (h_recursive(k, n), BoundSource::Recursive),
        (h_cloning(k, n), BoundSource::Cloning),
    ];
    if k == 2 {
        candidates.push((h_pair(n), BoundSource::PairExact));
    }
    if (k, n) == (3, 2) {
        candidates.push((h_qubit_triplet(), BoundSource::QubitTripletExact));
    }
    let (eta, source) = candidates
        .into_iter()
        .reduce(|best, c| {
            let better = c.0 > best.0 + 1e-12;
            let tie = (c.0 - best.0).abs() <= 1e-12;
            if better || (tie && c.1.priority() < best.1.priority()) {
                c
            } else {
                best
            }
        })
        .expect("at least two candidates");
    Ok(BoundValue::new(k, n, eta, source))
}

/// `h_best(k, n)` for `2 ≤ k ≤ k_max`, `1 ≤ n ≤ n_max`, row-major in `k`.
pub fn table1(k_max: usize, n_max: usize) -> Result<Vec<Vec<BoundValue>>> {
    if k_max > 32 || n_max > 32 {
        return Err(Error::Domain(format!(
            "table limited to k, n <= 32, got {k_max} x {n_max}"
        )));
    }
    (2..=k_max)
        .map(|k| (1..=n_max).map(|n| h_best(k, n)).collect())
        .collect()
}

/// Largest `k` with `h_recursive(k, n) > h_cloning(k, n)`.
pub fn crossover_k(n: usize) -> Result<usize> {
    if n < 2 {
        return Err(Error::Domain(format!("crossover needs n >= 2, got {n}")));
    }
    // the recursive bound decays like h^{log k}, the cloning bound like 2/(n+1)
    let limit = 64 * (n + 1);
    (2..=limit)
        .rev()
        .find(|&k| h_recursive(k, n) > h_cloning(k, n))
        .ok_or_else(|| Error::Consistency(format!("no crossover found for n={n}")))
}

/// CSV with columns `d, k, n, value, method, source, residual`; `d` is empty.
pub fn write_table1_csv<W: Write>(grid: &[Vec<BoundValue>], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["d", "k", "n", "value", "method", "source", "residual"])?;
    for b in grid.iter().flatten() {
        w.write_record([
            String::new(),
            b.k.to_string(),
            b.n.to_string(),
            format!("{:.10}", b.sr_ceiling),
            "closed_form".to_string(),
            b.source.as_str().to_string(),
            String::new(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_examples() {
        assert_eq!(h_pair(1), 1.0);
        assert!((h_pair(2) - 0.853_553_390_593_273_7).abs() < 1e-15);
        assert_eq!(render4(1.0 / h_pair(2) - 1.0), "0.1716");
        assert!((h_pair(4) - 0.75).abs() < 1e-15);
        assert!((1.0 / h_pair(4) - 1.0 - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn cloning_examples() {
        assert_eq!(h_cloning(1, 7), 1.0);
        assert!((h_cloning(5, 2) - 11.0 / 15.0).abs() < 1e-15);
        assert_eq!(render4(1.0 / h_cloning(5, 2) - 1.0), "0.3636");
        assert_eq!(render4(1.0 / h_cloning(8, 3) - 1.0), "0.7778");
    }

    #[test]
    fn recursive_examples() {
        for n in 1..10 {
            assert!((h_recursive(2, n) - h_pair(n)).abs() < 1e-15);
            let h = h_pair(n);
            assert!((h_recursive(3, n) - h * (2.0 * h + 1.0) / 3.0).abs() < 1e-15);
        }
        assert!((h_recursive(3, 3) - 0.677_57).abs() < 1e-5);
        assert_eq!(render4(1.0 / h_recursive(3, 3) - 1.0), "0.4759");
        assert!((h_recursive(4, 4) - 0.5625).abs() < 1e-15);
        assert_eq!(render4(1.0 / h_recursive(4, 4) - 1.0), "0.7778");
    }

    #[test]
    fn powers_of_two_reduce_to_pair_powers() {
        for r in 1..5u32 {
            for n in 1..=100 {
                let k = 1usize << r;
                assert!((h_recursive(k, n) - h_pair(n).powi(r as i32)).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn best_examples() {
        let b = h_best(3, 2).unwrap();
        assert_eq!(b.source, BoundSource::QubitTripletExact);
        assert!((b.eta_lower - 0.788_675).abs() < 1e-6);
        assert_eq!(b.render(), "0.2679");
        let b = h_best(5, 2).unwrap();
        assert_eq!(b.source, BoundSource::Cloning);
        assert_eq!(b.render(), "0.3636");
        let b = h_best(5, 6).unwrap();
        assert_eq!(b.source, BoundSource::Recursive);
        assert_eq!(b.render(), "1.2877");
        assert_eq!(h_best(6, 6).unwrap().source, BoundSource::Cloning);
        assert_eq!(h_best(2, 5).unwrap().source, BoundSource::PairExact);
    }

    #[test]
    fn ceiling_matches_eta() {
        for k in 2..=32 {
            for n in 1..=100 {
                let b = h_best(k, n).unwrap();
                assert!((b.sr_ceiling - (1.0 / b.eta_lower - 1.0)).abs() < 1e-12);
                assert!(b.eta_lower > 0.0 && b.eta_lower <= 1.0);
                assert!(h_cloning(k, n) > 0.0 && h_cloning(k, n) <= 1.0 + 1e-15);
                assert!(h_recursive(k, n) > 0.0 && h_recursive(k, n) <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn best_is_monotone() {
        for k in 2..=32 {
            for n in 1..=100 {
                let b = h_best(k, n).unwrap().eta_lower;
                if n < 100 {
                    assert!(
                        h_best(k, n + 1).unwrap().eta_lower <= b + 1e-15,
                        "n step at k={k} n={n}"
                    );
                }
                if k < 32 {
                    assert!(
                        h_best(k + 1, n).unwrap().eta_lower <= b + 1e-15,
                        "k step at k={k} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn table_rows_and_columns() {
        let t = table1(8, 6).unwrap();
        assert_eq!(t.len(), 7);
        for b in &t[0] {
            let s = (b.n as f64).sqrt();
            assert!((b.sr_ceiling - (s - 1.0) / (s + 1.0)).abs() < 1e-12);
        }
        for row in &t {
            assert!(row[0].sr_ceiling.abs() < 1e-15);
        }
        assert!(table1(33, 2).is_err());
    }

    #[test]
    fn crossover_examples() {
        assert_eq!(crossover_k(100).unwrap(), 31);
        assert_eq!(crossover_k(6).unwrap(), 5);
        // direct comparison of the two formulas
        assert_eq!(crossover_k(2).unwrap(), 2);
        assert!(h_recursive(3, 2) < h_cloning(3, 2));
    }

    #[test]
    fn rendering() {
        assert_eq!(render4(0.6), "0.6");
        assert_eq!(render4(1.0), "1");
        assert_eq!(render4(1.25), "1.25");
        assert_eq!(render4(0.171_572_875), "0.1716");
        assert_eq!(render4(0.0), "0");
    }

    #[test]
    fn csv_output() {
        let mut buf = Vec::new();
        write_table1_csv(&table1(3, 2).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,k,n,value,method,source,residual"));
        assert!(text.contains(",3,2,0.2679491924,closed_form,qubit_triplet_exact,"));
    }
}
