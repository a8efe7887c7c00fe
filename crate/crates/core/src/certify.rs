//! Schmidt-number certificates from steering robustness, the coincidence
//! estimator for SR, and noise thresholds for isotropic states.

use serde::Serialize;

use crate::bounds::{h_best, BoundSource};
use crate::error::{Error, Result};
use crate::linalg::kron;
use crate::quantum::{make_assemblage, BipartiteState, MeasurementSet};
use crate::sdp::steering::{lhs_bound, steering_robustness_with};
use crate::sdp::{enumerate_strategies, SdpConfig};

/// Largest Schmidt number a certificate will search up to.
pub const MAX_CERTIFIED_N: usize = 1 << 24;

/// Per-`n` entries kept in a certificate's trace.
pub const TRACE_LIMIT: usize = 256;

fn check_sr(sr: f64) -> Result<()> {
    if !sr.is_finite() || sr < 0.0 {
        return Err(Error::Domain(format!(
            "steering robustness must be finite and non-negative, got {sr}"
        )));
    }
    Ok(())
}

/// `n ≥ ((1 + SR)/(1 − SR))²` for two measurements.
pub fn witness_pairs(sr: f64) -> Result<f64> {
    check_sr(sr)?;
    if sr >= 1.0 {
        return Err(Error::Domain(format!(
            "pair witness needs SR < 1, got {sr}"
        )));
    }
    Ok(((1.0 + sr) / (1.0 - sr)).powi(2))
}

/// `n ≥ 1 + 2k·SR/(k − SR − 1)` from the cloning bound.
pub fn witness_cloning(sr: f64, k: usize) -> Result<f64> {
    check_sr(sr)?;
    let kf = k as f64;
    if k < 1 || sr >= kf - 1.0 {
        return Err(Error::Domain(format!(
            "cloning witness needs SR < k − 1 = {}, got {sr}",
            kf - 1.0
        )));
    }
    Ok(1.0 + 2.0 * kf * sr / (kf - sr - 1.0))
}

/// `n ≥ (q/(2 − q))²` with `q = (1 + SR)^{1/r}`, for `k = 2^r` measurements.
pub fn witness_power_two(sr: f64, r: u32) -> Result<f64> {
    check_sr(sr)?;
    if r == 0 {
        return Err(Error::Domain("r must be at least 1".into()));
    }
    let q = (1.0 + sr).powf(1.0 / r as f64);
    if q >= 2.0 {
        return Err(Error::Domain(format!(
            "power-of-two witness needs (1+SR)^(1/r) < 2, got {q}"
        )));
    }
    Ok((q / (2.0 - q)).powi(2))
}

/// Inverse of the three-measurement recursive bound `h(2h + 1)/3`:
/// `n ≥ (1 + SR)(17 + 5SR + 3√((1 + SR)(25 + SR))) / (8(2 − SR)²)`.
pub fn witness_three(sr: f64) -> Result<f64> {
    check_sr(sr)?;
    if sr >= 2.0 {
        return Err(Error::Domain(format!(
            "three-measurement witness needs SR < 2, got {sr}"
        )));
    }
    let s = sr;
    Ok(
        (1.0 + s) * (17.0 + 5.0 * s + 3.0 * ((1.0 + s) * (25.0 + s)).sqrt())
            / (8.0 * (2.0 - s).powi(2)),
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct CeilingEntry {
    pub n: usize,
    pub sr_ceiling: f64,
    pub source: BoundSource,
    pub excluded: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct Certificate {
    pub sr_lower: f64,
    pub k: usize,
    /// Smallest Schmidt number compatible with `sr_lower`.
    pub certified_n: usize,
    /// Ceilings for `n = 1, 2, …`, up to the first non-excluded `n` (capped at [`TRACE_LIMIT`]).
    pub witness_trace: Vec<CeilingEntry>,
    /// Best continuous closed-form witness available for this `k`, if any applies.
    pub closed_form_n: Option<f64>,
    pub warnings: Vec<String>,
}

fn excluded(sr: f64, k: usize, n: usize) -> Result<bool> {
    Ok(sr > h_best(k, n)?.sr_ceiling + 1e-12)
}

/// Rules out every `n` whose ceiling `sr_lower` exceeds; `certified_n` is one more than the largest.
pub fn certified_schmidt_number(sr_lower: f64, k: usize) -> Result<Certificate> {
    if k < 2 {
        return Err(Error::Domain(format!("certificates need k >= 2, got {k}")));
    }
    if !sr_lower.is_finite() {
        return Err(Error::Domain(format!(
            "sr_lower must be finite, got {sr_lower}"
        )));
    }
    let mut warnings = Vec::new();
    if sr_lower >= (k - 1) as f64 {
        warnings.push(format!(
            "sr_lower = {sr_lower} reaches the largest value possible with {k} measurements ({}); search capped at n = {MAX_CERTIFIED_N}",
            k - 1
        ));
    }
    // ceilings increase with n: exponential then binary search for the last excluded n
    let mut last_excluded = 0;
    if excluded(sr_lower, k, 1)? {
        let mut hi = 2;
        while hi < MAX_CERTIFIED_N && excluded(sr_lower, k, hi)? {
            hi *= 2;
        }
        let hi = hi.min(MAX_CERTIFIED_N);
        if excluded(sr_lower, k, hi)? {
            last_excluded = hi;
        } else {
            let mut lo = hi / 2;
            let mut hi = hi;
            while hi - lo > 1 {
                let mid = (lo + hi) / 2;
                if excluded(sr_lower, k, mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            last_excluded = lo;
        }
    }
    let certified_n = last_excluded + 1;
    let witness_trace = (1..=certified_n.min(TRACE_LIMIT))
        .map(|n| {
            let b = h_best(k, n)?;
            Ok(CeilingEntry {
                n,
                sr_ceiling: b.sr_ceiling,
                source: b.source,
                excluded: n < certified_n,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut closed = Vec::new();
    if sr_lower >= 0.0 {
        if let Ok(w) = witness_cloning(sr_lower, k) {
            closed.push(w);
        }
        if k.is_power_of_two() {
            if let Ok(w) = witness_power_two(sr_lower, k.trailing_zeros()) {
                closed.push(w);
            }
        }
        if k == 3 {
            if let Ok(w) = witness_three(sr_lower) {
                closed.push(w);
            }
        }
    }
    let closed_form_n = closed.into_iter().reduce(f64::max);
    Ok(Certificate {
        sr_lower,
        k,
        certified_n,
        witness_trace,
        closed_form_n,
        warnings,
    })
}

/// `max_s λ_max(Σ_x B_{s(x)|x})` over deterministic strategies `s`.
pub fn lhs_norm(b: &MeasurementSet) -> Result<f64> {
    lhs_norm_with(b, &SdpConfig::default())
}

pub fn lhs_norm_with(b: &MeasurementSet, cfg: &SdpConfig) -> Result<f64> {
    let strategies = enumerate_strategies(b.outcomes(), b.k(), cfg.strategy_cap)?;
    let effects: Vec<_> = (0..b.k())
        .flat_map(|x| (0..b.outcomes()).map(move |a| (a, x)))
        .map(|(a, x)| b.effect(a, x).clone())
        .collect();
    Ok(lhs_bound(&effects, &strategies, b.outcomes(), b.dim()))
}

/// `(1/λ) Σ_{a,x} Tr[(A_{a|x} ⊗ B_{a|x}) ρ] − 1` with `λ = lhs_norm(B)`.
pub fn sr_lower_from_correlations(
    state: &BipartiteState,
    a: &MeasurementSet,
    b: &MeasurementSet,
) -> Result<f64> {
    if a.dim() != state.dim_a() || b.dim() != state.dim_b() {
        return Err(Error::Shape(
            "measurement dimensions do not match the state".into(),
        ));
    }
    if a.k() != b.k() || a.outcomes() != b.outcomes() {
        return Err(Error::Shape(
            "Alice's and Bob's measurement sets have different shapes".into(),
        ));
    }
    let lambda = lhs_norm(b)?;
    let mut total = 0.0;
    for x in 0..a.k() {
        for o in 0..a.outcomes() {
            total += kron(a.effect(o, x), b.effect(o, x)).inner(state.matrix());
        }
    }
    Ok(total / lambda - 1.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdMethod {
    ClosedForm,
    SdpScan,
    /// The line fit failed validation and `v*` was found by bisection.
    SdpBisection,
}

impl ThresholdMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            ThresholdMethod::ClosedForm => "closed_form",
            ThresholdMethod::SdpScan => "sdp_scan",
            ThresholdMethod::SdpBisection => "sdp_bisection",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Largest deviation of a validation sample from the line.
    pub residual: f64,
}

impl LineFit {
    fn through(p: (f64, f64), q: (f64, f64)) -> Self {
        let slope = (p.1 - q.1) / (p.0 - q.0);
        Self {
            slope,
            intercept: p.1 - slope * p.0,
            residual: 0.0,
        }
    }

    pub fn at(&self, v: f64) -> f64 {
        self.slope * v + self.intercept
    }

    /// Where the line crosses zero.
    pub fn onset(&self) -> f64 {
        -self.intercept / self.slope
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdResult {
    pub d: usize,
    pub k: usize,
    pub n: usize,
    /// Smallest mixing parameter at which `n` is still excluded; absent if not even `v = 1` suffices.
    pub v_star: Option<f64>,
    pub method: ThresholdMethod,
    pub line_fit: Option<LineFit>,
    pub sr_at_one: f64,
    pub sr_ceiling: f64,
}

/// `((d + √d − 1)√n − 1) / ((d − 1)(√n + 1))` for a pair of MUBs.
pub fn noise_threshold_pairs(d: usize, n: usize) -> Result<f64> {
    if d < 2 || n < 1 || n >= d {
        return Err(Error::Domain(format!(
            "pair threshold needs d >= 2 and 1 <= n < d, got d={d}, n={n}"
        )));
    }
    let (df, sn) = (d as f64, (n as f64).sqrt());
    Ok(((df + df.sqrt() - 1.0) * sn - 1.0) / ((df - 1.0) * (sn + 1.0)))
}

/// SR of the isotropic state with mixing `v` measured with the first `k` MUBs.
pub fn isotropic_sr(d: usize, k: usize, v: f64, cfg: &SdpConfig) -> Result<f64> {
    isotropic_sr_for(&MeasurementSet::mubs(d, k)?, v, cfg)
}

pub fn isotropic_sr_for(m: &MeasurementSet, v: f64, cfg: &SdpConfig) -> Result<f64> {
    let asm = make_assemblage(&BipartiteState::isotropic(m.dim(), v)?, m)?;
    Ok(steering_robustness_with(&asm, cfg)?.value)
}

/// Largest `C(total, k)·d^k` for which every MUB subset is tried.
pub const SUBSET_BUDGET: u128 = 10_000;

#[derive(Clone, Debug, Serialize)]
pub struct MubChoice {
    /// Indices into the full constructible set.
    pub subset: Vec<usize>,
    pub sr_at_one: f64,
    /// Number of subsets solved; 1 when the budget forced the first `k` bases.
    pub searched: usize,
}

fn subsets(total: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur: Vec<usize> = (0..k).collect();
    loop {
        out.push(cur.clone());
        let Some(i) = (0..k).rev().find(|&i| cur[i] < total - k + i) else {
            return out;
        };
        cur[i] += 1;
        for j in i + 1..k {
            cur[j] = cur[j - 1] + 1;
        }
    }
}

/// The `k`-subset of MUBs with the highest SR for the maximally entangled state;
/// ties keep the lexicographically first. Falls back to the first `k` bases
/// when trying every subset would exceed [`SUBSET_BUDGET`].
pub fn best_mub_subset(d: usize, k: usize, cfg: &SdpConfig) -> Result<MubChoice> {
    let total = crate::quantum::mub::max_mubs(d).unwrap_or(0);
    if k == 0 || k > total {
        return Err(Error::Capability(format!(
            "{k} MUBs not constructible for d={d}"
        )));
    }
    let per = (d as u128).saturating_pow(k as u32);
    let candidates = subsets(total, k);
    let candidates = if (candidates.len() as u128).saturating_mul(per) <= SUBSET_BUDGET {
        candidates
    } else {
        vec![(0..k).collect()]
    };
    let mut best: Option<(Vec<usize>, f64)> = None;
    for c in &candidates {
        let sr = isotropic_sr_for(&MeasurementSet::mub_subset(d, c)?, 1.0, cfg)?;
        if best.as_ref().is_none_or(|b| sr > b.1 + 1e-7) {
            best = Some((c.clone(), sr));
        }
    }
    let (subset, sr_at_one) = best.expect("at least one subset");
    Ok(MubChoice {
        subset,
        sr_at_one,
        searched: candidates.len(),
    })
}

const LINE_TOL: f64 = 1e-6;

pub fn noise_threshold(d: usize, k: usize, n: usize) -> Result<ThresholdResult> {
    noise_threshold_with(d, k, n, &SdpConfig::from_env()?)
}

/// `v*` with `SR(v*) = h_best(k, n).sr_ceiling` from a two-point line fit,
/// validated at `v*`; bisection on `v` if the validation fails.
pub fn noise_threshold_with(
    d: usize,
    k: usize,
    n: usize,
    cfg: &SdpConfig,
) -> Result<ThresholdResult> {
    Ok(noise_thresholds_with(d, k, &[n], cfg)?.remove(0))
}

/// Thresholds for several `n` at one `(d, k)`, sharing the two solves that fix the line.
pub fn noise_thresholds_with(
    d: usize,
    k: usize,
    ns: &[usize],
    cfg: &SdpConfig,
) -> Result<Vec<ThresholdResult>> {
    noise_thresholds_for(&MeasurementSet::mubs(d, k)?, ns, cfg)
}

/// As [`noise_thresholds_with`] for an arbitrary measurement set on the isotropic state.
pub fn noise_thresholds_for(
    m: &MeasurementSet,
    ns: &[usize],
    cfg: &SdpConfig,
) -> Result<Vec<ThresholdResult>> {
    let (d, k) = (m.dim(), m.k());
    let sr = |v: f64| isotropic_sr_for(m, v, cfg);
    let sr_at_one = sr(1.0)?;
    let mut line: Option<LineFit> = None;
    let mut out = Vec::with_capacity(ns.len());
    for &n in ns {
        let ceiling = h_best(k, n)?.sr_ceiling;
        let mut result = ThresholdResult {
            d,
            k,
            n,
            v_star: None,
            method: ThresholdMethod::SdpScan,
            line_fit: None,
            sr_at_one,
            sr_ceiling: ceiling,
        };
        if sr_at_one <= ceiling + 1e-9 {
            out.push(result);
            continue;
        }
        let base = match line {
            Some(f) => f,
            None => {
                let mut v2 = 0.9;
                let mut sr2 = sr(v2)?;
                while sr2 <= LINE_TOL {
                    v2 = 0.5 * (1.0 + v2);
                    if 1.0 - v2 < 1e-6 {
                        return Err(Error::Consistency(
                            "steering onset too close to v = 1 for a line fit".into(),
                        ));
                    }
                    sr2 = sr(v2)?;
                }
                let f = LineFit::through((1.0, sr_at_one), (v2, sr2));
                line = Some(f);
                f
            }
        };
        let guess = ((ceiling - base.intercept) / base.slope).clamp(0.0, 1.0);
        let fit = LineFit {
            residual: (sr(guess)? - base.at(guess)).abs(),
            ..base
        };
        result.line_fit = Some(fit);
        if fit.residual <= LINE_TOL {
            result.v_star = Some(guess);
        } else {
            // not linear over the bracket: bisect SR(v) = ceiling
            let (mut lo, mut hi) = (0.0, 1.0);
            while hi - lo > 1e-7 {
                let mid = 0.5 * (lo + hi);
                if sr(mid)? > ceiling {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            result.v_star = Some(0.5 * (lo + hi));
            result.method = ThresholdMethod::SdpBisection;
        }
        out.push(result);
    }
    Ok(out)
}

/// Closed-form `k = 2` threshold wrapped as a [`ThresholdResult`].
pub fn noise_threshold_closed_form(d: usize, n: usize) -> Result<ThresholdResult> {
    let v = noise_threshold_pairs(d, n)?;
    let b = h_best(2, n)?;
    let sd = (d as f64).sqrt();
    Ok(ThresholdResult {
        d,
        k: 2,
        n,
        v_star: Some(v),
        method: ThresholdMethod::ClosedForm,
        line_fit: None,
        sr_at_one: (sd - 1.0) / (sd + 1.0),
        sr_ceiling: b.sr_ceiling,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig3Line {
    pub k: usize,
    pub samples: Vec<(f64, f64)>,
    /// Fit over the samples above the steering onset.
    pub fit: Option<LineFit>,
}

#[derive(Clone, Debug, Serialize)]
pub struct BoundLevel {
    pub k: usize,
    pub n: usize,
    pub sr_ceiling: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct Fig3Data {
    pub d: usize,
    pub lines: Vec<Fig3Line>,
    pub levels: Vec<BoundLevel>,
}

/// `SR(v)` samples per `k`, least-squares lines over the positive part,
/// and the ceilings for `n = 2, 3`.
pub fn fig3_data(d: usize, k_list: &[usize], v_grid: &[f64]) -> Result<Fig3Data> {
    fig3_data_with(d, k_list, v_grid, &SdpConfig::from_env()?)
}

pub fn fig3_data_with(
    d: usize,
    k_list: &[usize],
    v_grid: &[f64],
    cfg: &SdpConfig,
) -> Result<Fig3Data> {
    let mut lines = Vec::with_capacity(k_list.len());
    let mut levels = Vec::new();
    for &n in &[2usize, 3] {
        for &k in k_list {
            levels.push(BoundLevel {
                k,
                n,
                sr_ceiling: h_best(k, n)?.sr_ceiling,
            });
        }
    }
    for &k in k_list {
        let samples: Vec<(f64, f64)> = v_grid
            .iter()
            .map(|&v| Ok((v, isotropic_sr(d, k, v, cfg)?)))
            .collect::<Result<_>>()?;
        lines.push(Fig3Line {
            k,
            fit: linear_regime(&samples),
            samples,
        });
    }
    Ok(Fig3Data { d, lines, levels })
}

/// Least-squares line through the longest run of highest-`v` samples that a
/// line fits to within `LINE_TOL`. `SR(v)` bends just above its onset, so
/// the run usually stops before the smallest positive sample.
pub fn linear_regime(samples: &[(f64, f64)]) -> Option<LineFit> {
    let mut top: Vec<(f64, f64)> = samples.iter().copied().filter(|s| s.1 > LINE_TOL).collect();
    top.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut best = None;
    for len in 2..=top.len() {
        match least_squares(&top[..len]) {
            Some(f) if f.residual <= LINE_TOL => best = Some(f),
            _ => break,
        }
    }
    best
}

pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    if points.len() < 2 {
        return None;
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = points
        .iter()
        .map(|p| (p.1 - slope * p.0 - intercept).abs())
        .fold(0.0, f64::max);
    Some(LineFit {
        slope,
        intercept,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{h_pair, h_recursive};
    use crate::quantum::transpose_measurements;

    #[test]
    fn pair_witness_examples() {
        assert_eq!(witness_pairs(0.0).unwrap(), 1.0);
        assert!((witness_pairs(0.1716).unwrap() - 2.0).abs() < 1e-3);
        assert!((witness_pairs(0.3333).unwrap() - 4.0).abs() < 1e-3);
        assert!(witness_pairs(1.0).is_err());
        for n in 1..=100 {
            let c = 1.0 / h_pair(n) - 1.0;
            assert!((witness_pairs(c).unwrap() - n as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn cloning_witness_examples() {
        assert_eq!(witness_cloning(0.0, 4).unwrap(), 1.0);
        assert!((witness_cloning(0.3636, 5).unwrap() - 2.0).abs() < 1e-3);
        assert!((witness_cloning(1.6667, 8).unwrap() - 6.0).abs() < 2e-3);
        assert!(witness_cloning(4.0, 5).is_err());
    }

    #[test]
    fn power_two_witness_examples() {
        assert!((witness_power_two(0.1716, 1).unwrap() - 2.0).abs() < 1e-3);
        assert!((witness_power_two(0.7778, 2).unwrap() - 4.0).abs() < 2e-3);
        assert_eq!(witness_power_two(0.0, 2).unwrap(), 1.0);
        assert!(witness_power_two(3.0, 1).is_err());
        for r in 1..=4u32 {
            for n in 1..=100 {
                let c = 1.0 / h_recursive(1 << r, n) - 1.0;
                assert!((witness_power_two(c, r).unwrap() - n as f64).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn three_witness_examples() {
        assert!((witness_three(0.0).unwrap() - 1.0).abs() < 1e-9);
        let s = (53.0 - 36.0 * 2f64.sqrt()) / 7.0;
        assert!((witness_three(s).unwrap() - 2.0).abs() < 1e-9);
        assert!((witness_three(0.4759).unwrap() - 3.0).abs() < 2e-3);
        for n in 1..=100 {
            let c = 1.0 / h_recursive(3, n) - 1.0;
            assert!((witness_three(c).unwrap() - n as f64).abs() < 1e-6);
        }
        assert!(witness_three(2.0).is_err());
    }

    #[test]
    fn certificate_examples() {
        // 0.30 exceeds the n = 3 ceiling 0.2679 as well
        assert_eq!(certified_schmidt_number(0.30, 2).unwrap().certified_n, 4);
        assert_eq!(certified_schmidt_number(0.25, 2).unwrap().certified_n, 3);
        assert_eq!(certified_schmidt_number(0.0, 3).unwrap().certified_n, 1);
        assert_eq!(certified_schmidt_number(0.27, 3).unwrap().certified_n, 3);
        assert_eq!(certified_schmidt_number(0.8716, 5).unwrap().certified_n, 4);
        let c = certified_schmidt_number(-0.1, 2).unwrap();
        assert_eq!(c.certified_n, 1);
        assert!(c.closed_form_n.is_none());
    }

    #[test]
    fn certificate_is_monotone_and_consistent() {
        for k in 2..=8 {
            let mut prev = 1;
            for i in 0..200 {
                let sr = i as f64 * 0.005 * (k - 1) as f64;
                let c = certified_schmidt_number(sr, k).unwrap();
                assert!(c.certified_n >= prev);
                prev = c.certified_n;
                let last = c.witness_trace.last().unwrap();
                assert!(!last.excluded || c.certified_n > TRACE_LIMIT);
                if c.certified_n > 1 {
                    let b = h_best(k, c.certified_n - 1).unwrap();
                    assert!(sr > b.sr_ceiling + 1e-12);
                }
                if let Some(w) = c.closed_form_n {
                    assert!(
                        c.certified_n as f64 >= w.ceil() - 1e-9 || (w - w.round()).abs() < 1e-9 * w,
                        "k={k} sr={sr} n={} w={w}",
                        c.certified_n
                    );
                }
            }
        }
    }

    #[test]
    fn saturated_input_warns() {
        let c = certified_schmidt_number(1.5, 2).unwrap();
        assert!(!c.warnings.is_empty());
        assert_eq!(c.certified_n, MAX_CERTIFIED_N + 1);
    }

    #[test]
    fn lhs_norm_examples() {
        let one = MeasurementSet::mubs(3, 1).unwrap();
        assert!((lhs_norm(&one).unwrap() - 1.0).abs() < 1e-12);
        let pair = transpose_measurements(&MeasurementSet::mubs(2, 2).unwrap());
        assert!((lhs_norm(&pair).unwrap() - (1.0 + std::f64::consts::FRAC_1_SQRT_2)).abs() < 1e-12);
        let z = one.povm(0).clone();
        let copies = MeasurementSet::new(vec![z.clone(), z.clone(), z]).unwrap();
        assert!((lhs_norm(&copies).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn correlation_estimator_examples() {
        let a = MeasurementSet::mubs(2, 2).unwrap();
        let b = transpose_measurements(&a);
        let phi = BipartiteState::maximally_entangled(2);
        let v = sr_lower_from_correlations(&phi, &a, &b).unwrap();
        assert!((v - (2.0 / (1.0 + std::f64::consts::FRAC_1_SQRT_2) - 1.0)).abs() < 1e-12);
        let noise = BipartiteState::isotropic(2, 0.0).unwrap();
        assert!(sr_lower_from_correlations(&noise, &a, &b).unwrap() <= 0.0);

        let a3 = MeasurementSet::mubs(3, 3).unwrap();
        let v = sr_lower_from_correlations(
            &BipartiteState::maximally_entangled(3),
            &a3,
            &transpose_measurements(&a3),
        )
        .unwrap();
        assert!((v - 0.4037).abs() < 1e-3);
    }

    #[test]
    fn closed_form_thresholds() {
        assert_eq!(
            format!("{:.4}", noise_threshold_pairs(3, 2).unwrap()),
            "0.8860"
        );
        assert_eq!(
            format!("{:.4}", noise_threshold_pairs(7, 6).unwrap()),
            "0.9749"
        );
        assert_eq!(
            format!("{:.4}", noise_threshold_pairs(4, 2).unwrap()),
            "0.8382"
        );
        assert!(noise_threshold_pairs(3, 3).is_err());
    }

    #[test]
    fn sdp_threshold_matches_closed_form_for_pairs() {
        let cfg = SdpConfig::default();
        for (d, n) in [(3, 2), (4, 2), (4, 3)] {
            let t = noise_threshold_with(d, 2, n, &cfg).unwrap();
            let closed = noise_threshold_pairs(d, n).unwrap();
            assert!((t.v_star.unwrap() - closed).abs() < 1e-3, "d={d} n={n}");
            assert_eq!(t.method, ThresholdMethod::SdpScan);
        }
    }

    #[test]
    fn threshold_examples() {
        let cfg = SdpConfig::default();
        let t = noise_threshold_with(3, 3, 2, &cfg).unwrap();
        assert!((t.v_star.unwrap() - 0.8549).abs() < 1e-3);
        let t = noise_threshold_with(3, 3, 3, &cfg).unwrap();
        assert!(t.v_star.is_none());
        assert!((t.sr_at_one - 0.4037).abs() < 1e-3);
    }

    #[test]
    fn fig3_fit_skips_the_bend() {
        let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
        let data = fig3_data_with(4, &[3], &grid, &SdpConfig::default()).unwrap();
        let fit = data.lines[0].fit.unwrap();
        assert!(fit.residual <= LINE_TOL);
        assert!((fit.slope - 1.125).abs() < 1e-6, "{fit:?}");
        assert!((fit.onset() - 5.0 / 9.0).abs() < 1e-6);
    }

    #[test]
    fn subset_enumeration() {
        let s = subsets(5, 3);
        assert_eq!(s.len(), 10);
        assert_eq!(s[0], vec![0, 1, 2]);
        assert_eq!(s[9], vec![2, 3, 4]);
        assert_eq!(subsets(3, 3), vec![vec![0, 1, 2]]);
    }

    #[test]
    fn best_subset_in_dimension_five() {
        let cfg = SdpConfig::default();
        let c = best_mub_subset(5, 3, &cfg).unwrap();
        assert_eq!(c.searched, 20);
        assert!((c.sr_at_one - 0.6001).abs() < 1e-4, "{}", c.sr_at_one);
        let m = MeasurementSet::mub_subset(5, &c.subset).unwrap();
        let t = noise_thresholds_for(&m, &[2, 3, 4], &cfg).unwrap();
        for (r, published) in t.iter().zip([0.7405, 0.9030, 0.99992]) {
            assert!(
                (r.v_star.unwrap() - published).abs() < 1e-4,
                "n={} {:?}",
                r.n,
                r.v_star
            );
        }
    }

    #[test]
    fn least_squares_line() {
        let f = least_squares(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-12 && (f.intercept - 1.0).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!((f.onset() + 0.5).abs() < 1e-12);
        assert!(least_squares(&[(1.0, 1.0)]).is_none());
    }
}
