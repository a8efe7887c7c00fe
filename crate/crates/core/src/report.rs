//! Row-oriented grids for the bound, robustness and threshold tables and the
//! `SR(v)` figure data, with CSV and JSON writers.
//!
//! Every row has the columns `d, k, n, value, method, source, residual`;
//! figure rows add a trailing `v`. Cells beyond the strategy cap are rows
//! with `method = skipped`, `source = capacity`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::bounds::{h_best, table1};
use crate::certify::{
    best_mub_subset, fig3_data_with, noise_threshold_closed_form, noise_thresholds_for, Fig3Data,
};
use crate::error::{Error, Result};
use crate::quantum::{make_assemblage, BipartiteState, MeasurementSet};
use crate::sdp::steering::steering_robustness_with;
use crate::sdp::{strategy_count, SdpConfig};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Row {
    pub d: Option<usize>,
    pub k: usize,
    pub n: Option<usize>,
    pub value: Option<f64>,
    pub method: String,
    pub source: String,
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v: Option<f64>,
}

impl Row {
    fn skipped(d: Option<usize>, k: usize, n: Option<usize>) -> Self {
        Row {
            d,
            k,
            n,
            value: None,
            method: "skipped".into(),
            source: "capacity".into(),
            residual: None,
            v: None,
        }
    }

    pub fn is_skipped(&self) -> bool {
        self.method == "skipped"
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::Validation(format!(
                "unknown format '{other}' (csv or json)"
            ))),
        }
    }
}

/// Which `k` MUBs of the full constructible set are measured.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SubsetPolicy {
    /// The first `k` bases of the construction.
    First,
    /// The subset with the highest SR on the maximally entangled state
    /// (see [`crate::certify::best_mub_subset`] for the search budget).
    #[default]
    Best,
}

impl SubsetPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            SubsetPolicy::First => "first_mubs",
            SubsetPolicy::Best => "best_mubs",
        }
    }

    pub fn measurements(self, d: usize, k: usize, cfg: &SdpConfig) -> Result<MeasurementSet> {
        match self {
            SubsetPolicy::First => MeasurementSet::mubs(d, k),
            SubsetPolicy::Best => {
                MeasurementSet::mub_subset(d, &best_mub_subset(d, k, cfg)?.subset)
            }
        }
    }
}

impl std::str::FromStr for SubsetPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "first" => Ok(SubsetPolicy::First),
            "best" => Ok(SubsetPolicy::Best),
            other => Err(Error::Validation(format!(
                "unknown subset policy '{other}' (first or best)"
            ))),
        }
    }
}

fn cell<T: ToString>(x: Option<T>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn num(x: Option<f64>) -> String {
    x.map(|v| format!("{v:.10}")).unwrap_or_default()
}

pub fn write_rows<W: Write>(rows: &[Row], format: Format, mut out: W) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let with_v = rows.iter().any(|r| r.v.is_some());
            let mut w = csv::Writer::from_writer(out);
            let mut header = vec!["d", "k", "n", "value", "method", "source", "residual"];
            if with_v {
                header.push("v");
            }
            w.write_record(&header)?;
            for r in rows {
                let mut rec = vec![
                    cell(r.d),
                    r.k.to_string(),
                    cell(r.n),
                    num(r.value),
                    r.method.clone(),
                    r.source.clone(),
                    r.residual.map(|x| format!("{x:.3e}")).unwrap_or_default(),
                ];
                if with_v {
                    rec.push(r.v.map(|x| format!("{x:.6}")).unwrap_or_default());
                }
                w.write_record(&rec)?;
            }
            w.flush()?;
        }
    }
    Ok(())
}

/// Runs `f` over `items` on a pool of `jobs` threads (0 = all cores), keeping input order.
pub fn par_cells<T, R, F>(items: &[T], jobs: usize, f: F) -> Result<Vec<R>>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> Result<R> + Sync + Send,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Validation(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(&f).collect())
}

/// Ceilings for `2 ≤ k ≤ k_max`, `2 ≤ n ≤ n_max` (the `n = 1` column is identically zero).
pub fn table1_rows(k_max: usize, n_max: usize) -> Result<Vec<Row>> {
    Ok(table1(k_max, n_max)?
        .into_iter()
        .flatten()
        .filter(|b| b.n >= 2)
        .map(|b| Row {
            d: None,
            k: b.k,
            n: Some(b.n),
            value: Some(b.sr_ceiling),
            method: "closed_form".into(),
            source: b.source.as_str().into(),
            residual: None,
            v: None,
        })
        .collect())
}

/// `(k, d)` for `k = 2..=8`, `d = 2..=7` wherever `k` MUBs can be constructed.
pub fn table2_cells() -> Vec<(usize, usize)> {
    (2..=8)
        .flat_map(|k| (2..=7).map(move |d| (k, d)))
        .filter(|&(k, d)| crate::quantum::mub_bases(d, k).is_ok())
        .collect()
}

/// SR of the maximally entangled state with `k` MUBs; `residual` is the duality gap.
pub fn table2_rows(
    cells: &[(usize, usize)],
    policy: SubsetPolicy,
    cfg: &SdpConfig,
    jobs: usize,
) -> Result<Vec<Row>> {
    par_cells(cells, jobs, |&(k, d)| {
        if strategy_count(d, k, cfg.strategy_cap).is_err() {
            return Ok(Row::skipped(Some(d), k, None));
        }
        let m = policy.measurements(d, k, cfg)?;
        let asm = make_assemblage(&BipartiteState::maximally_entangled(d), &m)?;
        let sol = steering_robustness_with(&asm, cfg)?;
        Ok(Row {
            d: Some(d),
            k,
            n: None,
            value: Some(sol.value),
            method: "sdp".into(),
            source: policy.as_str().into(),
            residual: Some(sol.gap),
            v: None,
        })
    })
}

/// `(k, d, n)` cells of the noise-threshold tables for `k = 2..=5`.
pub fn table3_cells() -> Vec<(usize, usize, usize)> {
    let columns: [(usize, &[usize]); 4] = [
        (2, &[3, 4, 5, 6, 7]),
        (3, &[3, 4, 5, 6, 7]),
        (4, &[3, 4, 5, 7, 8]),
        (5, &[4, 5, 7, 8, 9]),
    ];
    let mut cells = Vec::new();
    for (k, ds) in columns {
        for n in 2..=6 {
            for &d in ds {
                if n < d && (k == 2 || n <= 5) {
                    cells.push((k, d, n));
                }
            }
        }
    }
    cells
}

/// Noise thresholds `v*`; an empty `value` means no threshold exists even at `v = 1`.
/// Pairs use the closed form; `residual` is the line-fit residual.
pub fn table3_rows(
    cells: &[(usize, usize, usize)],
    policy: SubsetPolicy,
    cfg: &SdpConfig,
    jobs: usize,
) -> Result<Vec<Row>> {
    // one task per (k, d) column so the line through SR(1) is solved once
    let mut groups: Vec<(usize, usize, Vec<usize>)> = Vec::new();
    for &(k, d, n) in cells {
        match groups.iter_mut().find(|g| g.0 == k && g.1 == d) {
            Some(g) => g.2.push(n),
            None => groups.push((k, d, vec![n])),
        }
    }
    let solved = par_cells(&groups, jobs, |(k, d, ns)| {
        let (k, d) = (*k, *d);
        if k == 2 {
            return ns
                .iter()
                .map(|&n| noise_threshold_closed_form(d, n).map(Some))
                .collect::<Result<Vec<_>>>();
        }
        if strategy_count(d, k, cfg.strategy_cap).is_err() {
            return Ok(vec![None; ns.len()]);
        }
        let m = policy.measurements(d, k, cfg)?;
        Ok(noise_thresholds_for(&m, ns, cfg)?
            .into_iter()
            .map(Some)
            .collect())
    })?;
    let mut rows = Vec::with_capacity(cells.len());
    for &(k, d, n) in cells {
        let gi = groups
            .iter()
            .position(|g| g.0 == k && g.1 == d)
            .expect("grouped");
        let ni = groups[gi].2.iter().position(|&m| m == n).expect("grouped");
        rows.push(match &solved[gi][ni] {
            None => Row::skipped(Some(d), k, Some(n)),
            Some(t) => Row {
                d: Some(d),
                k,
                n: Some(n),
                value: t.v_star,
                method: t.method.as_str().into(),
                source: h_best(k, n)?.source.as_str().into(),
                residual: t.line_fit.map(|f| f.residual),
                v: None,
            },
        });
    }
    Ok(rows)
}

pub fn fig3_rows(data: &Fig3Data) -> Vec<Row> {
    let d = Some(data.d);
    let mut rows = Vec::new();
    for line in &data.lines {
        for &(v, sr) in &line.samples {
            rows.push(Row {
                d,
                k: line.k,
                n: None,
                value: Some(sr),
                method: "sdp".into(),
                source: "isotropic".into(),
                residual: None,
                v: Some(v),
            });
        }
        if let Some(fit) = line.fit {
            for (v, source) in [(fit.onset(), "onset"), (1.0, "full_visibility")] {
                rows.push(Row {
                    d,
                    k: line.k,
                    n: None,
                    value: Some(fit.at(v)),
                    method: "line_fit".into(),
                    source: source.into(),
                    residual: Some(fit.residual),
                    v: Some(v),
                });
            }
        }
    }
    for level in &data.levels {
        let source = h_best(level.k, level.n)
            .map(|b| b.source.as_str())
            .unwrap_or("");
        rows.push(Row {
            d,
            k: level.k,
            n: Some(level.n),
            value: Some(level.sr_ceiling),
            method: "closed_form".into(),
            source: source.into(),
            residual: None,
            v: None,
        });
    }
    rows
}

/// Figure data for `d = 4`, `k = 2, 3, 4` on a uniform grid of `samples` points in `[0, 1]`.
pub fn fig3_default(samples: usize, cfg: &SdpConfig) -> Result<Fig3Data> {
    let grid: Vec<f64> = (0..samples)
        .map(|i| i as f64 / (samples - 1).max(1) as f64)
        .collect();
    fig3_data_with(4, &[2, 3, 4], &grid, cfg)
}

/// Randomised cross-checks, reproducible from `seed`. One row per check:
/// `value` is the worst observed margin, `residual` the tolerance, `source` pass or fail.
pub fn validation_rows(seed: u64, count: usize, cfg: &SdpConfig) -> Result<Vec<Row>> {
    use crate::bounds::h_recursive;
    use crate::certify::sr_lower_from_correlations;
    use crate::parent::{operator_inequality_check, parent_recursive};
    use crate::quantum::random::{
        random_bipartite_state, random_projective_measurements, random_rank_one_povm, rng,
    };
    use crate::quantum::transpose_measurements;
    use crate::sdp::incompat::incompatibility_eta_g_with;
    use crate::sdp::steering::sr_bisection_oracle_with;
    use rand::Rng;

    let mut r = rng(seed);
    let mut rows = Vec::new();
    let mut push = |method: &str, k: usize, worst: f64, tol: f64, pass: bool| {
        rows.push(Row {
            d: None,
            k,
            n: None,
            value: Some(worst),
            method: method.into(),
            source: if pass { "pass" } else { "fail" }.into(),
            residual: Some(tol),
            v: None,
        });
    };

    let (mut oracle, mut gap) = (0.0f64, 0.0f64);
    for _ in 0..count {
        let d = r.random_range(2..=3);
        let m = random_projective_measurements(d, 2, &mut r)?;
        let rank = r.random_range(1..=d * d);
        let asm = make_assemblage(&random_bipartite_state(d, d, rank, &mut r)?, &m)?;
        let sol = steering_robustness_with(&asm, cfg)?;
        oracle = oracle.max((sol.value - sr_bisection_oracle_with(&asm, 1e-7, cfg)?).abs());
        gap = gap.max(sol.gap.abs());
    }
    push("oracle_agreement", 2, oracle, 1e-4, oracle <= 1e-4);
    push("duality_gap", 2, gap, 1e-6, gap <= 1e-6);

    let mut sound = f64::NEG_INFINITY;
    for _ in 0..count {
        let (d, k) = [(2, 2), (2, 3), (3, 2), (3, 3)][r.random_range(0..4)];
        let v = r.random_range(0.0..=1.0);
        let a = MeasurementSet::mubs(d, k)?;
        let state = BipartiteState::isotropic(d, v)?;
        let sr = steering_robustness_with(&make_assemblage(&state, &a)?, cfg)?.value;
        sound =
            sound.max(sr_lower_from_correlations(&state, &a, &transpose_measurements(&a))? - sr);
    }
    push("estimator_soundness", 0, sound, 1e-6, sound <= 1e-6);

    let mut ineq = f64::INFINITY;
    for _ in 0..count {
        let n = r.random_range(2..=6);
        let a = random_rank_one_povm(n, r.random_range(n..=n + 2), &mut r)?;
        let b = random_rank_one_povm(n, r.random_range(n..=n + 2), &mut r)?;
        ineq = ineq.min(operator_inequality_check(&a, &b)?);
    }
    push("operator_inequality", 2, ineq, -1e-10, ineq >= -1e-10);

    for (k, n) in [(3, 2), (4, 2), (3, 3)] {
        let (mut above, mut slack) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..count.div_ceil(4) {
            let m = random_projective_measurements(n, k, &mut r)?;
            above = above.min(incompatibility_eta_g_with(&m, cfg)?.value - h_recursive(k, n));
            slack = slack.min(parent_recursive(&m)?.verdict.worst_slack());
        }
        push("eta_above_recursive", k, above, -1e-6, above >= -1e-6);
        push("recursive_parent_slack", k, slack, -1e-7, slack >= -1e-7);
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table2_layout() {
        let cells = table2_cells();
        assert_eq!(cells.len(), 23);
        assert!(cells.contains(&(3, 6)) && !cells.contains(&(4, 6)));
        assert!(cells.contains(&(8, 7)) && !cells.contains(&(4, 2)));
    }

    #[test]
    fn table3_layout() {
        let cells = table3_cells();
        assert_eq!(cells.iter().filter(|c| c.0 == 2).count(), 15);
        assert!(cells.contains(&(3, 4, 3)) && cells.contains(&(4, 3, 2)));
        assert!(!cells.contains(&(3, 3, 3)));
    }

    #[test]
    fn capacity_rows() {
        let cfg = SdpConfig::default().with_cap(10);
        let rows = table2_rows(&[(2, 2), (2, 4)], SubsetPolicy::First, &cfg, 1).unwrap();
        assert!((rows[0].value.unwrap() - 0.171_572_875).abs() < 1e-6);
        assert!(rows[1].is_skipped() && rows[1].value.is_none());
    }

    #[test]
    fn csv_and_json() {
        let rows = table1_rows(3, 2).unwrap();
        assert_eq!(table1_rows(8, 6).unwrap().len(), 35);
        let mut buf = Vec::new();
        write_rows(&rows, Format::Csv, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("d,k,n,value,method,source,residual\n"));
        assert!(text.contains(",2,2,0.1715728753,closed_form,pair_exact,"));
        let mut buf = Vec::new();
        write_rows(&rows, Format::Json, &mut buf).unwrap();
        let parsed: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(parsed.as_array().unwrap().len(), 2);
        assert_eq!(parsed[1]["source"], "qubit_triplet_exact");
    }

    #[test]
    fn validation_is_reproducible() {
        let cfg = SdpConfig::default();
        let a = validation_rows(7, 3, &cfg).unwrap();
        assert_eq!(a, validation_rows(7, 3, &cfg).unwrap());
        assert!(a.iter().all(|r| r.source == "pass"), "{a:?}");
    }

    #[test]
    fn threshold_rows() {
        let rows = table3_rows(
            &[(2, 3, 2), (3, 3, 2)],
            SubsetPolicy::Best,
            &SdpConfig::default(),
            1,
        )
        .unwrap();
        assert_eq!(rows[0].method, "closed_form");
        assert!((rows[0].value.unwrap() - 0.8860).abs() < 1e-4);
        assert!((rows[1].value.unwrap() - 0.8549).abs() < 1e-3);
    }
}
