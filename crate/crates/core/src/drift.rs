//! Distribution change detection with random 1-D projections and
//! two-sample Kolmogorov-Smirnov tests.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats;
use crate::table::{Table, Value};

/// Below this effective size the asymptotic p-value is only approximate.
pub const SMALL_SAMPLE: f64 = 50.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub small_sample: bool,
}

/// Kolmogorov survival function `Q(λ) = 2 Σ (-1)^(k-1) exp(-2 k² λ²)`.
pub fn kolmogorov_q(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=200 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(f64::MIN_POSITIVE, 1.0)
}

/// Two-sample KS test. The p-value uses the asymptotic Kolmogorov
/// distribution at `λ = (√n + 0.12 + 0.11/√n)·D` with effective size
/// `n = |x||y|/(|x|+|y|)`.
pub fn ks_two_sample(x: &[f64], y: &[f64]) -> Result<KsResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample);
    }
    let a = stats::sorted(x);
    let b = stats::sorted(y);
    let (n, m) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0, 0);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let v = a[i].min(b[j]);
        while i < a.len() && a[i] <= v {
            i += 1;
        }
        while j < b.len() && b[j] <= v {
            j += 1;
        }
        d = d.max((i as f64 / n - j as f64 / m).abs());
    }
    let ne = n * m / (n + m);
    let sq = ne.sqrt();
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_q((sq + 0.12 + 0.11 / sq) * d),
        small_sample: ne < SMALL_SAMPLE,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DriftConfig {
    pub projections: usize,
    pub alpha: f64,
    /// L∞ distance between category frequencies that flags a nominal column.
    pub category_threshold: f64,
    /// Columns ignored by [`drift_tables`], e.g. identifiers.
    pub exclude: Vec<String>,
}

impl Default for DriftConfig {
    fn default() -> Self {
        Self {
            projections: 50,
            alpha: 0.05,
            category_threshold: 0.1,
            exclude: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Drift,
    NoDrift,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionResult {
    /// Unit vector in standardized coordinates.
    pub direction: Vec<f64>,
    #[serde(flatten)]
    pub ks: KsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisResult {
    pub index: usize,
    pub column: String,
    #[serde(flatten)]
    pub ks: KsResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// Coordinates by descending axis statistic, ties to the lower index.
    pub ranking: Vec<usize>,
    /// False when the overall decision is no-drift.
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub columns: Vec<String>,
    pub projections: Vec<ProjectionResult>,
    pub axes: Vec<AxisResult>,
    pub alpha: f64,
    /// Per-projection rejection level `alpha / K`.
    pub threshold: f64,
    pub min_p_value: f64,
    pub decision: Decision,
    pub localization: Localization,
    pub seed: u64,
}

/// Column-major standardization by reference mean and standard deviation
/// (scale 1 for constant columns).
fn standardize(reference: &[Vec<f64>], incoming: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let d = reference[0].len();
    let mut r = vec![Vec::with_capacity(reference.len()); d];
    let mut s = vec![Vec::with_capacity(incoming.len()); d];
    for row in reference {
        for (j, v) in row.iter().enumerate() {
            r[j].push(*v);
        }
    }
    for row in incoming {
        for (j, v) in row.iter().enumerate() {
            s[j].push(*v);
        }
    }
    for j in 0..d {
        let mean = stats::mean(&r[j]).unwrap_or(0.0);
        let sd = stats::std_dev(&r[j]).filter(|v| *v > 0.0).unwrap_or(1.0);
        for v in r[j].iter_mut().chain(s[j].iter_mut()) {
            *v = (*v - mean) / sd;
        }
    }
    (r, s)
}

/// Unit vectors drawn uniformly on the sphere.
pub fn random_directions(k: usize, d: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..k)
        .map(|_| loop {
            let v: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 1e-12 {
                break v.into_iter().map(|x| x / norm).collect();
            }
        })
        .collect()
}

fn project(cols: &[Vec<f64>], u: &[f64]) -> Vec<f64> {
    let n = cols[0].len();
    (0..n).map(|i| cols.iter().zip(u).map(|(c, w)| c[i] * w).sum()).collect()
}

/// Ranks coordinates by descending axis statistic, ties to the lower index.
pub fn localize(report: &DriftReport) -> Localization {
    let mut ranking: Vec<usize> = report.axes.iter().map(|a| a.index).collect();
    ranking.sort_by(|&a, &b| {
        report.axes[b]
            .ks
            .statistic
            .total_cmp(&report.axes[a].ks.statistic)
            .then(a.cmp(&b))
    });
    Localization {
        ranking,
        significant: report.decision == Decision::Drift,
    }
}

/// Tests whether two row-major samples of equal dimension share a
/// distribution. Drift is declared when the smallest p-value over the `K`
/// random projections is at most `alpha / K`; the `d` axis projections are
/// reported for localization only.
pub fn detect_drift(
    reference: &[Vec<f64>],
    incoming: &[Vec<f64>],
    columns: &[String],
    projections: usize,
    alpha: f64,
    seed: u64,
) -> Result<DriftReport> {
    if reference.is_empty() || incoming.is_empty() {
        return Err(Error::EmptySample);
    }
    let d = reference[0].len();
    if let Some(row) = incoming.iter().chain(reference).find(|r| r.len() != d) {
        return Err(Error::DimensionMismatch {
            reference: d,
            incoming: row.len(),
        });
    }
    if d == 0 {
        return Err(Error::EmptySample);
    }
    if projections == 0 {
        return Err(Error::InvalidConfig("at least one projection is required".into()));
    }
    let (r, s) = standardize(reference, incoming);
    let dirs = random_directions(projections, d, seed);
    let results = dirs
        .into_par_iter()
        .map(|u| {
            let ks = ks_two_sample(&project(&r, &u), &project(&s, &u))?;
            Ok(ProjectionResult { direction: u, ks })
        })
        .collect::<Result<Vec<_>>>()?;
    let axes = (0..d)
        .into_par_iter()
        .map(|j| {
            Ok(AxisResult {
                index: j,
                column: columns.get(j).cloned().unwrap_or_else(|| j.to_string()),
                ks: ks_two_sample(&r[j], &s[j])?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let min_p = results.iter().map(|p| p.ks.p_value).fold(1.0, f64::min);
    let threshold = alpha / projections as f64;
    let decision = if min_p <= threshold { Decision::Drift } else { Decision::NoDrift };
    let mut report = DriftReport {
        columns: (0..d).map(|j| columns.get(j).cloned().unwrap_or_else(|| j.to_string())).collect(),
        projections: results,
        axes,
        alpha,
        threshold,
        min_p_value: min_p,
        decision,
        localization: Localization {
            ranking: Vec::new(),
            significant: false,
        },
        seed,
    };
    report.localization = localize(&report);
    Ok(report)
}

/// Category frequencies (Null counted as its own category) compared by
/// L∞ distance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryDrift {
    pub column: String,
    pub distance: f64,
    /// Category with the largest frequency change.
    pub category: String,
    pub drifted: bool,
}

pub const NULL_CATEGORY: &str = "NULL";

fn frequencies(values: &[Value]) -> BTreeMap<String, f64> {
    let mut out: BTreeMap<String, f64> = BTreeMap::new();
    for v in values {
        let k = v.as_text().map_or_else(|| NULL_CATEGORY.to_string(), |s| s.into_owned());
        *out.entry(k).or_default() += 1.0;
    }
    let n = values.len().max(1) as f64;
    out.values_mut().for_each(|c| *c /= n);
    out
}

pub fn category_drift(column: &str, reference: &[Value], incoming: &[Value], threshold: f64) -> CategoryDrift {
    let (a, b) = (frequencies(reference), frequencies(incoming));
    let mut best = (0.0, String::new());
    for k in a.keys().chain(b.keys()) {
        let diff = (a.get(k).copied().unwrap_or(0.0) - b.get(k).copied().unwrap_or(0.0)).abs();
        if diff > best.0 || best.1.is_empty() {
            best = (diff, k.clone());
        }
    }
    CategoryDrift {
        column: column.to_string(),
        distance: best.0,
        category: best.1,
        drifted: best.0 > threshold,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableDriftReport {
    /// Absent when the reference has no numeric columns.
    pub numeric: Option<DriftReport>,
    pub nominal: Vec<CategoryDrift>,
    pub reference_rows: usize,
    pub incoming_rows: usize,
    pub drift: bool,
}

fn is_numeric(values: &[Value]) -> bool {
    let non_null = values.iter().filter(|v| !v.is_null()).count();
    let parsed = values.iter().filter(|v| v.as_f64().is_some()).count();
    non_null > 0 && parsed as f64 >= 0.95 * non_null as f64
}

/// Drift between two tables with matching columns. A reference column is
/// numeric when at least 95% of its non-null cells parse; numeric Nulls and
/// unparsable cells are filled with the reference median before testing.
/// Other columns are compared by category frequencies.
pub fn drift_tables(reference: &Table, incoming: &Table, config: &DriftConfig, seed: u64) -> Result<TableDriftReport> {
    if reference.row_count() == 0 || incoming.row_count() == 0 {
        return Err(Error::EmptySample);
    }
    let mut numeric = Vec::new();
    let mut nominal = Vec::new();
    let mut missing = 0;
    for c in reference.columns() {
        if config.exclude.contains(&c.name) {
            continue;
        }
        match incoming.column(&c.name) {
            None => missing += 1,
            Some(other) if is_numeric(&c.values) => numeric.push((c, other)),
            Some(other) => nominal.push(category_drift(&c.name, &c.values, &other.values, config.category_threshold)),
        }
    }
    if missing > 0 {
        let d = reference.columns().len() - config.exclude.iter().filter(|e| reference.column(e).is_some()).count();
        return Err(Error::DimensionMismatch {
            reference: d,
            incoming: d - missing,
        });
    }
    let numeric_report = if numeric.is_empty() {
        None
    } else {
        let medians: Vec<f64> = numeric
            .iter()
            .map(|(c, _)| {
                let v: Vec<f64> = c.values.iter().filter_map(Value::as_f64).collect();
                stats::median(&v).unwrap_or(0.0)
            })
            .collect();
        let rows = |cols: Vec<&[Value]>, n: usize| -> Vec<Vec<f64>> {
            (0..n)
                .map(|i| cols.iter().zip(&medians).map(|(c, m)| c[i].as_f64().unwrap_or(*m)).collect())
                .collect()
        };
        let r = rows(numeric.iter().map(|(c, _)| c.values.as_slice()).collect(), reference.row_count());
        let s = rows(numeric.iter().map(|(_, c)| c.values.as_slice()).collect(), incoming.row_count());
        let names: Vec<String> = numeric.iter().map(|(c, _)| c.name.clone()).collect();
        Some(detect_drift(&r, &s, &names, config.projections, config.alpha, seed)?)
    };
    let drift = numeric_report.as_ref().is_some_and(|r| r.decision == Decision::Drift) || nominal.iter().any(|c| c.drifted);
    Ok(TableDriftReport {
        numeric: numeric_report,
        nominal,
        reference_rows: reference.row_count(),
        incoming_rows: incoming.row_count(),
        drift,
    })
}
