//! Near functional dependencies via a level-wise lattice search.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::table::{Table, Value};

/// Name of the virtual row-identifier column. It only appears as a
/// right-hand side.
pub const ROW_ID: &str = "rowID";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NearFd {
    pub lhs: Vec<String>,
    pub rhs: String,
    pub violation_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FdConfig {
    pub epsilon: f64,
    pub max_lhs: usize,
    /// Tables wider than this are refused; `None` disables the cap.
    pub column_cap: Option<usize>,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            epsilon: 0.0,
            max_lhs: 2,
            column_cap: Some(64),
        }
    }
}

/// Column values replaced by dense integer codes; Null gets a code of its own.
#[derive(Debug, Clone)]
pub struct Encoded {
    pub names: Vec<String>,
    pub codes: Vec<Vec<u32>>,
    pub rows: usize,
}

impl Encoded {
    pub fn new(table: &Table) -> Self {
        let codes = table
            .columns()
            .iter()
            .map(|c| {
                let mut dict: HashMap<&Value, u32> = HashMap::new();
                c.values
                    .iter()
                    .map(|v| {
                        let next = dict.len() as u32;
                        *dict.entry(v).or_insert(next)
                    })
                    .collect()
            })
            .collect();
        Self {
            names: table.column_names().iter().map(|s| s.to_string()).collect(),
            codes,
            rows: table.row_count(),
        }
    }

    /// Group id per row for the given column set.
    pub fn partition(&self, cols: &[usize]) -> (Vec<u32>, usize) {
        if cols.is_empty() {
            return (vec![0; self.rows], usize::from(self.rows > 0));
        }
        if cols.len() == 1 {
            let c = &self.codes[cols[0]];
            let groups = c.iter().copied().max().map_or(0, |m| m as usize + 1);
            return (c.clone(), groups);
        }
        let mut dict: HashMap<Vec<u32>, u32> = HashMap::new();
        let ids = (0..self.rows)
            .map(|r| {
                let key: Vec<u32> = cols.iter().map(|&c| self.codes[c][r]).collect();
                let next = dict.len() as u32;
                *dict.entry(key).or_insert(next)
            })
            .collect();
        (ids, dict.len())
    }

    /// 1 − (Σ over lhs-groups of the max rhs frequency) / rows. `rhs = None`
    /// stands for the row identifier.
    pub fn violation(&self, lhs: &[usize], rhs: Option<usize>) -> f64 {
        if self.rows == 0 {
            return 0.0;
        }
        let (groups, count) = self.partition(lhs);
        let kept = match rhs {
            None => count,
            Some(y) => kept_rows(&groups, &self.codes[y]),
        };
        1.0 - kept as f64 / self.rows as f64
    }

    /// Violation of `lhs → rhs` where both sides are column sets.
    pub fn set_violation(&self, lhs: &[usize], rhs: &[usize]) -> f64 {
        if self.rows == 0 {
            return 0.0;
        }
        let (groups, _) = self.partition(lhs);
        let (targets, _) = self.partition(rhs);
        1.0 - kept_rows(&groups, &targets) as f64 / self.rows as f64
    }
}

fn kept_rows(groups: &[u32], targets: &[u32]) -> usize {
    let mut counts: HashMap<(u32, u32), usize> = HashMap::new();
    for (g, t) in groups.iter().zip(targets) {
        *counts.entry((*g, *t)).or_default() += 1;
    }
    let mut best: HashMap<u32, usize> = HashMap::new();
    for ((g, _), c) in counts {
        let e = best.entry(g).or_default();
        *e = (*e).max(c);
    }
    best.values().sum()
}

pub(crate) fn check_cap(columns: usize, config: &FdConfig) -> Result<()> {
    match config.column_cap {
        Some(cap) if columns > cap => Err(Error::ComplexityCap { columns, cap }),
        _ => Ok(()),
    }
}

/// All minimal near-FDs `X → Y` with `1 ≤ |X| ≤ max_lhs` and violation at
/// most `epsilon`. `Y` ranges over the columns and the virtual row id.
///
/// Violation is monotone non-increasing as `X` grows, so minimality only
/// needs the subsets one level down. Output is ordered by `|X|`, then by
/// column position of `X`, then of `Y` (row id last).
pub fn mine_near_fds(table: &Table, config: &FdConfig) -> Result<Vec<NearFd>> {
    let d = table.columns().len();
    check_cap(d, config)?;
    let enc = Encoded::new(table);
    let eps = config.epsilon + 1e-12;
    let targets: Vec<Option<usize>> = (0..d).map(Some).chain(std::iter::once(None)).collect();

    // holds[(lhs, rhs)] for the previous level.
    let mut prev: HashMap<Vec<usize>, Vec<bool>> = HashMap::new();
    let mut out = Vec::new();
    for size in 1..=config.max_lhs.min(d) {
        let mut level: HashMap<Vec<usize>, Vec<bool>> = HashMap::new();
        let sets = combinations(d, size);
        let results: Vec<(Vec<usize>, Vec<bool>, Vec<NearFd>)> = {
            use rayon::prelude::*;
            sets.into_par_iter()
                .map(|lhs| {
                    let mut holds = vec![false; targets.len()];
                    let mut found = Vec::new();
                    for (ti, &rhs) in targets.iter().enumerate() {
                        if rhs.is_some_and(|y| lhs.contains(&y)) {
                            continue;
                        }
                        let sub_holds = size > 1
                            && (0..size).any(|drop| {
                                let sub: Vec<usize> = lhs
                                    .iter()
                                    .enumerate()
                                    .filter(|(i, _)| *i != drop)
                                    .map(|(_, c)| *c)
                                    .collect();
                                prev.get(&sub).is_some_and(|h| h[ti])
                            });
                        if sub_holds {
                            holds[ti] = true;
                            continue;
                        }
                        let v = enc.violation(&lhs, rhs);
                        if v <= eps {
                            holds[ti] = true;
                            found.push(NearFd {
                                lhs: lhs.iter().map(|&c| enc.names[c].clone()).collect(),
                                rhs: rhs.map_or(ROW_ID.to_string(), |y| enc.names[y].clone()),
                                violation_fraction: v,
                            });
                        }
                    }
                    (lhs, holds, found)
                })
                .collect()
        };
        for (lhs, holds, found) in results {
            out.extend(found);
            level.insert(lhs, holds);
        }
        prev = level;
    }
    Ok(out)
}

/// k-subsets of 0..n in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if k == 0 || k > n {
        return out;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        out.push(idx.clone());
        let mut i = k;
        while i > 0 && idx[i - 1] == n - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return out;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
