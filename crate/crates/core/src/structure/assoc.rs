//! Pairwise association scores and the thresholded association graph.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::infer::{ColumnProfile, Scale};
use crate::stats;
use crate::table::{Column, Table, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum AssocKind {
    #[serde(rename = "GK")]
    GoodmanKruskal,
    #[serde(rename = "spearman")]
    Spearman,
    #[serde(rename = "NMI")]
    Nmi,
}

impl AssocKind {
    pub fn label(self) -> &'static str {
        match self {
            AssocKind::GoodmanKruskal => "GK",
            AssocKind::Spearman => "spearman",
            AssocKind::Nmi => "NMI",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssocScore {
    pub score: f64,
    /// Signed coefficient for Spearman; equal to `score` otherwise.
    pub signed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssocEdge {
    pub from: String,
    pub to: String,
    pub kind: AssocKind,
    pub score: f64,
    pub signed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssociationGraph {
    pub nodes: Vec<String>,
    pub edges: Vec<AssocEdge>,
    pub threshold: f64,
    /// Single-column keys (unique, no Null); their outgoing GK edges are
    /// trivially perfect.
    pub key_columns: Vec<String>,
}

impl AssociationGraph {
    /// Copy without edges leaving key columns.
    pub fn without_key_edges(&self) -> Self {
        Self {
            edges: self
                .edges
                .iter()
                .filter(|e| !self.key_columns.contains(&e.from))
                .cloned()
                .collect(),
            ..self.clone()
        }
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }
}

pub const NMI_BINS: usize = 10;

/// Score of the requested kind, or `None` when the kind does not fit the
/// columns' scales or the score is undefined (constant side).
pub fn association_score(
    a: &Column,
    b: &Column,
    kind: AssocKind,
    pa: &ColumnProfile,
    pb: &ColumnProfile,
) -> Option<AssocScore> {
    match kind {
        AssocKind::GoodmanKruskal => {
            if !(pa.is_nominal() && pb.is_nominal()) {
                return None;
            }
            let (x, y) = paired_categories(a, b);
            goodman_kruskal_tau(&x, &y).map(|s| AssocScore { score: s, signed: s })
        }
        AssocKind::Spearman => {
            if !(pa.is_numeric() && pb.is_numeric()) {
                return None;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = a
                .values
                .iter()
                .zip(&b.values)
                .filter_map(|(u, v)| Some((pa.numeric_value(u)?, pb.numeric_value(v)?)))
                .unzip();
            let rho = stats::spearman(&x, &y)?;
            Some(AssocScore {
                score: rho.abs(),
                signed: rho,
            })
        }
        AssocKind::Nmi => {
            let (nom, num, pnum) = match (pa.scale, pb.scale) {
                (Scale::Nominal, Scale::NumericMeaningful) => (a, b, pb),
                (Scale::NumericMeaningful, Scale::Nominal) => (b, a, pa),
                _ => return None,
            };
            let (cats, xs): (Vec<String>, Vec<f64>) = nom
                .values
                .iter()
                .zip(&num.values)
                .filter_map(|(c, v)| Some((c.as_text()?.into_owned(), pnum.numeric_value(v)?)))
                .unzip();
            let bins = quantile_bins(&xs, NMI_BINS);
            normalized_mutual_information(&cats, &bins).map(|s| AssocScore { score: s, signed: s })
        }
    }
}

fn paired_categories(a: &Column, b: &Column) -> (Vec<String>, Vec<String>) {
    a.values
        .iter()
        .zip(&b.values)
        .filter(|(u, v)| !u.is_null() && !v.is_null())
        .map(|(u, v)| (cat(u), cat(v)))
        .unzip()
}

fn cat(v: &Value) -> String {
    v.as_text().map(|s| s.into_owned()).unwrap_or_default()
}

/// Goodman–Kruskal τ(A → B) = (V(B) − E[V(B|A)]) / V(B) with Gini variation.
pub fn goodman_kruskal_tau<T: Ord>(a: &[T], b: &[T]) -> Option<f64> {
    let n = a.len();
    if n == 0 {
        return None;
    }
    let mut b_counts: BTreeMap<&T, usize> = BTreeMap::new();
    let mut joint: BTreeMap<&T, BTreeMap<&T, usize>> = BTreeMap::new();
    for (x, y) in a.iter().zip(b) {
        *b_counts.entry(y).or_default() += 1;
        *joint.entry(x).or_default().entry(y).or_default() += 1;
    }
    let nf = n as f64;
    let gini = |counts: &mut dyn Iterator<Item = usize>, total: f64| {
        1.0 - counts.map(|c| (c as f64 / total).powi(2)).sum::<f64>()
    };
    let vb = gini(&mut b_counts.values().copied(), nf);
    if vb <= 1e-15 {
        return None;
    }
    let mut expected = 0.0;
    for row in joint.values() {
        let na: usize = row.values().sum();
        expected += na as f64 / nf * gini(&mut row.values().copied(), na as f64);
    }
    Some(((vb - expected) / vb).clamp(0.0, 1.0))
}

/// Bin index per value using interior quantile cut points; tied cut points
/// collapse into one.
pub fn quantile_bins(xs: &[f64], bins: usize) -> Vec<usize> {
    if xs.is_empty() {
        return Vec::new();
    }
    let sorted = stats::sorted(xs);
    let mut cuts: Vec<f64> = (1..bins)
        .map(|k| stats::quantile_sorted(&sorted, k as f64 / bins as f64))
        .collect();
    cuts.dedup();
    xs.iter().map(|x| cuts.iter().filter(|c| x > c).count()).collect()
}

/// I(X;Y) / ((H(X) + H(Y)) / 2); `None` when either entropy is zero.
pub fn normalized_mutual_information<A, B>(x: &[A], y: &[B]) -> Option<f64>
where
    A: Ord,
    B: Ord,
{
    let mut cx: BTreeMap<&A, usize> = BTreeMap::new();
    let mut cy: BTreeMap<&B, usize> = BTreeMap::new();
    let mut cxy: BTreeMap<(&A, &B), usize> = BTreeMap::new();
    for (a, b) in x.iter().zip(y) {
        *cx.entry(a).or_default() += 1;
        *cy.entry(b).or_default() += 1;
        *cxy.entry((a, b)).or_default() += 1;
    }
    let hx = stats::entropy(cx.values().copied());
    let hy = stats::entropy(cy.values().copied());
    if hx <= 1e-15 || hy <= 1e-15 {
        return None;
    }
    let hxy = stats::entropy(cxy.values().copied());
    let mi = hx + hy - hxy;
    Some((mi / ((hx + hy) / 2.0)).clamp(0.0, 1.0))
}

pub fn build_association_graph(
    table: &Table,
    profiles: &[ColumnProfile],
    threshold: f64,
) -> AssociationGraph {
    use rayon::prelude::*;
    let cols = table.columns();
    let d = cols.len();
    let pairs: Vec<(usize, usize)> = (0..d)
        .flat_map(|i| (0..d).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let per_pair: Vec<Vec<AssocEdge>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (pa, pb) = (&profiles[i], &profiles[j]);
            let mut out = Vec::new();
            let mut push = |kind: AssocKind| {
                if let Some(s) = association_score(&cols[i], &cols[j], kind, pa, pb) {
                    if s.score >= threshold {
                        out.push(AssocEdge {
                            from: cols[i].name.clone(),
                            to: cols[j].name.clone(),
                            kind,
                            score: s.score,
                            signed: s.signed,
                        });
                    }
                }
            };
            if pa.is_nominal() && pb.is_nominal() {
                push(AssocKind::GoodmanKruskal);
            } else if pa.is_numeric() && pb.is_numeric() {
                push(AssocKind::Spearman);
            } else {
                push(AssocKind::Nmi);
            }
            out
        })
        .collect();

    let key_columns = cols
        .iter()
        .zip(profiles)
        .filter(|(c, p)| {
            c.null_count() == 0 && p.distinct_count == table.row_count() && table.row_count() > 1
        })
        .map(|(c, _)| c.name.clone())
        .collect();
    AssociationGraph {
        nodes: cols.iter().map(|c| c.name.clone()).collect(),
        edges: per_pair.into_iter().flatten().collect(),
        threshold,
        key_columns,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn contingency(cells: &[(&'static str, &'static str, usize)]) -> (Vec<&'static str>, Vec<&'static str>) {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for &(x, y, n) in cells {
            for _ in 0..n {
                a.push(x);
                b.push(y);
            }
        }
        (a, b)
    }

    /// Direct evaluation of τ from a contingency table of counts.
    fn tau_oracle(table: &[[f64; 2]; 2]) -> f64 {
        let n: f64 = table.iter().flatten().sum();
        let col = [table[0][0] + table[1][0], table[0][1] + table[1][1]];
        let vb = 1.0 - col.iter().map(|c| (c / n).powi(2)).sum::<f64>();
        let mut e = 0.0;
        for row in table {
            let na: f64 = row.iter().sum();
            if na > 0.0 {
                e += na / n * (1.0 - row.iter().map(|c| (c / na).powi(2)).sum::<f64>());
            }
        }
        (vb - e) / vb
    }

    #[test]
    fn gk_on_perfect_and_independent_tables() {
        let (a, b) = contingency(&[("a", "u", 30), ("b", "v", 70)]);
        assert_eq!(goodman_kruskal_tau(&a, &b), Some(1.0));
        let (a, b) = contingency(&[("a", "u", 25), ("a", "v", 25), ("b", "u", 25), ("b", "v", 25)]);
        assert!(goodman_kruskal_tau(&a, &b).unwrap().abs() < 1e-12);
        let (a, b) = contingency(&[("a", "u", 20), ("a", "v", 5), ("b", "u", 10), ("b", "v", 15)]);
        let expected = tau_oracle(&[[20.0, 5.0], [10.0, 15.0]]);
        assert!((goodman_kruskal_tau(&a, &b).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn gk_undefined_for_constant_target() {
        assert_eq!(goodman_kruskal_tau(&["a", "b"], &["u", "u"]), None);
    }

    #[test]
    fn quantile_bins_collapse_ties() {
        let xs = vec![1.0; 20];
        assert!(quantile_bins(&xs, 10).iter().all(|&b| b == 0));
        let xs: Vec<f64> = (0..100).map(f64::from).collect();
        let bins = quantile_bins(&xs, 10);
        assert_eq!(*bins.iter().max().unwrap(), 9);
    }

    proptest! {
        #[test]
        fn gk_invariant_under_relabeling(
            pairs in prop::collection::vec((0u8..4, 0u8..3), 5..80)
        ) {
            let a: Vec<u8> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            let a2: Vec<u8> = a.iter().map(|x| (x + 1) % 4 + 10).collect();
            let b2: Vec<u8> = b.iter().map(|x| 2 - x).collect();
            let s1 = goodman_kruskal_tau(&a, &b);
            let s2 = goodman_kruskal_tau(&a2, &b2);
            match (s1, s2) {
                (Some(x), Some(y)) => prop_assert!((x - y).abs() < 1e-12),
                (None, None) => {}
                other => prop_assert!(false, "{other:?}"),
            }
        }

        #[test]
        fn nmi_is_symmetric_and_bounded(
            pairs in prop::collection::vec((0u8..5, 0u8..4), 2..80)
        ) {
            let a: Vec<u8> = pairs.iter().map(|p| p.0).collect();
            let b: Vec<u8> = pairs.iter().map(|p| p.1).collect();
            let s1 = normalized_mutual_information(&a, &b);
            let s2 = normalized_mutual_information(&b, &a);
            prop_assert_eq!(s1.is_some(), s2.is_some());
            if let (Some(x), Some(y)) = (s1, s2) {
                prop_assert!((x - y).abs() < 1e-12);
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }

        #[test]
        fn spearman_invariant_under_monotone_transform(
            xs in prop::collection::vec(-100.0f64..100.0, 3..50),
            ys in prop::collection::vec(-100.0f64..100.0, 3..50),
        ) {
            let n = xs.len().min(ys.len());
            let (x, y) = (&xs[..n], &ys[..n]);
            let fx: Vec<f64> = x.iter().map(|v| 3.0 * v + 7.0).collect();
            let fy: Vec<f64> = y.iter().map(|v| v.powi(3)).collect();
            match (stats::spearman(x, y), stats::spearman(&fx, &fy)) {
                (Some(a), Some(b)) => prop_assert!((a - b).abs() < 1e-9),
                (None, None) => {}
                other => prop_assert!(false, "{other:?}"),
            }
        }
    }
}
