//! Sparse linear constraints among numeric columns.
//!
//! Columns are robustly standardized (median, 1.4826·MAD; standard deviation
//! when the MAD vanishes) and constant columns dropped. A constraint
//! `a·z = b` is the smallest principal direction of the inlier rows, found by
//! trimmed refitting: fit on the current inliers, keep the rows with the
//! smallest residuals, refit. Small coefficients are zeroed and the
//! direction refit on its support. Further constraints are searched in the
//! orthogonal complement of those already found.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::stats::{self, MAD_TO_SIGMA};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstraintConfig {
    pub residual_tolerance: f64,
    pub min_inlier_fraction: f64,
    pub trim_iterations: usize,
    pub sparsity_ratio: f64,
    pub max_cosine: f64,
    /// Rows beyond this are subsampled (seeded) before fitting.
    pub max_rows: usize,
}

impl Default for ConstraintConfig {
    fn default() -> Self {
        Self {
            residual_tolerance: 1e-6,
            min_inlier_fraction: 0.98,
            trim_iterations: 3,
            sparsity_ratio: 0.05,
            max_cosine: 0.99,
            max_rows: 20_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    /// Support of the constraint, in input order.
    pub columns: Vec<String>,
    /// Unit-norm coefficients on the standardized columns.
    pub coefficients: Vec<f64>,
    /// Right-hand side on the standardized scale.
    pub offset: f64,
    /// Standardization used: `z = (x − center) / scale`.
    pub centers: Vec<f64>,
    pub scales: Vec<f64>,
    /// Unit-norm coefficients and offset in original units.
    pub original_coefficients: Vec<f64>,
    pub original_offset: f64,
    pub inlier_fraction: f64,
    pub residual_tolerance: f64,
}

impl LinearConstraint {
    /// Standardized residual of one row given in support order.
    pub fn residual(&self, row: &[f64]) -> f64 {
        let mut r = -self.offset;
        for (k, x) in row.iter().enumerate() {
            r += self.coefficients[k] * (x - self.centers[k]) / self.scales[k];
        }
        r
    }
}

/// `columns` holds one slice per column (equal lengths); `None` cells drop
/// the row.
pub fn mine_linear_constraints(
    names: &[String],
    columns: &[Vec<Option<f64>>],
    config: &ConstraintConfig,
    seed: u64,
) -> Vec<LinearConstraint> {
    let n_all = columns.first().map_or(0, Vec::len);
    let complete: Vec<usize> = (0..n_all)
        .filter(|&r| columns.iter().all(|c| c[r].is_some()))
        .collect();

    // Standardize; keep non-constant columns.
    let mut keep = Vec::new();
    let mut centers = Vec::new();
    let mut scales = Vec::new();
    for (j, c) in columns.iter().enumerate() {
        let xs: Vec<f64> = complete.iter().map(|&r| c[r].unwrap()).collect();
        let Some(med) = stats::median(&xs) else { continue };
        let mut s = MAD_TO_SIGMA * stats::mad(&xs).unwrap_or(0.0);
        if s <= 1e-12 {
            s = stats::std_dev(&xs).unwrap_or(0.0);
        }
        if s > 1e-12 {
            keep.push(j);
            centers.push(med);
            scales.push(s);
        }
    }
    let d = keep.len();
    if d < 2 || complete.len() < d + 1 {
        return Vec::new();
    }
    let rows: Vec<usize> = if complete.len() > config.max_rows {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut idx: Vec<usize> = sample(&mut rng, complete.len(), config.max_rows)
            .into_iter()
            .map(|i| complete[i])
            .collect();
        idx.sort_unstable();
        idx
    } else {
        complete
    };
    let n = rows.len();
    let z = DMatrix::from_fn(n, d, |i, k| {
        (columns[keep[k]][rows[i]].unwrap() - centers[k]) / scales[k]
    });

    let mut found: Vec<DVector<f64>> = Vec::new();
    let mut out = Vec::new();
    for _ in 0..d - 1 {
        let basis = complement_basis(&found, d);
        if basis.ncols() == 0 {
            break;
        }
        let Some((a, _)) = robust_direction(&z, &basis, config) else { break };
        let a = sparsify(&z, a, config);
        let (a, b) = refit_on_inliers(&z, a, config);
        let inliers = count_inliers(&z, &a, b, config.residual_tolerance);
        let nonzero = a.iter().filter(|v| v.abs() > 0.0).count();
        if (inliers as f64) < config.min_inlier_fraction * n as f64 || nonzero < 2 {
            break;
        }
        found.push(a.clone());
        if out.iter().any(|c: &(DVector<f64>, f64, usize)| c.0.dot(&a).abs() >= config.max_cosine) {
            continue;
        }
        out.push((a, b, inliers));
    }

    out.into_iter()
        .map(|(a, b, inliers)| {
            let support: Vec<usize> = (0..d).filter(|&k| a[k] != 0.0).collect();
            let coefficients: Vec<f64> = support.iter().map(|&k| a[k]).collect();
            let mut orig: Vec<f64> = support.iter().map(|&k| a[k] / scales[k]).collect();
            let mut orig_off = b + support.iter().map(|&k| a[k] * centers[k] / scales[k]).sum::<f64>();
            let norm = orig.iter().map(|v| v * v).sum::<f64>().sqrt();
            orig.iter_mut().for_each(|v| *v /= norm);
            orig_off /= norm;
            LinearConstraint {
                columns: support.iter().map(|&k| names[keep[k]].clone()).collect(),
                coefficients,
                offset: b,
                centers: support.iter().map(|&k| centers[k]).collect(),
                scales: support.iter().map(|&k| scales[k]).collect(),
                original_coefficients: orig,
                original_offset: orig_off,
                inlier_fraction: inliers as f64 / n as f64,
                residual_tolerance: config.residual_tolerance,
            }
        })
        .collect()
}

/// Orthonormal basis (as columns) of the complement of `found`.
fn complement_basis(found: &[DVector<f64>], d: usize) -> DMatrix<f64> {
    let mut basis: Vec<DVector<f64>> = found
        .iter()
        .map(|v| v.normalize())
        .collect();
    let mut comp = Vec::new();
    for k in 0..d {
        let mut e = DVector::zeros(d);
        e[k] = 1.0;
        for b in basis.iter() {
            let p = b.dot(&e);
            e -= b * p;
        }
        let norm = e.norm();
        if norm > 1e-8 {
            let e = e / norm;
            basis.push(e.clone());
            comp.push(e);
        }
    }
    if comp.is_empty() {
        return DMatrix::zeros(d, 0);
    }
    DMatrix::from_columns(&comp)
}

/// Smallest principal direction of the rows in `mask`, restricted to the
/// column span of `basis`; returns the direction (in full coordinates) and
/// its offset.
fn smallest_direction(z: &DMatrix<f64>, basis: &DMatrix<f64>, mask: &[bool]) -> (DVector<f64>, f64) {
    let d = z.ncols();
    let m = mask.iter().filter(|&&b| b).count().max(1) as f64;
    let mut mean = DVector::zeros(d);
    for (i, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
        mean += z.row(i).transpose();
    }
    mean /= m;
    let mut cov = DMatrix::zeros(d, d);
    for (i, _) in mask.iter().enumerate().filter(|(_, &b)| b) {
        let r = z.row(i).transpose() - &mean;
        cov += &r * r.transpose();
    }
    cov /= m;
    let reduced = basis.transpose() * &cov * basis;
    let eig = SymmetricEigen::new(reduced);
    let mut k = 0;
    for i in 1..eig.eigenvalues.len() {
        if eig.eigenvalues[i] < eig.eigenvalues[k] {
            k = i;
        }
    }
    let mut a = basis * eig.eigenvectors.column(k);
    a /= a.norm();
    // Fix the sign: largest-magnitude coefficient positive.
    let imax = a.iamax();
    if a[imax] < 0.0 {
        a = -a;
    }
    let b = a.dot(&mean);
    (a, b)
}

fn residuals(z: &DMatrix<f64>, a: &DVector<f64>, b: f64) -> Vec<f64> {
    (z * a).iter().map(|v| (v - b).abs()).collect()
}

fn trimmed_mask(res: &[f64], keep_fraction: f64) -> Vec<bool> {
    let n = res.len();
    let keep = ((keep_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&i, &j| res[i].total_cmp(&res[j]).then(i.cmp(&j)));
    let mut mask = vec![false; n];
    for &i in &idx[..keep] {
        mask[i] = true;
    }
    mask
}

fn robust_direction(
    z: &DMatrix<f64>,
    basis: &DMatrix<f64>,
    config: &ConstraintConfig,
) -> Option<(DVector<f64>, f64)> {
    let n = z.nrows();
    let mut mask = vec![true; n];
    let mut fit = smallest_direction(z, basis, &mask);
    for _ in 0..config.trim_iterations {
        let res = residuals(z, &fit.0, fit.1);
        let next = trimmed_mask(&res, config.min_inlier_fraction);
        if next == mask {
            break;
        }
        mask = next;
        fit = smallest_direction(z, basis, &mask);
    }
    fit.0.iter().all(|v| v.is_finite()).then_some(fit)
}

fn sparsify(z: &DMatrix<f64>, a: DVector<f64>, config: &ConstraintConfig) -> DVector<f64> {
    let d = a.len();
    let max = a.amax();
    let support: Vec<usize> = (0..d).filter(|&k| a[k].abs() >= config.sparsity_ratio * max).collect();
    if support.len() == d {
        return a;
    }
    let basis = DMatrix::from_fn(d, support.len(), |r, c| f64::from(u8::from(r == support[c])));
    robust_direction(z, &basis, config).map_or(a, |(v, _)| {
        let mut v = v;
        for k in 0..d {
            if !support.contains(&k) {
                v[k] = 0.0;
            }
        }
        v
    })
}

/// Final refit on the rows already within tolerance, restricted to the support.
fn refit_on_inliers(z: &DMatrix<f64>, a: DVector<f64>, config: &ConstraintConfig) -> (DVector<f64>, f64) {
    let d = a.len();
    let support: Vec<usize> = (0..d).filter(|&k| a[k] != 0.0).collect();
    let basis = DMatrix::from_fn(d, support.len(), |r, c| f64::from(u8::from(r == support[c])));
    let (a0, b0) = robust_direction(z, &basis, config).unwrap_or_else(|| {
        let b = median_offset(z, &a);
        (a.clone(), b)
    });
    let res = residuals(z, &a0, b0);
    let mask: Vec<bool> = res.iter().map(|r| *r <= config.residual_tolerance).collect();
    if mask.iter().filter(|&&m| m).count() <= d {
        return (a0, b0);
    }
    let (mut a1, _) = smallest_direction(z, &basis, &mask);
    for k in 0..d {
        if !support.contains(&k) {
            a1[k] = 0.0;
        }
    }
    let b1 = median_offset(z, &a1);
    (a1, b1)
}

fn median_offset(z: &DMatrix<f64>, a: &DVector<f64>) -> f64 {
    let proj: Vec<f64> = (z * a).iter().copied().collect();
    stats::median(&proj).unwrap_or(0.0)
}

fn count_inliers(z: &DMatrix<f64>, a: &DVector<f64>, b: f64, tol: f64) -> usize {
    residuals(z, a, b).iter().filter(|r| **r <= tol).count()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn names(k: usize) -> Vec<String> {
        (0..k).map(|i| format!("c{i}")).collect()
    }

    #[test]
    fn duplicate_column_gives_difference_constraint() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a: Vec<Option<f64>> = (0..300).map(|_| Some(rng.random::<f64>() * 10.0)).collect();
        let cols = vec![a.clone(), a];
        let found = mine_linear_constraints(&names(2), &cols, &ConstraintConfig::default(), 0);
        assert_eq!(found.len(), 1);
        let c = &found[0].original_coefficients;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((c[0] - s).abs() < 1e-9 && (c[1] + s).abs() < 1e-9, "{c:?}");
    }

    #[test]
    fn planted_relation_with_outliers() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1000;
        let mut cols = vec![Vec::new(), Vec::new(), Vec::new()];
        for i in 0..n {
            let a: f64 = StandardNormal.sample(&mut rng);
            let b: f64 = StandardNormal.sample(&mut rng);
            let mut c = 2.0 * a + 3.0 * b;
            if i % 50 == 0 {
                c += rng.random_range(5.0..20.0);
            }
            cols[0].push(Some(a));
            cols[1].push(Some(b));
            cols[2].push(Some(c));
        }
        let found = mine_linear_constraints(&names(3), &cols, &ConstraintConfig::default(), 0);
        assert_eq!(found.len(), 1);
        let truth = [2.0, 3.0, -1.0];
        let norm = 14f64.sqrt();
        let cos: f64 = found[0]
            .original_coefficients
            .iter()
            .zip(truth)
            .map(|(x, t)| x * t / norm)
            .sum();
        assert!(1.0 - cos.abs() < 1e-6, "cos {cos}");
        assert!(found[0].inlier_fraction >= 0.98);
    }

    #[test]
    fn independent_columns_give_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cols: Vec<Vec<Option<f64>>> = (0..5)
            .map(|_| (0..1000).map(|_| Some(StandardNormal.sample(&mut rng))).collect())
            .collect();
        assert!(mine_linear_constraints(&names(5), &cols, &ConstraintConfig::default(), 0).is_empty());
    }

    #[test]
    fn constant_columns_are_ignored() {
        let cols = vec![vec![Some(1.0); 50], (0..50).map(|i| Some(i as f64)).collect()];
        assert!(mine_linear_constraints(&names(2), &cols, &ConstraintConfig::default(), 0).is_empty());
    }
}
