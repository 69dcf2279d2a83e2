//! Shared statistical utilities: correlation, categorical association, and
//! the dense ridge solver behind penalty fitting.

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Population (biased) standard deviation; used everywhere for determinism.
pub fn population_std(xs: &[f64]) -> f64 {
    let mu = mean(xs);
    (xs.iter().map(|x| (x - mu) * (x - mu)).sum::<f64>() / xs.len() as f64).sqrt()
}

/// Pearson correlation coefficient.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::Precondition(
            "pearson needs two equal-length series of length >= 2".into(),
        ));
    }
    let mx = mean(xs);
    let my = mean(ys);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::Degenerate(
            "pearson undefined for a constant series".into(),
        ));
    }
    Ok(sxy / (sxx * syy).sqrt())
}

/// Cramér's V between two categorical columns (no bias correction).
/// A column with a single observed category yields 0 by convention.
pub fn cramers_v(col_a: &[u32], col_b: &[u32]) -> Result<f64> {
    if col_a.len() != col_b.len() || col_a.is_empty() {
        return Err(Error::Precondition(
            "cramers_v needs two equal-length non-empty columns".into(),
        ));
    }
    let r = (*col_a.iter().max().unwrap() + 1) as usize;
    let c = (*col_b.iter().max().unwrap() + 1) as usize;
    let mut table = vec![vec![0u64; c]; r];
    for (&a, &b) in col_a.iter().zip(col_b) {
        table[a as usize][b as usize] += 1;
    }
    let n = col_a.len() as f64;
    let row_totals: Vec<f64> = table
        .iter()
        .map(|row| row.iter().sum::<u64>() as f64)
        .collect();
    let col_totals: Vec<f64> = (0..c)
        .map(|j| table.iter().map(|row| row[j]).sum::<u64>() as f64)
        .collect();
    let observed_r = row_totals.iter().filter(|&&t| t > 0.0).count();
    let observed_c = col_totals.iter().filter(|&&t| t > 0.0).count();
    let dof = observed_r.min(observed_c).saturating_sub(1);
    if dof == 0 {
        return Ok(0.0);
    }
    let mut chi2 = 0.0;
    for i in 0..r {
        for j in 0..c {
            let expected = row_totals[i] * col_totals[j] / n;
            if expected > 0.0 {
                let d = table[i][j] as f64 - expected;
                chi2 += d * d / expected;
            }
        }
    }
    Ok((chi2 / (n * dof as f64)).sqrt())
}

/// Ridge least squares via normal equations: solves
/// `(X'X + lambda I) beta = X'y` with a dense Cholesky factorization.
#[allow(clippy::needless_range_loop)]
pub fn solve_least_squares(design: &[Vec<f64>], targets: &[f64], lambda: f64) -> Result<Vec<f64>> {
    if design.len() != targets.len() || design.is_empty() {
        return Err(Error::Precondition(
            "design rows must match target length".into(),
        ));
    }
    let p = design[0].len();
    if design.iter().any(|row| row.len() != p) {
        return Err(Error::Precondition("ragged design matrix".into()));
    }
    let mut xtx = vec![vec![0.0f64; p]; p];
    let mut xty = vec![0.0f64; p];
    for (row, &y) in design.iter().zip(targets) {
        for i in 0..p {
            xty[i] += row[i] * y;
            for j in i..p {
                xtx[i][j] += row[i] * row[j];
            }
        }
    }
    for i in 0..p {
        xtx[i][i] += lambda;
        for j in 0..i {
            xtx[i][j] = xtx[j][i];
        }
    }
    cholesky_solve(&mut xtx, &xty).ok_or_else(|| {
        Error::Degenerate("singular normal equations; retry with a ridge term lambda > 0".into())
    })
}

/// In-place Cholesky on a symmetric positive-definite matrix, then
/// forward/back substitution. Returns None when the matrix is not PD.
#[allow(clippy::needless_range_loop)]
fn cholesky_solve(a: &mut [Vec<f64>], b: &[f64]) -> Option<Vec<f64>> {
    let p = b.len();
    for i in 0..p {
        for j in 0..=i {
            let mut sum = a[i][j];
            for k in 0..j {
                sum -= a[i][k] * a[j][k];
            }
            if i == j {
                if sum <= 0.0 || !sum.is_finite() {
                    return None;
                }
                a[i][i] = sum.sqrt();
            } else {
                a[i][j] = sum / a[j][j];
            }
        }
    }
    // L z = b
    let mut z = vec![0.0f64; p];
    for i in 0..p {
        let mut sum = b[i];
        for k in 0..i {
            sum -= a[i][k] * z[k];
        }
        z[i] = sum / a[i][i];
    }
    // L' x = z
    let mut x = vec![0.0f64; p];
    for i in (0..p).rev() {
        let mut sum = z[i];
        for k in i + 1..p {
            sum -= a[k][i] * x[k];
        }
        x[i] = sum / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    /// Explicit two-pass reference: center first, then accumulate.
    fn oracle_pearson(xs: &[f64], ys: &[f64]) -> f64 {
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let cx: Vec<f64> = xs.iter().map(|x| x - mx).collect();
        let cy: Vec<f64> = ys.iter().map(|y| y - my).collect();
        let num: f64 = cx.iter().zip(&cy).map(|(a, b)| a * b).sum();
        let dx: f64 = cx.iter().map(|a| a * a).sum::<f64>().sqrt();
        let dy: f64 = cy.iter().map(|a| a * a).sum::<f64>().sqrt();
        num / (dx * dy)
    }

    #[test]
    fn pearson_endpoints() {
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap(), 1.0);
        assert_eq!(pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn pearson_matches_two_pass_oracle() {
        let mut rng = crate::seed::derive_rng(3, "test-pearson", 0);
        for _ in 0..100 {
            let n = rng.gen_range(2..50);
            let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            let ys: Vec<f64> = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
            if population_std(&xs) == 0.0 || population_std(&ys) == 0.0 {
                continue;
            }
            let got = pearson(&xs, &ys).unwrap();
            assert!((got - oracle_pearson(&xs, &ys)).abs() < 1e-12);
        }
    }

    #[test]
    fn pearson_is_scale_and_shift_invariant() {
        let xs = [1.0, 4.0, 2.0, 8.0];
        let ys = [0.5, 3.0, 1.0, 2.0];
        let shifted: Vec<f64> = xs.iter().map(|x| 3.0 * x + 11.0).collect();
        let a = pearson(&xs, &ys).unwrap();
        let b = pearson(&shifted, &ys).unwrap();
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn cramers_v_identical_columns_is_one() {
        let col = vec![0u32, 0, 1, 1, 2, 2, 0, 1];
        assert!((cramers_v(&col, &col).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cramers_v_symmetric_and_relabel_invariant() {
        let a = vec![0u32, 1, 0, 2, 1, 2, 0, 0, 1];
        let b = vec![1u32, 0, 1, 1, 0, 0, 1, 0, 1];
        let v1 = cramers_v(&a, &b).unwrap();
        assert!((v1 - cramers_v(&b, &a).unwrap()).abs() < 1e-12);
        // Swap labels 0 and 2 in column a.
        let relabeled: Vec<u32> = a
            .iter()
            .map(|&x| match x {
                0 => 2,
                2 => 0,
                other => other,
            })
            .collect();
        assert!((v1 - cramers_v(&relabeled, &b).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn cramers_v_single_category_is_zero() {
        let a = vec![0u32; 6];
        let b = vec![0u32, 1, 0, 1, 0, 1];
        assert_eq!(cramers_v(&a, &b).unwrap(), 0.0);
    }

    #[test]
    fn cramers_v_near_zero_for_independent_columns() {
        let mut rng = crate::seed::derive_rng(5, "test-cramers", 0);
        let n = 10_000;
        let a: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        let b: Vec<u32> = (0..n).map(|_| rng.gen_range(0..4)).collect();
        assert!(cramers_v(&a, &b).unwrap() < 0.05);
    }

    #[test]
    fn least_squares_identity_design() {
        let design = vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ];
        let y = vec![4.0, -2.5, 0.75];
        let beta = solve_least_squares(&design, &y, 0.0).unwrap();
        for (b, t) in beta.iter().zip(&y) {
            assert!((b - t).abs() < 1e-12);
        }
    }

    #[test]
    fn least_squares_matches_hand_elimination() {
        // 2x + y = 5; x + 3y = 10  =>  x = 1, y = 3.
        let design = vec![vec![2.0, 1.0], vec![1.0, 3.0]];
        let y = vec![5.0, 10.0];
        let beta = solve_least_squares(&design, &y, 0.0).unwrap();
        assert!((beta[0] - 1.0).abs() < 1e-10);
        assert!((beta[1] - 3.0).abs() < 1e-10);
    }

    #[test]
    fn huge_ridge_shrinks_to_zero() {
        let design = vec![vec![1.0, 2.0], vec![2.0, 1.0], vec![1.5, 1.5]];
        let y = vec![3.0, 3.0, 3.0];
        let beta = solve_least_squares(&design, &y, 1e12).unwrap();
        assert!(beta.iter().all(|b| b.abs() < 1e-5));
    }

    #[test]
    fn singular_system_advises_ridge() {
        let design = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let y = vec![1.0, 2.0];
        let err = solve_least_squares(&design, &y, 0.0).unwrap_err();
        assert!(err.to_string().contains("lambda"));
        assert!(solve_least_squares(&design, &y, 1e-8).is_ok());
    }

    #[test]
    fn residual_orthogonal_to_design_at_zero_ridge() {
        let mut rng = crate::seed::derive_rng(7, "test-lsq", 0);
        let design: Vec<Vec<f64>> = (0..20)
            .map(|_| (0..3).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let y: Vec<f64> = (0..20).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let beta = solve_least_squares(&design, &y, 0.0).unwrap();
        for j in 0..3 {
            let dot: f64 = design
                .iter()
                .zip(&y)
                .map(|(row, &t)| {
                    let fitted: f64 = row.iter().zip(&beta).map(|(a, b)| a * b).sum();
                    row[j] * (t - fitted)
                })
                .sum();
            assert!(dot.abs() < 1e-8, "column {j} residual dot {dot}");
        }
    }
}
