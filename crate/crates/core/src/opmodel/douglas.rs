use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct DouglasResult {
    /// `Ran(A) ⊆ Ran(B)` by the rank criterion.
    pub included: bool,
    /// Smallest `λ` with `A A^T <= λ B B^T`, when included.
    pub lambda: Option<f64>,
    pub rank_b: usize,
    pub rank_ab: usize,
    /// Unit `v` with `B^T v = 0` and `A^T v != 0`, when not included.
    pub witness: Option<DVector<f64>>,
}

fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0f64, |acc, x| acc.max(x.abs()))
}

/// Rank by Gaussian elimination with full pivoting; pivots at most
/// `threshold` in magnitude count as zero.
fn rank(mut m: DMatrix<f64>, threshold: f64) -> usize {
    let (rows, cols) = m.shape();
    let mut r = 0;
    while r < rows.min(cols) {
        let (mut pi, mut pj, mut best) = (r, r, 0.0f64);
        for i in r..rows {
            for j in r..cols {
                if m[(i, j)].abs() > best {
                    (pi, pj, best) = (i, j, m[(i, j)].abs());
                }
            }
        }
        if best <= threshold {
            break;
        }
        m.swap_rows(r, pi);
        m.swap_columns(r, pj);
        for i in r + 1..rows {
            let f = m[(i, r)] / m[(r, r)];
            if f != 0.0 {
                for j in r..cols {
                    let d = f * m[(r, j)];
                    m[(i, j)] -= d;
                }
            }
        }
        r += 1;
    }
    r
}

/// Eigenpairs of a symmetric matrix, eigenvalues in decreasing order.
fn sorted_eigen(m: DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let SymmetricEigen {
        eigenvalues,
        eigenvectors,
    } = SymmetricEigen::new(m);
    let mut order: Vec<usize> = (0..eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eigenvalues[j].total_cmp(&eigenvalues[i]));
    let vals = order.iter().map(|&i| eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(
        &order
            .iter()
            .map(|&i| eigenvectors.column(i).into_owned())
            .collect::<Vec<_>>(),
    );
    (vals, vecs)
}

fn check_shapes(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<()> {
    if !a.is_square() {
        return Err(Error::DimensionMismatch(a.nrows(), a.ncols()));
    }
    if a.shape() != b.shape() {
        return Err(Error::DimensionMismatch(a.nrows(), b.nrows()));
    }
    Ok(())
}

/// `min eig(λ B B^T - A A^T)` divided by the larger entry scale of the two
/// terms. The PSD test at tolerance `tol` passes iff this is `>= -tol`.
pub fn psd_margin(a: &DMatrix<f64>, b: &DMatrix<f64>, lambda: f64) -> Result<f64> {
    check_shapes(a, b)?;
    let bb = b * b.transpose() * lambda;
    let aa = a * a.transpose();
    let scale = max_abs(&bb).max(max_abs(&aa)).max(f64::MIN_POSITIVE);
    let m = &bb - &aa;
    let m = (&m + m.transpose()) * 0.5;
    let min = SymmetricEigen::new(m)
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(min / scale)
}

/// Range inclusion `Ran(A) ⊆ Ran(B)` for square real matrices, with the
/// optimal constant in `A A^T <= λ B B^T`.
pub fn douglas_findim(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<DouglasResult> {
    check_shapes(a, b)?;
    if !(tol > 0.0) {
        return Err(Error::BadArgument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let n = a.nrows();
    let threshold = tol * max_abs(a).max(max_abs(b));
    let rank_b = rank(b.clone(), threshold);
    let rank_ab = rank(
        DMatrix::from_fn(
            n,
            2 * n,
            |i, j| if j < n { b[(i, j)] } else { a[(i, j - n)] },
        ),
        threshold,
    );
    let included = rank_ab == rank_b;

    let (vals, vecs) = sorted_eigen(b * b.transpose());
    if !included {
        // the complement of the top rank_b eigenvectors spans null(B^T)
        let witness = (rank_b..n)
            .map(|k| vecs.column(k).into_owned())
            .max_by(|u, v| {
                (a.transpose() * u)
                    .norm()
                    .total_cmp(&(a.transpose() * v).norm())
            });
        return Ok(DouglasResult {
            included,
            lambda: None,
            rank_b,
            rank_ab,
            witness,
        });
    }
    // on Ran(B), B B^T = U_r S U_r^T; λ is the top eigenvalue of
    // S^{-1/2} U_r^T A A^T U_r S^{-1/2}
    let lambda = if rank_b == 0 {
        0.0
    } else {
        let w = DMatrix::from_fn(rank_b, n, |i, j| vecs[(j, i)] / vals[i].sqrt());
        let m = &w * a * a.transpose() * w.transpose();
        let m = (&m + m.transpose()) * 0.5;
        sorted_eigen(m).0[0].max(0.0)
    };
    let margin = psd_margin(a, b, lambda)?;
    if margin < -tol {
        return Err(Error::Invariant(format!(
            "λ = {lambda} fails the PSD check (margin {margin:e})"
        )));
    }
    Ok(DouglasResult {
        included,
        lambda: Some(lambda),
        rank_b,
        rank_ab,
        witness: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
    }

    #[test]
    fn identical_matrices() {
        let a = m(&[&[2.0, 1.0, 0.0], &[1.0, 3.0, 1.0], &[0.0, 1.0, 4.0]]);
        let r = douglas_findim(&a, &a, 1e-10).unwrap();
        assert!(r.included);
        assert!((r.lambda.unwrap() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn invertible_b_contains_everything() {
        let a = m(&[&[5.0, -1.0], &[7.0, 2.0]]);
        let b = m(&[&[1.0, 0.0], &[0.0, 2.0]]);
        let r = douglas_findim(&a, &b, 1e-10).unwrap();
        assert!(r.included);
        assert!(psd_margin(&a, &b, r.lambda.unwrap()).unwrap() >= -1e-10);
        assert!(psd_margin(&a, &b, r.lambda.unwrap() * 0.99).unwrap() < 0.0);
    }

    #[test]
    fn vector_outside_coordinate_projection() {
        let b = m(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0]]);
        let a = m(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0]]);
        let r = douglas_findim(&a, &b, 1e-10).unwrap();
        assert!(!r.included);
        let v = r.witness.unwrap();
        assert!((b.transpose() * &v).norm() < 1e-12);
        assert!((a.transpose() * &v).norm() > 0.5);
        for lambda in [1.0, 1e3, 1e6] {
            assert!(psd_margin(&a, &b, lambda).unwrap() < -1e-8);
        }
    }

    #[test]
    fn range_inside_singular_b() {
        let b = m(&[&[1.0, 0.0, 0.0], &[0.0, 2.0, 0.0], &[0.0, 0.0, 0.0]]);
        let a = m(&[&[3.0, 1.0, 0.0], &[0.0, 4.0, 0.0], &[0.0, 0.0, 0.0]]);
        let r = douglas_findim(&a, &b, 1e-10).unwrap();
        assert!(r.included);
        assert_eq!(r.rank_b, 2);
    }

    #[test]
    fn shape_errors() {
        let a = DMatrix::<f64>::zeros(2, 2);
        let b = DMatrix::<f64>::zeros(3, 3);
        assert!(matches!(
            douglas_findim(&a, &b, 1e-8),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }
}
