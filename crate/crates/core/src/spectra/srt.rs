use nalgebra::{Complex, DMatrix};

use super::cantor::cylinder_means;
use crate::error::{Error, Result};
use crate::rat;

/// Environment variable capping truncation sizes.
pub const MAX_N_VAR: &str = "DOMAINGAUGE_MAX_N";

/// Largest truncation size allowed by the environment (default `4096`).
pub fn max_matrix_size() -> usize {
    std::env::var(MAX_N_VAR)
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(4096)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineMap {
    pub slope: f64,
    pub intercept: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        slope: 1.0,
        intercept: 0.0,
    };

    pub fn apply(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Symmetric truncation. The test family is the standard basis, vector `n`
/// (1-based) carrying weight `2^{-n}`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedOp {
    matrix: DMatrix<f64>,
    pub label: String,
}

impl TruncatedOp {
    pub fn diagonal(entries: &[f64], label: impl Into<String>) -> Self {
        TruncatedOp {
            matrix: DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(entries)),
            label: label.into(),
        }
    }

    /// Symmetrizes `m` as `(m + m^T) / 2`.
    pub fn symmetric(m: DMatrix<f64>, label: impl Into<String>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::DimensionMismatch(m.nrows(), m.ncols()));
        }
        let matrix = (&m + m.transpose()) * 0.5;
        Ok(TruncatedOp {
            matrix,
            label: label.into(),
        })
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// Eigenvalues in increasing order.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self
            .matrix
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

pub fn identity(n: usize) -> TruncatedOp {
    TruncatedOp::diagonal(&vec![1.0; n], "identity")
}

/// Multiplication by `f` on depth-`depth` cylinders: `diag(f(E[X | C_w]))`.
pub fn mult_op(depth: u32, f: AffineMap) -> Result<TruncatedOp> {
    if depth == 0 {
        return Err(Error::BadArgument("depth must be at least 1".into()));
    }
    if depth >= usize::BITS - 1 || 1usize << depth > max_matrix_size() {
        return Err(Error::BadArgument(format!(
            "2^{depth} exceeds the matrix size cap"
        )));
    }
    let entries: Vec<f64> = cylinder_means(depth)
        .iter()
        .map(|c| f.apply(rat::to_f64(c)))
        .collect();
    Ok(TruncatedOp::diagonal(
        &entries,
        format!("mult(depth={depth})"),
    ))
}

/// `(A - i)^{-1}` applied to each test vector.
pub struct Resolvents {
    columns: DMatrix<Complex<f64>>,
}

impl Resolvents {
    pub fn new(a: &TruncatedOp) -> Result<Self> {
        let n = a.dim();
        let shifted = DMatrix::from_fn(n, n, |i, j| {
            Complex::new(a.matrix[(i, j)], if i == j { -1.0 } else { 0.0 })
        });
        let columns = shifted
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Invariant("A - i is singular for a symmetric A".into()))?;
        Ok(Resolvents { columns })
    }

    /// `sum_n 2^{-n} ||R_A e_n - R_B e_n||`.
    pub fn distance(&self, other: &Resolvents) -> Result<f64> {
        self.distance_on(other, self.columns.ncols())
    }

    /// The same sum restricted to the first `m` test vectors.
    pub fn distance_on(&self, other: &Resolvents, m: usize) -> Result<f64> {
        if self.columns.shape() != other.columns.shape() {
            return Err(Error::DimensionMismatch(
                self.columns.nrows(),
                other.columns.nrows(),
            ));
        }
        let mut total = 0.0;
        let mut w = 1.0;
        for j in 0..m.min(self.columns.ncols()) {
            w *= 0.5;
            total += w * (self.columns.column(j) - other.columns.column(j)).norm();
        }
        Ok(total)
    }
}

/// Weighted strong-resolvent pseudo-distance.
pub fn srt_dist(a: &TruncatedOp, b: &TruncatedOp) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch(a.dim(), b.dim()));
    }
    Resolvents::new(a)?.distance(&Resolvents::new(b)?)
}

/// `diag(a_1..a_k, then reps rounds of a_1..a_k)`: the first `k` values once,
/// followed by each value on its own residue class of the remaining
/// `k * reps` slots.
pub fn interleave_approx(a: &[f64], k: usize, reps: usize) -> Result<TruncatedOp> {
    if k == 0 || k > a.len() {
        return Err(Error::BadArgument(format!(
            "k must lie in 1..={}, got {k}",
            a.len()
        )));
    }
    if reps == 0 {
        return Err(Error::BadArgument("reps must be at least 1".into()));
    }
    let size = k + k * reps;
    if size > max_matrix_size() {
        return Err(Error::BadArgument(format!(
            "size {size} exceeds the matrix size cap"
        )));
    }
    let entries: Vec<f64> = (0..size)
        .map(|i| a[if i < k { i } else { (i - k) % k }])
        .collect();
    Ok(TruncatedOp::diagonal(
        &entries,
        format!("interleave(k={k}, reps={reps})"),
    ))
}

/// `diag(a)` padded with zeros to `size`.
pub fn interleave_target(a: &[f64], size: usize) -> TruncatedOp {
    let entries: Vec<f64> = (0..size)
        .map(|i| a.get(i).copied().unwrap_or(0.0))
        .collect();
    TruncatedOp::diagonal(&entries, "target")
}

/// Distance between `interleave_approx(a, k, reps)` and `diag(a)` on the
/// `a.len()` test vectors they share; the approximation is zero-padded to
/// the common size `a.len() * (reps + 1)`.
pub fn interleave_distance(a: &[f64], k: usize, reps: usize) -> Result<f64> {
    let approx = interleave_approx(a, k, reps)?;
    let size = a.len() * (reps + 1);
    let padded: Vec<f64> = (0..size)
        .map(|i| {
            if i < approx.dim() {
                approx.matrix[(i, i)]
            } else {
                0.0
            }
        })
        .collect();
    let approx = TruncatedOp::diagonal(&padded, approx.label);
    Resolvents::new(&approx)?.distance_on(&Resolvents::new(&interleave_target(a, size))?, a.len())
}

/// Each diagonal entry `λ` of a diagonal operator becomes a `2^depth` block
/// `λ + width (X - 1/2)` of Cantor multiplication; blocks are laid out in
/// the order of the original basis.
pub fn smear(a: &TruncatedOp, depth: u32, width: f64) -> Result<TruncatedOp> {
    let blocks = block_layout(a, depth)?;
    let means: Vec<f64> = cylinder_means(depth).iter().map(rat::to_f64).collect();
    let entries: Vec<f64> = blocks
        .iter()
        .flat_map(|&l| means.iter().map(move |c| l + width * (c - 0.5)))
        .collect();
    Ok(TruncatedOp::diagonal(
        &entries,
        format!("smear(depth={depth}, width={width})"),
    ))
}

/// Each diagonal entry `λ` repeated on a `2^depth` block.
pub fn inflate(a: &TruncatedOp, depth: u32) -> Result<TruncatedOp> {
    let blocks = block_layout(a, depth)?;
    let entries: Vec<f64> = blocks
        .iter()
        .flat_map(|&l| std::iter::repeat_n(l, 1 << depth))
        .collect();
    Ok(TruncatedOp::diagonal(
        &entries,
        format!("inflate(depth={depth})"),
    ))
}

/// Diagonalize, interleave the first `k` eigenvalues, then smear each entry
/// into a Cantor block. Only the individual steps carry error bounds.
pub fn density_pipeline(
    a: &TruncatedOp,
    k: usize,
    reps: usize,
    depth: u32,
    width: f64,
) -> Result<TruncatedOp> {
    smear(&interleave_approx(&a.spectrum(), k, reps)?, depth, width)
}

fn block_layout(a: &TruncatedOp, depth: u32) -> Result<Vec<f64>> {
    let n = a.dim();
    if (0..n).any(|i| (0..n).any(|j| i != j && a.matrix[(i, j)] != 0.0)) {
        return Err(Error::BadArgument(
            "block layout needs a diagonal operator".into(),
        ));
    }
    if depth >= 20 || n << depth > max_matrix_size() {
        return Err(Error::BadArgument(
            "blocked size exceeds the matrix size cap".into(),
        ));
    }
    Ok((0..n).map(|i| a.matrix[(i, i)]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn random_sym(rng: &mut rand_chacha::ChaCha8Rng, n: usize) -> TruncatedOp {
        TruncatedOp::symmetric(DMatrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0)), "r")
            .unwrap()
    }

    #[test]
    fn multiplication_examples() {
        let m = mult_op(1, AffineMap::IDENTITY).unwrap();
        assert!((m.matrix()[(0, 0)] - 1.0 / 6.0).abs() < 1e-15);
        assert!((m.matrix()[(1, 1)] - 5.0 / 6.0).abs() < 1e-15);
        let one = mult_op(
            4,
            AffineMap {
                slope: 0.0,
                intercept: 1.0,
            },
        )
        .unwrap();
        assert_eq!(
            one,
            TruncatedOp {
                label: one.label.clone(),
                ..identity(16)
            }
        );
    }

    #[test]
    fn pseudo_metric_axioms() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let (a, b, c) = (
                random_sym(&mut rng, 6),
                random_sym(&mut rng, 6),
                random_sym(&mut rng, 6),
            );
            assert_eq!(srt_dist(&a, &a).unwrap(), 0.0);
            let ab = srt_dist(&a, &b).unwrap();
            assert!(ab >= 0.0);
            assert!((ab - srt_dist(&b, &a).unwrap()).abs() < 1e-12);
            assert!(srt_dist(&a, &c).unwrap() <= ab + srt_dist(&b, &c).unwrap() + 1e-10);
        }
    }

    #[test]
    fn resolvent_bound_for_small_perturbations() {
        for d in 1..=6 {
            for n in [1usize, 2, 5, 10, 50] {
                let f = AffineMap {
                    slope: 1.0 / n as f64,
                    intercept: 1.0,
                };
                let dist = srt_dist(&mult_op(d, f).unwrap(), &identity(1 << d)).unwrap();
                assert!(dist <= 1.0 / n as f64, "d={d} n={n} dist={dist}");
            }
        }
    }

    #[test]
    fn interleave_spectrum() {
        for n in 1..=6usize {
            let a: Vec<f64> = (0..n).map(|i| i as f64 * 1.5 - 2.0).collect();
            for k in 1..=n {
                for reps in 1..=3 {
                    let op = interleave_approx(&a, k, reps).unwrap();
                    let mut want: Vec<f64> = a[..k]
                        .iter()
                        .flat_map(|&v| std::iter::repeat_n(v, reps + 1))
                        .collect();
                    want.sort_by(f64::total_cmp);
                    assert_eq!(op.spectrum(), want);
                }
            }
        }
        let z = interleave_approx(&[0.0; 4], 2, 3).unwrap();
        assert!(z.matrix().iter().all(|&x| x == 0.0));
        assert!(interleave_approx(&[1.0], 2, 1).is_err());
    }

    #[test]
    fn interleave_distance_shrinks_with_k() {
        let a = [3.0, -1.0, 0.5, 2.0, -2.5, 1.0];
        let dists: Vec<f64> = (1..=a.len())
            .map(|k| interleave_distance(&a, k, 4).unwrap())
            .collect();
        // the first k test vectors agree and each resolvent difference has norm <= 2
        for (k, d) in (1..).zip(&dists) {
            assert!(*d <= 2.0 * 0.5f64.powi(k), "{dists:?}");
        }
        assert!(dists[0] > 0.0);
        assert_eq!(dists[a.len() - 1], 0.0);
    }

    #[test]
    fn smear_converges_to_inflated_operator() {
        let a = TruncatedOp::diagonal(&[1.0, -2.0, 0.5], "a");
        let base = inflate(&a, 3).unwrap();
        let mut last = f64::INFINITY;
        for width in [1.0, 0.1, 0.01] {
            let d = srt_dist(&smear(&a, 3, width).unwrap(), &base).unwrap();
            assert!(d <= width / 2.0);
            assert!(d < last);
            last = d;
        }
    }

    #[test]
    fn pipeline_steps() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let a = random_sym(&mut rng, 4);
        let ev = a.spectrum();
        let out = density_pipeline(&a, 3, 2, 2, 0.1).unwrap();
        assert_eq!(out.dim(), (3 + 3 * 2) << 2);
        // every smeared entry stays within width/2 of an eigenvalue
        for x in out.spectrum() {
            assert!(ev[..3].iter().any(|l| (x - l).abs() <= 0.05 + 1e-12));
        }
        let base = inflate(&interleave_approx(&ev, 3, 2).unwrap(), 2).unwrap();
        let coarse = srt_dist(&out, &base).unwrap();
        let fine = srt_dist(&density_pipeline(&a, 3, 2, 2, 0.001).unwrap(), &base).unwrap();
        assert!(fine < coarse && fine <= 0.0005);
    }

    #[test]
    fn size_mismatch() {
        assert!(matches!(
            srt_dist(&identity(2), &identity(3)),
            Err(Error::DimensionMismatch(2, 3))
        ));
    }
}
