use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Full thin SVD with singular values sorted in descending order.
#[derive(Clone, Debug)]
pub struct SortedSvd {
    u: DMatrix<f64>,
    singular_values: DVector<f64>,
    v: DMatrix<f64>,
}

impl SortedSvd {
    pub fn new(m: &DMatrix<f64>) -> Self {
        let svd = m.clone().svd(true, true);
        let u = svd.u.expect("requested U");
        let v_t = svd.v_t.expect("requested V^T");
        let sv = svd.singular_values;
        let mut order: Vec<usize> = (0..sv.len()).collect();
        // stable sort keeps original order among ties
        order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
        SortedSvd {
            u: DMatrix::from_fn(u.nrows(), order.len(), |i, k| u[(i, order[k])]),
            singular_values: DVector::from_iterator(order.len(), order.iter().map(|&k| sv[k])),
            v: DMatrix::from_fn(v_t.ncols(), order.len(), |j, k| v_t[(order[k], j)]),
        }
    }

    pub fn singular_values(&self) -> &DVector<f64> {
        &self.singular_values
    }

    /// Number of singular values above `tol * sigma_max`.
    pub fn numerical_rank(&self, tol: f64) -> usize {
        let max = self.singular_values.iter().copied().fold(0.0, f64::max);
        if !(max > 0.0) {
            return 0;
        }
        self.singular_values.iter().filter(|&&x| x > tol * max).count()
    }

    /// Keeps the leading `min(rank, numerical_rank(tol))` triplets.
    pub fn truncate(&self, rank: usize, tol: f64) -> Result<TruncatedSvd> {
        if rank == 0 {
            return Err(Error::invalid("rank must be at least 1"));
        }
        let kept = rank.min(self.numerical_rank(tol));
        if kept == 0 {
            return Err(Error::DegenerateHankel);
        }
        Ok(TruncatedSvd {
            u: self.u.columns(0, kept).into_owned(),
            singular_values: self.singular_values.rows(0, kept).into_owned(),
            v: self.v.columns(0, kept).into_owned(),
        })
    }
}

/// Rank-`r'` factors with `M ≈ U diag(D) V^T`.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncatedSvd {
    pub u: DMatrix<f64>,
    pub singular_values: DVector<f64>,
    pub v: DMatrix<f64>,
}

impl TruncatedSvd {
    pub fn rank(&self) -> usize {
        self.singular_values.len()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        let mut scaled = self.u.clone();
        for (k, d) in self.singular_values.iter().enumerate() {
            scaled.column_mut(k).scale_mut(*d);
        }
        scaled * self.v.transpose()
    }
}

/// Best rank-`r'` approximation of `m`, where `r'` also drops singular
/// values at or below `tol * sigma_max`.
pub fn truncated_svd(m: &DMatrix<f64>, rank: usize, tol: f64) -> Result<TruncatedSvd> {
    SortedSvd::new(m).truncate(rank, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_case() {
        let m = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let t = truncated_svd(&m, 1, 1e-12).unwrap();
        assert_eq!(t.rank(), 1);
        assert!((t.singular_values[0] - 2.0).abs() < 1e-14);
        assert!(((&m - t.reconstruct()).norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn small_hankel_is_exact_at_full_rank() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0 / 24.0, 1.0 / 24.0, 1.0 / 32.0]);
        let t = truncated_svd(&m, 2, 1e-12).unwrap();
        assert!((&m - t.reconstruct()).norm() <= 1e-12);
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        assert!(matches!(
            truncated_svd(&DMatrix::zeros(3, 2), 1, 1e-12),
            Err(Error::DegenerateHankel)
        ));
        assert!(truncated_svd(&DMatrix::identity(2, 2), 0, 1e-12).is_err());
    }

    #[test]
    fn rank_is_clamped_to_numerical_rank() {
        let a = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
        let b = DMatrix::from_row_slice(1, 4, &[1.0, -1.0, 0.5, 2.0]);
        let c = DMatrix::from_row_slice(3, 1, &[0.0, 1.0, -1.0]);
        let d = DMatrix::from_row_slice(1, 4, &[3.0, 0.0, 1.0, 1.0]);
        let m = a * b + c * d;
        let t = truncated_svd(&m, 100, 1e-12).unwrap();
        assert_eq!(t.rank(), 2);
        assert!((&m - t.reconstruct()).norm() < 1e-12);
    }
}
