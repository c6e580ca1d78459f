//! Closed-form ridge regression with an unpenalized bias.

use nalgebra::DMatrix;

use crate::error::{HdfeError, Result};

/// Linear map from `d` features to `k` targets. Row `d` of `weights` is the
/// bias.
#[derive(Debug, Clone, PartialEq)]
pub struct RidgeModel {
    pub weights: DMatrix<f64>,
    pub lambda: f64,
}

impl RidgeModel {
    /// `features` is row-major `n x d`, `targets` row-major `n x k`.
    pub fn fit(features: &[f64], targets: &[f64], n: usize, lambda: f64) -> Result<Self> {
        if n == 0 {
            return Err(HdfeError::param("n", "need at least one training row"));
        }
        if features.is_empty() || features.len() % n != 0 {
            return Err(HdfeError::param("features", "length must be a positive multiple of n"));
        }
        if targets.is_empty() || targets.len() % n != 0 {
            return Err(HdfeError::param("targets", "length must be a positive multiple of n"));
        }
        if !(lambda >= 0.0 && lambda.is_finite()) {
            return Err(HdfeError::param("lambda", "must be nonnegative"));
        }
        let d = features.len() / n;
        let k = targets.len() / n;
        let x = DMatrix::from_row_slice(n, d, features);
        let y = DMatrix::from_row_slice(n, k, targets);

        let xm = x.row_mean();
        let ym = y.row_mean();
        let mut xc = x;
        for mut r in xc.row_iter_mut() {
            r -= &xm;
        }
        let mut yc = y;
        for mut r in yc.row_iter_mut() {
            r -= &ym;
        }

        // Solve in whichever of the primal (d x d) or dual (n x n) spaces is
        // smaller.
        let w = if d <= n {
            let a = xc.tr_mul(&xc) + DMatrix::identity(d, d) * lambda;
            let b = xc.tr_mul(&yc);
            solve_spd(a, b)?
        } else {
            let a = &xc * xc.transpose() + DMatrix::identity(n, n) * lambda;
            let alpha = solve_spd(a, yc)?;
            xc.tr_mul(&alpha)
        };
        let bias = &ym - &xm * &w;

        let mut weights = DMatrix::zeros(d + 1, k);
        weights.rows_mut(0, d).copy_from(&w);
        weights.row_mut(d).copy_from(&bias);
        if weights.iter().any(|v| !v.is_finite()) {
            return Err(HdfeError::Solver("non-finite ridge weights".into()));
        }
        Ok(RidgeModel { weights, lambda })
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.nrows() - 1
    }

    pub fn target_dim(&self) -> usize {
        self.weights.ncols()
    }

    /// Row-major predictions for row-major `features`.
    pub fn predict(&self, features: &[f64]) -> Result<Vec<f64>> {
        let d = self.feature_dim();
        if features.len() % d != 0 {
            return Err(HdfeError::Dimension {
                expected: d,
                got: features.len() % d,
            });
        }
        let n = features.len() / d;
        let x = DMatrix::from_row_slice(n, d, features);
        let mut p = x * self.weights.rows(0, d);
        let bias = self.weights.row(d);
        for mut r in p.row_iter_mut() {
            r += &bias;
        }
        let mut out = Vec::with_capacity(n * self.target_dim());
        for r in p.row_iter() {
            out.extend(r.iter());
        }
        Ok(out)
    }
}

fn solve_spd(a: DMatrix<f64>, b: DMatrix<f64>) -> Result<DMatrix<f64>> {
    match a.clone().cholesky() {
        Some(ch) => Ok(ch.solve(&b)),
        None => a
            .lu()
            .solve(&b)
            .ok_or_else(|| HdfeError::Solver("singular ridge system".into())),
    }
}

/// Fits on `(features, targets)` and predicts `test_features`.
pub fn ridge_regress(
    features: &[f64],
    targets: &[f64],
    n: usize,
    lambda: f64,
    test_features: &[f64],
) -> Result<Vec<f64>> {
    RidgeModel::fit(features, targets, n, lambda)?.predict(test_features)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::stats::r_squared;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_data(n: usize, d: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<f64> = (0..n * d).map(|_| rng.random::<f64>() - 0.5).collect();
        let y: Vec<f64> = x
            .chunks(d)
            .flat_map(|r| {
                let a: f64 = r.iter().enumerate().map(|(j, v)| (j as f64 + 1.0) * v).sum();
                [a + 0.3, -2.0 * a]
            })
            .collect();
        (x, y)
    }

    #[test]
    fn exact_linear_targets() {
        for (n, d) in [(50, 5), (10, 30)] {
            let (x, y) = linear_data(n, d, 1);
            let p = ridge_regress(&x, &y, n, 1e-9, &x).unwrap();
            assert!(r_squared(&y, &p) >= 1.0 - 1e-6, "n={n} d={d}");
        }
    }

    #[test]
    fn permutation_of_rows() {
        let (x, y) = linear_data(40, 6, 2);
        let a = RidgeModel::fit(&x, &y, 40, 0.1).unwrap();
        let perm: Vec<usize> = (0..40).rev().collect();
        let xp: Vec<f64> = perm.iter().flat_map(|&i| x[i * 6..(i + 1) * 6].to_vec()).collect();
        let yp: Vec<f64> = perm.iter().flat_map(|&i| y[i * 2..(i + 1) * 2].to_vec()).collect();
        let b = RidgeModel::fit(&xp, &yp, 40, 0.1).unwrap();
        assert!((a.weights - b.weights).abs().max() < 1e-9);
    }

    #[test]
    fn degenerate_dims() {
        assert!(RidgeModel::fit(&[], &[], 0, 1.0).is_err());
        assert!(RidgeModel::fit(&[1.0, 2.0, 3.0], &[1.0, 2.0], 2, 1.0).is_err());
        let m = RidgeModel::fit(&[1.0, 2.0], &[1.0, 2.0], 2, 0.0).unwrap();
        assert!(m.predict(&[1.0, 2.0, 3.0]).is_ok());
    }
}
