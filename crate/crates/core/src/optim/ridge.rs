use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::net::{forward_activations, WeightVector};

use super::dataset::Dataset;

/// `B[i, k] = f_{k,1}^{(L)}(X_i)`: the output units the outer weights combine.
pub fn outer_features(w: &WeightVector, data: &Dataset) -> Result<DMatrix<f64>> {
    data.check_dim(w.topology().d)?;
    let k = w.topology().subnets;
    let mut b = DMatrix::zeros(data.n(), k);
    for (i, (x, _)) in data.iter().enumerate() {
        for (col, v) in forward_activations(w, x)?.outputs().into_iter().enumerate() {
            b[(i, col)] = v;
        }
    }
    Ok(b)
}

#[derive(Clone, Debug)]
pub struct RidgeSolution {
    pub coefficients: Vec<f64>,
    /// Max-norm residual of the normal equations at the returned solution.
    pub residual: f64,
}

/// Minimizer of `(1/n) |B a - y|^2 + c3 |a|^2` through the normal equations
/// `(B^T B / n + c3 I) a = B^T y / n`, solved by Cholesky factorization.
pub fn ridge_solve(features: &DMatrix<f64>, ys: &[f64], c3: f64) -> Result<RidgeSolution> {
    if !(c3 > 0.0) {
        return Err(Error::InvalidArgument(format!("ridge penalty must be positive, got {c3}")));
    }
    if features.nrows() != ys.len() {
        return Err(Error::DimensionMismatch { expected: features.nrows(), got: ys.len() });
    }
    let n = ys.len() as f64;
    let y = DVector::from_column_slice(ys);
    let k = features.ncols();
    let gram = features.transpose() * features / n + DMatrix::identity(k, k) * c3;
    let rhs = features.transpose() * y / n;
    let chol = gram
        .clone()
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("normal equations not positive definite".into()))?;
    let mut a = chol.solve(&rhs);
    // one step of iterative refinement
    let r = &rhs - &gram * &a;
    a += chol.solve(&r);
    let residual = (&gram * &a - &rhs).amax();
    Ok(RidgeSolution { coefficients: a.as_slice().to_vec(), residual })
}

/// Outer weights minimizing the empirical risk with the inner weights of `w`
/// held fixed.
pub fn outer_ridge_oracle(w: &WeightVector, data: &Dataset, c3: f64) -> Result<RidgeSolution> {
    ridge_solve(&outer_features(w, data)?, data.ys(), c3)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_ridge_closed_form() {
        // one constant feature, y == 1: a = 1 / (1 + c3)
        let b = DMatrix::from_element(7, 1, 1.0);
        let sol = ridge_solve(&b, &[1.0; 7], 0.01).unwrap();
        assert!((sol.coefficients[0] - 1.0 / 1.01).abs() < 1e-14);
    }

    #[test]
    fn zero_response_gives_zero() {
        let b = DMatrix::from_fn(5, 3, |i, j| ((i * 3 + j) as f64).sin());
        let sol = ridge_solve(&b, &[0.0; 5], 0.1).unwrap();
        assert!(sol.coefficients.iter().all(|&a| a == 0.0));
    }

    #[test]
    fn rejects_nonpositive_penalty() {
        let b = DMatrix::from_element(2, 1, 1.0);
        assert!(ridge_solve(&b, &[1.0, 1.0], 0.0).is_err());
    }
}
