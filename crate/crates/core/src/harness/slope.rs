use serde::Serialize;

use crate::error::{Error, Result};

/// Least squares line `ln e = intercept + slope ln n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Residual sum of squares in log space.
    pub residual: f64,
    /// Standard error of the slope; zero with exactly two points.
    pub slope_std_error: f64,
}

/// Ordinary least squares on `(ln n, ln error)`.
pub fn fit_slope(pairs: &[(f64, f64)]) -> Result<SlopeFit> {
    if pairs.len() < 3 {
        return Err(Error::InvalidArgument(format!("slope fit needs at least 3 points, got {}", pairs.len())));
    }
    if let Some(&(n, e)) = pairs.iter().find(|(n, e)| !(*n > 0.0) || !(*e > 0.0)) {
        return Err(Error::InvalidArgument(format!("slope fit needs positive values, got ({n}, {e})")));
    }
    let m = pairs.len() as f64;
    let xs: Vec<f64> = pairs.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pairs.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("slope fit needs at least two distinct n".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let slope_std_error = (residual / (m - 2.0) / sxx).sqrt();
    Ok(SlopeFit { slope, intercept, residual, slope_std_error })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_laws() {
        let ns = [100.0, 200.0, 400.0, 800.0, 1600.0];
        for (c, a) in [(3.0, -0.5), (1.0, -1.0), (0.2, 0.0)] {
            let pairs: Vec<_> = ns.iter().map(|&n: &f64| (n, c * n.powf(a))).collect();
            let fit = fit_slope(&pairs).unwrap();
            assert!((fit.slope - a).abs() < 1e-10);
            assert!((fit.intercept - f64::ln(c)).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(fit_slope(&[(1.0, 1.0), (1.0, 2.0), (1.0, 3.0)]).is_err());
    }
}
