use crate::error::{Error, Result};

/// Sample `(X_1, Y_1), ..., (X_n, Y_n)` with points stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    d: usize,
    xs: Vec<f64>,
    ys: Vec<f64>,
}

impl Dataset {
    pub fn new(d: usize, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidDataset("dimension must be at least 1".into()));
        }
        if ys.is_empty() {
            return Err(Error::InvalidDataset("need at least one sample".into()));
        }
        if xs.len() != d * ys.len() {
            return Err(Error::InvalidDataset(format!(
                "{} coordinates do not form {} points of dimension {d}",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().chain(&ys).any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite value".into()));
        }
        Ok(Self { d, xs, ys })
    }

    pub fn from_points(points: &[Vec<f64>], ys: Vec<f64>) -> Result<Self> {
        let d = points.first().map(Vec::len).unwrap_or(0);
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidDataset("points of mixed dimension".into()));
        }
        Self::new(d, points.concat(), ys)
    }

    pub fn n(&self) -> usize {
        self.ys.len()
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn x(&self, i: usize) -> &[f64] {
        &self.xs[i * self.d..(i + 1) * self.d]
    }

    pub fn y(&self, i: usize) -> f64 {
        self.ys[i]
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.xs.chunks(self.d).zip(self.ys.iter().copied())
    }

    /// Same points with new responses.
    pub fn with_ys(&self, ys: Vec<f64>) -> Result<Self> {
        Self::new(self.d, self.xs.clone(), ys)
    }

    pub(crate) fn check_dim(&self, d: usize) -> Result<()> {
        if self.d != d {
            return Err(Error::DimensionMismatch { expected: d, got: self.d });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(Dataset::new(1, vec![], vec![]).is_err());
        assert!(Dataset::new(2, vec![0.0; 3], vec![1.0]).is_err());
        assert!(Dataset::new(1, vec![f64::NAN], vec![1.0]).is_err());
        assert!(Dataset::from_points(&[vec![0.0, 1.0], vec![2.0]], vec![0.0, 0.0]).is_err());
        let ds = Dataset::from_points(&[vec![0.0, 1.0], vec![2.0, 3.0]], vec![4.0, 5.0]).unwrap();
        assert_eq!(ds.x(1), &[2.0, 3.0]);
        assert_eq!(ds.n(), 2);
    }
}
