use crate::error::{Error, Result};

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Clone, Copy, Debug, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination; 1 when `y` is constant.
    pub r_squared: f64,
    /// Standard error of the slope (0 with two points).
    pub slope_stderr: f64,
    pub points: usize,
}

impl LinearFit {
    pub fn fit(x: &[f64], y: &[f64]) -> Result<Self> {
        if x.len() != y.len() {
            return Err(Error::InvalidArgument(alloc::format!(
                "{} abscissae for {} ordinates",
                x.len(),
                y.len()
            )));
        }
        let n = x.len();
        if n < 2 {
            return Err(Error::InsufficientData(alloc::format!(
                "a line needs two points, got {n}"
            )));
        }
        let nf = n as f64;
        let mx = x.iter().sum::<f64>() / nf;
        let my = y.iter().sum::<f64>() / nf;
        let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
        for (&a, &b) in x.iter().zip(y) {
            sxx += (a - mx) * (a - mx);
            sxy += (a - mx) * (b - my);
            syy += (b - my) * (b - my);
        }
        if sxx == 0.0 {
            return Err(Error::InsufficientData("abscissae are all equal".into()));
        }
        let slope = sxy / sxx;
        let intercept = my - slope * mx;
        let sse = (syy - slope * sxy).max(0.0);
        let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
        let slope_stderr = if n > 2 {
            libm::sqrt(sse / (nf - 2.0) / sxx)
        } else {
            0.0
        };
        Ok(Self {
            slope,
            intercept,
            r_squared,
            slope_stderr,
            points: n,
        })
    }

    pub fn predict(&self, x: f64) -> f64 {
        self.intercept + self.slope * x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = LinearFit::fit(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14);
        assert!((f.intercept - 1.0).abs() < 1e-14);
        assert!((f.r_squared - 1.0).abs() < 1e-14);
        assert!(f.slope_stderr < 1e-7);
        assert_eq!(f.predict(10.0), 21.0);
    }

    #[test]
    fn noisy_line() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.1, 0.9, 2.1, 2.9, 4.1];
        let f = LinearFit::fit(&x, &y).unwrap();
        assert!((f.slope - 1.0).abs() < 0.05);
        assert!(f.r_squared > 0.99 && f.r_squared < 1.0);
    }

    #[test]
    fn degenerate() {
        assert!(LinearFit::fit(&[1.0], &[1.0]).is_err());
        assert!(LinearFit::fit(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(LinearFit::fit(&[1.0, 2.0], &[1.0]).is_err());
    }
}
