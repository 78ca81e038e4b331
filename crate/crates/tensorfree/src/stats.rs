//! Sample means and standard errors with a fixed summation order.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Mean and standard error of the mean.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: usize,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let n = xs.len();
        if n == 0 {
            return Estimate { mean: f64::NAN, stderr: f64::NAN, n };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let stderr = if n < 2 {
            f64::NAN
        } else {
            let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
            (var / n as f64).sqrt()
        };
        Estimate { mean, stderr, n }
    }

    /// `|mean - target| ≤ k · stderr`, with `floor` guarding exact zeros.
    pub fn within(&self, target: f64, k: f64, floor: f64) -> bool {
        (self.mean - target).abs() <= (k * self.stderr).max(floor)
    }

    /// Deviation from `target` in units of the standard error.
    pub fn z(&self, target: f64) -> f64 {
        let d = (self.mean - target).abs();
        if self.stderr > 0.0 {
            d / self.stderr
        } else if d == 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    }
}

/// Mean and standard errors of complex samples, real and imaginary parts apart.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexEstimate {
    pub re: Estimate,
    pub im: Estimate,
}

impl ComplexEstimate {
    pub fn from_samples(zs: &[C64]) -> Self {
        let re: Vec<f64> = zs.iter().map(|z| z.re).collect();
        let im: Vec<f64> = zs.iter().map(|z| z.im).collect();
        ComplexEstimate { re: Estimate::from_samples(&re), im: Estimate::from_samples(&im) }
    }

    pub fn mean(&self) -> C64 {
        C64::new(self.re.mean, self.im.mean)
    }

    /// Combined standard error of the modulus, `sqrt(se_re² + se_im²)`.
    pub fn stderr(&self) -> f64 {
        self.re.stderr.hypot(self.im.stderr)
    }
}

/// Entrywise mean and standard error over equally shaped sample vectors.
pub fn columnwise(samples: &[Vec<f64>]) -> Vec<Estimate> {
    let Some(first) = samples.first() else { return Vec::new() };
    (0..first.len())
        .map(|j| {
            let col: Vec<f64> = samples.iter().map(|s| s[j]).collect();
            Estimate::from_samples(&col)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mean_and_stderr() {
        let e = Estimate::from_samples(&[1.0, 2.0, 3.0, 4.0]);
        assert!((e.mean - 2.5).abs() < 1e-15);
        assert!((e.stderr - (5.0f64 / 12.0).sqrt()).abs() < 1e-15);
        let c = Estimate::from_samples(&[2.0; 5]);
        assert_eq!(c.stderr, 0.0);
        assert!(c.within(2.0, 4.0, 0.0));
    }
}
