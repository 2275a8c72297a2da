//! Scalar densities shared by the attribute and class models.

use core::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{invalid, Result};

/// Normal distribution `N(mean, std_dev²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gaussian {
    pub mean: f64,
    pub std_dev: f64,
}

impl Gaussian {
    pub fn new(mean: f64, std_dev: f64) -> Result<Self> {
        if !(std_dev > 0.0) || !mean.is_finite() || !std_dev.is_finite() {
            return Err(invalid("gaussian needs finite mean and std_dev > 0"));
        }
        Ok(Self { mean, std_dev })
    }

    pub fn variance(&self) -> f64 {
        self.std_dev * self.std_dev
    }

    pub fn pdf(&self, x: f64) -> f64 {
        normal_pdf(x, self.mean, self.variance())
    }

    /// Density of `x` after convolving with independent zero-mean noise of
    /// variance `extra_variance`.
    pub fn pdf_inflated(&self, x: f64, extra_variance: f64) -> f64 {
        normal_pdf(x, self.mean, self.variance() + extra_variance)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // std_dev > 0 is enforced on construction.
        Normal::new(self.mean, self.std_dev).unwrap().sample(rng)
    }
}

/// Rayleigh distribution with scale `σ`: `f(x) = x/σ² · exp(−x²/2σ²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rayleigh {
    pub scale: f64,
}

impl Rayleigh {
    pub fn new(scale: f64) -> Result<Self> {
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(invalid("rayleigh scale must be > 0"));
        }
        Ok(Self { scale })
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let s2 = self.scale * self.scale;
        x / s2 * libm::exp(-x * x / (2.0 * s2))
    }

    pub fn mean(&self) -> f64 {
        self.scale * libm::sqrt(PI / 2.0)
    }

    pub fn variance(&self) -> f64 {
        (4.0 - PI) / 2.0 * self.scale * self.scale
    }

    /// Inverse-CDF draw.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // 1 - u lies in (0, 1] so the log is finite.
        let u: f64 = rng.random();
        self.scale * libm::sqrt(-2.0 * libm::log(1.0 - u))
    }
}

/// `N(x; mean, variance)`.
pub fn normal_pdf(x: f64, mean: f64, variance: f64) -> f64 {
    let d = x - mean;
    libm::exp(-0.5 * d * d / variance) / libm::sqrt(2.0 * PI * variance)
}

/// Draw from the standard normal.
pub fn standard_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(rand_distr::StandardNormal)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gaussian_peak() {
        let g = Gaussian::new(3.0, 2.0).unwrap();
        assert_relative_eq!(g.pdf(3.0), 1.0 / (2.0 * libm::sqrt(2.0 * PI)), epsilon = 1e-15);
    }

    #[test]
    fn rayleigh_closed_form() {
        let r = Rayleigh::new(0.5).unwrap();
        assert_eq!(r.pdf(0.0), 0.0);
        assert_relative_eq!(r.pdf(0.5), 2.0 * libm::exp(-0.5), epsilon = 1e-15);
        assert_eq!(r.pdf(-1.0), 0.0);
    }

    #[test]
    fn rejects_bad_scales() {
        assert!(Rayleigh::new(0.0).is_err());
        assert!(Rayleigh::new(-1.0).is_err());
        assert!(Gaussian::new(0.0, 0.0).is_err());
        assert!(Gaussian::new(0.0, f64::NAN).is_err());
    }
}
