use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use super::{require, Result};
use crate::crypto::DEFAULT_FIXED_POINT_SCALE;

/// Scales below this are treated as "no noise" and sample exactly zero.
pub const DEGENERATE_SCALE: f64 = 1e-9;

/// Laplace noise parameters for count statistics.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub scale_sigma: f64,
    pub sensitivity: f64,
    pub fixed_point_scale: u64,
}

impl NoiseSpec {
    pub fn new(scale_sigma: f64, fixed_point_scale: u64) -> Result<Self> {
        require(scale_sigma >= 0.0 && scale_sigma.is_finite(), || {
            format!("noise scale must be finite and non-negative, got {scale_sigma}")
        })?;
        require(fixed_point_scale > 0, || {
            "fixed-point scale must be positive".into()
        })?;
        Ok(Self {
            scale_sigma,
            sensitivity: 1.0,
            fixed_point_scale,
        })
    }

    /// `σ = Δ_s / ε₀`.
    pub fn from_epsilon(epsilon0: f64, sensitivity: f64, fixed_point_scale: u64) -> Result<Self> {
        require(epsilon0 > 0.0 && sensitivity > 0.0, || {
            format!("epsilon0 and sensitivity must be positive, got {epsilon0}, {sensitivity}")
        })?;
        Ok(Self {
            scale_sigma: sensitivity / epsilon0,
            sensitivity,
            fixed_point_scale,
        })
    }

    pub fn noiseless() -> Self {
        Self {
            scale_sigma: 0.0,
            sensitivity: 1.0,
            fixed_point_scale: DEFAULT_FIXED_POINT_SCALE,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.scale_sigma < DEGENERATE_SCALE
    }

    /// Single-party guarantee `ε₀ = Δ_s / σ`; infinite without noise.
    pub fn local_epsilon(&self) -> f64 {
        if self.is_noiseless() {
            f64::INFINITY
        } else {
            self.sensitivity / self.scale_sigma
        }
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> i64 {
        sample_discrete_laplace(self.scale_sigma, self.fixed_point_scale, rng)
    }
}

/// `Laplace(0, scale)` by inverse CDF.
pub fn sample_laplace<R: RngCore + ?Sized>(scale: f64, rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random::<f64>() - 0.5;
        if u > -0.5 {
            return -scale * u.signum() * (-2.0 * u.abs()).ln_1p();
        }
    }
}

/// `round(η · fixed_point_scale)` for `η ~ Laplace(scale)`. Returns 0
/// without consuming randomness when `scale < 1e-9`.
pub fn sample_discrete_laplace<R: RngCore + ?Sized>(
    scale: f64,
    fixed_point_scale: u64,
    rng: &mut R,
) -> i64 {
    if scale < DEGENERATE_SCALE {
        return 0;
    }
    (sample_laplace(scale, rng) * fixed_point_scale as f64).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    fn moments(xs: impl Iterator<Item = f64>) -> (f64, f64) {
        let (mut n, mut mean, mut m2) = (0f64, 0f64, 0f64);
        for x in xs {
            n += 1.0;
            let d = x - mean;
            mean += d / n;
            m2 += d * (x - mean);
        }
        (mean, m2 / (n - 1.0))
    }

    #[test]
    fn degenerate_scale_returns_zero() {
        let mut r = rng::stream(1, "noise", 0);
        assert_eq!(sample_discrete_laplace(1e-10, 1_000_000, &mut r), 0);
        assert_eq!(NoiseSpec::noiseless().sample(&mut r), 0);
    }

    #[test]
    fn million_samples_match_laplace_moments() {
        let mut r = rng::stream(2, "noise", 0);
        let fp = 1_000_000u64;
        let (mean, var) = moments(
            (0..1_000_000).map(|_| sample_discrete_laplace(1.0, fp, &mut r) as f64 / fp as f64),
        );
        assert!(mean.abs() <= 0.01, "mean {mean}");
        assert!((1.96..=2.04).contains(&var), "variance {var}");
    }

    #[test]
    fn noise_is_symmetric() {
        let mut r = rng::stream(3, "noise", 0);
        let n = 200_000;
        let positive = (0..n).filter(|_| sample_laplace(2.0, &mut r) > 0.0).count();
        let frac = positive as f64 / n as f64;
        // 5 binomial standard errors
        assert!(
            (frac - 0.5).abs() < 5.0 * (0.25 / n as f64).sqrt(),
            "{frac}"
        );
    }

    #[test]
    fn spec_constructors() {
        let s = NoiseSpec::from_epsilon(0.5, 1.0, 1000).unwrap();
        assert_eq!(s.scale_sigma, 2.0);
        assert_eq!(s.local_epsilon(), 0.5);
        assert!(NoiseSpec::new(-1.0, 10).is_err());
        assert!(NoiseSpec::from_epsilon(0.0, 1.0, 10).is_err());
    }

    /// Empirical check of the Laplace mechanism's privacy guarantee on the
    /// adjacent inputs 0 and 1: over every bucket of a grid, the density
    /// ratio stays below `e^ε₀` up to a 4-sigma sampling allowance.
    #[test]
    fn adjacent_inputs_respect_the_density_ratio() {
        let sigma = 1.0;
        let eps0 = 1.0 / sigma;
        let n = 1_000_000;
        let width = 0.25;
        let (lo, hi) = (-4.0, 5.0);
        let buckets = ((hi - lo) / width) as usize;
        let histogram = |shift: f64, seed: u64| {
            let mut r = rng::stream(seed, "dp-ratio", 0);
            let mut h = vec![0u64; buckets];
            for _ in 0..n {
                let x = shift + sample_discrete_laplace(sigma, 1_000_000, &mut r) as f64 / 1e6;
                if (lo..hi).contains(&x) {
                    h[((x - lo) / width) as usize] += 1;
                }
            }
            h
        };
        let h0 = histogram(0.0, 10);
        let h1 = histogram(1.0, 11);
        let mut checked = 0;
        for (a, b) in h0.iter().zip(&h1) {
            if *a < 2000 || *b < 2000 {
                continue;
            }
            let (a, b) = (*a as f64, *b as f64);
            let slack = 1.0 + 4.0 * (1.0 / a + 1.0 / b).sqrt();
            let ratio = (a / b).max(b / a);
            assert!(ratio <= eps0.exp() * slack, "ratio {ratio}");
            checked += 1;
        }
        assert!(checked >= 20, "grid too sparse: {checked}");
    }
}
