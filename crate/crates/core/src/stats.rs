//! Gaussian tail and binomial interval helpers.

use statrs::distribution::{Beta, ContinuousCDF};
use statrs::function::erf::erfc;

/// Standard normal tail `Q(x) = P(Z > x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

/// Exact (Clopper-Pearson) two-sided interval for `k` successes in `n`
/// trials at confidence `1 - alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    assert!(n > 0 && k <= n, "need 0 <= k <= n, n > 0");
    let (k, nf) = (k as f64, n as f64);
    let lo = if k == 0.0 {
        0.0
    } else {
        Beta::new(k, nf - k + 1.0).expect("positive shape").inverse_cdf(alpha / 2.0)
    };
    let hi = if k == nf {
        1.0
    } else {
        Beta::new(k + 1.0, nf - k).expect("positive shape").inverse_cdf(1.0 - alpha / 2.0)
    };
    (lo, hi)
}

/// Normal-approximation interval `mean ± z·se` clipped at zero.
pub fn normal_interval(mean: f64, std_err: f64, z: f64) -> (f64, f64) {
    ((mean - z * std_err).max(0.0), mean + z * std_err)
}

/// Two-sided 95% standard normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;
