//! Binomial interval and two-sample test helpers.

use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};

fn standard_normal() -> Normal {
    Normal::standard()
}

/// Two-sided critical value of the standard normal for confidence `level`.
pub fn z_critical(level: f64) -> f64 {
    standard_normal().inverse_cdf(0.5 + level / 2.0)
}

/// Wilson score interval for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, level: f64) -> Option<(f64, f64)> {
    if trials == 0 {
        return None;
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = z_critical(level);
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Some(((centre - half).max(0.0), (centre + half).min(1.0)))
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize)]
pub struct ZTest {
    pub z: f64,
    pub p_value: f64,
}

/// Pooled two-proportion z-test of x1/n1 against x2/n2, two-sided.
///
/// When the pooled proportion is 0 or 1 the standard error vanishes; equal
/// samples then give z = 0 and p = 1.
pub fn two_proportion_z_test(x1: u64, n1: u64, x2: u64, n2: u64) -> Option<ZTest> {
    if n1 == 0 || n2 == 0 {
        return None;
    }
    let (n1f, n2f) = (n1 as f64, n2 as f64);
    let (p1, p2) = (x1 as f64 / n1f, x2 as f64 / n2f);
    let pooled = (x1 + x2) as f64 / (n1f + n2f);
    let se = (pooled * (1.0 - pooled) * (1.0 / n1f + 1.0 / n2f)).sqrt();
    if se == 0.0 {
        return Some(if p1 == p2 {
            ZTest {
                z: 0.0,
                p_value: 1.0,
            }
        } else {
            ZTest {
                z: f64::INFINITY.copysign(p1 - p2),
                p_value: 0.0,
            }
        });
    }
    let z = (p1 - p2) / se;
    let p_value = (2.0 * standard_normal().sf(z.abs())).clamp(0.0, 1.0);
    Some(ZTest { z, p_value })
}
