//! Standard normal distribution: CDF, quantile and two-sided interval widths.

use crate::error::{invalid_input, Result};

const FRAC_1_SQRT_2: f64 = core::f64::consts::FRAC_1_SQRT_2;
const FRAC_1_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Φ(z), evaluated through `erfc` so that both tails keep relative accuracy.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

pub fn normal_pdf(z: f64) -> f64 {
    FRAC_1_SQRT_2PI * libm::exp(-0.5 * z * z)
}

/// Wichura's AS241 (PPND16) rational approximation.
#[allow(clippy::excessive_precision, clippy::unreadable_literal)]
fn ppnd16(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        let num = (((((((2.5090809287301226727e+3 * r + 3.3430575583588128105e+4) * r
            + 6.7265770927008700853e+4)
            * r
            + 4.5921953931549871457e+4)
            * r
            + 1.3731693765509461125e+4)
            * r
            + 1.9715909503065514427e+3)
            * r
            + 1.3314166789178437745e+2)
            * r
            + 3.3871328727963666080e+0)
            * q;
        let den = ((((((5.2264952788528545610e+3 * r + 2.8729085735721942674e+4) * r
            + 3.9307895800092710610e+4)
            * r
            + 2.1213794301586595867e+4)
            * r
            + 5.3941960214247511077e+3)
            * r
            + 6.8718700749205790830e+2)
            * r
            + 4.2313330701600911252e+1)
            * r
            + 1.0;
        return num / den;
    }
    let tail = if q < 0.0 { p } else { 1.0 - p };
    let mut r = libm::sqrt(-libm::log(tail));
    let x = if r <= 5.0 {
        r -= 1.6;
        let num = ((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r
            + 2.41780725177450611770e-1)
            * r
            + 1.27045825245236838258e+0)
            * r
            + 3.64784832476320460504e+0)
            * r
            + 5.76949722146069140550e+0)
            * r
            + 4.63033784615654529590e+0)
            * r
            + 1.42343711074968357734e+0;
        let den = ((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r
            + 1.51986665636164571966e-2)
            * r
            + 1.48103976427480074590e-1)
            * r
            + 6.89767334985100004550e-1)
            * r
            + 1.67638483018380384940e+0)
            * r
            + 2.05319162663775882187e+0)
            * r
            + 1.0;
        num / den
    } else {
        r -= 5.0;
        let num = ((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r
            + 1.24266094738807843860e-3)
            * r
            + 2.65321895265761230930e-2)
            * r
            + 2.96560571828504891230e-1)
            * r
            + 1.78482653991729133580e+0)
            * r
            + 5.46378491116411436990e+0)
            * r
            + 6.65790464350110377720e+0;
        let den = ((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r
            + 1.84631831751005468180e-5)
            * r
            + 7.86869131145613259100e-4)
            * r
            + 1.48753612908506148525e-2)
            * r
            + 1.36929880922735805310e-1)
            * r
            + 5.99832206555887937690e-1)
            * r
            + 1.0;
        num / den
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Inverse of the standard normal CDF on the open unit interval.
///
/// The lower tail is solved directly and the upper tail by reflection, so
/// `normal_quantile(1 - p) == -normal_quantile(p)` whenever `1 - p` is exact.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid_input!("quantile probability must lie in (0, 1), got {p}"));
    }
    if p == 0.5 {
        return Ok(0.0);
    }
    let (lower, flip) = if p < 0.5 { (p, false) } else { (1.0 - p, true) };
    let mut z = ppnd16(lower);
    // one Newton step against the erfc-based CDF
    let density = normal_pdf(z);
    if density > 0.0 {
        z -= (normal_cdf(z) - lower) / density;
    }
    Ok(if flip { -z } else { z })
}

/// Nonnegative half-width `w` with `P(|N(0, variance)| > w) = 2·tail_prob`.
pub fn interval_halfwidth(variance: f64, tail_prob: f64) -> Result<f64> {
    if !(variance >= 0.0) {
        return Err(invalid_input!("variance must be nonnegative, got {variance}"));
    }
    if !(tail_prob > 0.0 && tail_prob < 0.5) {
        return Err(invalid_input!("tail probability must lie in (0, 0.5), got {tail_prob}"));
    }
    if variance == 0.0 {
        return Ok(0.0);
    }
    Ok(libm::sqrt(variance) * -normal_quantile(tail_prob)?)
}
