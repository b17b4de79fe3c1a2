//! Special functions used by the beta, normal and Student-t evaluations.
//!
//! Every routine validates its arguments and returns [`Error::Domain`] instead
//! of producing NaN, so callers can tell bad data apart from bad parameters.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Continued-fraction limits for the incomplete beta function.
const BETACF_MAX_ITER: usize = 300;
const BETACF_EPS: f64 = 1e-14;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("log_gamma", x, "x > 0"));
    }
    Ok(libm::lgamma(x))
}

/// `ln B(a, b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Digamma function ψ(x) for `x > 0`.
pub fn digamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("digamma", x, "x > 0"));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv2 = 1.0 / (x * x);
    // Bernoulli tail: B2/2, B4/4, ... B12/12
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    Ok(acc + x.ln() - 0.5 / x - series)
}

/// Trigamma function ψ′(x) for `x > 0`.
pub fn trigamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain("trigamma", x, "x > 0"));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 10.0 {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let series = inv
        + 0.5 * inv2
        + inv
            * inv2
            * (1.0 / 6.0
                - inv2
                    * (1.0 / 30.0 - inv2 * (1.0 / 42.0 - inv2 * (1.0 / 30.0 - inv2 * 5.0 / 66.0))));
    Ok(acc + series)
}

/// Regularized incomplete beta function `I_x(a, b)`.
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::domain("reg_inc_beta", x, "0 <= x <= 1"));
    }
    inc_beta_complemented(x, 1.0 - x, a, b)
}

/// `I_x(a, b)` with the complement `1 - x` supplied separately so callers that
/// know it exactly (e.g. `t²/(ν+t²)`) avoid cancellation.
pub(crate) fn inc_beta_complemented(x: f64, xc: f64, a: f64, b: f64) -> Result<f64> {
    if !a.is_finite() || a <= 0.0 {
        return Err(Error::domain("reg_inc_beta", a, "a > 0"));
    }
    if !b.is_finite() || b <= 0.0 {
        return Err(Error::domain("reg_inc_beta", b, "b > 0"));
    }
    if x.is_nan() || xc.is_nan() {
        return Err(Error::domain("reg_inc_beta", x, "0 <= x <= 1"));
    }
    if x <= 0.0 {
        return Ok(0.0);
    }
    if xc <= 0.0 {
        return Ok(1.0);
    }
    let log_front = a * x.ln() + b * xc.ln() - log_beta(a, b)?;
    if x < (a + 1.0) / (a + b + 2.0) {
        let cf = beta_cf(x, a, b)?;
        Ok((log_front.exp() * cf / a).clamp(0.0, 1.0))
    } else {
        let cf = beta_cf(xc, b, a)?;
        Ok((1.0 - log_front.exp() * cf / b).clamp(0.0, 1.0))
    }
}

/// Modified Lentz evaluation of the incomplete-beta continued fraction.
fn beta_cf(x: f64, a: f64, b: f64) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=BETACF_MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < BETACF_EPS {
            return Ok(h);
        }
    }
    Err(Error::NoConvergence {
        routine: "reg_inc_beta",
        iterations: BETACF_MAX_ITER,
    })
}

/// Beta density `f_B(x; a, b)` for `0 < x < 1`.
pub fn beta_pdf(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain("beta_pdf", x, "0 < x < 1"));
    }
    Ok(((a - 1.0) * x.ln() + (b - 1.0) * (1.0 - x).ln() - log_beta(a, b)?).exp())
}

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * z * z).exp()
}

/// Standard normal log-density.
pub fn normal_log_pdf(z: f64) -> f64 {
    -LN_SQRT_2PI - 0.5 * z * z
}

/// Standard normal CDF Φ(z).
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z * FRAC_1_SQRT_2)
}

/// Upper tail `1 − Φ(z)` without cancellation.
pub fn normal_sf(z: f64) -> f64 {
    0.5 * libm::erfc(z * FRAC_1_SQRT_2)
}

/// Inverse of [`normal_cdf`] for `p` strictly inside `(0, 1)`.
///
/// Wichura's AS 241 rational approximation followed by one Newton step.
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain("normal_quantile", p, "0 < p < 1"));
    }
    let x = as241(p);
    let err = if p < 0.5 {
        normal_cdf(x) - p
    } else {
        (1.0 - p) - normal_sf(x)
    };
    let dens = normal_pdf(x);
    if dens > 0.0 {
        Ok(x - err / dens)
    } else {
        Ok(x)
    }
}

/// Quantile of the upper tail: returns z with `1 − Φ(z) = q`.
pub fn normal_isf(q: f64) -> Result<f64> {
    normal_quantile(q).map(|z| -z)
}

fn as241(p: f64) -> f64 {
    let q = p - 0.5;
    if q.abs() <= 0.425 {
        let r = 0.180625 - q * q;
        return q
            * (((((((2.509_080_928_730_122_7e3 * r + 3.343_057_558_358_813e4) * r
                + 6.726_577_092_700_87e4)
                * r
                + 4.592_195_393_154_987e4)
                * r
                + 1.373_169_376_550_946e4)
                * r
                + 1.971_590_950_306_551_4e3)
                * r
                + 1.331_416_678_917_843_8e2)
                * r
                + 3.387_132_872_796_366_5)
            / (((((((5.226_495_278_852_545e3 * r + 2.872_908_573_572_194_3e4) * r
                + 3.930_789_580_009_271e4)
                * r
                + 2.121_379_430_158_659_7e4)
                * r
                + 5.394_196_021_424_751e3)
                * r
                + 6.871_870_074_920_579e2)
                * r
                + 4.231_333_070_160_091e1)
                * r
                + 1.0);
    }
    let mut r = if q < 0.0 { p } else { 1.0 - p };
    r = (-r.ln()).sqrt();
    let x = if r <= 5.0 {
        r -= 1.6;
        (((((((7.745_450_142_783_414e-4 * r + 2.272_384_498_926_918_4e-2) * r
            + 2.417_807_251_774_506e-1)
            * r
            + 1.270_458_252_452_368_4)
            * r
            + 3.647_848_324_763_204_5)
            * r
            + 5.769_497_221_460_691)
            * r
            + 4.630_337_846_156_546)
            * r
            + 1.423_437_110_749_683_5)
            / (((((((1.050_750_071_644_416_8e-9 * r + 5.475_938_084_995_345e-4) * r
                + 1.519_866_656_361_645_7e-2)
                * r
                + 1.481_039_764_274_800_8e-1)
                * r
                + 6.897_673_349_851e-1)
                * r
                + 1.676_384_830_183_803_8)
                * r
                + 2.053_191_626_637_759)
                * r
                + 1.0)
    } else {
        r -= 5.0;
        (((((((2.010_334_399_292_288_1e-7 * r + 2.711_555_568_743_487_6e-5) * r
            + 1.242_660_947_388_078_4e-3)
            * r
            + 2.653_218_952_657_612_4e-2)
            * r
            + 2.965_605_718_285_048_7e-1)
            * r
            + 1.784_826_539_917_291_3)
            * r
            + 5.463_784_911_164_114)
            * r
            + 6.657_904_643_501_103)
            / (((((((2.044_263_103_389_939_7e-15 * r + 1.421_511_758_316_446e-7) * r
                + 1.846_318_317_510_054_8e-5)
                * r
                + 7.868_691_311_456_133e-4)
                * r
                + 1.487_536_129_085_061_5e-2)
                * r
                + 1.369_298_809_227_358e-1)
                * r
                + 5.998_322_065_558_88e-1)
                * r
                + 1.0)
    };
    if q < 0.0 {
        -x
    } else {
        x
    }
}

/// Lower tail probability `P(T ≤ t)` and upper tail `P(T > t)` of Student's t.
fn student_t_tails(t: f64, df: f64) -> Result<(f64, f64)> {
    if !df.is_finite() || df <= 0.0 {
        return Err(Error::domain("student_t_cdf", df, "df > 0"));
    }
    if t.is_nan() {
        return Err(Error::domain("student_t_cdf", t, "finite t"));
    }
    if t.is_infinite() {
        return Ok(if t > 0.0 { (1.0, 0.0) } else { (0.0, 1.0) });
    }
    let t2 = t * t;
    let denom = df + t2;
    // P(|T| > |t|) = I_{df/(df+t²)}(df/2, 1/2)
    let two_sided = inc_beta_complemented(df / denom, t2 / denom, 0.5 * df, 0.5)?;
    let tail = 0.5 * two_sided;
    if t >= 0.0 {
        Ok((1.0 - tail, tail))
    } else {
        Ok((tail, 1.0 - tail))
    }
}

/// Student-t CDF with `df` degrees of freedom.
pub fn student_t_cdf(t: f64, df: f64) -> Result<f64> {
    student_t_tails(t, df).map(|(lower, _)| lower)
}

/// Converts a t statistic to the z scale, `Φ⁻¹(T_df(t))`.
///
/// The tail probability is clamped to `[1e-15, 1 − 1e-15]` before inversion;
/// the second element reports whether clamping occurred.
pub fn t_to_z(t: f64, df: f64) -> Result<(f64, bool)> {
    const CLAMP: f64 = 1e-15;
    let (lower, upper) = student_t_tails(t, df)?;
    // work on the smaller tail for precision
    let (tail, positive) = if t >= 0.0 {
        (upper, true)
    } else {
        (lower, false)
    };
    let clamped = tail < CLAMP;
    let tail = tail.clamp(CLAMP, 0.5);
    let z = if tail >= 0.5 {
        0.0
    } else {
        -normal_quantile(tail)?
    };
    Ok((if positive { z } else { -z }, clamped))
}

/// Survival function of the χ² distribution with two degrees of freedom.
pub fn chi2_2df_sf(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else {
        (-0.5 * x).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn log_gamma_examples() {
        assert_eq!(log_gamma(1.0).unwrap(), 0.0);
        assert!(log_gamma(2.0).unwrap().abs() < 1e-15);
        assert!((log_gamma(0.5).unwrap() - 0.572_364_942_924_700_1).abs() < 1e-12);
        assert!(log_gamma(0.0).is_err());
        assert!(log_gamma(-1.0).is_err());
        assert!(log_gamma(f64::NAN).is_err());
    }

    #[test]
    fn inc_beta_examples() {
        assert_eq!(reg_inc_beta(0.0, 2.0, 3.0).unwrap(), 0.0);
        assert_eq!(reg_inc_beta(1.0, 2.0, 3.0).unwrap(), 1.0);
        assert!((reg_inc_beta(0.5, 1.0, 1.0).unwrap() - 0.5).abs() < 1e-14);
        assert!((reg_inc_beta(0.25, 2.0, 2.0).unwrap() - 0.15625).abs() < 1e-12);
        assert!(reg_inc_beta(1.5, 1.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 0.0, 1.0).is_err());
        assert!(reg_inc_beta(0.5, 1.0, -2.0).is_err());
    }

    #[test]
    fn normal_examples() {
        assert_eq!(normal_cdf(0.0), 0.5);
        assert!((normal_quantile(0.975).unwrap() - 1.959_963_984_540_054).abs() < 1e-9);
        assert!((normal_quantile(normal_cdf(1.7)).unwrap() - 1.7).abs() < 1e-9);
        assert!(normal_quantile(0.0).is_err());
        assert!(normal_quantile(1.0).is_err());
    }

    #[test]
    fn student_t_examples() {
        assert_eq!(student_t_cdf(0.0, 100.0).unwrap(), 0.5);
        assert!((student_t_cdf(1.0, 1.0).unwrap() - 0.75).abs() < 1e-12);
        assert!((student_t_cdf(2.0, 10.0).unwrap() - 0.963_305_99).abs() < 1e-8);
        assert!(student_t_cdf(1.0, 0.0).is_err());
    }

    #[test]
    fn polygamma_examples() {
        assert!((digamma(1.0).unwrap() + 0.577_215_664_901_532_9).abs() < 1e-10);
        assert!((trigamma(1.0).unwrap() - PI * PI / 6.0).abs() < 1e-10);
        assert!((digamma(2.0).unwrap() - digamma(1.0).unwrap() - 1.0).abs() < 1e-12);
        assert!(digamma(0.0).is_err());
        assert!(trigamma(-3.0).is_err());
    }

    #[test]
    fn t_to_z_limits() {
        assert_eq!(t_to_z(0.0, 100.0).unwrap().0, 0.0);
        let (z, clamped) = t_to_z(1.5, 1e6).unwrap();
        assert!((z - 1.5).abs() < 1e-3);
        assert!(!clamped);
        let (z, clamped) = t_to_z(-1e6, 3.0).unwrap();
        assert!(clamped);
        assert!(z < -7.9);
    }
}
