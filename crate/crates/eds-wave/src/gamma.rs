//! Gamma, log-gamma and digamma on the real axis.
//!
//! Internal utility for the hypergeometric connection formulas; not part of
//! the public interface. Lanczos approximation with g = 7 and 9 coefficients,
//! relative error around 1e-14 away from the poles.

use std::f64::consts::PI;

const G: f64 = 7.0;
const COEF: [f64; 9] = [
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
];

const LN_SQRT_TWO_PI: f64 = 0.9189385332046727;

/// sin(pi x) with the argument reduced modulo 2 first.
fn sin_pi(x: f64) -> f64 {
    (PI * (x % 2.0)).sin()
}

fn tan_pi(x: f64) -> f64 {
    (PI * (x % 1.0)).tan()
}

fn lanczos_sum(x: f64) -> f64 {
    // Valid for x >= 0.5; the series argument is x - 1.
    let y = x - 1.0;
    let mut s = COEF[0];
    for (i, &c) in COEF.iter().enumerate().skip(1) {
        s += c / (y + i as f64);
    }
    s
}

fn is_nonpos_int(x: f64) -> bool {
    x <= 0.0 && x == x.floor()
}

// Production code only needs the logarithmic form below; the direct form
// is kept as the cross-check oracle in this module's tests.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection; poles at nonpositive integers come out as +-inf.
        PI / (sin_pi(x) * gamma(1.0 - x))
    } else {
        let base = x - 1.0 + G + 0.5;
        let s = lanczos_sum(x);
        (2.0 * PI).sqrt() * base.powf(x - 0.5) * (-base).exp() * s
    }
}

/// (ln |Gamma(x)|, sign of Gamma(x)). At a pole returns (+inf, 1), so that
/// reciprocal prefactors built from exp(-ln) collapse to zero.
pub(crate) fn ln_gamma_sign(x: f64) -> (f64, f64) {
    if is_nonpos_int(x) {
        return (f64::INFINITY, 1.0);
    }
    if x >= 0.5 {
        let base = x - 1.0 + G + 0.5;
        let s = lanczos_sum(x);
        (LN_SQRT_TWO_PI + (x - 0.5) * base.ln() - base + s.ln(), 1.0)
    } else {
        let sp = sin_pi(x);
        let (lg, _) = ln_gamma_sign(1.0 - x);
        (PI.ln() - sp.abs().ln() - lg, sp.signum())
    }
}

/// Digamma via reflection, upward recurrence to x >= 12, then the asymptotic
/// Bernoulli series.
pub(crate) fn digamma(x: f64) -> f64 {
    if is_nonpos_int(x) {
        return f64::NAN;
    }
    if x < 0.5 {
        return digamma(1.0 - x) - PI / tan_pi(x);
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 12.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    // B_2n / (2n y^2n) terms through n = 6.
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0 - inv2 * (1.0 / 132.0 - inv2 * 691.0 / 32760.0)))));
    acc + y.ln() - 0.5 / y - series
}
