//! Model parameters for the wave equation
//!
//! ```text
//! u_tt - t^(-2k) u_xx + (mu/t) u_t + (nu^2/t^2) u = g,   t >= 1,
//! ```
//!
//! together with the constants derived from (mu, nu^2, k) that drive the
//! kernel formulas, and the critical-exponent bookkeeping for the semilinear
//! source |u_t|^p.

use crate::error::Error;

/// Relative tolerance used to decide p == p_crit in lifespan classification.
const CRIT_REL_TOL: f64 = 1e-12;

/// A real number extended by the two sentinel states the threshold algebra
/// produces: an infinite exponent and an exponential-type lifespan bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExtReal {
    Finite(f64),
    PositiveInfinity,
    /// Lifespan of the form exp(C eps^-(p-1)), arising exactly at p = p_crit.
    CriticalExponential,
}

impl ExtReal {
    pub fn as_finite(self) -> Option<f64> {
        match self {
            ExtReal::Finite(v) => Some(v),
            _ => None,
        }
    }
}

impl std::fmt::Display for ExtReal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ExtReal::Finite(v) => write!(f, "{v}"),
            ExtReal::PositiveInfinity => write!(f, "inf"),
            ExtReal::CriticalExponential => write!(f, "exp(C*eps^-(p-1))"),
        }
    }
}

/// Problem data for one experiment.
///
/// `n` is the spatial dimension entering the threshold formulas; the solvers
/// themselves are one-dimensional. `r` is the support radius of the initial
/// data, `eps` the data amplitude, `p` the source exponent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub n: u32,
    pub k: f64,
    pub mu: f64,
    pub nu2: f64,
    pub p: f64,
    pub eps: f64,
    pub r: f64,
}

impl ModelParams {
    /// Speed t^-k, damping 2/t, no mass. The case the kernel identities and
    /// the lifespan experiments are centred on.
    pub fn eds(n: u32, k: f64, p: f64, eps: f64, r: f64) -> Self {
        ModelParams { n, k, mu: 2.0, nu2: 0.0, p, eps, r }
    }

    /// Tricomi-type variant: same speed, no damping, no mass.
    pub fn tricomi(n: u32, k: f64, p: f64, eps: f64, r: f64) -> Self {
        ModelParams { n, k, mu: 0.0, nu2: 0.0, p, eps, r }
    }

    /// Range checks on every field. A negative discriminant delta is allowed
    /// here; it is rejected only when kernels are actually evaluated.
    pub fn validate(&self) -> Result<(), Error> {
        fn check(
            field: &'static str,
            value: f64,
            ok: bool,
            constraint: &'static str,
        ) -> Result<(), Error> {
            if ok && value.is_finite() {
                Ok(())
            } else {
                Err(Error::OutOfRange { field, value, constraint })
            }
        }
        if self.n < 1 {
            return Err(Error::OutOfRange {
                field: "n",
                value: self.n as f64,
                constraint: "n >= 1",
            });
        }
        check("k", self.k, self.k > 0.0 && self.k < 1.0, "0 < k < 1")?;
        check("mu", self.mu, self.mu >= 0.0, "mu >= 0")?;
        check("nu2", self.nu2, self.nu2 >= 0.0, "nu2 >= 0")?;
        check("p", self.p, self.p > 1.0, "p > 1")?;
        check("eps", self.eps, self.eps > 0.0, "eps > 0")?;
        check("r", self.r, self.r > 0.0, "r > 0")?;
        Ok(())
    }

    /// Constants derived from (mu, nu^2, k), plus threshold bookkeeping.
    /// Fails with `NegativeDelta` when (mu-1)^2 < 4 nu^2.
    pub fn derived(&self) -> Result<DerivedConstants, Error> {
        self.validate()?;
        let d = delta(self.mu, self.nu2);
        if d < 0.0 {
            return Err(Error::NegativeDelta { delta: d });
        }
        let sqrt_delta = d.sqrt();
        let gamma = 0.5 - sqrt_delta / (2.0 * (1.0 - self.k));
        let e = sqrt_delta / (1.0 - self.k);
        let c = 2f64.powf(-e) * (1.0 - self.k).powf(-1.0 + e);
        let p_crit = candidate_critical_p(self.n, self.k, self.mu)?;
        let p_crit_proven = self.mu == 0.0 || self.mu == 2.0;
        let lifespan_slope =
            if p_crit_proven { lifespan_slope(self.n, self.k, self.p, self.mu).ok() } else { None };
        Ok(DerivedConstants {
            delta: d,
            sqrt_delta,
            gamma,
            c,
            p_crit,
            p_crit_proven,
            lifespan_slope,
        })
    }
}

/// Constants entering the kernel formulas and the threshold classification.
///
/// `p_crit` is the Glassey exponent of the shifted dimension (1-k)n + 2k + mu;
/// the threshold is proved only for mu in {0, 2} (`p_crit_proven`), outside
/// that set it is a conjectured candidate. `lifespan_slope` is present only
/// for mu in {0, 2} with 1 < p <= p_crit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DerivedConstants {
    pub delta: f64,
    pub sqrt_delta: f64,
    pub gamma: f64,
    pub c: f64,
    pub p_crit: ExtReal,
    pub p_crit_proven: bool,
    pub lifespan_slope: Option<ExtReal>,
}

/// Discriminant delta = (mu - 1)^2 - 4 nu^2.
pub fn delta(mu: f64, nu2: f64) -> f64 {
    (mu - 1.0) * (mu - 1.0) - 4.0 * nu2
}

/// Glassey exponent p(m) = (m + 1)/(m - 1) for m > 1, infinite at m = 1.
pub fn glassey(m: f64) -> Result<ExtReal, Error> {
    if !m.is_finite() || m < 1.0 {
        return Err(Error::OutOfRange { field: "m", value: m, constraint: "m >= 1" });
    }
    if m == 1.0 {
        Ok(ExtReal::PositiveInfinity)
    } else {
        Ok(ExtReal::Finite((m + 1.0) / (m - 1.0)))
    }
}

fn check_nk(n: u32, k: f64) -> Result<(), Error> {
    if n < 1 {
        return Err(Error::OutOfRange { field: "n", value: n as f64, constraint: "n >= 1" });
    }
    if !(k > 0.0 && k < 1.0) || !k.is_finite() {
        return Err(Error::OutOfRange { field: "k", value: k, constraint: "0 < k < 1" });
    }
    Ok(())
}

/// Critical exponent p_crit(n, k, mu) = glassey((1-k)n + 2k + mu) for the two
/// values of mu the threshold is proved for.
pub fn critical_p(n: u32, k: f64, mu: f64) -> Result<ExtReal, Error> {
    if mu != 0.0 && mu != 2.0 {
        return Err(Error::UnsupportedMu { mu });
    }
    candidate_critical_p(n, k, mu)
}

/// Same formula for arbitrary mu >= 0. Outside mu in {0, 2} this is a
/// conjectured candidate, not a proved threshold.
pub fn candidate_critical_p(n: u32, k: f64, mu: f64) -> Result<ExtReal, Error> {
    check_nk(n, k)?;
    if !(mu >= 0.0) || !mu.is_finite() {
        return Err(Error::OutOfRange { field: "mu", value: mu, constraint: "mu >= 0" });
    }
    glassey((1.0 - k) * n as f64 + 2.0 * k + mu)
}

/// Exponent of the upper lifespan bound T(eps) <= C eps^slope in the
/// subcritical range, switching to the exponential form exactly at p_crit.
///
/// slope = -1 / (1/(p-1) - ((1-k)n + 2k + mu - 1)/2), mu in {0, 2}.
pub fn lifespan_slope(n: u32, k: f64, p: f64, mu: f64) -> Result<ExtReal, Error> {
    if mu != 0.0 && mu != 2.0 {
        return Err(Error::UnsupportedMu { mu });
    }
    check_nk(n, k)?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::OutOfRange { field: "p", value: p, constraint: "p > 1" });
    }
    let arg = (1.0 - k) * n as f64 + 2.0 * k + mu;
    match glassey(arg)? {
        ExtReal::Finite(pc) => {
            if (p - pc).abs() <= CRIT_REL_TOL * pc {
                return Ok(ExtReal::CriticalExponential);
            }
            if p > pc {
                return Err(Error::OutOfRange { field: "p", value: p, constraint: "p <= p_crit" });
            }
        }
        // p_crit infinite: every finite p > 1 is subcritical.
        _ => {}
    }
    let q = 1.0 / (p - 1.0) - (arg - 1.0) / 2.0;
    Ok(ExtReal::Finite(-1.0 / q))
}
