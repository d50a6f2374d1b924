//! Solution kernels E, K0, K1 of the damped wave equation with speed t^-k.
//!
//! Geometry helpers:
//!
//! ```text
//! phi(t) = t^(1-k)/(1-k)          distance travelled by a characteristic,
//! A(t)   = phi(t) - phi(1)        backward light-cone radius from time 1,
//! zeta   = ((phi_t - phi_b)^2 - (y-x)^2) / ((phi_t + phi_b)^2 - (y-x)^2).
//! ```
//!
//! The kernel itself, defined on the backward characteristic triangle
//! 1 <= b <= t, |y - x| <= phi(t) - phi(b):
//!
//! ```text
//! E(t,x;b,y) = c t^(-mu/2 + (1-sqrt(delta))/2) b^(mu/2 + (1-sqrt(delta))/2)
//!              * [(phi_t + phi_b)^2 - (y-x)^2]^(-gamma) * F(gamma,gamma;1;zeta)
//! ```
//!
//! K1 is E restricted to b = 1; K0 = mu K1 - dE/db at b = 1.

use crate::error::Error;
use crate::hypergeom::{hyp2f1, hyp2f1_dz};
use crate::params::{DerivedConstants, ModelParams};

/// Relative slack for cone-membership checks, scaled by 1 + phi(t).
pub const CONE_TOL: f64 = 1e-12;
/// zeta numerators more negative than this (relative to the denominator
/// scale) are rejected rather than clamped.
pub const ZETA_NEG_TOL: f64 = 1e-14;
/// zeta is clamped below 1 by this margin before entering F.
pub const ZETA_MAX: f64 = 1.0 - 1e-16;
/// Default absolute tolerance handed to the hypergeometric evaluator.
pub const DEFAULT_HYP_TOL: f64 = 1e-12;

fn check_k(k: f64) -> Result<(), Error> {
    if k > 0.0 && k < 1.0 && k.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange { field: "k", value: k, constraint: "0 < k < 1" })
    }
}

/// phi(t) = t^(1-k) / (1-k) for t > 0.
pub fn phi_k(t: f64, k: f64) -> Result<f64, Error> {
    check_k(k)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange { field: "t", value: t, constraint: "t > 0" });
    }
    Ok(t.powf(1.0 - k) / (1.0 - k))
}

/// Cone radius A(t) = phi(t) - phi(1) for t >= 1.
pub fn a_k(t: f64, k: f64) -> Result<f64, Error> {
    check_k(k)?;
    if !(t >= 1.0 - 1e-12) || !t.is_finite() {
        return Err(Error::OutOfRange { field: "t", value: t, constraint: "t >= 1" });
    }
    Ok(((t.powf(1.0 - k) - 1.0) / (1.0 - k)).max(0.0))
}

/// Inverse of A: a_k_inv(A(t)) = t for s >= 0.
pub fn a_k_inv(s: f64, k: f64) -> Result<f64, Error> {
    check_k(k)?;
    if !(s >= -1e-12) || !s.is_finite() {
        return Err(Error::OutOfRange { field: "s", value: s, constraint: "s >= 0" });
    }
    Ok((1.0 + (1.0 - k) * s.max(0.0)).powf(1.0 / (1.0 - k)))
}

/// A point (b, y) inside the backward characteristic triangle of (t, x).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConePoint {
    pub t: f64,
    pub x: f64,
    pub b: f64,
    pub y: f64,
}

impl ConePoint {
    pub fn new(t: f64, x: f64, b: f64, y: f64) -> Self {
        ConePoint { t, x, b, y }
    }
}

fn validate_cone(pt: &ConePoint, k: f64) -> Result<(f64, f64), Error> {
    check_k(k)?;
    if !(pt.t >= 1.0 - 1e-12) {
        return Err(Error::OutOfRange { field: "t", value: pt.t, constraint: "t >= 1" });
    }
    if !(pt.b >= 1.0 - 1e-12 && pt.b <= pt.t * (1.0 + 1e-12)) {
        return Err(Error::OutOfRange { field: "b", value: pt.b, constraint: "1 <= b <= t" });
    }
    let phi_t = phi_k(pt.t, k)?;
    let phi_b = phi_k(pt.b, k)?;
    let slack = CONE_TOL * (1.0 + phi_t);
    if (pt.y - pt.x).abs() > phi_t - phi_b + slack {
        return Err(Error::Domain(format!(
            "point (b = {}, y = {}) outside the backward triangle of (t = {}, x = {})",
            pt.b, pt.y, pt.t, pt.x
        )));
    }
    Ok((phi_t, phi_b))
}

/// Self-similar kernel argument, clamped into [0, `ZETA_MAX`].
pub fn zeta(pt: &ConePoint, k: f64) -> Result<f64, Error> {
    let (phi_t, phi_b) = validate_cone(pt, k)?;
    let dy2 = (pt.y - pt.x) * (pt.y - pt.x);
    let num = (phi_t - phi_b) * (phi_t - phi_b) - dy2;
    let den = (phi_t + phi_b) * (phi_t + phi_b) - dy2;
    if num < -ZETA_NEG_TOL * den.max(1.0) {
        return Err(Error::Domain(format!("zeta numerator {num:.3e} negative beyond tolerance")));
    }
    Ok((num.max(0.0) / den).min(ZETA_MAX))
}

/// d(zeta)/db = -4 b^-k phi_t (phi_t^2 - phi_b^2 - (y-x)^2) / den^2.
pub fn dzeta_db(pt: &ConePoint, k: f64) -> Result<f64, Error> {
    let (phi_t, phi_b) = validate_cone(pt, k)?;
    let dy2 = (pt.y - pt.x) * (pt.y - pt.x);
    let den = (phi_t + phi_b) * (phi_t + phi_b) - dy2;
    Ok(-4.0 * pt.b.powf(-k) * phi_t * (phi_t * phi_t - phi_b * phi_b - dy2) / (den * den))
}

/// Validated parameters plus the derived constants the kernels need.
/// Construction fails with `NegativeDelta` when (mu-1)^2 < 4 nu^2.
#[derive(Debug, Clone)]
pub struct KernelContext {
    pub params: ModelParams,
    pub derived: DerivedConstants,
    pub hyp_tol: f64,
}

impl KernelContext {
    pub fn new(params: ModelParams) -> Result<Self, Error> {
        params.validate()?;
        let derived = params.derived()?;
        Ok(KernelContext { params, derived, hyp_tol: DEFAULT_HYP_TOL })
    }

    pub fn with_hyp_tol(mut self, tol: f64) -> Self {
        self.hyp_tol = tol;
        self
    }

    fn exponents(&self) -> (f64, f64) {
        let half = 0.5 * (1.0 - self.derived.sqrt_delta);
        (-0.5 * self.params.mu + half, 0.5 * self.params.mu + half)
    }
}

/// Kernel E at a cone point.
pub fn kernel_e(pt: &ConePoint, ctx: &KernelContext) -> Result<f64, Error> {
    let k = ctx.params.k;
    let (phi_t, phi_b) = validate_cone(pt, k)?;
    let z = zeta(pt, k)?;
    let dy2 = (pt.y - pt.x) * (pt.y - pt.x);
    let den = (phi_t + phi_b) * (phi_t + phi_b) - dy2;
    let g = ctx.derived.gamma;
    let f = hyp2f1(g, g, 1.0, z, ctx.hyp_tol)?;
    let (at, ab) = ctx.exponents();
    Ok(ctx.derived.c * pt.t.powf(at) * pt.b.powf(ab) * den.powf(-g) * f.value)
}

/// Analytic dE/db, assembled by the chain rule:
///
/// ```text
/// dE/db = c t^at b^ab D^-gamma [ (ab/b - gamma D'/D) F(gamma,gamma;1;zeta)
///                                + gamma^2 F(gamma+1,gamma+1;2;zeta) dzeta/db ]
/// ```
///
/// with D' = 2 (phi_t + phi_b) b^-k. The gamma^2 factor on the second term
/// is the derivative of F(gamma,gamma;1;.); a finite-difference oracle pins
/// this form down in the tests.
pub fn kernel_e_db(pt: &ConePoint, ctx: &KernelContext) -> Result<f64, Error> {
    let k = ctx.params.k;
    let (phi_t, phi_b) = validate_cone(pt, k)?;
    let z = zeta(pt, k)?;
    let dy2 = (pt.y - pt.x) * (pt.y - pt.x);
    let den = (phi_t + phi_b) * (phi_t + phi_b) - dy2;
    let dprime = 2.0 * (phi_t + phi_b) * pt.b.powf(-k);
    let g = ctx.derived.gamma;
    let f1 = hyp2f1(g, g, 1.0, z, ctx.hyp_tol)?;
    let fz = if g == 0.0 { 0.0 } else { hyp2f1_dz(g, g, 1.0, z, ctx.hyp_tol)?.value };
    let zb = dzeta_db(pt, k)?;
    let (at, ab) = ctx.exponents();
    let prefix = ctx.derived.c * pt.t.powf(at) * pt.b.powf(ab) * den.powf(-g);
    Ok(prefix * ((ab / pt.b - g * dprime / den) * f1.value + fz * zb))
}

/// Kernel weighting the u1 data: K1(t, x, y) = E(t, x; 1, y).
pub fn kernel_k1(t: f64, x: f64, y: f64, ctx: &KernelContext) -> Result<f64, Error> {
    kernel_e(&ConePoint::new(t, x, 1.0, y), ctx)
}

/// Kernel weighting the u0 data: K0 = mu E - dE/db, both at b = 1.
pub fn kernel_k0(t: f64, x: f64, y: f64, ctx: &KernelContext) -> Result<f64, Error> {
    let pt = ConePoint::new(t, x, 1.0, y);
    let e = kernel_e(&pt, ctx)?;
    let edb = kernel_e_db(&pt, ctx)?;
    Ok(ctx.params.mu * e - edb)
}
