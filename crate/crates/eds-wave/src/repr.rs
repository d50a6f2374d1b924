//! Closed-form evaluation of the linear Cauchy problem via the kernel
//! representation.
//!
//! The solution at (t, x) is assembled from four pieces:
//!
//! ```text
//! u(t,x) = (1/2) t^((k-mu)/2) [u0(x + A(t)) + u0(x - A(t))]
//!        + int u0(y) K0(t,x,y) dy  +  int u1(y) K1(t,x,y) dy
//!        + int_1^t int g(b,y) E(t,x;b,y) dy db
//! ```
//!
//! with the single integrals over [x - A(t), x + A(t)] and the inner Duhamel
//! integral over |y - x| <= phi(t) - phi(b).

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::Error;
use crate::field::{Coords, SolutionField};
use crate::kernels::{a_k, kernel_e, kernel_k0, kernel_k1, phi_k, ConePoint, KernelContext};
use crate::params::ModelParams;
use crate::quad::{integrate, QuadConfig};

/// One-dimensional data profile: identically zero, the built-in compactly
/// supported bump `a (1 - (x/R)^2)^3`, or a user-supplied function.
#[derive(Clone)]
pub enum Profile {
    Zero,
    Bump { amp: f64 },
    Func(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "Zero"),
            Profile::Bump { amp } => write!(f, "Bump {{ amp: {amp} }}"),
            Profile::Func(_) => write!(f, "Func(..)"),
        }
    }
}

impl Profile {
    fn eval(&self, x: f64, r: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Bump { amp } => {
                let s = x / r;
                if s.abs() < 1.0 {
                    let w = 1.0 - s * s;
                    amp * w * w * w
                } else {
                    0.0
                }
            }
            Profile::Func(f) => f(x),
        }
    }

    fn is_zero_variant(&self) -> bool {
        matches!(self, Profile::Zero)
    }
}

/// Space-time forcing term.
#[derive(Clone)]
pub enum Source {
    None,
    Func(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Source::None => write!(f, "None"),
            Source::Func(_) => write!(f, "Func(..)"),
        }
    }
}

impl Source {
    pub fn eval(&self, b: f64, y: f64) -> f64 {
        match self {
            Source::None => 0.0,
            Source::Func(f) => f(b, y),
        }
    }
}

/// Initial data (position, velocity), forcing, and the common support
/// radius of the data profiles.
#[derive(Debug, Clone)]
pub struct CauchyData {
    pub u0: Profile,
    pub u1: Profile,
    pub g: Source,
    pub r: f64,
}

impl CauchyData {
    /// Validates the support radius and spot-checks that both data profiles
    /// vanish outside it.
    pub fn new(u0: Profile, u1: Profile, g: Source, r: f64) -> Result<Self, Error> {
        if !(r > 0.0) || !r.is_finite() {
            return Err(Error::OutOfRange { field: "r", value: r, constraint: "r > 0" });
        }
        let data = CauchyData { u0, u1, g, r };
        let mut interior: f64 = 0.0;
        for i in 0..64 {
            let x = r * (i as f64 + 0.5) / 64.0;
            interior = interior
                .max(data.eval_u0(x).abs())
                .max(data.eval_u0(-x).abs())
                .max(data.eval_u1(x).abs())
                .max(data.eval_u1(-x).abs());
        }
        let tol = 1e-10 * (1.0 + interior);
        for i in 0..64 {
            let x = r * (1.0 + 3.0 * i as f64 / 63.0);
            for v in [data.eval_u0(x), data.eval_u0(-x), data.eval_u1(x), data.eval_u1(-x)] {
                if v.abs() > tol {
                    return Err(Error::Domain(format!(
                        "data profile is {v:.3e} at |x| = {x}, outside the declared support radius {r}"
                    )));
                }
            }
        }
        Ok(data)
    }

    /// Bump initial position and velocity with the given amplitudes.
    pub fn bump(amp0: f64, amp1: f64, r: f64) -> Self {
        CauchyData {
            u0: if amp0 == 0.0 { Profile::Zero } else { Profile::Bump { amp: amp0 } },
            u1: if amp1 == 0.0 { Profile::Zero } else { Profile::Bump { amp: amp1 } },
            g: Source::None,
            r,
        }
    }

    pub fn eval_u0(&self, x: f64) -> f64 {
        self.u0.eval(x, self.r)
    }

    pub fn eval_u1(&self, x: f64) -> f64 {
        self.u1.eval(x, self.r)
    }
}

/// Context preset with damping 2/t and no mass term.
pub fn preset_eds(n: u32, k: f64, p: f64, eps: f64, r: f64) -> Result<KernelContext, Error> {
    KernelContext::new(ModelParams::eds(n, k, p, eps, r))
}

/// Context preset with no damping and no mass term.
pub fn preset_tricomi(n: u32, k: f64, p: f64, eps: f64, r: f64) -> Result<KernelContext, Error> {
    KernelContext::new(ModelParams::tricomi(n, k, p, eps, r))
}

/// Intersection of the light interval [x-a, x+a] with the data support
/// [-r, r]; `None` when they do not overlap.
fn clip(lo: f64, hi: f64, r: f64) -> Option<(f64, f64)> {
    let l = lo.max(-r);
    let h = hi.min(r);
    (l < h).then_some((l, h))
}

/// Evaluate the solution at a single space-time point.
pub fn solve_point(
    t: f64,
    x: f64,
    data: &CauchyData,
    ctx: &KernelContext,
    q: &QuadConfig,
) -> Result<f64, Error> {
    if !(t >= 1.0) || !t.is_finite() {
        return Err(Error::OutOfRange { field: "t", value: t, constraint: "t >= 1" });
    }
    let k = ctx.params.k;
    let mu = ctx.params.mu;
    let a = a_k(t, k)?;

    let mut total = 0.5 * t.powf(0.5 * (k - mu)) * (data.eval_u0(x + a) + data.eval_u0(x - a));

    if !data.u0.is_zero_variant() {
        if let Some((lo, hi)) = clip(x - a, x + a, data.r) {
            total +=
                integrate(|y| Ok(data.eval_u0(y) * kernel_k0(t, x, y, ctx)?), lo, hi, q)?.value;
        }
    }
    if !data.u1.is_zero_variant() {
        if let Some((lo, hi)) = clip(x - a, x + a, data.r) {
            total +=
                integrate(|y| Ok(data.eval_u1(y) * kernel_k1(t, x, y, ctx)?), lo, hi, q)?.value;
        }
    }
    if !matches!(data.g, Source::None) && t > 1.0 {
        let phi_t = phi_k(t, k)?;
        // Inner tolerance is budgeted per unit length in b so the stacked
        // estimate stays within q.tol overall.
        let inner_cfg = QuadConfig { tol: q.tol / (t - 1.0), max_depth: q.max_depth };
        let duhamel = integrate(
            |b| {
                let width = phi_t - phi_k(b, k)?;
                if width <= 0.0 {
                    return Ok(0.0);
                }
                let inner = integrate(
                    |y| Ok(data.g.eval(b, y) * kernel_e(&ConePoint::new(t, x, b, y), ctx)?),
                    x - width,
                    x + width,
                    &inner_cfg,
                )?;
                Ok(inner.value)
            },
            1.0,
            t,
            q,
        )?;
        total += duhamel.value;
    }
    Ok(total)
}

/// Evaluate the solution on a rectangular grid. Nodes are computed in
/// parallel through the same code path as [`solve_point`] and assembled in
/// row-major order.
pub fn solve_grid(
    times: &[f64],
    xs: &[f64],
    data: &CauchyData,
    ctx: &KernelContext,
    q: &QuadConfig,
) -> Result<SolutionField, Error> {
    if times.is_empty() || xs.is_empty() {
        return Err(Error::GridTooSmall("solve_grid needs at least one time and one x".into()));
    }
    if !(times[0] >= 1.0) {
        return Err(Error::OutOfRange { field: "times[0]", value: times[0], constraint: "t >= 1" });
    }
    let nx = xs.len();
    let values: Result<Vec<f64>, Error> = (0..times.len() * nx)
        .into_par_iter()
        .map(|idx| solve_point(times[idx / nx], xs[idx % nx], data, ctx, q))
        .collect();
    SolutionField::new(Coords::Original, times.to_vec(), xs.to_vec(), values?, None)
}
