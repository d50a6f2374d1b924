//! Finite-difference evolution of the linear and semilinear problems.
//!
//! Integration happens in the unit-speed chart tau = t^(1-k) - 1,
//! z = (1-k) x, where the equation becomes
//!
//! ```text
//! v_tautau - v_zz + mu~ (1+tau)^-1 v_tau + nu~^2 (1+tau)^-2 v = f
//! ```
//!
//! with mu~ = (mu-k)/(1-k) and nu~^2 = nu^2/(1-k)^2. A three-level leapfrog
//! scheme with semi-implicit damping keeps second order; the derivative
//! nonlinearity |u_t|^p maps to the explicit source
//! (1-k)^(p-2) (1+tau)^((2k-kp)/(1-k)) |v_tau|^p.

use crate::error::Error;
use crate::field::{Coords, SolutionField};
use crate::params::{delta, ModelParams};
use crate::repr::{CauchyData, Source};

/// Coefficients of the unit-speed chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformedParams {
    pub mu_tilde: f64,
    pub nu_tilde2: f64,
    pub delta_tilde: f64,
}

/// Map damping/mass coefficients into the unit-speed chart.
pub fn to_transformed(params: &ModelParams) -> Result<TransformedParams, Error> {
    params.validate()?;
    let onemk = 1.0 - params.k;
    Ok(TransformedParams {
        mu_tilde: (params.mu - params.k) / onemk,
        nu_tilde2: params.nu2 / (onemk * onemk),
        delta_tilde: delta(params.mu, params.nu2) / (onemk * onemk),
    })
}

/// Uniform space-time grid in the unit-speed chart.
#[derive(Debug, Clone, Copy)]
pub struct Grid1D {
    pub z_min: f64,
    pub z_max: f64,
    /// Spatial step.
    pub dz: f64,
    /// CFL fraction in (0, 1]: dtau <= dt_factor * dz.
    pub dt_factor: f64,
    /// Evolution horizon in transformed time.
    pub tau_end: f64,
    /// Keep every n-th time level in the returned field (levels 0 and the
    /// final one are always kept). 0 behaves like 1.
    pub store_every: usize,
}

impl Grid1D {
    /// Symmetric grid just large enough for data of support radius `r`
    /// plus the light cone up to `tau_end`, with padding.
    pub fn for_cone(k: f64, r: f64, tau_end: f64, dz: f64, dt_factor: f64) -> Grid1D {
        let span = (1.0 - k) * r + tau_end + 4.0 * dz;
        Grid1D { z_min: -span, z_max: span, dz, dt_factor, tau_end, store_every: 1 }
    }

    pub fn with_store_every(mut self, n: usize) -> Grid1D {
        self.store_every = n;
        self
    }
}

/// What tripped the blow-up detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Trigger {
    Threshold,
    NonFinite,
}

/// Outcome of blow-up detection on one evolution run.
#[derive(Debug, Clone, Copy)]
pub struct BlowupReport {
    pub detected: bool,
    /// Estimated lifespan in original time, when detected.
    pub t_num: Option<f64>,
    pub trigger: Option<Trigger>,
    /// Set by refinement sweeps when a half-step rerun reproduces `t_num`
    /// within 5% relative.
    pub refined: bool,
}

/// Per-step record of the original-time derivative maximum.
#[derive(Debug, Clone, Copy)]
pub struct StepSample {
    pub tau: f64,
    /// max over the grid of |u_t| = (1-k)(1+tau)^(-k/(1-k)) |v_tau|.
    pub max_ut: f64,
}

enum SourceMode<'a> {
    Linear(&'a Source),
    Semilinear { coeff: f64, p: f64 },
}

struct Evolution {
    field: SolutionField,
    samples: Vec<StepSample>,
}

fn evolve_core(
    params: &ModelParams,
    data: &CauchyData,
    grid: &Grid1D,
    mode: SourceMode<'_>,
    stop_threshold: Option<f64>,
) -> Result<Evolution, Error> {
    params.validate()?;
    let tp = to_transformed(params)?;
    let k = params.k;
    let onemk = 1.0 - k;

    if !(grid.dz > 0.0) || !grid.dz.is_finite() {
        return Err(Error::OutOfRange { field: "dz", value: grid.dz, constraint: "dz > 0" });
    }
    if !(grid.tau_end > 0.0) || !grid.tau_end.is_finite() {
        return Err(Error::OutOfRange {
            field: "tau_end",
            value: grid.tau_end,
            constraint: "tau_end > 0",
        });
    }
    if !(grid.dt_factor > 0.0) {
        return Err(Error::OutOfRange {
            field: "dt_factor",
            value: grid.dt_factor,
            constraint: "dt_factor > 0",
        });
    }
    if grid.dt_factor > 1.0 {
        return Err(Error::CflViolation { dtau: grid.dt_factor * grid.dz, dz: grid.dz });
    }

    let nz = ((grid.z_max - grid.z_min) / grid.dz + 0.5).floor() as usize + 1;
    if nz < 8 {
        return Err(Error::GridTooSmall(format!("only {nz} spatial nodes; need at least 8")));
    }
    let z_hi = grid.z_min + (nz - 1) as f64 * grid.dz;
    // The light cone of the data must stay strictly inside the domain.
    let needed = onemk * data.r + grid.tau_end + 2.0 * grid.dz;
    if grid.z_min > -needed + 1e-9 || z_hi < needed - 1e-9 {
        return Err(Error::GridTooSmall(format!(
            "domain [{}, {z_hi}] cannot contain the light cone; need +-{needed}",
            grid.z_min
        )));
    }

    let nsteps = ((grid.tau_end / (grid.dt_factor * grid.dz)).ceil() as usize).max(2);
    let dtau = grid.tau_end / nsteps as f64;

    let zs: Vec<f64> = (0..nz).map(|j| grid.z_min + j as f64 * grid.dz).collect();
    let mut v_prev: Vec<f64> = zs.iter().map(|&z| data.eval_u0(z / onemk)).collect();
    let w0: Vec<f64> = zs.iter().map(|&z| data.eval_u1(z / onemk) / onemk).collect();

    // Chain-rule factor turning v_tau into u_t at a given tau.
    let ut_factor = |tau: f64| onemk * (1.0 + tau).powf(-k / onemk);
    // Exponents of the transformed source terms.
    let lin_pow = 2.0 * k / onemk;
    let (nl_coeff, nl_pow, p) = match mode {
        SourceMode::Linear(_) => (0.0, 0.0, 1.0),
        SourceMode::Semilinear { coeff, p } => {
            (coeff * onemk.powf(p - 2.0), (2.0 * k - k * p) / onemk, p)
        }
    };
    // Per-level source scales; the node loops only touch cheap expressions.
    let level_scales = |tau: f64| -> (f64, f64, f64) {
        let t_orig = (1.0 + tau).powf(1.0 / onemk);
        let lin_scale = (1.0 + tau).powf(lin_pow) / (onemk * onemk);
        let nl_scale = nl_coeff * (1.0 + tau).powf(nl_pow);
        (t_orig, lin_scale, nl_scale)
    };

    let inv_dz2 = 1.0 / (grid.dz * grid.dz);
    let lap = |v: &[f64], j: usize| (v[j - 1] - 2.0 * v[j] + v[j + 1]) * inv_dz2;

    let store_every = grid.store_every.max(1);
    let mut stored_taus: Vec<f64> = Vec::new();
    let mut stored_values: Vec<f64> = Vec::new();
    let mut stored_dts: Vec<f64> = Vec::new();
    let store = |tau: f64,
                 v: &[f64],
                 vt: &[f64],
                 taus: &mut Vec<f64>,
                 vals: &mut Vec<f64>,
                 dts: &mut Vec<f64>| {
        taus.push(tau);
        vals.extend_from_slice(v);
        dts.extend_from_slice(vt);
    };

    let mut samples = Vec::with_capacity(nsteps + 1);
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    samples.push(StepSample { tau: 0.0, max_ut: ut_factor(0.0) * max_abs(&w0) });
    store(0.0, &v_prev, &w0, &mut stored_taus, &mut stored_values, &mut stored_dts);

    // First step by Taylor expansion, with v_tautau(0) taken from the PDE.
    let mut v_curr = vec![0.0f64; nz];
    {
        let (t_orig, lin_scale, nl_scale) = level_scales(0.0);
        for j in 1..nz - 1 {
            let src = match &mode {
                SourceMode::Linear(Source::None) => 0.0,
                SourceMode::Linear(g) => g.eval(t_orig, zs[j] / onemk) * lin_scale,
                SourceMode::Semilinear { .. } => nl_scale * w0[j].abs().powf(p),
            };
            let acc = lap(&v_prev, j) - tp.mu_tilde * w0[j] - tp.nu_tilde2 * v_prev[j] + src;
            v_curr[j] = v_prev[j] + dtau * w0[j] + 0.5 * dtau * dtau * acc;
        }
    }

    let mut vt = vec![0.0f64; nz];
    let mut v_next = vec![0.0f64; nz];
    let mut level = 1usize;
    let mut triggered = false;

    loop {
        let tau = level as f64 * dtau;
        // Lagged derivative estimate at the current level: one-sided
        // second order once three levels exist, first order at level 1.
        if level == 1 {
            for j in 0..nz {
                vt[j] = (v_curr[j] - v_prev[j]) / dtau;
            }
        } else {
            for j in 0..nz {
                vt[j] = (3.0 * v_curr[j] - 4.0 * v_prev[j] + v_next[j]) / (2.0 * dtau);
            }
        }
        let m = ut_factor(tau) * max_abs(&vt);
        samples.push(StepSample { tau, max_ut: m });

        if let Some(thr) = stop_threshold {
            if !m.is_finite() || m >= thr {
                triggered = true;
            }
        }
        let last = level == nsteps || triggered;
        if last || level % store_every == 0 {
            store(tau, &v_curr, &vt, &mut stored_taus, &mut stored_values, &mut stored_dts);
        }
        if last {
            break;
        }

        let alpha = tp.mu_tilde / (1.0 + tau);
        let mass = tp.nu_tilde2 / ((1.0 + tau) * (1.0 + tau));
        let denom = 1.0 / (dtau * dtau) + alpha / (2.0 * dtau);
        let (t_orig, lin_scale, nl_scale) = level_scales(tau);
        v_next[0] = 0.0;
        v_next[nz - 1] = 0.0;
        for j in 1..nz - 1 {
            let src = match &mode {
                SourceMode::Linear(Source::None) => 0.0,
                SourceMode::Linear(g) => g.eval(t_orig, zs[j] / onemk) * lin_scale,
                SourceMode::Semilinear { .. } => nl_scale * vt[j].abs().powf(p),
            };
            let rhs = (2.0 * v_curr[j] - v_prev[j]) / (dtau * dtau)
                + alpha * v_prev[j] / (2.0 * dtau)
                + lap(&v_curr, j)
                - mass * v_curr[j]
                + src;
            v_next[j] = rhs / denom;
        }
        // Rotate buffers; v_next now holds the stale (level-1) values that
        // the lagged derivative above reads as v^{n-2}.
        std::mem::swap(&mut v_prev, &mut v_curr);
        std::mem::swap(&mut v_curr, &mut v_next);
        level += 1;
    }

    let field =
        SolutionField::new(Coords::Transformed, stored_taus, zs, stored_values, Some(stored_dts))?;
    Ok(Evolution { field, samples })
}

/// Second-order evolution of the linear problem; the returned field is in
/// original coordinates.
pub fn evolve_linear(
    params: &ModelParams,
    data: &CauchyData,
    grid: &Grid1D,
) -> Result<SolutionField, Error> {
    let ev = evolve_core(params, data, grid, SourceMode::Linear(&data.g), None)?;
    ev.field.to_original(params.k)
}

/// Linear evolution left in the transformed chart, for callers that work
/// there directly.
pub fn evolve_linear_transformed(
    params: &ModelParams,
    data: &CauchyData,
    grid: &Grid1D,
) -> Result<SolutionField, Error> {
    Ok(evolve_core(params, data, grid, SourceMode::Linear(&data.g), None)?.field)
}

/// Semilinear evolution with the derivative nonlinearity scaled by `coeff`
/// (1 is the physical problem, 0 degenerates to the linear solver). Stops
/// at `tau_end` or when max|u_t| crosses `threshold`.
pub fn evolve_semilinear_with_coeff(
    params: &ModelParams,
    data: &CauchyData,
    grid: &Grid1D,
    threshold: f64,
    coeff: f64,
) -> Result<(SolutionField, BlowupReport), Error> {
    if !(threshold > 0.0) {
        return Err(Error::OutOfRange {
            field: "threshold",
            value: threshold,
            constraint: "threshold > 0",
        });
    }
    if !matches!(data.g, Source::None) {
        return Err(Error::Domain(
            "semilinear evolution generates its own source; external forcing must be empty".into(),
        ));
    }
    let ev = evolve_core(
        params,
        data,
        grid,
        SourceMode::Semilinear { coeff, p: params.p },
        Some(threshold),
    )?;
    let report = detect_blowup(&ev.samples, threshold, params.k);
    Ok((ev.field.to_original(params.k)?, report))
}

/// Semilinear evolution of the physical problem (`coeff = 1`).
pub fn evolve_semilinear(
    params: &ModelParams,
    data: &CauchyData,
    grid: &Grid1D,
    threshold: f64,
) -> Result<(SolutionField, BlowupReport), Error> {
    evolve_semilinear_with_coeff(params, data, grid, threshold, 1.0)
}

/// Scan a derivative-maximum history for the first threshold crossing or
/// non-finite value and convert the trigger time to original coordinates.
pub fn detect_blowup(history: &[StepSample], threshold: f64, k: f64) -> BlowupReport {
    let none = BlowupReport { detected: false, t_num: None, trigger: None, refined: false };
    let to_t = |tau: f64| (1.0 + tau).powf(1.0 / (1.0 - k));
    for (i, s) in history.iter().enumerate() {
        if !s.max_ut.is_finite() {
            return BlowupReport {
                detected: true,
                t_num: Some(to_t(s.tau)),
                trigger: Some(Trigger::NonFinite),
                refined: false,
            };
        }
        if s.max_ut >= threshold {
            let tau_star = if i == 0 {
                s.tau
            } else {
                let prev = history[i - 1];
                let slope = (s.max_ut - prev.max_ut).max(f64::MIN_POSITIVE);
                prev.tau + (threshold - prev.max_ut) * (s.tau - prev.tau) / slope
            };
            return BlowupReport {
                detected: true,
                t_num: Some(to_t(tau_star)),
                trigger: Some(Trigger::Threshold),
                refined: false,
            };
        }
    }
    none
}
