//! Characteristic-line functionals, the comparison function G, and the
//! lifespan-scaling experiments.
//!
//! The blow-up machinery watches the solution along the characteristic
//! A(t) - z = R, i.e. at points (t, z) with t = A^{-1}(z + R). The weighted
//! trace
//!
//! ```text
//! U(z) = (R+z)^w u(A^{-1}(z+R), z),   w = gamma + 1/(1-k)  (damping 2/t)
//!                                     w = gamma            (no damping)
//! ```
//!
//! dominates the comparison function G, which solves
//! G' = C (R+z)^sigma G^p, G(R) = M eps, and diverges at a computable z*.
//! The epsilon-sweep measures numerical lifespans and fits their power law.

use rayon::prelude::*;

use crate::error::Error;
use crate::fd::{evolve_semilinear, Grid1D};
use crate::field::{Coords, SolutionField};
use crate::kernels::a_k_inv;
use crate::params::ModelParams;
use crate::repr::CauchyData;

/// Relative tolerance deciding whether an exponent sits on the critical
/// line.
const SIGMA_CRIT_TOL: f64 = 1e-9;

/// One point of the solution trace along the characteristic line.
#[derive(Debug, Clone, Copy)]
pub struct CharacteristicSample {
    pub z: f64,
    /// t with A(t) = z + R.
    pub t_of_z: f64,
    /// Interpolated solution value at (t_of_z, z).
    pub u_value: f64,
    /// (R+z)^w u_value.
    pub u_weighted: f64,
}

/// Constants of the comparison function G.
#[derive(Debug, Clone, Copy)]
pub struct ComparisonConfig {
    /// Data constant (absorbs the L1 norm of the data).
    pub m: f64,
    /// Comparison constant in front of the integral term.
    pub c: f64,
    pub eps: f64,
}

impl ComparisonConfig {
    fn validate(&self) -> Result<(), Error> {
        for (field, value) in [("M", self.m), ("C", self.c), ("eps", self.eps)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::OutOfRange { field, value, constraint: "> 0" });
            }
        }
        Ok(())
    }
}

/// One measured lifespan.
#[derive(Debug, Clone, Copy)]
pub struct LifespanRecord {
    pub eps: f64,
    pub detected: bool,
    /// Numerical lifespan in original time, when detected.
    pub t_num: Option<f64>,
    pub grid_dz: f64,
    /// True when a half-step rerun reproduced t_num within 5% relative.
    pub refined: bool,
}

/// Grid sizing shared by all entries of a sweep.
#[derive(Debug, Clone, Copy)]
pub struct GridPolicy {
    pub dz: f64,
    pub dt_factor: f64,
    /// Horizon in transformed time; the domain is sized so the data cone
    /// stays inside until then.
    pub tau_end: f64,
    /// Detection threshold on max|u_t|.
    pub threshold: f64,
    /// Rerun each detection at dz/2 and mark stability.
    pub refine: bool,
}

impl Default for GridPolicy {
    fn default() -> Self {
        GridPolicy { dz: 0.02, dt_factor: 0.9, tau_end: 30.0, threshold: 1e6, refine: true }
    }
}

/// Exponent of the characteristic weight (R+z)^w.
pub fn weight_exponent(params: &ModelParams) -> Result<f64, Error> {
    let gamma = params.derived()?.gamma;
    if params.mu == 2.0 {
        Ok(gamma + 1.0 / (1.0 - params.k))
    } else if params.mu == 0.0 {
        Ok(gamma)
    } else {
        Err(Error::UnsupportedMu { mu: params.mu })
    }
}

/// Weighted solution trace U(z) on the characteristic line, read from a
/// solved field by bilinear interpolation.
pub fn functional_u(field: &SolutionField, z: f64, params: &ModelParams) -> Result<f64, Error> {
    if params.n != 1 {
        return Err(Error::OutOfRange {
            field: "n",
            value: params.n as f64,
            constraint: "n == 1 for the characteristic trace",
        });
    }
    if field.coords != Coords::Original {
        return Err(Error::Domain(
            "characteristic trace needs a field in original coordinates".into(),
        ));
    }
    if z < params.r - 1e-12 {
        return Err(Error::OutOfRange { field: "z", value: z, constraint: "z >= R" });
    }
    let w = weight_exponent(params)?;
    let t = a_k_inv(z + params.r, params.k)?;
    Ok((params.r + z).powf(w) * field.value_at(t, z)?)
}

/// Sample the characteristic trace at several z values.
pub fn characteristic_trace(
    field: &SolutionField,
    zs: &[f64],
    params: &ModelParams,
) -> Result<Vec<CharacteristicSample>, Error> {
    let w = weight_exponent(params)?;
    zs.iter()
        .map(|&z| {
            let t = a_k_inv(z + params.r, params.k)?;
            let u = field.value_at(t, z)?;
            Ok(CharacteristicSample {
                z,
                t_of_z: t,
                u_value: u,
                u_weighted: (params.r + z).powf(w) * u,
            })
        })
        .collect()
}

/// Exponent sigma of the comparison dynamics G' = C (R+z)^sigma G^p.
pub fn sigma_exponent(params: &ModelParams) -> Result<f64, Error> {
    let gamma = params.derived()?.gamma;
    let n = params.n as f64;
    let base = if params.mu == 2.0 {
        (1.0 + params.k) / (1.0 - params.k)
    } else if params.mu == 0.0 {
        params.k / (1.0 - params.k)
    } else {
        return Err(Error::UnsupportedMu { mu: params.mu });
    };
    Ok((-(n - 1.0) / 2.0 - base - gamma) * (params.p - 1.0) - 2.0 * gamma)
}

/// True when p sits on the critical line sigma = -1 (within 1e-10); this
/// coincides with p equalling the closed-form critical exponent.
pub fn critical_exponent_check(n: u32, k: f64, p: f64, mu: f64) -> Result<bool, Error> {
    let params = ModelParams { n, k, mu, nu2: 0.0, p, eps: 1.0, r: 1.0 };
    params.validate()?;
    Ok((sigma_exponent(&params)? + 1.0).abs() <= 1e-10)
}

enum Branch {
    Critical,
    Subcritical { sigma: f64 },
}

fn classify(params: &ModelParams) -> Result<Branch, Error> {
    let sigma = sigma_exponent(params)?;
    if (sigma + 1.0).abs() <= SIGMA_CRIT_TOL * (1.0 + sigma.abs()) {
        Ok(Branch::Critical)
    } else if sigma > -1.0 {
        Ok(Branch::Subcritical { sigma })
    } else {
        Err(Error::OutOfRange {
            field: "p",
            value: params.p,
            constraint: "p <= critical exponent (sigma >= -1)",
        })
    }
}

/// Accumulated weight Phi(z) = int_R^z (R+y)^sigma dy in the form used by
/// the comparison bracket.
fn phi_term(z: f64, r: f64, branch: &Branch) -> f64 {
    match branch {
        Branch::Critical => ((r + z) / (2.0 * r)).ln(),
        Branch::Subcritical { sigma } => {
            ((r + z).powf(sigma + 1.0) - (2.0 * r).powf(sigma + 1.0)) / (sigma + 1.0)
        }
    }
}

/// Comparison function G(z); returns +inf past its divergence point.
pub fn comparison_g(z: f64, cfg: &ComparisonConfig, params: &ModelParams) -> Result<f64, Error> {
    cfg.validate()?;
    params.validate()?;
    let r = params.r;
    if z < r - 1e-12 * (1.0 + r) {
        return Err(Error::OutOfRange { field: "z", value: z, constraint: "z >= R" });
    }
    let branch = classify(params)?;
    let p = params.p;
    let bracket = (cfg.m * cfg.eps).powf(1.0 - p) - cfg.c * (p - 1.0) * phi_term(z, r, &branch);
    if bracket <= 0.0 {
        Ok(f64::INFINITY)
    } else {
        Ok(bracket.powf(-1.0 / (p - 1.0)))
    }
}

/// Closed-form divergence point z* of the comparison function.
pub fn divergence_z(cfg: &ComparisonConfig, params: &ModelParams) -> Result<f64, Error> {
    cfg.validate()?;
    params.validate()?;
    let r = params.r;
    let p = params.p;
    let level = (cfg.m * cfg.eps).powf(1.0 - p) / (cfg.c * (p - 1.0));
    match classify(params)? {
        Branch::Critical => Ok(2.0 * r * level.exp() - r),
        Branch::Subcritical { sigma } => {
            let s1 = sigma + 1.0;
            Ok(((2.0 * r).powf(s1) + s1 * level).powf(1.0 / s1) - r)
        }
    }
}

/// Original-time blow-up bound implied by the divergence point, via the
/// characteristic relation A(t) = z* + R.
pub fn divergence_t(cfg: &ComparisonConfig, params: &ModelParams) -> Result<f64, Error> {
    let z = divergence_z(cfg, params)?;
    a_k_inv(z + params.r, params.k)
}

/// Run the semilinear solver across an epsilon ladder and collect measured
/// lifespans. Entries run in parallel; refinement instability is recorded
/// per entry rather than aborting the sweep.
pub fn lifespan_sweep(
    eps_ladder: &[f64],
    params: &ModelParams,
    policy: &GridPolicy,
) -> Result<Vec<LifespanRecord>, Error> {
    params.validate()?;
    for &eps in eps_ladder {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::OutOfRange { field: "eps", value: eps, constraint: "eps > 0" });
        }
    }
    eps_ladder
        .par_iter()
        .map(|&eps| {
            let p_eps = ModelParams { eps, ..*params };
            let data = CauchyData::bump(0.0, eps, params.r);
            let run = |dz: f64| -> Result<Option<f64>, Error> {
                let grid =
                    Grid1D::for_cone(params.k, params.r, policy.tau_end, dz, policy.dt_factor)
                        .with_store_every(usize::MAX);
                let (_, report) = evolve_semilinear(&p_eps, &data, &grid, policy.threshold)?;
                Ok(report.t_num.filter(|_| report.detected))
            };
            let coarse = run(policy.dz)?;
            let (detected, t_num, grid_dz, refined) = match (coarse, policy.refine) {
                (Some(t1), true) => match run(policy.dz / 2.0)? {
                    Some(t2) => {
                        let stable = (t1 - t2).abs() <= 0.05 * t2.abs();
                        (true, Some(t2), policy.dz / 2.0, stable)
                    }
                    None => (false, None, policy.dz / 2.0, false),
                },
                (Some(t1), false) => (true, Some(t1), policy.dz, false),
                (None, _) => (false, None, policy.dz, false),
            };
            Ok(LifespanRecord { eps, detected, t_num, grid_dz, refined })
        })
        .collect()
}

/// Least-squares fit of log T against log eps over the detected, refined
/// records. Returns (slope, intercept, r^2).
pub fn fit_power_law(records: &[LifespanRecord]) -> Result<(f64, f64, f64), Error> {
    let pts: Vec<(f64, f64)> = records
        .iter()
        .filter(|r| r.detected && r.refined)
        .filter_map(|r| r.t_num.map(|t| (r.eps.ln(), t.ln())))
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData { needed: 3, got: pts.len() });
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() <= f64::EPSILON * n * sxx.abs().max(1.0) {
        return Err(Error::Domain("epsilon values are too close for a fit".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y).powi(2)).sum();
    let ss_res: f64 = pts.iter().map(|p| (p.1 - (slope * p.0 + intercept)).powi(2)).sum();
    let r2 = if ss_tot <= f64::EPSILON { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok((slope, intercept, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::a_k;
    use crate::params::critical_p;
    use crate::params::ExtReal;

    fn params(n: u32, k: f64, p: f64, mu: f64) -> ModelParams {
        ModelParams { n, k, mu, nu2: 0.0, p, eps: 1.0, r: 1.0 }
    }

    #[test]
    fn weight_exponents() {
        let w2 = weight_exponent(&params(1, 0.5, 1.5, 2.0)).unwrap();
        assert!((w2 - 1.5).abs() <= 1e-15, "damped weight, got {w2}");
        let w0 = weight_exponent(&params(1, 0.5, 1.5, 0.0)).unwrap();
        assert!((w0 + 0.5).abs() <= 1e-15, "undamped weight, got {w0}");
        assert!(matches!(
            weight_exponent(&params(1, 0.5, 1.5, 1.0)),
            Err(Error::UnsupportedMu { .. })
        ));
    }

    fn constant_field(value: f64, t_max: f64, x_max: f64) -> SolutionField {
        let times: Vec<f64> = (0..40).map(|i| 1.0 + (t_max - 1.0) * i as f64 / 39.0).collect();
        let xs: Vec<f64> = (0..40).map(|j| -x_max + 2.0 * x_max * j as f64 / 39.0).collect();
        let values = vec![value; times.len() * xs.len()];
        SolutionField::new(Coords::Original, times, xs, values, None).unwrap()
    }

    #[test]
    fn characteristic_trace_geometry_and_weight() {
        let pr = params(1, 0.5, 1.5, 2.0);
        let t_needed = a_k_inv(2.0 + 1.0, 0.5).unwrap();
        let field = constant_field(1.0, t_needed + 1.0, 4.0);
        let samples = characteristic_trace(&field, &[1.0, 1.5, 2.0], &pr).unwrap();
        for s in &samples {
            // The sample sits on the characteristic line A(t) - z = R.
            let residual = a_k(s.t_of_z, 0.5).unwrap() - s.z - 1.0;
            assert!(residual.abs() <= 1e-10, "characteristic residual {residual}");
            let expect = (1.0 + s.z).powf(1.5);
            assert!((s.u_weighted - expect).abs() <= 1e-10 * expect);
        }
        // z = R reads the solution where the cone radius is 2R.
        assert!((samples[0].t_of_z - a_k_inv(2.0, 0.5).unwrap()).abs() <= 1e-12);

        // Zero field gives a zero functional.
        let zero = constant_field(0.0, t_needed + 1.0, 4.0);
        assert_eq!(functional_u(&zero, 1.3, &pr).unwrap(), 0.0);

        // Outside the stored grid the interpolation error propagates.
        assert!(matches!(functional_u(&field, 50.0, &pr), Err(Error::OutOfGrid { .. })));
    }

    #[test]
    fn sigma_reference_values() {
        assert!((sigma_exponent(&params(1, 0.5, 1.5, 2.0)).unwrap() + 0.25).abs() <= 1e-14);
        assert!((sigma_exponent(&params(1, 0.5, 1.8, 2.0)).unwrap() + 1.0).abs() <= 1e-14);
        assert!((sigma_exponent(&params(1, 0.5, 5.0, 0.0)).unwrap() + 1.0).abs() <= 1e-14);
    }

    #[test]
    fn criticality_check_examples_and_agreement() {
        assert!(critical_exponent_check(1, 0.5, 1.8, 2.0).unwrap());
        assert!(!critical_exponent_check(1, 0.5, 1.5, 2.0).unwrap());
        assert!(critical_exponent_check(1, 0.5, 5.0, 0.0).unwrap());

        // The sigma = -1 test coincides with p == closed-form critical p.
        for &mu in &[0.0, 2.0] {
            for n in 1..=3u32 {
                for &k in &[0.1, 0.25, 0.5, 0.75, 0.9] {
                    let pc = match critical_p(n, k, mu).unwrap() {
                        ExtReal::Finite(v) => v,
                        other => panic!("expected finite critical p, got {other:?}"),
                    };
                    assert!(
                        critical_exponent_check(n, k, pc, mu).unwrap(),
                        "critical p not recognized at n={n}, k={k}, mu={mu}"
                    );
                    for &dp in &[-1e-4, 1e-4] {
                        if pc + dp > 1.0 {
                            assert!(
                                !critical_exponent_check(n, k, pc + dp, mu).unwrap(),
                                "off-critical p accepted at n={n}, k={k}, mu={mu}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn comparison_g_starts_at_m_eps_and_diverges() {
        let cfg = ComparisonConfig { m: 2.0, c: 0.7, eps: 0.3 };
        for pr in [params(1, 0.5, 1.5, 2.0), params(1, 0.5, 1.8, 2.0)] {
            let g_r = comparison_g(1.0, &cfg, &pr).unwrap();
            assert!((g_r - cfg.m * cfg.eps).abs() <= 1e-14, "G(R) must equal M eps, got {g_r}");
            let zstar = divergence_z(&cfg, &pr).unwrap();
            assert!(zstar > 1.0);
            // Nondecreasing on a ladder strictly below z*, then infinite.
            let mut prev = 0.0;
            for i in 0..50 {
                let z = 1.0 + (zstar * 0.999999 - 1.0) * i as f64 / 49.0;
                let g = comparison_g(z, &cfg, &pr).unwrap();
                assert!(g.is_finite(), "G must be finite below z*, z = {z}");
                assert!(g >= prev - 1e-12, "G must be nondecreasing");
                prev = g;
            }
            assert!(comparison_g(zstar * 1.000001, &cfg, &pr).unwrap().is_infinite());
            assert!(comparison_g(0.5, &cfg, &pr).is_err(), "z below R must be rejected");
        }
        // Beyond-critical p has no comparison branch.
        assert!(comparison_g(2.0, &cfg, &params(1, 0.5, 2.5, 2.0)).is_err());
    }

    #[test]
    fn subcritical_divergence_scaling_in_eps() {
        // For k=1/2, n=1, p=3/2 the divergence point grows like
        // eps^(-2/3) in R + z*.
        let pr = params(1, 0.5, 1.5, 2.0);
        let z1 = divergence_z(&ComparisonConfig { m: 1.0, c: 1.0, eps: 1e-6 }, &pr).unwrap();
        let z2 = divergence_z(&ComparisonConfig { m: 1.0, c: 1.0, eps: 5e-7 }, &pr).unwrap();
        let slope = ((1.0 + z1).ln() - (1.0 + z2).ln()) / ((1e-6f64).ln() - (5e-7f64).ln());
        assert!(
            (slope + 2.0 / 3.0).abs() <= 1e-2,
            "divergence scaling exponent {slope}, expected -2/3"
        );
        // divergence_t maps through the characteristic relation.
        let cfg = ComparisonConfig { m: 1.0, c: 1.0, eps: 1e-3 };
        let z = divergence_z(&cfg, &pr).unwrap();
        let t = divergence_t(&cfg, &pr).unwrap();
        assert!((a_k(t, 0.5).unwrap() - (z + 1.0)).abs() <= 1e-9 * (1.0 + z));
    }

    #[test]
    fn power_law_fit_on_synthetic_records() {
        let mk = |eps: f64, t: f64| LifespanRecord {
            eps,
            detected: true,
            t_num: Some(t),
            grid_dz: 0.01,
            refined: true,
        };
        let recs: Vec<LifespanRecord> =
            [0.5, 0.25, 0.125, 0.0625].iter().map(|&e| mk(e, e.powf(-4.0 / 3.0))).collect();
        let (slope, intercept, r2) = fit_power_law(&recs).unwrap();
        assert!((slope + 4.0 / 3.0).abs() <= 1e-12);
        assert!(intercept.abs() <= 1e-12);
        assert!((r2 - 1.0).abs() <= 1e-12);

        let recs2: Vec<LifespanRecord> =
            [0.5, 0.25, 0.125].iter().map(|&e| mk(e, 7.0 * e.powf(-2.0))).collect();
        let (slope2, intercept2, _) = fit_power_law(&recs2).unwrap();
        assert!((slope2 + 2.0).abs() <= 1e-12);
        assert!((intercept2 - 7.0f64.ln()).abs() <= 1e-12);

        assert!(matches!(
            fit_power_law(&recs[..2]),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
        // Unrefined records are excluded from the usable set.
        let mut recs3 = recs.clone();
        for r in recs3.iter_mut() {
            r.refined = false;
        }
        assert!(fit_power_law(&recs3).is_err());
    }

    #[test]
    fn empty_ladder_gives_empty_sweep() {
        let pr = params(1, 0.5, 1.5, 2.0);
        let out = lifespan_sweep(&[], &pr, &GridPolicy::default()).unwrap();
        assert!(out.is_empty());
        assert!(lifespan_sweep(&[-1.0], &pr, &GridPolicy::default()).is_err());
    }

    #[test]
    fn mini_sweep_detects_and_is_monotone() {
        let pr = params(1, 0.5, 1.5, 2.0);
        let policy =
            GridPolicy { dz: 0.04, dt_factor: 0.9, tau_end: 25.0, threshold: 1e5, refine: false };
        let recs = lifespan_sweep(&[0.5, 0.35], &pr, &policy).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs.iter().all(|r| r.detected), "both entries must blow up");
        let t0 = recs[0].t_num.unwrap();
        let t1 = recs[1].t_num.unwrap();
        assert!(t1 >= t0, "smaller eps must not shorten the lifespan: {t0} vs {t1}");
    }
}
