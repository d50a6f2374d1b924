//! Globally adaptive Gauss-Kronrod quadrature.
//!
//! A 7-point Gauss / 15-point Kronrod pair scores every interval; the
//! interval with the largest error estimate is bisected until the summed
//! estimate drops below the requested absolute tolerance. Integrands are
//! fallible so that domain errors from kernel evaluation propagate out of
//! the integral instead of being silently absorbed.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::Error;

/// Positive abscissae of the 15-point Kronrod rule on [-1, 1]
/// (index 0 is the centre node).
const XGK: [f64; 8] = [
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329,
];

/// Kronrod weights aligned with `XGK`.
const WGK: [f64; 8] = [
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970,
];

/// Weights of the embedded 7-point Gauss rule, for `XGK` indices 0, 2, 4, 6.
const WG: [f64; 4] = [
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082,
];

/// Tuning knobs for [`integrate`].
#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    /// Absolute tolerance on the total error estimate.
    pub tol: f64,
    /// Bisection-depth limit per subinterval chain.
    pub max_depth: u32,
}

impl Default for QuadConfig {
    fn default() -> Self {
        // Depth 64 leaves room to chase integrable endpoint singularities
        // (each level halves the offending subinterval).
        QuadConfig { tol: 1e-10, max_depth: 64 }
    }
}

/// Hard cap on integrand evaluations, guarding against runaway refinement.
const MAX_EVALUATIONS: u64 = 2_000_000;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Rigorous-in-practice error estimate (QUADPACK rescaling of the
    /// Gauss/Kronrod discrepancy).
    pub error_estimate: f64,
    pub evaluations: u64,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
    resabs: f64,
    depth: u32,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

fn gk15<F>(f: &mut F, a: f64, b: f64, depth: u32) -> Result<Segment, Error>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut eval = |x: f64| -> Result<f64, Error> {
        let v = f(x)?;
        if !v.is_finite() {
            return Err(Error::QuadratureFailure(format!(
                "integrand returned non-finite value {v} at x = {x}"
            )));
        }
        Ok(v)
    };

    let fc = eval(centre)?;
    let mut resk = WGK[0] * fc;
    let mut resg = WG[0] * fc;
    let mut resabs = WGK[0] * fc.abs();
    let mut samples = [0.0f64; 15];
    samples[0] = fc;
    for i in 1..8 {
        let dx = half * XGK[i];
        let fl = eval(centre - dx)?;
        let fr = eval(centre + dx)?;
        samples[2 * i - 1] = fl;
        samples[2 * i] = fr;
        resk += WGK[i] * (fl + fr);
        resabs += WGK[i] * (fl.abs() + fr.abs());
        if i % 2 == 0 {
            resg += WG[i / 2] * (fl + fr);
        }
    }

    let reskh = 0.5 * resk;
    let mut resasc = WGK[0] * (fc - reskh).abs();
    for i in 1..8 {
        resasc += WGK[i] * ((samples[2 * i - 1] - reskh).abs() + (samples[2 * i] - reskh).abs());
    }

    let habs = half.abs();
    let value = resk * half;
    let resabs_scaled = resabs * habs;
    let resasc_scaled = resasc * habs;
    let mut err = ((resk - resg) * half).abs();
    if resasc_scaled != 0.0 && err != 0.0 {
        err = resasc_scaled * (200.0 * err / resasc_scaled).powf(1.5).min(1.0);
    }
    if resabs_scaled > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * resabs_scaled);
    }
    Ok(Segment { a, b, value, err, resabs: resabs_scaled, depth })
}

/// Integrate `f` over [a, b] to absolute tolerance `cfg.tol`.
///
/// Orientation follows the endpoints: `a > b` flips the sign. Errors from
/// the integrand abort the computation.
pub fn integrate<F>(mut f: F, a: f64, b: f64, cfg: &QuadConfig) -> Result<QuadResult, Error>
where
    F: FnMut(f64) -> Result<f64, Error>,
{
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::OutOfRange {
            field: "integration endpoint",
            value: if a.is_finite() { b } else { a },
            constraint: "finite",
        });
    }
    if !(cfg.tol > 0.0) {
        return Err(Error::OutOfRange { field: "tol", value: cfg.tol, constraint: "tol > 0" });
    }
    if cfg.max_depth < 1 {
        return Err(Error::OutOfRange {
            field: "max_depth",
            value: cfg.max_depth as f64,
            constraint: "max_depth >= 1",
        });
    }
    if a == b {
        return Ok(QuadResult { value: 0.0, error_estimate: 0.0, evaluations: 0 });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut evaluations: u64 = 15;
    let first = gk15(&mut f, lo, hi, 0)?;
    let mut total_err = first.err;
    let mut total_abs = first.resabs;
    let mut heap = BinaryHeap::new();
    heap.push(first);

    loop {
        let floor = 50.0 * f64::EPSILON * total_abs;
        if total_err <= cfg.tol.max(floor) {
            break;
        }
        let worst = heap.pop().expect("heap is non-empty inside the loop");
        if worst.depth >= cfg.max_depth {
            return Err(Error::QuadratureFailure(format!(
                "max_depth {} exceeded with error estimate {total_err:.3e} above tolerance {:.3e}",
                cfg.max_depth, cfg.tol
            )));
        }
        if evaluations >= MAX_EVALUATIONS {
            return Err(Error::QuadratureFailure(format!(
                "evaluation budget {MAX_EVALUATIONS} exhausted with error estimate {total_err:.3e}"
            )));
        }
        let mid = 0.5 * (worst.a + worst.b);
        if !(worst.a < mid && mid < worst.b) {
            return Err(Error::QuadratureFailure(format!(
                "cannot refine interval [{}, {}] further; residual error {:.3e}",
                worst.a, worst.b, total_err
            )));
        }
        total_err -= worst.err;
        total_abs -= worst.resabs;
        let left = gk15(&mut f, worst.a, mid, worst.depth + 1)?;
        let right = gk15(&mut f, mid, worst.b, worst.depth + 1)?;
        evaluations += 30;
        total_err += left.err + right.err;
        total_abs += left.resabs + right.resabs;
        heap.push(left);
        heap.push(right);
    }

    // Compensated final sum over all segments.
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    let mut err = 0.0f64;
    for seg in heap {
        let y = seg.value - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        err += seg.err;
    }
    Ok(QuadResult { value: sign * sum, error_estimate: err, evaluations })
}
