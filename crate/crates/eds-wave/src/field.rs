//! Sampled solution fields on rectangular space-time grids.
//!
//! A field stores values row-major (one row per time), knows which
//! coordinate chart it lives in, and supports bilinear sampling, transfer
//! back to original coordinates, and CSV export with full-precision floats.

use std::io::Write as IoWrite;

use crate::error::Error;

/// Coordinate chart of a stored field.
///
/// `Original` is (t, x) with t >= 1; `Transformed` is the wave-speed-one
/// chart (tau, z) = (t^(1-k) - 1, (1-k) x) with tau >= 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coords {
    Original,
    Transformed,
}

/// Rectangular grid of solution samples, optionally with the first time
/// derivative on the same grid.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub coords: Coords,
    /// Strictly increasing time levels.
    pub times: Vec<f64>,
    /// Strictly increasing spatial nodes.
    pub xs: Vec<f64>,
    /// Row-major values, `times.len() * xs.len()` entries.
    pub values: Vec<f64>,
    /// Optional time-derivative samples with the same layout.
    pub dt_values: Option<Vec<f64>>,
}

fn check_sorted(name: &'static str, v: &[f64]) -> Result<(), Error> {
    if v.is_empty() {
        return Err(Error::GridTooSmall(format!("{name} axis is empty")));
    }
    for w in v.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::GridTooSmall(format!(
                "{name} axis must be strictly increasing, found {} then {}",
                w[0], w[1]
            )));
        }
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::GridTooSmall(format!("{name} axis contains non-finite entries")));
    }
    Ok(())
}

/// Bracketing index for bilinear interpolation; boundary values get a
/// relative slack so that exact endpoints stay in range.
fn bracket(axis: &[f64], q: f64) -> Option<(usize, f64)> {
    let lo = axis[0];
    let hi = axis[axis.len() - 1];
    let slack = 1e-12 * (1.0 + lo.abs().max(hi.abs()));
    if q < lo - slack || q > hi + slack {
        return None;
    }
    let qc = q.clamp(lo, hi);
    if axis.len() == 1 {
        return Some((0, 0.0));
    }
    let idx = axis.partition_point(|&v| v <= qc).clamp(1, axis.len() - 1) - 1;
    let w = (qc - axis[idx]) / (axis[idx + 1] - axis[idx]);
    Some((idx, w))
}

impl SolutionField {
    pub fn new(
        coords: Coords,
        times: Vec<f64>,
        xs: Vec<f64>,
        values: Vec<f64>,
        dt_values: Option<Vec<f64>>,
    ) -> Result<Self, Error> {
        check_sorted("time", &times)?;
        check_sorted("space", &xs)?;
        let want = times.len() * xs.len();
        if values.len() != want {
            return Err(Error::GridTooSmall(format!(
                "value buffer has {} entries, grid needs {want}",
                values.len()
            )));
        }
        if let Some(d) = &dt_values {
            if d.len() != want {
                return Err(Error::GridTooSmall(format!(
                    "derivative buffer has {} entries, grid needs {want}",
                    d.len()
                )));
            }
        }
        Ok(SolutionField { coords, times, xs, values, dt_values })
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.xs.len() + j]
    }

    fn sample(&self, buf: &[f64], t: f64, x: f64) -> Result<f64, Error> {
        let (i, wt) = bracket(&self.times, t).ok_or(Error::OutOfGrid { t, x })?;
        let (j, wx) = bracket(&self.xs, x).ok_or(Error::OutOfGrid { t, x })?;
        let nx = self.xs.len();
        let get = |ii: usize, jj: usize| buf[ii * nx + jj];
        let i1 = (i + 1).min(self.times.len() - 1);
        let j1 = (j + 1).min(nx - 1);
        let bottom = get(i, j) * (1.0 - wx) + get(i, j1) * wx;
        let top = get(i1, j) * (1.0 - wx) + get(i1, j1) * wx;
        Ok(bottom * (1.0 - wt) + top * wt)
    }

    /// Bilinear interpolation of the field value.
    pub fn value_at(&self, t: f64, x: f64) -> Result<f64, Error> {
        self.sample(&self.values, t, x)
    }

    /// Bilinear interpolation of the stored time derivative.
    pub fn dt_at(&self, t: f64, x: f64) -> Result<f64, Error> {
        let buf = self
            .dt_values
            .as_ref()
            .ok_or_else(|| Error::Domain("field carries no time-derivative samples".into()))?;
        self.sample(buf, t, x)
    }

    /// Map a transformed-chart field back to original coordinates:
    /// t = (1 + tau)^(1/(1-k)), x = z/(1-k); values are unchanged and time
    /// derivatives pick up the chain-rule factor (1-k)(1+tau)^(-k/(1-k)).
    pub fn to_original(&self, k: f64) -> Result<SolutionField, Error> {
        if self.coords != Coords::Transformed {
            return Err(Error::Domain("field is already in original coordinates".into()));
        }
        if !(k > 0.0 && k < 1.0) {
            return Err(Error::OutOfRange { field: "k", value: k, constraint: "0 < k < 1" });
        }
        let inv = 1.0 / (1.0 - k);
        let times: Vec<f64> = self.times.iter().map(|&tau| (1.0 + tau).powf(inv)).collect();
        let xs: Vec<f64> = self.xs.iter().map(|&z| z * inv).collect();
        let dt_values = self.dt_values.as_ref().map(|d| {
            let nx = self.xs.len();
            d.iter()
                .enumerate()
                .map(|(idx, &v)| {
                    let tau = self.times[idx / nx];
                    v * (1.0 - k) * (1.0 + tau).powf(-k * inv)
                })
                .collect()
        });
        SolutionField::new(Coords::Original, times, xs, self.values.clone(), dt_values)
    }

    /// Write `t,x,u[,u_t]` rows (or the transformed-chart header) with 17
    /// significant digits.
    pub fn write_csv<W: IoWrite>(&self, out: &mut W) -> Result<(), Error> {
        let header = match (self.coords, self.dt_values.is_some()) {
            (Coords::Original, false) => "t,x,u",
            (Coords::Original, true) => "t,x,u,u_t",
            (Coords::Transformed, false) => "tau,z,v",
            (Coords::Transformed, true) => "tau,z,v,v_tau",
        };
        writeln!(out, "{header}")?;
        let nx = self.xs.len();
        for (i, &t) in self.times.iter().enumerate() {
            for (j, &x) in self.xs.iter().enumerate() {
                let u = self.values[i * nx + j];
                match &self.dt_values {
                    Some(d) => writeln!(out, "{t:.16e},{x:.16e},{u:.16e},{:.16e}", d[i * nx + j])?,
                    None => writeln!(out, "{t:.16e},{x:.16e},{u:.16e}")?,
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_field() -> SolutionField {
        // u(t, x) = 2t + 3x on t in {1, 2, 3}, x in {-1, 0, 1}.
        let times = vec![1.0, 2.0, 3.0];
        let xs = vec![-1.0, 0.0, 1.0];
        let mut values = Vec::new();
        let mut dts = Vec::new();
        for &t in &times {
            for &x in &xs {
                values.push(2.0 * t + 3.0 * x);
                dts.push(2.0);
            }
        }
        SolutionField::new(Coords::Original, times, xs, values, Some(dts)).unwrap()
    }

    #[test]
    fn shape_validation() {
        assert!(SolutionField::new(Coords::Original, vec![1.0], vec![0.0], vec![], None).is_err());
        assert!(SolutionField::new(
            Coords::Original,
            vec![1.0, 1.0],
            vec![0.0],
            vec![0.0, 0.0],
            None
        )
        .is_err());
        assert!(SolutionField::new(
            Coords::Original,
            vec![1.0, 2.0],
            vec![0.0],
            vec![0.0, 0.0],
            Some(vec![0.0])
        )
        .is_err());
    }

    #[test]
    fn bilinear_reproduces_bilinear_functions() {
        let f = linear_field();
        for &(t, x) in &[(1.0, -1.0), (1.5, 0.25), (2.9, 0.99), (3.0, 1.0), (2.0, 0.0)] {
            let got = f.value_at(t, x).unwrap();
            assert!(
                (got - (2.0 * t + 3.0 * x)).abs() <= 1e-12,
                "bilinear interp at ({t}, {x}): {got}"
            );
            assert!((f.dt_at(t, x).unwrap() - 2.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn out_of_grid_is_reported() {
        let f = linear_field();
        assert!(matches!(f.value_at(0.5, 0.0), Err(Error::OutOfGrid { .. })));
        assert!(matches!(f.value_at(2.0, 1.5), Err(Error::OutOfGrid { .. })));
        // Exact boundary with tiny roundoff stays in range.
        assert!(f.value_at(3.0 + 1e-14, 1.0).is_ok());
    }

    #[test]
    fn transform_back_to_original() {
        let k = 0.5;
        // v(tau, z) = tau + z with v_tau = 1.
        let taus = vec![0.0, 1.0, 3.0];
        let zs = vec![-0.5, 0.0, 0.5];
        let mut values = Vec::new();
        let mut dts = Vec::new();
        for &tau in &taus {
            for &z in &zs {
                values.push(tau + z);
                dts.push(1.0);
            }
        }
        let f =
            SolutionField::new(Coords::Transformed, taus.clone(), zs.clone(), values, Some(dts))
                .unwrap();
        let g = f.to_original(k).unwrap();
        assert_eq!(g.coords, Coords::Original);
        // t = (1 + tau)^2 for k = 1/2, x = 2 z.
        for (i, &tau) in taus.iter().enumerate() {
            assert!((g.times[i] - (1.0 + tau).powi(2)).abs() <= 1e-12);
        }
        for (j, &z) in zs.iter().enumerate() {
            assert!((g.xs[j] - 2.0 * z).abs() <= 1e-12);
        }
        // u_t = v_tau (1-k)(1+tau)^(-k/(1-k)) = 0.5 / (1 + tau).
        let d = g.dt_values.as_ref().unwrap();
        for (i, &tau) in taus.iter().enumerate() {
            let want = 0.5 / (1.0 + tau);
            assert!((d[i * 3] - want).abs() <= 1e-12, "u_t at tau = {tau}");
        }
        assert!(g.to_original(k).is_err());
    }

    #[test]
    fn csv_round_trip_precision() {
        let f = linear_field();
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x,u,u_t");
        let first = lines.next().unwrap();
        let cols: Vec<f64> = first.split(',').map(|s| s.parse().unwrap()).collect();
        assert_eq!(cols, vec![1.0, -1.0, -1.0, 2.0]);
        // 9 data rows for the 3 x 3 grid.
        assert_eq!(text.lines().count(), 10);
        // Full round-trip precision on an awkward value.
        let v = std::f64::consts::PI * 1e-3;
        let g = SolutionField::new(Coords::Original, vec![1.0], vec![0.0], vec![v], None).unwrap();
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: f64 = text.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
        assert_eq!(back, v);
    }
}
