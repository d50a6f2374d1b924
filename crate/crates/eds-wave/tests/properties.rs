//! Randomized invariants. Each property states something the library
//! promises for *every* admissible input: parser totality, certified
//! error bounds, kernel sign and floor bounds, exactness of the
//! quadrature on low-degree polynomials, and linearity of the
//! representation in the data.

use eds_wave::config::RawConfig;
use eds_wave::hypergeom::hyp2f1;
use eds_wave::kernels::{
    a_k, a_k_inv, dzeta_db, kernel_k0, kernel_k1, phi_k, zeta, ConePoint, KernelContext,
};
use eds_wave::quad::{integrate, QuadConfig};
use eds_wave::repr::{solve_point, CauchyData};
use eds_wave::{Error, ModelParams};
use proptest::prelude::*;

proptest! {
    /// Finite floats survive the override -> getter round trip exactly,
    /// because Display emits the shortest representation that reparses.
    #[test]
    fn config_f64_override_round_trips(
        section in "[a-z][a-z0-9_]{0,8}",
        key in "[a-z][a-z0-9_]{0,8}",
        v in -1e300f64..1e300,
    ) {
        let mut cfg = RawConfig::default();
        cfg.apply_override(&format!("{section}.{key}={v}")).expect("valid override");
        let got = cfg.get_f64(&section, &key).expect("parses back").expect("present");
        prop_assert_eq!(got, v);
    }

    /// A config rendered to its flat form and re-applied override by
    /// override describes the same configuration.
    #[test]
    fn config_flat_rendering_reapplies_identically(
        entries in prop::collection::vec(
            ("[a-z][a-z0-9_]{0,6}", "[a-z][a-z0-9_]{0,6}", "[A-Za-z0-9._+-]{1,12}"),
            0..8,
        ),
    ) {
        let mut cfg = RawConfig::default();
        for (section, key, value) in &entries {
            cfg.apply_override(&format!("{section}.{key}={value}")).expect("valid override");
        }
        let rendered = cfg.render_flat();
        let mut back = RawConfig::default();
        for part in rendered.split_whitespace() {
            back.apply_override(part).expect("rendered parts are valid overrides");
        }
        prop_assert_eq!(rendered, back.render_flat());
        for (section, key, _) in &entries {
            prop_assert_eq!(cfg.get_str(section, key), back.get_str(section, key));
        }
    }

    /// The parser is total on arbitrary printable input: it either accepts
    /// or reports a config error pointing at a real line.
    #[test]
    fn config_parser_is_total_and_points_at_a_line(
        lines in prop::collection::vec("[ -~]{0,24}", 0..12),
    ) {
        let text = lines.join("\n");
        match RawConfig::parse(&text) {
            Ok(_) => {}
            Err(Error::Config { line, .. }) => {
                if let Some(l) = line {
                    prop_assert!(l >= 1 && l <= lines.len().max(1), "line {l} out of range");
                }
            }
            Err(other) => prop_assert!(false, "unexpected error type: {other}"),
        }
    }

    /// Euler's transformation: F(a,b;c;z) = (1-z)^(c-a-b) F(c-a,c-b;c;z).
    /// Whenever both sides converge they must agree within the sum of
    /// their certified bounds (plus rounding headroom).
    #[test]
    fn hypergeometric_euler_transformation_consistent(
        a in -2.5f64..2.5,
        b in -2.5f64..2.5,
        c in 0.6f64..3.4,
        z in 0.0f64..0.95,
    ) {
        if let (Ok(l), Ok(r)) = (hyp2f1(a, b, c, z, 1e-12), hyp2f1(c - a, c - b, c, z, 1e-12)) {
            let pre = (1.0 - z).powf(c - a - b);
            let want = pre * r.value;
            let tol = l.abs_error_bound
                + pre * r.abs_error_bound
                + 1e-10 * l.value.abs().max(want.abs()).max(1.0);
            prop_assert!(
                (l.value - want).abs() <= tol,
                "F({a},{b};{c};{z}) = {} vs transformed {} (tol {tol:.3e})",
                l.value,
                want
            );
        }
    }

    /// A successful evaluation certifies the tolerance it was asked for.
    #[test]
    fn hypergeometric_bound_meets_requested_tolerance(
        a in -3.0f64..3.0,
        b in -3.0f64..3.0,
        c in 0.6f64..3.5,
        z in 0.0f64..0.9,
    ) {
        if let Ok(res) = hyp2f1(a, b, c, z, 1e-10) {
            prop_assert!(
                res.abs_error_bound <= 1e-10 * (1.0 + f64::EPSILON),
                "certified bound {:.3e} exceeds requested 1e-10",
                res.abs_error_bound
            );
            prop_assert!(res.value.is_finite());
        }
    }

    /// The stretched time map and its inverse compose to the identity.
    #[test]
    fn stretched_time_maps_invert(t in 1.0f64..50.0, k in 0.05f64..0.95) {
        let s = a_k(t, k).expect("valid input");
        prop_assert!(s >= 0.0);
        let back = a_k_inv(s, k).expect("valid input");
        prop_assert!((back - t).abs() <= 1e-10 * t, "t = {t}, round trip {back}");
        prop_assert!(phi_k(t, k).expect("valid input") > 0.0);
    }

    /// Inside the dependence cone the similarity variable stays in [0, 1)
    /// and is maximal on the initial slice b = 1.
    #[test]
    fn similarity_variable_stays_in_unit_interval(
        k in 0.1f64..0.9,
        t in 1.001f64..8.0,
        bfrac in 0.0f64..0.999,
        yfrac in -0.999f64..0.999,
    ) {
        let b = 1.0 + bfrac * (t - 1.0);
        let w = phi_k(t, k).expect("valid") - phi_k(b, k).expect("valid");
        let pt = ConePoint::new(t, 0.0, b, yfrac * w);
        let zt = zeta(&pt, k).expect("interior point");
        prop_assert!((0.0..1.0).contains(&zt), "zeta = {zt}");

        let a = a_k(t, k).expect("valid");
        let slope = dzeta_db(&ConePoint::new(t, 0.0, 1.0, yfrac * a), k).expect("interior point");
        prop_assert!(slope <= 1e-12, "dzeta/db at b=1 is {slope:.3e}");
    }

    /// In the damped family both kernels stay above their closed-form
    /// floors (in particular they are strictly positive).
    #[test]
    fn damped_kernels_respect_their_floors(
        k in 0.1f64..0.9,
        t in 1.001f64..6.0,
        yfrac in -0.995f64..0.995,
    ) {
        let ctx = KernelContext::new(ModelParams::eds(1, k, 1.5, 1.0, 1.0)).expect("valid");
        let der = ctx.params.derived().expect("valid");
        let a_t = -ctx.params.mu / 2.0 + (1.0 - der.sqrt_delta) / 2.0;
        let phi1 = phi_k(1.0, k).expect("valid");
        let phit = phi_k(t, k).expect("valid");
        let floor = der.c * t.powf(a_t) * (4.0 * phi1 * phit).powf(-der.gamma);
        prop_assert!(floor > 0.0);

        let y = yfrac * a_k(t, k).expect("valid");
        let k1 = kernel_k1(t, 0.0, y, &ctx).expect("interior point");
        let k0 = kernel_k0(t, 0.0, y, &ctx).expect("interior point");
        prop_assert!(k1 >= floor - 1e-12, "K1 = {k1} under floor {floor}");
        prop_assert!(k0 >= (1.0 - k / 2.0) * floor - 1e-12, "K0 = {k0} under its floor");
    }

    /// The adaptive quadrature is exact on cubics up to rounding.
    #[test]
    fn quadrature_exact_on_cubics(
        c0 in -10.0f64..10.0,
        c1 in -10.0f64..10.0,
        c2 in -10.0f64..10.0,
        c3 in -10.0f64..10.0,
        lo in -5.0f64..4.0,
        width in 0.1f64..2.0,
    ) {
        let hi = lo + width;
        let cfg = QuadConfig { tol: 1e-12, max_depth: 64 };
        let got = integrate(
            |x| Ok(c0 + x * (c1 + x * (c2 + x * c3))),
            lo,
            hi,
            &cfg,
        )
        .expect("smooth integrand")
        .value;
        let anti = |x: f64| x * (c0 + x * (c1 / 2.0 + x * (c2 / 3.0 + x * c3 / 4.0)));
        let want = anti(hi) - anti(lo);
        prop_assert!(
            (got - want).abs() <= 1e-10 * (1.0 + want.abs()),
            "integral {got} vs closed form {want}"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// The kernel representation is linear in the Cauchy data.
    #[test]
    fn representation_is_linear_in_the_data(
        k in 0.15f64..0.85,
        t in 1.05f64..3.0,
        xfrac in -0.9f64..0.9,
        alpha in -3.0f64..3.0,
    ) {
        let ctx = KernelContext::new(ModelParams::eds(1, k, 1.5, 1.0, 1.0)).expect("valid");
        let q = QuadConfig { tol: 1e-11, max_depth: 64 };
        let x = xfrac * (1.0 + a_k(t, k).expect("valid"));
        let base = CauchyData::bump(0.5, 1.0, 1.0);
        let scaled = CauchyData::bump(0.5 * alpha, alpha, 1.0);
        let u = solve_point(t, x, &base, &ctx, &q).expect("interior point");
        let v = solve_point(t, x, &scaled, &ctx, &q).expect("interior point");
        prop_assert!(
            (v - alpha * u).abs() <= 1e-9 * (1.0 + alpha.abs()) * (1.0 + u.abs()),
            "u = {u}, scaled run {v}, alpha = {alpha}"
        );
    }
}
