use dirac1d::potentials::*;
use dirac1d::quadrature::{integrate_real, Adaptive};
use proptest::prelude::*;

fn config() -> impl Strategy<Value = PotentialConfig> {
    (0.5..2.0f64, 0.0..1.0f64, 1.0..6.0f64, 4.0..8.0f64, any::<bool>()).prop_map(|(m, r, a, l, comp)| {
        PotentialConfig {
            m,
            eta: r * m,
            a,
            box_len: l * a,
            compensate: comp,
            ..PotentialConfig::reference().with_cutoff(32)
        }
    })
}

fn near_kink(cfg: &PotentialConfig, z: f64, h: f64) -> bool {
    (z.abs() - 0.5 * cfg.a).abs() < 2.0 * h
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gauge_condition_holds(z in -19.0..19.0f64, t in -2.0..12.0f64) {
        let cfg = PotentialConfig::reference();
        let th = theta_from_v(&cfg);
        let ramp = RampSpec::new(10.0).unwrap();
        let h = 1e-5;
        let df_dz = (auxiliary_fields(&th, ramp, z + h, t).0 - auxiliary_fields(&th, ramp, z - h, t).0) / (2.0 * h);
        let theta_t = |t: f64| ramp_lambda(ramp, t).0 * th.theta(z);
        let dtheta_dt = (theta_t(t + h) - theta_t(t - h)) / (2.0 * h);
        prop_assert!((df_dz + 0.5 * dtheta_dt).abs() <= 1e-8);
    }

    #[test]
    fn theta_derivative_is_minus_twice_v(cfg in config(), s in -0.49..0.49f64) {
        let th = theta_from_v(&cfg);
        let z = s * cfg.box_len;
        let h = 1e-6;
        prop_assume!(!near_kink(&cfg, z, h));
        let d = (th.theta(z + h) - th.theta(z - h)) / (2.0 * h);
        prop_assert!((d + 2.0 * cfg.potential(z).unwrap()).abs() <= 1e-7);
        prop_assert!((th.theta_prime(z) + 2.0 * cfg.potential(z).unwrap()).abs() <= 1e-14);
    }

    #[test]
    fn theta2_integrates_theta(cfg in config(), s in -0.49..0.49f64) {
        let th = theta_from_v(&cfg);
        let z = s * cfg.box_len;
        let h = 1e-5;
        let d = (th.theta2(z + h) - th.theta2(z - h)) / (2.0 * h);
        prop_assert!((d - th.theta(z)).abs() <= 1e-7 * th.theta(z).abs().max(1.0));
    }

    #[test]
    fn compensated_theta_closes(cfg in config()) {
        let cfg = PotentialConfig { compensate: true, ..cfg };
        let th = theta_from_v(&cfg);
        prop_assert!(th.seam_jump().abs() <= 1e-12);
        prop_assert_eq!(th.theta(0.0), 0.0);
    }

    #[test]
    fn ramp_is_monotone_and_bounded(t_f in 0.5..50.0f64, s in -0.5..1.5f64) {
        let r = RampSpec::new(t_f).unwrap();
        let (l, d1, _) = ramp_lambda(r, s * t_f);
        prop_assert!((0.0..=1.0).contains(&l));
        prop_assert!(d1 >= 0.0);
    }

    #[test]
    fn ramp_derivatives_match_differences(t_f in 1.0..40.0f64, s in 0.01..0.99f64) {
        let r = RampSpec::new(t_f).unwrap();
        let t = s * t_f;
        let h = 1e-5 * t_f;
        let (_, d1, d2) = ramp_lambda(r, t);
        let fd1 = (ramp_lambda(r, t + h).0 - ramp_lambda(r, t - h).0) / (2.0 * h);
        let fd2 = (ramp_lambda(r, t + h).1 - ramp_lambda(r, t - h).1) / (2.0 * h);
        prop_assert!((d1 - fd1).abs() <= 1e-8 / t_f);
        prop_assert!((d2 - fd2).abs() <= 1e-8 / (t_f * t_f));
    }
}

#[test]
fn compensated_mean_vanishes() {
    let cfg = PotentialConfig::reference();
    let mut total = 0.0;
    for s in cfg.segments() {
        let (v, _) = integrate_real(|z| cfg.potential(z).unwrap(), s.z0, s.z1, Adaptive::default(), "mean").unwrap();
        total += v;
    }
    assert!((total / cfg.box_len).abs() <= 1e-12);
}

#[test]
fn ramp_is_twice_continuous_at_endpoints() {
    let r = RampSpec::new(8.0).unwrap();
    for t in [0.0, 8.0] {
        let below = ramp_lambda(r, t - 1e-7);
        let above = ramp_lambda(r, t + 1e-7);
        assert!((below.0 - above.0).abs() < 1e-12);
        assert!((below.1 - above.1).abs() < 1e-12);
        assert!((below.2 - above.2).abs() < 1e-6);
    }
}

#[test]
fn fields_vanish_before_ramp() {
    let cfg = PotentialConfig { compensate: false, ..PotentialConfig::reference() };
    let th = theta_from_v(&cfg);
    let r = RampSpec::new(3.0).unwrap();
    for z in [-10.0, 0.0, 1.0] {
        assert_eq!(auxiliary_fields(&th, r, z, -1.0), (0.0, 0.0));
        let (f, u) = auxiliary_fields(&th, r, z, 4.0);
        assert_eq!(f, 0.0);
        assert_eq!(u + square_well_v(&cfg, z).unwrap(), 0.0);
    }
}
