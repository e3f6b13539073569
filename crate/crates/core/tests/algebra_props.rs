use dirac1d::algebra::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn spinor() -> impl Strategy<Value = SpinorSample> {
    (-5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64, -5.0..5.0f64)
        .prop_map(|(a, b, c, d)| SpinorSample::new(Complex64::new(a, b), Complex64::new(c, d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn rotation_inverse(theta in -10.0..10.0f64) {
        let r = chiral_rotation(theta) * chiral_rotation(-theta) - Mat2::identity();
        prop_assert!(r.max_abs() <= 1e-13);
    }

    #[test]
    fn rotations_compose(t1 in -10.0..10.0f64, t2 in -10.0..10.0f64) {
        let r = chiral_rotation(t1) * chiral_rotation(t2) - chiral_rotation(t1 + t2);
        prop_assert!(r.max_abs() <= 1e-13);
    }

    #[test]
    fn rotation_flips_through_gamma0(theta in -10.0..10.0f64) {
        let g0 = standard_rep().gamma0;
        let r = chiral_rotation(-theta) * g0 - g0 * chiral_rotation(theta);
        prop_assert!(r.max_abs() <= 1e-14);
    }

    #[test]
    fn rotation_is_unitary(theta in -10.0..10.0f64) {
        let u = chiral_rotation(theta);
        prop_assert!((u.adjoint() * u - Mat2::identity()).max_abs() <= 1e-14);
    }

    #[test]
    fn rotate_preserves_pointwise_density(theta in -10.0..10.0f64, s in spinor()) {
        let r = rotate(theta, s);
        prop_assert!(r.is_finite());
        prop_assert!((r.norm_sqr() - s.norm_sqr()).abs() <= 1e-12 * s.norm_sqr().max(1.0));
    }

    #[test]
    fn pseudoscalar_mass_term_is_hermitian(theta in -10.0..10.0f64) {
        let g0 = standard_rep().gamma0;
        let h = g0 * mass_phase(theta);
        prop_assert!((h.adjoint() - h).max_abs() <= 1e-15);
    }
}

#[test]
fn standard_algebra_closes() {
    let g = standard_rep();
    assert!(g.algebra_residual() <= 1e-14);
    // γ⁵γ⁰ + γ⁰γ⁵ vanishes exactly here
    assert_eq!((g.gamma5 * g.gamma0 + g.gamma0 * g.gamma5).max_abs(), 0.0);
    let i = Complex64::new(0.0, 1.0);
    let sigma2 = Mat2::new(0.0.into(), -i, i, 0.0.into());
    assert_eq!(g.gamma1, sigma2.scale(i));
}
