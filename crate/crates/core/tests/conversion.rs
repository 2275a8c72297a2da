use fusionkit_core::measurement::{convert_polar, sample_polar, PolarMeasurement};
use nalgebra::{Matrix2, Rotation2, Vector2};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #[test]
    fn covariance_is_positive_definite(
        range in 1.0f64..1e5,
        bearing in -core::f64::consts::PI..core::f64::consts::PI,
        sigma_r in 0.1f64..100.0,
        sigma_theta in 1e-4f64..0.1,
    ) {
        let c = convert_polar(&PolarMeasurement { range, bearing, sigma_r, sigma_theta }).unwrap();
        let r = c.covariance;
        prop_assert_eq!(r[(0, 1)], r[(1, 0)]);
        prop_assert!(r[(0, 0)] > 0.0 && r[(1, 1)] > 0.0);
        prop_assert!(r.cholesky().is_some());
    }

    /// Rotating the bearing rotates the covariance.
    #[test]
    fn covariance_rotates_with_bearing(
        range in 10.0f64..1e4,
        bearing in -3.0f64..3.0,
        sigma_r in 0.5f64..50.0,
        sigma_theta in 1e-3f64..0.1,
    ) {
        let at = |b: f64| convert_polar(&PolarMeasurement { range, bearing: b, sigma_r, sigma_theta }).unwrap();
        let rot: Matrix2<f64> = Rotation2::new(bearing).into_inner();
        let expected = rot * at(0.0).covariance * rot.transpose();
        let got = at(bearing);
        let scale = expected.abs().max();
        prop_assert!((got.covariance - expected).abs().max() <= 1e-9 * scale);
        let pos = rot * at(0.0).position;
        prop_assert!((got.position - pos).norm() <= 1e-9 * range);
    }
}

#[test]
fn converted_measurements_are_unbiased_and_consistent() {
    let truth = Vector2::new(1000.0 * 0.3f64.cos(), 1000.0 * 0.3f64.sin());
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let n = 200_000;
    let mut nees = 0.0;
    let mut sum = Vector2::zeros();
    let mut sq = Vector2::zeros();
    for _ in 0..n {
        let c = convert_polar(&sample_polar(truth, 10.0, 0.02, &mut rng).unwrap()).unwrap();
        let e = c.position - truth;
        nees += (e.transpose() * c.covariance.try_inverse().unwrap() * e)[(0, 0)];
        sum += e;
        sq += e.component_mul(&e);
    }
    let nf = n as f64;
    let nees = nees / nf;
    assert!((1.98..=2.02).contains(&nees), "NEES {nees}");
    for axis in 0..2 {
        let mean = sum[axis] / nf;
        let sd = (sq[axis] / nf - mean * mean).sqrt();
        assert!(mean.abs() <= 4.0 * sd / nf.sqrt(), "axis {axis}: mean error {mean}");
    }
}
