use fusionkit_core::measurement::CartesianMeasurement;
use fusionkit_core::tracking::{
    combined_estimate, idx, imm_step, kf_step, position_observation, ClassModelSet, GaussianEstimate, ImmState,
    MotionModel, StateMatrix, StateVector,
};
use nalgebra::{Matrix2, Vector2, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gauss6<R: Rng>(rng: &mut R, cov: &StateMatrix) -> StateVector {
    let l = cov.cholesky().unwrap().l();
    l * StateVector::from_fn(|_, _| rng.sample(StandardNormal))
}

fn noisy(rng: &mut ChaCha8Rng, truth: &StateVector, r: &Matrix2<f64>) -> CartesianMeasurement {
    let l = r.cholesky().unwrap().l();
    let v = l * Vector2::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    CartesianMeasurement::new(Vector2::new(truth[idx::X], truth[idx::Y]) + v, *r).unwrap()
}

fn initial() -> GaussianEstimate {
    let mut x = StateVector::zeros();
    x[idx::VX] = 12.0;
    x[idx::VY] = 5.0;
    GaussianEstimate::new(x, StateMatrix::from_diagonal(&Vector6::new(400.0, 25.0, 0.2, 400.0, 25.0, 0.2))).unwrap()
}

/// Wilson–Hilferty two-sided 95% interval for a χ² with `dof` degrees.
fn chi2_band(dof: f64) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let c = 2.0 / (9.0 * dof);
    let at = |s: f64| dof * (1.0 - c + s * z * c.sqrt()).powi(3);
    (at(-1.0), at(1.0))
}

#[test]
fn kalman_filter_is_consistent() {
    let model = MotionModel::constant_velocity(1.0, 0.5).unwrap();
    let h = position_observation();
    let r = Matrix2::new(100.0, 20.0, 20.0, 60.0);
    let (runs, steps) = (200, 50);
    let mut total = 0.0;
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + run);
        let mut est = initial();
        let mut truth = est.state + gauss6(&mut rng, &est.covariance);
        for _ in 0..steps {
            truth = model.transition * truth + gauss6(&mut rng, &model.process_noise);
            let z = noisy(&mut rng, &truth, &r);
            est = kf_step(&est, &model, &z, &h).unwrap().0;
            let e = truth - est.state;
            total += (e.transpose() * est.covariance.try_inverse().unwrap() * e)[(0, 0)];
        }
    }
    let (lo, hi) = chi2_band((runs * steps * 6) as f64);
    assert!((lo..=hi).contains(&total), "{total} outside [{lo}, {hi}]");
}

#[test]
fn single_mode_imm_tracks_like_the_filter() {
    let model = MotionModel::constant_velocity(1.0, 0.5).unwrap();
    let set = ClassModelSet::single(1, model.clone());
    let h = position_observation();
    let r = Matrix2::identity() * 50.0;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut kf = initial();
    let mut imm = ImmState::uniform(kf, 1).unwrap();
    let mut truth = kf.state;
    for _ in 0..50 {
        truth = model.transition * truth + gauss6(&mut rng, &model.process_noise);
        let z = noisy(&mut rng, &truth, &r);
        let (next, lik) = kf_step(&kf, &model, &z, &h).unwrap();
        kf = next;
        imm = imm_step(&imm, &set, &z, &h).unwrap();
        let c = combined_estimate(&imm);
        assert!((c.state - kf.state).abs().max() <= 1e-12 * (1.0 + kf.state.abs().max()));
        assert!((c.covariance - kf.covariance).abs().max() <= 1e-12 * kf.covariance.abs().max());
        let l = imm.mode_likelihoods.as_ref().unwrap()[0];
        assert!((l - lik).abs() <= 1e-12 * lik.abs());
        assert_eq!(imm.mode_probabilities, vec![1.0]);
    }
}

#[test]
fn imm_switches_to_the_manoeuvre_model() {
    let dt = 1.0;
    let cv = MotionModel::constant_velocity(dt, 0.05).unwrap();
    let ca = MotionModel::constant_acceleration(dt, 0.5).unwrap();
    let set = ClassModelSet::new(7, vec![cv, ca], vec![vec![0.95, 0.05], vec![0.05, 0.95]]).unwrap();
    let h = position_observation();
    let r = Matrix2::identity() * 25.0;
    let (runs, onset, len) = (100, 30, 45);
    let mut mean_mu_ca = vec![0.0; len];
    for run in 0..runs {
        let mut rng = ChaCha8Rng::seed_from_u64(50 + run);
        let mut imm = ImmState::uniform(initial(), 2).unwrap();
        let mut truth = initial().state;
        for (k, acc) in mean_mu_ca.iter_mut().enumerate() {
            let a = if k >= onset { Vector2::new(-3.0, 4.0) } else { Vector2::zeros() };
            truth[idx::AX] = a.x;
            truth[idx::AY] = a.y;
            let (x, y) = (truth[idx::X], truth[idx::Y]);
            let (vx, vy) = (truth[idx::VX], truth[idx::VY]);
            truth[idx::X] = x + vx * dt + 0.5 * a.x * dt * dt;
            truth[idx::Y] = y + vy * dt + 0.5 * a.y * dt * dt;
            truth[idx::VX] = vx + a.x * dt;
            truth[idx::VY] = vy + a.y * dt;
            imm = imm_step(&imm, &set, &noisy(&mut rng, &truth, &r), &h).unwrap();
            *acc += imm.mode_probabilities[1] / runs as f64;
        }
    }
    assert!(mean_mu_ca[onset - 1] < 0.5, "before onset: {}", mean_mu_ca[onset - 1]);
    let peak = mean_mu_ca[onset..onset + 10].iter().cloned().fold(0.0, f64::max);
    assert!(peak > 0.7, "mean CA probability peaked at {peak}");
}
