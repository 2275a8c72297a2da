//! Linear-Gaussian motion models, the Kalman filter and per-class IMM
//! estimators.
//!
//! States are `[x, ẋ, ẍ, y, ẏ, ÿ]` in SI units.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::PI;

use nalgebra::{Cholesky, Matrix2, Matrix2x6, Matrix6, Matrix6x2, Vector2, Vector6};

use crate::error::{invalid, Error, Result};
use crate::measurement::CartesianMeasurement;

pub type StateVector = Vector6<f64>;
pub type StateMatrix = Matrix6<f64>;
pub type Observation = Matrix2x6<f64>;

/// Index of each kinematic component in the state vector.
pub mod idx {
    pub const X: usize = 0;
    pub const VX: usize = 1;
    pub const AX: usize = 2;
    pub const Y: usize = 3;
    pub const VY: usize = 4;
    pub const AY: usize = 5;
}

/// `x(k) = F x(k−1) + G u + v`, `v ~ N(0, Q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionModel {
    pub label: String,
    pub transition: StateMatrix,
    pub input_gain: Matrix6x2<f64>,
    pub input: Vector2<f64>,
    pub process_noise: StateMatrix,
}

fn per_axis(block: [[f64; 3]; 3]) -> StateMatrix {
    let mut m = StateMatrix::zeros();
    for offset in [0, 3] {
        for (i, row) in block.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                m[(offset + i, offset + j)] = *v;
            }
        }
    }
    m
}

impl MotionModel {
    pub fn new(label: impl Into<String>, transition: StateMatrix, process_noise: StateMatrix) -> Result<Self> {
        let model = Self {
            label: label.into(),
            transition,
            input_gain: Matrix6x2::zeros(),
            input: Vector2::zeros(),
            process_noise,
        };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        let q = &self.process_noise;
        if (q - q.transpose()).abs().max() > 1e-12 * q.abs().max().max(1.0) {
            return Err(invalid(format!("process noise of `{}` is not symmetric", self.label)));
        }
        let eig = q.symmetric_eigenvalues();
        if eig.min() < -1e-12 * q.abs().max().max(1.0) {
            return Err(invalid(format!("process noise of `{}` is not positive semidefinite", self.label)));
        }
        Ok(())
    }

    /// Nearly-constant velocity with continuous white-noise acceleration of
    /// spectral density `q`. The acceleration states are reset each step and
    /// carry variance `q·dt`, uncoupled from position and velocity.
    pub fn constant_velocity(dt: f64, q: f64) -> Result<Self> {
        if !(dt > 0.0) || !(q > 0.0) {
            return Err(invalid("constant-velocity model needs dt > 0 and q > 0"));
        }
        let f = per_axis([[1.0, dt, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        let (t2, t3) = (dt * dt, dt * dt * dt);
        let qm = per_axis([[q * t3 / 3.0, q * t2 / 2.0, 0.0], [q * t2 / 2.0, q * dt, 0.0], [0.0, 0.0, q * dt]]);
        Self::new("CV", f, qm)
    }

    /// Nearly-constant acceleration driven by a Wiener-process jerk of
    /// spectral density `q`.
    pub fn constant_acceleration(dt: f64, q: f64) -> Result<Self> {
        if !(dt > 0.0) || !(q > 0.0) {
            return Err(invalid("constant-acceleration model needs dt > 0 and q > 0"));
        }
        let (t2, t3, t4, t5) = (dt * dt, dt.powi(3), dt.powi(4), dt.powi(5));
        let f = per_axis([[1.0, dt, t2 / 2.0], [0.0, 1.0, dt], [0.0, 0.0, 1.0]]);
        let qm = per_axis([
            [q * t5 / 20.0, q * t4 / 8.0, q * t3 / 6.0],
            [q * t4 / 8.0, q * t3 / 3.0, q * t2 / 2.0],
            [q * t3 / 6.0, q * t2 / 2.0, q * dt],
        ]);
        Self::new("CA", f, qm)
    }

    pub fn predict(&self, est: &GaussianEstimate) -> GaussianEstimate {
        let f = &self.transition;
        GaussianEstimate {
            state: f * est.state + self.input_gain * self.input,
            covariance: symmetrize(f * est.covariance * f.transpose() + self.process_noise),
        }
    }
}

/// `H` extracting `[x, y]`.
pub fn position_observation() -> Observation {
    let mut h = Observation::zeros();
    h[(0, idx::X)] = 1.0;
    h[(1, idx::Y)] = 1.0;
    h
}

fn symmetrize(p: StateMatrix) -> StateMatrix {
    (p + p.transpose()) * 0.5
}

/// `{x̂, P}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianEstimate {
    pub state: StateVector,
    pub covariance: StateMatrix,
}

impl GaussianEstimate {
    pub fn new(state: StateVector, covariance: StateMatrix) -> Result<Self> {
        let est = Self { state, covariance };
        est.validate()?;
        Ok(est)
    }

    pub fn validate(&self) -> Result<()> {
        if self.covariance != self.covariance.transpose() {
            return Err(invalid("estimate covariance is not symmetric"));
        }
        if Cholesky::new(self.covariance).is_none() {
            return Err(Error::NumericalDegeneracy("estimate covariance is not positive definite".into()));
        }
        Ok(())
    }

    pub fn velocity(&self) -> Vector2<f64> {
        Vector2::new(self.state[idx::VX], self.state[idx::VY])
    }

    pub fn velocity_covariance(&self) -> Matrix2<f64> {
        let p = &self.covariance;
        Matrix2::new(p[(idx::VX, idx::VX)], p[(idx::VX, idx::VY)], p[(idx::VY, idx::VX)], p[(idx::VY, idx::VY)])
    }
}

/// Two-point differencing from consecutive converted measurements; the
/// acceleration components start at zero with `accel_variance`.
pub fn two_point_init(
    first: &CartesianMeasurement,
    second: &CartesianMeasurement,
    dt: f64,
    accel_variance: f64,
) -> Result<GaussianEstimate> {
    if !(dt > 0.0) || !(accel_variance > 0.0) {
        return Err(invalid("two-point initialisation needs dt > 0 and accel_variance > 0"));
    }
    let (z1, z2) = (first.position, second.position);
    let (r1, r2) = (first.covariance, second.covariance);
    let mut x = StateVector::zeros();
    x[idx::X] = z2.x;
    x[idx::Y] = z2.y;
    x[idx::VX] = (z2.x - z1.x) / dt;
    x[idx::VY] = (z2.y - z1.y) / dt;
    let pos = [idx::X, idx::Y];
    let vel = [idx::VX, idx::VY];
    let mut p = StateMatrix::zeros();
    for i in 0..2 {
        for j in 0..2 {
            p[(pos[i], pos[j])] = r2[(i, j)];
            p[(pos[i], vel[j])] = r2[(i, j)] / dt;
            p[(vel[i], pos[j])] = r2[(i, j)] / dt;
            p[(vel[i], vel[j])] = (r1[(i, j)] + r2[(i, j)]) / (dt * dt);
        }
    }
    p[(idx::AX, idx::AX)] = accel_variance;
    p[(idx::AY, idx::AY)] = accel_variance;
    GaussianEstimate::new(x, p)
}

/// One predict/update cycle. Returns the posterior and the Gaussian density
/// of the innovation under its covariance.
pub fn kf_step(
    est: &GaussianEstimate,
    model: &MotionModel,
    meas: &CartesianMeasurement,
    h: &Observation,
) -> Result<(GaussianEstimate, f64)> {
    let prior = model.predict(est);
    let innovation = meas.position - h * prior.state;
    let s = h * prior.covariance * h.transpose() + meas.covariance;
    let s = (s + s.transpose()) * 0.5;
    let chol =
        Cholesky::new(s).ok_or_else(|| Error::NumericalDegeneracy("innovation covariance is singular".into()))?;
    let s_inv = chol.inverse();
    let gain = prior.covariance * h.transpose() * s_inv;

    let state = prior.state + gain * innovation;
    // Joseph form.
    let i_kh = StateMatrix::identity() - gain * h;
    let covariance = symmetrize(i_kh * prior.covariance * i_kh.transpose() + gain * meas.covariance * gain.transpose());
    if Cholesky::new(covariance).is_none() {
        return Err(Error::NumericalDegeneracy("updated covariance lost positive definiteness".into()));
    }

    let det = chol.determinant();
    let mahalanobis = (innovation.transpose() * s_inv * innovation)[(0, 0)];
    let likelihood = libm::exp(-0.5 * mahalanobis) / (2.0 * PI * libm::sqrt(det));
    Ok((GaussianEstimate { state, covariance }, likelihood))
}

/// A class's motion-model set `S_c` with its Markov transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModelSet {
    pub class_id: u32,
    pub models: Vec<MotionModel>,
    /// `transition[i][j] = P(mode j at k | mode i at k−1)`.
    pub transition: Vec<Vec<f64>>,
}

impl ClassModelSet {
    pub fn new(class_id: u32, models: Vec<MotionModel>, transition: Vec<Vec<f64>>) -> Result<Self> {
        let r = models.len();
        if r == 0 {
            return Err(invalid("model set needs at least one model"));
        }
        if transition.len() != r || transition.iter().any(|row| row.len() != r) {
            return Err(invalid(format!("transition matrix must be {r}x{r}")));
        }
        for row in &transition {
            if row.iter().any(|&p| !(0.0..=1.0).contains(&p)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
                return Err(invalid("transition rows must be probability vectors"));
            }
        }
        Ok(Self { class_id, models, transition })
    }

    /// Single-model set.
    pub fn single(class_id: u32, model: MotionModel) -> Self {
        Self { class_id, models: alloc::vec![model], transition: alloc::vec![alloc::vec![1.0]] }
    }

    pub fn len(&self) -> usize {
        self.models.len()
    }

    pub fn is_empty(&self) -> bool {
        self.models.is_empty()
    }
}

/// Per-mode estimates and probabilities of one class's IMM.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmState {
    pub estimates: Vec<GaussianEstimate>,
    /// Posterior `μ^j(k)` after the latest update.
    pub mode_probabilities: Vec<f64>,
    /// Mode probabilities predicted through the transition matrix before the
    /// latest update (the weights of the class likelihood).
    pub predicted_mode_probabilities: Option<Vec<f64>>,
    /// `Λ^j(k)` from the latest update.
    pub mode_likelihoods: Option<Vec<f64>>,
}

impl ImmState {
    /// Every mode starts from the same estimate.
    pub fn new(initial: GaussianEstimate, mode_probabilities: Vec<f64>) -> Result<Self> {
        if mode_probabilities.is_empty() || (mode_probabilities.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(invalid("mode probabilities must sum to 1"));
        }
        Ok(Self {
            estimates: alloc::vec![initial; mode_probabilities.len()],
            mode_probabilities,
            predicted_mode_probabilities: None,
            mode_likelihoods: None,
        })
    }

    pub fn uniform(initial: GaussianEstimate, modes: usize) -> Result<Self> {
        Self::new(initial, alloc::vec![1.0 / modes as f64; modes])
    }
}

/// One IMM cycle: interaction/mixing, mode-matched filtering and mode
/// probability update.
pub fn imm_step(st: &ImmState, cls: &ClassModelSet, meas: &CartesianMeasurement, h: &Observation) -> Result<ImmState> {
    let r = cls.len();
    if st.estimates.len() != r || st.mode_probabilities.len() != r {
        return Err(invalid(format!("IMM state has {} modes, class set has {r}", st.estimates.len())));
    }
    let mu = &st.mode_probabilities;
    let predicted: Vec<f64> = (0..r).map(|j| (0..r).map(|i| cls.transition[i][j] * mu[i]).sum()).collect();

    let mut estimates = Vec::with_capacity(r);
    let mut likelihoods = Vec::with_capacity(r);
    for (j, &cj) in predicted.iter().enumerate() {
        let mixed = if cj > 0.0 {
            let weights: Vec<f64> = (0..r).map(|i| cls.transition[i][j] * mu[i] / cj).collect();
            mix(&st.estimates, &weights)
        } else {
            st.estimates[j]
        };
        let (est, lik) = kf_step(&mixed, &cls.models[j], meas, h)?;
        estimates.push(est);
        likelihoods.push(lik);
    }

    let mut mode_probabilities: Vec<f64> = likelihoods.iter().zip(&predicted).map(|(l, c)| l * c).collect();
    let total: f64 = mode_probabilities.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(Error::NumericalDegeneracy("all mode likelihoods vanished".into()));
    }
    mode_probabilities.iter_mut().for_each(|m| *m /= total);

    Ok(ImmState {
        estimates,
        mode_probabilities,
        predicted_mode_probabilities: Some(predicted),
        mode_likelihoods: Some(likelihoods),
    })
}

fn mix(estimates: &[GaussianEstimate], weights: &[f64]) -> GaussianEstimate {
    let state = estimates.iter().zip(weights).fold(StateVector::zeros(), |acc, (e, w)| acc + e.state * *w);
    let covariance = estimates.iter().zip(weights).fold(StateMatrix::zeros(), |acc, (e, w)| {
        let d = e.state - state;
        acc + (e.covariance + d * d.transpose()) * *w
    });
    GaussianEstimate { state, covariance: symmetrize(covariance) }
}

/// Moment-matched output of the IMM.
pub fn combined_estimate(st: &ImmState) -> GaussianEstimate {
    mix(&st.estimates, &st.mode_probabilities)
}

/// Speed with a first-order variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedEstimate {
    pub speed: f64,
    pub variance: f64,
    /// Speed below [`NEAR_ZERO_SPEED`]: the direction is undefined and the
    /// variance is the trace of the velocity covariance.
    pub near_zero: bool,
}

pub const NEAR_ZERO_SPEED: f64 = 1e-6;

/// `|v|` and `v̂ᵀ P_v v̂` with `v̂` the unit velocity.
pub fn speed_estimate(est: &GaussianEstimate) -> SpeedEstimate {
    let v = est.velocity();
    let pv = est.velocity_covariance();
    let speed = v.norm();
    if speed < NEAR_ZERO_SPEED {
        return SpeedEstimate { speed, variance: pv.trace(), near_zero: true };
    }
    let u = v / speed;
    SpeedEstimate { speed, variance: (u.transpose() * pv * u)[(0, 0)], near_zero: false }
}
