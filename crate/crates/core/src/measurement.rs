//! Raw sensor outputs: the ESM signal-level report and radar polar
//! measurements with their debiased Cartesian conversion.

use core::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use rand::Rng;

use crate::distributions::{standard_normal, Gaussian, Rayleigh};
use crate::error::{invalid, Result};

/// Scalar features that reports can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Feature {
    PriHigh,
    PriLow,
    FreqHigh,
    FreqLow,
    PwHigh,
    PwLow,
    Amplitude,
    Length,
    Speed,
}

impl Feature {
    /// Fields of the ESM measurement space, in report order.
    pub const ESM: [Feature; 7] = [
        Feature::PriHigh,
        Feature::PriLow,
        Feature::FreqHigh,
        Feature::FreqLow,
        Feature::PwHigh,
        Feature::PwLow,
        Feature::Amplitude,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::PriHigh => "pri_high",
            Feature::PriLow => "pri_low",
            Feature::FreqHigh => "freq_high",
            Feature::FreqLow => "freq_low",
            Feature::PwHigh => "pw_high",
            Feature::PwLow => "pw_low",
            Feature::Amplitude => "amplitude",
            Feature::Length => "length",
            Feature::Speed => "speed",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [Feature::Length, Feature::Speed].into_iter().chain(Feature::ESM).find(|f| f.name() == name)
    }
}

/// Anything a likelihood descriptor can read a feature value from.
pub trait FeatureSource {
    fn feature(&self, feature: Feature) -> Option<f64>;
}

/// A single measured feature, e.g. an ESM length estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureObservation {
    pub feature: Feature,
    pub value: f64,
}

impl FeatureSource for FeatureObservation {
    fn feature(&self, feature: Feature) -> Option<f64> {
        (feature == self.feature).then_some(self.value)
    }
}

/// Distribution a report field was drawn from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldDistribution {
    Gaussian(Gaussian),
    Rayleigh(Rayleigh),
}

impl FieldDistribution {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            FieldDistribution::Gaussian(g) => g.sample(rng),
            FieldDistribution::Rayleigh(r) => r.sample(rng),
        }
    }
}

/// Signal-level ESM report `{y, U}`: the measured vector plus the noise model
/// of each field (indexed like [`Feature::ESM`]).
#[derive(Debug, Clone, PartialEq)]
pub struct EsmSignalReport {
    /// PRI high, seconds.
    pub pri_high: f64,
    /// PRI low, seconds.
    pub pri_low: f64,
    /// Frequency high, hertz.
    pub freq_high: f64,
    /// Frequency low, hertz.
    pub freq_low: f64,
    /// Pulse width high, seconds.
    pub pw_high: f64,
    /// Pulse width low, seconds.
    pub pw_low: f64,
    pub amplitude: f64,
    pub noise_model: Option<[FieldDistribution; 7]>,
}

impl EsmSignalReport {
    /// Report without a noise model attached.
    pub fn from_values(values: [f64; 7]) -> Result<Self> {
        let report = Self {
            pri_high: values[0],
            pri_low: values[1],
            freq_high: values[2],
            freq_low: values[3],
            pw_high: values[4],
            pw_low: values[5],
            amplitude: values[6],
            noise_model: None,
        };
        report.validate()?;
        Ok(report)
    }

    pub fn values(&self) -> [f64; 7] {
        [self.pri_high, self.pri_low, self.freq_high, self.freq_low, self.pw_high, self.pw_low, self.amplitude]
    }

    pub fn validate(&self) -> Result<()> {
        if self.values().iter().any(|v| !v.is_finite()) {
            return Err(invalid("ESM report fields must be finite"));
        }
        if self.pri_high < self.pri_low {
            return Err(invalid("pri_high < pri_low"));
        }
        if self.freq_high < self.freq_low {
            return Err(invalid("freq_high < freq_low"));
        }
        if self.pw_high < self.pw_low {
            return Err(invalid("pw_high < pw_low"));
        }
        if self.amplitude < 0.0 {
            return Err(invalid("negative amplitude"));
        }
        Ok(())
    }
}

impl FeatureSource for EsmSignalReport {
    fn feature(&self, feature: Feature) -> Option<f64> {
        Feature::ESM.iter().position(|&f| f == feature).map(|i| self.values()[i])
    }
}

/// Generator for the ESM signal reports of one emitter.
///
/// The PRI, frequency and pulse-width pairs are carried through the pipeline
/// but not used by any class model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsmProfile {
    pub pri: Gaussian,
    pub freq: Gaussian,
    pub pw: Gaussian,
    pub amplitude: Rayleigh,
}

impl EsmProfile {
    /// X-band navigation radar defaults with the given amplitude scale.
    pub fn with_amplitude(amplitude: Rayleigh) -> Self {
        Self {
            pri: Gaussian { mean: 1.0e-3, std_dev: 1.0e-6 },
            freq: Gaussian { mean: 9.41e9, std_dev: 1.0e6 },
            pw: Gaussian { mean: 0.5e-6, std_dev: 1.0e-9 },
            amplitude,
        }
    }
}

fn ordered_pair<R: Rng + ?Sized>(g: &Gaussian, rng: &mut R) -> (f64, f64) {
    let a = g.sample(rng);
    let b = g.sample(rng);
    if a >= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Draw one ESM report. Each high/low pair is two draws from the field's
/// Gaussian, sorted; the amplitude is Rayleigh.
pub fn sample_esm<R: Rng + ?Sized>(profile: &EsmProfile, rng: &mut R) -> Result<EsmSignalReport> {
    Rayleigh::new(profile.amplitude.scale)?;
    let (pri_high, pri_low) = ordered_pair(&profile.pri, rng);
    let (freq_high, freq_low) = ordered_pair(&profile.freq, rng);
    let (pw_high, pw_low) = ordered_pair(&profile.pw, rng);
    let amplitude = profile.amplitude.sample(rng);
    let g = |x: Gaussian| FieldDistribution::Gaussian(x);
    Ok(EsmSignalReport {
        pri_high,
        pri_low,
        freq_high,
        freq_low,
        pw_high,
        pw_low,
        amplitude,
        noise_model: Some([
            g(profile.pri),
            g(profile.pri),
            g(profile.freq),
            g(profile.freq),
            g(profile.pw),
            g(profile.pw),
            FieldDistribution::Rayleigh(profile.amplitude),
        ]),
    })
}

/// Wrap an angle into `(−π, π]`.
pub fn wrap_angle(theta: f64) -> f64 {
    let mut t = libm::remainder(theta, 2.0 * PI);
    if t <= -PI {
        t += 2.0 * PI;
    }
    t
}

/// Radar range/bearing measurement with its noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarMeasurement {
    /// Metres.
    pub range: f64,
    /// Radians in `(−π, π]`.
    pub bearing: f64,
    pub sigma_r: f64,
    pub sigma_theta: f64,
}

impl PolarMeasurement {
    pub fn validate(&self) -> Result<()> {
        if !(self.range > 0.0) || !self.range.is_finite() {
            return Err(invalid("range must be positive"));
        }
        if !(self.sigma_r > 0.0) || !(self.sigma_theta > 0.0) {
            return Err(invalid("measurement sigmas must be positive"));
        }
        if !self.bearing.is_finite() {
            return Err(invalid("bearing must be finite"));
        }
        Ok(())
    }
}

/// Cartesian position measurement `z` with covariance `R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CartesianMeasurement {
    pub position: Vector2<f64>,
    pub covariance: Matrix2<f64>,
}

impl CartesianMeasurement {
    pub fn new(position: Vector2<f64>, covariance: Matrix2<f64>) -> Result<Self> {
        let c = covariance;
        if c[(0, 1)] != c[(1, 0)] {
            return Err(invalid("measurement covariance not symmetric"));
        }
        if !(c[(0, 0)] > 0.0 && c[(0, 0)] * c[(1, 1)] - c[(0, 1)] * c[(1, 0)] > 0.0) {
            return Err(invalid("measurement covariance not positive definite"));
        }
        Ok(Self { position, covariance })
    }

    /// Shift the position, e.g. from sensor-centred to scenario coordinates.
    pub fn translated(mut self, offset: Vector2<f64>) -> Self {
        self.position += offset;
        self
    }
}

/// Debiased conversion of a polar measurement with its exact covariance,
/// evaluated at the measured range and bearing.
pub fn convert_polar(m: &PolarMeasurement) -> Result<CartesianMeasurement> {
    m.validate()?;
    let (r, th) = (m.range, m.bearing);
    let s2 = m.sigma_theta * m.sigma_theta;
    let (sin, cos) = libm::sincos(th);
    let (sin2, cos2) = libm::sincos(2.0 * th);

    let bias = libm::exp(s2 / 2.0);
    let position = Vector2::new(bias * r * cos, bias * r * sin);

    // The textbook entries ½(r²+σr²)[1 ± cos2θ e^{−2σθ²}] + (e^{σθ²} − 2) r² cos²θ
    // cancel catastrophically in r². Expanding cos²θ and sin²θ through 2θ gives
    // the same values with the small factors taken through expm1.
    let r2 = r * r;
    let sr2 = m.sigma_r * m.sigma_r;
    let damp = libm::exp(-2.0 * s2);
    let along = libm::expm1(s2);
    let cross = libm::expm1(-2.0 * s2) + libm::expm1(s2);

    let r11 = 0.5 * (r2 * (along + cos2 * cross) + sr2 * (1.0 + cos2 * damp));
    let r22 = 0.5 * (r2 * (along - cos2 * cross) + sr2 * (1.0 - cos2 * damp));
    let r12 = 0.5 * sin2 * (r2 * cross + sr2 * damp);
    // Principal variances are ½(r²+σr²)(1 − e^{−2σθ²}) across the beam and
    // ½[r²(2e^{σθ²} + e^{−2σθ²} − 3) + σr²(1 + e^{−2σθ²})] along it, both
    // positive for σθ > 0, so no numeric definiteness check is needed (and
    // none is reliable once σθ is tiny).
    Ok(CartesianMeasurement { position, covariance: Matrix2::new(r11, r12, r12, r22) })
}

/// Perturb the polar coordinates of `true_position` (sensor-centred) with
/// independent zero-mean Gaussian noise.
pub fn sample_polar<R: Rng + ?Sized>(
    true_position: Vector2<f64>,
    sigma_r: f64,
    sigma_theta: f64,
    rng: &mut R,
) -> Result<PolarMeasurement> {
    let range = true_position.norm();
    if !(range > 0.0) {
        return Err(invalid("true position at the sensor origin"));
    }
    if sigma_r < 0.0 || sigma_theta < 0.0 {
        return Err(invalid("negative noise sigma"));
    }
    let bearing = libm::atan2(true_position.y, true_position.x);
    let nr = standard_normal(rng);
    let nt = standard_normal(rng);
    Ok(PolarMeasurement {
        range: range + sigma_r * nr,
        bearing: wrap_angle(bearing + sigma_theta * nt),
        sigma_r,
        sigma_theta,
    })
}
