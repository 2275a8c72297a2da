//! Single-ship maritime scenario: one radar, one ESM sensor, three classes,
//! classification on a chosen feature subset.
//!
//! Every run draws the radar, amplitude and length measurements at every
//! step whether or not the subset uses them, so runs with the same seed see
//! the same noise across subsets.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;
use core::str::FromStr;

use nalgebra::Vector2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::classification::{
    amplitude_class_likelihood, imm_class_likelihood, kinematic_class_likelihood, length_class_likelihood,
    update_class_posterior, ClassDefinition, ClassPosterior,
};
use crate::distributions::{standard_normal, Rayleigh};
use crate::error::{invalid, Result};
use crate::measurement::{convert_polar, sample_esm, sample_polar, CartesianMeasurement, EsmProfile};
use crate::tracking::{
    imm_step, kf_step, position_observation, two_point_init, ClassModelSet, GaussianEstimate, ImmState, MotionModel,
};

/// Which features feed the classifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct FeatureSubset {
    pub speed: bool,
    pub amplitude: bool,
    pub length: bool,
}

impl FeatureSubset {
    pub const SPEED: Self = Self { speed: true, amplitude: false, length: false };
    pub const AMPLITUDE: Self = Self { speed: false, amplitude: true, length: false };
    pub const LENGTH: Self = Self { speed: false, amplitude: false, length: true };

    /// v, α, L, v+α, v+L, v+L+α.
    pub const REFERENCE_ORDER: [Self; 6] = [
        Self::SPEED,
        Self::AMPLITUDE,
        Self::LENGTH,
        Self { speed: true, amplitude: true, length: false },
        Self { speed: true, amplitude: false, length: true },
        Self { speed: true, amplitude: true, length: true },
    ];

    pub fn is_empty(&self) -> bool {
        !(self.speed || self.amplitude || self.length)
    }

    pub fn union(self, other: Self) -> Self {
        Self {
            speed: self.speed || other.speed,
            amplitude: self.amplitude || other.amplitude,
            length: self.length || other.length,
        }
    }

    pub fn contains(self, other: Self) -> bool {
        self.union(other) == self
    }
}

impl fmt::Display for FeatureSubset {
    /// Tokens `v`, `L`, `a` joined by `+`, in that order.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<&str> = Vec::new();
        if self.speed {
            parts.push("v");
        }
        if self.length {
            parts.push("L");
        }
        if self.amplitude {
            parts.push("a");
        }
        write!(f, "{}", parts.join("+"))
    }
}

impl FromStr for FeatureSubset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut subset = FeatureSubset::default();
        for token in s.split('+').map(str::trim) {
            let flag = match token {
                "v" | "speed" => &mut subset.speed,
                "a" | "α" | "alpha" | "amplitude" => &mut subset.amplitude,
                "L" | "length" => &mut subset.length,
                other => return Err(invalid(format!("unknown feature `{other}` in `{s}`"))),
            };
            if *flag {
                return Err(invalid(format!("feature `{token}` repeated in `{s}`")));
            }
            *flag = true;
        }
        Ok(subset)
    }
}

/// How the kinematic feature enters the class posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum KinematicMode {
    /// Estimated speed against each class's speed distribution.
    #[default]
    Speed,
    /// Measurement likelihood of each class's IMM.
    Imm,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RadarConfig {
    /// Sensor location in scenario coordinates, metres.
    pub position: [f64; 2],
    pub sigma_r: f64,
    pub sigma_theta: f64,
}

impl Default for RadarConfig {
    fn default() -> Self {
        Self { position: [-100_000.0, 0.0], sigma_r: 10.0, sigma_theta: PI / 180.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrackerConfig {
    /// Spectral density of the white-noise acceleration, m²/s³.
    pub process_noise: f64,
    /// Variance given to the acceleration states at initialisation.
    pub initial_accel_variance: f64,
    pub kinematic_mode: KinematicMode,
    /// Per-class process noise for the IMM mode (one CV model per class);
    /// empty means every class uses `process_noise`.
    pub class_process_noise: Vec<f64>,
}

impl Default for TrackerConfig {
    fn default() -> Self {
        Self {
            process_noise: 2.0,
            initial_accel_variance: 1.0,
            kinematic_mode: KinematicMode::Speed,
            class_process_noise: Vec::new(),
        }
    }
}

/// Scenario constants for one Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub initial_position: [f64; 2],
    /// m/s.
    pub speed: f64,
    /// Radians from the x axis.
    pub course: f64,
    pub true_class_id: u32,
    pub true_amplitude_scale: f64,
    /// Metres.
    pub true_length: f64,
    pub length_sigma: f64,
    pub steps: usize,
    pub dt: f64,
    pub radar: RadarConfig,
    pub tracker: TrackerConfig,
    pub features: FeatureSubset,
    /// `None` is a uniform prior.
    pub prior: Option<Vec<f64>>,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            initial_position: [0.0, 0.0],
            speed: 28.0,
            course: PI / 4.0,
            true_class_id: 3,
            true_amplitude_scale: 0.5,
            true_length: 5.0,
            length_sigma: 5.0,
            steps: 100,
            dt: 1.0,
            radar: RadarConfig::default(),
            tracker: TrackerConfig::default(),
            features: FeatureSubset { speed: true, amplitude: true, length: true },
            prior: None,
        }
    }
}

impl Scenario {
    pub fn with_features(&self, features: FeatureSubset) -> Self {
        Self { features, ..self.clone() }
    }

    pub fn validate(&self, classes: &[ClassDefinition]) -> Result<()> {
        if self.steps == 0 {
            return Err(invalid("steps must be at least 1"));
        }
        if !(self.dt > 0.0) {
            return Err(invalid("dt must be positive"));
        }
        if self.features.is_empty() {
            return Err(invalid("feature subset is empty"));
        }
        if classes.is_empty() {
            return Err(invalid("no classes defined"));
        }
        if !classes.iter().any(|c| c.class_id == self.true_class_id) {
            return Err(invalid(format!("true class {} is not defined", self.true_class_id)));
        }
        for (i, c) in classes.iter().enumerate() {
            if classes[..i].iter().any(|o| o.class_id == c.class_id) {
                return Err(invalid(format!("class {} defined twice", c.class_id)));
            }
            ClassDefinition::new(c.class_id, c.speed, c.amplitude, c.length)?;
        }
        Rayleigh::new(self.true_amplitude_scale)?;
        if !(self.length_sigma >= 0.0) {
            return Err(invalid("length sigma must be non-negative"));
        }
        if !(self.radar.sigma_r > 0.0) || !(self.radar.sigma_theta > 0.0) {
            return Err(invalid("radar sigmas must be positive"));
        }
        if !(self.tracker.process_noise > 0.0) || !(self.tracker.initial_accel_variance > 0.0) {
            return Err(invalid("tracker noise parameters must be positive"));
        }
        let per_class = &self.tracker.class_process_noise;
        if !per_class.is_empty() && (per_class.len() != classes.len() || per_class.iter().any(|q| !(*q > 0.0))) {
            return Err(invalid("class_process_noise needs one positive value per class"));
        }
        if let Some(p) = &self.prior {
            if p.len() != classes.len() {
                return Err(invalid("prior length differs from the number of classes"));
            }
            ClassPosterior::new(p.clone())?;
        }
        Ok(())
    }

    fn prior(&self, classes: usize) -> Result<ClassPosterior> {
        match &self.prior {
            Some(p) => ClassPosterior::new(p.clone()),
            None => Ok(ClassPosterior::uniform(classes)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruthState {
    pub position: Vector2<f64>,
    pub velocity: Vector2<f64>,
}

/// Constant-velocity truth sampled at `k·dt`, `k = 0..steps`.
pub fn generate_truth(scenario: &Scenario) -> Vec<TruthState> {
    let velocity = Vector2::new(libm::cos(scenario.course), libm::sin(scenario.course)) * scenario.speed;
    let start = Vector2::from(scenario.initial_position);
    (0..scenario.steps)
        .map(|k| TruthState { position: start + velocity * (k as f64 * scenario.dt), velocity })
        .collect()
}

/// Posterior trajectory of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub seed: u64,
    pub posteriors: Vec<ClassPosterior>,
    /// Argmax class index at each step.
    pub declared: Vec<usize>,
}

enum Kinematics {
    Pending(Option<CartesianMeasurement>),
    Filter(Box<GaussianEstimate>),
    Bank(Vec<ImmState>),
}

/// One seeded run: per step sample the radar, convert, track, gather the
/// active feature likelihoods and update the class posterior.
pub fn run_once(scenario: &Scenario, classes: &[ClassDefinition], seed: u64) -> Result<RunResult> {
    scenario.validate(classes)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let truth = generate_truth(scenario);
    let radar_at = Vector2::from(scenario.radar.position);
    let h = position_observation();
    let cv = MotionModel::constant_velocity(scenario.dt, scenario.tracker.process_noise)?;
    let banks: Vec<ClassModelSet> = classes
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let q = scenario.tracker.class_process_noise.get(i).copied().unwrap_or(scenario.tracker.process_noise);
            Ok(ClassModelSet::single(c.class_id, MotionModel::constant_velocity(scenario.dt, q)?))
        })
        .collect::<Result<_>>()?;
    let profile = EsmProfile::with_amplitude(Rayleigh::new(scenario.true_amplitude_scale)?);

    let mut posterior = scenario.prior(classes.len())?;
    let mut kinematics = Kinematics::Pending(None);
    let mut posteriors = Vec::with_capacity(scenario.steps);
    let mut declared = Vec::with_capacity(scenario.steps);

    for state in &truth {
        let polar =
            sample_polar(state.position - radar_at, scenario.radar.sigma_r, scenario.radar.sigma_theta, &mut rng)?;
        let z = convert_polar(&polar)?.translated(radar_at);
        let esm = sample_esm(&profile, &mut rng)?;
        let length = scenario.true_length + scenario.length_sigma * standard_normal(&mut rng);

        let mut kinematic: Option<Vec<f64>> = None;
        kinematics = match kinematics {
            Kinematics::Pending(None) => Kinematics::Pending(Some(z)),
            Kinematics::Pending(Some(first)) => {
                let est = two_point_init(&first, &z, scenario.dt, scenario.tracker.initial_accel_variance)?;
                match scenario.tracker.kinematic_mode {
                    KinematicMode::Speed => {
                        kinematic = Some(classes.iter().map(|c| kinematic_class_likelihood(&est, c)).collect());
                        Kinematics::Filter(Box::new(est))
                    }
                    // The IMM likelihood needs a filtered innovation; the bank
                    // speaks from the next measurement on.
                    KinematicMode::Imm => {
                        Kinematics::Bank(banks.iter().map(|b| ImmState::uniform(est, b.len())).collect::<Result<_>>()?)
                    }
                }
            }
            Kinematics::Filter(est) => {
                let (est, _) = kf_step(&est, &cv, &z, &h)?;
                kinematic = Some(classes.iter().map(|c| kinematic_class_likelihood(&est, c)).collect());
                Kinematics::Filter(Box::new(est))
            }
            Kinematics::Bank(states) => {
                let states =
                    states.iter().zip(&banks).map(|(s, b)| imm_step(s, b, &z, &h)).collect::<Result<Vec<_>>>()?;
                kinematic = Some(states.iter().map(imm_class_likelihood).collect::<Result<_>>()?);
                Kinematics::Bank(states)
            }
        };

        let mut likelihood = vec![1.0; classes.len()];
        let mut fold = |factor: &[f64]| likelihood.iter_mut().zip(factor).for_each(|(l, f)| *l *= f);
        if scenario.features.speed {
            if let Some(k) = &kinematic {
                fold(k);
            }
        }
        if scenario.features.amplitude {
            let a = classes.iter().map(|c| amplitude_class_likelihood(esm.amplitude, c)).collect::<Result<Vec<_>>>()?;
            fold(&a);
        }
        if scenario.features.length {
            let l = classes
                .iter()
                .map(|c| length_class_likelihood(length, c, scenario.length_sigma))
                .collect::<Result<Vec<_>>>()?;
            fold(&l);
        }
        posterior = update_class_posterior(&posterior, &likelihood)?;
        declared.push(posterior.argmax());
        posteriors.push(posterior.clone());
    }
    Ok(RunResult { seed, posteriors, declared })
}

/// Seed of run `index` in an experiment started from `base_seed`.
pub fn run_seed(base_seed: u64, index: usize) -> u64 {
    base_seed.wrapping_add(index as u64)
}

/// Aggregate over runs.
#[derive(Debug, Clone, PartialEq)]
pub struct McSummary {
    pub features: FeatureSubset,
    pub runs: usize,
    pub steps: usize,
    pub class_ids: Vec<u32>,
    /// `mean_curves[k][i]`: class `i` probability at step `k`, averaged over runs.
    pub mean_curves: Vec<Vec<f64>>,
    /// Share of (run, step) pairs whose declared class is the true one, in percent.
    pub percent_correct: f64,
}

/// Summarise runs in the order given; callers that compute runs in parallel
/// pass them in run-index order so the floating-point sums are identical.
pub fn summarize(scenario: &Scenario, classes: &[ClassDefinition], results: &[RunResult]) -> Result<McSummary> {
    if results.is_empty() {
        return Err(invalid("no runs to summarise"));
    }
    let truth = classes
        .iter()
        .position(|c| c.class_id == scenario.true_class_id)
        .ok_or_else(|| invalid("true class is not defined"))?;
    let steps = scenario.steps;
    let mut sums = vec![vec![0.0; classes.len()]; steps];
    let mut hits = 0usize;
    for r in results {
        if r.posteriors.len() != steps {
            return Err(invalid("run length differs from the scenario"));
        }
        for (acc, p) in sums.iter_mut().zip(&r.posteriors) {
            acc.iter_mut().zip(&p.probabilities).for_each(|(a, x)| *a += x);
        }
        hits += r.declared.iter().filter(|&&d| d == truth).count();
    }
    let n = results.len() as f64;
    sums.iter_mut().flatten().for_each(|x| *x /= n);
    Ok(McSummary {
        features: scenario.features,
        runs: results.len(),
        steps,
        class_ids: classes.iter().map(|c| c.class_id).collect(),
        mean_curves: sums,
        percent_correct: 100.0 * hits as f64 / (results.len() * steps) as f64,
    })
}

/// Sequential Monte Carlo over `runs` seeds starting at `base_seed`.
pub fn run_monte_carlo(
    scenario: &Scenario,
    classes: &[ClassDefinition],
    runs: usize,
    base_seed: u64,
) -> Result<McSummary> {
    if runs == 0 {
        return Err(invalid("runs must be at least 1"));
    }
    let results = (0..runs).map(|i| run_once(scenario, classes, run_seed(base_seed, i))).collect::<Result<Vec<_>>>()?;
    summarize(scenario, classes, &results)
}

/// Human-readable label for a subset, e.g. `v+L+α`.
pub fn subset_label(features: FeatureSubset) -> String {
    let mut s = format!("{features}");
    if features.amplitude {
        s = s.replace('a', "α");
    }
    s
}
