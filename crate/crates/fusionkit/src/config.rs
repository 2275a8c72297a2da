//! TOML experiment configuration.

use std::path::{Path, PathBuf};

use fusionkit_core::classification::ClassDefinition;
use fusionkit_core::distributions::{Gaussian, Rayleigh};
use fusionkit_core::simulation::{FeatureSubset, KinematicMode, RadarConfig, Scenario, TrackerConfig};
use serde::{Deserialize, Serialize};

use crate::error::AppError;

pub const DEFAULT_CONFIG: &str = include_str!("../configs/default.toml");
pub const DEFAULT_ORIGIN: &str = "<default config>";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub experiment: Experiment,
    pub scenario: ScenarioSection,
    pub radar: RadarSection,
    pub tracker: TrackerSection,
    pub classes: Vec<ClassSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Experiment {
    pub runs: usize,
    pub steps: usize,
    pub seed: u64,
    /// Subset tokens, e.g. `"v+L+a"`.
    pub features: Vec<String>,
    #[serde(default = "default_out")]
    pub out: PathBuf,
}

fn default_out() -> PathBuf {
    PathBuf::from("out")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub initial_position: [f64; 2],
    pub speed: f64,
    pub course: f64,
    pub true_class: u32,
    pub true_amplitude_sigma: f64,
    pub true_length: f64,
    pub length_sigma: f64,
    pub dt: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadarSection {
    pub position: [f64; 2],
    pub sigma_r: f64,
    pub sigma_theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KinematicModeName {
    Speed,
    Imm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrackerSection {
    pub process_noise: f64,
    pub initial_accel_variance: f64,
    pub kinematic_mode: KinematicModeName,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub class_process_noise: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianSection {
    pub mean: f64,
    pub sigma: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassSection {
    pub id: u32,
    pub speed: GaussianSection,
    pub amplitude_sigma: f64,
    pub length: GaussianSection,
}

/// Command-line values that replace config values.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub runs: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
    pub features: Option<Vec<String>>,
    pub out: Option<PathBuf>,
}

impl Config {
    pub fn default_config() -> Self {
        Self::parse(DEFAULT_CONFIG, DEFAULT_ORIGIN).expect("shipped config is valid")
    }

    pub fn load(path: &Path) -> Result<Self, AppError> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates; errors name the offending line.
    pub fn parse(text: &str, origin: &str) -> Result<Self, AppError> {
        let config: Config = toml::from_str(text).map_err(|e| AppError::Config {
            origin: origin.to_string(),
            line: e.span().map(|s| line_at(text, s.start)),
            message: e.message().to_string(),
        })?;
        config.validate().map_err(|(at, message)| AppError::Config {
            origin: origin.to_string(),
            line: locate(text, &at),
            message,
        })?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serialises")
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<(), AppError> {
        if let Some(r) = o.runs {
            self.experiment.runs = r;
        }
        if let Some(s) = o.steps {
            self.experiment.steps = s;
        }
        if let Some(s) = o.seed {
            self.experiment.seed = s;
        }
        if let Some(f) = &o.features {
            self.experiment.features = f.clone();
        }
        if let Some(out) = &o.out {
            self.experiment.out = out.clone();
        }
        self.validate().map_err(|(at, message)| AppError::Usage(format!("[{}] {message}", at.section)))
    }

    pub fn feature_subsets(&self) -> Vec<FeatureSubset> {
        self.experiment.features.iter().map(|f| f.parse().expect("validated")).collect()
    }

    pub fn classes(&self) -> Vec<ClassDefinition> {
        self.classes
            .iter()
            .map(|c| {
                ClassDefinition::new(
                    c.id,
                    Gaussian::new(c.speed.mean, c.speed.sigma).expect("validated"),
                    Rayleigh::new(c.amplitude_sigma).expect("validated"),
                    Gaussian::new(c.length.mean, c.length.sigma).expect("validated"),
                )
                .expect("validated")
            })
            .collect()
    }

    /// Scenario for the first configured subset; use
    /// [`Scenario::with_features`] for the others.
    pub fn scenario(&self) -> Scenario {
        let s = &self.scenario;
        Scenario {
            initial_position: s.initial_position,
            speed: s.speed,
            course: s.course,
            true_class_id: s.true_class,
            true_amplitude_scale: s.true_amplitude_sigma,
            true_length: s.true_length,
            length_sigma: s.length_sigma,
            steps: self.experiment.steps,
            dt: s.dt,
            radar: RadarConfig {
                position: self.radar.position,
                sigma_r: self.radar.sigma_r,
                sigma_theta: self.radar.sigma_theta,
            },
            tracker: TrackerConfig {
                process_noise: self.tracker.process_noise,
                initial_accel_variance: self.tracker.initial_accel_variance,
                kinematic_mode: match self.tracker.kinematic_mode {
                    KinematicModeName::Speed => KinematicMode::Speed,
                    KinematicModeName::Imm => KinematicMode::Imm,
                },
                class_process_noise: self.tracker.class_process_noise.clone(),
            },
            features: self.experiment.features.first().and_then(|f| f.parse().ok()).unwrap_or_default(),
            prior: s.prior.clone(),
        }
    }

    fn validate(&self) -> Result<(), (Key, String)> {
        let e = &self.experiment;
        check(e.runs >= 1, Key::new("experiment", "runs"), "must be at least 1")?;
        check(e.steps >= 1, Key::new("experiment", "steps"), "must be at least 1")?;
        check(!e.features.is_empty(), Key::new("experiment", "features"), "needs at least one subset")?;
        for (i, f) in e.features.iter().enumerate() {
            let subset =
                f.parse::<FeatureSubset>().map_err(|err| (Key::new("experiment", "features"), err.to_string()))?;
            check(
                !e.features[..i].iter().any(|g| g.parse::<FeatureSubset>().ok() == Some(subset)),
                Key::new("experiment", "features"),
                &format!("subset `{f}` listed twice"),
            )?;
        }

        let s = &self.scenario;
        let finite = |x: f64| x.is_finite();
        check(
            s.initial_position.iter().all(|x| finite(*x)),
            Key::new("scenario", "initial_position"),
            "must be finite",
        )?;
        check(finite(s.speed) && s.speed >= 0.0, Key::new("scenario", "speed"), "must be finite and non-negative")?;
        check(finite(s.course), Key::new("scenario", "course"), "must be finite")?;
        check(positive(s.true_amplitude_sigma), Key::new("scenario", "true_amplitude_sigma"), "must be positive")?;
        check(finite(s.true_length), Key::new("scenario", "true_length"), "must be finite")?;
        check(
            finite(s.length_sigma) && s.length_sigma >= 0.0,
            Key::new("scenario", "length_sigma"),
            "must be non-negative",
        )?;
        check(positive(s.dt), Key::new("scenario", "dt"), "must be positive")?;
        check(
            self.classes.iter().any(|c| c.id == s.true_class),
            Key::new("scenario", "true_class"),
            &format!("class {} is not defined", s.true_class),
        )?;
        if let Some(p) = &s.prior {
            check(p.len() == self.classes.len(), Key::new("scenario", "prior"), "needs one entry per class")?;
            check(
                p.iter().all(|x| (0.0..=1.0).contains(x)) && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-12,
                Key::new("scenario", "prior"),
                "must be a probability vector",
            )?;
        }

        let r = &self.radar;
        check(r.position.iter().all(|x| finite(*x)), Key::new("radar", "position"), "must be finite")?;
        check(positive(r.sigma_r), Key::new("radar", "sigma_r"), "must be positive")?;
        check(positive(r.sigma_theta), Key::new("radar", "sigma_theta"), "must be positive")?;

        let t = &self.tracker;
        check(positive(t.process_noise), Key::new("tracker", "process_noise"), "must be positive")?;
        check(positive(t.initial_accel_variance), Key::new("tracker", "initial_accel_variance"), "must be positive")?;
        check(
            t.class_process_noise.is_empty()
                || (t.class_process_noise.len() == self.classes.len()
                    && t.class_process_noise.iter().all(|q| positive(*q))),
            Key::new("tracker", "class_process_noise"),
            "needs one positive value per class",
        )?;

        check(!self.classes.is_empty(), Key::new("classes", "id"), "at least one class is required")?;
        for (i, c) in self.classes.iter().enumerate() {
            let key = |k| Key { section: "classes", index: i, key: k };
            check(
                !self.classes[..i].iter().any(|o| o.id == c.id),
                key("id"),
                &format!("class {} defined twice", c.id),
            )?;
            check(
                finite(c.speed.mean) && positive(c.speed.sigma),
                key("speed"),
                "needs a finite mean and positive sigma",
            )?;
            check(positive(c.amplitude_sigma), key("amplitude_sigma"), "must be positive")?;
            check(
                finite(c.length.mean) && positive(c.length.sigma),
                key("length"),
                "needs a finite mean and positive sigma",
            )?;
        }
        Ok(())
    }
}

fn positive(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// A key inside the `index`-th occurrence of a `[section]` or `[[section]]` table.
#[derive(Debug, Clone, Copy)]
struct Key {
    section: &'static str,
    index: usize,
    key: &'static str,
}

impl Key {
    fn new(section: &'static str, key: &'static str) -> Self {
        Self { section, index: 0, key }
    }
}

fn check(ok: bool, at: Key, message: &str) -> Result<(), (Key, String)> {
    if ok {
        Ok(())
    } else {
        Err((at, format!("`{}`: {message}", at.key)))
    }
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// Line of `key = ...` in the right table, or of the table header when the
/// key is absent.
fn locate(text: &str, at: &Key) -> Option<usize> {
    let mut seen = 0usize;
    let mut inside = false;
    let mut header = None;
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            let name = line.trim_matches(|c| c == '[' || c == ']').trim();
            inside = false;
            if name == at.section {
                if seen == at.index {
                    inside = true;
                    header = Some(n + 1);
                }
                seen += 1;
            }
            continue;
        }
        if inside {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == at.key {
                    return Some(n + 1);
                }
            }
        }
    }
    header
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_config_is_valid() {
        let c = Config::default_config();
        assert_eq!(c.feature_subsets(), FeatureSubset::REFERENCE_ORDER.to_vec());
        assert_eq!(c.classes(), ClassDefinition::maritime_classes());
        let s = c.scenario();
        assert_eq!(s, Scenario::default().with_features(FeatureSubset::SPEED));
    }

    #[test]
    fn round_trip() {
        let c = Config::default_config();
        let text = c.to_toml();
        assert_eq!(Config::parse(&text, "rt").unwrap(), c);
    }

    #[test]
    fn unknown_key_names_its_line() {
        let text = DEFAULT_CONFIG.replace("dt = 1.0", "dt = 1.0\nbogus = 3");
        let err = Config::parse(&text, "c.toml").unwrap_err();
        let line = text.lines().position(|l| l.starts_with("bogus")).unwrap() + 1;
        assert!(err.to_string().starts_with(&format!("c.toml:{line}:")), "{err}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_key_is_rejected() {
        let text = DEFAULT_CONFIG.replace("sigma_r = 10.0\n", "");
        let err = Config::parse(&text, "c.toml").unwrap_err();
        assert!(err.to_string().contains("sigma_r"), "{err}");
    }

    #[test]
    fn invalid_value_names_its_line() {
        let text = DEFAULT_CONFIG.replacen("amplitude_sigma = 2.0", "amplitude_sigma = -2.0", 1);
        let err = Config::parse(&text, "c.toml").unwrap_err();
        let line = text.lines().position(|l| l.contains("-2.0")).unwrap() + 1;
        assert!(err.to_string().starts_with(&format!("c.toml:{line}:")), "{err}");
    }

    #[test]
    fn bad_feature_token() {
        let text = DEFAULT_CONFIG.replace("\"v+a\"", "\"v+x\"");
        let err = Config::parse(&text, "c.toml").unwrap_err();
        assert!(err.to_string().contains(":7:"), "{err}");
    }

    #[test]
    fn overrides_take_precedence() {
        let mut c = Config::default_config();
        c.apply(&Overrides { runs: Some(3), seed: Some(7), features: Some(vec!["L".into()]), ..Default::default() })
            .unwrap();
        assert_eq!(c.experiment.runs, 3);
        assert_eq!(c.experiment.seed, 7);
        assert_eq!(c.feature_subsets(), vec![FeatureSubset::LENGTH]);
        assert!(c.apply(&Overrides { runs: Some(0), ..Default::default() }).is_err());
    }
}
