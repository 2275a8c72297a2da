//! Class likelihoods per feature, the recursive class posterior and the
//! classifier over heterogeneous report sets.
//!
//! Features and sensors are treated as conditionally independent given the
//! class, so every report contributes one multiplicative likelihood factor.
//! Same-type reports from different sensors therefore fuse by product.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::attributes::{
    Attribute, AttributeCatalog, AttributeKind, AttributeOutcome, AttributeReport, LikelihoodModel,
};
use crate::distributions::{Gaussian, Rayleigh};
use crate::error::{invalid, Error, Result};
use crate::evidence::{bayesian_approximation, Frame, MassFunction};
use crate::measurement::{EsmSignalReport, Feature};
use crate::tracking::{speed_estimate, GaussianEstimate, ImmState};

/// Feature distributions of one target class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassDefinition {
    pub class_id: u32,
    /// Speed over ground, m/s.
    pub speed: Gaussian,
    pub amplitude: Rayleigh,
    /// Metres.
    pub length: Gaussian,
}

impl ClassDefinition {
    pub fn new(class_id: u32, speed: Gaussian, amplitude: Rayleigh, length: Gaussian) -> Result<Self> {
        Gaussian::new(speed.mean, speed.std_dev)?;
        Rayleigh::new(amplitude.scale)?;
        Gaussian::new(length.mean, length.std_dev)?;
        Ok(Self { class_id, speed, amplitude, length })
    }

    /// The three maritime classes of the reference experiment.
    pub fn maritime_classes() -> Vec<ClassDefinition> {
        [(1, 5.0, 4.0, 15.0), (2, 15.0, 2.0, 10.0), (3, 30.0, 0.5, 5.0)]
            .into_iter()
            .map(|(id, v, a, l)| ClassDefinition {
                class_id: id,
                speed: Gaussian { mean: v, std_dev: 3.0 },
                amplitude: Rayleigh { scale: a },
                length: Gaussian { mean: l, std_dev: 2.0 },
            })
            .collect()
    }
}

/// Hypothesis frame whose elements are the class ids.
pub fn class_frame(classes: &[ClassDefinition]) -> Result<Frame> {
    Frame::new(classes.iter().map(|c| c.class_id.to_string()))
}

/// `P(c = i | Z^k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassPosterior {
    pub probabilities: Vec<f64>,
    pub step_index: usize,
}

impl ClassPosterior {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.is_empty() || probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(invalid("class prior entries must lie in [0, 1]"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("class prior sums to {total}")));
        }
        Ok(Self { probabilities, step_index: 0 })
    }

    pub fn uniform(classes: usize) -> Self {
        Self { probabilities: vec![1.0 / classes as f64; classes], step_index: 0 }
    }

    /// Index of the most probable class; ties go to the lowest index.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = i;
            }
        }
        best
    }
}

/// Density of the estimated speed under `N(μ_v, σ_v² + σ_v̂²)`.
pub fn kinematic_class_likelihood(est: &GaussianEstimate, cls: &ClassDefinition) -> f64 {
    let s = speed_estimate(est);
    cls.speed.pdf_inflated(s.speed, s.variance)
}

/// `Σ_j μ^j(k) Λ^j(k)` with the predicted mode probabilities of the latest
/// IMM cycle.
pub fn imm_class_likelihood(st: &ImmState) -> Result<f64> {
    match (&st.predicted_mode_probabilities, &st.mode_likelihoods) {
        (Some(mu), Some(lambda)) => Ok(mu.iter().zip(lambda).map(|(m, l)| m * l).sum()),
        _ => Err(Error::MissingLikelihood("IMM has not processed a measurement yet".into())),
    }
}

pub fn amplitude_class_likelihood(amplitude: f64, cls: &ClassDefinition) -> Result<f64> {
    if !(amplitude >= 0.0) {
        return Err(invalid("amplitude must be non-negative"));
    }
    Ok(cls.amplitude.pdf(amplitude))
}

/// Density of a length measurement under `N(μ_L, σ_L² + σ_meas²)`.
pub fn length_class_likelihood(length: f64, cls: &ClassDefinition, measurement_sigma: f64) -> Result<f64> {
    if !(measurement_sigma >= 0.0) {
        return Err(invalid("length measurement sigma must be non-negative"));
    }
    Ok(cls.length.pdf_inflated(length, measurement_sigma * measurement_sigma))
}

/// `P(c=i|Z^k) ∝ ℓ_i · P(c=i|Z^{k−1})`.
pub fn update_class_posterior(prev: &ClassPosterior, likelihoods: &[f64]) -> Result<ClassPosterior> {
    if likelihoods.len() != prev.probabilities.len() {
        return Err(invalid(format!("{} likelihoods for {} classes", likelihoods.len(), prev.probabilities.len())));
    }
    if likelihoods.iter().any(|l| !(*l >= 0.0) || !l.is_finite()) {
        return Err(invalid("likelihoods must be finite and non-negative"));
    }
    let mut probabilities: Vec<f64> = prev.probabilities.iter().zip(likelihoods).map(|(p, l)| p * l).collect();
    let total: f64 = probabilities.iter().sum();
    if !(total > 0.0) {
        return Err(Error::DegenerateEvidence("every class has zero likelihood".into()));
    }
    probabilities.iter_mut().for_each(|p| *p /= total);
    Ok(ClassPosterior { probabilities, step_index: prev.step_index + 1 })
}

/// Catalog with a class-aligned length attribute: outcome `i` is "the length
/// of class `i`", modelled as `N(μ_L, σ_L² + σ_meas²)` with a uniform prior.
pub fn length_catalog(classes: &[ClassDefinition], measurement_sigma: f64) -> Result<AttributeCatalog> {
    let n = classes.len() as f64;
    let outcomes = classes
        .iter()
        .map(|c| {
            let sd = libm::sqrt(c.length.variance() + measurement_sigma * measurement_sigma);
            Ok(AttributeOutcome {
                label: format!("class {}", c.class_id),
                prior: 1.0 / n,
                model: LikelihoodModel::Gaussian { feature: Feature::Length, dist: Gaussian::new(c.length.mean, sd)? },
            })
        })
        .collect::<Result<Vec<_>>>()?;
    AttributeCatalog::new(vec![Attribute { kind: AttributeKind::Length, outcomes }])
}

/// Declaration content `{r, ρ}`.
#[derive(Debug, Clone, PartialEq)]
pub enum Declaration {
    Probabilities(Vec<f64>),
    Mass(MassFunction),
}

/// R&I declaration from one source.
#[derive(Debug, Clone, PartialEq)]
pub struct DeclarationReport {
    pub source: String,
    pub declaration: Declaration,
}

impl DeclarationReport {
    pub fn probabilities(source: impl Into<String>, p: Vec<f64>) -> Result<Self> {
        let total: f64 = p.iter().sum();
        if p.iter().any(|x| !(0.0..=1.0).contains(x)) || (total - 1.0).abs() > 1e-9 {
            return Err(invalid("declaration probabilities must form a distribution"));
        }
        Ok(Self { source: source.into(), declaration: Declaration::Probabilities(p) })
    }

    pub fn mass(source: impl Into<String>, m: MassFunction) -> Self {
        Self { source: source.into(), declaration: Declaration::Mass(m) }
    }

    /// Class probabilities, approximating mass-form declarations.
    pub fn class_probabilities(&self, frame: &Frame) -> Result<Vec<f64>> {
        match &self.declaration {
            Declaration::Probabilities(p) if p.len() == frame.len() => Ok(p.clone()),
            Declaration::Probabilities(p) => {
                Err(Error::FrameMismatch(format!("declaration over {} classes, expected {}", p.len(), frame.len())))
            }
            Declaration::Mass(m) => Ok(bayesian_approximation(&m.reframe(frame)?)),
        }
    }
}

/// One sensor's contribution.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Signal(EsmSignalReport),
    Attribute(AttributeReport),
    Declaration(DeclarationReport),
    Kinematic(GaussianEstimate),
}

impl Report {
    pub fn type_name(&self) -> &'static str {
        match self {
            Report::Signal(_) => "signal",
            Report::Attribute(_) => "attribute",
            Report::Declaration(_) => "declaration",
            Report::Kinematic(_) => "kinematic",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SensorReport {
    pub sensor_id: u32,
    pub report: Report,
}

/// Reports from distinct sensors associated to one target at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportSet {
    pub step: u64,
    entries: Vec<SensorReport>,
}

impl ReportSet {
    pub fn new(step: u64, entries: Vec<SensorReport>) -> Result<Self> {
        if entries.is_empty() {
            return Err(invalid("report set is empty"));
        }
        for (i, e) in entries.iter().enumerate() {
            if entries[..i].iter().any(|o| o.sensor_id == e.sensor_id) {
                return Err(invalid(format!("sensor {} reports twice in one set", e.sensor_id)));
            }
        }
        Ok(Self { step, entries })
    }

    pub fn entries(&self) -> &[SensorReport] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// A report with its time stamp, as it arrives at the fusion centre.
#[derive(Debug, Clone, PartialEq)]
pub struct TimedReport {
    pub step: u64,
    pub sensor_id: u32,
    pub report: Report,
}

/// Trivial associator for single-target scenarios: every report belongs to
/// the one target and is grouped by step, in step order. A sensor reporting
/// twice in one step opens a second set for that step.
pub fn associate_single_target(reports: Vec<TimedReport>) -> Vec<ReportSet> {
    let mut reports = reports;
    reports.sort_by_key(|r| r.step);
    let mut sets: Vec<ReportSet> = Vec::new();
    let mut open_from = 0;
    for r in reports {
        if sets.last().is_some_and(|s| s.step != r.step) {
            open_from = sets.len();
        }
        let entry = SensorReport { sensor_id: r.sensor_id, report: r.report };
        match sets[open_from..].iter_mut().find(|s| s.entries.iter().all(|e| e.sensor_id != entry.sensor_id)) {
            Some(set) => set.entries.push(entry),
            None => sets.push(ReportSet { step: r.step, entries: vec![entry] }),
        }
    }
    sets
}

/// Class models plus what is needed to read each report type.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionModel {
    pub classes: Vec<ClassDefinition>,
    /// Attributes whose outcome count equals the number of classes are read
    /// as class-aligned (outcome `i` ↔ class `i`); others carry no class
    /// evidence.
    pub catalog: AttributeCatalog,
    frame: Frame,
}

impl FusionModel {
    pub fn new(classes: Vec<ClassDefinition>, catalog: AttributeCatalog) -> Result<Self> {
        let frame = class_frame(&classes)?;
        Ok(Self { classes, catalog, frame })
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    /// The multiplicative class-likelihood factor contributed by one report.
    pub fn report_likelihoods(&self, report: &Report) -> Result<Vec<f64>> {
        match report {
            Report::Kinematic(est) => Ok(self.classes.iter().map(|c| kinematic_class_likelihood(est, c)).collect()),
            Report::Signal(y) => {
                y.validate()?;
                self.classes.iter().map(|c| amplitude_class_likelihood(y.amplitude, c)).collect()
            }
            Report::Declaration(d) => d.class_probabilities(&self.frame),
            Report::Attribute(a) => self.attribute_likelihoods(a),
        }
    }

    /// An attribute report summarises evidence relative to the catalog prior,
    /// so its factor is `p_i(k) / p_i(0)`.
    fn attribute_likelihoods(&self, report: &AttributeReport) -> Result<Vec<f64>> {
        if report.posteriors.len() != self.catalog.attributes().len() {
            return Err(invalid("attribute report does not match the catalog"));
        }
        let mut factor = vec![1.0; self.classes.len()];
        for (attr, post) in self.catalog.attributes().iter().zip(&report.posteriors) {
            if attr.outcomes.len() != self.classes.len() {
                continue;
            }
            if post.len() != attr.outcomes.len() {
                return Err(invalid(format!("posterior length mismatch for `{}`", attr.kind.name())));
            }
            for ((f, p), o) in factor.iter_mut().zip(post).zip(&attr.outcomes) {
                if !(o.prior > 0.0) {
                    return Err(invalid(format!("`{}` needs positive priors to be fused", attr.kind.name())));
                }
                *f *= p / o.prior;
            }
        }
        Ok(factor)
    }
}

/// Fills the feature set from every report and folds the product of their
/// factors into `prior`.
pub fn fuse_reports(sets: &[ReportSet], model: &FusionModel, prior: &ClassPosterior) -> Result<ClassPosterior> {
    if sets.iter().all(|s| s.entries.is_empty()) {
        return Err(invalid("no reports to classify"));
    }
    let mut combined = vec![1.0; model.classes.len()];
    for entry in sets.iter().flat_map(|s| &s.entries) {
        for (c, l) in combined.iter_mut().zip(model.report_likelihoods(&entry.report)?) {
            *c *= l;
        }
    }
    update_class_posterior(prior, &combined)
}

/// `Ψ(S_1, …, S_m)`: the fused posterior issued as a declaration.
pub fn classify_reports(sets: &[ReportSet], model: &FusionModel, prior: &ClassPosterior) -> Result<DeclarationReport> {
    let posterior = fuse_reports(sets, model, prior)?;
    Ok(DeclarationReport {
        source: "fusion".to_string(),
        declaration: Declaration::Probabilities(posterior.probabilities),
    })
}
