//! Recursive Bayesian estimation of discrete target attributes from ESM
//! reports.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::distributions::{Gaussian, Rayleigh};
use crate::error::{invalid, Error, Result};
use crate::measurement::{Feature, FeatureSource};

/// Tolerance on probability-vector normalization.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttributeKind {
    Speed,
    Shape,
    Length,
    Size,
    EmitterId,
    NumberOfEmitters,
}

impl AttributeKind {
    pub const ALL: [AttributeKind; 6] = [
        AttributeKind::Speed,
        AttributeKind::Shape,
        AttributeKind::Length,
        AttributeKind::Size,
        AttributeKind::EmitterId,
        AttributeKind::NumberOfEmitters,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AttributeKind::Speed => "speed",
            AttributeKind::Shape => "shape",
            AttributeKind::Length => "length",
            AttributeKind::Size => "size",
            AttributeKind::EmitterId => "emitter_id",
            AttributeKind::NumberOfEmitters => "number_of_emitters",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }
}

/// `g_i(y)`: how an outcome explains one feature of a report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LikelihoodModel {
    Gaussian { feature: Feature, dist: Gaussian },
    Rayleigh { feature: Feature, dist: Rayleigh },
}

impl LikelihoodModel {
    pub fn feature(&self) -> Feature {
        match *self {
            LikelihoodModel::Gaussian { feature, .. } | LikelihoodModel::Rayleigh { feature, .. } => feature,
        }
    }

    pub fn evaluate(&self, value: f64) -> f64 {
        match self {
            LikelihoodModel::Gaussian { dist, .. } => dist.pdf(value),
            LikelihoodModel::Rayleigh { dist, .. } => dist.pdf(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttributeOutcome {
    pub label: String,
    /// `p_i(0)`.
    pub prior: f64,
    pub model: LikelihoodModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub kind: AttributeKind,
    pub outcomes: Vec<AttributeOutcome>,
}

/// The attribute set with per-outcome likelihoods and priors.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeCatalog {
    attributes: Vec<Attribute>,
}

impl AttributeCatalog {
    pub fn new(attributes: Vec<Attribute>) -> Result<Self> {
        for (i, a) in attributes.iter().enumerate() {
            if attributes[..i].iter().any(|b| b.kind == a.kind) {
                return Err(invalid(format!("attribute `{}` listed twice", a.kind.name())));
            }
            if a.outcomes.len() < 2 {
                return Err(invalid(format!("attribute `{}` needs at least two outcomes", a.kind.name())));
            }
            if a.outcomes.iter().any(|o| !(0.0..=1.0).contains(&o.prior)) {
                return Err(invalid(format!("attribute `{}` has a prior outside [0, 1]", a.kind.name())));
            }
            let total: f64 = a.outcomes.iter().map(|o| o.prior).sum();
            if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
                return Err(invalid(format!("priors of `{}` sum to {total}", a.kind.name())));
            }
        }
        Ok(Self { attributes })
    }

    pub fn attributes(&self) -> &[Attribute] {
        &self.attributes
    }

    pub fn position(&self, kind: AttributeKind) -> Option<usize> {
        self.attributes.iter().position(|a| a.kind == kind)
    }

    pub fn get(&self, kind: AttributeKind) -> Option<&Attribute> {
        self.position(kind).map(|i| &self.attributes[i])
    }

    pub fn priors(&self, kind: AttributeKind) -> Option<Vec<f64>> {
        self.get(kind).map(|a| a.outcomes.iter().map(|o| o.prior).collect())
    }
}

/// `{a, A}`: per-attribute posterior `p_i(k)` after `step_index` reports.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeReport {
    /// Indexed like the catalog's attributes.
    pub posteriors: Vec<Vec<f64>>,
    pub step_index: usize,
}

impl AttributeReport {
    pub fn posterior(&self, catalog: &AttributeCatalog, kind: AttributeKind) -> Option<&[f64]> {
        catalog.position(kind).map(|i| self.posteriors[i].as_slice())
    }
}

/// `g_i(y)` for one outcome of one attribute.
pub fn attribute_likelihood<S: FeatureSource + ?Sized>(
    catalog: &AttributeCatalog,
    kind: AttributeKind,
    outcome_index: usize,
    y: &S,
) -> Result<f64> {
    let attr = catalog.get(kind).ok_or_else(|| invalid(format!("attribute `{}` not in catalog", kind.name())))?;
    let outcome = attr
        .outcomes
        .get(outcome_index)
        .ok_or_else(|| invalid(format!("outcome {outcome_index} out of range for `{}`", kind.name())))?;
    let feature = outcome.model.feature();
    let value = y.feature(feature).ok_or_else(|| invalid(format!("report carries no `{}`", feature.name())))?;
    Ok(outcome.model.evaluate(value))
}

/// Report at `k = 0` carrying the catalog priors.
pub fn initialize_attributes(catalog: &AttributeCatalog) -> AttributeReport {
    AttributeReport {
        posteriors: catalog.attributes.iter().map(|a| a.outcomes.iter().map(|o| o.prior).collect()).collect(),
        step_index: 0,
    }
}

/// One Bayes step `p_i(k) = g_i(y(k)) p_i(k−1) / c_k` for every attribute the
/// report speaks to. Attributes whose features are absent from `y` keep their
/// posterior.
pub fn update_attributes<S: FeatureSource + ?Sized>(
    prev: &AttributeReport,
    y: &S,
    catalog: &AttributeCatalog,
) -> Result<AttributeReport> {
    if prev.posteriors.len() != catalog.attributes.len() {
        return Err(invalid("report does not match the catalog"));
    }
    let mut posteriors = Vec::with_capacity(prev.posteriors.len());
    for (attr, p) in catalog.attributes.iter().zip(&prev.posteriors) {
        if p.len() != attr.outcomes.len() {
            return Err(invalid(format!("posterior length mismatch for `{}`", attr.kind.name())));
        }
        let values: Vec<Option<f64>> = attr.outcomes.iter().map(|o| y.feature(o.model.feature())).collect();
        if values.iter().all(Option::is_none) {
            posteriors.push(p.clone());
            continue;
        }
        if values.iter().any(Option::is_none) {
            return Err(invalid(format!("report covers only some features of `{}`", attr.kind.name())));
        }
        let mut next: Vec<f64> = attr
            .outcomes
            .iter()
            .zip(&values)
            .zip(p)
            .map(|((o, v), prior)| o.model.evaluate(v.unwrap()) * prior)
            .collect();
        let c: f64 = next.iter().sum();
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::DegenerateEvidence(format!("all likelihoods of `{}` vanish", attr.kind.name())));
        }
        next.iter_mut().for_each(|x| *x /= c);
        posteriors.push(next);
    }
    Ok(AttributeReport { posteriors, step_index: prev.step_index + 1 })
}
