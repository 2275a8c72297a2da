//! Dempster-Shafer mass functions over a finite frame of discernment.
//!
//! Subsets are bitmasks over the ordered frame, so the frame is capped at
//! [`MAX_FRAME`] hypotheses.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::error::{invalid, Error, Result};

pub const MAX_FRAME: usize = 20;

/// Tolerance on `Σ m(A) = 1`.
pub const MASS_SUM_TOLERANCE: f64 = 1e-12;

/// Combined masses below this are dropped.
const PRUNE_BELOW: f64 = 1e-15;

/// `K` above `1 − TOTAL_CONFLICT_MARGIN` is treated as total conflict.
const TOTAL_CONFLICT_MARGIN: f64 = 1e-9;

/// Ordered set of named, mutually exclusive hypotheses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Frame {
    elements: Vec<String>,
}

impl Frame {
    pub fn new<I, S>(elements: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let elements: Vec<String> = elements.into_iter().map(Into::into).collect();
        if elements.is_empty() {
            return Err(invalid("frame must have at least one element"));
        }
        if elements.len() > MAX_FRAME {
            return Err(invalid(format!("frame larger than {MAX_FRAME} elements")));
        }
        for (i, e) in elements.iter().enumerate() {
            if e.is_empty() {
                return Err(invalid("empty hypothesis name"));
            }
            if elements[..i].contains(e) {
                return Err(invalid(format!("duplicate hypothesis `{e}`")));
            }
        }
        Ok(Self { elements })
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.elements.iter().position(|e| e == name)
    }

    /// The whole frame Θ.
    pub fn full(&self) -> Subset {
        Subset((1u32 << self.len()) - 1)
    }

    pub fn singleton(&self, name: &str) -> Result<Subset> {
        self.index_of(name)
            .map(Subset::singleton)
            .ok_or_else(|| Error::FrameMismatch(format!("`{name}` is not in the frame")))
    }

    pub fn subset<'a, I: IntoIterator<Item = &'a str>>(&self, names: I) -> Result<Subset> {
        names.into_iter().try_fold(Subset::EMPTY, |acc, n| Ok(acc.union(self.singleton(n)?)))
    }

    pub fn contains(&self, s: Subset) -> bool {
        s.0 & !self.full().0 == 0
    }

    /// Same hypotheses, possibly in a different order.
    pub fn same_elements(&self, other: &Frame) -> bool {
        self.len() == other.len() && self.elements.iter().all(|e| other.index_of(e).is_some())
    }
}

/// A subset of the frame as a bitmask over element indices.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subset(pub u32);

impl Subset {
    pub const EMPTY: Subset = Subset(0);

    pub fn singleton(index: usize) -> Self {
        Subset(1 << index)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn intersect(self, other: Subset) -> Subset {
        Subset(self.0 & other.0)
    }

    pub fn union(self, other: Subset) -> Subset {
        Subset(self.0 | other.0)
    }

    pub fn is_subset_of(self, other: Subset) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn contains(self, index: usize) -> bool {
        self.0 & (1 << index) != 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn indices(self) -> impl Iterator<Item = usize> {
        (0..32).filter(move |&i| self.contains(i))
    }
}

/// `[Bel(A), Pl(A)]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeliefInterval {
    pub belief: f64,
    pub plausibility: f64,
}

/// Basic belief assignment: only focal elements (mass > 0) are stored.
#[derive(Debug, Clone, PartialEq)]
pub struct MassFunction {
    frame: Frame,
    focal: BTreeMap<Subset, f64>,
}

/// Rounding may push a single accumulated mass just above 1.
fn valid_mass(mass: f64) -> bool {
    (0.0..=1.0 + MASS_SUM_TOLERANCE).contains(&mass)
}

impl MassFunction {
    /// Builds a mass function; repeated subsets accumulate and zero masses
    /// are dropped.
    pub fn new<I: IntoIterator<Item = (Subset, f64)>>(frame: Frame, masses: I) -> Result<Self> {
        let mut focal = BTreeMap::new();
        for (subset, mass) in masses {
            if !frame.contains(subset) {
                return Err(Error::FrameMismatch(format!("subset {:#b} outside the frame", subset.0)));
            }
            if !valid_mass(mass) {
                return Err(invalid(format!("mass {mass} outside [0, 1]")));
            }
            if mass == 0.0 {
                continue;
            }
            if subset.is_empty() {
                return Err(invalid("the empty set cannot carry mass"));
            }
            *focal.entry(subset).or_insert(0.0) += mass;
        }
        let total: f64 = focal.values().sum();
        if (total - 1.0).abs() > MASS_SUM_TOLERANCE {
            return Err(invalid(format!("masses sum to {total}, expected 1")));
        }
        Ok(Self { frame, focal })
    }

    /// `m(Θ) = 1`.
    pub fn vacuous(frame: Frame) -> Self {
        let full = frame.full();
        Self { frame, focal: BTreeMap::from([(full, 1.0)]) }
    }

    /// Mass on singletons only, i.e. an ordinary probability vector.
    pub fn bayesian(frame: Frame, probabilities: &[f64]) -> Result<Self> {
        if probabilities.len() != frame.len() {
            return Err(Error::FrameMismatch("probability vector length differs from frame".into()));
        }
        let masses: Vec<_> = probabilities.iter().enumerate().map(|(i, &p)| (Subset::singleton(i), p)).collect();
        Self::new(frame, masses)
    }

    pub fn frame(&self) -> &Frame {
        &self.frame
    }

    pub fn mass(&self, subset: Subset) -> f64 {
        self.focal.get(&subset).copied().unwrap_or(0.0)
    }

    pub fn focal_elements(&self) -> impl Iterator<Item = (Subset, f64)> + '_ {
        self.focal.iter().map(|(&s, &m)| (s, m))
    }

    pub fn is_bayesian(&self) -> bool {
        self.focal.keys().all(|s| s.len() == 1)
    }

    /// Re-express over `target`, which must hold the same hypotheses.
    pub fn reframe(&self, target: &Frame) -> Result<Self> {
        if !self.frame.same_elements(target) {
            return Err(Error::FrameMismatch(format!(
                "{{{}}} vs {{{}}}",
                self.frame.elements.join(","),
                target.elements.join(",")
            )));
        }
        let map: Vec<usize> = self.frame.elements.iter().map(|e| target.index_of(e).unwrap()).collect();
        let focal = self
            .focal
            .iter()
            .map(|(s, &m)| {
                let bits = s.indices().fold(0u32, |acc, i| acc | (1 << map[i]));
                (Subset(bits), m)
            })
            .collect();
        Ok(Self { frame: target.clone(), focal })
    }

    fn check_same_frame(&self, other: &Frame) -> Result<()> {
        if &self.frame != other {
            return Err(Error::FrameMismatch("mass functions are over different frames".into()));
        }
        Ok(())
    }
}

/// `Bel(A) = Σ_{B ⊆ A} m(B)` and `Pl(A) = 1 − Bel(¬A)`.
pub fn belief_interval(m: &MassFunction, hypothesis: Subset) -> Result<BeliefInterval> {
    if !m.frame.contains(hypothesis) {
        return Err(Error::FrameMismatch("hypothesis outside the frame".into()));
    }
    let full = m.frame.full();
    if hypothesis == full {
        return Ok(BeliefInterval { belief: 1.0, plausibility: 1.0 });
    }
    if hypothesis.is_empty() {
        return Ok(BeliefInterval { belief: 0.0, plausibility: 0.0 });
    }
    let complement = Subset(full.0 & !hypothesis.0);
    let bel = |a: Subset| -> f64 { m.focal_elements().filter(|(b, _)| b.is_subset_of(a)).map(|(_, mass)| mass).sum() };
    let belief = bel(hypothesis).clamp(0.0, 1.0);
    let plausibility = (1.0 - bel(complement)).clamp(belief, 1.0);
    Ok(BeliefInterval { belief, plausibility })
}

/// Result of `m1 ⊕ m2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Combination {
    pub mass: MassFunction,
    /// `K`: mass that fell on empty intersections.
    pub conflict: f64,
}

/// Dempster's rule of combination.
pub fn combine_dempster(m1: &MassFunction, m2: &MassFunction) -> Result<Combination> {
    m1.check_same_frame(&m2.frame)?;
    let mut joint: BTreeMap<Subset, f64> = BTreeMap::new();
    let mut conflict = 0.0;
    for (b, mb) in m1.focal_elements() {
        for (c, mc) in m2.focal_elements() {
            let a = b.intersect(c);
            if a.is_empty() {
                conflict += mb * mc;
            } else {
                *joint.entry(a).or_insert(0.0) += mb * mc;
            }
        }
    }
    if conflict > 1.0 - TOTAL_CONFLICT_MARGIN {
        return Err(Error::TotalConflict(conflict));
    }
    // Σ over non-empty intersections is 1 − K up to rounding.
    let agreement: f64 = joint.values().sum();
    joint.retain(|_, m| {
        *m /= agreement;
        *m >= PRUNE_BELOW
    });
    let kept: f64 = joint.values().sum();
    joint.values_mut().for_each(|m| *m /= kept);
    Ok(Combination { mass: MassFunction { frame: m1.frame.clone(), focal: joint }, conflict: conflict.min(1.0) })
}

/// Plausibility-proportional probability over the singletons:
/// `p(θ) ∝ Σ_{A ∋ θ} m(A)`.
pub fn bayesian_approximation(m: &MassFunction) -> Vec<f64> {
    let mut p = alloc::vec![0.0; m.frame.len()];
    for (a, mass) in m.focal_elements() {
        for i in a.indices() {
            p[i] += mass;
        }
    }
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

impl fmt::Display for MassFunction {
    /// One `{elem,elem,...} mass` line per focal element.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (s, m) in self.focal_elements() {
            let names: Vec<&str> = s.indices().map(|i| self.frame.elements[i].as_str()).collect();
            writeln!(f, "{{{}}} {}", names.join(","), m)?;
        }
        Ok(())
    }
}

fn parse_set(text: &str, line: usize) -> Result<Vec<String>> {
    let perr = |message: String| Error::Parse { line, message };
    let inner = text
        .strip_prefix('{')
        .and_then(|t| t.strip_suffix('}'))
        .ok_or_else(|| perr(format!("expected `{{elem,...}}`, found `{text}`")))?;
    let names: Vec<String> = inner.split(',').map(|n| n.trim().to_string()).filter(|n| !n.is_empty()).collect();
    if names.is_empty() {
        return Err(perr("empty set cannot carry mass".into()));
    }
    Ok(names)
}

/// Parse the plain-text mass format.
///
/// ```text
/// # comment
/// frame {a,b,c}      (optional; otherwise the frame is every element named)
/// {a} 0.5
/// {a,b} 0.3
/// {a,b,c} 0.2
/// ```
pub fn parse_mass_text(text: &str) -> Result<MassFunction> {
    let mut declared: Option<Vec<String>> = None;
    let mut entries: Vec<(usize, Vec<String>, f64)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(rest) = body.strip_prefix("frame") {
            if declared.is_some() {
                return Err(Error::Parse { line, message: "frame declared twice".into() });
            }
            declared = Some(parse_set(rest.trim(), line)?);
            continue;
        }
        let close = body
            .find('}')
            .ok_or_else(|| Error::Parse { line, message: format!("expected `{{elem,...}} mass`, found `{body}`") })?;
        let names = parse_set(body[..=close].trim(), line)?;
        let mass_text = body[close + 1..].trim();
        let mass: f64 =
            mass_text.parse().map_err(|_| Error::Parse { line, message: format!("invalid mass `{mass_text}`") })?;
        if !valid_mass(mass) {
            return Err(Error::Parse { line, message: format!("mass {mass} outside [0, 1]") });
        }
        entries.push((line, names, mass));
    }
    if entries.is_empty() {
        return Err(Error::Parse { line: 0, message: "no focal elements".into() });
    }
    let elements = declared.unwrap_or_else(|| {
        let mut seen: Vec<String> = Vec::new();
        for n in entries.iter().flat_map(|(_, names, _)| names) {
            if !seen.contains(n) {
                seen.push(n.clone());
            }
        }
        seen
    });
    let frame = Frame::new(elements).map_err(|e| Error::Parse { line: 0, message: e.to_string() })?;
    let mut masses = Vec::with_capacity(entries.len());
    for (line, names, mass) in &entries {
        let subset = frame
            .subset(names.iter().map(String::as_str))
            .map_err(|e| Error::Parse { line: *line, message: e.to_string() })?;
        masses.push((subset, *mass));
    }
    MassFunction::new(frame, masses).map_err(|e| Error::Parse { line: 0, message: e.to_string() })
}
