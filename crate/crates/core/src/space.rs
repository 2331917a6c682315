//! Atomic σ-finite measure spaces, transformations on them, and finite windows.
//!
//! A space is either listed explicitly ([`FiniteSpace`]) or produced by a
//! [`SpaceGenerator`] that enumerates atoms in nested levels. Each generator
//! decides which atoms a level holds; the shipped ones use the largest structured
//! index. Finite spaces have a single window, the whole space.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{ExtRational, Rational};
use crate::verdict::{Verdict, Witness};

/// A point of the space: a family name plus a tuple of nonnegative indices.
///
/// Ordered lexicographically by family, then indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AtomId {
    pub family: String,
    #[serde(default)]
    pub indices: Vec<u64>,
}

impl AtomId {
    pub fn new(family: impl Into<String>, indices: impl Into<Vec<u64>>) -> Self {
        AtomId { family: family.into(), indices: indices.into() }
    }

    pub fn indexed(family: impl Into<String>, i: u64) -> Self {
        AtomId::new(family, vec![i])
    }

    pub fn bare(family: impl Into<String>) -> Self {
        AtomId::new(family, Vec::new())
    }

    /// Smallest window level containing this atom.
    pub fn level(&self) -> u64 {
        self.indices.iter().max().map_or(0, |m| m + 1)
    }
}

impl fmt::Display for AtomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.family)?;
        if !self.indices.is_empty() {
            let idx: Vec<String> = self.indices.iter().map(u64::to_string).collect();
            write!(f, "[{}]", idx.join(","))?;
        }
        Ok(())
    }
}

impl FromStr for AtomId {
    type Err = Error;

    /// Parses `family` or `family[i,j,...]`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("malformed atom id {s:?}"));
        match s.split_once('[') {
            None if !s.is_empty() => Ok(AtomId::bare(s)),
            None => Err(bad()),
            Some((family, rest)) => {
                let inner = rest.strip_suffix(']').ok_or_else(bad)?;
                if family.is_empty() {
                    return Err(bad());
                }
                let indices = if inner.trim().is_empty() {
                    Vec::new()
                } else {
                    inner
                        .split(',')
                        .map(|t| t.trim().parse::<u64>().map_err(|_| bad()))
                        .collect::<Result<Vec<_>>>()?
                };
                Ok(AtomId::new(family, indices))
            }
        }
    }
}

/// The mass of a single atom: a finite nonnegative rational.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Mass(Rational);

impl Mass {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() {
            return Err(Error::Schema(format!("negative mass {value}")));
        }
        Ok(Mass(value))
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }
}

/// An explicitly listed finite space.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteSpace {
    masses: BTreeMap<AtomId, Mass>,
}

impl FiniteSpace {
    /// Fails on duplicate atoms.
    pub fn new(atoms: impl IntoIterator<Item = (AtomId, Mass)>) -> Result<Self> {
        let mut masses = BTreeMap::new();
        for (atom, mass) in atoms {
            if masses.insert(atom.clone(), mass).is_some() {
                return Err(Error::Schema(format!("duplicate atom {atom}")));
            }
        }
        Ok(FiniteSpace { masses })
    }

    pub fn atoms(&self) -> impl Iterator<Item = &AtomId> {
        self.masses.keys()
    }

    pub fn masses(&self) -> &BTreeMap<AtomId, Mass> {
        &self.masses
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }
}

/// Enumerates a countable atomic space level by level.
///
/// `atoms(level)` must be finite, sorted, and nested in `atoms(level + 1)`.
pub trait SpaceGenerator: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Parameters the generator was built with, echoed into space files.
    fn params(&self) -> BTreeMap<String, String> {
        BTreeMap::new()
    }

    fn atoms(&self, level: u32) -> Vec<AtomId>;

    /// Declared mass, `None` when `atom` is not a point of the space.
    /// An infinite declaration is an annotation error surfaced by
    /// [`check_sigma_finite`] and by every mass lookup.
    fn mass(&self, atom: &AtomId) -> Option<ExtRational>;

    /// Named transformations shipped with the space.
    fn maps(&self) -> BTreeMap<String, Transformation>;
}

#[derive(Debug, Clone)]
pub enum MeasureSpace {
    Finite(Arc<FiniteSpace>),
    Generated(Arc<dyn SpaceGenerator>),
}

impl MeasureSpace {
    pub fn finite(space: FiniteSpace) -> Self {
        MeasureSpace::Finite(Arc::new(space))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, MeasureSpace::Finite(_))
    }

    pub fn contains(&self, atom: &AtomId) -> bool {
        match self {
            MeasureSpace::Finite(s) => s.masses.contains_key(atom),
            MeasureSpace::Generated(g) => g.mass(atom).is_some(),
        }
    }

    pub fn mass(&self, atom: &AtomId) -> Result<Rational> {
        match self {
            MeasureSpace::Finite(s) => s
                .masses
                .get(atom)
                .map(|m| m.value().clone())
                .ok_or_else(|| Error::SpaceMismatch(atom.clone())),
            MeasureSpace::Generated(g) => match g.mass(atom) {
                Some(ExtRational::Finite(m)) if !m.is_negative() => Ok(m),
                Some(ExtRational::Finite(m)) => Err(Error::Annotation(format!(
                    "generator {} declares negative mass {m} at {atom}",
                    g.name()
                ))),
                Some(ExtRational::Infinite) => Err(Error::Annotation(format!(
                    "generator {} declares infinite mass at {atom}",
                    g.name()
                ))),
                None => Err(Error::SpaceMismatch(atom.clone())),
            },
        }
    }

    pub fn is_positive(&self, atom: &AtomId) -> Result<bool> {
        Ok(!self.mass(atom)?.is_zero())
    }

    /// Finite snapshot at `level` (clamped to at least 1).
    pub fn window(&self, level: u32) -> Window {
        let level = level.max(1);
        match self {
            MeasureSpace::Finite(s) => Window {
                level,
                atoms: s.masses.keys().cloned().collect(),
                exhaustive: true,
            },
            MeasureSpace::Generated(g) => Window { level, atoms: g.atoms(level), exhaustive: false },
        }
    }

    /// Named transformations shipped with a generated space (empty for finite ones).
    pub fn generated_maps(&self) -> BTreeMap<String, Transformation> {
        match self {
            MeasureSpace::Finite(_) => BTreeMap::new(),
            MeasureSpace::Generated(g) => g.maps(),
        }
    }
}

/// A finite snapshot of a space: every atom up to `level`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Window {
    pub level: u32,
    pub atoms: Vec<AtomId>,
    /// True when the snapshot is the whole space.
    pub exhaustive: bool,
}

impl Window {
    pub fn contains(&self, atom: &AtomId) -> bool {
        self.atoms.binary_search(atom).is_ok()
    }

    /// Atoms of positive mass, in order.
    pub fn positive_atoms(&self, space: &MeasureSpace) -> Result<Vec<AtomId>> {
        let mut out = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            if space.is_positive(a)? {
                out.push(a.clone());
            }
        }
        Ok(out)
    }
}

/// Part of a preimage enumerated within a window.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Preimage {
    pub atoms: Vec<AtomId>,
    /// True when `atoms` is the whole preimage, not just its part inside the window.
    pub complete: bool,
}

impl Preimage {
    pub fn complete(atoms: Vec<AtomId>) -> Self {
        Preimage { atoms, complete: true }
    }

    pub fn partial(atoms: Vec<AtomId>) -> Self {
        Preimage { atoms, complete: false }
    }
}

/// Declared knowledge about `μ(ψ⁻¹({y}))` beyond what a window enumerates.
#[derive(Debug, Clone, PartialEq)]
pub enum TailAnnotation {
    /// The full preimage has mass `total`; a window may miss at most `gap_bound` of it.
    Exact { total: Rational, gap_bound: Rational },
    /// The full preimage contains infinitely many disjoint chunks of mass `≥ chunk_bound`;
    /// `chunks` lists those visible at the current window.
    Infinite { chunk_bound: Rational, chunks: Vec<Vec<AtomId>> },
}

/// Which "there exists c" inequality a bound certificate speaks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundQuery {
    /// `h_{φ^k} ≤ c(1 + h_{φ^n})` for `k < n`.
    PowerEqualsIterate { n: u32 },
    /// `Σ_{j<n} h_{φ^j} ≤ c(1 + h_{φ^n})` for the product of `n` copies of `φ`.
    ProductClosed { n: u32 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum BoundCertificate {
    /// A constant valid on the whole space.
    Uniform(Rational),
    /// Atoms (inside the window) along which the ratio is declared to diverge.
    Unbounded(Vec<AtomId>),
}

/// A transformation of a generated space, given by rule.
pub trait MapRule: Send + Sync + fmt::Debug {
    fn image(&self, atom: &AtomId) -> AtomId;

    /// One-step preimage, enumerated up to `level`.
    fn preimage(&self, atom: &AtomId, level: u32) -> Preimage;

    /// Annotation for `μ(φ^{-power}({atom}))`.
    fn tail(&self, _atom: &AtomId, _power: u32, _level: u32) -> Option<TailAnnotation> {
        None
    }

    fn bound_certificate(&self, _query: BoundQuery, _level: u32) -> Option<BoundCertificate> {
        None
    }
}

/// Annotations for composites that no single rule can speak for.
pub trait TailAnnotator: Send + Sync + fmt::Debug {
    fn tail(&self, atom: &AtomId, power: u32, level: u32) -> Option<TailAnnotation>;
}

/// A finite map given extensionally, with its inverse precomputed.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteMap {
    image: BTreeMap<AtomId, AtomId>,
    inverse: BTreeMap<AtomId, Vec<AtomId>>,
}

impl FiniteMap {
    pub fn new(image: BTreeMap<AtomId, AtomId>) -> Self {
        let mut inverse: BTreeMap<AtomId, Vec<AtomId>> = BTreeMap::new();
        for (x, y) in &image {
            inverse.entry(y.clone()).or_default().push(x.clone());
        }
        FiniteMap { image, inverse }
    }

    pub fn pairs(&self) -> &BTreeMap<AtomId, AtomId> {
        &self.image
    }

    /// Checks that the map is total on `space` and lands in it.
    pub fn validate(&self, space: &FiniteSpace) -> Result<()> {
        for atom in space.atoms() {
            let Some(y) = self.image.get(atom) else {
                return Err(Error::Schema(format!("map is not defined at {atom}")));
            };
            if !space.masses.contains_key(y) {
                return Err(Error::Schema(format!("map sends {atom} outside the space ({y})")));
            }
        }
        if let Some(extra) = self.image.keys().find(|a| !space.masses.contains_key(*a)) {
            return Err(Error::Schema(format!("map is defined at unknown atom {extra}")));
        }
        Ok(())
    }
}

/// The symbol φ: a total self-map of the atoms.
#[derive(Clone)]
pub enum Transformation {
    Identity,
    Finite(Arc<FiniteMap>),
    Rule { name: String, rule: Arc<dyn MapRule> },
    /// `φ^n` of a rule-based transformation.
    Power(Box<Transformation>, u32),
    /// `φ_1 ∘ φ_2 ∘ ⋯ ∘ φ_k`, i.e. `x ↦ φ_1(φ_2(⋯φ_k(x)))`.
    Composite { parts: Vec<Transformation>, annotator: Option<Arc<dyn TailAnnotator>> },
}

impl fmt::Debug for Transformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Transformation({})", self.label())
    }
}

impl Transformation {
    pub fn finite(pairs: impl IntoIterator<Item = (AtomId, AtomId)>) -> Self {
        Transformation::Finite(Arc::new(FiniteMap::new(pairs.into_iter().collect())))
    }

    pub fn rule(name: impl Into<String>, rule: impl MapRule + 'static) -> Self {
        Transformation::Rule { name: name.into(), rule: Arc::new(rule) }
    }

    pub fn label(&self) -> String {
        match self {
            Transformation::Identity => "id".to_string(),
            Transformation::Finite(_) => "finite-map".to_string(),
            Transformation::Rule { name, .. } => name.clone(),
            Transformation::Power(t, n) => format!("({})^{n}", t.label()),
            Transformation::Composite { parts, .. } => {
                parts.iter().map(|p| p.label()).collect::<Vec<_>>().join("∘")
            }
        }
    }

    /// True for maps whose preimages are always enumerated completely.
    pub fn is_finite_map(&self) -> bool {
        match self {
            Transformation::Identity | Transformation::Finite(_) => true,
            Transformation::Rule { .. } => false,
            Transformation::Power(t, _) => t.is_finite_map(),
            Transformation::Composite { parts, .. } => parts.iter().all(|p| p.is_finite_map()),
        }
    }

    pub fn image(&self, atom: &AtomId) -> AtomId {
        match self {
            Transformation::Identity => atom.clone(),
            Transformation::Finite(m) => {
                m.image.get(atom).cloned().unwrap_or_else(|| panic!("finite map undefined at {atom}"))
            }
            Transformation::Rule { rule, .. } => rule.image(atom),
            Transformation::Power(t, n) => (0..*n).fold(atom.clone(), |a, _| t.image(&a)),
            Transformation::Composite { parts, .. } => {
                parts.iter().rev().fold(atom.clone(), |a, p| p.image(&a))
            }
        }
    }

    /// One-step preimage of `atom`, enumerated up to window `level`.
    pub fn preimage(&self, atom: &AtomId, level: u32) -> Preimage {
        match self {
            Transformation::Identity => Preimage::complete(vec![atom.clone()]),
            Transformation::Finite(m) => {
                Preimage::complete(m.inverse.get(atom).cloned().unwrap_or_default())
            }
            Transformation::Rule { rule, .. } => {
                let mut p = rule.preimage(atom, level);
                p.atoms.sort();
                p
            }
            Transformation::Power(t, n) => t.preimage_power(atom, *n, level),
            Transformation::Composite { parts, .. } => {
                let mut frontier = vec![atom.clone()];
                let mut complete = true;
                for part in parts {
                    let step = Self::pull_back(part, &frontier, level);
                    complete &= step.complete;
                    frontier = step.atoms;
                }
                frontier.sort();
                Preimage { atoms: frontier, complete }
            }
        }
    }

    /// Preimage of `atom` under `self^power`, pulled back one step at a time.
    pub fn preimage_power(&self, atom: &AtomId, power: u32, level: u32) -> Preimage {
        if let Transformation::Power(t, n) = self {
            return t.preimage_power(atom, n * power, level);
        }
        let mut frontier = vec![atom.clone()];
        let mut complete = true;
        for _ in 0..power {
            let step = Self::pull_back(self, &frontier, level);
            complete &= step.complete;
            frontier = step.atoms;
            if frontier.is_empty() {
                break;
            }
        }
        frontier.sort();
        Preimage { atoms: frontier, complete }
    }

    fn pull_back(t: &Transformation, set: &[AtomId], level: u32) -> Preimage {
        let mut atoms = Vec::new();
        let mut complete = true;
        for a in set {
            let p = t.preimage(a, level);
            complete &= p.complete;
            atoms.extend(p.atoms);
        }
        Preimage { atoms, complete }
    }

    /// Annotation for `μ((self^power)⁻¹({atom}))`.
    pub fn tail(&self, atom: &AtomId, power: u32, level: u32) -> Option<TailAnnotation> {
        match self {
            Transformation::Identity | Transformation::Finite(_) => None,
            Transformation::Rule { rule, .. } => rule.tail(atom, power, level),
            Transformation::Power(t, n) => t.tail(atom, n * power, level),
            Transformation::Composite { annotator, .. } => {
                annotator.as_ref().and_then(|a| a.tail(atom, power, level))
            }
        }
    }

    pub fn bound_certificate(&self, query: BoundQuery, level: u32) -> Option<BoundCertificate> {
        match self {
            Transformation::Rule { rule, .. } => rule.bound_certificate(query, level),
            _ => None,
        }
    }

    /// `self^n`. Finite maps are composed eagerly.
    pub fn pow(&self, n: u32) -> Transformation {
        match (self, n) {
            (_, 0) | (Transformation::Identity, _) => Transformation::Identity,
            (_, 1) => self.clone(),
            (Transformation::Finite(m), _) => {
                let image = m
                    .image
                    .keys()
                    .map(|x| (x.clone(), (0..n).fold(x.clone(), |a, _| m.image[&a].clone())))
                    .collect();
                Transformation::Finite(Arc::new(FiniteMap::new(image)))
            }
            (Transformation::Power(t, k), _) => Transformation::Power(t.clone(), k * n),
            _ => Transformation::Power(Box::new(self.clone()), n),
        }
    }

    /// `parts[0] ∘ parts[1] ∘ ⋯`. Finite maps are composed eagerly.
    pub fn compose(parts: &[Transformation]) -> Transformation {
        match parts {
            [] => Transformation::Identity,
            [single] => single.clone(),
            _ if parts.iter().all(|p| matches!(p, Transformation::Finite(_) | Transformation::Identity)) => {
                let domain: Vec<AtomId> = parts
                    .iter()
                    .find_map(|p| match p {
                        Transformation::Finite(m) => Some(m.image.keys().cloned().collect()),
                        _ => None,
                    })
                    .unwrap_or_default();
                if domain.is_empty() {
                    return Transformation::Identity;
                }
                let whole = Transformation::Composite { parts: parts.to_vec(), annotator: None };
                Transformation::finite(domain.into_iter().map(|x| {
                    let y = whole.image(&x);
                    (x, y)
                }))
            }
            _ => Transformation::Composite { parts: parts.to_vec(), annotator: None },
        }
    }

    /// Attaches annotations to a composite.
    pub fn with_annotator(self, annotator: Arc<dyn TailAnnotator>) -> Transformation {
        match self {
            Transformation::Composite { parts, .. } => {
                Transformation::Composite { parts, annotator: Some(annotator) }
            }
            other => other,
        }
    }

    /// Extensional form on a finite space.
    pub fn to_pairs(&self, atoms: &[AtomId]) -> Vec<(AtomId, AtomId)> {
        atoms.iter().map(|a| (a.clone(), self.image(a))).collect()
    }
}

/// Null atoms must not pull back to sets of positive mass.
///
/// Every positive atom of the window is tested forward; every null atom of the
/// window is tested through its (possibly partial) preimage.
pub fn check_nonsingular(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Verdict> {
    let mut incomplete = false;
    for x in &window.atoms {
        if space.is_positive(x)? {
            let y = phi.image(x);
            if !space.mass(&y)?.is_positive() {
                return Ok(Verdict::Fails(Witness::NullPreimage { null_atom: y, positive_atom: x.clone() }));
            }
        } else {
            let pre = phi.preimage(x, window.level);
            for z in &pre.atoms {
                if space.is_positive(z)? {
                    return Ok(Verdict::Fails(Witness::NullPreimage {
                        null_atom: x.clone(),
                        positive_atom: z.clone(),
                    }));
                }
            }
            incomplete |= !pre.complete;
        }
    }
    if incomplete {
        return Ok(Verdict::Inconclusive(
            "a null atom has a preimage not enumerated completely".to_string(),
        ));
    }
    Ok(Verdict::holds(window.exhaustive))
}

/// Every atom mass must be finite; generators are checked on the window.
pub fn check_sigma_finite(space: &MeasureSpace, window: &Window) -> Result<Verdict> {
    match space {
        MeasureSpace::Finite(_) => Ok(Verdict::holds(true)),
        MeasureSpace::Generated(_) => {
            for a in &window.atoms {
                space.mass(a)?;
            }
            Ok(Verdict::holds(false))
        }
    }
}
