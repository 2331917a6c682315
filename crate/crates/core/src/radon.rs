//! Radon–Nikodym data `h_{φⁿ}(y) = μ(φ⁻ⁿ({y})) / μ({y})` on positive-mass atoms.
//!
//! Each value carries how much of it the window actually proves. Partial sums
//! over an incomplete preimage are lower bounds unless the map's tail annotation
//! closes the gap, and divergence is only ever reported on a declared certificate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{ExtRational, Rational};
use crate::space::{AtomId, MeasureSpace, TailAnnotation, Transformation, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certainty {
    Exact,
    /// Partial sum over the preimage enumerated at this window level.
    LowerBound(u32),
    CertifiedInfinite,
}

impl Certainty {
    pub fn name(self) -> &'static str {
        match self {
            Certainty::Exact => "exact",
            Certainty::LowerBound(_) => "lower-bound",
            Certainty::CertifiedInfinite => "certified-infinite",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HValue {
    pub value: ExtRational,
    pub certainty: Certainty,
}

impl HValue {
    pub fn exact(value: Rational) -> Self {
        HValue { value: ExtRational::Finite(value), certainty: Certainty::Exact }
    }

    pub fn infinite() -> Self {
        HValue { value: ExtRational::Infinite, certainty: Certainty::CertifiedInfinite }
    }

    pub fn lower_bound(value: Rational, level: u32) -> Self {
        HValue { value: ExtRational::Finite(value), certainty: Certainty::LowerBound(level) }
    }

    /// True for `Exact` and `CertifiedInfinite`.
    pub fn is_certified(&self) -> bool {
        !matches!(self.certainty, Certainty::LowerBound(_))
    }

    pub fn is_infinite(&self) -> bool {
        self.certainty == Certainty::CertifiedInfinite
    }

    /// The exact finite value, if certified finite.
    pub fn exact_value(&self) -> Option<&Rational> {
        match self.certainty {
            Certainty::Exact => self.value.finite(),
            _ => None,
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "value": self.value.to_string(), "certainty": self.certainty.name() })
    }
}

impl fmt::Display for HValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.certainty {
            Certainty::LowerBound(level) => write!(f, "≥{} (window {level})", self.value),
            _ => write!(f, "{}", self.value),
        }
    }
}

/// `φⁿ`, with `φ⁰` the identity.
pub fn iterate(phi: &Transformation, n: u32) -> Transformation {
    phi.pow(n)
}

/// `μ(φ⁻ⁿ({y}))` as certified by the window, before division by `μ({y})`.
pub fn preimage_mass(space: &MeasureSpace, phi: &Transformation, n: u32, y: &AtomId, window: &Window) -> Result<HValue> {
    if n == 0 {
        return Ok(HValue::exact(space.mass(y)?));
    }
    let level = window.level;
    let pre = phi.preimage_power(y, n, level);
    let mut partial = Rational::zero();
    for x in &pre.atoms {
        partial += space.mass(x)?;
    }
    if pre.complete {
        return Ok(HValue::exact(partial));
    }
    match phi.tail(y, n, level) {
        None => Ok(HValue::lower_bound(partial, level)),
        Some(TailAnnotation::Exact { total, gap_bound }) => {
            if partial > total {
                return Err(Error::Annotation(format!(
                    "partial preimage mass {partial} of {y} under power {n} exceeds the declared total {total}"
                )));
            }
            if &total - &partial > gap_bound {
                return Err(Error::Annotation(format!(
                    "declared total {total} for {y} under power {n} is {} above the window-{level} partial sum, more than the declared gap {gap_bound}",
                    &total - &partial
                )));
            }
            Ok(HValue::exact(total))
        }
        Some(TailAnnotation::Infinite { chunk_bound, chunks }) => {
            validate_chunks(space, &pre.atoms, y, n, &chunk_bound, &chunks)?;
            Ok(HValue::infinite())
        }
    }
}

fn validate_chunks(
    space: &MeasureSpace,
    enumerated: &[AtomId],
    y: &AtomId,
    n: u32,
    bound: &Rational,
    chunks: &[Vec<AtomId>],
) -> Result<()> {
    let fail = |msg: String| Err(Error::Annotation(format!("infinite-tail certificate for {y} under power {n}: {msg}")));
    if !bound.is_positive() {
        return fail(format!("chunk bound {bound} is not positive"));
    }
    if chunks.is_empty() {
        return fail("no chunk is visible in the window".to_string());
    }
    let enumerated: BTreeSet<&AtomId> = enumerated.iter().collect();
    let mut seen = BTreeSet::new();
    for chunk in chunks {
        let mut mass = Rational::zero();
        for a in chunk {
            if !enumerated.contains(a) {
                return fail(format!("{a} is not in the enumerated preimage"));
            }
            if !seen.insert(a) {
                return fail(format!("chunks overlap at {a}"));
            }
            mass += space.mass(a)?;
        }
        if &mass < bound {
            return fail(format!("a chunk has mass {mass} below the declared bound {bound}"));
        }
    }
    Ok(())
}

/// `h_{φⁿ}(y)`; refuses null atoms.
pub fn h(space: &MeasureSpace, phi: &Transformation, n: u32, y: &AtomId, window: &Window) -> Result<HValue> {
    let mass = space.mass(y)?;
    if mass.is_zero() {
        return Err(Error::NullAtom(y.clone()));
    }
    if n == 0 {
        return Ok(HValue::exact(Rational::one()));
    }
    let pm = preimage_mass(space, phi, n, y, window)?;
    Ok(match pm.value {
        ExtRational::Finite(v) => HValue { value: ExtRational::Finite(v / mass), certainty: pm.certainty },
        ExtRational::Infinite => pm,
    })
}

/// `h_{φⁿ}` for `n = 0..=max_power` on every positive atom of a window.
#[derive(Debug, Clone, PartialEq)]
pub struct HTable {
    pub level: u32,
    pub max_power: u32,
    pub rows: BTreeMap<AtomId, Vec<HValue>>,
}

impl HTable {
    pub fn get(&self, atom: &AtomId, n: u32) -> Option<&HValue> {
        self.rows.get(atom).and_then(|r| r.get(n as usize))
    }

    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|(a, hs)| {
                json!({
                    "atom": a.to_string(),
                    "h": hs.iter().map(HValue::to_json).collect::<Vec<_>>(),
                })
            })
            .collect();
        json!({ "window": self.level, "max_power": self.max_power, "rows": rows })
    }
}

pub fn h_table(space: &MeasureSpace, phi: &Transformation, max_power: u32, window: &Window) -> Result<HTable> {
    let atoms = window.positive_atoms(space)?;
    let rows = atoms
        .par_iter()
        .map(|a| {
            let row = (0..=max_power).map(|n| h(space, phi, n, a, window)).collect::<Result<Vec<_>>>()?;
            Ok((a.clone(), row))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(HTable { level: window.level, max_power, rows: rows.into_iter().collect() })
}
