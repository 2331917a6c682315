//! Property verdicts for `C_φ`, each read off the h-values atom by atom.
//!
//! "Almost everywhere" always means "at every positive-mass atom".

use serde_json::{json, Value};

use crate::domains::densely_defined;
use crate::domains::densely_defined_power;
use crate::error::{Error, Result};
use crate::exact::ExtRational;
use crate::l2ops::{apply_adjoint, apply_cphi, norm_sq, Vector};
use crate::moments::{stieltjes_truncated, StieltjesVerdict};
use crate::radon::{h, Certainty, HValue};
use crate::space::{check_nonsingular, AtomId, MeasureSpace, Transformation, Window};
use crate::verdict::{Verdict, Witness};

fn lower_bound_note(x: &AtomId, n: u32) -> String {
    format!("h of power {n} at {x} is only a lower bound")
}

/// `C_φ` is injective iff `h_φ > 0` a.e.
pub fn injective(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Verdict> {
    let mut pending = None;
    for x in window.positive_atoms(space)? {
        let hv = h(space, phi, 1, &x, window)?;
        if hv.value.is_zero() {
            match hv.certainty {
                Certainty::Exact => return Ok(Verdict::Fails(Witness::Atom(x))),
                _ => {
                    pending.get_or_insert(lower_bound_note(&x, 1));
                }
            }
        }
    }
    Ok(match pending {
        Some(r) => Verdict::Inconclusive(r),
        None => Verdict::holds(window.exhaustive),
    })
}

/// Fails with the reason when `C_φ` is not densely defined, so callers can
/// surface `NotDenselyDefined`.
fn require_dense(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Option<Verdict>> {
    match densely_defined(space, phi, window)? {
        Verdict::Fails(w) => Err(Error::NotDenselyDefined(w.atom().cloned().unwrap_or_else(|| AtomId::bare("?")))),
        Verdict::Inconclusive(r) => Ok(Some(Verdict::Inconclusive(format!("dense definability undecided: {r}")))),
        Verdict::Holds { .. } => Ok(None),
    }
}

fn h_at_image(space: &MeasureSpace, phi: &Transformation, x: &AtomId, window: &Window) -> Result<Option<HValue>> {
    let y = phi.image(x);
    if !space.is_positive(&y)? {
        return Ok(None);
    }
    h(space, phi, 1, &y, window).map(Some)
}

/// Quasinormal iff `h_φ = h_φ ∘ φ` a.e.
pub fn quasinormal(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Verdict> {
    if let Some(v) = require_dense(space, phi, window)? {
        return Ok(v);
    }
    let mut pending = None;
    for x in window.positive_atoms(space)? {
        let left = h(space, phi, 1, &x, window)?;
        let Some(right) = h_at_image(space, phi, &x, window)? else {
            return Ok(Verdict::Inconclusive(format!("{x} is mapped to a null atom; φ is singular")));
        };
        if !left.is_certified() || !right.is_certified() {
            pending.get_or_insert(format!("h at {x} or at its image is only a lower bound"));
            continue;
        }
        if left.value != right.value {
            return Ok(Verdict::Fails(Witness::Unequal { atom: x, left: left.value, right: right.value }));
        }
    }
    Ok(match pending {
        Some(r) => Verdict::Inconclusive(r),
        None => Verdict::holds(window.exhaustive),
    })
}

/// Normal iff quasinormal and the range of `C_φ` is dense, i.e. every preimage
/// class `φ⁻¹({φ(x)})` of a positive atom holds exactly one positive atom.
pub fn normal(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Verdict> {
    let q = quasinormal(space, phi, window)?;
    if !q.is_holds() {
        return Ok(q);
    }
    let mut pending = None;
    for x in window.positive_atoms(space)? {
        let y = phi.image(&x);
        let class = phi.preimage(&y, window.level);
        let mut positives = Vec::new();
        for z in &class.atoms {
            if space.is_positive(z)? {
                positives.push(z.clone());
            }
        }
        if positives.len() > 1 {
            return Ok(Verdict::Fails(Witness::Class { image: y, positives }));
        }
        if !class.complete {
            pending.get_or_insert(format!("preimage class of {y} is not enumerated completely"));
        }
    }
    if let Some(r) = pending {
        return Ok(Verdict::Inconclusive(r));
    }
    // normal operators are injective
    if let Verdict::Fails(w) = injective(space, phi, window)? {
        return Err(Error::Internal(format!("normal verdict with nontrivial kernel: {w:?}")));
    }
    Ok(q)
}

/// Formal normality coincides with normality for composition operators.
pub fn formally_normal(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Verdict> {
    normal(space, phi, window)
}

/// `‖C_φ f‖² = ‖C_φ* f‖²`, computed directly from both operators.
pub fn formal_normality_direct(space: &MeasureSpace, phi: &Transformation, f: &Vector, window: &Window) -> Result<bool> {
    let cf = apply_cphi(space, phi, f, window)?;
    let af = apply_adjoint(space, phi, f, window)?;
    Ok(norm_sq(space, &cf)? == norm_sq(space, &af)?)
}

/// Hyponormal operators are injective; the converse is not decided here.
pub fn hyponormal_necessary(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Verdict> {
    Ok(match injective(space, phi, window)? {
        fails @ Verdict::Fails(_) => fails,
        Verdict::Holds { .. } => {
            Verdict::Inconclusive("kernel is trivial; hyponormality itself is not decided".to_string())
        }
        other => other,
    })
}

/// `h_{φⁿ⁺¹} = h_{φⁿ} · h_φ` a.e.
pub fn multiplicative_h(space: &MeasureSpace, phi: &Transformation, n: u32, window: &Window) -> Result<Verdict> {
    let mut pending = None;
    for x in window.positive_atoms(space)? {
        let next = h(space, phi, n + 1, &x, window)?;
        let cur = h(space, phi, n, &x, window)?;
        let one = h(space, phi, 1, &x, window)?;
        if !(next.is_certified() && cur.is_certified() && one.is_certified()) {
            pending.get_or_insert(format!("h at {x} is only a lower bound"));
            continue;
        }
        let Some(product) = cur.value.mul(&one.value) else {
            return Ok(Verdict::Fails(Witness::Indeterminate { atom: x }));
        };
        if next.value != product {
            return Ok(Verdict::Fails(Witness::Unequal { atom: x, left: next.value, right: product }));
        }
    }
    Ok(match pending {
        Some(r) => Verdict::Inconclusive(r),
        None => Verdict::holds(window.exhaustive),
    })
}

/// Truncated test of `(h_{φⁿ}(x))_{n ≤ order}` at every positive window atom.
pub fn generates_stieltjes(space: &MeasureSpace, phi: &Transformation, order: u32, window: &Window) -> Result<Verdict> {
    let mut pending = None;
    'atoms: for x in window.positive_atoms(space)? {
        let mut seq = Vec::with_capacity(order as usize + 1);
        for n in 0..=order {
            let hv = h(space, phi, n, &x, window)?;
            match (hv.certainty, hv.value) {
                (Certainty::CertifiedInfinite, _) => {
                    return Ok(Verdict::Fails(Witness::AtomPower { atom: x, power: n }));
                }
                (Certainty::LowerBound(_), _) => {
                    pending.get_or_insert(lower_bound_note(&x, n));
                    continue 'atoms;
                }
                (Certainty::Exact, ExtRational::Finite(v)) => seq.push(v),
                (Certainty::Exact, ExtRational::Infinite) => unreachable!("exact values are finite"),
            }
        }
        if let StieltjesVerdict::Rejected { kind, indices, det } = stieltjes_truncated(&seq) {
            return Ok(Verdict::Fails(Witness::Minor { atom: Some(x), kind, indices, det }));
        }
    }
    Ok(match pending {
        Some(r) => Verdict::Inconclusive(r),
        None => Verdict::holds(window.exhaustive),
    })
}

/// A verdict, or the reason it could not be formed.
fn settle(result: Result<Verdict>) -> Result<Verdict> {
    match result {
        Err(Error::NotDenselyDefined(x)) => {
            Ok(Verdict::Fails(Witness::Reason(format!("C_φ is not densely defined (h infinite at {x})"))))
        }
        other => other,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationReport {
    pub level: u32,
    pub order: u32,
    pub nonsingular: Verdict,
    pub densely_defined: Verdict,
    /// `(n, densely_defined_power(φ, n))` for `n = 1..=order`.
    pub dense_power: Vec<(u32, Verdict)>,
    pub injective: Verdict,
    pub quasinormal: Verdict,
    pub normal: Verdict,
    /// Decided through normality.
    pub formally_normal: Verdict,
    pub hyponormal_necessary: Verdict,
    /// `(n, multiplicative_h(φ, n))` for `n = 1..order`.
    pub multiplicative_h: Vec<(u32, Verdict)>,
    pub stieltjes: Verdict,
}

impl ClassificationReport {
    /// Named top-level verdicts, in report order.
    pub fn properties(&self) -> Vec<(&'static str, &Verdict)> {
        vec![
            ("nonsingular", &self.nonsingular),
            ("densely_defined", &self.densely_defined),
            ("injective", &self.injective),
            ("quasinormal", &self.quasinormal),
            ("normal", &self.normal),
            ("formally_normal", &self.formally_normal),
            ("hyponormal_necessary", &self.hyponormal_necessary),
            ("stieltjes", &self.stieltjes),
        ]
    }

    pub fn property(&self, name: &str) -> Option<&Verdict> {
        self.properties().into_iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    pub fn to_json(&self) -> Value {
        let w = self.level;
        let mut props = serde_json::Map::new();
        for (name, v) in self.properties() {
            props.insert(name.to_string(), v.to_json(w));
        }
        let dense: Vec<Value> = self
            .dense_power
            .iter()
            .map(|(n, v)| json!({ "n": n, "verdict": v.to_json(w) }))
            .collect();
        let mult: Vec<Value> = self
            .multiplicative_h
            .iter()
            .map(|(n, v)| json!({ "n": n, "verdict": v.to_json(w) }))
            .collect();
        json!({
            "window": w,
            "order": self.order,
            "properties": props,
            "dense_power": dense,
            "multiplicative_h": mult,
            "formally_normal_via": "normal",
        })
    }
}

/// Runs every classifier and checks the implications between them.
pub fn classify_all(space: &MeasureSpace, phi: &Transformation, window: &Window, order: u32) -> Result<ClassificationReport> {
    let order = order.max(1);
    let nonsingular = check_nonsingular(space, phi, window)?;
    let densely = densely_defined(space, phi, window)?;
    let dense_power =
        (1..=order).map(|n| Ok((n, densely_defined_power(space, phi, n, window)?))).collect::<Result<Vec<_>>>()?;
    let injective = injective(space, phi, window)?;
    let singular = nonsingular.is_fails();
    let operator_level = |v: Result<Verdict>| -> Result<Verdict> {
        if singular {
            return Ok(Verdict::Inconclusive("φ is singular, so C_φ is not well defined".to_string()));
        }
        settle(v)
    };
    let quasinormal = operator_level(quasinormal(space, phi, window))?;
    let normal = operator_level(normal(space, phi, window))?;
    let formally_normal = normal.clone();
    let hyponormal_necessary = hyponormal_necessary(space, phi, window)?;
    let multiplicative_h =
        (1..order).map(|n| Ok((n, multiplicative_h(space, phi, n, window)?))).collect::<Result<Vec<_>>>()?;
    let stieltjes = generates_stieltjes(space, phi, order, window)?;

    let report = ClassificationReport {
        level: window.level,
        order,
        nonsingular,
        densely_defined: densely,
        dense_power,
        injective,
        quasinormal,
        normal,
        formally_normal,
        hyponormal_necessary,
        multiplicative_h,
        stieltjes,
    };
    check_lattice(&report, window)?;
    Ok(report)
}

fn check_lattice(r: &ClassificationReport, window: &Window) -> Result<()> {
    let violation = |what: &str| Err(Error::Internal(format!("classification lattice violated: {what}")));
    if r.normal.is_holds() && !r.quasinormal.is_holds() {
        return violation("normal without quasinormal");
    }
    if r.normal.is_holds() && r.injective.is_fails() {
        return violation("normal with nontrivial kernel");
    }
    if r.normal != r.formally_normal {
        return violation("normal and formally normal disagree");
    }
    if r.quasinormal.is_holds() && window.exhaustive {
        if let Some((n, _)) = r.multiplicative_h.iter().find(|(_, v)| v.is_fails()) {
            return violation(&format!("quasinormal but h not multiplicative at power {n}"));
        }
        if r.stieltjes.is_fails() {
            return violation("quasinormal but a truncated Stieltjes test fails");
        }
    }
    Ok(())
}
