//! The three-valued result every classifier returns.

use serde_json::{json, Value};

use crate::exact::{format_rational, ExtRational, Rational};
use crate::space::AtomId;

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    /// `certified` is false when the property was only verified on a finite window
    /// of a countable space.
    Holds { certified: bool },
    Fails(Witness),
    Inconclusive(String),
}

impl Verdict {
    pub fn holds(certified: bool) -> Self {
        Verdict::Holds { certified }
    }

    pub fn is_holds(&self) -> bool {
        matches!(self, Verdict::Holds { .. })
    }

    pub fn is_fails(&self) -> bool {
        matches!(self, Verdict::Fails(_))
    }

    pub fn is_inconclusive(&self) -> bool {
        matches!(self, Verdict::Inconclusive(_))
    }

    pub fn witness(&self) -> Option<&Witness> {
        match self {
            Verdict::Fails(w) => Some(w),
            _ => None,
        }
    }

    pub fn status(&self) -> &'static str {
        match self {
            Verdict::Holds { .. } => "holds",
            Verdict::Fails(_) => "fails",
            Verdict::Inconclusive(_) => "inconclusive",
        }
    }

    /// A failure witness is always certified; a window-only pass is not.
    pub fn certified(&self) -> bool {
        match self {
            Verdict::Holds { certified } => *certified,
            Verdict::Fails(_) => true,
            Verdict::Inconclusive(_) => false,
        }
    }

    pub fn to_json(&self, window: u32) -> Value {
        let mut obj = json!({
            "status": self.status(),
            "window": window,
            "certified": self.certified(),
        });
        match self {
            Verdict::Fails(w) => obj["witness"] = w.to_json(),
            Verdict::Inconclusive(reason) => obj["reason"] = json!(reason),
            Verdict::Holds { .. } => {}
        }
        obj
    }
}

/// Which Hankel form a rejected minor was taken from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HankelKind {
    /// `[γ_{i+j}]`
    Plain,
    /// `[γ_{i+j+1}]`
    Shifted,
}

impl HankelKind {
    pub fn name(self) -> &'static str {
        match self {
            HankelKind::Plain => "hankel",
            HankelKind::Shifted => "shifted-hankel",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Witness {
    Atom(AtomId),
    /// `h_{φ^power}` misbehaves at `atom`.
    AtomPower { atom: AtomId, power: u32 },
    /// A null atom with a positive-mass preimage atom.
    NullPreimage { null_atom: AtomId, positive_atom: AtomId },
    /// Two sides of an identity that should agree at `atom`.
    Unequal { atom: AtomId, left: ExtRational, right: ExtRational },
    /// `∞·0` met while testing a product identity.
    Indeterminate { atom: AtomId },
    /// A preimage class holding more than one positive-mass atom.
    Class { image: AtomId, positives: Vec<AtomId> },
    /// A member of a list of transformations (prefix or summand index, 1-based).
    Member { index: usize, atom: AtomId, power: u32 },
    /// A principal minor with negative determinant.
    Minor { atom: Option<AtomId>, kind: HankelKind, indices: Vec<usize>, det: Rational },
    /// A negative value of the moment functional.
    Negative { atom: AtomId, value: Rational },
    /// A declared family along which a ratio grows without bound.
    Family { atoms: Vec<AtomId>, ratios: Vec<Rational> },
    Reason(String),
}

impl Witness {
    pub fn atom(&self) -> Option<&AtomId> {
        match self {
            Witness::Atom(a)
            | Witness::AtomPower { atom: a, .. }
            | Witness::Unequal { atom: a, .. }
            | Witness::Indeterminate { atom: a }
            | Witness::Member { atom: a, .. }
            | Witness::Negative { atom: a, .. } => Some(a),
            Witness::NullPreimage { null_atom, .. } => Some(null_atom),
            Witness::Class { image, .. } => Some(image),
            Witness::Minor { atom, .. } => atom.as_ref(),
            Witness::Family { atoms, .. } => atoms.first(),
            Witness::Reason(_) => None,
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            Witness::Atom(a) => json!({ "kind": "atom", "atom": a.to_string() }),
            Witness::AtomPower { atom, power } => {
                json!({ "kind": "atom-power", "atom": atom.to_string(), "power": power })
            }
            Witness::NullPreimage { null_atom, positive_atom } => json!({
                "kind": "null-preimage",
                "null_atom": null_atom.to_string(),
                "positive_atom": positive_atom.to_string(),
            }),
            Witness::Unequal { atom, left, right } => json!({
                "kind": "unequal",
                "atom": atom.to_string(),
                "left": left.to_string(),
                "right": right.to_string(),
            }),
            Witness::Indeterminate { atom } => {
                json!({ "kind": "indeterminate", "atom": atom.to_string() })
            }
            Witness::Class { image, positives } => json!({
                "kind": "class",
                "image": image.to_string(),
                "positives": positives.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
            }),
            Witness::Member { index, atom, power } => json!({
                "kind": "member",
                "index": index,
                "atom": atom.to_string(),
                "power": power,
            }),
            Witness::Minor { atom, kind, indices, det } => json!({
                "kind": "minor",
                "atom": atom.as_ref().map(|a| a.to_string()),
                "form": kind.name(),
                "indices": indices,
                "det": format_rational(det),
            }),
            Witness::Negative { atom, value } => json!({
                "kind": "negative",
                "atom": atom.to_string(),
                "value": format_rational(value),
            }),
            Witness::Family { atoms, ratios } => json!({
                "kind": "family",
                "atoms": atoms.iter().map(|a| a.to_string()).collect::<Vec<_>>(),
                "ratios": ratios.iter().map(format_rational).collect::<Vec<_>>(),
            }),
            Witness::Reason(r) => json!({ "kind": "reason", "reason": r }),
        }
    }
}
