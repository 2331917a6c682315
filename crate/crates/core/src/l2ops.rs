//! Finitely supported vectors in `L²(μ)` and the operators built from `C_φ`.
//!
//! Values at null atoms are allowed but are `L²`-invisible: equality and norms
//! ignore them.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num_bigint::BigUint;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{abs_sq, format_complex, is_complex_zero, real, sqrt_canonical, ComplexRational, ExtRational, Rational};
use crate::radon::{h, Certainty};
use crate::space::{AtomId, MeasureSpace, Transformation, Window};
use crate::verdict::{Verdict, Witness};

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Vector {
    entries: BTreeMap<AtomId, ComplexRational>,
}

impl Vector {
    pub fn zero() -> Self {
        Vector::default()
    }

    /// `χ_{atom}`
    pub fn indicator(atom: AtomId) -> Self {
        Vector::from_entries([(atom, real(Rational::one()))])
    }

    /// Drops explicit zeros.
    pub fn from_entries(entries: impl IntoIterator<Item = (AtomId, ComplexRational)>) -> Self {
        let mut v = Vector::zero();
        for (a, z) in entries {
            v.add_at(a, z);
        }
        v
    }

    pub fn get(&self, atom: &AtomId) -> ComplexRational {
        self.entries.get(atom).cloned().unwrap_or_else(crate::exact::complex_zero)
    }

    pub fn add_at(&mut self, atom: AtomId, z: ComplexRational) {
        let slot = self.entries.entry(atom.clone()).or_insert_with(crate::exact::complex_zero);
        *slot = &*slot + z;
        if is_complex_zero(slot) {
            self.entries.remove(&atom);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AtomId, &ComplexRational)> {
        self.entries.iter()
    }

    pub fn support(&self) -> impl Iterator<Item = &AtomId> {
        self.entries.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scale(&self, c: &ComplexRational) -> Vector {
        Vector::from_entries(self.entries.iter().map(|(a, z)| (a.clone(), z * c)))
    }

    /// Entries as `atom → "re+imi"` strings.
    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> =
            self.entries.iter().map(|(a, z)| (a.to_string(), json!(format_complex(z)))).collect();
        Value::Object(map)
    }

    /// Parses `{"atom": "p/q" | "re+imi" | number}`.
    pub fn from_json(value: &Value) -> Result<Vector> {
        let obj = value.as_object().ok_or_else(|| Error::Parse("vector must be a JSON object".into()))?;
        let mut v = Vector::zero();
        for (k, val) in obj {
            let atom: AtomId = k.parse()?;
            let z = match val {
                Value::String(s) => crate::exact::parse_complex(s)?,
                Value::Number(n) if n.is_i64() => real(Rational::from_integer(n.as_i64().unwrap_or(0).into())),
                other => return Err(Error::Parse(format!("vector entry {other} is not an exact value"))),
            };
            v.add_at(atom, z);
        }
        Ok(v)
    }
}

impl Add for &Vector {
    type Output = Vector;
    fn add(self, rhs: &Vector) -> Vector {
        let mut out = self.clone();
        for (a, z) in &rhs.entries {
            out.add_at(a.clone(), z.clone());
        }
        out
    }
}

impl Neg for &Vector {
    type Output = Vector;
    fn neg(self) -> Vector {
        Vector::from_entries(self.entries.iter().map(|(a, z)| (a.clone(), -z.clone())))
    }
}

impl Sub for &Vector {
    type Output = Vector;
    fn sub(self, rhs: &Vector) -> Vector {
        self + &(-rhs)
    }
}

/// `⟨f, g⟩ = Σ f(x)·conj(g(x))·μ({x})`
pub fn inner(space: &MeasureSpace, f: &Vector, g: &Vector) -> Result<ComplexRational> {
    let mut acc = crate::exact::complex_zero();
    for (a, fa) in &f.entries {
        let mass = space.mass(a)?;
        if let Some(ga) = g.entries.get(a) {
            acc += fa * ga.conj() * real(mass);
        }
    }
    for a in g.entries.keys() {
        space.mass(a)?;
    }
    Ok(acc)
}

pub fn norm_sq(space: &MeasureSpace, f: &Vector) -> Result<Rational> {
    let mut acc = Rational::zero();
    for (a, z) in &f.entries {
        acc += abs_sq(z) * space.mass(a)?;
    }
    Ok(acc)
}

/// Equality in `L²(μ)`: values on null atoms are ignored.
pub fn l2_eq(space: &MeasureSpace, f: &Vector, g: &Vector) -> Result<bool> {
    Ok(norm_sq(space, &(f - g))?.is_zero())
}

/// `‖C_φ f‖² = Σ_y |f(y)|² h_φ(y) μ({y})`, computed through the h-engine.
/// `None` when some needed value is only a lower bound.
pub fn transport_norm_sq(space: &MeasureSpace, phi: &Transformation, f: &Vector, window: &Window) -> Result<Option<ExtRational>> {
    let mut acc = ExtRational::zero();
    for (y, z) in &f.entries {
        let mass = space.mass(y)?;
        if mass.is_zero() {
            continue;
        }
        let hv = h(space, phi, 1, y, window)?;
        if !hv.is_certified() {
            return Ok(None);
        }
        let term = match &hv.value {
            ExtRational::Finite(v) => ExtRational::Finite(abs_sq(z) * v * mass),
            ExtRational::Infinite => ExtRational::Infinite,
        };
        acc = acc.add(&term);
    }
    Ok(Some(acc))
}

/// `(C_φ f)(x) = f(φ(x))`.
///
/// The image is supported on `φ⁻¹(supp f)`, which must be enumerated completely.
pub fn apply_cphi(space: &MeasureSpace, phi: &Transformation, f: &Vector, window: &Window) -> Result<Vector> {
    let mut out = Vector::zero();
    for (y, z) in &f.entries {
        space.mass(y)?;
        let pre = phi.preimage(y, window.level);
        if !pre.complete {
            let norm_sq = transport_norm_sq(space, phi, f, window)?;
            if norm_sq == Some(ExtRational::Infinite) {
                let bad = infinite_atom(space, phi, f, window)?.unwrap_or_else(|| y.clone());
                return Err(Error::NotInDomain(bad));
            }
            return Err(Error::IncompletePreimage { atom: y.clone(), level: window.level, norm_sq });
        }
        for x in pre.atoms {
            out.add_at(x, z.clone());
        }
    }
    Ok(out)
}

fn infinite_atom(space: &MeasureSpace, phi: &Transformation, f: &Vector, window: &Window) -> Result<Option<AtomId>> {
    for y in f.entries.keys() {
        if space.is_positive(y)? && h(space, phi, 1, y, window)?.is_infinite() {
            return Ok(Some(y.clone()));
        }
    }
    Ok(None)
}

/// Requires `h_φ(y)` exact at each positive `y` hit by `φ(supp g)`.
fn check_adjoint_target(space: &MeasureSpace, phi: &Transformation, y: &AtomId, window: &Window) -> Result<bool> {
    if !space.is_positive(y)? {
        return Ok(false);
    }
    let hv = h(space, phi, 1, y, window)?;
    match hv.certainty {
        Certainty::Exact => Ok(true),
        Certainty::CertifiedInfinite => Err(Error::NotInAdjointDomain(y.clone())),
        Certainty::LowerBound(level) => Err(Error::IncompletePreimage { atom: y.clone(), level, norm_sq: None }),
    }
}

/// `(C_φ* g)(y) = μ({y})⁻¹ Σ_{x ∈ φ⁻¹({y})} g(x) μ({x})` on positive atoms `y`.
pub fn apply_adjoint(space: &MeasureSpace, phi: &Transformation, g: &Vector, window: &Window) -> Result<Vector> {
    let mut sums: BTreeMap<AtomId, ComplexRational> = BTreeMap::new();
    for (x, z) in &g.entries {
        let mass = space.mass(x)?;
        let y = phi.image(x);
        let slot = sums.entry(y).or_insert_with(crate::exact::complex_zero);
        *slot = &*slot + z * real(mass);
    }
    let mut out = Vector::zero();
    for (y, s) in sums {
        if check_adjoint_target(space, phi, &y, window)? {
            let inv = real(space.mass(&y)?.recip());
            out.add_at(y, s * inv);
        }
    }
    Ok(out)
}

/// `E(g | φ⁻¹(𝒜))`: averages `g` over each preimage class `φ⁻¹({φ(x)})`.
///
/// Classes of total mass zero get the value 0.
pub fn conditional_expectation(space: &MeasureSpace, phi: &Transformation, g: &Vector, window: &Window) -> Result<Vector> {
    let images: std::collections::BTreeSet<AtomId> = g.entries.keys().map(|x| phi.image(x)).collect();
    let mut out = Vector::zero();
    for y in images {
        let class = phi.preimage(&y, window.level);
        if !class.complete {
            return Err(Error::IncompleteClass(y));
        }
        let mut total = Rational::zero();
        let mut weighted = crate::exact::complex_zero();
        for z in &class.atoms {
            let m = space.mass(z)?;
            weighted += g.get(z) * real(m.clone());
            total += m;
        }
        if total.is_zero() {
            continue;
        }
        let avg = weighted * real(total.recip());
        for z in class.atoms {
            out.add_at(z, avg.clone());
        }
    }
    Ok(out)
}

/// Positive-mass atoms whose `h_φ` is certified zero, plus those where the window
/// only shows a zero lower bound.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct KernelAtoms {
    pub certified: Vec<AtomId>,
    pub undecided: Vec<AtomId>,
}

/// Atoms of `N_φ = {h_φ = 0}`; `ker C_φ` is the span of their indicators.
pub fn kernel_atoms(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<KernelAtoms> {
    let mut out = KernelAtoms::default();
    for x in window.positive_atoms(space)? {
        let hv = h(space, phi, 1, &x, window)?;
        if hv.value.is_zero() {
            match hv.certainty {
                Certainty::Exact => out.certified.push(x),
                _ => out.undecided.push(x),
            }
        }
    }
    Ok(out)
}

/// Whether `g` lies in the closure of the range of `C_φ`, i.e. `E(g) = g`.
pub fn range_membership(space: &MeasureSpace, phi: &Transformation, g: &Vector, window: &Window) -> Result<Verdict> {
    let e = match conditional_expectation(space, phi, g, window) {
        Ok(e) => e,
        Err(Error::IncompleteClass(y)) => {
            return Ok(Verdict::Inconclusive(format!("preimage class of {y} is not enumerated completely")))
        }
        Err(other) => return Err(other),
    };
    let diff = &e - g;
    for (a, z) in diff.iter() {
        if space.is_positive(a)? && !is_complex_zero(z) {
            return Ok(Verdict::Fails(Witness::Atom(a.clone())));
        }
    }
    Ok(Verdict::holds(true))
}

/// A vector whose value at `x` is `coef · √radicand`.
#[derive(Debug, Clone, Default)]
pub struct SqrtVector {
    entries: BTreeMap<AtomId, (ComplexRational, Rational)>,
}

impl SqrtVector {
    pub fn zero() -> Self {
        SqrtVector::default()
    }

    pub fn insert(&mut self, atom: AtomId, coef: ComplexRational, radicand: Rational) {
        assert!(!radicand.is_negative(), "negative radicand");
        if is_complex_zero(&coef) || radicand.is_zero() {
            self.entries.remove(&atom);
        } else {
            self.entries.insert(atom, (coef, radicand));
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&AtomId, &(ComplexRational, Rational))> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn norm_sq(&self, space: &MeasureSpace) -> Result<Rational> {
        let mut acc = Rational::zero();
        for (a, (c, r)) in &self.entries {
            acc += abs_sq(c) * r * space.mass(a)?;
        }
        Ok(acc)
    }

    /// Each entry rewritten as `c·√t` with `t` a squarefree integer; null atoms dropped.
    pub fn canonical(&self, space: &MeasureSpace) -> Result<BTreeMap<AtomId, (ComplexRational, BigUint)>> {
        let mut out = BTreeMap::new();
        for (a, (c, r)) in &self.entries {
            if !space.is_positive(a)? {
                continue;
            }
            let (s, t) = sqrt_canonical(r);
            out.insert(a.clone(), (c * real(s), t));
        }
        Ok(out)
    }

    /// Equality in `L²(μ)` of the represented real-algebraic values.
    pub fn l2_eq(&self, other: &SqrtVector, space: &MeasureSpace) -> Result<bool> {
        Ok(self.canonical(space)? == other.canonical(space)?)
    }

    /// Back to a rational vector when every radicand is a perfect square.
    pub fn to_vector(&self) -> Option<Vector> {
        let mut v = Vector::zero();
        for (a, (c, r)) in &self.entries {
            let (s, t) = sqrt_canonical(r);
            if !t.is_one() {
                return None;
            }
            v.add_at(a.clone(), c * real(s));
        }
        Some(v)
    }

    pub fn to_json(&self) -> Value {
        let map: serde_json::Map<String, Value> = self
            .entries
            .iter()
            .map(|(a, (c, r))| {
                let (s, t) = sqrt_canonical(r);
                (
                    a.to_string(),
                    json!({ "coefficient": format_complex(&(c * real(s))), "radicand": t.to_string() }),
                )
            })
            .collect();
        Value::Object(map)
    }
}

impl From<&Vector> for SqrtVector {
    fn from(v: &Vector) -> Self {
        let mut out = SqrtVector::zero();
        for (a, z) in v.iter() {
            out.insert(a.clone(), z.clone(), Rational::one());
        }
        out
    }
}

fn exact_h(space: &MeasureSpace, phi: &Transformation, y: &AtomId, window: &Window, on_missing: impl Fn(AtomId, u32) -> Error) -> Result<Rational> {
    let hv = h(space, phi, 1, y, window)?;
    match hv.certainty {
        Certainty::Exact => Ok(hv.value.finite().cloned().unwrap_or_default()),
        Certainty::CertifiedInfinite => Err(Error::NotInDomain(y.clone())),
        Certainty::LowerBound(level) => Err(on_missing(y.clone(), level)),
    }
}

/// `|C_φ| f = h_φ^{1/2} · f`.
pub fn apply_modulus(space: &MeasureSpace, phi: &Transformation, f: &Vector, window: &Window) -> Result<SqrtVector> {
    let mut out = SqrtVector::zero();
    for (x, z) in f.iter() {
        if !space.is_positive(x)? {
            continue;
        }
        let hx = exact_h(space, phi, x, window, |atom, level| Error::IncompletePreimage { atom, level, norm_sq: None })?;
        out.insert(x.clone(), z.clone(), hx);
    }
    Ok(out)
}

/// `(U s)(x) = s(φ(x)) / √(h_φ(φ(x)))`, zero on `N_φ`.
pub fn apply_u_sqrt(space: &MeasureSpace, phi: &Transformation, s: &SqrtVector, window: &Window) -> Result<SqrtVector> {
    let mut out = SqrtVector::zero();
    for (y, (c, r)) in s.iter() {
        if !space.is_positive(y)? {
            continue;
        }
        let hy = exact_h(space, phi, y, window, |atom, _| Error::NotCertified(atom))?;
        if hy.is_zero() {
            continue;
        }
        let pre = phi.preimage(y, window.level);
        if !pre.complete {
            return Err(Error::NotCertified(y.clone()));
        }
        for x in pre.atoms {
            out.insert(x, c.clone(), r / &hy);
        }
    }
    Ok(out)
}

/// The partial isometry of the polar decomposition `C_φ = U|C_φ|`.
pub fn apply_u(space: &MeasureSpace, phi: &Transformation, g: &Vector, window: &Window) -> Result<SqrtVector> {
    apply_u_sqrt(space, phi, &SqrtVector::from(g), window)
}

/// `U* g = h_φ^{-1/2} · C_φ* g`, zero on `N_φ`.
pub fn apply_u_star(space: &MeasureSpace, phi: &Transformation, g: &Vector, window: &Window) -> Result<SqrtVector> {
    let adj = apply_adjoint(space, phi, g, window).map_err(|e| match e {
        Error::IncompletePreimage { atom, .. } => Error::NotCertified(atom),
        other => other,
    })?;
    let mut out = SqrtVector::zero();
    for (y, z) in adj.iter() {
        let hy = exact_h(space, phi, y, window, |atom, _| Error::NotCertified(atom))?;
        if hy.is_zero() {
            continue;
        }
        // C*g/√h = (C*g/h)·√h
        out.insert(y.clone(), z * real(hy.recip()), hy);
    }
    Ok(out)
}
