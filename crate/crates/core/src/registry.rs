//! Shipped example spaces, the seeded random-space generator and counterexample search.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::classify::{classify_all, formal_normality_direct, quasinormal};
use crate::domains::{
    densely_defined, densely_defined_power, densely_defined_product, in_domain_iterate, in_domain_power,
    power_equals_iterate, product_closed,
};
use crate::error::{Error, Result};
use crate::exact::{int, parse_rational, pow, ExtRational, Rational};
use crate::l2ops::Vector;
use crate::radon::{h, HValue};
use crate::space::{
    check_nonsingular, AtomId, BoundCertificate, BoundQuery, FiniteSpace, Mass, MapRule, MeasureSpace, Preimage,
    SpaceGenerator, TailAnnotation, TailAnnotator, Transformation,
};
use crate::verdict::Verdict;

pub type Params = BTreeMap<String, String>;

fn half_pow(k: u64) -> Rational {
    Rational::new(BigInt::one(), BigInt::from(2u32).pow(k as u32))
}

fn param<T: std::str::FromStr>(params: &Params, key: &str, default: T) -> Result<T> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v.parse().map_err(|_| Error::Schema(format!("parameter {key}={v:?} is malformed"))),
    }
}

fn reject_unknown(params: &Params, known: &[&str]) -> Result<()> {
    match params.keys().find(|k| !known.contains(&k.as_str())) {
        Some(k) => Err(Error::Schema(format!("unknown parameter {k:?}"))),
        None => Ok(()),
    }
}

fn single(atom: &AtomId, family: &str) -> Option<u64> {
    (atom.family == family && atom.indices.len() == 1).then(|| atom.indices[0])
}

// ---------------------------------------------------------------------------
// a_i, b_i, c_{i,j}

/// Families `a_i` (mass 1), `b_i` (mass `2^{-(i+1)}`), `c_{i,j}` (mass `2^{-(j+1)}`)
/// with `a_i ↦ a_{i+1}`, `b_i ↦ a_0`, `c_{i,j} ↦ b_i`. Window `L` holds indices `< L`.
#[derive(Debug, Clone)]
pub struct ThreeFamilies {
    /// Declared `Σ_i μ(b_i)`; the true value is 1.
    b_total: Rational,
}

impl ThreeFamilies {
    pub fn new(params: &Params) -> Result<Self> {
        reject_unknown(params, &["b_total"])?;
        let b_total = match params.get("b_total") {
            Some(v) => parse_rational(v)?,
            None => Rational::one(),
        };
        Ok(ThreeFamilies { b_total })
    }
}

impl SpaceGenerator for ThreeFamilies {
    fn name(&self) -> &str {
        "three-families"
    }

    fn params(&self) -> Params {
        if self.b_total.is_one() {
            Params::new()
        } else {
            Params::from([("b_total".to_string(), self.b_total.to_string())])
        }
    }

    fn atoms(&self, level: u32) -> Vec<AtomId> {
        let l = u64::from(level);
        let mut out: Vec<AtomId> = (0..l).map(|i| AtomId::indexed("a", i)).collect();
        out.extend((0..l).map(|i| AtomId::indexed("b", i)));
        out.extend((0..l).flat_map(|i| (0..l).map(move |j| AtomId::new("c", vec![i, j]))));
        out
    }

    fn mass(&self, atom: &AtomId) -> Option<ExtRational> {
        let m = match (atom.family.as_str(), atom.indices.as_slice()) {
            ("a", [_]) => Rational::one(),
            ("b", [i]) => half_pow(i + 1),
            ("c", [_, j]) => half_pow(j + 1),
            _ => return None,
        };
        Some(ExtRational::Finite(m))
    }

    fn maps(&self) -> BTreeMap<String, Transformation> {
        BTreeMap::from([("phi".to_string(), Transformation::rule("phi", self.clone()))])
    }
}

impl MapRule for ThreeFamilies {
    fn image(&self, atom: &AtomId) -> AtomId {
        match (atom.family.as_str(), atom.indices.as_slice()) {
            ("a", [i]) => AtomId::indexed("a", i + 1),
            ("b", [_]) => AtomId::indexed("a", 0),
            ("c", [i, _]) => AtomId::indexed("b", *i),
            _ => panic!("{atom} is not a point of this space"),
        }
    }

    fn preimage(&self, atom: &AtomId, level: u32) -> Preimage {
        let l = u64::from(level);
        match (atom.family.as_str(), atom.indices.as_slice()) {
            ("a", [0]) => Preimage::partial((0..l).map(|i| AtomId::indexed("b", i)).collect()),
            ("a", [k]) => Preimage::complete(vec![AtomId::indexed("a", k - 1)]),
            ("b", [i]) => Preimage::partial((0..l).map(|j| AtomId::new("c", vec![*i, j])).collect()),
            _ => Preimage::complete(Vec::new()),
        }
    }

    fn tail(&self, atom: &AtomId, power: u32, level: u32) -> Option<TailAnnotation> {
        let l = u64::from(level);
        let p = u64::from(power);
        let gap = half_pow(l);
        let empty = TailAnnotation::Exact { total: Rational::zero(), gap_bound: Rational::zero() };
        match (atom.family.as_str(), atom.indices.as_slice()) {
            ("a", [k]) if p == k + 1 => Some(TailAnnotation::Exact { total: self.b_total.clone(), gap_bound: gap }),
            ("a", [k]) if p == k + 2 => Some(TailAnnotation::Infinite {
                chunk_bound: Rational::new(1.into(), 2.into()),
                chunks: (0..l).map(|i| (0..l).map(|j| AtomId::new("c", vec![i, j])).collect()).collect(),
            }),
            ("a", [k]) if p >= k + 3 => Some(empty),
            ("b", [_]) if p == 1 => Some(TailAnnotation::Exact { total: Rational::one(), gap_bound: gap }),
            ("b", [_]) if p >= 2 => Some(empty),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// counting measure on ℤ₊

fn counting_atoms(level: u32) -> Vec<AtomId> {
    (0..u64::from(level)).map(|i| AtomId::indexed("n", i)).collect()
}

fn counting_mass(atom: &AtomId) -> Option<ExtRational> {
    single(atom, "n").map(|_| ExtRational::Finite(Rational::one()))
}

fn n(i: u64) -> AtomId {
    AtomId::indexed("n", i)
}

/// `φ₁(2n) = n`, `φ₁(2n+1) = 0` on ℤ₊.
#[derive(Debug, Clone)]
struct HalveOrCollapse;

impl MapRule for HalveOrCollapse {
    fn image(&self, atom: &AtomId) -> AtomId {
        let i = single(atom, "n").expect("atom of ℤ₊");
        n(if i.is_multiple_of(2) { i / 2 } else { 0 })
    }

    fn preimage(&self, atom: &AtomId, level: u32) -> Preimage {
        let i = single(atom, "n").expect("atom of ℤ₊");
        if i == 0 {
            let mut atoms = vec![n(0)];
            atoms.extend((0..u64::from(level)).filter(|k| k % 2 == 1).map(n));
            Preimage::partial(atoms)
        } else {
            Preimage::complete(vec![n(2 * i)])
        }
    }

    fn tail(&self, atom: &AtomId, power: u32, level: u32) -> Option<TailAnnotation> {
        // every odd number reaches 0 and stays there
        (single(atom, "n") == Some(0) && power >= 1).then(|| TailAnnotation::Infinite {
            chunk_bound: Rational::one(),
            chunks: (0..u64::from(level)).filter(|k| k % 2 == 1).map(|k| vec![n(k)]).collect(),
        })
    }
}

/// `φ₂(n) = 2n` on ℤ₊.
#[derive(Debug, Clone)]
struct Double;

impl MapRule for Double {
    fn image(&self, atom: &AtomId) -> AtomId {
        n(2 * single(atom, "n").expect("atom of ℤ₊"))
    }

    fn preimage(&self, atom: &AtomId, _level: u32) -> Preimage {
        let i = single(atom, "n").expect("atom of ℤ₊");
        Preimage::complete(if i.is_multiple_of(2) { vec![n(i / 2)] } else { Vec::new() })
    }
}

/// `φ₁ ∘ φ₂` is the identity, so every preimage has the mass of its point.
#[derive(Debug)]
struct IdentityComposite;

impl TailAnnotator for IdentityComposite {
    fn tail(&self, _atom: &AtomId, _power: u32, _level: u32) -> Option<TailAnnotation> {
        Some(TailAnnotation::Exact { total: Rational::one(), gap_bound: Rational::zero() })
    }
}

#[derive(Debug, Clone)]
pub struct IdentityProduct;

impl SpaceGenerator for IdentityProduct {
    fn name(&self) -> &str {
        "identity-product"
    }

    fn atoms(&self, level: u32) -> Vec<AtomId> {
        counting_atoms(level)
    }

    fn mass(&self, atom: &AtomId) -> Option<ExtRational> {
        counting_mass(atom)
    }

    fn maps(&self) -> BTreeMap<String, Transformation> {
        let phi1 = Transformation::rule("phi1", HalveOrCollapse);
        let phi2 = Transformation::rule("phi2", Double);
        let both = Transformation::compose(&[phi1.clone(), phi2.clone()]).with_annotator(Arc::new(IdentityComposite));
        BTreeMap::from([("phi1".to_string(), phi1), ("phi2".to_string(), phi2), ("phi1∘phi2".to_string(), both)])
    }
}

/// `φ(n) = ⌊n/2⌋` on ℤ₊: every point has exactly two preimages.
#[derive(Debug, Clone)]
pub struct BinaryParent;

impl MapRule for BinaryParent {
    fn image(&self, atom: &AtomId) -> AtomId {
        n(single(atom, "n").expect("atom of ℤ₊") / 2)
    }

    fn preimage(&self, atom: &AtomId, _level: u32) -> Preimage {
        let i = single(atom, "n").expect("atom of ℤ₊");
        Preimage::complete(vec![n(2 * i), n(2 * i + 1)])
    }
}

impl SpaceGenerator for BinaryParent {
    fn name(&self) -> &str {
        "binary-parent"
    }

    fn atoms(&self, level: u32) -> Vec<AtomId> {
        counting_atoms(level)
    }

    fn mass(&self, atom: &AtomId) -> Option<ExtRational> {
        counting_mass(atom)
    }

    fn maps(&self) -> BTreeMap<String, Transformation> {
        BTreeMap::from([("phi".to_string(), Transformation::rule("phi", BinaryParent))])
    }
}

// ---------------------------------------------------------------------------
// partition of ℕ into blocks J_k

/// Cardinalities of the blocks `J_{q^{2^m}}`, `q` not a square.
#[derive(Debug, Clone, PartialEq)]
pub enum Regime {
    /// `card J_{q^{2^m}} = κ^m`: every power of `C_φ` is closed.
    Closed { kappa: u64 },
    /// `card J_q` grows with `q` while `card J_{q^{2^m}} = 1` for `m ≥ 1`: no power `≥ 2` is closed.
    Unbounded,
}

/// `ℕ` with counting measure, partitioned into blocks `J_k = {j[k, r] : r < card J_k}`,
/// and `φ(x) = min J_{k²}` for `x ∈ J_k`. Window `L` holds the blocks `k ≤ L`.
///
/// The atom `j[k, r]` stands for the `r`-th element of `J_k` in a fixed enumeration
/// of `ℕ`; any such enumeration is measure-isomorphic to this one.
#[derive(Debug, Clone)]
pub struct Partition {
    pub regime: Regime,
    pub j1: u64,
}

pub fn isqrt(k: u64) -> u64 {
    let mut r = (k as f64).sqrt() as u64;
    while r * r > k {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= k {
        r += 1;
    }
    r
}

/// Writes `k ≥ 2` as `q^{2^m}` with `q` not a perfect square.
pub fn square_root_tower(k: u64) -> (u64, u32) {
    let (mut q, mut m) = (k, 0);
    loop {
        let r = isqrt(q);
        if r * r != q || q < 2 {
            return (q, m);
        }
        q = r;
        m += 1;
    }
}

fn bit_length(q: u64) -> u64 {
    u64::from(64 - q.leading_zeros())
}

impl Partition {
    pub fn new(params: &Params) -> Result<Self> {
        reject_unknown(params, &["regime", "kappa", "j1"])?;
        let j1 = param(params, "j1", 1u64)?;
        if !(1..=1024).contains(&j1) {
            return Err(Error::Schema(format!("j1 must lie in 1..=1024, got {j1}")));
        }
        let regime = match params.get("regime").map(String::as_str).unwrap_or("closed") {
            "closed" => {
                let kappa = param(params, "kappa", 2u64)?;
                if !(1..=16).contains(&kappa) {
                    return Err(Error::Schema(format!("kappa must lie in 1..=16, got {kappa}")));
                }
                Regime::Closed { kappa }
            }
            "unbounded" => {
                if params.contains_key("kappa") {
                    return Err(Error::Schema("kappa only applies to the closed regime".into()));
                }
                Regime::Unbounded
            }
            other => return Err(Error::Schema(format!("unknown regime {other:?}"))),
        };
        Ok(Partition { regime, j1 })
    }

    pub fn card(&self, k: u64) -> u64 {
        if k == 1 {
            return self.j1;
        }
        let (q, m) = square_root_tower(k);
        match self.regime {
            Regime::Closed { kappa } => kappa.pow(m),
            Regime::Unbounded if m == 0 => bit_length(q),
            Regime::Unbounded => 1,
        }
    }

    fn block(&self, atom: &AtomId) -> Option<(u64, u64)> {
        match (atom.family.as_str(), atom.indices.as_slice()) {
            ("j", [k, r]) if *k >= 1 && *r < self.card(*k) => Some((*k, *r)),
            _ => None,
        }
    }

    fn min_of(k: u64) -> AtomId {
        AtomId::new("j", vec![k, 0])
    }
}

impl SpaceGenerator for Partition {
    fn name(&self) -> &str {
        "partition"
    }

    fn params(&self) -> Params {
        let mut p = Params::new();
        match self.regime {
            Regime::Closed { kappa } => {
                p.insert("regime".into(), "closed".into());
                p.insert("kappa".into(), kappa.to_string());
            }
            Regime::Unbounded => {
                p.insert("regime".into(), "unbounded".into());
            }
        }
        p.insert("j1".into(), self.j1.to_string());
        p
    }

    fn atoms(&self, level: u32) -> Vec<AtomId> {
        (1..=u64::from(level))
            .flat_map(|k| (0..self.card(k)).map(move |r| AtomId::new("j", vec![k, r])))
            .collect()
    }

    fn mass(&self, atom: &AtomId) -> Option<ExtRational> {
        self.block(atom).map(|_| ExtRational::Finite(Rational::one()))
    }

    fn maps(&self) -> BTreeMap<String, Transformation> {
        BTreeMap::from([("phi".to_string(), Transformation::rule("phi", self.clone()))])
    }
}

impl MapRule for Partition {
    fn image(&self, atom: &AtomId) -> AtomId {
        let (k, _) = self.block(atom).unwrap_or_else(|| panic!("{atom} is not a point of this space"));
        Partition::min_of(k.checked_mul(k).expect("block index overflows u64"))
    }

    fn preimage(&self, atom: &AtomId, _level: u32) -> Preimage {
        let Some((k, r)) = self.block(atom) else {
            return Preimage::complete(Vec::new());
        };
        let s = isqrt(k);
        if r != 0 || s * s != k {
            return Preimage::complete(Vec::new());
        }
        Preimage::complete((0..self.card(s)).map(|t| AtomId::new("j", vec![s, t])).collect())
    }

    fn bound_certificate(&self, query: BoundQuery, level: u32) -> Option<BoundCertificate> {
        match (&self.regime, query) {
            (Regime::Closed { kappa }, BoundQuery::PowerEqualsIterate { n }) => {
                Some(BoundCertificate::Uniform(pow(&int(*kappa as i64), n - 1)))
            }
            (Regime::Closed { kappa }, BoundQuery::ProductClosed { n }) => {
                Some(BoundCertificate::Uniform((1..n).map(|i| pow(&int(*kappa as i64), i)).sum()))
            }
            (Regime::Unbounded, _) => {
                // q = 2^{2t+1} is never a square and card J_q = 2t + 2 grows with t
                let family: Vec<AtomId> = (0..16u32)
                    .map(|t| 1u64 << (2 * t + 1))
                    .map(|q| q.saturating_mul(q))
                    .take_while(|&k| k <= u64::from(level))
                    .map(Partition::min_of)
                    .collect();
                (family.len() >= 2).then_some(BoundCertificate::Unbounded(family))
            }
        }
    }
}

/// `h_{φʲ}(x)` for the partition example, read off the block cardinalities.
pub fn partition_h_formula(p: &Partition, atom: &AtomId, j: u32) -> u64 {
    let (k, r) = match (atom.indices.as_slice(), j) {
        (_, 0) => return 1,
        ([k, r], _) => (*k, *r),
        _ => return 0,
    };
    if r != 0 {
        return 0;
    }
    if k == 1 {
        return p.card(1);
    }
    let (q, m) = square_root_tower(k);
    if m >= j {
        p.card(q.pow(1 << (m - j)))
    } else {
        0
    }
}

// ---------------------------------------------------------------------------

/// Looks up a generator by name.
pub fn generator(name: &str, params: &Params) -> Result<Arc<dyn SpaceGenerator>> {
    let reject_all = |p: &Params| reject_unknown(p, &[]);
    Ok(match name {
        "three-families" => Arc::new(ThreeFamilies::new(params)?),
        "identity-product" => {
            reject_all(params)?;
            Arc::new(IdentityProduct)
        }
        "partition" => Arc::new(Partition::new(params)?),
        "binary-parent" => {
            reject_all(params)?;
            Arc::new(BinaryParent)
        }
        other => return Err(Error::UnknownGenerator(other.to_string())),
    })
}

pub const GENERATORS: &[&str] = &["three-families", "identity-product", "partition", "binary-parent"];
pub const EXAMPLES: &[&str] =
    &["three-families", "identity-product", "partition", "binary-parent", "singular", "t3", "swap", "binary-tree"];

// ---------------------------------------------------------------------------
// examples

/// Where an expected fact comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Stated in the literature the example is taken from.
    Literature,
    /// Computed by hand or by an independent enumeration.
    Computed,
}

impl Origin {
    pub fn name(self) -> &'static str {
        match self {
            Origin::Literature => "literature",
            Origin::Computed => "computed",
        }
    }
}

pub struct ExpectedFact {
    pub statement: &'static str,
    pub origin: Origin,
    pub check: fn(&Example) -> Result<bool>,
}

impl std::fmt::Debug for ExpectedFact {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExpectedFact").field("statement", &self.statement).field("origin", &self.origin).finish()
    }
}

#[derive(Debug)]
pub struct ExampleDescriptor {
    pub name: String,
    pub summary: &'static str,
    pub params: Params,
    pub facts: Vec<ExpectedFact>,
}

#[derive(Debug)]
pub struct Example {
    pub space: MeasureSpace,
    pub maps: BTreeMap<String, Transformation>,
    pub default_map: String,
    pub descriptor: ExampleDescriptor,
}

impl Example {
    pub fn phi(&self) -> &Transformation {
        &self.maps[&self.default_map]
    }

    pub fn map(&self, name: &str) -> Result<&Transformation> {
        self.maps.get(name).ok_or_else(|| Error::Usage(format!("example has no map {name:?}")))
    }

    /// Runs every expected fact, returning `(statement, passed)` pairs.
    pub fn run_facts(&self) -> Vec<(&'static str, Result<bool>)> {
        self.descriptor.facts.iter().map(|f| (f.statement, (f.check)(self))).collect()
    }
}

fn fact(statement: &'static str, origin: Origin, check: fn(&Example) -> Result<bool>) -> ExpectedFact {
    ExpectedFact { statement, origin, check }
}

fn unit_masses(atoms: impl IntoIterator<Item = (AtomId, Rational)>) -> MeasureSpace {
    let list = atoms.into_iter().map(|(a, m)| (a, Mass::new(m).expect("nonnegative mass")));
    MeasureSpace::finite(FiniteSpace::new(list).expect("distinct atoms"))
}

fn x(i: u64) -> AtomId {
    AtomId::indexed("x", i)
}

fn h_is(e: &Example, map: &Transformation, power: u32, atom: &AtomId, level: u32, want: HValue) -> Result<bool> {
    Ok(h(&e.space, map, power, atom, &e.space.window(level))? == want)
}

fn three_families_facts() -> Vec<ExpectedFact> {
    vec![
        fact("C_φ is densely defined", Origin::Literature, |e| {
            Ok(densely_defined(&e.space, e.phi(), &e.space.window(16))?.is_holds())
        }),
        fact("h_{φ²}(a_0) = ∞, certified", Origin::Literature, |e| {
            h_is(e, e.phi(), 2, &AtomId::indexed("a", 0), 16, HValue::infinite())
        }),
        fact("h_{φ³}(a_0) = 0", Origin::Literature, |e| {
            h_is(e, e.phi(), 3, &AtomId::indexed("a", 0), 16, HValue::exact(Rational::zero()))
        }),
        fact("h_φ(a_0) = Σ μ(b_i) = 1", Origin::Computed, |e| {
            h_is(e, e.phi(), 1, &AtomId::indexed("a", 0), 16, HValue::exact(Rational::one()))
        }),
        fact("χ_{a_0} lies in the domain of C_{φ³} but not of C_φ³", Origin::Literature, |e| {
            let w = e.space.window(16);
            let f = Vector::indicator(AtomId::indexed("a", 0));
            Ok(in_domain_iterate(&e.space, e.phi(), &f, 3, &w)? && !in_domain_power(&e.space, e.phi(), &f, 3, &w)?)
        }),
        fact("C_φʲ is not densely defined for j ≥ 2, witnessed at a_{j-2}", Origin::Literature, |e| {
            let w = e.space.window(16);
            for j in 2..=6u32 {
                let v = densely_defined_power(&e.space, e.phi(), j, &w)?;
                let want = crate::verdict::Witness::AtomPower { atom: AtomId::indexed("a", u64::from(j) - 2), power: j };
                if v.witness() != Some(&want) {
                    return Ok(false);
                }
            }
            Ok(true)
        }),
        fact("φ² sends a_i ↦ a_{i+2}, b_i ↦ a_1, c_{i,j} ↦ a_0", Origin::Computed, |e| {
            let a = |i| AtomId::indexed("a", i);
            let sq = e.phi().pow(2);
            Ok(sq.image(&a(3)) == a(5)
                && sq.image(&AtomId::indexed("b", 4)) == a(1)
                && sq.image(&AtomId::new("c", vec![2, 7])) == a(0))
        }),
    ]
}

fn identity_product_facts() -> Vec<ExpectedFact> {
    vec![
        fact("h_{φ₁∘φ₂} ≡ 1", Origin::Literature, |e| {
            let w = e.space.window(32);
            let both = e.map("phi1∘phi2")?;
            for atom in &w.atoms {
                if h(&e.space, both, 1, atom, &w)? != HValue::exact(Rational::one()) {
                    return Ok(false);
                }
            }
            Ok(true)
        }),
        fact("C_{φ₁} is not densely defined, witnessed at 0", Origin::Literature, |e| {
            let v = densely_defined(&e.space, e.map("phi1")?, &e.space.window(32))?;
            Ok(v.witness() == Some(&crate::verdict::Witness::Atom(n(0))))
        }),
        fact("C_{φ₂}C_{φ₁} is not densely defined", Origin::Literature, |e| {
            let maps = [e.map("phi1")?.clone(), e.map("phi2")?.clone()];
            Ok(densely_defined_product(&e.space, &maps, &e.space.window(32))?.is_fails())
        }),
    ]
}

fn partition_facts() -> Vec<ExpectedFact> {
    vec![
        fact("h_{φʲ}(x) matches the block-cardinality formula for j ≤ 4", Origin::Literature, |e| {
            let MeasureSpace::Generated(g) = &e.space else { return Ok(false) };
            let p = Partition::new(&g.params())?;
            let w = e.space.window(300);
            for atom in &w.atoms {
                for j in 0..=4 {
                    let want = HValue::exact(int(partition_h_formula(&p, atom, j) as i64));
                    if h(&e.space, e.phi(), j, atom, &w)? != want {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }),
        fact("closedness of powers follows the regime", Origin::Literature, |e| {
            let MeasureSpace::Generated(g) = &e.space else { return Ok(false) };
            let closed = matches!(Partition::new(&g.params())?.regime, Regime::Closed { .. });
            let w = e.space.window(300);
            for n in 2..=4 {
                let v = power_equals_iterate(&e.space, e.phi(), n, &w)?;
                let maps = vec![e.phi().clone(); n as usize];
                let pc = product_closed(&e.space, &maps, &w)?;
                if closed != v.verdict.is_holds() || closed != pc.verdict.is_holds() {
                    return Ok(false);
                }
            }
            Ok(true)
        }),
    ]
}

/// Builds a named example.
pub fn example(name: &str, params: &Params) -> Result<Example> {
    let (space, maps, default_map, summary, facts): (MeasureSpace, BTreeMap<String, Transformation>, &str, &str, _) =
        match name {
            "three-families" | "identity-product" | "partition" | "binary-parent" => {
                let g = generator(name, params)?;
                let maps = g.maps();
                let (default, summary, facts) = match name {
                    "three-families" => ("phi", "densely defined C_φ whose square is not densely defined", three_families_facts()),
                    "identity-product" => (
                        "phi1",
                        "C_{φ₁∘φ₂} is the identity although C_{φ₁} is not densely defined",
                        identity_product_facts(),
                    ),
                    "partition" => ("phi", "powers of C_φ all closed or none closed", partition_facts()),
                    _ => ("phi", "every point has two preimages, so h_{φⁿ} ≡ 2ⁿ", binary_parent_facts()),
                };
                (MeasureSpace::Generated(g), maps, default, summary, facts)
            }
            "singular" => {
                reject_unknown(params, &[])?;
                let z = |i| AtomId::indexed("z", i);
                let t = AtomId::bare("t");
                let space = unit_masses([(z(0), int(1)), (z(1), int(1)), (t.clone(), int(0))]);
                let phi = Transformation::finite([(z(0), t.clone()), (z(1), z(1)), (t, z(1))]);
                let facts = vec![
                    fact("φ is not nonsingular, witnessed by (t, z_0)", Origin::Literature, |e| {
                        let v = check_nonsingular(&e.space, e.phi(), &e.space.window(1))?;
                        Ok(v.witness()
                            == Some(&crate::verdict::Witness::NullPreimage {
                                null_atom: AtomId::bare("t"),
                                positive_atom: AtomId::indexed("z", 0),
                            }))
                    }),
                    fact("φ² is nonsingular", Origin::Literature, |e| {
                        Ok(check_nonsingular(&e.space, &e.phi().pow(2), &e.space.window(1))?.is_holds())
                    }),
                ];
                (space, BTreeMap::from([("phi".to_string(), phi)]), "phi", "a null atom t replaces an interval of Lebesgue measure", facts)
            }
            "t3" => {
                reject_unknown(params, &[])?;
                let space = unit_masses((1..=3).map(|i| (x(i), int(1))));
                let phi = Transformation::finite([(x(1), x(1)), (x(2), x(1)), (x(3), x(2))]);
                let facts = vec![
                    fact("h_φ = (2, 1, 0)", Origin::Computed, |e| {
                        let w = e.space.window(1);
                        let got: Vec<HValue> =
                            (1..=3).map(|i| h(&e.space, e.phi(), 1, &x(i), &w)).collect::<Result<_>>()?;
                        Ok(got == [2, 1, 0].map(|v| HValue::exact(int(v))))
                    }),
                    fact("not quasinormal, witnessed at atom 2", Origin::Computed, |e| {
                        let v = quasinormal(&e.space, e.phi(), &e.space.window(1))?;
                        Ok(v.witness().and_then(|w| w.atom()) == Some(&x(2)))
                    }),
                ];
                (space, BTreeMap::from([("phi".to_string(), phi)]), "phi", "three unit atoms, 1 ↦ 1, 2 ↦ 1, 3 ↦ 2", facts)
            }
            "swap" => {
                reject_unknown(params, &[])?;
                let space = unit_masses((1..=2).map(|i| (x(i), int(1))));
                let phi = Transformation::finite([(x(1), x(2)), (x(2), x(1))]);
                let facts = vec![fact("C_φ is normal", Origin::Computed, |e| {
                    Ok(crate::classify::normal(&e.space, e.phi(), &e.space.window(1))?.is_holds())
                })];
                (space, BTreeMap::from([("phi".to_string(), phi)]), "phi", "the transposition of two unit atoms", facts)
            }
            "binary-tree" => {
                reject_unknown(params, &["depth"])?;
                let depth = param(params, "depth", 3u32)?;
                if !(1..=12).contains(&depth) {
                    return Err(Error::Schema(format!("depth must lie in 1..=12, got {depth}")));
                }
                let last = (1u64 << (depth + 1)) - 1;
                let v = |i| AtomId::indexed("v", i);
                let space = unit_masses((1..=last).map(|i| (v(i), int(1))));
                let phi = Transformation::finite((1..=last).map(|i| (v(i), v((i / 2).max(1)))));
                let facts = vec![fact("‖C_φ χ_root‖² ≠ ‖C_φ* χ_root‖²", Origin::Computed, |e| {
                    let f = Vector::indicator(AtomId::indexed("v", 1));
                    Ok(!formal_normality_direct(&e.space, e.phi(), &f, &e.space.window(1))?)
                })];
                (space, BTreeMap::from([("phi".to_string(), phi)]), "phi", "heap-ordered binary tree, each node sent to its parent, root fixed", facts)
            }
            other => return Err(Error::UnknownExample(other.to_string())),
        };
    let params = match &space {
        MeasureSpace::Generated(g) => g.params(),
        MeasureSpace::Finite(_) => params.clone(),
    };
    Ok(Example {
        space,
        maps,
        default_map: default_map.to_string(),
        descriptor: ExampleDescriptor { name: name.to_string(), summary, params, facts },
    })
}

fn binary_parent_facts() -> Vec<ExpectedFact> {
    vec![
        fact("h_{φⁿ} ≡ 2ⁿ for n ≤ 3", Origin::Computed, |e| {
            let w = e.space.window(16);
            for atom in &w.atoms {
                for p in 0..=3u32 {
                    if h(&e.space, e.phi(), p, atom, &w)? != HValue::exact(int(1 << p)) {
                        return Ok(false);
                    }
                }
            }
            Ok(true)
        }),
        fact("quasinormal but not normal", Origin::Computed, |e| {
            let w = e.space.window(16);
            Ok(quasinormal(&e.space, e.phi(), &w)?.is_holds()
                && crate::classify::normal(&e.space, e.phi(), &w)?.is_fails())
        }),
    ]
}

// ---------------------------------------------------------------------------
// random spaces and search

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomSpaceSpec {
    pub seed: u64,
    pub max_atoms: usize,
    pub max_numerator: u32,
    pub max_denominator: u32,
    /// Each atom is null with probability 1/4.
    pub null_atoms: bool,
}

impl RandomSpaceSpec {
    pub fn new(seed: u64) -> Self {
        RandomSpaceSpec { seed, max_atoms: 5, max_numerator: 3, max_denominator: 3, null_atoms: false }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        RandomSpaceSpec { seed, ..self.clone() }
    }
}

/// A pseudo-random finite space `x[0..n]` with a uniformly drawn self-map.
pub fn random_finite(spec: &RandomSpaceSpec) -> (MeasureSpace, Transformation) {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let count = rng.gen_range(1..=spec.max_atoms.max(1)) as u64;
    let atoms: Vec<(AtomId, Rational)> = (0..count)
        .map(|i| {
            let num = rng.gen_range(1..=spec.max_numerator.max(1));
            let den = rng.gen_range(1..=spec.max_denominator.max(1));
            let null = spec.null_atoms && rng.gen_ratio(1, 4);
            let m = if null { Rational::zero() } else { Rational::new(num.into(), den.into()) };
            (AtomId::indexed("x", i), m)
        })
        .collect();
    let phi = Transformation::finite((0..count).map(|i| (AtomId::indexed("x", i), AtomId::indexed("x", rng.gen_range(0..count)))));
    (unit_masses(atoms), phi)
}

/// Boolean formula over report property names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Predicate {
    Const(bool),
    Property(String),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

const PROPERTY_NAMES: &[&str] =
    &["nonsingular", "densely_defined", "injective", "quasinormal", "normal", "formally_normal", "stieltjes"];

impl Predicate {
    /// Parses e.g. `quasinormal & !normal`; `∧ ∨ ¬` and `and or not` are accepted too.
    pub fn parse(src: &str) -> Result<Predicate> {
        let tokens = tokenize(src)?;
        let mut pos = 0;
        let p = parse_or(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(Error::Parse(format!("unexpected {:?} in predicate", tokens[pos])));
        }
        Ok(p)
    }

    /// A property holds when its verdict is `Holds`.
    pub fn eval(&self, report: &crate::classify::ClassificationReport) -> bool {
        match self {
            Predicate::Const(b) => *b,
            Predicate::Property(name) => report.property(name).is_some_and(Verdict::is_holds),
            Predicate::Not(p) => !p.eval(report),
            Predicate::And(a, b) => a.eval(report) && b.eval(report),
            Predicate::Or(a, b) => a.eval(report) || b.eval(report),
        }
    }
}

fn tokenize(src: &str) -> Result<Vec<String>> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            c if c.is_whitespace() => {
                chars.next();
            }
            '(' | ')' | '!' | '&' | '|' | '¬' | '∧' | '∨' => {
                chars.next();
                out.push(match c {
                    '¬' => "!".to_string(),
                    '∧' => "&".to_string(),
                    '∨' => "|".to_string(),
                    other => other.to_string(),
                });
            }
            c if c.is_alphanumeric() || c == '_' || c == '-' => {
                let mut word = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_alphanumeric() || d == '_' || d == '-' {
                        word.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                out.push(match word.as_str() {
                    "and" => "&".to_string(),
                    "or" => "|".to_string(),
                    "not" => "!".to_string(),
                    _ => word.replace('-', "_"),
                });
            }
            other => return Err(Error::Parse(format!("unexpected character {other:?} in predicate"))),
        }
    }
    Ok(out)
}

fn parse_or(t: &[String], pos: &mut usize) -> Result<Predicate> {
    let mut left = parse_and(t, pos)?;
    while t.get(*pos).map(String::as_str) == Some("|") {
        *pos += 1;
        left = Predicate::Or(Box::new(left), Box::new(parse_and(t, pos)?));
    }
    Ok(left)
}

fn parse_and(t: &[String], pos: &mut usize) -> Result<Predicate> {
    let mut left = parse_unary(t, pos)?;
    while t.get(*pos).map(String::as_str) == Some("&") {
        *pos += 1;
        left = Predicate::And(Box::new(left), Box::new(parse_unary(t, pos)?));
    }
    Ok(left)
}

fn parse_unary(t: &[String], pos: &mut usize) -> Result<Predicate> {
    let tok = t.get(*pos).ok_or_else(|| Error::Parse("predicate ends unexpectedly".into()))?;
    *pos += 1;
    match tok.as_str() {
        "!" => Ok(Predicate::Not(Box::new(parse_unary(t, pos)?))),
        "(" => {
            let inner = parse_or(t, pos)?;
            if t.get(*pos).map(String::as_str) != Some(")") {
                return Err(Error::Parse("missing ')' in predicate".into()));
            }
            *pos += 1;
            Ok(inner)
        }
        "true" => Ok(Predicate::Const(true)),
        "false" => Ok(Predicate::Const(false)),
        name if PROPERTY_NAMES.contains(&name) => Ok(Predicate::Property(name.to_string())),
        other => Err(Error::Parse(format!("unknown property {other:?} in predicate"))),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchHit {
    pub seed: u64,
    /// The witness as a space-file.
    pub document: Value,
}

/// Classifies the random spaces for seeds `spec.seed .. spec.seed + budget` and
/// keeps those satisfying the predicate, ordered by seed.
pub fn search(predicate: &Predicate, spec: &RandomSpaceSpec, budget: u64, order: u32) -> Result<Vec<SearchHit>> {
    if *predicate == Predicate::Const(false) {
        return Ok(Vec::new());
    }
    let mut hits: Vec<SearchHit> = (spec.seed..spec.seed.saturating_add(budget))
        .into_par_iter()
        .map(|seed| {
            let (space, phi) = random_finite(&spec.with_seed(seed));
            let report = classify_all(&space, &phi, &space.window(1), order)?;
            if !predicate.eval(&report) {
                return Ok(None);
            }
            let maps = BTreeMap::from([("phi".to_string(), phi)]);
            Ok(Some(SearchHit { seed, document: crate::document::to_document(&space, &maps)? }))
        })
        .filter_map(|r: Result<Option<SearchHit>>| r.transpose())
        .collect::<Result<Vec<_>>>()?;
    hits.sort_by_key(|h| h.seed);
    Ok(hits)
}

pub fn search_json(hits: &[SearchHit]) -> Value {
    json!(hits.iter().map(|h| json!({ "seed": h.seed, "space": h.document })).collect::<Vec<_>>())
}
