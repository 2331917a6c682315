//! Domains of powers, iterates and products of composition operators.
//!
//! Every domain here is a weighted `L²` space: `f` is in the domain iff
//! `Σ |f(y)|² w(y) μ({y}) < ∞` for a weight `w` assembled from h-values. Questions
//! of the form "there is a constant `c` with `w₂ ≤ c·w₁`" are answered in three
//! grades, see [`BoundStatus`].

use num_traits::{One, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{format_rational, ExtRational, Rational};
use crate::l2ops::Vector;
use crate::radon::{h, Certainty, HValue};
use crate::space::{AtomId, BoundCertificate, BoundQuery, MeasureSpace, Transformation, Window};
use crate::verdict::{Verdict, Witness};

/// How far a window constant `c` is known to extend.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundStatus {
    /// Computed over the whole (finite) space.
    Exact,
    /// The largest ratio seen in the window; a larger window may raise it.
    WindowOnly,
    /// Backed by a structural argument or a declared global bound.
    UniformCertified,
}

impl BoundStatus {
    pub fn name(self) -> &'static str {
        match self {
            BoundStatus::Exact => "exact",
            BoundStatus::WindowOnly => "window-only",
            BoundStatus::UniformCertified => "uniform-certified",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundWitness {
    /// Minimal constant over the window.
    pub c: Rational,
    pub level: u32,
    pub status: BoundStatus,
    /// A declared global constant, when one was used.
    pub declared: Option<Rational>,
}

impl BoundWitness {
    pub fn to_json(&self) -> Value {
        json!({
            "c": format_rational(&self.c),
            "window": self.level,
            "status": self.status.name(),
            "declared": self.declared.as_ref().map(format_rational),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundVerdict {
    pub verdict: Verdict,
    pub bound: Option<BoundWitness>,
}

impl BoundVerdict {
    pub fn to_json(&self, window: u32) -> Value {
        let mut v = self.verdict.to_json(window);
        if let Some(b) = &self.bound {
            v["bound"] = b.to_json();
        }
        v
    }
}

/// A domain described by its weight.
#[derive(Debug, Clone)]
pub enum DomainQuery {
    /// `𝒟(C_φⁿ)`, weight `Σ_{j=0}^n h_{φʲ}`.
    Power(Transformation, u32),
    /// `𝒟(C_{φⁿ})`, weight `1 + h_{φⁿ}`.
    Iterate(Transformation, u32),
    /// `𝒟(C_{φ_k} ⋯ C_{φ_1})`, weight `1 + Σ_j h_{φ_1∘⋯∘φ_j}`.
    Product(Vec<Transformation>),
}

/// One summand of a weight: `h_{ψ}` for `ψ = base^power`, or a prefix composite.
#[derive(Debug, Clone)]
struct Term {
    map: Transformation,
    power: u32,
    key: (String, u32),
}

impl DomainQuery {
    fn terms(&self) -> Vec<Term> {
        match self {
            DomainQuery::Power(phi, n) => (0..=*n)
                .map(|j| Term { map: phi.clone(), power: j, key: (phi.label(), j) })
                .collect(),
            DomainQuery::Iterate(phi, n) => {
                let mut t = vec![Term { map: phi.clone(), power: 0, key: (phi.label(), 0) }];
                if *n > 0 {
                    t.push(Term { map: phi.clone(), power: *n, key: (phi.label(), *n) });
                }
                t
            }
            DomainQuery::Product(list) => {
                let mut t = vec![Term { map: Transformation::Identity, power: 0, key: (String::new(), 0) }];
                let same = list.windows(2).all(|w| w[0].label() == w[1].label());
                for k in 1..=list.len() {
                    if same {
                        t.push(Term { map: list[0].clone(), power: k as u32, key: (list[0].label(), k as u32) });
                    } else {
                        let prefix = Transformation::compose(&list[..k]);
                        t.push(Term { key: (prefix.label(), 1), map: prefix, power: 1 });
                    }
                }
                t
            }
        }
    }
}

/// Per-atom weight and whether every summand was certified.
fn weight(space: &MeasureSpace, terms: &[Term], x: &AtomId, window: &Window) -> Result<(ExtRational, bool)> {
    let mut acc = ExtRational::zero();
    let mut certified = true;
    for t in terms {
        let hv = h(space, &t.map, t.power, x, window)?;
        certified &= hv.is_certified();
        acc = acc.add(&hv.value);
    }
    Ok((acc, certified))
}

fn domain_membership(space: &MeasureSpace, terms: &[Term], f: &Vector, window: &Window) -> Result<bool> {
    let mut uncertain = None;
    for (y, _) in f.iter() {
        if !space.is_positive(y)? {
            continue;
        }
        let (w, certified) = weight(space, terms, y, window)?;
        if w.is_infinite() {
            return Ok(false);
        }
        if !certified {
            uncertain.get_or_insert(y.clone());
        }
    }
    match uncertain {
        Some(y) => Err(Error::Inconclusive {
            level: window.level,
            reason: format!("h at {y} is only a lower bound"),
        }),
        None => Ok(true),
    }
}

/// `f ∈ 𝒟(C_φⁿ)`.
pub fn in_domain_power(space: &MeasureSpace, phi: &Transformation, f: &Vector, n: u32, window: &Window) -> Result<bool> {
    domain_membership(space, &DomainQuery::Power(phi.clone(), n).terms(), f, window)
}

/// `f ∈ 𝒟(C_{φⁿ})`.
pub fn in_domain_iterate(space: &MeasureSpace, phi: &Transformation, f: &Vector, n: u32, window: &Window) -> Result<bool> {
    domain_membership(space, &DomainQuery::Iterate(phi.clone(), n).terms(), f, window)
}

/// Scans `h_{φ^p}` over positive window atoms for each listed power, in order.
fn finite_everywhere(
    space: &MeasureSpace,
    phi: &Transformation,
    powers: impl IntoIterator<Item = u32>,
    window: &Window,
    witness: impl Fn(AtomId, u32) -> Witness,
) -> Result<Verdict> {
    let atoms = window.positive_atoms(space)?;
    let mut undecided = None;
    for p in powers {
        for x in &atoms {
            let hv = h(space, phi, p, x, window)?;
            match hv.certainty {
                Certainty::CertifiedInfinite => return Ok(Verdict::Fails(witness(x.clone(), p))),
                Certainty::LowerBound(_) => {
                    undecided.get_or_insert((x.clone(), p));
                }
                Certainty::Exact => {}
            }
        }
    }
    Ok(match undecided {
        Some((x, p)) => Verdict::Inconclusive(format!("h of power {p} at {x} is only a lower bound")),
        None => Verdict::holds(window.exhaustive),
    })
}

/// `C_φ` is densely defined iff `h_φ < ∞` a.e.
pub fn densely_defined(space: &MeasureSpace, phi: &Transformation, window: &Window) -> Result<Verdict> {
    finite_everywhere(space, phi, [1], window, |x, _| Witness::Atom(x))
}

/// `C_φⁿ` is densely defined iff `h_{φʲ} < ∞` a.e. for `j ≤ n`.
///
/// Powers are scanned from `n` down, so the witness is the atom where the top
/// power first diverges.
pub fn densely_defined_power(space: &MeasureSpace, phi: &Transformation, n: u32, window: &Window) -> Result<Verdict> {
    finite_everywhere(space, phi, (1..=n).rev(), window, |atom, power| Witness::AtomPower { atom, power })
}

/// `C_{φ_k} ⋯ C_{φ_1}` is densely defined iff every prefix composite `C_{φ_1∘⋯∘φ_j}` is.
pub fn densely_defined_product(space: &MeasureSpace, maps: &[Transformation], window: &Window) -> Result<Verdict> {
    let prefixes: Vec<Transformation> = (1..=maps.len()).map(|k| Transformation::compose(&maps[..k])).collect();
    all_dense(space, &prefixes, window)
}

/// A linear combination with nonzero coefficients is densely defined iff each summand is.
pub fn linear_combination_densely_defined(space: &MeasureSpace, maps: &[Transformation], window: &Window) -> Result<Verdict> {
    all_dense(space, maps, window)
}

fn all_dense(space: &MeasureSpace, maps: &[Transformation], window: &Window) -> Result<Verdict> {
    let mut pending = None;
    let mut certified = true;
    for (i, m) in maps.iter().enumerate() {
        match densely_defined(space, m, window)? {
            Verdict::Fails(w) => {
                let atom = w.atom().cloned().unwrap_or_else(|| AtomId::bare("?"));
                return Ok(Verdict::Fails(Witness::Member { index: i + 1, atom, power: 1 }));
            }
            Verdict::Inconclusive(r) => {
                pending.get_or_insert(format!("member {}: {r}", i + 1));
            }
            Verdict::Holds { certified: c } => certified &= c,
        }
    }
    Ok(match pending {
        Some(r) => Verdict::Inconclusive(r),
        None => Verdict::holds(certified),
    })
}

struct RatioScan {
    c: Rational,
    violation: Option<(AtomId, u32)>,
    undecided: Option<AtomId>,
}

/// Minimal `c` with `num(x) ≤ c·(1 + h_top(x))` over the window.
///
/// `numerators` lists the maps and powers whose h-values are bounded, either one
/// at a time (`sum = false`) or summed (`sum = true`).
fn ratio_scan(
    space: &MeasureSpace,
    numerators: &[(Transformation, u32)],
    top: &(Transformation, u32),
    sum: bool,
    window: &Window,
) -> Result<RatioScan> {
    let mut scan = RatioScan { c: Rational::zero(), violation: None, undecided: None };
    for x in window.positive_atoms(space)? {
        let denom = h(space, &top.0, top.1, &x, window)?;
        let nums: Vec<HValue> =
            numerators.iter().map(|(m, p)| h(space, m, *p, &x, window)).collect::<Result<_>>()?;
        if denom.is_infinite() {
            continue;
        }
        if !denom.is_certified() || nums.iter().any(|v| !v.is_certified()) {
            scan.undecided.get_or_insert(x);
            continue;
        }
        let d = Rational::one() + denom.value.finite().cloned().unwrap_or_default();
        let mut total = Rational::zero();
        for (i, v) in nums.iter().enumerate() {
            match v.value.finite() {
                None => {
                    if scan.violation.is_none() {
                        scan.violation = Some((x.clone(), numerators[i].1));
                    }
                    break;
                }
                Some(val) if sum => total += val,
                Some(val) => {
                    let r = val / &d;
                    if r > scan.c {
                        scan.c = r;
                    }
                }
            }
        }
        if sum {
            let r = total / d;
            if r > scan.c {
                scan.c = r;
            }
        }
    }
    Ok(scan)
}

fn bound_verdict(
    space: &MeasureSpace,
    scan: RatioScan,
    certificate: Option<BoundCertificate>,
    ratio_at: impl Fn(&AtomId) -> Result<Option<Rational>>,
    window: &Window,
) -> Result<BoundVerdict> {
    let level = window.level;
    if let Some((atom, power)) = scan.violation {
        return Ok(BoundVerdict { verdict: Verdict::Fails(Witness::AtomPower { atom, power }), bound: None });
    }
    match certificate {
        Some(BoundCertificate::Unbounded(family)) => {
            let mut atoms = Vec::new();
            let mut ratios: Vec<Rational> = Vec::new();
            for a in family {
                if !window.contains(&a) || !space.is_positive(&a)? {
                    return Err(Error::Annotation(format!("unbounded family atom {a} is not a positive window atom")));
                }
                let r = ratio_at(&a)?
                    .ok_or_else(|| Error::Annotation(format!("ratio at family atom {a} is not certified")))?;
                if ratios.last().is_some_and(|prev| &r <= prev) {
                    return Err(Error::Annotation(format!("ratios along the declared family do not increase at {a}")));
                }
                atoms.push(a);
                ratios.push(r);
            }
            if atoms.len() < 2 {
                return Err(Error::Annotation("unbounded family needs at least two window atoms".into()));
            }
            return Ok(BoundVerdict { verdict: Verdict::Fails(Witness::Family { atoms, ratios }), bound: None });
        }
        Some(BoundCertificate::Uniform(declared)) => {
            if scan.c > declared {
                return Err(Error::Annotation(format!(
                    "declared uniform bound {declared} is below the window constant {}",
                    scan.c
                )));
            }
            let bound = BoundWitness { c: scan.c, level, status: BoundStatus::UniformCertified, declared: Some(declared) };
            return Ok(BoundVerdict { verdict: Verdict::holds(true), bound: Some(bound) });
        }
        None => {}
    }
    if let Some(x) = scan.undecided {
        return Ok(BoundVerdict {
            verdict: Verdict::Inconclusive(format!("h at {x} is only a lower bound")),
            bound: Some(BoundWitness { c: scan.c, level, status: BoundStatus::WindowOnly, declared: None }),
        });
    }
    let status = if window.exhaustive { BoundStatus::Exact } else { BoundStatus::WindowOnly };
    Ok(BoundVerdict {
        verdict: Verdict::holds(window.exhaustive),
        bound: Some(BoundWitness { c: scan.c, level, status, declared: None }),
    })
}

fn ratio_at(
    space: &MeasureSpace,
    numerators: &[(Transformation, u32)],
    top: &(Transformation, u32),
    sum: bool,
    x: &AtomId,
    window: &Window,
) -> Result<Option<Rational>> {
    let d = match h(space, &top.0, top.1, x, window)?.exact_value() {
        Some(v) => Rational::one() + v,
        None => return Ok(None),
    };
    let mut vals = Vec::new();
    for (m, p) in numerators {
        match h(space, m, *p, x, window)?.exact_value() {
            Some(v) => vals.push(v / &d),
            None => return Ok(None),
        }
    }
    Ok(if sum { Some(vals.into_iter().sum()) } else { vals.into_iter().max() })
}

/// `C_φⁿ = C_{φⁿ}` iff `h_{φᵏ} ≤ c(1 + h_{φⁿ})` for `k < n`.
pub fn power_equals_iterate(space: &MeasureSpace, phi: &Transformation, n: u32, window: &Window) -> Result<BoundVerdict> {
    let numerators: Vec<(Transformation, u32)> = (1..n).map(|k| (phi.clone(), k)).collect();
    let top = (phi.clone(), n);
    let scan = ratio_scan(space, &numerators, &top, false, window)?;
    let cert = if n >= 2 { phi.bound_certificate(BoundQuery::PowerEqualsIterate { n }, window.level) } else { None };
    bound_verdict(space, scan, cert, |x| ratio_at(space, &numerators, &top, false, x, window), window)
}

/// `C_{φ_n} ⋯ C_{φ_1}` is closed iff `Σ_{j<n} h_{φ_1∘⋯∘φ_j} ≤ c(1 + h_{φ_1∘⋯∘φ_n})`.
pub fn product_closed(space: &MeasureSpace, maps: &[Transformation], window: &Window) -> Result<BoundVerdict> {
    let n = maps.len();
    let same = maps.windows(2).all(|w| w[0].label() == w[1].label());
    let (numerators, top, cert): (Vec<(Transformation, u32)>, (Transformation, u32), _) = if same && n >= 1 {
        let phi = &maps[0];
        let cert = if n >= 2 {
            phi.bound_certificate(BoundQuery::ProductClosed { n: n as u32 }, window.level)
        } else {
            None
        };
        ((1..n as u32).map(|j| (phi.clone(), j)).collect(), (phi.clone(), n as u32), cert)
    } else {
        (
            (1..n).map(|j| (Transformation::compose(&maps[..j]), 1)).collect(),
            (Transformation::compose(maps), 1),
            None,
        )
    };
    let scan = ratio_scan(space, &numerators, &top, true, window)?;
    bound_verdict(space, scan, cert, |x| ratio_at(space, &numerators, &top, true, x, window), window)
}

/// `𝒟(query1) ⊆ 𝒟(query2)` iff `w₂ ≤ c·w₁` atomwise.
pub fn domain_inclusion(space: &MeasureSpace, q1: &DomainQuery, q2: &DomainQuery, window: &Window) -> Result<BoundVerdict> {
    let t1 = q1.terms();
    let t2 = q2.terms();
    // every summand of w₂ also appears in w₁, so c = 1 works everywhere
    let dominated = {
        let mut keys1: Vec<&(String, u32)> = t1.iter().map(|t| &t.key).collect();
        t2.iter().all(|t| match keys1.iter().position(|k| **k == t.key) {
            Some(i) => {
                keys1.swap_remove(i);
                true
            }
            None => false,
        })
    };
    let mut c = Rational::zero();
    let mut undecided = None;
    for x in window.positive_atoms(space)? {
        let (w1, ok1) = weight(space, &t1, &x, window)?;
        let (w2, ok2) = weight(space, &t2, &x, window)?;
        if w1.is_infinite() && ok1 {
            continue;
        }
        if !(ok1 && ok2) {
            undecided.get_or_insert(x);
            continue;
        }
        match (w1.finite(), w2.finite()) {
            (Some(a), Some(b)) => {
                let r = b / a;
                if r > c {
                    c = r;
                }
            }
            (Some(_), None) => {
                return Ok(BoundVerdict { verdict: Verdict::Fails(Witness::Atom(x)), bound: None });
            }
            (None, _) => {}
        }
    }
    let level = window.level;
    if dominated {
        let bound = BoundWitness { c, level, status: BoundStatus::UniformCertified, declared: Some(Rational::one()) };
        return Ok(BoundVerdict { verdict: Verdict::holds(true), bound: Some(bound) });
    }
    if let Some(x) = undecided {
        return Ok(BoundVerdict {
            verdict: Verdict::Inconclusive(format!("weights at {x} are only lower bounds")),
            bound: Some(BoundWitness { c, level, status: BoundStatus::WindowOnly, declared: None }),
        });
    }
    let status = if window.exhaustive { BoundStatus::Exact } else { BoundStatus::WindowOnly };
    Ok(BoundVerdict { verdict: Verdict::holds(window.exhaustive), bound: Some(BoundWitness { c, level, status, declared: None }) })
}

/// `𝒟^∞(C_φ)` is dense iff every power `C_φⁿ` is densely defined; tested for `n ≤ max_power`.
pub fn cinfty_dense(space: &MeasureSpace, phi: &Transformation, window: &Window, max_power: u32) -> Result<Verdict> {
    let mut pending = None;
    let mut certified = true;
    for n in 1..=max_power {
        match densely_defined_power(space, phi, n, window)? {
            fails @ Verdict::Fails(_) => return Ok(fails),
            Verdict::Inconclusive(r) => {
                pending.get_or_insert(r);
            }
            Verdict::Holds { certified: c } => certified &= c,
        }
    }
    Ok(match pending {
        Some(r) => Verdict::Inconclusive(r),
        None => Verdict::holds(certified),
    })
}
