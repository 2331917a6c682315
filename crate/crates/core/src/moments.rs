//! Truncated Stieltjes moment tests via exact Hankel semidefiniteness.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::Result;
use crate::exact::{common_denominator, format_rational, pow, ComplexRational, ExtRational, Rational};
use crate::radon::{h, Certainty};
use crate::space::{MeasureSpace, Transformation, Window};
use crate::verdict::{HankelKind, Verdict, Witness};

pub type MomentSequence = Vec<Rational>;
pub type Matrix = Vec<Vec<Rational>>;

#[derive(Debug, Clone, PartialEq)]
pub enum Psd {
    Psd,
    /// A principal submatrix with negative determinant.
    NotPsd { indices: Vec<usize>, det: Rational },
}

impl Psd {
    pub fn is_psd(&self) -> bool {
        matches!(self, Psd::Psd)
    }
}

/// `[γ_{i+j}]` (plain) or `[γ_{i+j+1}]` (shifted) of the given size.
pub fn hankel(gamma: &[Rational], kind: HankelKind, size: usize) -> Matrix {
    let shift = match kind {
        HankelKind::Plain => 0,
        HankelKind::Shifted => 1,
    };
    (0..size).map(|i| (0..size).map(|j| gamma[i + j + shift].clone()).collect()).collect()
}

/// Exact determinant by Gaussian elimination over the rationals.
pub fn determinant(m: &Matrix) -> Rational {
    let n = m.len();
    let mut a = m.clone();
    let mut det = Rational::one();
    for col in 0..n {
        let Some(p) = (col..n).find(|&r| !a[r][col].is_zero()) else {
            return Rational::zero();
        };
        if p != col {
            a.swap(p, col);
            det = -det;
        }
        let pivot = a[col][col].clone();
        det *= &pivot;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = &a[r][col] / &pivot;
            let (upper, lower) = a.split_at_mut(r);
            for (target, source) in lower[0][col..].iter_mut().zip(&upper[col][col..]) {
                *target -= &factor * source;
            }
        }
    }
    det
}

pub fn principal_minor(m: &Matrix, indices: &[usize]) -> Matrix {
    indices.iter().map(|&i| indices.iter().map(|&j| m[i][j].clone()).collect()).collect()
}

/// Decides positive semidefiniteness of a symmetric rational matrix.
///
/// The matrix is scaled to integers and reduced by symmetric fraction-free
/// elimination, pivoting only on positive diagonal entries. After pivots `P`,
/// entry `(i, j)` equals `det A[P∪{i}, P∪{j}]`, so a negative diagonal or a
/// nonzero entry off a zero diagonal exposes a negative principal minor.
pub fn psd_exact(m: &Matrix) -> Psd {
    let n = m.len();
    let scale = common_denominator(m.iter().flatten());
    let mut a: Vec<Vec<BigInt>> = m
        .iter()
        .map(|row| row.iter().map(|r| (r * Rational::from_integer(scale.clone())).to_integer()).collect())
        .collect();
    let mut active: Vec<usize> = (0..n).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut prev = BigInt::one();
    loop {
        let snapshot = active.clone();
        active.retain(|&i| snapshot.iter().any(|&j| !a[i][j].is_zero()));
        if active.is_empty() {
            return Psd::Psd;
        }
        let witness = |extra: &[usize]| {
            let mut idx = pivots.clone();
            idx.extend_from_slice(extra);
            idx.sort_unstable();
            let det = determinant(&principal_minor(m, &idx));
            Psd::NotPsd { indices: idx, det }
        };
        if let Some(&i) = active.iter().find(|&&i| a[i][i].is_negative()) {
            return witness(&[i]);
        }
        let Some(&p) = active.iter().find(|&&i| a[i][i].is_positive()) else {
            // all diagonals vanish but some row is nonzero
            let (i, j) = active
                .iter()
                .flat_map(|&i| active.iter().map(move |&j| (i, j)))
                .find(|&(i, j)| !a[i][j].is_zero())
                .expect("a nonzero active row");
            return witness(&[i, j]);
        };
        let rest: Vec<usize> = active.iter().copied().filter(|&i| i != p).collect();
        let app = a[p][p].clone();
        let mut next = a.clone();
        for &i in &rest {
            for &j in &rest {
                next[i][j] = (&app * &a[i][j] - &a[i][p] * &a[p][j]) / &prev;
            }
        }
        a = next;
        prev = app;
        pivots.push(p);
        active = rest;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StieltjesVerdict {
    /// Both Hankel forms the truncation supports are semidefinite.
    ConsistentUpToOrder(usize),
    Rejected { kind: HankelKind, indices: Vec<usize>, det: Rational },
}

impl StieltjesVerdict {
    pub fn is_consistent(&self) -> bool {
        matches!(self, StieltjesVerdict::ConsistentUpToOrder(_))
    }

    pub fn to_json(&self) -> Value {
        match self {
            StieltjesVerdict::ConsistentUpToOrder(n) => json!({ "status": "consistent", "order": n }),
            StieltjesVerdict::Rejected { kind, indices, det } => json!({
                "status": "rejected",
                "witness": { "form": kind.name(), "indices": indices, "det": format_rational(det) },
            }),
        }
    }
}

/// Tests `γ_0, …, γ_N` against both Hankel forms it determines.
pub fn stieltjes_truncated(gamma: &[Rational]) -> StieltjesVerdict {
    if gamma.is_empty() {
        return StieltjesVerdict::ConsistentUpToOrder(0);
    }
    let order = gamma.len() - 1;
    let mut forms = vec![(HankelKind::Plain, order / 2 + 1)];
    if order >= 1 {
        forms.push((HankelKind::Shifted, (order - 1) / 2 + 1));
    }
    for (kind, size) in forms {
        if let Psd::NotPsd { indices, det } = psd_exact(&hankel(gamma, kind, size)) {
            return StieltjesVerdict::Rejected { kind, indices, det };
        }
    }
    StieltjesVerdict::ConsistentUpToOrder(order)
}

/// Moments `1, t, …, t^N` of the point mass at `t`.
pub fn point_mass_moments(t: &Rational, order: usize) -> MomentSequence {
    (0..=order as u32).map(|n| pow(t, n)).collect()
}

/// `γ_n = Σ w_k t_kⁿ` for a finite combination of point masses `(w_k, t_k)`.
pub fn finite_atomic_moments(atoms: &[(Rational, Rational)], order: usize) -> MomentSequence {
    (0..=order as u32)
        .map(|n| atoms.iter().map(|(w, t)| w * pow(t, n)).sum())
        .collect()
}

/// `p(t) = t·|q₁(t)|² + |q₂(t)|²`, given by the coefficient lists of `q₁` and `q₂`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialPair {
    pub q1: Vec<ComplexRational>,
    pub q2: Vec<ComplexRational>,
}

/// Coefficients of `|q(t)|²` for real `t`.
fn abs_sq_poly(q: &[ComplexRational]) -> Vec<Rational> {
    if q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![Rational::zero(); 2 * q.len() - 1];
    for (a, qa) in q.iter().enumerate() {
        for (b, qb) in q.iter().enumerate() {
            // the imaginary parts cancel between (a, b) and (b, a)
            out[a + b] += (qa * qb.conj()).re;
        }
    }
    out
}

impl PolynomialPair {
    pub fn new(q1: Vec<ComplexRational>, q2: Vec<ComplexRational>) -> Self {
        PolynomialPair { q1, q2 }
    }

    /// Coefficients of `p`, constant term first.
    pub fn coefficients(&self) -> Vec<Rational> {
        let a = abs_sq_poly(&self.q1);
        let b = abs_sq_poly(&self.q2);
        let len = (a.len() + 1).max(b.len());
        let mut out = vec![Rational::zero(); len];
        for (k, c) in a.into_iter().enumerate() {
            out[k + 1] += c;
        }
        for (k, c) in b.into_iter().enumerate() {
            out[k] += c;
        }
        while out.last().is_some_and(Zero::is_zero) {
            out.pop();
        }
        out
    }

    pub fn eval(&self, t: &Rational) -> Rational {
        self.coefficients().iter().enumerate().map(|(k, c)| c * pow(t, k as u32)).sum()
    }
}

/// `L(p) = Σ_k p_k γ_k`; `None` when `p` needs more moments than given.
pub fn functional_l(gamma: &[Rational], coefficients: &[Rational]) -> Option<Rational> {
    if coefficients.len() > gamma.len() {
        return None;
    }
    Some(coefficients.iter().zip(gamma).map(|(c, g)| c * g).sum())
}

/// `L(p)(x) = Σ_k p_k h_{φᵏ}(x) ≥ 0` at every positive window atom.
pub fn functional_l_nonneg(space: &MeasureSpace, phi: &Transformation, pair: &PolynomialPair, window: &Window) -> Result<Verdict> {
    functional_l_nonneg_all(space, phi, std::slice::from_ref(pair), window)
}

/// [`functional_l_nonneg`] for every pair at once, reading each `h_{φᵏ}(x)` a single time.
pub fn functional_l_nonneg_all(
    space: &MeasureSpace,
    phi: &Transformation,
    pairs: &[PolynomialPair],
    window: &Window,
) -> Result<Verdict> {
    let coeffs: Vec<Vec<Rational>> = pairs.iter().map(PolynomialPair::coefficients).collect();
    let degree = coeffs.iter().map(Vec::len).max().unwrap_or(0);
    let mut pending = None;
    for x in window.positive_atoms(space)? {
        // h_{φᵏ}(x) for k < degree, `None` where it is not a certified finite value
        let mut gamma = Vec::with_capacity(degree);
        for k in 0..degree {
            let hv = h(space, phi, k as u32, &x, window)?;
            gamma.push(match (&hv.certainty, &hv.value) {
                (Certainty::Exact, ExtRational::Finite(v)) => Some(v.clone()),
                _ => None,
            });
        }
        for c in &coeffs {
            let mut value = Rational::zero();
            let mut usable = true;
            for (k, ck) in c.iter().enumerate().filter(|(_, ck)| !ck.is_zero()) {
                match &gamma[k] {
                    Some(v) => value += ck * v,
                    None => {
                        usable = false;
                        pending.get_or_insert(format!("h of power {k} at {x} is not a certified finite value"));
                        break;
                    }
                }
            }
            if usable && value.is_negative() {
                return Ok(Verdict::Fails(Witness::Negative { atom: x, value }));
            }
        }
    }
    Ok(match pending {
        Some(r) => Verdict::Inconclusive(r),
        None => Verdict::holds(window.exhaustive),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, real};

    fn ints(v: &[i64]) -> Vec<Rational> {
        v.iter().map(|&x| int(x)).collect()
    }

    fn mat(rows: &[&[i64]]) -> Matrix {
        rows.iter().map(|r| ints(r)).collect()
    }

    #[test]
    fn small_psd_decisions() {
        assert!(psd_exact(&mat(&[&[1, 1], &[1, 1]])).is_psd());
        assert_eq!(psd_exact(&mat(&[&[1, 2], &[2, 1]])), Psd::NotPsd { indices: vec![0, 1], det: int(-3) });
        assert!(psd_exact(&hankel(&ints(&[1, 2, 4, 8, 16]), HankelKind::Plain, 3)).is_psd());
        // zero diagonal against a nonzero entry
        assert_eq!(psd_exact(&mat(&[&[0, 1], &[1, 5]])), Psd::NotPsd { indices: vec![0, 1], det: int(-1) });
        assert!(psd_exact(&mat(&[&[0, 0], &[0, 0]])).is_psd());
    }

    #[test]
    fn truncated_stieltjes_examples() {
        assert!(stieltjes_truncated(&ints(&[1, 1, 1, 1, 1])).is_consistent());
        assert!(stieltjes_truncated(&ints(&[1, 2, 4, 8])).is_consistent());
        assert_eq!(
            stieltjes_truncated(&ints(&[1, 2, 1])),
            StieltjesVerdict::Rejected { kind: HankelKind::Plain, indices: vec![0, 1], det: int(-3) }
        );
    }

    #[test]
    fn moment_generators() {
        assert_eq!(point_mass_moments(&int(0), 3), ints(&[1, 0, 0, 0]));
        assert_eq!(point_mass_moments(&int(2), 4), ints(&[1, 2, 4, 8, 16]));
        assert_eq!(point_mass_moments(&rat(1, 2), 2), vec![int(1), rat(1, 2), rat(1, 4)]);
        assert_eq!(finite_atomic_moments(&[(int(1), int(0)), (int(1), int(1))], 2), ints(&[2, 1, 1]));
        assert_eq!(finite_atomic_moments(&[(rat(1, 2), int(1)), (rat(1, 2), int(3))], 2), ints(&[1, 2, 5]));
        assert_eq!(finite_atomic_moments(&[], 3), ints(&[0, 0, 0, 0]));
    }

    #[test]
    fn polynomial_pairs() {
        // t(t − 2)² = t³ − 4t² + 4t
        let p = PolynomialPair::new(vec![real(int(-2)), real(int(1))], vec![]);
        assert_eq!(p.coefficients(), ints(&[0, 4, -4, 1]));
        assert_eq!(p.eval(&int(2)), int(0));
        let one = PolynomialPair::new(vec![], vec![real(int(1))]);
        assert_eq!(functional_l(&ints(&[1, 5]), &one.coefficients()), Some(int(1)));
        // |1 + i t|² = 1 + t²
        let c = PolynomialPair::new(vec![], vec![real(int(1)), crate::exact::complex(int(0), int(1))]);
        assert_eq!(c.coefficients(), ints(&[1, 0, 1]));
    }
}
