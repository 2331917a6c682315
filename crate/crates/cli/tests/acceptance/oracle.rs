//! Brute-force reference computations on finite spaces, written against plain
//! vectors so they share nothing with the library's algorithms.

use compop::exact::ComplexRational;
use compop::l2ops::Vector;
use compop::{AtomId, MeasureSpace, Rational, Transformation};
use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Signed, Zero};
use rand::Rng;

pub type C = ComplexRational;

/// A finite space as index arrays: atom `i` has mass `mass[i]` and `φ(i) = map[i]`.
pub struct Finite {
    pub ids: Vec<AtomId>,
    pub mass: Vec<Rational>,
    pub map: Vec<usize>,
}

impl Finite {
    pub fn from_library(space: &MeasureSpace, phi: &Transformation) -> Finite {
        let ids = space.window(1).atoms;
        let mass = ids.iter().map(|a| space.mass(a).unwrap()).collect();
        let map = ids.iter().map(|a| ids.iter().position(|b| *b == phi.image(a)).unwrap()).collect();
        Finite { ids, mass, map }
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn positive(&self, i: usize) -> bool {
        !self.mass[i].is_zero()
    }

    pub fn iterate(&self, mut x: usize, n: u32) -> usize {
        for _ in 0..n {
            x = self.map[x];
        }
        x
    }

    /// A positive atom mapped onto a null one, if any.
    pub fn singular(&self) -> bool {
        (0..self.len()).any(|x| self.positive(x) && !self.positive(self.map[x]))
    }

    /// `μ(φ⁻ⁿ{y}) / μ{y}` by scanning every atom; `None` on null atoms.
    pub fn h(&self, n: u32, y: usize) -> Option<Rational> {
        if !self.positive(y) {
            return None;
        }
        let total: Rational = (0..self.len()).filter(|&x| self.iterate(x, n) == y).map(|x| self.mass[x].clone()).sum();
        Some(total / &self.mass[y])
    }

    pub fn cphi(&self, f: &[C]) -> Vec<C> {
        (0..self.len()).map(|x| f[self.map[x]].clone()).collect()
    }

    /// `(C_φ* g)(y) = Σ_{φ(x) = y} g(x) μ(x) / μ(y)` on positive `y`.
    pub fn adjoint(&self, g: &[C]) -> Vec<C> {
        (0..self.len())
            .map(|y| {
                if !self.positive(y) {
                    return C::zero();
                }
                let mut acc = C::zero();
                for x in (0..self.len()).filter(|&x| self.map[x] == y) {
                    acc += g[x].clone() * real(&self.mass[x]);
                }
                acc / real(&self.mass[y])
            })
            .collect()
    }

    pub fn inner(&self, f: &[C], g: &[C]) -> C {
        let mut acc = C::zero();
        for i in 0..self.len() {
            acc += f[i].clone() * g[i].conj() * real(&self.mass[i]);
        }
        acc
    }

    pub fn norm_sq(&self, f: &[C]) -> Rational {
        self.inner(f, f).re
    }

    pub fn to_vector(&self, f: &[C]) -> Vector {
        Vector::from_entries(self.ids.iter().cloned().zip(f.iter().cloned()))
    }

    pub fn values_of(&self, v: &Vector) -> Vec<C> {
        self.ids.iter().map(|a| v.get(a)).collect()
    }

    /// Equality in `L²`: values on null atoms are ignored.
    pub fn l2_eq(&self, f: &[C], g: &[C]) -> bool {
        (0..self.len()).all(|i| !self.positive(i) || f[i] == g[i])
    }

    pub fn basis(&self, i: usize) -> Vec<C> {
        (0..self.len()).map(|j| if i == j { real(&Rational::from_integer(1.into())) } else { C::zero() }).collect()
    }
}

pub fn real(r: &Rational) -> C {
    Complex::new(r.clone(), Rational::zero())
}

/// Entries `a/b + (c/d)i` with `a, c ∈ {-2..2}` and `b, d ∈ {1, 2, 3}`.
pub fn random_vector(rng: &mut impl Rng, len: usize) -> Vec<C> {
    let entry = |rng: &mut dyn rand::RngCore| {
        Rational::new(BigInt::from(rng.gen_range(-2i64..=2)), BigInt::from(rng.gen_range(1i64..=3)))
    };
    (0..len).map(|_| Complex::new(entry(rng), entry(rng))).collect()
}

/// Exact determinant by cofactor expansion along the first row.
pub fn cofactor_det(m: &[Vec<Rational>]) -> Rational {
    match m.len() {
        0 => Rational::from_integer(1.into()),
        1 => m[0][0].clone(),
        n => {
            let mut acc = Rational::zero();
            for col in 0..n {
                if m[0][col].is_zero() {
                    continue;
                }
                let minor: Vec<Vec<Rational>> =
                    m[1..].iter().map(|row| row.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, v)| v.clone()).collect()).collect();
                let term = &m[0][col] * cofactor_det(&minor);
                if col % 2 == 0 {
                    acc += term;
                } else {
                    acc -= term;
                }
            }
            acc
        }
    }
}

pub fn principal(m: &[Vec<Rational>], idx: &[usize]) -> Vec<Vec<Rational>> {
    idx.iter().map(|&i| idx.iter().map(|&j| m[i][j].clone()).collect()).collect()
}

/// Semidefinite iff every principal minor is nonnegative.
pub fn brute_force_psd(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    (1u32..(1 << n)).all(|mask| {
        let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
        !cofactor_det(&principal(m, &idx)).is_negative()
    })
}
