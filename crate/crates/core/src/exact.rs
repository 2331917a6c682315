//! Exact scalars: rationals, complex rationals and the extended half-line `[0, ∞]`.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

pub type Rational = num_rational::BigRational;
pub type ComplexRational = num_complex::Complex<Rational>;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn complex(re: Rational, im: Rational) -> ComplexRational {
    ComplexRational::new(re, im)
}

pub fn real(re: Rational) -> ComplexRational {
    ComplexRational::new(re, Rational::zero())
}

pub fn complex_zero() -> ComplexRational {
    ComplexRational::new(Rational::zero(), Rational::zero())
}

/// `|z|²` as an exact rational.
pub fn abs_sq(z: &ComplexRational) -> Rational {
    &z.re * &z.re + &z.im * &z.im
}

pub fn is_complex_zero(z: &ComplexRational) -> bool {
    z.re.is_zero() && z.im.is_zero()
}

/// Parses `"p/q"`, `"p"` or a decimal-free integer into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational, Error> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not an exact rational: {s:?}"));
    match s.split_once('/') {
        Some((num, den)) => {
            let num = BigInt::from_str(num.trim()).map_err(|_| bad())?;
            let den = BigInt::from_str(den.trim()).map_err(|_| bad())?;
            if den.is_zero() {
                return Err(Error::Parse(format!("zero denominator in {s:?}")));
            }
            Ok(Rational::new(num, den))
        }
        None => BigInt::from_str(s).map(Rational::from_integer).map_err(|_| bad()),
    }
}

/// Canonical string form used in every serialized document: `"p/q"`, or `"p"` for integers.
pub fn format_rational(r: &Rational) -> String {
    r.to_string()
}

/// Formats a complex rational as `"re"` when real, else `"re+imi"`.
pub fn format_complex(z: &ComplexRational) -> String {
    if z.im.is_zero() {
        return format_rational(&z.re);
    }
    let sign = if z.im.is_negative() { "-" } else { "+" };
    format!("{}{}{}i", format_rational(&z.re), sign, format_rational(&z.im.abs()))
}

/// Parses the output of [`format_complex`], plus the bare forms `"3/2i"` and `"-i"`.
pub fn parse_complex(s: &str) -> Result<ComplexRational, Error> {
    let s = s.trim();
    let Some(body) = s.strip_suffix('i') else {
        return Ok(real(parse_rational(s)?));
    };
    // split at the last sign that is not in leading position
    let split = body
        .char_indices()
        .skip(1)
        .filter(|&(_, c)| c == '+' || c == '-')
        .map(|(i, _)| i)
        .last();
    let (re, im) = match split {
        Some(i) => (parse_rational(&body[..i])?, &body[i..]),
        None => (Rational::zero(), body),
    };
    let im = match im {
        "" | "+" => Rational::one(),
        "-" => -Rational::one(),
        other => parse_rational(other.trim_start_matches('+'))?,
    };
    Ok(complex(re, im))
}

/// A value in `[0, ∞]` (or a finite rational of either sign where needed).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum ExtRational {
    Finite(Rational),
    Infinite,
}

impl ExtRational {
    pub fn zero() -> Self {
        ExtRational::Finite(Rational::zero())
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtRational::Infinite)
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtRational::Finite(r) if r.is_zero())
    }

    pub fn finite(&self) -> Option<&Rational> {
        match self {
            ExtRational::Finite(r) => Some(r),
            ExtRational::Infinite => None,
        }
    }

    pub fn add(&self, other: &ExtRational) -> ExtRational {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => ExtRational::Finite(a + b),
            _ => ExtRational::Infinite,
        }
    }

    /// Product on `[0, ∞]`; `None` for the indeterminate `∞·0`.
    pub fn mul(&self, other: &ExtRational) -> Option<ExtRational> {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => Some(ExtRational::Finite(a * b)),
            (ExtRational::Infinite, x) | (x, ExtRational::Infinite) => {
                if x.is_zero() {
                    None
                } else {
                    Some(ExtRational::Infinite)
                }
            }
        }
    }
}

impl PartialOrd for ExtRational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtRational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtRational::Finite(a), ExtRational::Finite(b)) => a.cmp(b),
            (ExtRational::Finite(_), ExtRational::Infinite) => Ordering::Less,
            (ExtRational::Infinite, ExtRational::Finite(_)) => Ordering::Greater,
            (ExtRational::Infinite, ExtRational::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtRational::Finite(r) => write!(f, "{}", format_rational(r)),
            ExtRational::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for ExtRational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "+inf" | "∞" => Ok(ExtRational::Infinite),
            other => parse_rational(other).map(ExtRational::Finite),
        }
    }
}

impl From<Rational> for ExtRational {
    fn from(r: Rational) -> Self {
        ExtRational::Finite(r)
    }
}

/// Writes `√r` for a nonnegative rational as `c·√t` with `t` a squarefree integer.
pub fn sqrt_canonical(r: &Rational) -> (Rational, BigUint) {
    assert!(!r.is_negative(), "square root of a negative rational");
    if r.is_zero() {
        return (Rational::zero(), BigUint::one());
    }
    // √(p/q) = √(p·q)/q
    let pq = (r.numer() * r.denom()).to_biguint().expect("nonnegative");
    let (square, free) = split_square(&pq);
    let coeff = Rational::new(BigInt::from(square), r.denom().clone());
    (coeff, free)
}

/// Splits `n = s²·t` with `t` squarefree, by trial division.
fn split_square(n: &BigUint) -> (BigUint, BigUint) {
    let mut rest = n.clone();
    let mut square = BigUint::one();
    let mut free = BigUint::one();
    let mut p = BigUint::from(2u32);
    while &p * &p <= rest {
        let mut e = 0u32;
        while (&rest % &p).is_zero() {
            rest /= &p;
            e += 1;
        }
        if e > 0 {
            square *= p.pow(e / 2);
            if e % 2 == 1 {
                free *= &p;
            }
        }
        p += 1u32;
    }
    free *= rest;
    (square, free)
}

/// `base^exp` for a rational base, with `0⁰ = 1`.
pub fn pow(base: &Rational, exp: u32) -> Rational {
    let mut acc = Rational::one();
    for _ in 0..exp {
        acc *= base;
    }
    acc
}

/// Least common multiple of the denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values
        .into_iter()
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
