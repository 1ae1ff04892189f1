//! Exact arithmetic kernel.
//!
//! Rationals are GMP-backed [`rug::Rational`] values, always in lowest terms.
//! [`PiPoly`] is the ring ℚ[χ] with χ = 1/π: every exact fraction and every
//! Green-matrix entry on the square lattice lives here. Numeric evaluation
//! uses MPFR floats ([`BigFloat`]) at a caller-chosen precision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use rug::float::Constant;
use rug::ops::Pow;
use rug::{Float, Integer};

use crate::error::{Error, Result};

pub use rug::Rational;

/// Configurable-precision binary floating point (MPFR).
pub type BigFloat = Float;

/// Default mantissa precision in bits.
pub const DEFAULT_PRECISION: u32 = 256;

/// Smallest precision accepted by the numeric paths.
pub const MIN_PRECISION: u32 = 53;

/// Extra bits carried by internal evaluations.
const GUARD_BITS: u32 = 32;

pub fn pi(prec: u32) -> BigFloat {
    Float::with_val(prec, Constant::Pi)
}

/// χ = 1/π at `prec` bits.
pub fn chi(prec: u32) -> BigFloat {
    let p = pi(prec + GUARD_BITS);
    Float::with_val(prec, p.recip_ref())
}

pub fn catalan(prec: u32) -> BigFloat {
    Float::with_val(prec, Constant::Catalan)
}

pub fn check_precision(prec: u32) -> Result<()> {
    if prec < MIN_PRECISION {
        return Err(Error::InvalidArgument(format!(
            "precision {prec} is below the minimum of {MIN_PRECISION} bits"
        )));
    }
    Ok(())
}

/// Significant decimal digits carried by `prec` bits.
pub fn decimal_digits(prec: u32) -> usize {
    ((prec as f64) * std::f64::consts::LOG10_2).floor().max(1.0) as usize
}

/// Decimal text with at most `digits` significant digits, trailing zeros
/// trimmed; scientific notation outside `1e-6 ≤ |v| < 1e21`.
pub fn to_decimal(v: &BigFloat, digits: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v.is_sign_negative() { "-inf".into() } else { "inf".into() };
    }
    if v.is_zero() {
        return "0".into();
    }
    let (neg, mut ds, exp) = v.to_sign_string_exp(10, Some(digits.max(1)));
    let exp = exp.expect("finite nonzero value");
    while ds.len() > 1 && ds.ends_with('0') {
        ds.pop();
    }
    let sign = if neg { "-" } else { "" };
    let n = ds.len() as i32;
    let body = if (-5..=21).contains(&exp) {
        if exp <= 0 {
            format!("0.{}{}", "0".repeat((-exp) as usize), ds)
        } else if exp >= n {
            format!("{}{}", ds, "0".repeat((exp - n) as usize))
        } else {
            format!("{}.{}", &ds[..exp as usize], &ds[exp as usize..])
        }
    } else if n == 1 {
        format!("{}e{}", ds, exp - 1)
    } else {
        format!("{}.{}e{}", &ds[..1], &ds[1..], exp - 1)
    };
    format!("{sign}{body}")
}

/// Parses `num/den` or a plain integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let parsed = match t.split_once('/') {
        Some((n, d)) => {
            let n: Integer = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in {t:?}")))?;
            let d: Integer = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in {t:?}")))?;
            if d == 0 {
                return Err(Error::DivisionByZero);
            }
            Rational::from((n, d))
        }
        None => Rational::from(
            t.parse::<Integer>()
                .map_err(|_| Error::Parse(format!("bad rational {t:?}")))?,
        ),
    };
    Ok(parsed)
}

/// Element of ℚ[χ], χ = 1/π, stored as coefficients of ascending powers of χ.
///
/// The coefficient vector never has a trailing zero; the zero polynomial is
/// the empty vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct PiPoly {
    coeffs: Vec<Rational>,
}

impl PiPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self::constant(Rational::from(1))
    }

    pub fn constant(c: Rational) -> Self {
        Self::from_coeffs(vec![c])
    }

    /// `c·χ^power`.
    pub fn monomial(c: Rational, power: usize) -> Self {
        let mut coeffs = vec![Rational::new(); power + 1];
        coeffs[power] = c;
        Self::from_coeffs(coeffs)
    }

    /// `a + b·χ`.
    pub fn linear(a: Rational, b: Rational) -> Self {
        Self::from_coeffs(vec![a, b])
    }

    pub fn from_coeffs(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(|c| *c == 0) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    /// Coefficient of χ^k (zero beyond the degree).
    pub fn coeff(&self, k: usize) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree in χ; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn scale(&self, k: &Rational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|c| Rational::from(c * k)).collect())
    }

    /// Divides every coefficient by the integer `k`.
    pub fn div_exact_int(&self, k: &Integer) -> Result<Self> {
        if *k == 0 {
            return Err(Error::DivisionByZero);
        }
        let inv = Rational::from((Integer::from(1), k.clone()));
        Ok(self.scale(&inv))
    }

    /// Σ cᵢ·π^{-i} rounded to `prec` bits (clamped below at 53).
    pub fn eval(&self, prec: u32) -> BigFloat {
        let prec = prec.max(MIN_PRECISION);
        let work = prec + GUARD_BITS + 2 * self.coeffs.len() as u32;
        let x = chi(work);
        let mut acc = Float::with_val(work, 0);
        for c in self.coeffs.iter().rev() {
            acc *= &x;
            acc += c;
        }
        Float::with_val(prec, &acc)
    }

    pub fn eval_f64(&self) -> f64 {
        self.eval(MIN_PRECISION).to_f64()
    }
}

impl From<Rational> for PiPoly {
    fn from(c: Rational) -> Self {
        Self::constant(c)
    }
}

impl From<i64> for PiPoly {
    fn from(c: i64) -> Self {
        Self::constant(Rational::from(c))
    }
}

impl Add<&PiPoly> for &PiPoly {
    type Output = PiPoly;
    fn add(self, rhs: &PiPoly) -> PiPoly {
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| match (self.coeffs.get(i), rhs.coeffs.get(i)) {
                (Some(a), Some(b)) => Rational::from(a + b),
                (Some(a), None) => a.clone(),
                (None, Some(b)) => b.clone(),
                (None, None) => unreachable!(),
            })
            .collect();
        PiPoly::from_coeffs(coeffs)
    }
}

impl Sub<&PiPoly> for &PiPoly {
    type Output = PiPoly;
    fn sub(self, rhs: &PiPoly) -> PiPoly {
        self + &(-rhs)
    }
}

impl Neg for &PiPoly {
    type Output = PiPoly;
    fn neg(self) -> PiPoly {
        PiPoly {
            coeffs: self.coeffs.iter().map(|c| Rational::from(-c)).collect(),
        }
    }
}

impl Mul<&PiPoly> for &PiPoly {
    type Output = PiPoly;
    fn mul(self, rhs: &PiPoly) -> PiPoly {
        if self.is_zero() || rhs.is_zero() {
            return PiPoly::zero();
        }
        let mut coeffs = vec![Rational::new(); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if *a == 0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                coeffs[i + j] += Rational::from(a * b);
            }
        }
        PiPoly::from_coeffs(coeffs)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<PiPoly> for PiPoly {
            type Output = PiPoly;
            fn $m(self, rhs: PiPoly) -> PiPoly {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&PiPoly> for PiPoly {
            type Output = PiPoly;
            fn $m(self, rhs: &PiPoly) -> PiPoly {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for PiPoly {
    type Output = PiPoly;
    fn neg(self) -> PiPoly {
        -&self
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, r: &Rational) -> fmt::Result {
    if *r.denom() == 1 {
        write!(f, "{}", r.numer())
    } else {
        write!(f, "{}/{}", r.numer(), r.denom())
    }
}

/// `a0 + a1/pi + a2/pi^2 + …`, zero terms omitted, negative terms joined
/// with ` - `. The zero polynomial prints as `0`.
impl fmt::Display for PiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if *c == 0 {
                continue;
            }
            let mag = if first {
                if *c < 0 {
                    write!(f, "-")?;
                }
                c.clone().abs()
            } else {
                write!(f, "{}", if *c < 0 { " - " } else { " + " })?;
                c.clone().abs()
            };
            first = false;
            write_rational(f, &mag)?;
            match k {
                0 => {}
                1 => write!(f, "/pi")?,
                _ => write!(f, "/pi^{k}")?,
            }
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl FromStr for PiPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Err(Error::Parse("empty polynomial".into()));
        }
        // Split into signed terms on top-level ' + ' / ' - ' and leading sign.
        let mut terms: Vec<(bool, String)> = Vec::new();
        let mut negative = false;
        let mut current = String::new();
        let mut chars = s.chars().peekable();
        if let Some(&c) = chars.peek() {
            if c == '-' || c == '+' {
                negative = c == '-';
                chars.next();
            }
        }
        for c in chars {
            if (c == '+' || c == '-') && !current.trim().is_empty() && !current.ends_with('^') {
                terms.push((negative, std::mem::take(&mut current)));
                negative = c == '-';
            } else {
                current.push(c);
            }
        }
        terms.push((negative, current));

        let mut acc = PiPoly::zero();
        for (neg, term) in terms {
            let term: String = term.chars().filter(|c| !c.is_whitespace()).collect();
            if term.is_empty() {
                return Err(Error::Parse(format!("empty term in {s:?}")));
            }
            let (coef, power) = if let Some(idx) = term.find("/pi") {
                let rest = &term[idx + 3..];
                let power = if rest.is_empty() {
                    1
                } else if let Some(p) = rest.strip_prefix('^') {
                    p.parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad exponent in {term:?}")))?
                } else {
                    return Err(Error::Parse(format!("bad term {term:?}")));
                };
                (&term[..idx], power)
            } else {
                (term.as_str(), 0)
            };
            let mut c = parse_rational(coef)?;
            if neg {
                c = -c;
            }
            acc = acc + PiPoly::monomial(c, power);
        }
        Ok(acc)
    }
}

/// `base^exp` for a rational base.
pub fn rational_pow(base: &Rational, exp: u32) -> Rational {
    Rational::from(base.pow(exp))
}
