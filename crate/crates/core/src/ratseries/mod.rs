//! Exact rational scalars, sparse monomials and series containers.
//!
//! Every symbolic quantity in the crate lives in a [`Series`]: a sparse map
//! from [`Monomial`] to an exact [`Rational`] coefficient. Series come in two
//! flavours, tagged by [`Space`]:
//!
//! - phase-space series in `q`, `x` and `1/p`, which hold local arrival
//!   times and transform outputs;
//! - kernel-space series in `u = q + q'` and `v = q - q'`, which hold
//!   solutions of the time kernel equation.
//!
//! Both carry powers of the mass `mu`, of `hbar` and of named potential
//! parameters. Terms are kept in a fixed total order so that serialized
//! output is byte-deterministic.

mod json;
mod monomial;
mod series;

pub use json::{SeriesJson, TermJson};
pub use monomial::{Monomial, Var, Vars};
pub use series::{Assignment, EvalPoint, Series, Space};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision fraction in lowest terms with a positive denominator.
pub type Rational = BigRational;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn factorial(n: u32) -> Rational {
    let mut acc = BigInt::one();
    for k in 2..=n {
        acc *= k;
    }
    Rational::from_integer(acc)
}

pub fn binomial(n: u32, k: u32) -> Rational {
    if k > n {
        return Rational::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for j in 0..k {
        acc = acc * (n - j) / (j + 1);
    }
    Rational::from_integer(acc)
}

pub fn pow(base: &Rational, exp: i32) -> Rational {
    if exp >= 0 {
        num_traits::pow(base.clone(), exp as usize)
    } else {
        num_traits::pow(base.recip(), exp.unsigned_abs() as usize)
    }
}

/// Always `num/den`, including a unit denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Accepts `a`, `-a` or `a/b` with integer `a`, `b`.
pub fn parse_rational(text: &str) -> Result<Rational> {
    let bad = |msg: &str| Error::Parse {
        pos: 0,
        msg: format!("{msg}: `{text}`"),
    };
    let text = text.trim();
    let (num, den) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad("invalid numerator"))?;
    let den: BigInt = den.parse().map_err(|_| bad("invalid denominator"))?;
    if den.is_zero() {
        return Err(bad("zero denominator"));
    }
    Ok(Rational::new(num, den))
}

pub fn to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Huge numerators and denominators: scale both down before dividing.
    let n = r.numer();
    let d = r.denom();
    let shift = n.bits().max(d.bits()).saturating_sub(1000);
    let n = (n.abs() >> shift).to_f64().unwrap_or(f64::INFINITY);
    let d = (d >> shift).to_f64().unwrap_or(f64::INFINITY);
    let v = n / d;
    if r.is_negative() {
        -v
    } else {
        v
    }
}

/// Lowest-terms check used by property tests.
pub fn is_canonical(r: &Rational) -> bool {
    r.denom().is_positive()
        && r.numer().gcd(r.denom()).is_one()
        && (!r.numer().is_zero() || r.denom().is_one())
}
