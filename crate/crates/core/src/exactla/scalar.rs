//! Scalar field abstraction and helpers for the default big-rational scalar.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, Num, One, Signed, Zero};

/// Arbitrary-precision rational, always stored in lowest terms with a
/// positive denominator.
pub type Rational = BigRational;

/// Dense vector over the rationals.
pub type QVector = Vec<Rational>;

/// An ordered field with exact arithmetic.
///
/// Every routine in [`crate::exactla`] is generic over this trait. It is
/// blanket-implemented for anything that looks like an exact ordered field,
/// which in practice means [`BigRational`] and the fixed-width
/// `num_rational::Ratio<i64>` / `Ratio<i128>`. Floating point types do not
/// qualify: they are not `Ord`, and cone equality or strict inequalities are
/// meaningless under rounding anyway.
pub trait Field:
    Clone + fmt::Debug + fmt::Display + Ord + Num + Signed + FromPrimitive + Send + Sync + 'static
{
}

impl<T> Field for T where
    T: Clone + fmt::Debug + fmt::Display + Ord + Num + Signed + FromPrimitive + Send + Sync + 'static
{
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn from_bigint(n: &BigInt) -> Rational {
    Rational::from_integer(n.clone())
}

pub fn qvec(entries: &[i64]) -> QVector {
    entries.iter().map(|&e| int(e)).collect()
}

pub fn qvec_from_ints(entries: &[BigInt]) -> QVector {
    entries.iter().map(from_bigint).collect()
}

/// Parses `"p/q"`, `"p"` or `"-p/q"` into a reduced rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(Rational::new(p, q))
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// Canonical `"p/q"` rendering (`"p"` for integers).
pub fn format_rational(q: &Rational) -> String {
    q.to_string()
}

/// Scales a rational vector to the primitive integer vector pointing the
/// same way (entries coprime). The zero vector maps to zeros.
pub fn primitive_integer(v: &[Rational]) -> Vec<BigInt> {
    let lcm = v
        .iter()
        .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let scaled: Vec<BigInt> = v.iter().map(|x| x.numer() * (&lcm / x.denom())).collect();
    let g = scaled.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return scaled;
    }
    scaled.into_iter().map(|x| x / &g).collect()
}

/// Same direction as `v`, rescaled to coprime integers.
pub fn primitive_direction(v: &[Rational]) -> QVector {
    qvec_from_ints(&primitive_integer(v))
}

/// Divides by the absolute value of the first nonzero entry. Works over any
/// [`Field`]; used where integer rescaling is unavailable.
pub fn normalize_direction<F: Field>(v: &mut [F]) {
    if let Some(lead) = v.iter().find(|x| !x.is_zero()).map(|x| x.abs()) {
        for x in v.iter_mut() {
            *x = x.clone() / lead.clone();
        }
    }
}

pub fn gcd_of(v: &[BigInt]) -> BigInt {
    v.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

pub fn field_from_i64<F: Field>(n: i64) -> F {
    F::from_i64(n).expect("every field embeds the integers")
}
