//! Exact rational scalars and the small amount of vector arithmetic the
//! engine needs.
//!
//! Every number in the decision path is a [`Rational`]. Textual form is
//! `"p"`, `"-p"` or `"p/q"` with `q > 0`; nothing else is accepted.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserializer, Serializer};

pub type Rational = BigRational;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid rational literal {literal:?}: {reason}")]
pub struct ParseRationalError {
    pub literal: String,
    pub reason: &'static str,
}

fn parse_integer(s: &str, literal: &str) -> Result<BigInt, ParseRationalError> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ParseRationalError {
            literal: literal.to_string(),
            reason: "expected an integer numerator/denominator",
        });
    }
    s.parse::<BigInt>().map_err(|_| ParseRationalError {
        literal: literal.to_string(),
        reason: "integer out of range",
    })
}

/// Parses `"p"`, `"-p"` or `"p/q"` exactly.
pub fn parse_rational(literal: &str) -> Result<Rational, ParseRationalError> {
    let s = literal.trim();
    match s.split_once('/') {
        None => Ok(Rational::from_integer(parse_integer(s, literal)?)),
        Some((num, den)) => {
            let numer = parse_integer(num, literal)?;
            if den.starts_with('-') {
                return Err(ParseRationalError {
                    literal: literal.to_string(),
                    reason: "denominator must be positive",
                });
            }
            let denom = parse_integer(den, literal)?;
            if denom.is_zero() {
                return Err(ParseRationalError {
                    literal: literal.to_string(),
                    reason: "zero denominator",
                });
            }
            Ok(Rational::new(numer, denom))
        }
    }
}

/// Canonical textual form (`"3"`, `"-1/2"`).
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Integer vector as rationals.
pub fn ints(vs: &[i64]) -> Vec<Rational> {
    vs.iter().map(|&v| int(v)).collect()
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

pub fn sum(a: &[Rational]) -> Rational {
    a.iter().fold(Rational::zero(), |acc, x| acc + x)
}

pub fn scale(a: &[Rational], k: &Rational) -> Vec<Rational> {
    a.iter().map(|x| x * k).collect()
}

pub fn add(a: &[Rational], b: &[Rational]) -> Vec<Rational> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

pub fn is_zero_vec(a: &[Rational]) -> bool {
    a.iter().all(Zero::is_zero)
}

/// Matrix-vector product for row-major matrices.
pub fn mat_vec(m: &[Vec<Rational>], v: &[Rational]) -> Vec<Rational> {
    m.iter().map(|row| dot(row, v)).collect()
}

/// `yᵀ M` for row-major `M`.
pub fn vec_mat(y: &[Rational], m: &[Vec<Rational>], cols: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); cols];
    for (yi, row) in y.iter().zip(m) {
        if yi.is_zero() {
            continue;
        }
        for (o, r) in out.iter_mut().zip(row) {
            *o += yi * r;
        }
    }
    out
}

/// Rescales `d` so its coordinate sum is `-1`. Returns `None` unless the
/// sum is strictly negative.
pub fn normalize_budget(d: &[Rational]) -> Option<Vec<Rational>> {
    let s = sum(d);
    if s.is_negative() {
        let k = -s.recip();
        Some(scale(d, &k))
    } else {
        None
    }
}

/// Divides by the largest absolute coordinate. Zero vectors pass through.
pub fn normalize_max_abs(d: &[Rational]) -> Vec<Rational> {
    let m = d
        .iter()
        .map(|x| x.abs())
        .max()
        .unwrap_or_else(Rational::zero);
    if m.is_zero() || m.is_one() {
        d.to_vec()
    } else {
        let k = m.recip();
        scale(d, &k)
    }
}

/// Display adapter for a rational slice: `[1, -1/2, 0]`.
pub struct Show<'a>(pub &'a [Rational]);

impl fmt::Display for Show<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, q) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(&format_rational(q))?;
        }
        f.write_str("]")
    }
}

struct RationalVisitor;

impl<'de> Visitor<'de> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("an integer or a rational string \"p/q\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational::from_integer(BigInt::from(v)))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        Err(E::custom(format!(
            "floating-point literal {v} is not accepted; write it as a rational string"
        )))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        parse_rational(v).map_err(E::custom)
    }
}

/// `#[serde(with = "crate::rational::serde_rational")]`
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(q: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rational(q))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        d.deserialize_any(RationalVisitor)
    }
}

/// Serde adapter for `Vec<Rational>`.
pub mod serde_vec {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Wrapped(#[serde(with = "serde_rational")] Rational);

    pub fn serialize<S: Serializer>(v: &[Rational], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<Wrapped> = v.iter().cloned().map(Wrapped).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Rational>, D::Error> {
        let w = Vec::<Wrapped>::deserialize(d)?;
        Ok(w.into_iter().map(|x| x.0).collect())
    }
}

/// Serde adapter for row-major rational matrices.
pub mod serde_matrix {
    use super::*;
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize)]
    #[serde(transparent)]
    struct Row(#[serde(with = "serde_vec")] Vec<Rational>);

    pub fn serialize<S: Serializer>(m: &[Vec<Rational>], s: S) -> Result<S::Ok, S::Error> {
        let w: Vec<Row> = m.iter().cloned().map(Row).collect();
        w.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Vec<Rational>>, D::Error> {
        let w = Vec::<Row>::deserialize(d)?;
        Ok(w.into_iter().map(|x| x.0).collect())
    }
}
