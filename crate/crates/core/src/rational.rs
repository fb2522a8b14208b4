//! Exact rational scalars used by the three-state closed forms.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Exact rational number. `i128` leaves ample headroom for the
/// small-denominator arithmetic of the three-state model.
pub type Q = Ratio<i128>;

pub fn q(num: i128, den: i128) -> Q {
    Q::new(num, den)
}

pub fn qi(n: i128) -> Q {
    Q::from_integer(n)
}

pub fn to_f64(v: &Q) -> f64 {
    v.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"7"`, `"-9/5"` or a finite decimal such as `"1.25"`.
pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = i128::from_str(n.trim()).map_err(|_| bad(s))?;
        let d = i128::from_str(d.trim()).map_err(|_| bad(s))?;
        if d == 0 {
            return Err(Error::InvalidInput(format!("zero denominator in {s:?}")));
        }
        return Ok(Q::new(n, d));
    }
    if let Ok(n) = i128::from_str(s) {
        return Ok(Q::from_integer(n));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int, frac) = body.split_once('.').ok_or_else(|| bad(s))?;
    if frac.len() > 18 || !frac.chars().all(|c| c.is_ascii_digit()) {
        return Err(bad(s));
    }
    let int: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad(s))? };
    let den = 10i128.pow(frac.len() as u32);
    let frac: i128 = if frac.is_empty() { 0 } else { frac.parse().map_err(|_| bad(s))? };
    let v = Q::new(int * den + frac, den);
    Ok(if neg { -v } else { v })
}

/// Closest rational with denominator at most 10^9 (continued fractions).
/// Exact for binary fractions like 0.5 and short decimals like 0.1.
pub fn from_f64(x: f64) -> Result<Q> {
    if !x.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite value {x}")));
    }
    parse_q(&format!("{x}"))
        .or_else(|_| Q::approximate_float(x).ok_or_else(|| Error::InvalidInput(format!("cannot represent {x}"))))
}

fn bad(s: &str) -> Error {
    Error::InvalidInput(format!("cannot parse {s:?} as a rational"))
}

/// Formats as `"p/q"` (or `"p"` for integers).
pub fn fmt_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Formats with 15 significant digits.
pub fn fmt_decimal(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let s = format!("{:.*e}", 14, x);
    let v: f64 = s.parse().unwrap_or(x);
    format!("{v}")
}

/// Wrapper that (de)serializes a rational as a `"p/q"` string and also
/// accepts plain JSON numbers on input.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exact(pub Q);

impl fmt::Display for Exact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&fmt_q(&self.0))
    }
}

impl Serialize for Exact {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_q(&self.0))
    }
}

impl<'de> Deserialize<'de> for Exact {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Int(i) => Ok(Exact(Q::from_integer(i as i128))),
            NumOrStr::Num(x) => from_f64(x).map(Exact).map_err(de::Error::custom),
            NumOrStr::Str(s) => parse_q(&s).map(Exact).map_err(de::Error::custom),
        }
    }
}

/// A JSON number or a `"p/q"` string, decoded to `f64`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Real(pub f64);

impl<'de> Deserialize<'de> for Real {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match NumOrStr::deserialize(d)? {
            NumOrStr::Int(i) => Ok(Real(i as f64)),
            NumOrStr::Num(x) => Ok(Real(x)),
            NumOrStr::Str(s) => parse_q(&s).map(|v| Real(to_f64(&v))).map_err(de::Error::custom),
        }
    }
}

impl Serialize for Real {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_f64(self.0)
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum NumOrStr {
    Int(i64),
    Num(f64),
    Str(String),
}

pub fn abs(v: &Q) -> Q {
    v.abs()
}

pub fn is_zero(v: &Q) -> bool {
    v.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_q("9/5").unwrap(), q(9, 5));
        assert_eq!(parse_q("-3").unwrap(), qi(-3));
        assert_eq!(parse_q("1.25").unwrap(), q(5, 4));
        assert_eq!(parse_q("-0.5").unwrap(), q(-1, 2));
        assert!(parse_q("1/0").is_err());
        assert!(parse_q("abc").is_err());
    }

    #[test]
    fn float_conversion_is_exact_for_short_decimals() {
        assert_eq!(from_f64(0.1).unwrap(), q(1, 10));
        assert_eq!(from_f64(3.5).unwrap(), q(7, 2));
    }

    #[test]
    fn formats() {
        assert_eq!(fmt_q(&q(18, 10)), "9/5");
        assert_eq!(fmt_q(&qi(2)), "2");
        assert_eq!(fmt_decimal(1.0 / 3.0), "0.333333333333333");
        assert_eq!(fmt_decimal(2.0), "2");
    }

    #[test]
    fn exact_json_accepts_numbers_and_strings() {
        let v: Vec<Exact> = serde_json::from_str(r#"[1, "2/3", 0.5]"#).unwrap();
        assert_eq!(v, vec![Exact(qi(1)), Exact(q(2, 3)), Exact(q(1, 2))]);
        assert_eq!(serde_json::to_string(&Exact(q(9, 5))).unwrap(), r#""9/5""#);
    }
}
