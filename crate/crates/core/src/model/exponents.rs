//! Exact exponents. Regime boundaries such as `l = (q+1)/2` are strict
//! inequalities, so exponents are held as rationals and compared exactly.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// A positive exact rational read from a decimal (`0.75`, `1e-3`) or a
/// fraction (`"1/3"`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(pub Rational64);

impl Exponent {
    pub fn new(numer: i64, denom: i64) -> Self {
        Exponent(Rational64::new(numer, denom))
    }

    pub fn integer(v: i64) -> Self {
        Exponent(Rational64::from_integer(v))
    }

    pub fn value(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn exact(&self) -> Rational64 {
        self.0
    }

    /// Exact value of a finite `f64` written in its shortest round-trip
    /// decimal form (`0.7_f64` becomes 7/10, not the nearest binary fraction).
    pub fn from_f64_decimal(v: f64) -> Result<Self, String> {
        if !v.is_finite() {
            return Err(format!("non-finite exponent {v}"));
        }
        format!("{v}").parse()
    }
}

fn parse_decimal(s: &str) -> Result<Rational64, String> {
    let bad = || format!("cannot parse {s:?} as an exact decimal");
    let (mantissa, exp10) = match s.find(['e', 'E']) {
        Some(pos) => (&s[..pos], s[pos + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = match digits.split_once('.') {
        Some((i, f)) => (i, f),
        None => (digits, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let all = all.trim_start_matches('0');
    let numer: i64 = if all.is_empty() { 0 } else { all.parse().map_err(|_| bad())? };
    let shift = exp10 - frac_part.len() as i32;
    let pow = |k: u32| 10i64.checked_pow(k).ok_or_else(bad);
    let value = if shift >= 0 {
        Rational64::from_integer(numer.checked_mul(pow(shift as u32)?).ok_or_else(bad)?)
    } else {
        Rational64::new(numer, pow((-shift) as u32)?)
    };
    Ok(if neg { -value } else { value })
}

impl FromStr for Exponent {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n = parse_decimal(n.trim())?;
            let d = parse_decimal(d.trim())?;
            if d.is_zero() {
                return Err(format!("zero denominator in {s:?}"));
            }
            return Ok(Exponent(n / d));
        }
        parse_decimal(s).map(Exponent)
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        if r.is_integer() {
            return write!(f, "{}", r.numer());
        }
        // Terminating decimals print as decimals, everything else as n/d.
        let (mut d, mut twos, mut fives) = (*r.denom(), 0u32, 0u32);
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        let k = twos.max(fives);
        let scaled = 10i128
            .checked_pow(k)
            .and_then(|p| (*r.numer() as i128).checked_mul(p))
            .map(|v| v / *r.denom() as i128);
        match scaled {
            Some(v) if d == 1 => {
                let sign = if v < 0 { "-" } else { "" };
                let digits = format!("{:0>width$}", v.unsigned_abs(), width = k as usize + 1);
                let (int, frac) = digits.split_at(digits.len() - k as usize);
                write!(f, "{sign}{int}.{}", frac.trim_end_matches('0'))
            }
            _ => write!(f, "{}/{}", r.numer(), r.denom()),
        }
    }
}

impl Serialize for Exponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if Exponent::from_f64_decimal(self.value()).as_ref() == Ok(self) {
            s.serialize_f64(self.value())
        } else {
            s.serialize_str(&self.to_string())
        }
    }
}

impl<'de> Deserialize<'de> for Exponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Exponent;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a decimal number or a fraction string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Exponent, E> {
                Exponent::from_f64_decimal(v).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Exponent, E> {
                Ok(Exponent::integer(v))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Exponent, E> {
                i64::try_from(v).map(Exponent::integer).map_err(E::custom)
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Exponent, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// The four exponents `r, p, q, l`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Exponents {
    pub r: Exponent,
    pub p: Exponent,
    pub q: Exponent,
    pub l: Exponent,
}

impl Exponents {
    pub fn new(r: Exponent, p: Exponent, q: Exponent, l: Exponent) -> Result<Self, ModelError> {
        let e = Exponents { r, p, q, l };
        e.validate()?;
        Ok(e)
    }

    /// Convenience constructor from decimal literals.
    pub fn from_f64(r: f64, p: f64, q: f64, l: f64) -> Result<Self, ModelError> {
        let conv = |name: &'static str, v: f64| {
            Exponent::from_f64_decimal(v).map_err(|reason| ModelError::BadExponent { name, reason })
        };
        Exponents::new(conv("r", r)?, conv("p", p)?, conv("q", q)?, conv("l", l)?)
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        for (name, e) in [("r", self.r), ("p", self.p), ("q", self.q), ("l", self.l)] {
            if !e.0.is_positive() {
                return Err(ModelError::NonpositiveExponent { name, value: e.to_string() });
            }
        }
        Ok(())
    }

    pub fn r(&self) -> f64 {
        self.r.value()
    }
    pub fn p(&self) -> f64 {
        self.p.value()
    }
    pub fn q(&self) -> f64 {
        self.q.value()
    }
    pub fn l(&self) -> f64 {
        self.l.value()
    }
    /// `r + p` as a float.
    pub fn rp(&self) -> f64 {
        (self.r.0 + self.p.0).to_f64().unwrap_or(f64::NAN)
    }

    /// `min(r, p, l) < 1`: comparison needs one strictly positive datum.
    pub fn needs_positive_data(&self) -> bool {
        let one = Rational64::from_integer(1);
        self.r.0 < one || self.p.0 < one || self.l.0 < one
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decimals_are_exact() {
        let e: Exponent = "0.7".parse().unwrap();
        assert_eq!(e.0, Rational64::new(7, 10));
        assert_eq!(Exponent::from_f64_decimal(0.1).unwrap().0, Rational64::new(1, 10));
        assert_eq!("1e-3".parse::<Exponent>().unwrap().0, Rational64::new(1, 1000));
        assert_eq!("2.5E1".parse::<Exponent>().unwrap().0, Rational64::from_integer(25));
        assert_eq!("1/3".parse::<Exponent>().unwrap().0, Rational64::new(1, 3));
        assert!("abc".parse::<Exponent>().is_err());
        assert!("1/0".parse::<Exponent>().is_err());
    }

    #[test]
    fn half_sum_boundary_is_exact() {
        // 0.1 + 0.2 = 0.3 holds exactly for rationals
        let a: Exponent = "0.1".parse().unwrap();
        let b: Exponent = "0.2".parse().unwrap();
        let c: Exponent = "0.3".parse().unwrap();
        assert_eq!(a.0 + b.0, c.0);
    }

    #[test]
    fn json_round_trip() {
        let e: Exponents = serde_json::from_str(r#"{"r":0.75,"p":"1/3","q":2,"l":1.5}"#).unwrap();
        let text = serde_json::to_string(&e).unwrap();
        let back: Exponents = serde_json::from_str(&text).unwrap();
        assert_eq!(e, back);
        assert!(text.contains("\"1/3\""));
    }

    #[test]
    fn positivity_is_enforced() {
        let err = Exponents::from_f64(-1.0, 1.0, 1.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("positive"), "{err}");
        assert!(Exponents::from_f64(1.0, 0.0, 1.0, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn display_parse_round_trip(n in 1i64..100_000, d in 1i64..10_000) {
            let e = Exponent::new(n, d);
            let back: Exponent = e.to_string().parse().unwrap();
            prop_assert_eq!(e, back);
        }
    }
}
