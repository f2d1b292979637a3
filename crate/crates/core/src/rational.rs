//! Exact rational helpers on top of `num-rational`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn int(v: i64) -> BigInt {
    BigInt::from(v)
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn from_int(v: &BigInt) -> Rational {
    Rational::from_integer(v.clone())
}

/// Renders a rational as `"num/den"` (always with the slash).
pub fn fmt_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"num/den"` or a bare integer.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Config(format!("cannot parse rational {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| bad())?;
            Ok(Rational::from_integer(n))
        }
    }
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // very large numerator/denominator: scale down by bit length
        let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
        let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
        let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Reduces `r` modulo 1 into `[0, 1)`.
pub fn frac(r: &Rational) -> Rational {
    r - r.floor()
}

/// Largest integer `m >= 0` with `m^e <= x` for `x >= 0`.
pub fn integer_root_floor(x: &BigInt, e: u32) -> BigInt {
    assert!(e >= 1 && !x.is_negative());
    if x.is_zero() || e == 1 {
        return x.clone();
    }
    let mut lo = BigInt::zero();
    let mut hi = BigInt::one() << (x.bits() / e as u64 + 1);
    while &lo < &hi {
        let mid: BigInt = (&lo + &hi + 1) >> 1;
        if Pow::pow(&mid, e) <= *x {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    lo
}

/// Exact `⌊n · q^σ⌋` for a positive rational exponent `σ = a/b`:
/// the largest `m` with `m^b <= n^b · q^a`.
pub fn floor_scaled_power(n: &BigInt, q: &BigInt, sigma: &Rational) -> BigInt {
    let a = sigma.numer().to_u32().expect("sigma numerator fits u32");
    let b = sigma.denom().to_u32().expect("sigma denominator fits u32");
    let x = Pow::pow(n, b) * Pow::pow(q, a);
    integer_root_floor(&x, b)
}

pub fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    a.gcd(b)
}

/// Serde adapter storing rationals as `"num/den"` strings.
pub mod serde_rational {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Serde adapter for big integers as decimal strings.
pub mod serde_bigint {
    use super::*;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigInt, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_format_round_trip() {
        let r = parse_rational("6/8").unwrap();
        assert_eq!(fmt_rational(&r), "3/4");
        assert_eq!(fmt_rational(&parse_rational("5").unwrap()), "5/1");
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn root_floor_matches_definition() {
        for x in 0u64..2000 {
            for e in 1..5u32 {
                let m = integer_root_floor(&BigInt::from(x), e).to_u64().unwrap();
                assert!(m.pow(e) <= x && (m + 1).pow(e) > x, "x={x} e={e}");
            }
        }
    }

    #[test]
    fn scaled_power_near_integer_boundary() {
        // 2^(3/8) ≈ 1.2968
        assert_eq!(floor_scaled_power(&int(1), &int(2), &ratio(3, 8)), int(1));
        // 65536^(1/4) = 16 exactly
        assert_eq!(floor_scaled_power(&int(1), &int(65536), &ratio(1, 4)), int(16));
        assert_eq!(floor_scaled_power(&int(3), &int(65536), &ratio(1, 4)), int(48));
        // 65535^(1/4) just below 16
        assert_eq!(floor_scaled_power(&int(1), &int(65535), &ratio(1, 4)), int(15));
    }
}
