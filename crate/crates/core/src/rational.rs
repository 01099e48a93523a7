//! Exact rational scalars and their textual form.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn q_frac(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `p/q` with a positive denominator; used in every serialized output.
pub fn to_pq(x: &Q) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Short human form: integers print without the denominator.
pub fn to_short(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Option<Q> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n = BigInt::from_str(n.trim()).ok()?;
            let d = BigInt::from_str(d.trim()).ok()?;
            if d.is_zero() {
                return None;
            }
            Some(Q::new(n, d))
        }
        None => BigInt::from_str(s).ok().map(Q::from_integer),
    }
}

pub fn pow_q(x: &Q, e: u32) -> Q {
    num_traits::pow(x.clone(), e as usize)
}

/// `x^e` for a possibly negative exponent; `None` when `x = 0` and `e < 0`.
pub fn pow_q_signed(x: &Q, e: i64) -> Option<Q> {
    if e >= 0 {
        return Some(pow_q(x, e as u32));
    }
    if x.is_zero() {
        return None;
    }
    Some(pow_q(&x.recip(), (-e) as u32))
}

pub fn is_pm_one(x: &Q) -> bool {
    x.abs().is_one()
}

pub mod serde_pq {
    //! Serde adapter writing rationals as `"p/q"` strings.
    use super::*;
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &Q, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&to_pq(x))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Q, D::Error> {
        let s = String::deserialize(d)?;
        parse_q(&s).ok_or_else(|| D::Error::custom(format!("bad rational {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pq_round_trip() {
        for x in [q(0), q(-3), q_frac(6, -4), q_frac(7, 9)] {
            assert_eq!(parse_q(&to_pq(&x)).unwrap(), x);
        }
        assert_eq!(to_pq(&q_frac(6, -4)), "-3/2");
        assert_eq!(to_pq(&q(5)), "5/1");
        assert!(parse_q("1/0").is_none());
    }
}
