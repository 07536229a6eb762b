//! Exact rationals and their JSON encoding.

use num::bigint::{BigInt, Sign};
use num::{BigRational, One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn frac(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn pow(base: &Rat, exp: u64) -> Rat {
    let mut acc = Rat::one();
    let mut b = base.clone();
    let mut e = exp;
    while e > 0 {
        if e & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        e >>= 1;
    }
    acc
}

pub fn pow2(exp: u64) -> Rat {
    Rat::from_integer(BigInt::one() << exp)
}

/// Natural logarithm as f64, safe for values far outside the f64 range.
pub fn ln(r: &Rat) -> f64 {
    assert!(r.is_positive(), "ln of non-positive rational");
    ln_int(r.numer()) - ln_int(r.denom())
}

fn ln_int(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap().ln();
    }
    let shift = bits - 64;
    let top = (n >> shift).to_f64().unwrap();
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// `floor(log2(r))` for `r > 0`, exact.
pub fn floor_log2(r: &Rat) -> i64 {
    assert!(r.is_positive());
    let mut e = r.numer().bits() as i64 - r.denom().bits() as i64;
    // 2^e <= r < 2^(e+1) after at most two corrections
    loop {
        let lo = pow2_signed(e);
        if &lo > r {
            e -= 1;
            continue;
        }
        if &pow2_signed(e + 1) <= r {
            e += 1;
            continue;
        }
        return e;
    }
}

pub fn pow2_signed(e: i64) -> Rat {
    if e >= 0 {
        pow2(e as u64)
    } else {
        pow2((-e) as u64).recip()
    }
}

/// If `r` is `2^j` for an integer `j >= 1`, return `j`.
pub fn power_of_two_exponent(r: &Rat) -> Option<u64> {
    if !r.is_integer() || !r.is_positive() {
        return None;
    }
    let n = r.numer();
    let tz = n.trailing_zeros()?;
    if tz >= 1 && (n >> tz) == BigInt::one() {
        Some(tz)
    } else {
        None
    }
}

/// Integer `m`-th root of a rational, when it exists.
pub fn exact_root(r: &Rat, m: u64) -> Option<Rat> {
    if m == 1 {
        return Some(r.clone());
    }
    if r.is_negative() {
        return None;
    }
    let root_int = |n: &BigInt| -> Option<BigInt> {
        let c = n.nth_root(m as u32);
        if num::pow::pow(c.clone(), m as usize) == *n {
            Some(c)
        } else {
            None
        }
    };
    Some(Rat::new(root_int(r.numer())?, root_int(r.denom())?))
}

/// Smallest integer `>= r`.
pub fn ceil_to_u64(r: &Rat) -> Option<u64> {
    r.ceil().to_integer().to_u64()
}

pub fn to_json(r: &Rat) -> Value {
    let enc = |n: &BigInt| match n.to_i64() {
        Some(v) => json!(v),
        None => json!(n.to_string()),
    };
    if r.is_integer() {
        enc(r.numer())
    } else {
        json!({"num": enc(r.numer()), "den": enc(r.denom())})
    }
}

pub fn from_json(v: &Value) -> Result<Rat> {
    match v {
        Value::Number(n) => parse_str(&n.to_string()),
        Value::String(s) => parse_str(s),
        Value::Object(m) => {
            let num = m
                .get("num")
                .ok_or_else(|| Error::Parse("rational missing num".into()))?;
            let den = m
                .get("den")
                .ok_or_else(|| Error::Parse("rational missing den".into()))?;
            let num = from_json(num)?;
            let den = from_json(den)?;
            if !num.is_integer() || !den.is_integer() {
                return Err(Error::Parse("num/den must be integers".into()));
            }
            if den.is_zero() {
                return Err(Error::Parse("zero denominator".into()));
            }
            Ok(num / den)
        }
        other => Err(Error::Parse(format!("expected rational, got {other}"))),
    }
}

/// Parses `"3"`, `"-1/2"`, `"0.125"`, `"1e-3"` exactly.
pub fn parse_str(s: &str) -> Result<Rat> {
    let s = s.trim();
    let bad = || Error::Parse(format!("bad rational literal {s:?}"));
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Parse("zero denominator".into()));
        }
        return Ok(Rat::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i64>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fracpart) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && fracpart.is_empty() {
        return Err(bad());
    }
    if !whole
        .chars()
        .chain(fracpart.chars())
        .all(|c| c.is_ascii_digit())
    {
        return Err(bad());
    }
    let all = format!("{whole}{fracpart}");
    let n: BigInt = if all.is_empty() {
        BigInt::zero()
    } else {
        all.parse().map_err(|_| bad())?
    };
    let scale = exp - fracpart.len() as i64;
    let ten = Rat::from_integer(BigInt::from(10));
    let mut r = Rat::from_integer(n);
    if scale >= 0 {
        r *= pow(&ten, scale as u64);
    } else {
        r /= pow(&ten, (-scale) as u64);
    }
    Ok(if neg { -r } else { r })
}

pub fn sign(r: &Rat) -> Sign {
    if r.is_zero() {
        Sign::NoSign
    } else if r.is_positive() {
        Sign::Plus
    } else {
        Sign::Minus
    }
}

/// Rational upper bound for a non-negative float, rounded up on a 1e-9 grid
/// with one extra grid step of slack.
pub fn upper_bound_of(x: f64) -> Rat {
    let scaled = (x * 1e9).ceil() + 1.0;
    Rat::new(BigInt::from(scaled as i128), BigInt::from(1_000_000_000))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_literals() {
        assert_eq!(parse_str("-1/2").unwrap(), frac(-1, 2));
        assert_eq!(parse_str("0.125").unwrap(), frac(1, 8));
        assert_eq!(parse_str("1e-3").unwrap(), frac(1, 1000));
        assert_eq!(parse_str("-.5").unwrap(), frac(-1, 2));
        assert_eq!(parse_str("42").unwrap(), int(42));
        assert!(parse_str("abc").is_err());
        assert!(parse_str("1/0").is_err());
    }

    #[test]
    fn json_round_trip() {
        for r in [int(0), int(-7), frac(3, 8), frac(-22, 7)] {
            assert_eq!(from_json(&to_json(&r)).unwrap(), r);
        }
        assert_eq!(from_json(&json!(0.5)).unwrap(), frac(1, 2));
        assert_eq!(from_json(&json!({"num": 6, "den": 4})).unwrap(), frac(3, 2));
    }

    #[test]
    fn floor_log2_exact() {
        assert_eq!(floor_log2(&int(1)), 0);
        assert_eq!(floor_log2(&frac(3, 2)), 0);
        assert_eq!(floor_log2(&int(2)), 1);
        assert_eq!(floor_log2(&frac(1023, 1)), 9);
        assert_eq!(floor_log2(&int(1024)), 10);
        assert_eq!(floor_log2(&frac(1, 3)), -2);
    }

    #[test]
    fn powers_and_roots() {
        assert_eq!(power_of_two_exponent(&int(8)), Some(3));
        assert_eq!(power_of_two_exponent(&int(6)), None);
        assert_eq!(power_of_two_exponent(&int(1)), None);
        assert_eq!(exact_root(&frac(9, 4), 2), Some(frac(3, 2)));
        assert_eq!(exact_root(&int(2), 2), None);
        assert!((ln(&pow(&int(3), 2000)) - 2000.0 * 3f64.ln()).abs() < 1e-6);
    }
}
