//! Exact rationals and helpers around them.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always kept in lowest terms with a positive
/// denominator.
pub type Rat = BigRational;

pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// `count / 4^h`.
pub fn over_four_pow(count: u64, h: u32) -> Rat {
    Rat::new(BigInt::from(count), BigInt::from(4u8).pow(h))
}

pub fn two_pow(k: i32) -> Rat {
    let base = Rat::from_integer(BigInt::from(2));
    if k >= 0 {
        base.pow(k)
    } else {
        base.pow(-k).recip()
    }
}

/// Serializes as `num/den`, including the integer case (`1/1`).
pub fn to_fraction_string(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// The exact value of the double nearest to the decimal `s`. Table entries
/// printed as shortest round-trip doubles (`0.34999942779541016`) recover
/// their exact dyadic value this way.
pub fn from_f64_decimal(s: &str) -> Result<Rat> {
    let x: f64 = s.trim().parse().map_err(|_| Error::ParseRational(s.to_string()))?;
    Rat::from_float(x).ok_or_else(|| Error::ParseRational(s.to_string()))
}

/// Parses `a/b`, an integer, or a finite decimal such as `0.34765625`.
/// Decimals are read exactly.
pub fn parse(s: &str) -> Result<Rat> {
    let s = s.trim();
    let err = || Error::ParseRational(s.to_string());
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| err())?;
        let d: BigInt = d.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(Rat::new(n, d));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_abs = whole.trim_start_matches(['-', '+']);
        let whole: BigInt = if whole_abs.is_empty() {
            BigInt::zero()
        } else {
            whole_abs.parse().map_err(|_| err())?
        };
        let frac_num: BigInt = frac.parse().map_err(|_| err())?;
        let scale = BigInt::from(10u8).pow(frac.len() as u32);
        let mut value = Rat::new(whole * &scale + frac_num, scale);
        if negative {
            value = -value;
        }
        return Ok(value);
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rat::from_integer(n))
}

/// True when `r * 4^h` is an integer.
pub fn is_multiple_of_four_pow(r: &Rat, h: u32) -> bool {
    let scaled = r * Rat::from_integer(BigInt::from(4u8).pow(h));
    scaled.is_integer()
}

pub fn in_open_unit_interval(r: &Rat) -> bool {
    r.is_positive() && r < &Rat::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn double_decimals_recover_dyadics() {
        let v = from_f64_decimal("0.34999942779541016").unwrap();
        assert!(is_multiple_of_four_pow(&v, 12));
        assert_eq!(v, rat(5872016, 1 << 24));
        assert!(from_f64_decimal("nan?").is_err());
    }

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(parse("0.34765625").unwrap(), rat(1424, 4096));
        assert_eq!(parse("0.349609375").unwrap(), rat(358, 1024));
        assert_eq!(parse("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse(".5").unwrap(), rat(1, 2));
    }

    #[test]
    fn parses_fractions_and_integers() {
        assert_eq!(parse("22/64").unwrap(), rat(11, 32));
        assert_eq!(parse("3").unwrap(), int(3));
        assert!(parse("1/0").is_err());
        assert!(parse("abc").is_err());
        assert!(parse("1.").is_err());
    }

    #[test]
    fn fraction_string_always_has_denominator() {
        assert_eq!(to_fraction_string(&rat(22, 64)), "11/32");
        assert_eq!(to_fraction_string(&int(1)), "1/1");
    }

    #[test]
    fn dyadic_helpers() {
        assert_eq!(two_pow(-3), rat(1, 8));
        assert_eq!(over_four_pow(21, 3), rat(21, 64));
        assert!(is_multiple_of_four_pow(&rat(11, 32), 3));
        assert!(!is_multiple_of_four_pow(&rat(7, 20), 3));
    }
}
