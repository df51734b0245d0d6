//! Exact dyadic rationals `numerator / 2^exponent` with checked arithmetic.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum DyadicError {
    #[error("dyadic arithmetic overflow")]
    Overflow,
    #[error("`{0}` is not a dyadic rational")]
    Parse(String),
}

/// Always stored in lowest terms: the numerator is odd unless the
/// exponent is zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dyadic {
    numerator: i64,
    exponent: u32,
}

/// Exponents beyond this are rejected; keeps shifts well inside `i64`.
const MAX_EXPONENT: u32 = 48;

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic {
        numerator: 0,
        exponent: 0,
    };

    pub fn new(numerator: i64, exponent: u32) -> Result<Self, DyadicError> {
        if exponent > MAX_EXPONENT {
            return Err(DyadicError::Overflow);
        }
        let mut d = Dyadic {
            numerator,
            exponent,
        };
        d.reduce();
        Ok(d)
    }

    pub fn integer(n: i64) -> Self {
        Dyadic {
            numerator: n,
            exponent: 0,
        }
    }

    fn reduce(&mut self) {
        if self.numerator == 0 {
            self.exponent = 0;
            return;
        }
        let tz = self.numerator.trailing_zeros().min(self.exponent);
        self.numerator >>= tz;
        self.exponent -= tz;
    }

    pub fn numerator(&self) -> i64 {
        self.numerator
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }

    pub fn is_integer(&self) -> bool {
        self.exponent == 0
    }

    /// Numerators of both operands over a common power of two.
    fn aligned(a: Dyadic, b: Dyadic) -> Result<(i128, i128, u32), DyadicError> {
        let e = a.exponent.max(b.exponent);
        let na = (a.numerator as i128) << (e - a.exponent);
        let nb = (b.numerator as i128) << (e - b.exponent);
        Ok((na, nb, e))
    }

    fn from_wide(n: i128, e: u32) -> Result<Self, DyadicError> {
        if n == 0 {
            return Ok(Dyadic::ZERO);
        }
        let tz = (n.trailing_zeros()).min(e);
        let n = n >> tz;
        let e = e - tz;
        let n = i64::try_from(n).map_err(|_| DyadicError::Overflow)?;
        Dyadic::new(n, e)
    }

    pub fn checked_add(self, other: Dyadic) -> Result<Dyadic, DyadicError> {
        let (a, b, e) = Dyadic::aligned(self, other)?;
        Dyadic::from_wide(a.checked_add(b).ok_or(DyadicError::Overflow)?, e)
    }

    pub fn checked_sub(self, other: Dyadic) -> Result<Dyadic, DyadicError> {
        self.checked_add(other.checked_neg()?)
    }

    pub fn checked_neg(self) -> Result<Dyadic, DyadicError> {
        Ok(Dyadic {
            numerator: self.numerator.checked_neg().ok_or(DyadicError::Overflow)?,
            exponent: self.exponent,
        })
    }

    pub fn checked_mul_int(self, k: i64) -> Result<Dyadic, DyadicError> {
        let n = (self.numerator as i128)
            .checked_mul(k as i128)
            .ok_or(DyadicError::Overflow)?;
        Dyadic::from_wide(n, self.exponent)
    }

    /// Halves the value.
    pub fn half(self) -> Result<Dyadic, DyadicError> {
        Dyadic::new(self.numerator, self.exponent + 1)
    }

    pub fn floor(self) -> i64 {
        self.numerator >> self.exponent
    }

    pub fn ceil(self) -> i64 {
        -((-self.numerator) >> self.exponent)
    }

    /// `2^-exponent`, the step between this number and its options.
    pub fn unit(self) -> Dyadic {
        Dyadic {
            numerator: 1,
            exponent: self.exponent,
        }
    }

    /// The simplest number strictly between `lo` and `hi` (either bound may
    /// be absent), per the simplicity rule.
    pub fn simplest_between(
        lo: Option<Dyadic>,
        hi: Option<Dyadic>,
    ) -> Result<Dyadic, DyadicError> {
        match (lo, hi) {
            (None, None) => Ok(Dyadic::ZERO),
            (Some(a), None) => {
                if a < Dyadic::ZERO {
                    Ok(Dyadic::ZERO)
                } else {
                    Ok(Dyadic::integer(a.floor() + 1))
                }
            }
            (None, Some(b)) => {
                if b > Dyadic::ZERO {
                    Ok(Dyadic::ZERO)
                } else {
                    Ok(Dyadic::integer(b.ceil() - 1))
                }
            }
            (Some(a), Some(b)) => {
                debug_assert!(a < b, "simplest_between needs lo < hi");
                if a < Dyadic::ZERO && b > Dyadic::ZERO {
                    return Ok(Dyadic::ZERO);
                }
                if a >= Dyadic::ZERO {
                    let n = Dyadic::integer(a.floor() + 1);
                    if n < b {
                        return Ok(n);
                    }
                } else {
                    let n = Dyadic::integer(b.ceil() - 1);
                    if n > a {
                        return Ok(n);
                    }
                }
                for e in 1..=MAX_EXPONENT {
                    let (an, ae) = (a.numerator as i128, a.exponent);
                    // floor(a * 2^e) + 1
                    let scaled = if ae >= e {
                        an >> (ae - e)
                    } else {
                        an << (e - ae)
                    };
                    let m = scaled + 1;
                    let candidate = Dyadic::from_wide(m, e)?;
                    if candidate > a && candidate < b {
                        return Ok(candidate);
                    }
                }
                Err(DyadicError::Overflow)
            }
        }
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b, _) = Dyadic::aligned(*self, *other).expect("alignment fits in i128");
        a.cmp(&b)
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::integer(n)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponent == 0 {
            write!(f, "{}", self.numerator)
        } else {
            write!(f, "{}/{}", self.numerator, 1u64 << self.exponent)
        }
    }
}

impl FromStr for Dyadic {
    type Err = DyadicError;

    /// Accepts integers, fractions with a power-of-two denominator, and
    /// finite binary decimals such as `0.75`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || DyadicError::Parse(t.to_string());
        if let Some((n, d)) = t.split_once('/') {
            let n: i64 = n.trim().parse().map_err(|_| bad())?;
            let d: u64 = d.trim().parse().map_err(|_| bad())?;
            if d == 0 || !d.is_power_of_two() {
                return Err(bad());
            }
            return Dyadic::new(n, d.trailing_zeros());
        }
        if let Some((int, frac)) = t.split_once('.') {
            let negative = int.trim_start().starts_with('-');
            let int_part: i64 = if int.is_empty() || int == "-" {
                0
            } else {
                int.parse().map_err(|_| bad())?
            };
            if frac.is_empty() || !frac.chars().all(|c| c.is_ascii_digit()) || frac.len() > 18 {
                return Err(bad());
            }
            // frac / 10^k must be dyadic: frac * 2^k / 10^k = frac / 5^k
            let k = frac.len() as u32;
            let num: i128 = frac.parse().map_err(|_| bad())?;
            let five = 5i128.pow(k);
            if num % five != 0 {
                return Err(bad());
            }
            let frac_d = Dyadic::from_wide(num / five, k)?;
            let whole = Dyadic::integer(int_part.abs());
            let v = whole.checked_add(frac_d)?;
            return if negative { v.checked_neg() } else { Ok(v) };
        }
        t.parse::<i64>().map(Dyadic::integer).map_err(|_| bad())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(s: &str) -> Dyadic {
        s.parse().unwrap()
    }

    #[test]
    fn lowest_terms() {
        assert_eq!(Dyadic::new(4, 3).unwrap(), d("1/2"));
        assert_eq!(Dyadic::new(0, 5).unwrap(), Dyadic::ZERO);
        assert_eq!(d("0.75"), d("3/4"));
        assert_eq!(d("-2.5"), d("-5/2"));
        assert!("1/3".parse::<Dyadic>().is_err());
        assert!("0.1".parse::<Dyadic>().is_err());
    }

    #[test]
    fn arithmetic() {
        assert_eq!(d("3/2").checked_add(d("-5/2")).unwrap(), d("-1"));
        assert_eq!(d("1/4").checked_sub(d("3/4")).unwrap(), d("-1/2"));
        assert_eq!(d("-5/2").floor(), -3);
        assert_eq!(d("-5/2").ceil(), -2);
        assert_eq!(d("11/4").to_string(), "11/4");
        assert_eq!(
            Dyadic::integer(i64::MAX).checked_add(Dyadic::integer(1)),
            Err(DyadicError::Overflow)
        );
    }

    #[test]
    fn simplicity_rule() {
        let s = |a: Option<&str>, b: Option<&str>| {
            Dyadic::simplest_between(a.map(d), b.map(d)).unwrap()
        };
        assert_eq!(s(None, None), d("0"));
        assert_eq!(s(Some("0"), None), d("1"));
        assert_eq!(s(Some("-3"), None), d("0"));
        assert_eq!(s(None, Some("-2")), d("-3"));
        assert_eq!(s(Some("0"), Some("1")), d("1/2"));
        assert_eq!(s(Some("1/2"), Some("1")), d("3/4"));
        assert_eq!(s(Some("-1"), Some("3")), d("0"));
        assert_eq!(s(Some("1"), Some("4")), d("2"));
        assert_eq!(s(Some("-4"), Some("-1")), d("-2"));
        assert_eq!(s(Some("5/8"), Some("7/8")), d("3/4"));
        assert_eq!(s(Some("-7/8"), Some("-3/4")), d("-13/16"));
    }
}
