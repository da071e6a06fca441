use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Sub};

use num::rational::Ratio;
use num::{Integer, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Exact non-negative monetary amount, backed by a rational over `i128`.
///
/// Budget smoothing divides by the number of remaining rounds, so prices are
/// not integral in general. Keeping everything rational means floors and
/// ceilings in the capacity rule and in the analytic formulas agree with the
/// simulation exactly, with no rounding drift across rounds.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Money(Ratio<i128>);

impl Money {
    pub fn zero() -> Self {
        Money(Ratio::zero())
    }

    pub fn from_units(v: u64) -> Self {
        Money(Ratio::from_integer(v as i128))
    }

    /// Builds `num/den`; rejects zero denominators and negative values.
    pub fn ratio(num: i128, den: i128) -> Result<Self> {
        if den == 0 {
            return Err(Error::Config("money denominator is zero".into()));
        }
        let r = Ratio::new(num, den);
        if r.is_negative() {
            return Err(Error::Config(format!("money value {num}/{den} is negative")));
        }
        Ok(Money(r))
    }

    /// Parses a plain decimal literal such as `20`, `2.5` or `0.05` exactly.
    pub fn parse_decimal(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |msg: &str| Error::Config(format!("invalid money literal {s:?}: {msg}"));
        if s.is_empty() {
            return Err(bad("empty"));
        }
        if s.starts_with('-') {
            return Err(bad("negative"));
        }
        let (int_part, frac_part) = match s.split_once('.') {
            Some((a, b)) => (a, b),
            None => (s, ""),
        };
        if frac_part.len() > 18 {
            return Err(bad("more than 18 fractional digits"));
        }
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(bad("no digits"));
        }
        let digits = |p: &str| -> Result<i128> {
            if p.is_empty() {
                return Ok(0);
            }
            p.parse::<i128>().map_err(|_| bad("not a number"))
        };
        let whole = digits(int_part)?;
        let frac = digits(frac_part)?;
        let den = 10i128.pow(frac_part.len() as u32);
        Ok(Money(Ratio::new(whole * den + frac, den)))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn checked_sub(self, rhs: Self) -> Option<Self> {
        if self.0 >= rhs.0 {
            Some(Money(self.0 - rhs.0))
        } else {
            None
        }
    }

    pub fn mul_int(self, k: u64) -> Self {
        Money(self.0 * Ratio::from_integer(k as i128))
    }

    /// Exact division by a positive integer (budget smoothing term).
    pub fn div_int(self, d: u32) -> Self {
        assert!(d > 0, "division by zero rounds");
        Money(self.0 / Ratio::from_integer(d as i128))
    }

    /// `floor(self / rhs)`; `None` when `rhs` is zero.
    pub fn div_floor(self, rhs: Self) -> Option<i128> {
        if rhs.is_zero() {
            return None;
        }
        Some((self.0 / rhs.0).floor().to_integer())
    }

    /// `ceil(self / rhs)`; `None` when `rhs` is zero.
    pub fn div_ceil(self, rhs: Self) -> Option<i128> {
        if rhs.is_zero() {
            return None;
        }
        Some((self.0 / rhs.0).ceil().to_integer())
    }

    pub fn as_ratio(&self) -> Ratio<i128> {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl Add for Money {
    type Output = Money;
    fn add(self, rhs: Money) -> Money {
        Money(self.0 + rhs.0)
    }
}

impl AddAssign for Money {
    fn add_assign(&mut self, rhs: Money) {
        self.0 += rhs.0;
    }
}

impl Sub for Money {
    type Output = Money;
    fn sub(self, rhs: Money) -> Money {
        self.checked_sub(rhs).expect("money subtraction underflow")
    }
}

impl Sum for Money {
    fn sum<I: Iterator<Item = Money>>(iter: I) -> Money {
        iter.fold(Money::zero(), |a, b| a + b)
    }
}

impl fmt::Display for Money {
    /// Integral values print as integers; values with a 2/5-smooth
    /// denominator print as exact decimals; anything else as `num/den`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let num = *self.0.numer();
        let den = *self.0.denom();
        if den == 1 {
            return write!(f, "{num}");
        }
        let (mut d, mut twos, mut fives) = (den, 0u32, 0u32);
        while d.is_multiple_of(&2) {
            d /= 2;
            twos += 1;
        }
        while d.is_multiple_of(&5) {
            d /= 5;
            fives += 1;
        }
        if d == 1 && twos.max(fives) <= 18 {
            let digits = twos.max(fives);
            let scaled = num * 10i128.pow(digits) / den;
            let s = format!("{scaled:0>width$}", width = digits as usize + 1);
            let (whole, frac) = s.split_at(s.len() - digits as usize);
            write!(f, "{whole}.{frac}")
        } else {
            write!(f, "{num}/{den}")
        }
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Money({self})")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_decimal_exact() {
        assert_eq!(Money::parse_decimal("20").unwrap(), Money::from_units(20));
        assert_eq!(Money::parse_decimal("2.5").unwrap(), Money::ratio(5, 2).unwrap());
        assert_eq!(Money::parse_decimal("0.05").unwrap(), Money::ratio(1, 20).unwrap());
        assert!(Money::parse_decimal("-1").is_err());
        assert!(Money::parse_decimal("").is_err());
        assert!(Money::parse_decimal("1.2.3").is_err());
    }

    #[test]
    fn floor_and_ceil_division() {
        let b = Money::from_units(99);
        let r = Money::from_units(20);
        assert_eq!(b.div_floor(r), Some(4));
        assert_eq!(b.div_ceil(r), Some(5));
        assert_eq!(b.div_floor(Money::zero()), None);
        // exact ratio: floor == ceil
        let t = Money::from_units(33);
        assert_eq!(t.div_floor(Money::from_units(11)), Some(3));
        assert_eq!(t.div_ceil(Money::from_units(11)), Some(3));
    }

    #[test]
    fn no_drift_across_repeated_division() {
        // B split over 7 rounds and re-summed is exactly B.
        let b = Money::from_units(100);
        let part = b.div_int(7);
        let total: Money = std::iter::repeat_n(part, 7).sum();
        assert_eq!(total, b);
    }

    #[test]
    fn display_forms() {
        assert_eq!(Money::from_units(12).to_string(), "12");
        assert_eq!(Money::ratio(25, 2).unwrap().to_string(), "12.5");
        assert_eq!(Money::ratio(100, 3).unwrap().to_string(), "100/3");
    }

    #[test]
    fn subtraction_is_checked() {
        let a = Money::from_units(5);
        let b = Money::from_units(7);
        assert_eq!(b.checked_sub(a), Some(Money::from_units(2)));
        assert_eq!(a.checked_sub(b), None);
    }
}
