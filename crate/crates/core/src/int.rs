//! Exact integers with an inline fast path.
//!
//! Unit exponents and matrix entries live here. Almost every value fits in a
//! machine word, so the common case is an `i64`; anything that would overflow
//! is promoted to a `BigInt` and demoted again when it shrinks back.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Int {
    Small(i64),
    Big(BigInt),
}

impl Int {
    pub const ZERO: Int = Int::Small(0);
    pub const ONE: Int = Int::Small(1);

    fn from_big(b: BigInt) -> Int {
        match b.to_i64() {
            Some(v) => Int::Small(v),
            None => Int::Big(b),
        }
    }

    fn from_i128(v: i128) -> Int {
        match i64::try_from(v) {
            Ok(v) => Int::Small(v),
            Err(_) => Int::Big(BigInt::from(v)),
        }
    }

    fn to_big(&self) -> BigInt {
        match self {
            Int::Small(v) => BigInt::from(*v),
            Int::Big(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Int::Small(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Int::Small(1))
    }

    pub fn signum(&self) -> i32 {
        match self {
            Int::Small(v) => v.signum() as i32,
            Int::Big(b) => {
                if b.is_negative() {
                    -1
                } else if b.is_zero() {
                    0
                } else {
                    1
                }
            }
        }
    }

    pub fn is_negative(&self) -> bool {
        self.signum() < 0
    }

    pub fn is_positive(&self) -> bool {
        self.signum() > 0
    }

    pub fn abs(&self) -> Int {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn to_i64(&self) -> Option<i64> {
        match self {
            Int::Small(v) => Some(*v),
            Int::Big(_) => None,
        }
    }

    /// Quotient rounded towards negative infinity.
    pub fn div_floor(&self, rhs: &Int) -> Int {
        assert!(!rhs.is_zero(), "division by zero");
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => Int::from_i128(Integer::div_floor(&(*a as i128), &(*b as i128))),
            _ => Int::from_big(Integer::div_floor(&self.to_big(), &rhs.to_big())),
        }
    }

    /// Remainder in `[0, |rhs|)`.
    pub fn mod_floor_abs(&self, rhs: &Int) -> Int {
        let m = rhs.abs();
        match (self, &m) {
            (Int::Small(a), Int::Small(b)) => Int::from_i128(Integer::mod_floor(&(*a as i128), &(*b as i128))),
            _ => Int::from_big(Integer::mod_floor(&self.to_big(), &m.to_big())),
        }
    }

    /// True when `rhs` divides `self` exactly.
    pub fn divisible_by(&self, rhs: &Int) -> bool {
        if rhs.is_zero() {
            return self.is_zero();
        }
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => (*a as i128) % (*b as i128) == 0,
            _ => self.to_big().is_multiple_of(&rhs.to_big()),
        }
    }

    /// Division that must not lose information; panics otherwise.
    pub fn div_exact(&self, rhs: &Int) -> Int {
        assert!(self.divisible_by(rhs), "inexact integer division {self} / {rhs}");
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => Int::from_i128((*a as i128) / (*b as i128)),
            _ => Int::from_big(self.to_big() / rhs.to_big()),
        }
    }

    pub fn gcd(&self, rhs: &Int) -> Int {
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => Int::from_i128(Integer::gcd(&(*a as i128), &(*b as i128))),
            _ => Int::from_big(self.to_big().gcd(&rhs.to_big())),
        }
    }

    /// `self += factor * other`, the workhorse of row reduction.
    pub fn add_mul(&mut self, factor: &Int, other: &Int) {
        if let (Int::Small(a), Int::Small(f), Int::Small(o)) = (&*self, factor, other) {
            if let Some(v) = (*f as i128)
                .checked_mul(*o as i128)
                .and_then(|p| p.checked_add(*a as i128))
            {
                *self = Int::from_i128(v);
                return;
            }
        }
        *self = Int::from_big(self.to_big() + factor.to_big() * other.to_big());
    }
}

impl Default for Int {
    fn default() -> Self {
        Int::ZERO
    }
}

impl From<i64> for Int {
    fn from(v: i64) -> Self {
        Int::Small(v)
    }
}

impl From<i32> for Int {
    fn from(v: i32) -> Self {
        Int::Small(v as i64)
    }
}

impl From<BigInt> for Int {
    fn from(v: BigInt) -> Self {
        Int::from_big(v)
    }
}

impl Ord for Int {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Int::Small(a), Int::Small(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Int {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Int> for &Int {
    type Output = Int;
    fn add(self, rhs: &Int) -> Int {
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => Int::from_i128(*a as i128 + *b as i128),
            _ => Int::from_big(self.to_big() + rhs.to_big()),
        }
    }
}

impl Sub<&Int> for &Int {
    type Output = Int;
    fn sub(self, rhs: &Int) -> Int {
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => Int::from_i128(*a as i128 - *b as i128),
            _ => Int::from_big(self.to_big() - rhs.to_big()),
        }
    }
}

impl Mul<&Int> for &Int {
    type Output = Int;
    fn mul(self, rhs: &Int) -> Int {
        match (self, rhs) {
            (Int::Small(a), Int::Small(b)) => Int::from_i128(*a as i128 * *b as i128),
            _ => Int::from_big(self.to_big() * rhs.to_big()),
        }
    }
}

impl Neg for &Int {
    type Output = Int;
    fn neg(self) -> Int {
        match self {
            Int::Small(a) => Int::from_i128(-(*a as i128)),
            Int::Big(b) => Int::from_big(-b),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Int> for Int {
            type Output = Int;
            fn $m(self, rhs: Int) -> Int {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Int> for Int {
            type Output = Int;
            fn $m(self, rhs: &Int) -> Int {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Int {
    type Output = Int;
    fn neg(self) -> Int {
        -&self
    }
}

impl Zero for Int {
    fn zero() -> Self {
        Int::ZERO
    }
    fn is_zero(&self) -> bool {
        Int::is_zero(self)
    }
}

impl One for Int {
    fn one() -> Self {
        Int::ONE
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Int::Small(v) => fmt::Display::fmt(v, f),
            Int::Big(b) => fmt::Display::fmt(b, f),
        }
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for Int {
    type Err = num_bigint::ParseBigIntError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(Int::from_big(s.parse::<BigInt>()?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn promotes_and_demotes() {
        let big = &Int::from(i64::MAX) + &Int::ONE;
        assert!(matches!(big, Int::Big(_)));
        let back = &big - &Int::ONE;
        assert_eq!(back, Int::Small(i64::MAX));
    }

    #[test]
    fn floor_semantics() {
        assert_eq!(Int::from(-7).div_floor(&Int::from(2)), Int::from(-4));
        assert_eq!(Int::from(-7).mod_floor_abs(&Int::from(2)), Int::from(1));
        assert_eq!(Int::from(7).mod_floor_abs(&Int::from(-3)), Int::from(1));
        assert_eq!(Int::from(6).gcd(&Int::from(-4)), Int::from(2));
    }

    #[test]
    #[should_panic(expected = "inexact")]
    fn div_exact_rejects_remainder() {
        Int::from(7).div_exact(&Int::from(2));
    }

    #[test]
    fn add_mul_overflows_into_big() {
        let mut a = Int::from(i64::MAX);
        a.add_mul(&Int::from(i64::MAX), &Int::from(4));
        let expect: BigInt = BigInt::from(i64::MAX) * 5;
        assert_eq!(a, Int::from(expect));
    }
}
