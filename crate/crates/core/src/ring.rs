//! Arithmetic in Z[1/2], the integers with 2 inverted.
//!
//! Every element is written canonically as `num / 2^exp` with `num` odd (or the
//! element is zero, stored as `0 / 2^0`). The units of this ring are exactly
//! `±2^k`, which is what makes Gaussian elimination with ±2^k pivots legal and
//! keeps all homological computations exact.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Zero};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }

    /// `num / 2^exp`, brought to canonical form.
    pub fn new(num: impl Into<BigInt>, exp: i64) -> Self {
        let mut d = Dyadic { num: num.into(), exp };
        d.normalize();
        d
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Dyadic::new(n, 0)
    }

    /// `±2^k` as a ring element; these are precisely the units.
    pub fn unit_pow2(sign: i64, k: i64) -> Self {
        assert!(sign == 1 || sign == -1);
        Dyadic { num: BigInt::from(sign), exp: -k }
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        if let Some(tz) = self.num.trailing_zeros() {
            if tz > 0 {
                self.num >>= tz;
                self.exp -= tz as i64;
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// Units in Z[1/2] are ±2^k: odd numerator of magnitude one.
    pub fn is_unit(&self) -> bool {
        self.num.magnitude().is_one()
    }

    pub fn inv(&self) -> Dyadic {
        assert!(self.is_unit(), "inverse of a non-unit in Z[1/2]");
        Dyadic { num: self.num.clone(), exp: -self.exp }
    }

    pub fn is_one(&self) -> bool {
        self.exp == 0 && self.num.is_one()
    }

    pub fn is_integer(&self) -> bool {
        self.exp <= 0
    }

    /// The numerator of the canonical form (odd unless zero).
    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    /// Power of two in the denominator of the canonical form (may be negative,
    /// meaning the element is `num * 2^-exp`, an even integer).
    pub fn exp2(&self) -> i64 {
        self.exp
    }

    /// The element as an integer, if it is one.
    pub fn to_integer(&self) -> Option<BigInt> {
        if self.exp > 0 {
            return None;
        }
        Some(&self.num << ((-self.exp) as u64))
    }

    /// Multiply by 2^k.
    pub fn shifted(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return Dyadic::zero();
        }
        Dyadic { num: self.num.clone(), exp: self.exp - k }
    }

    /// Exact division; the divisor must be a unit.
    pub fn div_unit(&self, d: &Dyadic) -> Dyadic {
        self * &d.inv()
    }

    pub fn abs_cmp_one(&self) -> Ordering {
        // compares |self| with 1; handy for pivot selection
        if self.is_zero() {
            return Ordering::Less;
        }
        let mag_bits = self.num.magnitude().bits() as i64;
        (mag_bits - 1 - self.exp).cmp(&0)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.exp.cmp(&0) {
            Ordering::Equal => write!(f, "{}", self.num),
            Ordering::Less => write!(f, "{}", self.to_integer().unwrap()),
            Ordering::Greater => write!(f, "{}/{}", self.num, BigInt::one() << (self.exp as u64)),
        }
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_int(n)
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -&self.num, exp: self.exp }
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let exp = self.exp.max(rhs.exp);
        let a = &self.num << ((exp - self.exp) as u64);
        let b = &rhs.num << ((exp - rhs.exp) as u64);
        Dyadic::new(a + b, exp)
    }
}

impl Sub for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return -rhs;
        }
        let exp = self.exp.max(rhs.exp);
        let a = &self.num << ((exp - self.exp) as u64);
        let b = &rhs.num << ((exp - rhs.exp) as u64);
        Dyadic::new(a - b, exp)
    }
}

impl Mul for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        if self.is_zero() || rhs.is_zero() {
            return Dyadic::zero();
        }
        // odd * odd is odd, so the product is already canonical
        Dyadic { num: &self.num * &rhs.num, exp: self.exp + rhs.exp }
    }
}

macro_rules! forward_owned {
    ($trait:ident, $method:ident) => {
        impl $trait for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: Dyadic) -> Dyadic {
                $trait::$method(&self, &rhs)
            }
        }
        impl $trait<&Dyadic> for Dyadic {
            type Output = Dyadic;
            fn $method(self, rhs: &Dyadic) -> Dyadic {
                $trait::$method(&self, rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&Dyadic> for Dyadic {
    fn add_assign(&mut self, rhs: &Dyadic) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Dyadic> for Dyadic {
    fn sub_assign(&mut self, rhs: &Dyadic) {
        *self = &*self - rhs;
    }
}
