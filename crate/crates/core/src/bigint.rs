//! Arbitrary-precision integer backing the default rational type.
//!
//! A thin wrapper over `dashu_int::IBig`, whose subquadratic gcd keeps
//! rational reduction fast on huge operands. The wrapper supplies its own
//! floor division, since `Ratio` ordering depends on it.

use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Rem, RemAssign, Shl, Shr, Sub, SubAssign};
use std::str::FromStr;

use dashu_int::ops::{BitTest, DivRem, Gcd, UnsignedAbs};
use dashu_int::IBig;
use num_integer::Integer;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Int(pub IBig);

impl Int {
    pub fn pow(&self, exp: usize) -> Self {
        Int(self.0.pow(exp))
    }

    /// Number of bits of `|self|`.
    pub fn bit_len(&self) -> usize {
        (&self.0).unsigned_abs().bit_len()
    }

    pub fn to_f64_lossy(&self) -> f64 {
        self.0.to_f64().value()
    }
}

impl fmt::Debug for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl fmt::Display for Int {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParseIntError;

impl fmt::Display for ParseIntError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("invalid integer literal")
    }
}

impl std::error::Error for ParseIntError {}

impl FromStr for Int {
    type Err = ParseIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        IBig::from_str(s).map(Int).map_err(|_| ParseIntError)
    }
}

macro_rules! from_prim {
    ($($t:ty),*) => {$(
        impl From<$t> for Int {
            fn from(v: $t) -> Self {
                Int(IBig::from(v))
            }
        }
    )*};
}

from_prim!(i8, i16, i32, i64, i128, isize, u8, u16, u32, u64, u128, usize);

impl From<IBig> for Int {
    fn from(v: IBig) -> Self {
        Int(v)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl $tr for Int {
            type Output = Int;
            fn $m(self, o: Int) -> Int {
                Int(self.0.$m(o.0))
            }
        }
        impl<'a> $tr<&'a Int> for Int {
            type Output = Int;
            fn $m(self, o: &'a Int) -> Int {
                Int(self.0.$m(&o.0))
            }
        }
        impl<'a, 'b> $tr<&'b Int> for &'a Int {
            type Output = Int;
            fn $m(self, o: &'b Int) -> Int {
                Int((&self.0).$m(&o.0))
            }
        }
        impl<'a> $tr<Int> for &'a Int {
            type Output = Int;
            fn $m(self, o: Int) -> Int {
                Int((&self.0).$m(o.0))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);
binop!(Rem, rem);

macro_rules! assignop {
    ($tr:ident, $m:ident) => {
        impl $tr for Int {
            fn $m(&mut self, o: Int) {
                self.0.$m(o.0);
            }
        }
        impl<'a> $tr<&'a Int> for Int {
            fn $m(&mut self, o: &'a Int) {
                self.0.$m(&o.0);
            }
        }
    };
}

assignop!(AddAssign, add_assign);
assignop!(SubAssign, sub_assign);
assignop!(MulAssign, mul_assign);
assignop!(DivAssign, div_assign);
assignop!(RemAssign, rem_assign);

impl Neg for Int {
    type Output = Int;
    fn neg(self) -> Int {
        Int(-self.0)
    }
}

impl Neg for &Int {
    type Output = Int;
    fn neg(self) -> Int {
        Int(-&self.0)
    }
}

impl Shl<usize> for Int {
    type Output = Int;
    fn shl(self, k: usize) -> Int {
        Int(self.0 << k)
    }
}

impl Shr<usize> for Int {
    type Output = Int;
    fn shr(self, k: usize) -> Int {
        Int(self.0 >> k)
    }
}

impl Shr<usize> for &Int {
    type Output = Int;
    fn shr(self, k: usize) -> Int {
        Int(&self.0 >> k)
    }
}

impl Zero for Int {
    fn zero() -> Self {
        Int(IBig::ZERO)
    }

    fn is_zero(&self) -> bool {
        self.0 == IBig::ZERO
    }
}

impl One for Int {
    fn one() -> Self {
        Int(IBig::ONE)
    }
}

impl Num for Int {
    type FromStrRadixErr = ParseIntError;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self, Self::FromStrRadixErr> {
        IBig::from_str_radix(s, radix).map(Int).map_err(|_| ParseIntError)
    }
}

impl Signed for Int {
    fn abs(&self) -> Self {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    fn abs_sub(&self, other: &Self) -> Self {
        if self <= other {
            Self::zero()
        } else {
            self - other
        }
    }

    fn signum(&self) -> Self {
        Int(self.0.signum())
    }

    fn is_positive(&self) -> bool {
        self.0 > IBig::ZERO
    }

    fn is_negative(&self) -> bool {
        self.0 < IBig::ZERO
    }
}

impl Integer for Int {
    fn div_floor(&self, other: &Self) -> Self {
        self.div_mod_floor(other).0
    }

    fn mod_floor(&self, other: &Self) -> Self {
        self.div_mod_floor(other).1
    }

    fn div_mod_floor(&self, other: &Self) -> (Self, Self) {
        let (q, r) = self.div_rem(other);
        if !r.is_zero() && (r.is_negative() != other.is_negative()) {
            (q - Self::one(), r + other)
        } else {
            (q, r)
        }
    }

    fn gcd(&self, other: &Self) -> Self {
        Int(IBig::from(Gcd::gcd(&self.0, &other.0)))
    }

    fn lcm(&self, other: &Self) -> Self {
        if self.is_zero() && other.is_zero() {
            return Self::zero();
        }
        (self / &self.gcd(other) * other).abs()
    }

    fn is_multiple_of(&self, other: &Self) -> bool {
        if other.is_zero() {
            return self.is_zero();
        }
        (self % other).is_zero()
    }

    fn is_even(&self) -> bool {
        !self.0.bit(0)
    }

    fn is_odd(&self) -> bool {
        self.0.bit(0)
    }

    fn div_rem(&self, other: &Self) -> (Self, Self) {
        let (q, r) = DivRem::div_rem(&self.0, &other.0);
        (Int(q), Int(r))
    }
}

impl FromPrimitive for Int {
    fn from_i64(n: i64) -> Option<Self> {
        Some(n.into())
    }

    fn from_u64(n: u64) -> Option<Self> {
        Some(n.into())
    }

    fn from_i128(n: i128) -> Option<Self> {
        Some(n.into())
    }

    fn from_u128(n: u128) -> Option<Self> {
        Some(n.into())
    }
}

impl ToPrimitive for Int {
    fn to_i64(&self) -> Option<i64> {
        i64::try_from(&self.0).ok()
    }

    fn to_u64(&self) -> Option<u64> {
        u64::try_from(&self.0).ok()
    }

    fn to_i128(&self) -> Option<i128> {
        i128::try_from(&self.0).ok()
    }

    fn to_u128(&self) -> Option<u128> {
        u128::try_from(&self.0).ok()
    }

    fn to_f64(&self) -> Option<f64> {
        Some(self.to_f64_lossy())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;

    #[test]
    fn floor_division_matches_machine_integers() {
        for a in -13i64..=13 {
            for b in [-5i64, -3, -2, -1, 1, 2, 3, 5] {
                let (q, r) = Int::from(a).div_mod_floor(&Int::from(b));
                assert_eq!((q.to_i64(), r.to_i64()), (Some(Integer::div_floor(&a, &b)), Some(a.mod_floor(&b))), "{a} {b}");
                let (q, r) = Int::from(a).div_rem(&Int::from(b));
                assert_eq!((q.to_i64(), r.to_i64()), (Some(a / b), Some(a % b)));
            }
        }
    }

    #[test]
    fn ratio_order_is_total() {
        let mut v: Vec<Ratio<Int>> = Vec::new();
        let mut w: Vec<Ratio<i64>> = Vec::new();
        for n in -9i64..=9 {
            for d in 1i64..=7 {
                v.push(Ratio::new(n.into(), d.into()));
                w.push(Ratio::new(n, d));
            }
        }
        v.sort();
        w.sort();
        let back: Vec<Ratio<i64>> =
            v.iter().map(|x| Ratio::new(x.numer().to_i64().unwrap(), x.denom().to_i64().unwrap())).collect();
        assert_eq!(back, w);
    }

    #[test]
    fn gcd_and_parity() {
        assert_eq!(Int::from(-12).gcd(&Int::from(18)), Int::from(6));
        assert_eq!(Int::from(4).lcm(&Int::from(-6)), Int::from(12));
        assert!(Int::from(-4).is_even() && Int::from(-3).is_odd());
        assert_eq!("-123".parse::<Int>().unwrap(), Int::from(-123));
    }
}
