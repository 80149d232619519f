//! Exact scalar abstraction.
//!
//! Every quantity in the analysis is an exact rational. The core is generic over
//! [`Scalar`], which is implemented for `Ratio<I>` where `I` is one of the
//! supported integer types. `Ratio<Int>` is the default everywhere; the
//! fixed-width variants are faster for short computations on small
//! denominators but panic on overflow.

use std::fmt::{Debug, Display};
use std::hash::Hash;
use std::ops::{Add, Div, Mul, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{FromPrimitive, Num, One, Signed, ToPrimitive, Zero};

use crate::bigint::Int;
use crate::error::Error;

/// Integer type backing a rational scalar.
///
/// The reference-taking arithmetic methods exist so generic code can avoid
/// cloning large integers; fixed-width implementations check for overflow.
pub trait ExactInt:
    Integer + Signed + Clone + Hash + Debug + Display + FromStr + FromPrimitive + ToPrimitive + Send + Sync + 'static
{
    /// Reduce intermediate numerators eagerly (cheap for machine integers).
    const REDUCE_EAGERLY: bool;

    fn mul_ref(&self, other: &Self) -> Self;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;

    fn mul_assign_ref(&mut self, other: &Self) {
        *self = self.mul_ref(other);
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add_ref(other);
    }

    /// In-place multiplication by a machine integer.
    fn mul_small(&mut self, k: i64) {
        let k = Self::from_i64(k).expect("i64 fits every supported integer type");
        self.mul_assign_ref(&k);
    }

    /// Approximate `n / d` as an `f64`, valid even when both operands exceed
    /// the `f64` range. Relative error is below `2^-50` when `d != 0`.
    fn approx_ratio(n: &Self, d: &Self) -> f64;
}

macro_rules! impl_fixed_int {
    ($t:ty) => {
        impl ExactInt for $t {
            const REDUCE_EAGERLY: bool = true;

            fn mul_ref(&self, other: &Self) -> Self {
                self.checked_mul(*other)
                    .unwrap_or_else(|| panic!("{} overflow; use BigRational", stringify!($t)))
            }

            fn add_ref(&self, other: &Self) -> Self {
                self.checked_add(*other)
                    .unwrap_or_else(|| panic!("{} overflow; use BigRational", stringify!($t)))
            }

            fn sub_ref(&self, other: &Self) -> Self {
                self.checked_sub(*other)
                    .unwrap_or_else(|| panic!("{} overflow; use BigRational", stringify!($t)))
            }

            fn approx_ratio(n: &Self, d: &Self) -> f64 {
                (*n as f64) / (*d as f64)
            }
        }
    };
}

impl_fixed_int!(i64);
impl_fixed_int!(i128);

impl ExactInt for BigInt {
    const REDUCE_EAGERLY: bool = false;

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_assign_ref(&mut self, other: &Self) {
        *self *= other;
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }

    fn mul_small(&mut self, k: i64) {
        *self *= k;
    }

    fn approx_ratio(n: &Self, d: &Self) -> f64 {
        // Keep ~96 significant bits of each operand and rescale by the
        // difference of the discarded shifts.
        let sn = n.bits().saturating_sub(96);
        let sd = d.bits().saturating_sub(96);
        let (a, b) = match ((n >> sn).to_f64(), (d >> sd).to_f64()) {
            (Some(a), Some(b)) => (a, b),
            _ => return f64::NAN,
        };
        scale_pow2(a / b, sn as i64 - sd as i64)
    }
}

impl ExactInt for Int {
    const REDUCE_EAGERLY: bool = false;

    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }

    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }

    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }

    fn mul_assign_ref(&mut self, other: &Self) {
        *self *= other;
    }

    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }

    fn mul_small(&mut self, k: i64) {
        *self *= Int::from(k);
    }

    fn approx_ratio(n: &Self, d: &Self) -> f64 {
        let sn = n.bit_len().saturating_sub(96);
        let sd = d.bit_len().saturating_sub(96);
        let a = (n >> sn).to_f64_lossy();
        let b = (d >> sd).to_f64_lossy();
        scale_pow2(a / b, sn as i64 - sd as i64)
    }
}

/// `q * 2^e`, applied in bounded chunks so intermediate powers stay finite.
fn scale_pow2(mut q: f64, mut e: i64) -> f64 {
    while e != 0 && q != 0.0 && q.is_finite() {
        let chunk = e.clamp(-1000, 1000);
        q *= 2f64.powi(chunk as i32);
        e -= chunk;
    }
    q
}

/// An exact rational scalar.
pub trait Scalar:
    Clone
    + Ord
    + Hash
    + Debug
    + Display
    + Num
    + Signed
    + Send
    + Sync
    + 'static
    + for<'a> Add<&'a Self, Output = Self>
    + for<'a> Sub<&'a Self, Output = Self>
    + for<'a> Mul<&'a Self, Output = Self>
    + for<'a> Div<&'a Self, Output = Self>
{
    type Int: ExactInt;

    fn numer(&self) -> &Self::Int;
    fn denom(&self) -> &Self::Int;

    /// Build `n / d` in lowest terms. Panics if `d` is zero.
    fn from_parts(n: Self::Int, d: Self::Int) -> Self;

    fn from_int(n: Self::Int) -> Self {
        Self::from_parts(n, Self::Int::one())
    }

    fn from_i64s(n: i64, d: i64) -> Self {
        let n = Self::Int::from_i64(n).expect("i64 fits every supported integer type");
        let d = Self::Int::from_i64(d).expect("i64 fits every supported integer type");
        Self::from_parts(n, d)
    }

    fn approx(&self) -> f64 {
        Self::Int::approx_ratio(self.numer(), self.denom())
    }
}

impl<I: ExactInt> Scalar for Ratio<I> {
    type Int = I;

    fn numer(&self) -> &I {
        Ratio::numer(self)
    }

    fn denom(&self) -> &I {
        Ratio::denom(self)
    }

    fn from_parts(n: I, d: I) -> Self {
        Ratio::new(n, d)
    }
}

/// Render as `"p/q"`, always with an explicit denominator.
pub fn to_pq<S: Scalar>(x: &S) -> String {
    format!("{}/{}", x.numer(), x.denom())
}

/// Parse `"p/q"` or an integer literal `"p"`. Decimal and exponent notation is
/// rejected so that no value silently loses exactness.
pub fn parse_pq<S: Scalar>(text: &str) -> Result<S, Error> {
    let bad = || Error::Parse(format!("expected a rational \"p/q\", got {text:?}"));
    let t = text.trim();
    if t.is_empty() || t.contains(['.', 'e', 'E']) {
        return Err(bad());
    }
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (t, "1"),
    };
    let n: S::Int = n.parse().map_err(|_| bad())?;
    let d: S::Int = d.parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {text:?}")));
    }
    Ok(S::from_parts(n, d))
}

/// `x^n` by repeated squaring.
pub fn pow<S: Scalar>(x: &S, n: usize) -> S {
    num_traits::pow(x.clone(), n)
}

pub fn min_of<S: Scalar>(a: &S, b: &S) -> S {
    if a <= b {
        a.clone()
    } else {
        b.clone()
    }
}

pub fn max_of<S: Scalar>(a: &S, b: &S) -> S {
    if a >= b {
        a.clone()
    } else {
        b.clone()
    }
}
