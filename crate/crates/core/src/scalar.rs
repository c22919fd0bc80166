//! Scalar backends.
//!
//! Three rings are used throughout: [`Rational`] (exact, arbitrary precision),
//! [`Int`] (exact, checked 128-bit, for hot integer pipelines) and `f64`
//! (float mode, used only for spectra and speed comparisons).

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use std::fmt::Debug;
use std::ops::{Add, Mul, Neg, Sub};

pub type Rational = BigRational;

/// Relative zero tolerance used by float mode.
pub const FLOAT_TAU: f64 = 1e-9;

/// Commutative ring with the handful of conversions the tensor code needs.
pub trait Ring:
    Clone
    + Debug
    + PartialEq
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
{
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Exact zero test for exact rings; `|x| <= FLOAT_TAU` for floats.
    fn is_zero(&self) -> bool;
    fn to_f64(&self) -> f64;

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.clone() + other.clone();
    }
    fn mul_i64(&self, k: i64) -> Self {
        self.clone() * Self::from_i64(k)
    }
}

/// A ring with exact (or float) division.
pub trait Field: Ring + std::ops::Div<Output = Self> {
    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_i64(num) / Self::from_i64(den)
    }
}

impl Ring for Rational {
    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_i64(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn to_f64(&self) -> f64 {
        self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += other;
    }
}
impl Field for Rational {}

impl Ring for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn is_zero(&self) -> bool {
        self.abs() <= FLOAT_TAU
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn add_assign_ref(&mut self, other: &Self) {
        *self += *other;
    }
}
impl Field for f64 {}

/// Checked 128-bit integer. Overflow panics instead of wrapping, so a result
/// is either exact or absent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Int(pub i128);

impl Add for Int {
    type Output = Int;
    #[inline]
    fn add(self, o: Int) -> Int {
        Int(self.0.checked_add(o.0).expect("Int overflow in add"))
    }
}
impl Sub for Int {
    type Output = Int;
    #[inline]
    fn sub(self, o: Int) -> Int {
        Int(self.0.checked_sub(o.0).expect("Int overflow in sub"))
    }
}
impl Mul for Int {
    type Output = Int;
    #[inline]
    fn mul(self, o: Int) -> Int {
        Int(self.0.checked_mul(o.0).expect("Int overflow in mul"))
    }
}
impl Neg for Int {
    type Output = Int;
    #[inline]
    fn neg(self) -> Int {
        Int(self.0.checked_neg().expect("Int overflow in neg"))
    }
}

impl Ring for Int {
    fn zero() -> Self {
        Int(0)
    }
    fn one() -> Self {
        Int(1)
    }
    fn from_i64(v: i64) -> Self {
        Int(v as i128)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn to_f64(&self) -> f64 {
        self.0 as f64
    }
    #[inline]
    fn add_assign_ref(&mut self, other: &Self) {
        *self = *self + *other;
    }
}

impl Int {
    pub fn to_bigint(self) -> BigInt {
        BigInt::from(self.0)
    }
    pub fn to_rational(self) -> Rational {
        BigRational::from_integer(self.to_bigint())
    }
}

/// Exact conversion from the small integer ring into rationals.
pub fn int_to_rational(v: &Int) -> Rational {
    v.to_rational()
}

/// Parse `"p/q"` or `"p"` into an exact rational.
pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((p, q)) => {
            let p: BigInt = p.trim().parse().ok()?;
            let q: BigInt = q.trim().parse().ok()?;
            if q.is_zero() {
                return None;
            }
            Some(BigRational::new(p, q))
        }
        None => Some(BigRational::from_integer(s.parse().ok()?)),
    }
}

/// Format a rational as `"p/q"` (or `"p"` for integers).
pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Convert a rational vector into a primitive integer vector spanning the
/// same line (denominators cleared, content removed, sign normalized so the
/// first nonzero entry is positive).
pub fn primitive_from_rationals(v: &[Rational]) -> Vec<BigInt> {
    let mut l = BigInt::one();
    for x in v {
        l = num::integer::lcm(l, x.denom().clone());
    }
    let ints: Vec<BigInt> = v.iter().map(|x| (x * BigRational::from_integer(l.clone())).to_integer()).collect();
    primitive_bigints(ints)
}

pub fn primitive_bigints(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let mut g = BigInt::zero();
    for x in &v {
        g = num::integer::gcd(g, x.clone());
    }
    if g.is_zero() {
        return v;
    }
    let flip = v.iter().find(|x| !x.is_zero()).map(|x| x.is_negative()).unwrap_or(false);
    for x in v.iter_mut() {
        *x = &*x / &g;
        if flip {
            *x = -&*x;
        }
    }
    v
}

/// Divide an integer vector by the gcd of its entries (sign preserved).
pub fn reduce_content(v: &mut [Int]) {
    let mut g: i128 = 0;
    for x in v.iter() {
        g = gcd_i128(g, x.0);
        if g == 1 {
            return;
        }
    }
    if g > 1 {
        for x in v.iter_mut() {
            x.0 /= g;
        }
    }
}

pub fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.unsigned_abs(), b.unsigned_abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a as i128
}

/// Narrow a big integer into [`Int`], panicking if it does not fit.
pub fn bigint_to_int(b: &BigInt) -> Int {
    Int(b.to_i128().expect("integer does not fit in 128 bits"))
}
