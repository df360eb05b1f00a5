//! Working precision policy and an arbitrary-precision complex type over MPFR.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use rug::float::Constant;
use rug::ops::Pow;
use rug::Float;

use crate::error::{Error, Result};

/// Decimal working precision, guard digits and the escalation budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct PrecisionContext {
    pub digits: u32,
    pub guard: u32,
    pub max_escalations: u32,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext { digits: 100, guard: 20, max_escalations: 3 }
    }
}

impl PrecisionContext {
    pub fn new(digits: u32) -> Result<Self> {
        Self::with_guard(digits, 20)
    }

    pub fn with_guard(digits: u32, guard: u32) -> Result<Self> {
        if digits < 30 {
            return Err(Error::InvalidInput(format!("digits must be at least 30, got {digits}")));
        }
        if guard < 10 {
            return Err(Error::InvalidInput(format!("guard must be at least 10, got {guard}")));
        }
        Ok(PrecisionContext { digits, guard, max_escalations: 3 })
    }

    /// Binary precision covering `digits + guard` decimal digits.
    pub fn bits(&self) -> u32 {
        ((self.digits + self.guard) as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 8
    }

    /// The same policy with doubled digits.
    pub fn escalated(&self) -> Self {
        PrecisionContext { digits: self.digits * 2, ..*self }
    }

    /// Tolerance `10^-(digits - guard)` used by the identity checks.
    pub fn identity_tolerance(&self) -> Float {
        self.pow10(-(self.digits as i32 - self.guard as i32))
    }

    /// Values closer than this (relative to `max(1, |.|)`) are equal.
    pub fn equal_threshold(&self) -> Float {
        self.pow10(-(3 * self.digits as i32 / 4))
    }

    /// Values farther apart than this are distinct.
    pub fn distinct_threshold(&self) -> Float {
        self.pow10(-(self.digits as i32 / 4))
    }

    pub fn pow10(&self, e: i32) -> Float {
        Float::with_val(self.bits(), 10).pow(e)
    }

    pub fn real(&self, v: impl Into<f64>) -> Float {
        Float::with_val(self.bits(), v.into())
    }

    pub fn ratio(&self, r: Ratio<i64>) -> Float {
        Float::with_val(self.bits(), *r.numer()) / Float::with_val(self.bits(), *r.denom())
    }

    pub fn pi(&self) -> Float {
        Float::with_val(self.bits(), Constant::Pi)
    }
}

/// Outcome of comparing two values under the two-sided hysteresis rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    Equal,
    Distinct,
    Undecided,
}

/// Compares `|a - b|` relative to `max(1, |a|, |b|)` against the thresholds.
pub fn compare(a: &AppComplex, b: &AppComplex, ctx: &PrecisionContext) -> Comparison {
    let scale = a.abs().max(&b.abs()).max(&Float::with_val(ctx.bits(), 1));
    let rel = (a - b).abs() / scale;
    if rel < ctx.equal_threshold() {
        Comparison::Equal
    } else if rel > ctx.distinct_threshold() {
        Comparison::Distinct
    } else {
        Comparison::Undecided
    }
}

/// Complex number with MPFR real and imaginary parts.
#[derive(Clone, PartialEq)]
pub struct AppComplex {
    pub re: Float,
    pub im: Float,
}

impl AppComplex {
    pub fn new(re: Float, im: Float) -> Self {
        AppComplex { re, im }
    }

    pub fn zero(prec: u32) -> Self {
        AppComplex { re: Float::new(prec), im: Float::new(prec) }
    }

    pub fn one(prec: u32) -> Self {
        Self::from_real(Float::with_val(prec, 1))
    }

    pub fn from_real(re: Float) -> Self {
        let im = Float::new(re.prec());
        AppComplex { re, im }
    }

    pub fn from_f64(prec: u32, re: f64, im: f64) -> Self {
        AppComplex { re: Float::with_val(prec, re), im: Float::with_val(prec, im) }
    }

    pub fn i(prec: u32) -> Self {
        AppComplex { re: Float::new(prec), im: Float::with_val(prec, 1) }
    }

    pub fn prec(&self) -> u32 {
        self.re.prec()
    }

    pub fn conj(&self) -> Self {
        AppComplex { re: self.re.clone(), im: -self.im.clone() }
    }

    pub fn norm_sqr(&self) -> Float {
        Float::with_val(self.prec(), self.re.square_ref()) + Float::with_val(self.prec(), self.im.square_ref())
    }

    pub fn abs(&self) -> Float {
        self.re.clone().hypot(&self.im)
    }

    pub fn arg(&self) -> Float {
        self.im.clone().atan2(&self.re)
    }

    pub fn scale(&self, k: &Float) -> Self {
        AppComplex { re: Float::with_val(self.prec(), &self.re * k), im: Float::with_val(self.prec(), &self.im * k) }
    }

    pub fn mul_i(&self) -> Self {
        AppComplex { re: -self.im.clone(), im: self.re.clone() }
    }

    pub fn inv(&self) -> Self {
        let n = self.norm_sqr();
        AppComplex { re: Float::with_val(self.prec(), &self.re / &n), im: -Float::with_val(self.prec(), &self.im / &n) }
    }

    pub fn div(&self, o: &AppComplex) -> Self {
        self * &o.inv()
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn powu(&self, mut e: u32) -> Self {
        let mut base = self.clone();
        let mut acc = AppComplex::one(self.prec());
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    pub fn exp(&self) -> Self {
        let r = self.re.clone().exp();
        let (s, c) = self.im.clone().sin_cos(Float::new(self.prec()));
        AppComplex { re: Float::with_val(self.prec(), &r * &c), im: r * s }
    }

    /// Principal logarithm.
    pub fn ln(&self) -> Self {
        AppComplex { re: self.abs().ln(), im: self.arg() }
    }

    /// `exp(2 pi i x)` for a real `x`.
    pub fn expi2pi(x: &Float) -> Self {
        let prec = x.prec();
        let theta = Float::with_val(prec, Constant::Pi) * 2u32 * x;
        let (s, c) = theta.sin_cos(Float::new(prec));
        AppComplex { re: c, im: s }
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.re.to_f64(), self.im.to_f64())
    }

    /// Decimal strings with the given number of significant digits.
    pub fn to_strings(&self, digits: usize) -> (String, String) {
        (decimal(&self.re, digits), decimal(&self.im, digits))
    }
}

pub fn decimal(x: &Float, digits: usize) -> String {
    if x.is_zero() {
        return "0".to_string();
    }
    x.to_string_radix(10, Some(digits))
}

impl fmt::Debug for AppComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (re, im) = self.to_strings(25);
        write!(f, "({re}) + ({im})i")
    }
}

impl fmt::Display for AppComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl<'a> Add<&'a AppComplex> for &'a AppComplex {
    type Output = AppComplex;
    fn add(self, o: &AppComplex) -> AppComplex {
        let p = self.prec().max(o.prec());
        AppComplex { re: Float::with_val(p, &self.re + &o.re), im: Float::with_val(p, &self.im + &o.im) }
    }
}

impl<'a> Sub<&'a AppComplex> for &'a AppComplex {
    type Output = AppComplex;
    fn sub(self, o: &AppComplex) -> AppComplex {
        let p = self.prec().max(o.prec());
        AppComplex { re: Float::with_val(p, &self.re - &o.re), im: Float::with_val(p, &self.im - &o.im) }
    }
}

impl<'a> Mul<&'a AppComplex> for &'a AppComplex {
    type Output = AppComplex;
    fn mul(self, o: &AppComplex) -> AppComplex {
        let p = self.prec().max(o.prec());
        let ac = Float::with_val(p, &self.re * &o.re);
        let bd = Float::with_val(p, &self.im * &o.im);
        let ad = Float::with_val(p, &self.re * &o.im);
        let bc = Float::with_val(p, &self.im * &o.re);
        AppComplex { re: ac - bd, im: ad + bc }
    }
}

impl Neg for &AppComplex {
    type Output = AppComplex;
    fn neg(self) -> AppComplex {
        AppComplex { re: -self.re.clone(), im: -self.im.clone() }
    }
}

impl Add for AppComplex {
    type Output = AppComplex;
    fn add(self, o: AppComplex) -> AppComplex {
        &self + &o
    }
}

impl Sub for AppComplex {
    type Output = AppComplex;
    fn sub(self, o: AppComplex) -> AppComplex {
        &self - &o
    }
}

impl Mul for AppComplex {
    type Output = AppComplex;
    fn mul(self, o: AppComplex) -> AppComplex {
        &self * &o
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precision_policy() {
        let ctx = PrecisionContext::default();
        assert_eq!((ctx.digits, ctx.guard, ctx.max_escalations), (100, 20, 3));
        assert!(PrecisionContext::new(29).is_err());
        assert!(PrecisionContext::with_guard(50, 9).is_err());
        assert_eq!(ctx.escalated().digits, 200);
        assert!(ctx.bits() as f64 >= 120.0 * std::f64::consts::LOG2_10);
    }

    #[test]
    fn exp_ln_round_trip() {
        let ctx = PrecisionContext::default();
        let z = AppComplex::from_f64(ctx.bits(), 0.3, -1.7);
        let back = z.exp().ln();
        assert!((&back - &z).abs() < ctx.identity_tolerance());
        let w = AppComplex::from_f64(ctx.bits(), -2.0, 0.5);
        assert!((&(&w * &w.inv()) - &AppComplex::one(ctx.bits())).abs() < ctx.identity_tolerance());
        assert!((&w.powu(5) - &(&(&w.square() * &w.square()) * &w)).abs() < ctx.identity_tolerance());
    }

    #[test]
    fn hysteresis_classes() {
        let ctx = PrecisionContext::new(40).unwrap();
        let a = AppComplex::from_f64(ctx.bits(), 1.0, 0.0);
        let tiny = AppComplex::from_real(ctx.pow10(-35));
        let mid = AppComplex::from_real(ctx.pow10(-20));
        let big = AppComplex::from_real(ctx.pow10(-5));
        assert_eq!(compare(&a, &(&a + &tiny), &ctx), Comparison::Equal);
        assert_eq!(compare(&a, &(&a + &mid), &ctx), Comparison::Undecided);
        assert_eq!(compare(&a, &(&a + &big), &ctx), Comparison::Distinct);
    }
}
