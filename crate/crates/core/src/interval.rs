//! Closed real intervals with MPFR endpoints and outward (directed) rounding.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

use rug::float::{Constant, Round};
use rug::ops::{AssignRound, Pow};
use rug::{Float, Integer, Rational};

use crate::error::{invalid, Error, Result};

/// A closed interval `[lo, hi]`; every operation returns an enclosure of the
/// exact image of its operands.
#[derive(Clone, PartialEq)]
pub struct Interval {
    lo: Float,
    hi: Float,
}

fn down<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Down).0
}

fn up<T>(prec: u32, v: T) -> Float
where
    Float: AssignRound<T, Round = Round, Ordering = Ordering>,
{
    Float::with_val_round(prec, v, Round::Up).0
}

fn fmin(a: Float, b: Float) -> Float {
    if b < a {
        b
    } else {
        a
    }
}

fn fmax(a: Float, b: Float) -> Float {
    if b > a {
        b
    } else {
        a
    }
}

impl Interval {
    /// Builds `[lo, hi]`, rounding each endpoint outward to `prec` bits.
    pub fn new(lo: &Float, hi: &Float, prec: u32) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(invalid("interval endpoints must satisfy lo <= hi"));
        }
        Ok(Interval { lo: down(prec, lo), hi: up(prec, hi) })
    }

    pub fn point_int(v: i64, prec: u32) -> Self {
        Interval { lo: down(prec, v), hi: up(prec, v) }
    }

    pub fn from_integer(v: &Integer, prec: u32) -> Self {
        Interval { lo: down(prec, v), hi: up(prec, v) }
    }

    pub fn from_rational(v: &Rational, prec: u32) -> Self {
        Interval { lo: down(prec, v), hi: up(prec, v) }
    }

    /// Enclosure of `[lo, hi]` for rational endpoints.
    pub fn from_rationals(lo: &Rational, hi: &Rational, prec: u32) -> Result<Self> {
        if lo > hi {
            return Err(invalid("interval endpoints must satisfy lo <= hi"));
        }
        Ok(Interval { lo: down(prec, lo), hi: up(prec, hi) })
    }

    /// `mid ± rad` for an exact rational midpoint and a nonnegative radius.
    pub fn from_mid_rad(mid: &Rational, rad: &Rational, prec: u32) -> Result<Self> {
        if *rad < 0 {
            return Err(invalid("radius must be nonnegative"));
        }
        let lo = Rational::from(mid - rad);
        let hi = Rational::from(mid + rad);
        Self::from_rationals(&lo, &hi, prec)
    }

    pub fn pi(prec: u32) -> Self {
        Interval { lo: down(prec, Constant::Pi), hi: up(prec, Constant::Pi) }
    }

    pub fn lo(&self) -> &Float {
        &self.lo
    }

    pub fn hi(&self) -> &Float {
        &self.hi
    }

    pub fn prec(&self) -> u32 {
        self.lo.prec().max(self.hi.prec())
    }

    /// The same interval rounded outward to `prec` bits.
    pub fn with_prec(&self, prec: u32) -> Self {
        Interval { lo: down(prec, &self.lo), hi: up(prec, &self.hi) }
    }

    /// Upper bound on `hi - lo`.
    pub fn width(&self) -> Float {
        up(self.prec(), &self.hi - &self.lo)
    }

    /// Midpoint rounded to nearest; a point estimate, not an enclosure.
    pub fn mid(&self) -> Float {
        let s = Float::with_val(self.prec() + 1, &self.lo + &self.hi);
        s / 2u32
    }

    /// Upper bound on `max |x|`.
    pub fn mag(&self) -> Float {
        let a = Float::with_val(self.prec(), self.lo.abs_ref());
        let b = Float::with_val(self.prec(), self.hi.abs_ref());
        fmax(a, b)
    }

    pub fn contains_zero(&self) -> bool {
        self.lo <= 0 && self.hi >= 0
    }

    pub fn excludes_zero(&self) -> bool {
        !self.contains_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.lo > 0
    }

    pub fn is_negative(&self) -> bool {
        self.hi < 0
    }

    pub fn contains(&self, x: &Float) -> bool {
        self.lo <= *x && *x <= self.hi
    }

    pub fn contains_rational(&self, x: &Rational) -> bool {
        self.lo <= *x && self.hi >= *x
    }

    pub fn contains_interval(&self, other: &Interval) -> bool {
        self.lo <= other.lo && other.hi <= self.hi
    }

    pub fn overlaps(&self, other: &Interval) -> bool {
        self.lo <= other.hi && other.lo <= self.hi
    }

    /// Strictly below: every point of `self` is less than every point of `other`.
    pub fn strictly_less(&self, other: &Interval) -> bool {
        self.hi < other.lo
    }

    pub fn hull(&self, other: &Interval) -> Interval {
        Interval { lo: fmin(self.lo.clone(), other.lo.clone()), hi: fmax(self.hi.clone(), other.hi.clone()) }
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        if !self.overlaps(other) {
            return None;
        }
        Some(Interval { lo: fmax(self.lo.clone(), other.lo.clone()), hi: fmin(self.hi.clone(), other.hi.clone()) })
    }

    /// Widens by `r >= 0` on both sides.
    pub fn inflate(&self, r: &Rational) -> Interval {
        let p = self.prec();
        Interval { lo: down(p, &self.lo - r), hi: up(p, &self.hi + r) }
    }

    pub fn abs(&self) -> Interval {
        if self.lo >= 0 {
            self.clone()
        } else if self.hi <= 0 {
            -self
        } else {
            let p = self.prec();
            Interval { lo: Float::with_val(p, 0), hi: self.mag() }
        }
    }

    pub fn add(&self, b: &Interval) -> Interval {
        let p = self.prec().max(b.prec());
        Interval { lo: down(p, &self.lo + &b.lo), hi: up(p, &self.hi + &b.hi) }
    }

    pub fn sub(&self, b: &Interval) -> Interval {
        let p = self.prec().max(b.prec());
        Interval { lo: down(p, &self.lo - &b.hi), hi: up(p, &self.hi - &b.lo) }
    }

    pub fn mul(&self, b: &Interval) -> Interval {
        let p = self.prec().max(b.prec());
        let pairs = [(&self.lo, &b.lo), (&self.lo, &b.hi), (&self.hi, &b.lo), (&self.hi, &b.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (x, y) in pairs {
            let l = down(p, x * y);
            let h = up(p, x * y);
            lo = Some(match lo {
                Some(c) => fmin(c, l),
                None => l,
            });
            hi = Some(match hi {
                Some(c) => fmax(c, h),
                None => h,
            });
        }
        Interval { lo: lo.unwrap(), hi: hi.unwrap() }
    }

    pub fn div(&self, b: &Interval) -> Result<Interval> {
        if b.contains_zero() {
            return Err(Error::DivisionByZero);
        }
        let p = self.prec().max(b.prec());
        let pairs = [(&self.lo, &b.lo), (&self.lo, &b.hi), (&self.hi, &b.lo), (&self.hi, &b.hi)];
        let mut lo: Option<Float> = None;
        let mut hi: Option<Float> = None;
        for (x, y) in pairs {
            let l = down(p, x / y);
            let h = up(p, x / y);
            lo = Some(match lo {
                Some(c) => fmin(c, l),
                None => l,
            });
            hi = Some(match hi {
                Some(c) => fmax(c, h),
                None => h,
            });
        }
        Ok(Interval { lo: lo.unwrap(), hi: hi.unwrap() })
    }

    pub fn mul_rational(&self, r: &Rational) -> Interval {
        self.mul(&Interval::from_rational(r, self.prec()))
    }

    pub fn mul_integer(&self, r: &Integer) -> Interval {
        self.mul(&Interval::from_integer(r, self.prec()))
    }

    pub fn div_integer(&self, r: &Integer) -> Result<Interval> {
        self.div(&Interval::from_integer(r, self.prec()))
    }

    pub fn add_rational(&self, r: &Rational) -> Interval {
        let p = self.prec();
        Interval { lo: down(p, &self.lo + r), hi: up(p, &self.hi + r) }
    }

    pub fn recip(&self) -> Result<Interval> {
        Interval::point_int(1, self.prec()).div(self)
    }

    pub fn sqr(&self) -> Interval {
        let p = self.prec();
        if self.lo >= 0 {
            Interval { lo: down(p, self.lo.square_ref()), hi: up(p, self.hi.square_ref()) }
        } else if self.hi <= 0 {
            Interval { lo: down(p, self.hi.square_ref()), hi: up(p, self.lo.square_ref()) }
        } else {
            let m = self.mag();
            Interval { lo: Float::with_val(p, 0), hi: up(p, m.square_ref()) }
        }
    }

    pub fn pow(&self, k: u32) -> Interval {
        let p = self.prec();
        if k == 0 {
            return Interval::point_int(1, p);
        }
        if k % 2 == 1 || self.lo >= 0 {
            // monotone on the whole interval
            Interval { lo: down(p, (&self.lo).pow(k)), hi: up(p, (&self.hi).pow(k)) }
        } else if self.hi <= 0 {
            Interval { lo: down(p, (&self.hi).pow(k)), hi: up(p, (&self.lo).pow(k)) }
        } else {
            let m = self.mag();
            Interval { lo: Float::with_val(p, 0), hi: up(p, (&m).pow(k)) }
        }
    }

    pub fn exp(&self) -> Interval {
        let p = self.prec();
        Interval { lo: down(p, self.lo.exp_ref()), hi: up(p, self.hi.exp_ref()) }
    }

    pub fn ln(&self) -> Result<Interval> {
        if self.lo <= 0 {
            return Err(invalid("ln of an interval not strictly positive"));
        }
        let p = self.prec();
        Ok(Interval { lo: down(p, self.lo.ln_ref()), hi: up(p, self.hi.ln_ref()) })
    }

    pub fn sqrt(&self) -> Result<Interval> {
        if self.lo < 0 {
            return Err(invalid("sqrt of an interval with negative part"));
        }
        let p = self.prec();
        Ok(Interval { lo: down(p, self.lo.sqrt_ref()), hi: up(p, self.hi.sqrt_ref()) })
    }

    /// Decimal string of `lo` rounded down to `sig` significant digits.
    pub fn lo_decimal(&self, sig: usize) -> String {
        self.lo.to_string_radix_round(10, Some(sig), Round::Down)
    }

    /// Decimal string of `hi` rounded up to `sig` significant digits.
    pub fn hi_decimal(&self, sig: usize) -> String {
        self.hi.to_string_radix_round(10, Some(sig), Round::Up)
    }

    /// Midpoint as an `f64`, for telemetry and quick comparisons only.
    pub fn to_f64(&self) -> f64 {
        self.mid().to_f64()
    }

    /// Exact rational value of `lo` (finite endpoints only).
    pub fn lo_rational(&self) -> Option<Rational> {
        self.lo.to_rational()
    }

    pub fn hi_rational(&self) -> Option<Rational> {
        self.hi.to_rational()
    }

    /// Compares `self` with `other` when the two are disjoint.
    pub fn certain_cmp(&self, other: &Interval) -> Option<Ordering> {
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }
}

impl fmt::Debug for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo_decimal(25), self.hi_decimal(25))
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo_decimal(20), self.hi_decimal(20))
    }
}

impl Neg for &Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        Interval { lo: Float::with_val(self.hi.prec(), -&self.hi), hi: Float::with_val(self.lo.prec(), -&self.lo) }
    }
}

impl Neg for Interval {
    type Output = Interval;
    fn neg(self) -> Interval {
        -&self
    }
}

impl Add for &Interval {
    type Output = Interval;
    fn add(self, rhs: &Interval) -> Interval {
        Interval::add(self, rhs)
    }
}

impl Sub for &Interval {
    type Output = Interval;
    fn sub(self, rhs: &Interval) -> Interval {
        Interval::sub(self, rhs)
    }
}

impl Mul for &Interval {
    type Output = Interval;
    fn mul(self, rhs: &Interval) -> Interval {
        Interval::mul(self, rhs)
    }
}

impl Div for &Interval {
    type Output = Result<Interval>;
    fn div(self, rhs: &Interval) -> Result<Interval> {
        Interval::div(self, rhs)
    }
}

/// Which arithmetic operation [`iv_arith`] applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

pub fn iv_arith(a: &Interval, b: &Interval, op: ArithOp) -> Result<Interval> {
    match op {
        ArithOp::Add => Ok(a.add(b)),
        ArithOp::Sub => Ok(a.sub(b)),
        ArithOp::Mul => Ok(a.mul(b)),
        ArithOp::Div => a.div(b),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const P: u32 = 64;

    fn iv(lo: i64, hi: i64) -> Interval {
        Interval::from_rationals(&Rational::from(lo), &Rational::from(hi), P).unwrap()
    }

    #[test]
    fn trivial_examples() {
        let s = iv_arith(&iv(1, 1), &iv(2, 2), ArithOp::Add).unwrap();
        assert!(s.contains_rational(&Rational::from(3)));
        assert_eq!(*s.lo(), 3);
        assert_eq!(*s.hi(), 3);

        let m = iv_arith(&iv(-1, 1), &iv(-1, 1), ArithOp::Mul).unwrap();
        assert!(m.contains_interval(&iv(-1, 1)));

        let d = iv_arith(&iv(1, 2), &iv(4, 4), ArithOp::Div).unwrap();
        let quarter_half = Interval::from_rationals(&Rational::from((1, 4)), &Rational::from((1, 2)), P).unwrap();
        assert!(d.contains_interval(&quarter_half));
    }

    #[test]
    fn division_by_zero_interval_is_error() {
        assert!(matches!(iv(1, 2).div(&iv(-1, 1)), Err(Error::DivisionByZero)));
        assert!(matches!(iv(1, 2).div(&iv(0, 0)), Err(Error::DivisionByZero)));
    }

    #[test]
    fn third_is_enclosed_not_exact() {
        let t = iv(1, 1).div(&iv(3, 3)).unwrap();
        assert!(t.contains_rational(&Rational::from((1, 3))));
        assert!(t.lo() < t.hi());
    }

    #[test]
    fn pow_and_sqr_handle_zero_straddle() {
        let x = iv(-2, 1);
        let s = x.sqr();
        assert_eq!(*s.lo(), 0);
        assert_eq!(*s.hi(), 4);
        let c = x.pow(3);
        assert_eq!(*c.lo(), -8);
        assert_eq!(*c.hi(), 1);
        let q = x.pow(4);
        assert_eq!(*q.lo(), 0);
        assert_eq!(*q.hi(), 16);
    }

    #[test]
    fn elementary_functions_enclose() {
        let one = Interval::point_int(1, 128);
        let e = one.exp();
        let mpfr_e = Float::with_val(256, 1).exp();
        assert!(e.contains(&mpfr_e));
        let l = e.ln().unwrap();
        assert!(l.contains_rational(&Rational::from(1)));
        let two = Interval::point_int(2, 128);
        let r = two.sqrt().unwrap();
        assert!(r.sqr().contains_rational(&Rational::from(2)));
        assert!(Interval::point_int(-1, 64).ln().is_err());
    }

    fn rat() -> impl Strategy<Value = Rational> {
        (-1000i64..1000, 1i64..100).prop_map(|(n, d)| Rational::from((n, d)))
    }

    fn rat_iv() -> impl Strategy<Value = (Rational, Rational, Rational)> {
        (rat(), rat(), 0u32..=100).prop_map(|(a, b, t)| {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            // an interior point lo + t/100 (hi - lo)
            let x = Rational::from(&hi - &lo) * Rational::from((t, 100)) + &lo;
            (lo, hi, x)
        })
    }

    proptest! {
        #[test]
        fn arithmetic_is_sound((alo, ahi, x) in rat_iv(), (blo, bhi, y) in rat_iv()) {
            let a = Interval::from_rationals(&alo, &ahi, P).unwrap();
            let b = Interval::from_rationals(&blo, &bhi, P).unwrap();
            let sum = Rational::from(&x + &y);
            prop_assert!(iv_arith(&a, &b, ArithOp::Add).unwrap().contains_rational(&sum));
            let diff = Rational::from(&x - &y);
            prop_assert!(iv_arith(&a, &b, ArithOp::Sub).unwrap().contains_rational(&diff));
            let prod = Rational::from(&x * &y);
            prop_assert!(iv_arith(&a, &b, ArithOp::Mul).unwrap().contains_rational(&prod));
            match iv_arith(&a, &b, ArithOp::Div) {
                Ok(q) => {
                    let quo = Rational::from(&x / &y);
                    prop_assert!(q.contains_rational(&quo));
                }
                Err(Error::DivisionByZero) => prop_assert!(b.contains_zero()),
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }
}
