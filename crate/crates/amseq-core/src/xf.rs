//! Extended-precision interval arithmetic.
//!
//! Transcendental sequence values (powers of `omega`, log factors) are computed
//! with 128-bit-significand floats and kept as certified `[lo, hi]` brackets.
//! astro-float's rounding modes only break ties, so every operation widens the
//! bracket outward by a fixed relative slack that dominates the 1-ulp error of
//! a correctly rounded library call.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use std::cell::RefCell;
use std::cmp::Ordering;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::ToPrimitive;

/// Working precision in bits. Two words on 64-bit targets.
pub const PREC: usize = 128;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(Consts::new().expect("constants cache"));
}

fn with_consts<T>(f: impl FnOnce(&mut Consts) -> T) -> T {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// A single extended-precision value. Thin wrapper so the astro-float API
/// stays contained in this module.
#[derive(Clone, Debug)]
pub struct Xf(BigFloat);

impl Xf {
    pub fn from_u64(v: u64) -> Self {
        Xf(BigFloat::from_u64(v, PREC))
    }

    pub fn from_i64(v: i64) -> Self {
        Xf(BigFloat::from_i64(v, PREC))
    }

    pub fn from_f64(v: f64) -> Self {
        Xf(BigFloat::from_f64(v, PREC))
    }

    pub fn from_bigint(v: &BigInt) -> Self {
        // Exact when |v| < 2^128, otherwise truncated toward zero by the
        // string route; callers needing certified bounds go through Iv.
        let (sign, digits) = v.to_u64_digits();
        let mut acc = BigFloat::from_u64(0, PREC);
        let shift = BigFloat::from_u64(1u64 << 32, PREC)
            .mul(&BigFloat::from_u64(1u64 << 32, PREC), PREC + 64, RM);
        for d in digits.iter().rev() {
            acc = acc.mul(&shift, PREC + 64, RM);
            acc = acc.add(&BigFloat::from_u64(*d, PREC + 64), PREC + 64, RM);
        }
        if sign == num::bigint::Sign::Minus {
            acc = acc.neg();
        }
        Xf(acc)
    }

    pub fn zero() -> Self {
        Xf(BigFloat::from_u64(0, PREC))
    }

    pub fn one() -> Self {
        Xf(BigFloat::from_u64(1, PREC))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative() && !self.0.is_zero()
    }

    fn add(&self, rhs: &Self) -> Self {
        Xf(self.0.add(&rhs.0, PREC, RM))
    }

    fn sub(&self, rhs: &Self) -> Self {
        Xf(self.0.sub(&rhs.0, PREC, RM))
    }

    fn mul(&self, rhs: &Self) -> Self {
        Xf(self.0.mul(&rhs.0, PREC, RM))
    }

    fn div(&self, rhs: &Self) -> Self {
        Xf(self.0.div(&rhs.0, PREC, RM))
    }

    fn ln(&self) -> Self {
        Xf(with_consts(|cc| self.0.ln(PREC, RM, cc)))
    }

    fn exp(&self) -> Self {
        Xf(with_consts(|cc| self.0.exp(PREC, RM, cc)))
    }

    fn neg(&self) -> Self {
        Xf(self.0.neg())
    }

    /// Nudge the value outward: `dir > 0` rounds up, `dir < 0` rounds down,
    /// by a relative step of 2^-SLACK_BITS (absolute step near zero).
    fn nudge(&self, dir: i8) -> Self {
        const SLACK_BITS: i32 = 108;
        if self.0.is_zero() {
            // Absolute floor for zero: 2^-2000 is far below anything we sum.
            let mut tiny = BigFloat::from_u64(1, PREC);
            tiny.set_exponent(-2000);
            return if dir > 0 { Xf(tiny) } else { Xf(tiny.neg()) };
        }
        let e = self.0.exponent().unwrap_or(0);
        let mut step = BigFloat::from_u64(1, PREC);
        step.set_exponent(e.saturating_sub(SLACK_BITS));
        if dir > 0 {
            Xf(self.0.add(&step, PREC, RoundingMode::FromZero))
        } else {
            Xf(self.0.sub(&step, PREC, RoundingMode::FromZero))
        }
    }

    /// Directed conversion to f64. `dir < 0` guarantees result <= value,
    /// `dir > 0` guarantees result >= value.
    pub fn to_f64_dir(&self, dir: i8) -> f64 {
        if self.0.is_zero() {
            return 0.0;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, bitlen, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        debug_assert!(bitlen >= 64);
        let top = words[words.len() - 1];
        let rest_nonzero = words[..words.len() - 1].iter().any(|w| *w != 0) || (top & 0x7FF) != 0;
        let mut mag53 = top >> 11;
        let neg = sign == Sign::Neg;
        // Round the magnitude: up when the final value must not be below the
        // true one (positive/up or negative/down), down otherwise.
        let round_mag_up = rest_nonzero && ((dir > 0) != neg);
        if round_mag_up {
            mag53 += 1;
        }
        let e = exp as i32 - 53;
        let mut val = (mag53 as f64) * pow2(e);
        if e <= -1075 {
            // result is subnormal; bits of mag53 below the 2^-1074 grid are
            // lost in the product
            let lost = (-1074 - e).min(63) as u32;
            let inexact_sub = (mag53 & ((1u64 << lost) - 1)) != 0;
            if inexact_sub || e < -1127 {
                val = if (dir > 0) != neg { val.next_up() } else { val.next_down() };
            }
        }
        if neg {
            -val
        } else {
            val
        }
    }

    pub fn cmp_xf(&self, rhs: &Self) -> Ordering {
        match self.0.cmp(&rhs.0) {
            Some(d) if d < 0 => Ordering::Less,
            Some(d) if d > 0 => Ordering::Greater,
            _ => Ordering::Equal,
        }
    }
}

/// 2^e in f64 with saturation, exact down to subnormals.
fn pow2(e: i32) -> f64 {
    if e >= 1024 {
        f64::INFINITY
    } else if e >= -1022 {
        f64::from_bits(((e + 1023) as u64) << 52)
    } else if e >= -1074 {
        f64::from_bits(1u64 << (e + 1074))
    } else {
        0.0
    }
}

/// Certified interval `[lo, hi]` of extended-precision endpoints.
#[derive(Clone, Debug)]
pub struct Iv {
    lo: Xf,
    hi: Xf,
}

impl Iv {
    pub fn point(x: Xf) -> Self {
        Iv { lo: x.clone(), hi: x }
    }

    pub fn new(lo: Xf, hi: Xf) -> Self {
        debug_assert!(lo.cmp_xf(&hi) != Ordering::Greater, "inverted interval");
        Iv { lo, hi }
    }

    pub fn zero() -> Self {
        Iv::point(Xf::zero())
    }

    pub fn from_u64(v: u64) -> Self {
        Iv::point(Xf::from_u64(v))
    }

    pub fn from_f64(v: f64) -> Self {
        Iv::point(Xf::from_f64(v))
    }

    pub fn from_rational(q: &BigRational) -> Self {
        let n = Xf::from_bigint(q.numer());
        let d = Xf::from_bigint(q.denom());
        // Division result gets the standard outward slack; the bigint
        // conversions are exact below 2^128 and we only ever convert
        // numerators/denominators well under that.
        Iv {
            lo: n.div(&d).nudge(-1),
            hi: n.div(&d).nudge(1),
        }
    }

    pub fn lo(&self) -> &Xf {
        &self.lo
    }

    pub fn hi(&self) -> &Xf {
        &self.hi
    }

    pub fn lo_f64(&self) -> f64 {
        self.lo.to_f64_dir(-1)
    }

    pub fn hi_f64(&self) -> f64 {
        self.hi.to_f64_dir(1)
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo_f64() + self.hi_f64())
    }

    pub fn width_f64(&self) -> f64 {
        self.hi_f64() - self.lo_f64()
    }

    pub fn is_nonnegative(&self) -> bool {
        !self.lo.is_negative()
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Iv {
            lo: self.lo.add(&rhs.lo).nudge(-1),
            hi: self.hi.add(&rhs.hi).nudge(1),
        }
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Iv {
            lo: self.lo.sub(&rhs.hi).nudge(-1),
            hi: self.hi.sub(&rhs.lo).nudge(1),
        }
    }

    pub fn neg(&self) -> Self {
        Iv {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    /// Multiplication for arbitrary-sign intervals.
    pub fn mul(&self, rhs: &Self) -> Self {
        let cands = [
            self.lo.mul(&rhs.lo),
            self.lo.mul(&rhs.hi),
            self.hi.mul(&rhs.lo),
            self.hi.mul(&rhs.hi),
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if c.cmp_xf(&lo) == Ordering::Less {
                lo = c.clone();
            }
            if c.cmp_xf(&hi) == Ordering::Greater {
                hi = c.clone();
            }
        }
        Iv {
            lo: lo.nudge(-1),
            hi: hi.nudge(1),
        }
    }

    /// Division; requires the divisor interval to exclude zero.
    pub fn div(&self, rhs: &Self) -> Self {
        assert!(
            rhs.lo.is_negative() == rhs.hi.is_negative() && !rhs.lo.is_zero() && !rhs.hi.is_zero(),
            "interval division by a range containing zero"
        );
        let cands = [
            self.lo.div(&rhs.lo),
            self.lo.div(&rhs.hi),
            self.hi.div(&rhs.lo),
            self.hi.div(&rhs.hi),
        ];
        let mut lo = cands[0].clone();
        let mut hi = cands[0].clone();
        for c in &cands[1..] {
            if c.cmp_xf(&lo) == Ordering::Less {
                lo = c.clone();
            }
            if c.cmp_xf(&hi) == Ordering::Greater {
                hi = c.clone();
            }
        }
        Iv {
            lo: lo.nudge(-1),
            hi: hi.nudge(1),
        }
    }

    pub fn scale_u64(&self, k: u64) -> Self {
        let k = Iv::from_u64(k);
        self.mul(&k)
    }

    pub fn div_u64(&self, k: u64) -> Self {
        self.div(&Iv::from_u64(k))
    }

    /// Natural log; requires a strictly positive interval.
    pub fn ln(&self) -> Self {
        assert!(!self.lo.is_negative() && !self.lo.is_zero(), "ln of non-positive interval");
        Iv {
            lo: self.lo.ln().nudge(-1),
            hi: self.hi.ln().nudge(1),
        }
    }

    pub fn exp(&self) -> Self {
        Iv {
            lo: self.lo.exp().nudge(-1),
            hi: self.hi.exp().nudge(1),
        }
    }

    /// `self^e` for a strictly positive base and arbitrary real exponent,
    /// via exp(e * ln(base)).
    pub fn powf(&self, e: f64) -> Self {
        if e == 0.0 {
            return Iv::point(Xf::one());
        }
        self.ln().mul(&Iv::from_f64(e)).exp()
    }

    pub fn recip(&self) -> Self {
        Iv::point(Xf::one()).div(self)
    }

    pub fn min_iv(&self, rhs: &Self) -> Self {
        let lo = if self.lo.cmp_xf(&rhs.lo) == Ordering::Less { self.lo.clone() } else { rhs.lo.clone() };
        let hi = if self.hi.cmp_xf(&rhs.hi) == Ordering::Less { self.hi.clone() } else { rhs.hi.clone() };
        Iv { lo, hi }
    }

    pub fn max_iv(&self, rhs: &Self) -> Self {
        let lo = if self.lo.cmp_xf(&rhs.lo) == Ordering::Greater { self.lo.clone() } else { rhs.lo.clone() };
        let hi = if self.hi.cmp_xf(&rhs.hi) == Ordering::Greater { self.hi.clone() } else { rhs.hi.clone() };
        Iv { lo, hi }
    }

    pub fn hull(&self, rhs: &Self) -> Self {
        let lo = if self.lo.cmp_xf(&rhs.lo) == Ordering::Less { self.lo.clone() } else { rhs.lo.clone() };
        let hi = if self.hi.cmp_xf(&rhs.hi) == Ordering::Greater { self.hi.clone() } else { rhs.hi.clone() };
        Iv { lo, hi }
    }

    /// Clamp the lower endpoint up to zero (values known nonnegative).
    pub fn clamp_nonnegative(mut self) -> Self {
        if self.lo.is_negative() {
            self.lo = Xf::zero();
        }
        self
    }

    /// Certainly less-or-equal comparison: hi(self) <= lo(rhs).
    pub fn le_certain(&self, rhs: &Self) -> bool {
        self.hi.cmp_xf(&rhs.lo) != Ordering::Greater
    }

    /// ln of the midpoint, computed in extended precision so values far
    /// outside the f64 range still give finite logs.
    pub fn ln_mid_f64(&self) -> f64 {
        if self.lo.is_negative() || self.lo.is_zero() || self.hi.is_zero() {
            return f64::NEG_INFINITY;
        }
        let l1 = self.lo.ln();
        let l2 = self.hi.ln();
        0.5 * (l1.to_f64_dir(-1) + l2.to_f64_dir(1))
    }
}

/// ln(n) as an interval, for integer n >= 1.
pub fn ln_u64(n: u64) -> Iv {
    Iv::from_u64(n).ln()
}

/// Convert a rational to f64 roughly (for display and heuristics only).
pub fn q_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| Iv::from_rational(q).mid_f64())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::FromPrimitive;

    #[test]
    fn roundtrip_f64_direction() {
        for &v in &[1.0, 0.3, 1.0 / 3.0, 1e-12, 123456.789, 2.0_f64.powi(100), 1e-300] {
            let x = Xf::from_f64(v);
            assert_eq!(x.to_f64_dir(-1), v);
            assert_eq!(x.to_f64_dir(1), v);
            let n = Xf::from_f64(-v);
            assert_eq!(n.to_f64_dir(-1), -v);
            assert_eq!(n.to_f64_dir(1), -v);
        }
    }

    #[test]
    fn directed_conversion_brackets_thirds() {
        let third = Iv::from_u64(1).div(&Iv::from_u64(3));
        assert!(third.lo_f64() <= 1.0 / 3.0);
        assert!(third.hi_f64() >= 1.0 / 3.0);
        assert!(third.width_f64() < 1e-16);
    }

    #[test]
    fn ln_bracket_contains_truth() {
        let l = ln_u64(1_048_576);
        let truth = 1_048_576f64.ln();
        assert!(l.lo_f64() <= truth && truth <= l.hi_f64());
        assert!(l.width_f64() < 1e-12);
    }

    #[test]
    fn powf_bracket() {
        let v = Iv::from_u64(10).powf(-1.25);
        let truth = 10f64.powf(-1.25);
        assert!(v.lo_f64() <= truth && truth <= v.hi_f64());
        assert!((v.mid_f64() - truth).abs() < 1e-14);
    }

    #[test]
    fn bigint_conversion() {
        let q = BigRational::from_i64(25).unwrap() / BigRational::from_i64(48).unwrap();
        let iv = Iv::from_rational(&q);
        let truth = 25.0 / 48.0;
        assert!(iv.lo_f64() <= truth && truth <= iv.hi_f64());
    }

    #[test]
    fn interval_sum_stays_certified() {
        // sum of 10^5 copies of 1/3 must bracket 10^5/3
        let third = Iv::from_u64(1).div(&Iv::from_u64(3));
        let mut acc = Iv::zero();
        for _ in 0..100_000 {
            acc = acc.add(&third);
        }
        let truth = 100_000.0 / 3.0;
        assert!(acc.lo_f64() <= truth && truth <= acc.hi_f64());
        assert!(acc.width_f64() < 1e-9);
    }
}
