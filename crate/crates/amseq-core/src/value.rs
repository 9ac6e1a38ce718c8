//! Sequence values: exact rationals where possible, certified intervals elsewhere.

use crate::xf::{q_to_f64, Iv};
use num::rational::BigRational;
use num::{BigInt, One, Signed, Zero};
use std::fmt;

pub type Q = BigRational;

/// Build a rational from an integer pair.
pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_u64(n: u64) -> Q {
    Q::from_integer(BigInt::from(n))
}

/// Three-valued verdict for symbolic rules.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tri {
    Yes,
    No,
    Unknown,
}

impl Tri {
    pub fn and(self, rhs: Tri) -> Tri {
        match (self, rhs) {
            (Tri::No, _) | (_, Tri::No) => Tri::No,
            (Tri::Yes, Tri::Yes) => Tri::Yes,
            _ => Tri::Unknown,
        }
    }

    pub fn or(self, rhs: Tri) -> Tri {
        match (self, rhs) {
            (Tri::Yes, _) | (_, Tri::Yes) => Tri::Yes,
            (Tri::No, Tri::No) => Tri::No,
            _ => Tri::Unknown,
        }
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tri::Yes => write!(f, "yes"),
            Tri::No => write!(f, "no"),
            Tri::Unknown => write!(f, "unknown"),
        }
    }
}

/// A sequence value: exact rational or a certified interval.
#[derive(Clone, Debug)]
pub enum V {
    Exact(Q),
    Iv(Iv),
}

impl V {
    pub fn zero() -> V {
        V::Exact(Q::zero())
    }

    pub fn one() -> V {
        V::Exact(Q::one())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            V::Exact(q) => q.is_zero(),
            V::Iv(iv) => iv.lo_f64() == 0.0 && iv.hi_f64() == 0.0,
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, V::Exact(_))
    }

    pub fn as_exact(&self) -> Option<&Q> {
        match self {
            V::Exact(q) => Some(q),
            V::Iv(_) => None,
        }
    }

    pub fn to_iv(&self) -> Iv {
        match self {
            V::Exact(q) => Iv::from_rational(q),
            V::Iv(iv) => iv.clone(),
        }
    }

    pub fn lo_f64(&self) -> f64 {
        match self {
            V::Exact(q) => {
                if let Some(f) = exact_f64(q) {
                    f
                } else {
                    Iv::from_rational(q).lo_f64()
                }
            }
            V::Iv(iv) => iv.lo_f64(),
        }
    }

    pub fn hi_f64(&self) -> f64 {
        match self {
            V::Exact(q) => {
                if let Some(f) = exact_f64(q) {
                    f
                } else {
                    Iv::from_rational(q).hi_f64()
                }
            }
            V::Iv(iv) => iv.hi_f64(),
        }
    }

    pub fn mid_f64(&self) -> f64 {
        match self {
            V::Exact(q) => q_to_f64(q),
            V::Iv(iv) => iv.mid_f64(),
        }
    }

    pub fn add(&self, rhs: &V) -> V {
        match (self, rhs) {
            (V::Exact(a), V::Exact(b)) => V::Exact(a + b),
            _ => V::Iv(self.to_iv().add(&rhs.to_iv())),
        }
    }

    pub fn sub(&self, rhs: &V) -> V {
        match (self, rhs) {
            (V::Exact(a), V::Exact(b)) => V::Exact(a - b),
            _ => V::Iv(self.to_iv().sub(&rhs.to_iv())),
        }
    }

    pub fn mul(&self, rhs: &V) -> V {
        match (self, rhs) {
            (V::Exact(a), V::Exact(b)) => V::Exact(a * b),
            _ => V::Iv(self.to_iv().mul(&rhs.to_iv())),
        }
    }

    pub fn div(&self, rhs: &V) -> V {
        match (self, rhs) {
            (V::Exact(a), V::Exact(b)) => V::Exact(a / b),
            _ => V::Iv(self.to_iv().div(&rhs.to_iv())),
        }
    }

    pub fn scale_u64(&self, k: u64) -> V {
        match self {
            V::Exact(a) => V::Exact(a * q_u64(k)),
            V::Iv(iv) => V::Iv(iv.scale_u64(k)),
        }
    }

    pub fn div_u64(&self, k: u64) -> V {
        match self {
            V::Exact(a) => V::Exact(a / q_u64(k)),
            V::Iv(iv) => V::Iv(iv.div_u64(k)),
        }
    }

    pub fn min_v(&self, rhs: &V) -> V {
        match (self, rhs) {
            (V::Exact(a), V::Exact(b)) => V::Exact(a.min(b).clone()),
            _ => V::Iv(self.to_iv().min_iv(&rhs.to_iv())),
        }
    }

    pub fn max_v(&self, rhs: &V) -> V {
        match (self, rhs) {
            (V::Exact(a), V::Exact(b)) => V::Exact(a.max(b).clone()),
            _ => V::Iv(self.to_iv().max_iv(&rhs.to_iv())),
        }
    }

    /// Certainly `self <= rhs` (pessimistic under brackets).
    pub fn le_certain(&self, rhs: &V) -> bool {
        match (self, rhs) {
            (V::Exact(a), V::Exact(b)) => a <= b,
            _ => self.to_iv().le_certain(&rhs.to_iv()),
        }
    }

    pub fn is_nonnegative(&self) -> bool {
        match self {
            V::Exact(q) => !q.is_negative(),
            V::Iv(iv) => iv.is_nonnegative(),
        }
    }
}

/// f64 value when the rational is exactly representable; small rationals only.
fn exact_f64(q: &Q) -> Option<f64> {
    use num::ToPrimitive;
    let n = q.numer().to_f64()?;
    let d = q.denom().to_f64()?;
    if n.abs() < 9.0e15 && d.abs() < 9.0e15 {
        let v = n / d;
        // exact only when denominator is a power of two and mantissa fits;
        // treat as midpoint otherwise. Comparisons never rely on this.
        Some(v)
    } else {
        None
    }
}

impl fmt::Display for V {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            V::Exact(q) => write!(f, "{q}"),
            V::Iv(iv) => write!(f, "[{:.6e}, {:.6e}]", iv.lo_f64(), iv.hi_f64()),
        }
    }
}

/// A tail sum `sum_{j>n} xi_j` with certified enclosure.
#[derive(Clone, Debug)]
pub struct TailSum {
    pub n: u64,
    pub value: V,
}

impl TailSum {
    pub fn exact(n: u64, value: Q) -> Self {
        TailSum { n, value: V::Exact(value) }
    }

    pub fn bracketed(n: u64, iv: Iv) -> Self {
        TailSum { n, value: V::Iv(iv) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tri_logic() {
        assert_eq!(Tri::Yes.and(Tri::Unknown), Tri::Unknown);
        assert_eq!(Tri::No.and(Tri::Unknown), Tri::No);
        assert_eq!(Tri::Yes.or(Tri::Unknown), Tri::Yes);
        assert_eq!(Tri::No.or(Tri::No), Tri::No);
    }

    #[test]
    fn mixed_arithmetic_brackets() {
        let a = V::Exact(q(1, 3));
        let b = V::Iv(Iv::from_u64(2));
        let s = a.add(&b);
        assert!(s.lo_f64() <= 7.0 / 3.0 && 7.0 / 3.0 <= s.hi_f64());
    }

    #[test]
    fn le_certain_on_exact() {
        assert!(V::Exact(q(1, 2)).le_certain(&V::Exact(q(2, 3))));
        assert!(!V::Exact(q(2, 3)).le_certain(&V::Exact(q(1, 2))));
    }
}
