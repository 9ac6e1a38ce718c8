//! Symbolic catalog of closed-form sequences and the exact summability rules
//! that drive every "is this in ell^1 (with log weights)" decision.

use crate::value::{q_u64, Q, Tri};
use num::{One, Signed, Zero};
use std::fmt;
use std::sync::Arc;

/// A rule-generated piecewise-constant sequence: value `eps_k` on the index
/// block `(n_{k-1}, n_k]`. Rules answer the symbolic questions the block
/// table cannot (weighted summability, mass beyond the representable range).
pub trait PwRule: Send + Sync {
    /// Printable, parseable identifier.
    fn name(&self) -> String;
    /// Block k (1-based): upper breakpoint `n_k` and value `eps_k`.
    /// `None` once breakpoints leave the representable range.
    fn block(&self, k: u32) -> Option<(u64, Q)>;
    /// Does `sum_n xi_n ln^m n` converge?
    fn weighted_summable(&self, m: u32) -> Tri;
    /// Upper bound on the total mass of all blocks past block `k`
    /// (including unrepresentable ones). `None` when not summable.
    fn mass_beyond(&self, k: u32) -> Option<Q>;
}

/// Symbolic sequence description. All evaluated sequences are nonnegative,
/// nonincreasing, and converge to zero.
#[derive(Clone)]
pub enum SeqExpr {
    /// n^-p, p > 0
    OmegaPow(f64),
    /// multiplicative factor ln^r(max(n, n0)); standalone only for r < 0
    LogPow(f64),
    /// q^n for a rational 0 < q < 1
    Geom(Q),
    /// pointwise product (needed to make the spec grammar total)
    Mul(Vec<SeqExpr>),
    Sum(Vec<SeqExpr>),
    Min(Vec<SeqExpr>),
    Max(Vec<SeqExpr>),
    /// c * child for a positive rational c
    Scale(Q, Box<SeqExpr>),
    /// D_m: each entry repeated m times
    Ampliation(u32, Box<SeqExpr>),
    /// D_{1/m}: subsample at indices m*n
    Dilution(u32, Box<SeqExpr>),
    /// explicit leading values, then the child continues
    PrefixOverride(Vec<Q>, Box<SeqExpr>),
    /// explicit finite blocks (value, then zero past the last breakpoint)
    PiecewiseConstant(Vec<(u64, Q)>),
    /// rule-generated blocks
    PwRuleSeq(Arc<dyn PwRule>),
}

impl fmt::Debug for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl PartialEq for SeqExpr {
    fn eq(&self, other: &Self) -> bool {
        self.to_string() == other.to_string()
    }
}

fn fmt_exp(f: &mut fmt::Formatter<'_>, head: &str, e: f64) -> fmt::Result {
    if e == 1.0 {
        write!(f, "{head}")
    } else {
        write!(f, "{head}^{e}")
    }
}

impl fmt::Display for SeqExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SeqExpr::OmegaPow(p) => fmt_exp(f, "omega", *p),
            SeqExpr::LogPow(r) => fmt_exp(f, "log", *r),
            SeqExpr::Geom(q) => write!(f, "geom({q})"),
            SeqExpr::Mul(xs) => {
                for (i, x) in xs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{x}")?;
                }
                Ok(())
            }
            SeqExpr::Sum(xs) => write_call(f, "sum", xs),
            SeqExpr::Min(xs) => write_call(f, "min", xs),
            SeqExpr::Max(xs) => write_call(f, "max", xs),
            SeqExpr::Scale(c, x) => write!(f, "scale({c},{x})"),
            SeqExpr::Ampliation(m, x) => write!(f, "D{m}({x})"),
            SeqExpr::Dilution(m, x) => write!(f, "Dinv{m}({x})"),
            SeqExpr::PrefixOverride(vals, x) => {
                write!(f, "override(")?;
                for (i, v) in vals.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{v}")?;
                }
                write!(f, ";{x})")
            }
            SeqExpr::PiecewiseConstant(blocks) => {
                write!(f, "values(")?;
                let mut first = true;
                let mut prev = 0u64;
                for (bp, v) in blocks {
                    for _ in prev..*bp {
                        if !first {
                            write!(f, ",")?;
                        }
                        first = false;
                        write!(f, "{v}")?;
                    }
                    prev = *bp;
                }
                write!(f, ")")
            }
            SeqExpr::PwRuleSeq(rule) => write!(f, "pw({})", rule.name()),
        }
    }
}

fn write_call(f: &mut fmt::Formatter<'_>, name: &str, xs: &[SeqExpr]) -> fmt::Result {
    write!(f, "{name}(")?;
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{x}")?;
    }
    write!(f, ")")
}

impl SeqExpr {
    pub fn omega() -> SeqExpr {
        SeqExpr::OmegaPow(1.0)
    }

    pub fn omega_pow(p: f64) -> SeqExpr {
        SeqExpr::OmegaPow(p)
    }

    /// omega^p * log^r
    pub fn omega_log(p: f64, r: f64) -> SeqExpr {
        if r == 0.0 {
            SeqExpr::OmegaPow(p)
        } else if p == 0.0 {
            SeqExpr::LogPow(r)
        } else {
            SeqExpr::Mul(vec![SeqExpr::OmegaPow(p), SeqExpr::LogPow(r)])
        }
    }

    pub fn geom(q: Q) -> SeqExpr {
        SeqExpr::Geom(q)
    }

    /// Finite sequence as explicit values (zero past the end).
    pub fn finite(vals: Vec<Q>) -> SeqExpr {
        let mut blocks: Vec<(u64, Q)> = Vec::new();
        let mut i = 0u64;
        for v in vals {
            i += 1;
            if let Some((bp, last)) = blocks.last_mut() {
                if *last == v {
                    *bp = i;
                    continue;
                }
            }
            blocks.push((i, v));
        }
        while blocks.last().map(|(_, v)| v.is_zero()).unwrap_or(false) {
            blocks.pop();
        }
        SeqExpr::PiecewiseConstant(blocks)
    }

    /// The combined (scale, omega power, log power) of a pure power-log
    /// product, if this expression is one.
    pub fn as_powlog(&self) -> Option<(Q, f64, f64)> {
        match self {
            SeqExpr::OmegaPow(p) => Some((Q::one(), *p, 0.0)),
            SeqExpr::LogPow(r) => Some((Q::one(), 0.0, *r)),
            SeqExpr::Scale(c, x) => {
                let (s, p, r) = x.as_powlog()?;
                Some((c * s, p, r))
            }
            SeqExpr::Mul(xs) => {
                let mut acc = (Q::one(), 0.0, 0.0);
                for x in xs {
                    let (s, p, r) = x.as_powlog()?;
                    acc = (acc.0 * s, acc.1 + p, acc.2 + r);
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// Exact rule: does `sum_n xi_n * ln^m(n)` converge? Three-valued;
    /// `Unknown` wherever no rule applies.
    pub fn weighted_summable(&self, m: u32) -> Tri {
        if let Some((_, p, r)) = self.as_powlog() {
            let eff = r + m as f64;
            return if p > 1.0 {
                Tri::Yes
            } else if p < 1.0 {
                Tri::No
            } else if eff < -1.0 {
                Tri::Yes
            } else {
                Tri::No
            };
        }
        match self {
            SeqExpr::Geom(_) => Tri::Yes,
            SeqExpr::Mul(xs) => {
                // a geometric factor dominates any power-log companions
                if xs.iter().any(|x| matches!(x, SeqExpr::Geom(_)))
                    && xs
                        .iter()
                        .all(|x| matches!(x, SeqExpr::Geom(_)) || x.as_powlog().is_some())
                {
                    Tri::Yes
                } else {
                    Tri::Unknown
                }
            }
            SeqExpr::Sum(xs) | SeqExpr::Max(xs) => xs
                .iter()
                .map(|x| x.weighted_summable(m))
                .fold(Tri::Yes, Tri::and),
            SeqExpr::Min(xs) => {
                let verdicts: Vec<Tri> = xs.iter().map(|x| x.weighted_summable(m)).collect();
                if verdicts.iter().any(|v| *v == Tri::Yes) {
                    Tri::Yes
                } else if verdicts.iter().all(|v| *v == Tri::No)
                    && xs
                        .iter()
                        .all(|x| x.as_powlog().is_some() || matches!(x, SeqExpr::Geom(_)))
                {
                    // power-log classes are totally ordered asymptotically,
                    // so the min eventually equals its smallest member
                    Tri::No
                } else {
                    Tri::Unknown
                }
            }
            SeqExpr::Scale(_, x) => x.weighted_summable(m),
            SeqExpr::Ampliation(_, x) | SeqExpr::Dilution(_, x) => x.weighted_summable(m),
            SeqExpr::PrefixOverride(_, x) => x.weighted_summable(m),
            SeqExpr::PiecewiseConstant(_) => Tri::Yes, // finite support
            SeqExpr::PwRuleSeq(rule) => rule.weighted_summable(m),
            SeqExpr::OmegaPow(_) | SeqExpr::LogPow(_) => unreachable!("handled via as_powlog"),
        }
    }

    /// Plain `ell^1` membership.
    pub fn summable(&self) -> Tri {
        self.weighted_summable(0)
    }

    /// The symbolic asymptotic class of the arithmetic mean at infinity,
    /// where a closed form exists. Used for nested summability questions.
    pub fn am_infinity_class(&self) -> Option<SeqExpr> {
        if let Some((s, p, r)) = self.as_powlog() {
            if p > 1.0 {
                // tail ~ n^(1-p) ln^r / (p-1), so xi_ainf ~ xi / (p-1)
                return Some(SeqExpr::Scale(s, Box::new(SeqExpr::omega_log(p, r))));
            }
            if p == 1.0 && r < -1.0 {
                // tail ~ ln^(r+1) n / (-(r+1)), so xi_ainf ~ (1/n) ln^(r+1)
                return Some(SeqExpr::omega_log(1.0, r + 1.0));
            }
            return None;
        }
        match self {
            SeqExpr::Geom(q) => {
                // q^(n+1)/((1-q) n): geometric times omega
                Some(SeqExpr::Mul(vec![
                    SeqExpr::Geom(q.clone()),
                    SeqExpr::OmegaPow(1.0),
                ]))
            }
            SeqExpr::Sum(xs) => {
                let parts: Option<Vec<_>> = xs.iter().map(|x| x.am_infinity_class()).collect();
                Some(SeqExpr::Sum(parts?))
            }
            SeqExpr::Scale(c, x) => {
                Some(SeqExpr::Scale(c.clone(), Box::new(x.am_infinity_class()?)))
            }
            SeqExpr::PiecewiseConstant(_) => Some(SeqExpr::PiecewiseConstant(vec![])),
            _ => None,
        }
    }

    /// Validate positivity/monotonicity constraints that the constructors
    /// cannot express in types. Returns a human-readable violation.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            SeqExpr::OmegaPow(p) => {
                if !(*p > 0.0 && p.is_finite()) {
                    return Err(format!("omega exponent must be positive, got {p}"));
                }
            }
            SeqExpr::LogPow(r) => {
                if !(*r < 0.0 && r.is_finite()) {
                    return Err(format!(
                        "a standalone log power needs a negative exponent, got {r}"
                    ));
                }
            }
            SeqExpr::Geom(q) => {
                if !(q > &Q::zero() && q < &Q::one()) {
                    return Err(format!("geometric ratio must be in (0,1), got {q}"));
                }
            }
            SeqExpr::Mul(xs) => {
                if xs.is_empty() {
                    return Err("empty product".into());
                }
                for x in xs {
                    match x {
                        SeqExpr::Geom(q) => {
                            if !(q > &Q::zero() && q < &Q::one()) {
                                return Err(format!("geometric ratio must be in (0,1), got {q}"));
                            }
                        }
                        SeqExpr::OmegaPow(_) | SeqExpr::LogPow(_) => {}
                        other => {
                            return Err(format!(
                            "products may only combine omega/log powers and geom factors, got {other}"
                        ))
                        }
                    }
                }
                let has_geom = xs.iter().any(|x| matches!(x, SeqExpr::Geom(_)));
                let (p, r) = xs.iter().fold((0.0, 0.0), |(p, r), x| match x {
                    SeqExpr::OmegaPow(pp) => (p + pp, r),
                    SeqExpr::LogPow(rr) => (p, r + rr),
                    _ => (p, r),
                });
                if !has_geom && !(p > 0.0 || (p == 0.0 && r < 0.0)) {
                    return Err(format!("omega^{p}*log^{r} does not decrease to zero"));
                }
                if has_geom && r != 0.0 {
                    return Err("log factors next to geom are unsupported".into());
                }
            }
            SeqExpr::Sum(xs) | SeqExpr::Min(xs) | SeqExpr::Max(xs) => {
                if xs.is_empty() {
                    return Err("empty combinator".into());
                }
                for x in xs {
                    x.validate()?;
                }
            }
            SeqExpr::Scale(c, x) => {
                if !c.is_positive() {
                    return Err(format!("scale factor must be positive, got {c}"));
                }
                x.validate()?;
            }
            SeqExpr::Ampliation(m, x) | SeqExpr::Dilution(m, x) => {
                if *m == 0 {
                    return Err("ampliation/dilution factor must be >= 1".into());
                }
                x.validate()?;
            }
            SeqExpr::PrefixOverride(vals, x) => {
                if vals.is_empty() {
                    return Err("empty prefix override".into());
                }
                for w in vals.windows(2) {
                    if w[1] > w[0] {
                        return Err("prefix override must be nonincreasing".into());
                    }
                }
                if vals.iter().any(|v| v.is_negative()) {
                    return Err("prefix override entries must be nonnegative".into());
                }
                x.validate()?;
            }
            SeqExpr::PiecewiseConstant(blocks) => {
                let mut prev_bp = 0u64;
                let mut prev_v: Option<&Q> = None;
                for (bp, v) in blocks {
                    if *bp <= prev_bp {
                        return Err("breakpoints must strictly increase".into());
                    }
                    if v.is_negative() || v.is_zero() {
                        return Err("block values must be positive".into());
                    }
                    if let Some(pv) = prev_v {
                        if v >= pv {
                            return Err("block values must strictly decrease".into());
                        }
                    }
                    prev_bp = *bp;
                    prev_v = Some(v);
                }
            }
            SeqExpr::PwRuleSeq(rule) => {
                let mut prev_bp = 0u64;
                let mut prev_v: Option<Q> = None;
                for k in 1..=8 {
                    let Some((bp, v)) = rule.block(k) else { break };
                    if bp <= prev_bp {
                        return Err(format!("rule {}: breakpoints must increase", rule.name()));
                    }
                    if let Some(pv) = &prev_v {
                        if &v >= pv {
                            return Err(format!("rule {}: values must decrease", rule.name()));
                        }
                    }
                    prev_bp = bp;
                    prev_v = Some(v);
                }
            }
        }
        Ok(())
    }
}

/// `q^k` by binary exponentiation.
pub fn q_pow(q: &Q, mut k: u64) -> Q {
    let mut base = q.clone();
    let mut acc = Q::one();
    while k > 0 {
        if k & 1 == 1 {
            acc *= &base;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    acc
}

/// 1/n^k as a rational.
pub fn omega_int_pow(n: u64, k: u32) -> Q {
    let mut d = q_u64(1);
    for _ in 0..k {
        d *= q_u64(n);
    }
    d.recip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::q;

    #[test]
    fn summability_rules_match_known_cases() {
        assert_eq!(SeqExpr::omega_pow(2.0).summable(), Tri::Yes);
        assert_eq!(SeqExpr::omega().summable(), Tri::No);
        assert_eq!(SeqExpr::omega_log(1.0, -1.0).summable(), Tri::No);
        assert_eq!(SeqExpr::omega_log(1.0, -1.01).summable(), Tri::Yes);
        assert_eq!(SeqExpr::geom(q(1, 2)).summable(), Tri::Yes);
    }

    #[test]
    fn weighted_rules() {
        // omega*log^-3 with weight log^1: exponent -3+1 = -2 < -1 -> yes
        assert_eq!(SeqExpr::omega_log(1.0, -3.0).weighted_summable(1), Tri::Yes);
        // omega*log^-2 with weight log^1: borderline -1 -> no
        assert_eq!(SeqExpr::omega_log(1.0, -2.0).weighted_summable(1), Tri::No);
        assert_eq!(SeqExpr::geom(q(1, 3)).weighted_summable(7), Tri::Yes);
        for m in 0..5 {
            assert_eq!(SeqExpr::omega_pow(2.0).weighted_summable(m), Tri::Yes);
        }
    }

    #[test]
    fn min_and_sum_propagation() {
        let min = SeqExpr::Min(vec![SeqExpr::omega(), SeqExpr::geom(q(1, 2))]);
        assert_eq!(min.summable(), Tri::Yes);
        let min2 = SeqExpr::Min(vec![SeqExpr::omega(), SeqExpr::omega_pow(0.5)]);
        assert_eq!(min2.summable(), Tri::No);
        let sum = SeqExpr::Sum(vec![SeqExpr::omega_pow(2.0), SeqExpr::geom(q(1, 2))]);
        assert_eq!(sum.summable(), Tri::Yes);
        let sum2 = SeqExpr::Sum(vec![SeqExpr::omega_pow(2.0), SeqExpr::omega()]);
        assert_eq!(sum2.summable(), Tri::No);
    }

    #[test]
    fn am_infinity_class_tower() {
        // weight m after one am-infinity pass equals weight m+1 directly
        let cases = [
            SeqExpr::omega_pow(2.0),
            SeqExpr::omega_log(1.0, -3.0),
            SeqExpr::omega_log(1.0, -2.5),
            SeqExpr::geom(q(1, 2)),
        ];
        for c in cases {
            let cls = c.am_infinity_class().unwrap();
            for m in 0..4 {
                assert_eq!(
                    cls.weighted_summable(m),
                    c.weighted_summable(m + 1),
                    "tower shift failed for {c} at m={m}"
                );
            }
        }
    }

    #[test]
    fn validation_rejects_bad_forms() {
        assert!(SeqExpr::omega_pow(-1.0).validate().is_err());
        assert!(SeqExpr::LogPow(2.0).validate().is_err());
        assert!(SeqExpr::geom(q(3, 2)).validate().is_err());
        assert!(SeqExpr::PiecewiseConstant(vec![(5, q(1, 2)), (3, q(1, 4))])
            .validate()
            .is_err());
        assert!(SeqExpr::PiecewiseConstant(vec![(3, q(1, 4)), (5, q(1, 2))])
            .validate()
            .is_err());
        assert!(SeqExpr::omega_log(1.0, -2.0).validate().is_ok());
    }

    #[test]
    fn display_forms() {
        assert_eq!(SeqExpr::omega_pow(2.0).to_string(), "omega^2");
        assert_eq!(SeqExpr::omega_log(1.0, -2.0).to_string(), "omega*log^-2");
        assert_eq!(SeqExpr::geom(q(1, 2)).to_string(), "geom(1/2)");
        assert_eq!(
            SeqExpr::Ampliation(3, Box::new(SeqExpr::omega())).to_string(),
            "D3(omega)"
        );
    }

    #[test]
    fn q_pow_binary() {
        assert_eq!(q_pow(&q(1, 2), 10), q(1, 1024));
        assert_eq!(q_pow(&q(2, 3), 0), q(1, 1));
    }
}
