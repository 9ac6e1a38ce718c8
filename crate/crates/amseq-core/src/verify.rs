//! Runnable property suites: the exact identities, the dilation-mean
//! inequalities, the containment corollaries, the equivalence cross-check,
//! index accuracy, the Lorentz-weight tower identity, and the construction
//! certificates. Each suite returns one named check per property so callers
//! can print one pass/fail line per criterion.

use crate::classify::{
    analytic_bounds, check_delta_half, cross_check_412, matuszewska_indices, Verdict, Window,
};
use crate::constructions::{
    example_422, example_45_iii, lemma47_default_inputs, lemma_47_block_eta, remark_42_witness,
    theorem_78_family, theorem_78_xi, BreakpointLaw,
};
use crate::expr::SeqExpr;
use crate::seq::Sequence;
use crate::value::{q, q_u64, Q, Tri, V};
use crate::Result;
use num::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

/// One verified property inside a suite.
#[derive(Clone, Debug)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

/// Result of one suite run.
#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub suite: String,
    pub checks: Vec<CheckLine>,
    pub wall_ms: u128,
}

impl SuiteResult {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

struct SuiteBuilder {
    suite: String,
    checks: Vec<CheckLine>,
    started: Instant,
}

impl SuiteBuilder {
    fn new(name: &str) -> SuiteBuilder {
        SuiteBuilder { suite: name.into(), checks: Vec::new(), started: Instant::now() }
    }

    fn push(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(CheckLine { name: name.into(), passed, detail: detail.into() });
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            suite: self.suite,
            checks: self.checks,
            wall_ms: self.started.elapsed().as_millis(),
        }
    }
}

/// Deterministic random nonincreasing rational prefix.
pub fn random_prefix(rng: &mut ChaCha8Rng, len: usize) -> Vec<Q> {
    let mut vals = Vec::with_capacity(len);
    let mut cur = q(1000, 1);
    for _ in 0..len {
        let num = rng.gen_range(0..=5) as i64;
        let den = rng.gen_range(1..=6) as i64;
        cur = (&cur * q(den, den + num)).reduced();
        vals.push(cur.clone());
    }
    vals
}

fn known_suites() -> &'static [&'static str] {
    &[
        "identities",
        "lemma41",
        "cor43",
        "cor44",
        "thm412",
        "indices",
        "lorentz",
        "constructions",
    ]
}

/// Run a named suite ("all" runs every suite in order).
pub fn run_suite(name: &str) -> Result<Vec<SuiteResult>> {
    let mut out = Vec::new();
    let names: Vec<&str> = if name == "all" {
        known_suites().to_vec()
    } else {
        vec![name]
    };
    for n in names {
        let r = match n {
            "identities" => suite_identities()?,
            "lemma41" => suite_lemma41()?,
            "cor43" => suite_cor43()?,
            "cor44" => suite_cor44()?,
            "thm412" => suite_thm412()?,
            "indices" => suite_indices()?,
            "lorentz" => suite_lorentz()?,
            "constructions" => suite_constructions()?,
            other => {
                return Err(crate::Error::BadWindow(format!(
                    "unknown suite '{other}'; known: {}, all",
                    known_suites().join(", ")
                )))
            }
        };
        out.push(r);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// criterion 1: exact identities
// ---------------------------------------------------------------------------

/// Exact recurrences and the splitting identity on random rational prefixes
/// and the finitely supported catalog, with zero tolerance.
pub fn suite_identities() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("identities");
    let mut rng = ChaCha8Rng::seed_from_u64(0xA15E);
    let mut cases: Vec<Vec<Q>> = (0..50).map(|_| random_prefix(&mut rng, 2000)).collect();
    // finitely supported catalog cases
    cases.push(vec![Q::one()]);
    cases.push(vec![q(3, 1), q(3, 1), q(1, 2)]);
    cases.push(vec![Q::one(); 99]);
    let mut ok_fw = true;
    let mut ok_bw = true;
    let mut ok_split = true;
    let mut witness = String::new();
    for (ci, vals) in cases.iter().enumerate() {
        let total: Q = vals.iter().fold(Q::zero(), |a, v| a + v);
        let seq = Sequence::from_values(vals.clone())?;
        let a = seq.arithmetic_mean();
        let ai = seq.am_infinity(0.0)?;
        let top = vals.len() as u64 + 16;
        let mut am_prev = seq.eval(1)?.as_exact().unwrap().clone();
        let mut ainf_prev = ai.eval(1)?.as_exact().unwrap().clone();
        for n in 2..=top {
            let xi_n = seq.eval(n)?.as_exact().unwrap().clone();
            let am_n = a.eval(n)?.as_exact().unwrap().clone();
            let ainf_n = ai.eval(n)?.as_exact().unwrap().clone();
            if &am_n * q_u64(n) != &xi_n + &am_prev * q_u64(n - 1) {
                ok_fw = false;
                witness = format!("case {ci}, n = {n} (mean recurrence)");
            }
            if &ainf_prev * q_u64(n - 1) != &xi_n + &ainf_n * q_u64(n) {
                ok_bw = false;
                witness = format!("case {ci}, n = {n} (tail-mean recurrence)");
            }
            if &am_n + &ainf_n != &total / q_u64(n) {
                ok_split = false;
                witness = format!("case {ci}, n = {n} (splitting identity)");
            }
            am_prev = am_n;
            ainf_prev = ainf_n;
        }
    }
    s.push(
        "n (xi_a)_n = xi_n + (n-1)(xi_a)_{n-1} exactly",
        ok_fw,
        witness.clone(),
    );
    s.push(
        "(n-1)(xi_ainf)_{n-1} = xi_n + n (xi_ainf)_n exactly",
        ok_bw,
        witness.clone(),
    );
    s.push("xi_a + xi_ainf = (sum xi) omega exactly", ok_split, witness);
    Ok(s.finish())
}

// ---------------------------------------------------------------------------
// criterion 2: the dilation-mean inequalities
// ---------------------------------------------------------------------------

fn lemma41_catalog() -> Result<Vec<Sequence>> {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let mut cat = vec![
        Sequence::geometric(q(1, 2))?,
        Sequence::geometric(q(1, 3))?,
        Sequence::geometric(q(3, 4))?,
    ];
    for _ in 0..3 {
        cat.push(Sequence::from_values(random_prefix(&mut rng, 300))?);
    }
    let (e, _) = example_45_iii(BreakpointLaw::Factorial, 4, 12, false)?;
    cat.push(Sequence::from_expr(&e)?);
    cat.push(Sequence::from_expr(&SeqExpr::PiecewiseConstant(vec![
        (4, q(1, 2)),
        (40, q(1, 7)),
        (1000, q(1, 100)),
    ]))?);
    Ok(cat)
}

/// Lemma 4.1 inequalities (i)-(iv) at every index up to 10^4 for
/// m in {2..6}, plus the Remark 4.2 sharpness witness.
pub fn suite_lemma41() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("lemma41");
    let tol = 1e-12;
    let le = |a: &V, b: &V| -> bool { a.le_certain(b) || a.lo_f64() <= b.hi_f64() + tol };
    for seq in lemma41_catalog()? {
        let name = seq.label().to_string();
        let ai = seq.am_infinity(1e-13)?;
        let mut bad: Option<(u32, u32, u64)> = None;
        'outer: for m in 2u32..=6 {
            let dm_ai = ai.ampliation(m)?;
            let dm_xi_ai = seq.ampliation(m)?.am_infinity(1e-13)?;
            let dm1_xi = seq.ampliation(m - 1)?;
            let dm1_xi_ai = dm1_xi.am_infinity(1e-13)?;
            let inv_2m1 = V::Exact(Q::new(1.into(), (2 * (m as i64 - 1)).into()));
            let inv_m1 = V::Exact(Q::new(1.into(), (m as i64 - 1).into()));
            for j in 1u64..=10_000 {
                // (i) D_m xi_ainf <= (D_m xi)_ainf
                if !le(&dm_ai.eval(j)?, &dm_xi_ai.eval(j)?) {
                    bad = Some((1, m, j));
                    break 'outer;
                }
                // (ii) for j >= (m-1)(m-2)
                if j >= ((m - 1) * (m - 2)) as u64 && j >= 1 {
                    if !le(&dm1_xi_ai.eval(j)?, &dm_ai.eval(j)?) {
                        bad = Some((2, m, j));
                        break 'outer;
                    }
                }
                // (iii) for j >= 2m(m-1)
                if j >= (2 * m * (m - 1)) as u64 {
                    let rhs = dm_ai.eval(j)?;
                    let lhs = dm1_xi.eval(j)?.mul(&inv_2m1);
                    if !le(&lhs, &rhs) {
                        bad = Some((3, m, j));
                        break 'outer;
                    }
                }
                // (iv) xi_{mj} <= (1/(m-1)) (xi_ainf)_j
                let lhs = seq.eval(m as u64 * j)?;
                let rhs = ai.eval(j)?.mul(&inv_m1);
                if !le(&lhs, &rhs) {
                    bad = Some((4, m, j));
                    break 'outer;
                }
            }
        }
        s.push(
            format!("dilation-mean inequalities (i)-(iv) on {name}"),
            bad.is_none(),
            format!("{bad:?}"),
        );
    }
    // Remark 4.2 sharpness: (D_2 xi_ainf)_{2j-1} = (j-1)/j exactly
    let mut ok = true;
    let mut detail = String::new();
    for j in 2u64..=50 {
        let (_, cert) = remark_42_witness(j)?;
        if !cert.all_pass() {
            ok = false;
            detail = format!("witness failed at j = {j}");
            break;
        }
    }
    s.push("sharpness witness reproduces (j-1)/j < 1", ok, detail);
    Ok(s.finish())
}

// ---------------------------------------------------------------------------
// criterion 3: containment corollaries
// ---------------------------------------------------------------------------

fn summable_catalog() -> Result<Vec<Sequence>> {
    Ok(vec![
        Sequence::omega_pow(1.25),
        Sequence::omega_pow(1.5),
        Sequence::omega_pow(2.0),
        Sequence::omega_pow(3.0),
        Sequence::geometric(q(1, 4))?,
        Sequence::geometric(q(1, 2))?,
        Sequence::geometric(q(3, 4))?,
        Sequence::omega_log(1.0, -1.5),
        Sequence::omega_log(1.0, -2.0),
        Sequence::omega_log(1.0, -3.0),
    ])
}

/// xi_j <= 2 (D_2 xi_ainf)_j for 4 <= j <= 10^4 across the summable catalog.
pub fn suite_cor43() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("cor43");
    for seq in summable_catalog()? {
        let name = seq.label().to_string();
        let d2ai = seq.am_infinity(1e-13)?.ampliation(2)?;
        let mut bad = None;
        for j in 4u64..=10_000 {
            let lhs = seq.eval(j)?;
            let rhs = d2ai.eval(j)?.scale_u64(2);
            if !(lhs.le_certain(&rhs) || lhs.lo_f64() <= rhs.hi_f64() + 1e-12) {
                bad = Some(j);
                break;
            }
        }
        s.push(
            format!("xi <= 2 D_2 xi_ainf past j = 4 on {name}"),
            bad.is_none(),
            format!("violated at {bad:?}"),
        );
    }
    Ok(s.finish())
}

/// The half-dilation transfer (i) and the explicit 2^(M+1) bound (ii).
pub fn suite_cor44() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("cor44");
    let window = Window::new(4, 1 << 16);
    for seq in summable_catalog()? {
        let name = seq.label().to_string();
        let r_xi = check_delta_half(&seq, &window)?;
        let ai = seq.am_infinity(1e-9)?;
        // (i): if xi satisfies the half-dilation condition, so does xi_ainf
        if r_xi.verdict == Verdict::Holds {
            let r_ai = check_delta_half(&ai, &window)?;
            s.push(
                format!("half-dilation transfers to the tail mean on {name}"),
                r_ai.verdict == Verdict::Holds,
                format!("got {}", r_ai.verdict),
            );
        }
        // (ii): with M = sup xi/xi_ainf certified on the window,
        // (xi_ainf)_n/(xi_ainf)_{2n} <= 2^(M+1)
        let mut m_sup: f64 = 0.0;
        let mut bounded = true;
        for e in 2..=14u32 {
            let n = 1u64 << e;
            let den = ai.eval(n)?;
            if den.is_zero() {
                bounded = false;
                break;
            }
            m_sup = m_sup.max(seq.eval(n)?.to_iv().div(&den.to_iv()).hi_f64());
        }
        // the sup over n = 1..3 dominates for the power family; include it
        for n in 1u64..4 {
            let den = ai.eval(n)?;
            if !den.is_zero() {
                m_sup = m_sup.max(seq.eval(n)?.to_iv().div(&den.to_iv()).hi_f64());
            }
        }
        if bounded && m_sup.is_finite() && m_sup < 64.0 {
            let cap = 2f64.powf(m_sup + 1.0);
            let mut bad = None;
            for e in 0..=13u32 {
                let n = 1u64 << e;
                let ratio = ai.eval(n)?.to_iv().div(&ai.eval(2 * n)?.to_iv());
                if ratio.lo_f64() > cap * (1.0 + 1e-9) {
                    bad = Some(n);
                    break;
                }
            }
            s.push(
                format!("tail-mean half-ratio bounded by 2^(M+1) on {name}"),
                bad.is_none(),
                format!("M = {m_sup:.4}, violated at {bad:?}"),
            );
        }
    }
    Ok(s.finish())
}

// ---------------------------------------------------------------------------
// criterion 4: equivalence agreement
// ---------------------------------------------------------------------------

/// All implemented equivalent conditions agree with the ground truth on the
/// catalog at window 2^20.
pub fn suite_thm412() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("thm412");
    let mut cases: Vec<(Sequence, bool)> = vec![
        (Sequence::omega_pow(1.25), true),
        (Sequence::omega_pow(1.5), true),
        (Sequence::omega_pow(2.0), true),
        (Sequence::omega_pow(3.0), true),
        (Sequence::geometric(q(1, 4))?, true),
        (Sequence::geometric(q(1, 2))?, true),
        (Sequence::geometric(q(3, 4))?, true),
        (Sequence::omega_log(1.0, -1.5), false),
        (Sequence::omega_log(1.0, -2.0), false),
        (Sequence::omega_log(1.0, -3.0), false),
    ];
    let (e, _) = example_45_iii(BreakpointLaw::Factorial, 4, 12, false)?;
    cases.push((Sequence::from_expr(&e)?, false));
    for (seq, expected) in cases {
        let name = seq.label().to_string();
        let window = Window::new(4, 1 << 20);
        let cc = cross_check_412(&seq, &window)?;
        let ok = cc.agreement && cc.infty_regular == Some(expected);
        s.push(
            format!("equivalent conditions agree on {name} (expect {expected})"),
            ok,
            format!("{:?}", cc.reports),
        );
    }
    Ok(s.finish())
}

// ---------------------------------------------------------------------------
// criterion 5: index accuracy and analytic bounds
// ---------------------------------------------------------------------------

pub fn suite_indices() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("indices");
    let window = Window::new(4, 1 << 20);
    for p in [0.5f64, 1.0, 1.25, 2.0, 3.0] {
        let seq = Sequence::omega_pow(p);
        let idx = matuszewska_indices(&seq, &window)?;
        s.push(
            format!("alpha(omega^{p}) = -{p} within 0.05"),
            (idx.alpha + p).abs() < 0.05,
            format!("alpha = {:.4}", idx.alpha),
        );
        s.push(
            format!("beta(omega^{p}) = -{p} within 0.05"),
            (idx.beta + p).abs() < 0.05,
            format!("beta = {:.4}", idx.beta),
        );
    }
    // analytic bound relations
    for seq in [Sequence::omega_pow(1.5), Sequence::omega_pow(2.0), Sequence::omega_pow(3.0)] {
        let name = seq.label().to_string();
        let idx = matuszewska_indices(&seq, &window)?;
        let (alpha_upper, _) = analytic_bounds(&seq, &window)?;
        s.push(
            format!("alpha estimate respects the tail-ratio bound on {name}"),
            idx.alpha <= alpha_upper + 0.05,
            format!("alpha = {:.4}, bound = {alpha_upper:.4}", idx.alpha),
        );
    }
    for seq in [Sequence::omega_pow(0.25), Sequence::omega_pow(0.5), Sequence::omega_pow(0.75)] {
        let name = seq.label().to_string();
        let idx = matuszewska_indices(&seq, &window)?;
        let (_, beta_lower) = analytic_bounds(&seq, &window)?;
        s.push(
            format!("beta estimate respects the mean-ratio bound on {name}"),
            idx.beta >= beta_lower - 0.05,
            format!("beta = {:.4}, bound = {beta_lower:.4}", idx.beta),
        );
    }
    Ok(s.finish())
}

// ---------------------------------------------------------------------------
// criterion 6: the Lorentz tower identity
// ---------------------------------------------------------------------------

/// Membership in the log^m level after one mean-at-infinity pass matches
/// direct log^(m+1) membership on 20 catalog expressions, m <= 4. The two
/// routes are independent: one goes through the symbolic tail class, the
/// other through the direct weight rule.
pub fn suite_lorentz() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("lorentz");
    let mut catalog: Vec<SeqExpr> = vec![
        SeqExpr::omega_pow(1.25),
        SeqExpr::omega_pow(1.5),
        SeqExpr::omega_pow(2.0),
        SeqExpr::omega_pow(3.0),
        SeqExpr::omega_log(1.0, -1.5),
        SeqExpr::omega_log(1.0, -2.0),
        SeqExpr::omega_log(1.0, -2.5),
        SeqExpr::omega_log(1.0, -3.0),
        SeqExpr::omega_log(1.0, -4.0),
        SeqExpr::omega_log(1.0, -6.0),
        SeqExpr::omega_log(2.0, -1.0),
        SeqExpr::omega_log(2.0, 1.0),
        SeqExpr::geom(q(1, 4)),
        SeqExpr::geom(q(1, 2)),
        SeqExpr::geom(q(3, 4)),
        SeqExpr::Scale(q(7, 3), Box::new(SeqExpr::omega_pow(2.0))),
        SeqExpr::Scale(q(1, 5), Box::new(SeqExpr::omega_log(1.0, -2.5))),
        SeqExpr::Sum(vec![SeqExpr::omega_pow(2.0), SeqExpr::geom(q(1, 2))]),
        SeqExpr::Sum(vec![SeqExpr::omega_log(1.0, -3.0), SeqExpr::omega_pow(1.5)]),
        SeqExpr::PiecewiseConstant(vec![(3, q(1, 2)), (30, q(1, 9)), (500, q(1, 100))]),
    ];
    assert_eq!(catalog.len(), 20);
    let mut total = 0u32;
    let mut agreed = 0u32;
    let mut wit = String::new();
    for e in catalog.drain(..) {
        let Some(class) = e.am_infinity_class() else {
            wit = format!("no tail class for {e}");
            continue;
        };
        for m in 0..=4u32 {
            total += 1;
            let via_class = class.weighted_summable(m);
            let direct = e.weighted_summable(m + 1);
            if via_class == direct && via_class != Tri::Unknown {
                agreed += 1;
            } else {
                wit = format!("{e} at weight {m}: class route {via_class}, direct {direct}");
            }
        }
    }
    s.push(
        "tail-class route matches the weight-shift rule on 20 expressions",
        agreed == total && total == 100,
        format!("{agreed}/{total} agreed; {wit}"),
    );
    Ok(s.finish())
}

// ---------------------------------------------------------------------------
// criterion 7: construction certificates
// ---------------------------------------------------------------------------

pub fn suite_constructions() -> Result<SuiteResult> {
    let mut s = SuiteBuilder::new("constructions");

    let horizon = 1_000_000u64;
    match lemma47_default_inputs(horizon).and_then(|(xi, a)| lemma_47_block_eta(&xi, &a, horizon)) {
        Ok(out) => {
            let mut in_bounds = true;
            for b in &out.blocks {
                let lo = 2f64.powi(1 - b.k as i32);
                let hi = 2f64.powi(2 - b.k as i32);
                if !(b.sum_hi >= lo * 0.999 && b.sum_lo <= hi * 1.001) {
                    in_bounds = false;
                }
            }
            s.push(
                "block-eta completes >= 6 blocks with sums in [2^(1-k), 2^(2-k)]",
                out.blocks.len() >= 6 && in_bounds && out.certificate.all_pass(),
                format!("{} blocks", out.blocks.len()),
            );
        }
        Err(e) => s.push("block-eta completes >= 6 blocks", false, e.to_string()),
    }

    let window = Window::new(4, 1 << 16);
    match theorem_78_xi(0.5, 20, &window) {
        Ok(xi) => s.push(
            "irregular-below-regular ladder certifies (i)-(iii) for L = 20",
            xi.certificate.all_pass(),
            format!("levels: {}", xi.levels.len()),
        ),
        Err(e) => s.push("irregular-below-regular ladder (L = 20)", false, e.to_string()),
    }

    match theorem_78_xi(0.5, 48, &window).and_then(|xi| theorem_78_family(&xi, 3, 8)) {
        Ok(fam) => s.push(
            "family ladder certifies (a)-(d) for N = 3, K = 8",
            fam.certificate.all_pass() && fam.rounds.len() == 8,
            format!("rounds: {}", fam.rounds.len()),
        ),
        Err(e) => s.push("family ladder (N = 3, K = 8)", false, e.to_string()),
    }

    match example_422(6, false) {
        Ok((_, cert)) => s.push(
            "block counterexample certifies domination and touch points (k <= 6)",
            cert.all_pass(),
            String::new(),
        ),
        Err(e) => s.push("block counterexample (k <= 6)", false, e.to_string()),
    }

    Ok(s.finish())
}

// ---------------------------------------------------------------------------
// criterion 8: trace-dimension verdicts
// ---------------------------------------------------------------------------

pub fn suite_trace() -> Result<SuiteResult> {
    use crate::ideals::{trace_dimension, PrincipalIdeal, TraceDim};
    let mut s = SuiteBuilder::new("trace");
    let cases = [
        (SeqExpr::omega_pow(0.5), TraceDim::Zero),
        (SeqExpr::omega_pow(2.0), TraceDim::One),
        (SeqExpr::omega(), TraceDim::Uncountable),
        (SeqExpr::omega_log(1.0, -2.0), TraceDim::Uncountable),
        (SeqExpr::geom(q(1, 2)), TraceDim::One),
    ];
    for (e, expect) in cases {
        let ideal = PrincipalIdeal::from_expr(&e)?;
        let seq = Sequence::from_expr(&e)?;
        let window = Window::default_for(&seq);
        let v = trace_dimension(&ideal, &window, 64)?;
        let chain_definite = !v.chain.iter().any(|(_, r)| ends_inconclusive(r));
        s.push(
            format!("trace dimension of ({e}) is {expect}"),
            v.value == expect && chain_definite,
            format!("got {}, chain {:?}", v.value, v.chain),
        );
    }
    Ok(s.finish())
}

fn ends_inconclusive(r: &str) -> bool {
    r == "inconclusive" || r == "unknown"
}
