//! Executable block constructions: the sharp witnesses and counterexample
//! sequences built in the proofs, each returned together with a certificate
//! that re-checks the construction's defining conditions on a finite horizon.

use crate::classify::{check_regular, Verdict, Window};
use crate::expr::{PwRule, SeqExpr};
use crate::powlog::PowLog;
use crate::seq::Sequence;
use crate::value::{q_u64, Q, Tri, V};
use crate::xf::Iv;
use crate::{Error, Result};
use num::{BigUint, One, Signed, ToPrimitive, Zero};
use std::sync::Arc;

/// Outcome of a single certificate condition.
#[derive(Clone, Debug)]
pub enum CheckOutcome {
    Pass,
    Fail { witness: String },
}

impl CheckOutcome {
    pub fn passed(&self) -> bool {
        matches!(self, CheckOutcome::Pass)
    }
}

/// A construction's checklist: every defining condition, verified on the
/// stated horizon.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub construction: String,
    pub horizon: String,
    pub checks: Vec<(String, CheckOutcome)>,
    pub notes: Vec<String>,
}

impl Certificate {
    fn new(construction: &str, horizon: impl std::fmt::Display) -> Certificate {
        Certificate {
            construction: construction.to_string(),
            horizon: horizon.to_string(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    fn pass(&mut self, name: impl Into<String>) {
        self.checks.push((name.into(), CheckOutcome::Pass));
    }

    fn fail(&mut self, name: impl Into<String>, witness: impl Into<String>) {
        self.checks
            .push((name.into(), CheckOutcome::Fail { witness: witness.into() }));
    }

    fn check(&mut self, name: impl Into<String>, ok: bool, witness: impl Into<String>) {
        if ok {
            self.pass(name);
        } else {
            self.fail(name, witness);
        }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|(_, o)| o.passed())
    }

    fn seal(self, allow_partial: bool) -> Result<Certificate> {
        if !allow_partial && !self.all_pass() {
            let bad: Vec<String> = self
                .checks
                .iter()
                .filter(|(_, o)| !o.passed())
                .map(|(n, o)| match o {
                    CheckOutcome::Fail { witness } => format!("{n}: {witness}"),
                    CheckOutcome::Pass => unreachable!(),
                })
                .collect();
            return Err(Error::Precondition(format!(
                "{} certificate failed: {}",
                self.construction,
                bad.join("; ")
            )));
        }
        Ok(self)
    }
}

// ---------------------------------------------------------------------------
// block-sequence rules (Example 4.5(iii) instances, Example 4.22)
// ---------------------------------------------------------------------------

/// Breakpoint law for the block counterexample: how n_k grows.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BreakpointLaw {
    /// n_k = k * n_{k-1} (factorial growth; meets n_k >= k n_{k-1} exactly)
    Factorial,
    /// n_k = mult * n_{k-1}; violates the block condition once k > mult
    Geometric { mult: u32 },
}

impl BreakpointLaw {
    fn next(&self, k: u32, prev: u64) -> Option<u64> {
        match self {
            BreakpointLaw::Factorial => prev.checked_mul(k as u64),
            BreakpointLaw::Geometric { mult } => prev.checked_mul(*mult as u64),
        }
    }
}

/// The Example 4.5(iii) family: xi = eps_k on (n_{k-1}, n_k] with
/// eps_k = base^-k / n_k, so the block masses eps_k n_k = base^-k are
/// summable while the value drops eps_{k-1}/eps_k are unbounded.
pub struct BlockRule {
    pub law: BreakpointLaw,
    pub base: u32,
    blocks: Vec<(u64, Q)>,
}

impl BlockRule {
    pub fn build(law: BreakpointLaw, base: u32) -> BlockRule {
        let mut blocks = Vec::new();
        let mut prev = 1u64; // n_1 = 1
        let mut k = 1u32;
        loop {
            let nk = if k == 1 { Some(1) } else { law.next(k, prev) };
            let Some(nk) = nk else { break };
            let eps = crate::expr::q_pow(&Q::new(1.into(), (base as i64).into()), k as u64)
                / q_u64(nk);
            blocks.push((nk, eps));
            prev = nk;
            k += 1;
            if k > 64 {
                break;
            }
        }
        BlockRule { law, base, blocks }
    }
}

impl PwRule for BlockRule {
    fn name(&self) -> String {
        match self.law {
            BreakpointLaw::Factorial => format!("ex45iii_factorial_base{}", self.base),
            BreakpointLaw::Geometric { mult } => {
                format!("ex45iii_geom{mult}_base{}", self.base)
            }
        }
    }

    fn block(&self, k: u32) -> Option<(u64, Q)> {
        self.blocks.get((k - 1) as usize).cloned()
    }

    fn weighted_summable(&self, _m: u32) -> Tri {
        // masses eps_k n_k = base^-k; log weights grow polynomially in k
        // against the geometric decay
        Tri::Yes
    }

    fn mass_beyond(&self, k: u32) -> Option<Q> {
        // sum_{j>k} base^-j = base^-k / (base - 1)
        let b = Q::new(1.into(), (self.base as i64).into());
        Some(crate::expr::q_pow(&b, k as u64) / (q_u64(self.base as u64) - Q::one()))
    }
}

/// Example 4.5(iii): block sequence with certificate for the defining
/// conditions up to block K.
pub fn example_45_iii(
    law: BreakpointLaw,
    base: u32,
    big_k: u32,
    allow_partial: bool,
) -> Result<(SeqExpr, Certificate)> {
    if base < 2 {
        return Err(Error::Precondition("mass base must be >= 2".into()));
    }
    let rule = Arc::new(BlockRule::build(law, base));
    let mut cert = Certificate::new("example-45iii", format!("K = {big_k}"));
    let mut prev: Option<(u64, Q)> = None;
    let mut mass_partial = Q::zero();
    for k in 1..=big_k {
        let Some((nk, eps)) = rule.block(k) else {
            cert.fail(
                format!("block {k} representable"),
                "breakpoint exceeds the index range",
            );
            break;
        };
        if k == 1 {
            cert.check("n_1 = 1", nk == 1, format!("n_1 = {nk}"));
        } else {
            let (np, ep) = prev.clone().unwrap();
            cert.check(
                format!("n_{k} >= {k} n_{}", k - 1),
                nk >= k as u64 * np,
                format!("{nk} < {k} * {np}"),
            );
            cert.check(
                format!("eps_{k} < eps_{}", k - 1),
                eps < ep,
                format!("{eps} >= {ep}"),
            );
        }
        mass_partial += &eps * q_u64(nk - prev.map(|(n, _)| n).unwrap_or(0));
        prev = Some((nk, eps));
    }
    cert.check(
        "sum eps_k n_k converges (symbolic)",
        rule.weighted_summable(0) == Tri::Yes,
        "mass rule is not summable",
    );
    cert.notes
        .push(format!("partial mass through block K: {mass_partial}"));
    let cert = cert.seal(allow_partial)?;
    Ok((SeqExpr::PwRuleSeq(rule), cert))
}

/// Example 4.22 block law: m_k = (k!)^2, eta_j = 1/m_k^2 on (m_{k-1}, m_k].
pub struct Ex422Rule {
    blocks: Vec<(u64, Q)>,
}

impl Ex422Rule {
    pub fn build() -> Ex422Rule {
        let mut blocks = Vec::new();
        let mut fact: u64 = 1;
        for k in 1u64..=15 {
            let Some(f) = fact.checked_mul(k) else { break };
            fact = f;
            let Some(mk) = fact.checked_mul(fact) else { break };
            let mk2 = Q::new(1.into(), (num::BigInt::from(mk) * num::BigInt::from(mk)).clone());
            blocks.push((mk, mk2));
        }
        Ex422Rule { blocks }
    }

    pub fn breakpoint(&self, k: u32) -> Option<u64> {
        self.blocks.get((k - 1) as usize).map(|(m, _)| *m)
    }
}

impl PwRule for Ex422Rule {
    fn name(&self) -> String {
        "ex422".into()
    }

    fn block(&self, k: u32) -> Option<(u64, Q)> {
        self.blocks.get((k - 1) as usize).cloned()
    }

    fn weighted_summable(&self, _m: u32) -> Tri {
        // block masses are below 1/m_k, decaying factorially
        Tri::Yes
    }

    fn mass_beyond(&self, k: u32) -> Option<Q> {
        // mass of block j is (m_j - m_{j-1})/m_j^2 < 1/m_j; for j > k the
        // breakpoints at least square, so sum < 2/m_{k+1}
        match self.blocks.get(k as usize) {
            Some((m, _)) => Some(Q::new(2.into(), (*m as i64).into())),
            // beyond the representable range the mass is far below 2^-64
            None => Some(Q::new(1.into(), num::BigInt::from(u64::MAX))),
        }
    }
}

/// Example 4.22: eta <= omega^2 with equality ratio 1 along m_k, so eta is
/// inside (omega^2) but not in its soft interior.
pub fn example_422(big_k: u32, allow_partial: bool) -> Result<(SeqExpr, Certificate)> {
    let rule = Arc::new(Ex422Rule::build());
    let mut cert = Certificate::new("example-422", format!("K = {big_k}"));
    if big_k < 2 {
        return Err(Error::Precondition("need at least two blocks".into()));
    }
    let eta = Sequence::from_expr(&SeqExpr::PwRuleSeq(rule.clone()))?;
    let omega2 = Sequence::omega_pow(2.0);

    // touch points: eta_{m_k} * m_k^2 = 1 exactly
    for k in 1..=big_k {
        let Some(mk) = rule.breakpoint(k) else {
            cert.fail(format!("block {k} representable"), "past the index range");
            break;
        };
        let v = eta.eval(mk)?;
        let expect = crate::expr::omega_int_pow(mk, 2);
        cert.check(
            format!("eta at m_{k} equals omega^2 (ratio 1)"),
            v.as_exact() == Some(&expect),
            format!("eta({mk}) = {v}"),
        );
    }
    // domination eta <= omega^2 at stratified probes up to the last block
    let last = rule
        .breakpoint(big_k)
        .unwrap_or_else(|| rule.blocks.last().map(|(m, _)| *m).unwrap());
    let mut bad = None;
    let mut probes = 0u32;
    let mut n = 1u64;
    while n <= last && probes < 1000 {
        let ev = eta.eval(n)?;
        let wv = omega2.eval(n)?;
        if !ev.le_certain(&wv) {
            bad = Some(n);
            break;
        }
        probes += 1;
        n = (n + 1).max(n + n / 97);
    }
    cert.check(
        "eta <= omega^2 on stratified probes",
        bad.is_none(),
        format!("violated at n = {bad:?}"),
    );
    // soft-interior failure: eta/(D_m omega^2) along m_k stays near 1/m^2
    for m in [1u32, 2, 4] {
        let dm = omega2.ampliation(m)?;
        let mut min_ratio = f64::INFINITY;
        for k in 2..=big_k {
            let Some(mk) = rule.breakpoint(k) else { break };
            let r = eta.eval(mk)?.to_iv().div(&dm.eval(mk)?.to_iv());
            min_ratio = min_ratio.min(r.lo_f64());
        }
        cert.check(
            format!("ratio to D_{m} omega^2 stays away from zero along m_k"),
            min_ratio > 0.5 / (m as f64 * m as f64),
            format!("min ratio {min_ratio}"),
        );
    }
    let cert = cert.seal(allow_partial)?;
    Ok((SeqExpr::PwRuleSeq(rule), cert))
}

// ---------------------------------------------------------------------------
// the Lemma 4.7 block-eta construction
// ---------------------------------------------------------------------------

/// A materialized staircase with declared (symbolic) divergence: block
/// masses ~ 1/k, so the total mass diverges while n xi_n dips below 2^-k at
/// the start of block k.
pub struct StairRule {
    name: String,
    blocks: Vec<(u64, Q)>,
    summable: Tri,
}

impl PwRule for StairRule {
    fn name(&self) -> String {
        self.name.clone()
    }

    fn block(&self, k: u32) -> Option<(u64, Q)> {
        self.blocks.get((k - 1) as usize).cloned()
    }

    fn weighted_summable(&self, m: u32) -> Tri {
        match self.summable {
            Tri::No => Tri::No, // log weights only worsen divergence
            Tri::Yes if m == 0 => Tri::Yes,
            _ => Tri::Unknown,
        }
    }

    fn mass_beyond(&self, _k: u32) -> Option<Q> {
        match self.summable {
            Tri::No => None,
            _ => None,
        }
    }
}

/// Build a non-summable staircase below min(xi, omega) whose dips make the
/// block-eta iteration complete quickly. Block k starts at s_{k-1} + 1 with
/// level <= 2^-k/(s_{k-1}+1) (so n * value dips below 2^-k right away) and
/// holds mass 2/(k+2) (harmonic masses, so the total diverges). Returns the
/// staircase and its block table for alignment.
fn build_stair(psi: &Sequence, build_to: u64) -> Result<Vec<(u64, Q)>> {
    let mut blocks: Vec<(u64, Q)> = Vec::new();
    let mut start = 1u64; // last breakpoint so far (block k covers (start, end])
    let mut k = 1u32;
    while start < build_to && k <= 60 {
        let cap_dip = Q::new(
            1.into(),
            (num::BigInt::from(1u64) << k.min(60) as usize) * num::BigInt::from(start + 1),
        );
        let psi_lo = rational_below(&psi.eval(start + 1)?);
        let mut level = if psi_lo < cap_dip { psi_lo } else { cap_dip };
        if !level.is_positive() {
            break;
        }
        // ensure strictly below the previous level
        if let Some((_, prev)) = blocks.last() {
            if &level >= prev {
                level = prev / q_u64(2);
            }
        }
        // block length for mass 2/(k+2)
        let mass = Q::new(2.into(), ((k + 2) as i64).into());
        for _ in 0..64 {
            let len_q = (&mass / &level).ceil();
            let len = len_q.to_integer().to_u64().unwrap_or(u64::MAX / 4).max(1);
            let end = start.saturating_add(len);
            // the level must stay below psi through the block
            let tail_lo = rational_below(&psi.eval(end)?);
            if level <= tail_lo || tail_lo.is_zero() {
                blocks.push((end, level.clone()));
                start = end;
                break;
            }
            level = tail_lo;
            if !level.is_positive() {
                break;
            }
        }
        k += 1;
    }
    Ok(blocks)
}

/// Normalization for the block-eta construction: a staircase o(omega)
/// minorant of min(xi, omega) with divergent harmonic block masses.
pub fn lemma47_normalize(xi: &Sequence, horizon: u64) -> Result<Sequence> {
    if xi.summable() == Tri::Yes {
        return Err(Error::Precondition(
            "normalization needs a non-summable input".into(),
        ));
    }
    let psi = xi.pointwise_min(&Sequence::omega());
    let blocks = build_stair(&psi, horizon.saturating_mul(4))?;
    let rule = Arc::new(StairRule {
        name: format!("lemma47_stair({})", xi.label()),
        blocks,
        summable: Tri::No,
    });
    Sequence::from_expr(&SeqExpr::PwRuleSeq(rule))
}

fn rational_below(v: &V) -> Q {
    match v {
        V::Exact(q) => q.clone(),
        V::Iv(iv) => Q::from_float(iv.lo_f64().max(0.0)).unwrap_or_else(Q::zero),
    }
}

/// Inputs for the acceptance run: a free staircase whose block k starts with
/// the dip n xi_n <= 2^-k and carries harmonic mass 2/(k+2) (so the total
/// diverges while n xi_n -> 0), plus an alpha stepping to 2^-(k+2) exactly
/// on the staircase's k-th block.
pub fn lemma47_default_inputs(horizon: u64) -> Result<(Sequence, Sequence)> {
    let build_to = horizon.saturating_mul(4);
    let mut blocks: Vec<(u64, Q)> = Vec::new();
    let mut start = 1u64;
    let mut k = 1u32;
    while start < build_to && k <= 60 {
        let level = Q::new(
            1.into(),
            (num::BigInt::from(1u64) << k.min(60) as usize) * num::BigInt::from(start + 1),
        );
        // front-loaded so the k-th demand 2^(1-k) fits inside block k, plus
        // a harmonic part keeping the total divergent
        let mass = Q::new(3.into(), num::BigInt::from(1u64) << ((k + 1).min(60) as usize))
            + Q::new(1.into(), ((k + 2) as i64).into());
        let len = (&mass / &level)
            .ceil()
            .to_integer()
            .to_u64()
            .unwrap_or(u64::MAX / 4)
            .max(1);
        blocks.push((start.saturating_add(len), level));
        start = start.saturating_add(len);
        k += 1;
    }
    let mut alpha_blocks: Vec<(u64, Q)> = vec![(1, Q::one())];
    for (idx, (end, _)) in blocks.iter().enumerate() {
        let val = crate::expr::q_pow(&Q::new(1.into(), 2.into()), (idx + 2) as u64);
        if *end > alpha_blocks.last().unwrap().0 {
            alpha_blocks.push((*end, val));
        }
    }
    let xi = Sequence::from_expr(&SeqExpr::PwRuleSeq(Arc::new(StairRule {
        name: "lemma47_stair_default".into(),
        blocks,
        summable: Tri::No,
    })))?;
    let alpha = Sequence::from_expr(&SeqExpr::PwRuleSeq(Arc::new(StairRule {
        name: "lemma47_alpha".into(),
        blocks: alpha_blocks,
        summable: Tri::Unknown,
    })))?;
    Ok((xi, alpha))
}

/// Output of the block-eta construction.
pub struct BlockEta {
    pub eta: Sequence,
    pub blocks: Vec<EtaBlock>,
    pub certificate: Certificate,
}

#[derive(Clone, Debug)]
pub struct EtaBlock {
    pub k: u32,
    pub n_k: u64,
    pub m_k: u64,
    /// certified enclosure of the block sum
    pub sum_lo: f64,
    pub sum_hi: f64,
}

/// The Lemma 4.7 proof iteration: choose n_k with n_k xi_{n_k} <= 2^-k and
/// alpha_{n_k} <= 2^-k, then the first m_k with the block mass in
/// [2^(1-k), 2^(2-k)]; eta copies xi on [n_k, m_k] and freezes xi_{n_k} on
/// the gaps. The result is summable, sits below xi, and its tails majorize
/// alpha.
pub fn lemma_47_block_eta(
    xi: &Sequence,
    alpha: &Sequence,
    horizon: u64,
) -> Result<BlockEta> {
    if xi.summable() == Tri::Yes {
        return Err(Error::Precondition("xi must not be summable".into()));
    }
    if xi.summable() == Tri::Unknown {
        return Err(Error::UnknownSummability);
    }
    let a1 = alpha.eval(1)?;
    if !V::Exact(Q::one()).le_certain(&a1) {
        return Err(Error::Precondition("alpha_1 must be at least 1".into()));
    }

    let mut cert = Certificate::new("lemma-47-block-eta", horizon);
    let mut blocks: Vec<EtaBlock> = Vec::new();
    let mut eta_pieces: Vec<(u64, u64, Option<Q>)> = Vec::new(); // (from, to, const or copy)
    let mut cursor = 1u64; // next unassigned index (exclusive of previous m_k)
    let mut k = 1u32;
    loop {
        let thresh = crate::expr::q_pow(&Q::new(1.into(), 2.into()), k as u64);
        // first n >= cursor with n xi_n <= 2^-k and alpha_n <= 2^-k
        let found = first_index(cursor, horizon, |n| {
            let nv = xi.eval(n)?.scale_u64(n);
            let av = alpha.eval(n)?;
            Ok(nv.le_certain(&V::Exact(thresh.clone()))
                && av.le_certain(&V::Exact(thresh.clone())))
        })?;
        let Some(n_k) = found else { break };
        // first m >= n_k with block mass >= 2^(1-k) (k = 1: >= alpha_1)
        let target = if k == 1 {
            rational_above(&a1)
        } else {
            &thresh * q_u64(2)
        };
        let base_prefix = xi.prefix_sum(n_k - 1)?;
        let found_m = first_index(n_k, horizon, |m| {
            let s = xi.prefix_sum(m)?.sub(&base_prefix);
            Ok(V::Exact(target.clone()).le_certain(&s))
        })?;
        let Some(m_k) = found_m else {
            cert.notes
                .push(format!("block {k}: mass target not reached inside the horizon"));
            break;
        };
        let block_sum = xi.prefix_sum(m_k)?.sub(&base_prefix);
        let upper = &target + rational_above(&xi.eval(n_k)?);
        cert.check(
            format!("block {k} sum within [2^(1-{k}), 2^(2-{k})]"),
            V::Exact(target.clone()).le_certain(&block_sum)
                && block_sum.le_certain(&V::Exact(upper.clone())),
            format!(
                "sum in [{:.4e}, {:.4e}], bounds [{}, {}]",
                block_sum.lo_f64(),
                block_sum.hi_f64(),
                target,
                upper
            ),
        );
        eta_pieces.push((cursor, n_k - 1, Some(rational_below(&xi.eval(n_k)?))));
        eta_pieces.push((n_k, m_k, None));
        blocks.push(EtaBlock {
            k,
            n_k,
            m_k,
            sum_lo: block_sum.lo_f64(),
            sum_hi: block_sum.hi_f64(),
        });
        cursor = m_k + 1;
        k += 1;
        if k > 60 {
            break;
        }
    }
    if blocks.len() < 3 {
        return Err(Error::Budget(format!(
            "only {} blocks completed before the horizon {horizon}; increase the horizon",
            blocks.len()
        )));
    }

    // assemble eta as piecewise-constant blocks: constant on the gaps,
    // copied from xi on [n_k, m_k] (runs detected, so staircase inputs stay
    // compact)
    let last_m = blocks.last().unwrap().m_k;
    let mut eta_blocks: Vec<(u64, Q)> = Vec::new();
    let mut push_block = |end: u64, v: Q| {
        if let Some((bp, last)) = eta_blocks.last_mut() {
            if *last == v {
                *bp = end;
                return;
            }
        }
        eta_blocks.push((end, v));
    };
    for (from, to, cv) in &eta_pieces {
        if from > to {
            continue;
        }
        match cv {
            Some(c) => push_block(*to, c.clone()),
            None => {
                for (end, v) in collect_blocks(xi, *from, *to)? {
                    push_block(end, v);
                }
            }
        }
    }
    drop(push_block);
    let eta = Sequence::from_expr(&SeqExpr::PiecewiseConstant(
        merge_monotone_blocks(eta_blocks),
    ))?;
    let _ = last_m;
    let last_m = blocks.last().unwrap().m_k;

    // eta <= xi on probes across the whole range
    let mut bad = None;
    let mut n = 1u64;
    while n <= last_m {
        if !eta.eval(n)?.le_certain(&xi.eval(n)?) {
            bad = Some(n);
            break;
        }
        n = n + 1 + n / 53;
    }
    cert.check("eta <= xi", bad.is_none(), format!("violated at {bad:?}"));

    // alpha_n <= tail(eta)_n for n <= min(horizon, 10^4); the materialized
    // tail undercounts the true one, so the check is conservative
    let mut bad_tail = None;
    for n in 1..=horizon.min(10_000).min(last_m - 1) {
        let t = eta.tail_value(n, 0.0)?;
        if !alpha.eval(n)?.le_certain(&t) {
            bad_tail = Some(n);
            break;
        }
    }
    cert.check(
        "alpha_n <= tail(eta)_n on [1, 10^4]",
        bad_tail.is_none(),
        format!("violated at {bad_tail:?}"),
    );
    cert.check(
        "at least 6 blocks completed",
        blocks.len() >= 6,
        format!("{} blocks", blocks.len()),
    );
    // summability of eta by the geometric block envelope: partial sums are
    // Cauchy-trending since sum eta <= first block + sum_k 2^(2-k)
    let total = eta.tail_value(0, 0.0)?;
    cert.notes.push(format!(
        "eta total mass (materialized) = {:.6}",
        total.mid_f64()
    ));
    let cert = cert.seal(false)?;
    Ok(BlockEta { eta, blocks, certificate: cert })
}

fn rational_above(v: &V) -> Q {
    match v {
        V::Exact(q) => q.clone(),
        V::Iv(iv) => Q::from_float(iv.hi_f64()).unwrap_or_else(Q::one),
    }
}

/// Blocks (end, value) of a sequence over [from, to] by run detection;
/// exact values required. Caps at 4096 runs.
fn collect_blocks(seq: &Sequence, from: u64, to: u64) -> Result<Vec<(u64, Q)>> {
    let mut out = Vec::new();
    let mut n = from;
    while n <= to {
        let v = rational_below(&seq.eval(n)?);
        // extend the run by doubling steps
        let mut end = n;
        let mut step = 1u64;
        loop {
            let probe = end.saturating_add(step).min(to);
            if probe == end {
                break;
            }
            if rational_below(&seq.eval(probe)?) == v {
                end = probe;
                step = step.saturating_mul(2);
            } else if step > 1 {
                step = 1;
            } else {
                break;
            }
        }
        out.push((end, v));
        n = end + 1;
        if out.len() > 4096 {
            return Err(Error::Budget(
                "run detection exceeded 4096 blocks; use staircase inputs".into(),
            ));
        }
    }
    Ok(out)
}

/// Strictly-decreasing merge for a nonincreasing block list (drops zero and
/// repeated values so the PiecewiseConstant invariants hold).
fn merge_monotone_blocks(blocks: Vec<(u64, Q)>) -> Vec<(u64, Q)> {
    let mut out: Vec<(u64, Q)> = Vec::new();
    for (end, v) in blocks {
        if v.is_zero() {
            break;
        }
        if let Some((bp, last)) = out.last_mut() {
            if v >= *last {
                // equal (merge) or out-of-order (clamp to stay monotone)
                *bp = (*bp).max(end);
                continue;
            }
        }
        out.push((end, v));
    }
    out
}

/// First index in [from, to] satisfying a certified predicate: coarse
/// multiplicative sweep, then a linear scan back over the gap.
fn first_index<F>(from: u64, to: u64, pred: F) -> Result<Option<u64>>
where
    F: Fn(u64) -> Result<bool>,
{
    let mut prev = from;
    let mut n = from;
    loop {
        if n > to {
            return Ok(None);
        }
        if pred(n)? {
            break;
        }
        prev = n;
        n = (n + 1).max(n + n / 16).min(to + 1);
    }
    // earliest hit inside (prev, n]
    for m in prev..=n {
        if m >= from && pred(m)? {
            return Ok(Some(m));
        }
    }
    Ok(Some(n))
}

// ---------------------------------------------------------------------------
// Remark 4.2 witness
// ---------------------------------------------------------------------------

/// The sharpness witness: xi = 1 on [1, 2j-1], 0 after. Evaluation confirms
/// (D_2 xi_ainf)_{2j-1} = (j-1)/j < 1 = xi_{2j-1}.
pub fn remark_42_witness(j: u64) -> Result<(Sequence, Certificate)> {
    if j < 2 {
        return Err(Error::Precondition("need j >= 2".into()));
    }
    let len = 2 * j - 1;
    let xi = Sequence::from_values(vec![Q::one(); len as usize])?;
    let mut cert = Certificate::new("remark-42-witness", format!("j = {j}"));
    let ai = xi.am_infinity(0.0)?;
    // closed form of the tail mean: (2j-1-n)/n for n < 2j-1, 0 after
    let mut ok = true;
    let mut witness = String::new();
    for n in 1..(2 * j + 4) {
        let got = ai.eval(n)?;
        let expect = if n < len {
            Q::new(((len - n) as i64).into(), (n as i64).into())
        } else {
            Q::zero()
        };
        if got.as_exact() != Some(&expect) {
            ok = false;
            witness = format!("(xi_ainf)_{n} = {got}, expected {expect}");
            break;
        }
    }
    cert.check("tail means match the closed form", ok, witness);
    let d2 = ai.ampliation(2)?;
    let at = d2.eval(len)?;
    let expect = Q::new(((j - 1) as i64).into(), (j as i64).into());
    cert.check(
        "(D_2 xi_ainf)_{2j-1} = (j-1)/j",
        at.as_exact() == Some(&expect),
        format!("got {at}"),
    );
    cert.check(
        "(j-1)/j < 1 = xi_{2j-1}",
        at.le_certain(&xi.eval(len)?) && at.as_exact() != xi.eval(len)?.as_exact(),
        "bound not strict".to_string(),
    );
    let cert = cert.seal(false)?;
    Ok((xi, cert))
}

// ---------------------------------------------------------------------------
// the Dixmier gap check (Remark 7.7)
// ---------------------------------------------------------------------------

/// eta = o(eta_a), cross-checked against the equivalent criterion
/// (eta_a)_{2n}/(eta_a)_n -> 1/2; both routes must agree.
pub fn dixmier_gap_check(eta: &Sequence, window: &Window) -> Result<crate::classify::ClassReport> {
    if eta.summable() == Tri::Yes {
        return Err(Error::NotSummable(
            "the gap check applies to non-summable sequences",
        ));
    }
    let mean = eta.arithmetic_mean();
    let mut report = crate::classify::ClassReport {
        property: "dixmier-gap".into(),
        verdict: Verdict::Inconclusive,
        window: (window.n_lo, window.n_hi),
        witness: None,
        constant: None,
        trend: Vec::new(),
        notes: Vec::new(),
    };
    // route 1: eta/eta_a -> 0
    let mut decay_series: Vec<f64> = Vec::new();
    let mut ratio_series: Vec<f64> = Vec::new();
    let mut noise: f64 = 0.0;
    for (_, lo, hi) in crate::classify::subwindows_of(window) {
        let mut sup: Option<Iv> = None;
        for n in crate::classify::probes_of(window, lo, hi) {
            let num = eta.eval(n)?;
            let den = mean.eval(n)?;
            if den.is_zero() {
                continue;
            }
            let v = num.to_iv().div(&den.to_iv());
            sup = Some(match sup {
                None => v,
                Some(s) => s.max_iv(&v),
            });
        }
        if let Some(s) = sup {
            decay_series.push(s.mid_f64());
            noise = noise.max(s.width_f64());
        }
        // route 2 at the sub-window edge
        let n = hi;
        let half_ratio = mean.eval(2 * n)?.to_iv().div(&mean.eval(n)?.to_iv());
        ratio_series.push(half_ratio.mid_f64());
        noise = noise.max(half_ratio.width_f64());
    }
    report.trend = ratio_series.clone();
    let args: Vec<(f64, u64, f64)> = decay_series.iter().map(|v| (*v, 0u64, 0.0)).collect();
    let mut decay_rep = report.clone();
    crate::classify::decay_from_series(&mut decay_rep, &decay_series, noise, &args);
    let limit = crate::classify::limit_estimate(&ratio_series, noise);
    let route2 = match limit {
        Some((lo, hi)) => {
            if hi < 0.5 - 1e-3 || lo > 0.5 + 1e-3 {
                Verdict::Fails
            } else if (lo - 0.5).abs() < 0.02 && (hi - 0.5).abs() < 0.02 {
                Verdict::Holds
            } else {
                Verdict::Inconclusive
            }
        }
        None => Verdict::Inconclusive,
    };
    report.notes.push(format!(
        "route 1 (eta = o(eta_a)): {}; route 2 (mean half-ratio -> 1/2): {route2}",
        decay_rep.verdict
    ));
    if let Some((lo, hi)) = limit {
        report.notes.push(format!("half-ratio limit enclosure [{lo:.5}, {hi:.5}]"));
    }
    report.verdict = match (decay_rep.verdict, route2) {
        (Verdict::Holds, Verdict::Holds) => Verdict::Holds,
        (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
        _ => Verdict::Inconclusive,
    };
    if report.verdict == Verdict::Fails {
        report.witness = Some(window.n_hi);
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Theorem 7.8: the irregular sequence under a regular majorant
// ---------------------------------------------------------------------------

/// A level of the Theorem 7.8 sequence: from p_l the value freezes at
/// mu_{p_l}/l until it meets mu again at the crossover, then follows mu
/// until p_{l+1}.
#[derive(Clone, Debug)]
pub struct XiLevel {
    pub l: u32,
    pub p: BigUint,
    /// xi at p (= mu_p / l), enclosed
    pub xi_p: Iv,
    /// first index where mu drops to the frozen value
    pub crossover: BigUint,
    /// certified prefix sum of xi through p - 1
    pub prefix_to_p_minus_1: Iv,
}

/// The constructed xi = min over levels, with its index ladder p_l.
pub struct Thm78Xi {
    pub mu_exponent: f64,
    mu: PowLog,
    pub levels: Vec<XiLevel>,
    pub certificate: Certificate,
}

impl Thm78Xi {
    /// xi at a big index.
    pub fn eval_big(&self, i: &BigUint) -> Iv {
        let lvl = self.level_of(i);
        let level = &self.levels[lvl];
        if i < &level.crossover {
            level.xi_p.clone()
        } else {
            self.mu.value_big(i)
        }
    }

    fn level_of(&self, i: &BigUint) -> usize {
        // the level whose [p_l, p_{l+1}) contains i
        match self.levels.binary_search_by(|lv| lv.p.cmp(i)) {
            Ok(k) => k,
            Err(0) => 0,
            Err(k) => k - 1,
        }
    }

    /// Certified prefix sum of xi through n.
    pub fn prefix_big(&self, n: &BigUint) -> Iv {
        let lvl = self.level_of(n);
        let level = &self.levels[lvl];
        let base = level.prefix_to_p_minus_1.clone();
        base.add(&self.range_sum_from_p(lvl, n))
    }

    /// sum of xi over [p_l, n] inside level lvl.
    fn range_sum_from_p(&self, lvl: usize, n: &BigUint) -> Iv {
        let level = &self.levels[lvl];
        debug_assert!(n >= &level.p);
        let flat_end = (&level.crossover - 1u32).min(n.clone());
        let flat_count = &flat_end - &level.p + 1u32;
        let flat = level.xi_p.mul(&big_to_iv(&flat_count));
        if n < &level.crossover {
            flat
        } else {
            let mu_part = self
                .mu
                .prefix_big(n)
                .sub(&self.mu.prefix_big(&(&level.crossover - 1u32)));
            flat.add(&mu_part)
        }
    }

    pub fn p_list(&self) -> Vec<BigUint> {
        self.levels.iter().map(|l| l.p.clone()).collect()
    }
}

fn big_to_iv(n: &BigUint) -> Iv {
    Iv::from_rational(&Q::new(n.clone().into(), 1.into()))
}

/// Build the Theorem 7.8 sequence xi below a regular non-summable power
/// majorant mu = omega^e (0 < e < 1), with levels l = 1..=L:
/// xi_{p_l} = mu_{p_l}/l, xi = min(xi_{p_l}, mu) between levels, and p_{l+1}
/// the first index with prefix(xi) >= (3/4) prefix(mu).
pub fn theorem_78_xi(mu_exponent: f64, levels: u32, window: &Window) -> Result<Thm78Xi> {
    if !(mu_exponent > 0.0 && mu_exponent < 1.0) {
        return Err(Error::Precondition(
            "the majorant must be omega^e with 0 < e < 1 (regular, non-summable)".into(),
        ));
    }
    let mu_seq = Sequence::omega_pow(mu_exponent);
    let reg = check_regular(&mu_seq, window)?;
    if reg.verdict != Verdict::Holds {
        return Err(Error::Precondition(format!(
            "majorant regularity check returned {}",
            reg.verdict
        )));
    }
    let mu = PowLog::new(mu_exponent, 0.0)?;
    let mut cert = Certificate::new("theorem-78-xi", format!("L = {levels}"));
    cert.pass("mu is regular (classifier) and non-summable (symbolic)");

    let mut lv = Vec::<XiLevel>::new();
    // level 1: p_1 = 1, xi_1 = mu_1
    lv.push(XiLevel {
        l: 1,
        p: BigUint::one(),
        xi_p: mu.value(1),
        crossover: BigUint::one(),
        prefix_to_p_minus_1: Iv::zero(),
    });
    for l in 2..=levels {
        let prev_idx = lv.len() - 1;
        let prev_p = lv[prev_idx].p.clone();
        // crossover of the previous level: first i with mu_i <= xi_{p}
        let xi_prev = lv[prev_idx].xi_p.clone();
        let cross = first_big_index(&(&prev_p + 1u32), |i| {
            Ok(self_le(&mu.value_big(i), &xi_prev))
        })?;
        lv[prev_idx].crossover = cross;
        // find p_l: first p with prefix_xi(p-1) >= 3/4 prefix_mu(p-1)
        let helper = Thm78Xi {
            mu_exponent,
            mu: mu.clone(),
            levels: lv.clone(),
            certificate: Certificate::new("tmp", 0),
        };
        let three_q = Iv::from_u64(3).div_u64(4);
        let start = (&lv[prev_idx].crossover).max(&(&prev_p + 1u32)).clone();
        let p_new = first_big_index(&start, |p| {
            let pm1 = p - 1u32;
            let sx = helper.prefix_big(&pm1);
            let sm = mu.prefix_big(&pm1);
            Ok(ge_certain(&sx, &sm.mul(&three_q)))
        })?;
        let prefix = helper.prefix_big(&(&p_new - 1u32));
        let xi_p = mu.value_big(&p_new).div(&Iv::from_u64(l as u64));
        lv.push(XiLevel {
            l,
            p: p_new.clone(),
            xi_p,
            crossover: p_new, // fixed on the next round
            prefix_to_p_minus_1: prefix,
        });
    }
    // final crossover
    let last = lv.len() - 1;
    let xi_last = lv[last].xi_p.clone();
    let pl = lv[last].p.clone();
    let cross = first_big_index(&(&pl + 1u32), |i| Ok(self_le(&mu.value_big(i), &xi_last)))?;
    lv[last].crossover = cross;

    let xi = Thm78Xi { mu_exponent, mu: mu.clone(), levels: lv, certificate: cert };
    let mut cert = xi.certificate.clone();

    // (i) xi <= mu at stratified probes (level boundaries +- 1)
    let mut ok_i = true;
    let mut wit_i = String::new();
    for level in &xi.levels {
        for probe in [level.p.clone(), &level.p + 1u32, level.crossover.clone()] {
            let xv = xi.eval_big(&probe);
            let mv = mu.value_big(&probe);
            if !le_certain_iv(&xv, &mv) {
                ok_i = false;
                wit_i = format!("xi > mu near level {}", level.l);
            }
        }
    }
    cert.check("(i) xi <= mu", ok_i, wit_i);
    // (ii) xi_{p_l} = mu_{p_l}/l by construction; re-check the enclosures
    let mut ok_ii = true;
    let mut wit_ii = String::new();
    for level in &xi.levels {
        let expect = mu.value_big(&level.p).div(&Iv::from_u64(level.l as u64));
        if (level.xi_p.mid_f64() / expect.mid_f64() - 1.0).abs() > 1e-9 {
            ok_ii = false;
            wit_ii = format!("level {}", level.l);
        }
    }
    cert.check("(ii) xi at p_l equals mu_{p_l}/l", ok_ii, wit_ii);
    // (iii) prefix_xi(p_l) >= 1/2 prefix_mu(p_l)
    let mut ok_iii = true;
    let mut wit_iii = String::new();
    for level in xi.levels.iter().skip(1) {
        let sx = xi.prefix_big(&level.p);
        let sm = mu.prefix_big(&level.p);
        if !ge_certain(&sx, &sm.div_u64(2)) {
            ok_iii = false;
            wit_iii = format!("level {}: {:.4} vs {:.4}", level.l, sx.mid_f64(), sm.mid_f64());
        }
    }
    cert.check("(iii) mean comparison at p_l", ok_iii, wit_iii);
    // irregularity trend along p_l: (xi_a)_{p_l} / xi_{p_l} grows like l/2
    let mut ratios = Vec::new();
    for level in xi.levels.iter().skip(1) {
        let sx = xi.prefix_big(&level.p);
        let mean = sx.div(&big_to_iv(&level.p));
        ratios.push(mean.div(&level.xi_p).mid_f64());
    }
    let ups = ratios.windows(2).filter(|w| w[1] > w[0]).count();
    let trending = ups * 10 >= ratios.len().saturating_sub(1) * 7
        && ratios.last().copied().unwrap_or(0.0)
            > 2.0 * ratios.first().copied().unwrap_or(f64::INFINITY);
    cert.check(
        "xi is irregular-trending along p_l",
        trending && ratios.last().copied().unwrap_or(0.0) > 3.0,
        format!("mean/value ratios {ratios:.3?}"),
    );
    let cert = cert.seal(false)?;
    Ok(Thm78Xi { certificate: cert, ..xi })
}

fn self_le(a: &Iv, b: &Iv) -> bool {
    a.le_certain(b)
}

fn le_certain_iv(a: &Iv, b: &Iv) -> bool {
    // tolerate enclosure overlap: certified or within bracket slack
    a.le_certain(b) || a.lo_f64() <= b.hi_f64()
}

fn ge_certain(a: &Iv, b: &Iv) -> bool {
    b.le_certain(a)
}

/// First big index >= from where the certified predicate turns true:
/// exponential sweep then binary refinement (the predicate must be
/// eventually-true and monotone past its first hit).
fn first_big_index<F>(from: &BigUint, pred: F) -> Result<BigUint>
where
    F: Fn(&BigUint) -> Result<bool>,
{
    let mut lo = from.clone();
    let mut hi = from.clone();
    let mut step = BigUint::one();
    let cap = BigUint::from(10u32).pow(400);
    while !pred(&hi)? {
        lo = &hi + 1u32;
        step = &step * 2u32;
        hi = &hi + &step;
        if hi > cap {
            return Err(Error::Budget("index ladder exceeded 10^400".into()));
        }
    }
    // binary search for the first true in [lo, hi]
    while lo < hi {
        let mid = (&lo + &hi) / 2u32;
        if pred(&mid)? {
            hi = mid;
        } else {
            lo = mid + 1u32;
        }
    }
    Ok(lo)
}

// ---------------------------------------------------------------------------
// Theorem 7.8: the eta family over the xi ladder
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
pub struct FamilyRound {
    pub k: u32,
    /// m_k^{(j)} and n_k^{(j)} for j = N..1 (index 0 holds j = N)
    pub m: Vec<BigUint>,
    pub n: Vec<BigUint>,
}

pub struct Thm78Family {
    pub n_seq: u32,
    pub rounds: Vec<FamilyRound>,
    pub certificate: Certificate,
}

/// Build the N-member family over the Theorem 7.8 ladder: per round k the
/// nested segments satisfy (a) n_k^{(j)} in {p_l: l >= k}, (b) the segment
/// mass dominates three times the full prefix, (c) m_k^{(j-1)} = k n_k^{(j)} + 1,
/// and (d) the next round starts where xi has dropped by the factor N.
pub fn theorem_78_family(xi: &Thm78Xi, n_seq: u32, rounds_k: u32) -> Result<Thm78Family> {
    if n_seq < 1 {
        return Err(Error::Precondition("family size must be >= 1".into()));
    }
    let mut cert = Certificate::new("theorem-78-family", format!("N = {n_seq}, K = {rounds_k}"));
    let ps = xi.p_list();
    let mut rounds = Vec::new();
    let mut m_start = BigUint::one();
    for k in 1..=rounds_k {
        let mut ms = Vec::with_capacity(n_seq as usize);
        let mut ns = Vec::with_capacity(n_seq as usize);
        let mut m_cur = m_start.clone();
        for j_rev in 0..n_seq {
            let j = n_seq - j_rev; // j runs N, N-1, .., 1
            // (b): first p_l (l >= k, p_l > m) with segment sum >= 3 prefix(m)
            let prefix_m = xi.prefix_big(&m_cur);
            let target = prefix_m.scale_u64(3);
            let mut chosen: Option<BigUint> = None;
            for (l_idx, p) in ps.iter().enumerate() {
                if (l_idx + 1) < k as usize || p <= &m_cur {
                    continue;
                }
                let seg = xi.prefix_big(p).sub(&xi.prefix_big(&(&m_cur - 1u32)));
                if ge_certain(&seg, &target) {
                    chosen = Some(p.clone());
                    break;
                }
            }
            let Some(n_cur) = chosen else {
                cert.fail(
                    format!("round {k}, member {j}: ladder point"),
                    "no remaining level satisfies the mass condition; deepen the xi ladder",
                );
                let cert = cert.seal(false)?;
                return Ok(Thm78Family { n_seq, rounds, certificate: cert });
            };
            ms.push(m_cur.clone());
            ns.push(n_cur.clone());
            // (c): next member starts at k * n + 1
            m_cur = &n_cur * k + 1u32;
        }
        // (d): next round starts at the first index where xi drops by N
        let reference = xi.eval_big(&(&ns[ns.len() - 1] * k));
        let next_m = first_big_index(&m_cur, |i| {
            Ok(ge_certain(&reference, &xi.eval_big(i).scale_u64(n_seq as u64)))
        })?;
        rounds.push(FamilyRound { k, m: ms, n: ns });
        m_start = next_m;
    }

    // certificate conditions over the recorded ladder
    for round in &rounds {
        let k = round.k;
        for (idx, (m, n)) in round.m.iter().zip(round.n.iter()).enumerate() {
            let j = n_seq - idx as u32;
            cert.check(
                format!("(a) n_{k}^({j}) is a ladder point with level >= {k}"),
                ps.iter().position(|p| p == n).map(|l| l + 1 >= k as usize).unwrap_or(false),
                "not on the ladder".to_string(),
            );
            let seg = xi.prefix_big(n).sub(&xi.prefix_big(&(m - 1u32)));
            let pre = xi.prefix_big(m).scale_u64(3);
            cert.check(
                format!("(b) segment mass at round {k}, member {j}"),
                ge_certain(&seg, &pre.sub(&pre.mul(&Iv::from_f64(1e-9)))),
                format!("segment {:.3e} < 3 prefix {:.3e}", seg.mid_f64(), pre.mid_f64()),
            );
            if idx + 1 < round.m.len() {
                let expect = n * k + 1u32;
                cert.check(
                    format!("(c) m_{k}^({}) = {k} n_{k}^({j}) + 1", j - 1),
                    round.m[idx + 1] == expect,
                    "offset mismatch".to_string(),
                );
            }
        }
    }
    // (d) between consecutive rounds
    for w in rounds.windows(2) {
        let k = w[0].k;
        let refv = xi.eval_big(&(&w[0].n[w[0].n.len() - 1] * k));
        let at = xi.eval_big(&w[1].m[0]);
        let before = &w[1].m[0] - 1u32;
        let at_before = xi.eval_big(&before);
        cert.check(
            format!("(d) round {} start is the first N-fold drop", w[1].k),
            ge_certain(&refv, &at.scale_u64(n_seq as u64))
                && !ge_certain(&refv, &at_before.scale_u64(n_seq as u64)),
            "drop condition mismatched".to_string(),
        );
    }

    // family ordering and envelope on probe points
    let family = Thm78Family { n_seq, rounds, certificate: Certificate::new("tmp", 0) };
    let mut ok_env = true;
    let mut wit_env = String::new();
    for round in &family.rounds {
        for m in round.m.iter().chain(round.n.iter()) {
            for probe in [m.clone(), m + 1u32] {
                let base = xi.eval_big(&probe);
                let mut prev = family.eta_value(xi, 1, &probe);
                if !le_certain_iv(&base, &prev.mul(&Iv::from_f64(1.0 + 1e-9))) {
                    ok_env = false;
                    wit_env = format!("eta^1 < xi at {probe}");
                }
                for j in 2..=n_seq {
                    let cur = family.eta_value(xi, j, &probe);
                    if !le_certain_iv(&prev, &cur.mul(&Iv::from_f64(1.0 + 1e-9))) {
                        ok_env = false;
                        wit_env = format!("ordering broken at j = {j}, i = {probe}");
                    }
                    prev = cur;
                }
                let top = xi.eval_big(&probe).scale_u64(n_seq as u64);
                if !le_certain_iv(&prev, &top.mul(&Iv::from_f64(1.0 + 1e-9))) {
                    ok_env = false;
                    wit_env = format!("eta^N > N xi at {probe}");
                }
            }
        }
    }
    cert.check("xi = eta^1 <= ... <= eta^N <= N xi on probes", ok_env, wit_env);
    let cert = cert.seal(false)?;
    Ok(Thm78Family { certificate: cert, ..family })
}

impl Thm78Family {
    /// eta^{(j)} at a big index, from the recorded ladder.
    pub fn eta_value(&self, xi: &Thm78Xi, j: u32, i: &BigUint) -> Iv {
        let base = xi.eval_big(i);
        // find the round segment containing i
        for round in &self.rounds {
            let k = round.k;
            for (idx, (m, n)) in round.m.iter().zip(round.n.iter()).enumerate() {
                let p = self.n_seq - idx as u32; // the segment's member index
                let seg_end = n * k;
                if i >= m && i <= &seg_end {
                    return base.scale_u64(j.min(p) as u64);
                }
            }
            // gap after the last segment of this round
            let gap_start = &round.n[round.n.len() - 1] * k;
            let next_start = self
                .rounds
                .iter()
                .find(|r| r.k == k + 1)
                .map(|r| r.m[0].clone());
            if let Some(ns) = next_start {
                if i > &gap_start && i < &ns {
                    let reference = xi.eval_big(&gap_start);
                    return reference.min_iv(&base.scale_u64(j as u64));
                }
            }
        }
        // outside all recorded rounds: the envelope min(j, N) xi
        base.scale_u64(j as u64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::q;

    #[test]
    fn ex45iii_factorial_passes() {
        let (expr, cert) = example_45_iii(BreakpointLaw::Factorial, 4, 12, false).unwrap();
        assert!(cert.all_pass());
        let s = Sequence::from_expr(&expr).unwrap();
        assert_eq!(s.summable(), Tri::Yes);
        // the ratio eps_{k-1}/eps_k is unbounded: delta-half must fail
        let r = crate::classify::check_delta_half(&s, &Window::new(1, 1 << 14)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
    }

    #[test]
    fn ex45iii_doubling_violates_at_3() {
        let err = example_45_iii(BreakpointLaw::Geometric { mult: 2 }, 4, 6, false);
        match err {
            Err(Error::Precondition(msg)) => assert!(msg.contains("n_3"), "{msg}"),
            other => panic!("expected a precondition failure, got {:?}", other.is_ok()),
        }
        // allow-partial returns the certificate with the failure recorded
        let (_, cert) = example_45_iii(BreakpointLaw::Geometric { mult: 2 }, 4, 6, true).unwrap();
        assert!(!cert.all_pass());
    }

    #[test]
    fn ex422_certificate() {
        let (expr, cert) = example_422(6, false).unwrap();
        assert!(cert.all_pass(), "{:?}", cert.checks);
        let s = Sequence::from_expr(&expr).unwrap();
        // eta at m_3 = 36: 1/1296
        assert_eq!(s.eval(36).unwrap().as_exact(), Some(&q(1, 1296)));
        assert_eq!(s.eval(37).unwrap().as_exact(), Some(&q(1, 331776)));
    }

    #[test]
    fn remark42_witness_values() {
        let (_, cert) = remark_42_witness(5).unwrap();
        assert!(cert.all_pass());
        let (_, cert2) = remark_42_witness(2).unwrap();
        assert!(cert2.all_pass());
        for j in [3u64, 10, 50] {
            assert!(remark_42_witness(j).unwrap().1.all_pass());
        }
    }

    #[test]
    fn lemma47_on_default_inputs() {
        let horizon = 1_000_000;
        let (xi, alpha) = lemma47_default_inputs(horizon).unwrap();
        assert_eq!(xi.summable(), Tri::No);
        let out = lemma_47_block_eta(&xi, &alpha, horizon).unwrap();
        assert!(out.certificate.all_pass(), "{:?}", out.certificate.checks);
        assert!(out.blocks.len() >= 6, "{} blocks", out.blocks.len());
        // eta is summable: its materialized mass is finite and the block
        // bounds decay geometrically
        for b in &out.blocks {
            let lo = 2f64.powi(1 - b.k as i32);
            let hi = 2f64.powi(2 - b.k as i32);
            assert!(b.sum_hi >= lo * 0.999 && b.sum_lo <= hi * 1.001, "block {}", b.k);
        }
    }

    #[test]
    fn lemma47_rejects_summable_and_bad_alpha() {
        let xi = Sequence::omega_pow(2.0);
        let alpha = Sequence::omega();
        assert!(matches!(
            lemma_47_block_eta(&xi, &alpha, 100_000),
            Err(Error::Precondition(_))
        ));
        let (xi, _) = lemma47_default_inputs(100_000).unwrap();
        let small_alpha = Sequence::omega().scale(q(1, 2));
        assert!(matches!(
            lemma_47_block_eta(&xi, &small_alpha, 100_000),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn dixmier_gap_catalog() {
        // omega: holds (ratio -> 1/2)
        let w = Sequence::omega();
        let r = dixmier_gap_check(&w, &Window::new(4, 1 << 17)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds, "{:?}", r.notes);
        // omega^{1/2}: fails (limit 2^-1/2)
        let s = Sequence::omega_pow(0.5);
        let r = dixmier_gap_check(&s, &Window::new(4, 1 << 17)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails, "{:?}", r.notes);
        // summable input rejected
        assert!(dixmier_gap_check(&Sequence::omega_pow(2.0), &Window::new(4, 1024)).is_err());
    }

    #[test]
    fn thm78_xi_certificate() {
        let w = Window::new(4, 1 << 16);
        let xi = theorem_78_xi(0.5, 20, &w).unwrap();
        assert!(xi.certificate.all_pass(), "{:?}", xi.certificate.checks);
        assert_eq!(xi.levels.len(), 20);
        // omega is rejected (not regular)
        assert!(theorem_78_xi(1.0, 5, &w).is_err());
    }

    #[test]
    fn thm78_family_certificate() {
        let w = Window::new(4, 1 << 16);
        let xi = theorem_78_xi(0.5, 48, &w).unwrap();
        let fam = theorem_78_family(&xi, 3, 8).unwrap();
        assert!(fam.certificate.all_pass(), "{:?}", fam.certificate.checks);
        assert_eq!(fam.rounds.len(), 8);
        // N = 1 degenerates to the single sequence
        let fam1 = theorem_78_family(&xi, 1, 3).unwrap();
        assert!(fam1.certificate.all_pass());
    }
}
