//! Growth classification on finite windows: Delta_{1/2}, regularity,
//! regularity at infinity, Matuszewska indices, Potter envelopes, and the
//! equivalent-condition cross-check.
//!
//! Finite windows cannot decide limsup/liminf statements, so every verdict is
//! three-valued. A statistic is computed per dyadic sub-window [2^i, 2^{i+1})
//! and the sequence of sub-window extremes is classified by trend: stabilized,
//! geometrically converging, drifting with a harmonic-type correction, or
//! diverging. Anything else is reported as inconclusive together with the
//! trend data that failed to settle.

use crate::seq::Sequence;
use crate::value::{Tri, V};
use crate::xf::Iv;
use crate::{par, Error, Result};

/// Probe window over indices, with dyadic sub-windows.
#[derive(Clone, Copy, Debug)]
pub struct Window {
    pub n_lo: u64,
    pub n_hi: u64,
    /// log-spaced probes per dyadic sub-window
    pub probes: usize,
    /// cap on k in the Matuszewska sups
    pub k_cap: u64,
    /// decision margin for strict inequalities on exact paths
    pub margin_exact: f64,
    /// decision margin on bracketed paths
    pub margin_bracket: f64,
}

impl Window {
    pub fn new(n_lo: u64, n_hi: u64) -> Window {
        Window {
            n_lo: n_lo.max(1),
            n_hi,
            probes: 10,
            k_cap: 1 << 12,
            margin_exact: 1e-6,
            margin_bracket: 1e-4,
        }
    }

    /// Spec defaults: 2^17 for exact-rational paths, 2^20 for bracketed ones.
    pub fn default_for(seq: &Sequence) -> Window {
        if seq.is_exact() {
            Window::new(4, 1 << 17)
        } else {
            Window::new(4, 1 << 20)
        }
    }

    fn margin(&self, seq: &Sequence) -> f64 {
        if seq.is_exact() {
            self.margin_exact
        } else {
            self.margin_bracket
        }
    }

    /// Dyadic sub-windows intersected with [n_lo, n_hi]. Trailing slivers
    /// (a cut-off final octave) are dropped so the per-sub-window statistics
    /// stay comparable.
    fn subwindows(&self) -> Vec<(u32, u64, u64)> {
        let mut out: Vec<(u32, u64, u64)> = Vec::new();
        let mut i = 63 - self.n_lo.max(1).leading_zeros();
        loop {
            let lo = (1u64 << i).max(self.n_lo);
            let hi = ((1u64 << (i + 1)) - 1).min(self.n_hi);
            if lo > self.n_hi {
                break;
            }
            if lo <= hi && (hi - lo >= lo / 4 || out.is_empty()) {
                out.push((i, lo, hi));
            }
            i += 1;
            if 1u64 << i > self.n_hi {
                break;
            }
        }
        out
    }

    /// Log-spaced probe indices inside [lo, hi].
    fn probe_points(&self, lo: u64, hi: u64) -> Vec<u64> {
        let mut pts = Vec::with_capacity(self.probes + 2);
        pts.push(lo);
        if hi > lo {
            let fl = lo as f64;
            let fh = hi as f64;
            for t in 1..self.probes {
                let x = fl * (fh / fl).powf(t as f64 / self.probes as f64);
                pts.push((x.round() as u64).clamp(lo, hi));
            }
            pts.push(hi);
        }
        pts.dedup();
        pts
    }
}

/// Three-valued classification outcome.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Holds => write!(f, "holds"),
            Verdict::Fails => write!(f, "fails"),
            Verdict::Inconclusive => write!(f, "inconclusive"),
        }
    }
}

/// Classification verdict with evidence.
#[derive(Clone, Debug)]
pub struct ClassReport {
    pub property: String,
    pub verdict: Verdict,
    pub window: (u64, u64),
    /// index where the asserted inequality is violated (for fails)
    pub witness: Option<u64>,
    /// O-constant over the last stabilized sub-window (for holds)
    pub constant: Option<f64>,
    /// per-sub-window statistic values
    pub trend: Vec<f64>,
    pub notes: Vec<String>,
}

impl ClassReport {
    fn new(property: impl Into<String>, window: &Window) -> ClassReport {
        ClassReport {
            property: property.into(),
            verdict: Verdict::Inconclusive,
            window: (window.n_lo, window.n_hi),
            witness: None,
            constant: None,
            trend: Vec::new(),
            notes: Vec::new(),
        }
    }
}

/// Matuszewska index estimates with window metadata.
#[derive(Clone, Debug)]
pub struct IndexEstimate {
    pub alpha: f64,
    pub beta: f64,
    pub alpha_diverging: bool,
    pub beta_diverging: bool,
    pub window: (u64, u64),
    pub k_cap: u64,
    /// estimates at the raw window edge, before trend extrapolation
    pub alpha_raw: f64,
    pub beta_raw: f64,
    pub notes: Vec<String>,
}

// ---------------------------------------------------------------------------
// probe scanning
// ---------------------------------------------------------------------------

enum Probe {
    Val(Iv),
    /// positive numerator over zero denominator
    Infinite(u64),
    /// 0/0, skipped
    Skip,
}

struct SubStat {
    stat: Iv,
    /// probe index attaining the extreme (by midpoint)
    arg: u64,
}

#[derive(Clone, Copy, PartialEq)]
enum Extreme {
    Sup,
    Inf,
}

/// Per-sub-window extreme of a pointwise statistic. `Err` in the inner result
/// signals an infinite ratio at the reported index.
fn scan<F>(
    window: &Window,
    extreme: Extreme,
    f: F,
) -> Result<std::result::Result<Vec<SubStat>, u64>>
where
    F: Fn(u64) -> Result<Probe> + Sync + Send,
{
    let mut out = Vec::new();
    for (_, lo, hi) in window.subwindows() {
        let pts = window.probe_points(lo, hi);
        let vals = par::map_collect(pts, |&n| f(n).map(|p| (n, p)));
        let mut acc: Option<SubStat> = None;
        for r in vals {
            let (n, p) = r?;
            match p {
                Probe::Skip => continue,
                Probe::Infinite(at) => return Ok(Err(at)),
                Probe::Val(v) => {
                    acc = Some(match acc {
                        None => SubStat { stat: v, arg: n },
                        Some(prev) => {
                            let better = match extreme {
                                Extreme::Sup => v.mid_f64() > prev.stat.mid_f64(),
                                Extreme::Inf => v.mid_f64() < prev.stat.mid_f64(),
                            };
                            let stat = match extreme {
                                Extreme::Sup => prev.stat.max_iv(&v),
                                Extreme::Inf => prev.stat.min_iv(&v),
                            };
                            SubStat { stat, arg: if better { n } else { prev.arg } }
                        }
                    });
                }
            }
        }
        if let Some(s) = acc {
            out.push(s);
        }
    }
    Ok(Ok(out))
}

// ---------------------------------------------------------------------------
// trend analysis
// ---------------------------------------------------------------------------

#[derive(Clone, Debug)]
enum Trend {
    /// differences are below the stabilization tolerance
    Stable { value: f64, slack: f64 },
    /// monotone with geometrically shrinking steps; limit enclosed
    Converging { lo: f64, hi: f64 },
    /// monotone with harmonic-type steps (1/i); limit from the 1/i fit
    Drifting { lo: f64, hi: f64 },
    /// monotone, steps not shrinking
    Diverging { up: bool },
    Mixed(String),
}

/// Classify the tail of a statistic series (one value per dyadic
/// sub-window). At least five points are required for a verdict.
fn analyze(series: &[f64], noise: f64) -> Trend {
    let m = series.len();
    if m < 5 {
        return Trend::Mixed(format!("only {m} sub-windows probed"));
    }
    // values beyond f64 range: a diverging statistic, direction by sign
    if series.iter().any(|v| !v.is_finite()) {
        let up = series.iter().any(|v| *v == f64::INFINITY);
        return Trend::Diverging { up };
    }
    let tail: &[f64] = &series[m.saturating_sub(7)..];
    let base_i = m.saturating_sub(7) + 1; // 1-based index of tail[0]
    let scale = tail.iter().fold(0f64, |a, v| a.max(v.abs())).max(1e-300);
    let diffs: Vec<f64> = tail.windows(2).map(|w| w[1] - w[0]).collect();
    let stab_tol = (noise * 4.0).max(1e-9 * scale).max(f64::EPSILON * 8.0 * scale);
    // stabilized: the last four steps are below the tolerance
    let last4 = &diffs[diffs.len().saturating_sub(4)..];
    if last4.iter().all(|d| d.abs() <= stab_tol) {
        let slack = last4.iter().fold(0f64, |a, d| a.max(d.abs())) + noise;
        return Trend::Stable { value: *tail.last().unwrap(), slack };
    }
    let up = diffs.iter().filter(|d| **d > 0.0).count() > diffs.len() / 2;
    let sign_ok = diffs.iter().all(|d| (if up { *d } else { -*d }) > -stab_tol);
    if !sign_ok {
        return Trend::Mixed("sub-window statistic is not monotone".into());
    }
    // model fitting only on steps that clear the noise floor
    let sig: Vec<(usize, f64)> = diffs
        .iter()
        .enumerate()
        .filter(|(_, d)| d.abs() > 2.0 * noise.max(1e-300))
        .map(|(j, d)| (j, d.abs()))
        .collect();
    if sig.len() < 3 {
        return Trend::Mixed("steps are at the noise floor without settling".into());
    }
    let ratios: Vec<f64> = sig.windows(2).map(|w| w[1].1 / w[0].1).collect();
    let rbar = ratios.iter().sum::<f64>() / ratios.len() as f64;
    let spread_g = ratios.iter().fold(0f64, |a, r| a.max((r - rbar).abs())) / rbar.max(1e-300);
    let last = *tail.last().unwrap();
    let (j_last, d_last) = *sig.last().unwrap();

    if rbar >= 1.03 && spread_g < 0.6 {
        return Trend::Diverging { up };
    }

    // Phase-shifted harmonic model s_i = L -+ c/(i+phi): steps satisfy
    // d_{i+1}/d_i = (i+phi)/(i+phi+2), so each ratio implies a phase
    // phi = 2 rho/(1-rho) - i. A constant phase across steps identifies the
    // model; under a geometric law the implied phase drifts by -1 per step.
    let mut phis: Vec<f64> = Vec::new();
    for (w, rho) in sig.windows(2).zip(ratios.iter()) {
        if w[1].0 == w[0].0 + 1 && *rho < 0.98 && *rho > 0.02 {
            let i = (base_i + w[0].0) as f64;
            phis.push(2.0 * rho / (1.0 - rho) - i);
        }
    }
    if phis.len() >= 2 {
        let pmin = phis.iter().cloned().fold(f64::INFINITY, f64::min);
        let pmax = phis.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if pmax - pmin <= 1.2 {
            // remaining change from the step law: sum_{j>i_last} c/((j+phi)(j+phi+1))
            // = c/(i_last+phi+1) with c = d_last (i_last+phi)(i_last+phi+1)
            let i_l = (base_i + j_last) as f64;
            let rem = |phi: f64| d_last * (i_l + phi) * (i_l + phi + 1.0) / (i_l + phi + 1.0);
            let r1 = rem(pmin);
            let r2 = rem(pmax);
            let (rem_lo, rem_hi) = if r1 <= r2 { (r1, r2) } else { (r2, r1) };
            let err = 0.5 * (rem_hi - rem_lo) + 3.0 * noise;
            let mid = if up {
                last + 0.5 * (rem_lo + rem_hi)
            } else {
                last - 0.5 * (rem_lo + rem_hi)
            };
            return Trend::Drifting { lo: mid - err, hi: mid + err };
        }
    }
    if rbar <= 0.95 && spread_g < 0.6 {
        let r_hi = (rbar * (1.0 + spread_g)).min(0.97);
        let extra_hi = d_last * r_hi / (1.0 - r_hi) + noise;
        return if up {
            Trend::Converging { lo: last - noise, hi: last + extra_hi + noise }
        } else {
            Trend::Converging { lo: last - extra_hi - noise, hi: last + noise }
        };
    }
    if ratios.iter().all(|r| *r >= 0.9) {
        return Trend::Diverging { up };
    }
    Trend::Mixed(format!(
        "step ratios neither shrink nor stay (mean {rbar:.3}, spread {spread_g:.3})"
    ))
}

fn series_mid(stats: &[SubStat]) -> (Vec<f64>, f64) {
    let mids: Vec<f64> = stats.iter().map(|s| s.stat.mid_f64()).collect();
    let noise = stats.iter().fold(0f64, |a, s| a.max(s.stat.width_f64()));
    (mids, noise)
}

/// Verdict for "the statistic stays bounded" (sup-type O-statements).
fn bounded_verdict(report: &mut ClassReport, stats: &[SubStat]) {
    let (mids, noise) = series_mid(stats);
    report.trend = mids.clone();
    let args: Vec<(f64, u64, f64)> = stats
        .iter()
        .map(|s| (s.stat.mid_f64(), s.arg, s.stat.width_f64()))
        .collect();
    bounded_from_series(report, &mids, noise, &args);
}

// crate-internal access for the ideal-membership scans
pub(crate) fn subwindows_of(w: &Window) -> Vec<(u32, u64, u64)> {
    w.subwindows()
}

/// Enclosure of the limit of a settling series, when the trend supports one.
pub(crate) fn limit_estimate(series: &[f64], noise: f64) -> Option<(f64, f64)> {
    match analyze(series, noise) {
        Trend::Stable { value, slack } => Some((value - slack, value + slack)),
        Trend::Converging { lo, hi } | Trend::Drifting { lo, hi } => Some((lo, hi)),
        _ => None,
    }
}

pub(crate) fn probes_of(w: &Window, lo: u64, hi: u64) -> Vec<u64> {
    w.probe_points(lo, hi)
}

/// Boundedness verdict from a pre-computed sup series (membership scans).
pub(crate) fn bounded_from_series(
    report: &mut ClassReport,
    series: &[f64],
    noise: f64,
    args: &[(f64, u64, f64)],
) {
    match analyze(series, noise) {
        Trend::Stable { value, slack } => {
            report.verdict = Verdict::Holds;
            report.constant = Some(value + slack);
        }
        Trend::Converging { hi, .. } | Trend::Drifting { hi, .. } => {
            report.verdict = Verdict::Holds;
            report.constant = Some(hi);
        }
        Trend::Diverging { up: true } => {
            report.verdict = Verdict::Fails;
            report.witness = args.last().map(|(_, a, _)| *a);
        }
        Trend::Diverging { up: false } => {
            report.verdict = Verdict::Holds;
            report.constant = series.first().copied();
        }
        Trend::Mixed(why) => {
            if let Some(c) = peaked_and_falling(series, noise) {
                report.verdict = Verdict::Holds;
                report.constant = Some(c);
                report.notes.push("statistic peaked inside the window and is falling".into());
            } else {
                match running_max_verdict(series, noise) {
                    Some(Ok(c)) => {
                        report.verdict = Verdict::Holds;
                        report.constant = Some(c);
                        report.notes.push("running maximum stalled".into());
                    }
                    Some(Err(())) => {
                        report.verdict = Verdict::Fails;
                        report.witness = args.last().map(|(_, a, _)| *a);
                        report.notes.push("running maximum keeps jumping upward".into());
                    }
                    None => {
                        report.verdict = Verdict::Inconclusive;
                        report.notes.push(why);
                    }
                }
            }
        }
    }
    // the O-constant is a sup statement: never report below the window max
    if report.verdict == Verdict::Holds {
        let max = series.iter().fold(0f64, |a, v| a.max(*v));
        report.constant = Some(report.constant.unwrap_or(max).max(max));
    }
}

/// Running-maximum analysis for spiky sup statistics (block sequences jump
/// only where their blocks change). Returns a bounded/unbounded call when
/// the new-maximum pattern is decisive.
fn running_max_verdict(series: &[f64], noise: f64) -> Option<std::result::Result<f64, ()>> {
    if series.len() < 6 {
        return None;
    }
    let mut run = Vec::with_capacity(series.len());
    let mut cur = f64::NEG_INFINITY;
    for v in series {
        cur = cur.max(*v);
        run.push(cur);
    }
    let last = *run.last().unwrap();
    let tol = (noise * 4.0).max(1e-9 * last.abs());
    let stalled_for = run.iter().rev().take_while(|v| last - **v <= tol).count();
    if stalled_for >= 4 {
        return Some(Ok(last + noise));
    }
    // distinct new maxima
    let mut jumps: Vec<f64> = Vec::new();
    for v in &run {
        if jumps.last().map(|j| *v > j + tol).unwrap_or(true) {
            jumps.push(*v);
        }
    }
    if jumps.len() >= 4 {
        let growing = jumps.windows(2).all(|w| w[1] >= w[0] * 1.04);
        let total = jumps.last().unwrap() / jumps.first().unwrap().max(1e-300);
        if growing && total >= 2.0 {
            return Some(Err(()));
        }
    }
    None
}

/// A series that rose to an interior maximum and has been decreasing since
/// (within noise) is bounded by its peak.
fn peaked_and_falling(series: &[f64], noise: f64) -> Option<f64> {
    let m = series.len();
    if m < 5 {
        return None;
    }
    let (peak_at, peak) = series
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))?;
    if peak_at + 3 > m {
        return None; // peak too close to the window edge
    }
    let tol = (noise * 4.0).max(1e-9 * peak.abs());
    let falling = series[peak_at..]
        .windows(2)
        .all(|w| w[1] <= w[0] + tol);
    if falling {
        Some(peak + noise)
    } else {
        None
    }
}

/// Decay-to-zero verdict from a sup series (soft-interior membership).
pub(crate) fn decay_from_series(
    report: &mut ClassReport,
    series: &[f64],
    noise: f64,
    args: &[(f64, u64, f64)],
) {
    let first = series.first().copied().unwrap_or(0.0);
    let last = series.last().copied().unwrap_or(0.0);
    let floor = (first * 1e-4).max(noise * 4.0).max(1e-12);
    // strong decay: monotone (within noise) and far below the start
    let tol = (noise * 4.0).max(1e-12);
    let nonincreasing = series.windows(2).all(|w| w[1] <= w[0] + tol);
    if nonincreasing && last <= (0.02 * first).max(floor) {
        report.verdict = Verdict::Holds;
        report.notes.push(format!("ratio decayed from {first:.3e} to {last:.3e}"));
        return;
    }
    match analyze(series, noise) {
        Trend::Stable { value, slack } => {
            if value.abs() <= floor + slack {
                report.verdict = Verdict::Holds;
            } else {
                report.verdict = Verdict::Fails;
                report.witness = args.last().map(|(_, a, _)| *a);
                report.notes.push(format!("ratio stabilizes at {value:.3e}, not at zero"));
            }
        }
        Trend::Converging { lo, hi } | Trend::Drifting { lo, hi } => {
            if hi <= floor.max(0.02 * first) {
                report.verdict = Verdict::Holds;
            } else if lo > floor {
                report.verdict = Verdict::Fails;
                report.witness = args.last().map(|(_, a, _)| *a);
            } else {
                report.verdict = Verdict::Inconclusive;
                report.notes.push(format!("limit enclosure [{lo:.3e}, {hi:.3e}] straddles zero"));
            }
        }
        Trend::Diverging { up } => {
            if up {
                report.verdict = Verdict::Fails;
                report.witness = args.last().map(|(_, a, _)| *a);
            } else {
                report.verdict = Verdict::Holds;
                report.notes.push("ratio decreasing without settling; zero limit".into());
            }
        }
        Trend::Mixed(why) => {
            report.verdict = Verdict::Inconclusive;
            report.notes.push(why);
        }
    }
}

// ---------------------------------------------------------------------------
// ratio probes
// ---------------------------------------------------------------------------

fn ratio_probe(num: &V, den: &V, at: u64) -> Probe {
    if den.is_zero() {
        if num.is_zero() {
            Probe::Skip
        } else {
            Probe::Infinite(at)
        }
    } else {
        Probe::Val(num.to_iv().div(&den.to_iv()))
    }
}

/// Detect an all-zero window start (degenerate input).
fn reject_zero_window(seq: &Sequence, window: &Window) -> Result<()> {
    if seq.eval(window.n_lo)?.is_zero() {
        return Err(Error::BadWindow(format!(
            "sequence is zero from the window start n = {}",
            window.n_lo
        )));
    }
    Ok(())
}

/// Index where the sequence hits zero inside the window, if it does.
fn finite_support_in(seq: &Sequence, window: &Window) -> Result<Option<u64>> {
    if seq.eval(window.n_hi)?.is_zero() {
        let mut lo = window.n_lo;
        let mut hi = window.n_hi;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if seq.eval(mid)?.is_zero() {
                hi = mid;
            } else {
                lo = mid + 1;
            }
        }
        Ok(Some(lo))
    } else {
        Ok(None)
    }
}

// ---------------------------------------------------------------------------
// the classifiers
// ---------------------------------------------------------------------------

/// Delta_{1/2}: sup_n xi_n / xi_{2n} < infinity.
pub fn check_delta_half(seq: &Sequence, window: &Window) -> Result<ClassReport> {
    reject_zero_window(seq, window)?;
    let mut report = ClassReport::new("delta-half", window);
    if let Some(z) = finite_support_in(seq, window)? {
        report.verdict = Verdict::Inconclusive;
        report
            .notes
            .push(format!("finite support (zero from n = {z}); ratio undefined past it"));
        return Ok(report);
    }
    let half = Window { n_hi: window.n_hi / 2, ..*window };
    let res = scan(&half, Extreme::Sup, |n| {
        Ok(ratio_probe(&seq.eval(n)?, &seq.eval(2 * n)?, n))
    })?;
    match res {
        Err(witness) => {
            report.verdict = Verdict::Fails;
            report.witness = Some(witness);
            report.notes.push("ratio is infinite (zero denominator)".into());
        }
        Ok(stats) => bounded_verdict(&mut report, &stats),
    }
    Ok(report)
}

/// Regularity: xi_a = O(xi).
pub fn check_regular(seq: &Sequence, window: &Window) -> Result<ClassReport> {
    let mut report = ClassReport::new("regular", window);
    let mean = seq.arithmetic_mean();
    let res = scan(window, Extreme::Sup, |n| {
        Ok(ratio_probe(&mean.eval(n)?, &seq.eval(n)?, n))
    })?;
    match res {
        Err(witness) => {
            report.verdict = Verdict::Fails;
            report.witness = Some(witness);
            report.notes.push("mean is positive where the sequence is zero".into());
        }
        Ok(stats) => bounded_verdict(&mut report, &stats),
    }
    Ok(report)
}

/// Regularity at infinity: xi_ainf = O(xi); requires summable input.
pub fn check_infty_regular(seq: &Sequence, window: &Window) -> Result<ClassReport> {
    let mut report = ClassReport::new("infty-regular", window);
    let ai = seq.am_infinity(1e-9)?;
    let res = scan(window, Extreme::Sup, |n| {
        Ok(ratio_probe(&ai.eval(n)?, &seq.eval(n)?, n))
    })?;
    match res {
        Err(witness) => {
            report.verdict = Verdict::Fails;
            report.witness = Some(witness);
        }
        Ok(stats) => bounded_verdict(&mut report, &stats),
    }
    Ok(report)
}

/// Potter-type envelope: sup over m <= n of xi_n (n/m)^p / xi_m.
pub fn potter_fit(seq: &Sequence, p: f64, window: &Window) -> Result<ClassReport> {
    let mut report = ClassReport::new(format!("potter(p={p})"), window);
    if !(p > 0.0) {
        return Err(Error::BadWindow("potter exponent must be positive".into()));
    }
    // stratified m-anchors: dyadic lower edges of the window
    let anchors: Vec<u64> = window.subwindows().iter().map(|(_, lo, _)| *lo).collect();
    let res = scan(window, Extreme::Sup, |n| {
        let xin = seq.eval(n)?;
        let mut best: Option<Iv> = None;
        for &m in anchors.iter().filter(|&&m| m <= n) {
            let xim = seq.eval(m)?;
            if xim.is_zero() {
                if xin.is_zero() {
                    continue;
                }
                return Ok(Probe::Infinite(n));
            }
            let factor = Iv::from_u64(n).div(&Iv::from_u64(m)).powf(p);
            let v = xin.to_iv().mul(&factor).div(&xim.to_iv());
            best = Some(match best {
                None => v,
                Some(b) => b.max_iv(&v),
            });
        }
        Ok(best.map(Probe::Val).unwrap_or(Probe::Skip))
    })?;
    match res {
        Err(witness) => {
            report.verdict = Verdict::Fails;
            report.witness = Some(witness);
        }
        Ok(stats) => bounded_verdict(&mut report, &stats),
    }
    Ok(report)
}

/// Strict lower-ratio condition on the mean at infinity:
/// inf_n (xi_ainf)_n / (xi_ainf)_{kn} > k.
pub fn varga_check(seq: &Sequence, k: u32, window: &Window) -> Result<ClassReport> {
    if k < 2 {
        return Err(Error::BadWindow("varga factor must be >= 2".into()));
    }
    let mut report = ClassReport::new(format!("varga(k={k})"), window);
    let ai = seq.am_infinity(1e-9)?;
    let res = scan(window, Extreme::Inf, |n| {
        Ok(ratio_probe(&ai.eval(n)?, &ai.eval(k as u64 * n)?, n))
    })?;
    let stats = match res {
        Err(witness) => {
            // infinite ratio can only help the strict inequality
            report.verdict = Verdict::Holds;
            report.witness = Some(witness);
            return Ok(report);
        }
        Ok(s) => s,
    };
    strict_above_verdict(&mut report, &stats, k as f64, window.margin(seq));
    Ok(report)
}

/// The positivity variant: inf_n xi_n / (xi_ainf)_{kn} > 0.
pub fn varga_positivity(seq: &Sequence, k: u32, window: &Window) -> Result<ClassReport> {
    if k < 2 {
        return Err(Error::BadWindow("varga factor must be >= 2".into()));
    }
    let mut report = ClassReport::new(format!("varga-positivity(k={k})"), window);
    let ai = seq.am_infinity(1e-9)?;
    let res = scan(window, Extreme::Inf, |n| {
        Ok(ratio_probe(&seq.eval(n)?, &ai.eval(k as u64 * n)?, n))
    })?;
    let stats = match res {
        Err(_) => {
            report.verdict = Verdict::Holds;
            return Ok(report);
        }
        Ok(s) => s,
    };
    let (mids, noise) = series_mid(&stats);
    report.trend = mids.clone();
    let first = mids.first().copied().unwrap_or(0.0);
    let floor = (first * 1e-4).max(1e-12);
    match analyze(&mids, noise) {
        Trend::Stable { value, slack } => {
            if value - slack > floor {
                report.verdict = Verdict::Holds;
                report.constant = Some(value - slack);
            } else {
                report.verdict = Verdict::Fails;
                report.witness = stats.last().map(|s| s.arg);
            }
        }
        Trend::Converging { lo, .. } | Trend::Drifting { lo, .. } => {
            if lo > floor {
                report.verdict = Verdict::Holds;
                report.constant = Some(lo);
            } else {
                report.verdict = Verdict::Fails;
                report.witness = stats.last().map(|s| s.arg);
                report.notes.push("lower ratio trends to zero".into());
            }
        }
        Trend::Diverging { up: false } => {
            report.verdict = Verdict::Fails;
            report.witness = stats.last().map(|s| s.arg);
            report.notes.push("lower ratio keeps shrinking".into());
        }
        Trend::Diverging { up: true } => {
            report.verdict = Verdict::Holds;
            report.constant = mids.first().copied();
        }
        Trend::Mixed(why) => {
            report.verdict = Verdict::Inconclusive;
            report.notes.push(why);
        }
    }
    Ok(report)
}

/// Decide `lim statistic > bound` (statistic approaches from above or below).
fn strict_above_verdict(report: &mut ClassReport, stats: &[SubStat], bound: f64, margin: f64) {
    let (mids, noise) = series_mid(stats);
    report.trend = mids.clone();
    let thresh = bound * (1.0 + margin);
    match analyze(&mids, noise) {
        Trend::Stable { value, slack } => {
            if value - slack > thresh {
                report.verdict = Verdict::Holds;
                report.constant = Some(value - slack);
            } else if value + slack <= thresh {
                report.verdict = Verdict::Fails;
                report.witness = stats.last().map(|s| s.arg);
            } else {
                report.verdict = Verdict::Inconclusive;
                report.notes.push(format!("stabilized within the margin of {bound}"));
            }
        }
        Trend::Converging { lo, hi } | Trend::Drifting { lo, hi } => {
            if lo > thresh {
                report.verdict = Verdict::Holds;
                report.constant = Some(lo);
            } else if hi <= thresh {
                report.verdict = Verdict::Fails;
                report.witness = stats.last().map(|s| s.arg);
            } else if (0.5 * (lo + hi) - bound).abs() <= (hi - lo) + margin * bound.max(1.0) {
                // the fitted limit hugs the bound: the strict inequality is
                // not established, and the margin rule calls that a failure
                report.verdict = Verdict::Fails;
                report.witness = stats.last().map(|s| s.arg);
                report.notes.push(format!(
                    "limit enclosure [{lo:.6}, {hi:.6}] is consistent with the bound {bound}"
                ));
            } else {
                report.verdict = Verdict::Inconclusive;
                report
                    .notes
                    .push(format!("limit enclosure [{lo:.6}, {hi:.6}] straddles {bound}"));
            }
        }
        Trend::Diverging { up } => {
            if up {
                report.verdict = Verdict::Holds;
                report.constant = mids.last().copied();
            } else {
                report.verdict = Verdict::Fails;
                report.witness = stats.last().map(|s| s.arg);
                report.notes.push("statistic keeps decreasing toward the bound".into());
            }
        }
        Trend::Mixed(why) => {
            report.verdict = Verdict::Inconclusive;
            report.notes.push(why);
        }
    }
}

// ---------------------------------------------------------------------------
// Matuszewska indices
// ---------------------------------------------------------------------------

/// alpha and beta from dilation ratios xi_{kn}/xi_k, with a slowly-varying
/// correction: for fixed n the running k-extreme is fit against the model
/// L (1 + ln n / ln k)^rho, which is exact on power-log sequences.
pub fn matuszewska_indices(seq: &Sequence, window: &Window) -> Result<IndexEstimate> {
    let i_max = 63 - window.n_hi.leading_zeros();
    let j_max = 63 - window.k_cap.leading_zeros();
    // guard against zeros inside the scan range
    let probe_hi = window.n_hi.saturating_mul(window.k_cap).min(1u64 << 40);
    if seq.eval(probe_hi)?.is_zero() {
        return Err(Error::ZeroInWindow(probe_hi));
    }

    let ns: Vec<u64> = (2..=i_max).map(|i| 1u64 << i).collect();
    let rows = par::map_collect(ns, |&n| -> Result<(f64, f64)> {
        let ln_n = (n as f64).ln();
        // running extremes over k, recorded at each dyadic k bin edge
        let mut sup_run: Option<Iv> = None;
        let mut inf_run: Option<Iv> = None;
        let mut sup_at: Vec<(f64, f64)> = Vec::new(); // (ln k at bin edge, ln value)
        let mut inf_at: Vec<(f64, f64)> = Vec::new();
        for j in 0..=j_max {
            let ks: Vec<u64> = if j == 0 {
                vec![1]
            } else {
                let lo = 1u64 << (j - 1);
                let hi = 1u64 << j;
                vec![lo + (hi - lo) / 2, hi]
            };
            for k in ks {
                let num = seq.eval(k * n)?;
                let den = seq.eval(k)?;
                if den.is_zero() {
                    continue;
                }
                let ratio = num.to_iv().div(&den.to_iv());
                sup_run = Some(match sup_run {
                    None => ratio.clone(),
                    Some(s) => s.max_iv(&ratio),
                });
                inf_run = Some(match inf_run {
                    None => ratio,
                    Some(s) => s.min_iv(&ratio),
                });
            }
            let kf = (1u64 << j) as f64;
            if let Some(s) = &sup_run {
                sup_at.push((kf.ln().max(1e-9), ln_iv(s)));
            }
            if let Some(s) = &inf_run {
                inf_at.push((kf.ln().max(1e-9), ln_iv(s)));
            }
        }
        let b_sup = k_limit_fit(&sup_at, ln_n) / ln_n;
        let b_inf = k_limit_fit(&inf_at, ln_n) / ln_n;
        Ok((b_sup, b_inf))
    });

    let mut b_sup = Vec::new();
    let mut b_inf = Vec::new();
    for r in rows {
        let (s, i) = r?;
        b_sup.push(s);
        b_inf.push(i);
    }

    let mut notes = Vec::new();
    let (alpha, alpha_div) = extrapolate_index(&b_sup, &mut notes, "alpha");
    let (beta, beta_div) = extrapolate_index(&b_inf, &mut notes, "beta");
    Ok(IndexEstimate {
        alpha,
        beta,
        alpha_diverging: alpha_div,
        beta_diverging: beta_div,
        window: (window.n_lo, window.n_hi),
        k_cap: window.k_cap,
        alpha_raw: b_sup.last().copied().unwrap_or(f64::NAN),
        beta_raw: b_inf.last().copied().unwrap_or(f64::NAN),
        notes,
    })
}

fn ln_iv(v: &Iv) -> f64 {
    // extended-precision log so deep geometric values keep finite slopes
    v.ln_mid_f64()
}

/// Extrapolate the running k-extreme to k -> infinity using the model
/// ln s(kappa) = ln L + rho ln(1 + u/kappa); exact on power-log inputs.
/// Input points are (kappa = ln k, ln s); returns ln of the limit estimate.
fn k_limit_fit(points: &[(f64, f64)], u: f64) -> f64 {
    let n = points.len();
    if n == 0 {
        return f64::NAN;
    }
    let (k2, s2) = points[n - 1];
    if n < 3 {
        return s2;
    }
    let (k1, s1) = points[n - 2];
    let g1 = (1.0 + u / k1).ln();
    let g2 = (1.0 + u / k2).ln();
    if (g1 - g2).abs() < 1e-12 {
        return s2;
    }
    let rho = (s1 - s2) / (g1 - g2);
    if !rho.is_finite() || rho.abs() > 24.0 {
        return s2;
    }
    s2 - rho * g2
}

/// Limit of the per-n index series with a {1, 1/i, ln i / i} least-squares
/// basis over the last points. Detects divergence to -infinity.
fn extrapolate_index(series: &[f64], notes: &mut Vec<String>, name: &str) -> (f64, bool) {
    let m = series.len();
    if m < 4 {
        return (series.last().copied().unwrap_or(f64::NAN), false);
    }
    let last = series[m - 1];
    let prev = series[m - 2];
    if last.abs() > 8.0 && last.abs() > 1.3 * prev.abs().max(1.0) {
        notes.push(format!("{name} estimate diverges (last values {prev:.2}, {last:.2})"));
        return (f64::NEG_INFINITY, true);
    }
    let tail = &series[m.saturating_sub(8)..];
    let base = m.saturating_sub(8) + 1;
    // least squares for b_i = L + A/i + B ln(i)/i
    let mut ata = [[0f64; 3]; 3];
    let mut atb = [0f64; 3];
    for (j, b) in tail.iter().enumerate() {
        let i = (base + j) as f64;
        let row = [1.0, 1.0 / i, i.ln() / i];
        for r in 0..3 {
            for c in 0..3 {
                ata[r][c] += row[r] * row[c];
            }
            atb[r] += row[r] * b;
        }
    }
    match solve3(ata, atb) {
        Some(x) if x[0].is_finite() => (x[0], false),
        _ => (last, false),
    }
}

fn solve3(mut a: [[f64; 3]; 3], mut b: [f64; 3]) -> Option<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-14 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in 0..3 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for c in col..3 {
                    a[row][c] -= f * a[col][c];
                }
                b[row] -= f * b[col];
            }
        }
    }
    Some([b[0] / a[0][0], b[1] / a[1][1], b[2] / a[2][2]])
}

// ---------------------------------------------------------------------------
// analytic one-sided bounds
// ---------------------------------------------------------------------------

/// Window estimates of the analytic bounds
/// alpha <= -1 - inf xi/xi_ainf and beta >= -1 + inf xi/xi_a.
pub fn analytic_bounds(seq: &Sequence, window: &Window) -> Result<(f64, f64)> {
    let mean = seq.arithmetic_mean();
    let mut inf_a = f64::INFINITY;
    for (_, lo, hi) in window.subwindows() {
        for n in window.probe_points(lo, hi) {
            let den = mean.eval(n)?;
            if den.is_zero() {
                // zero mean means a zero sequence up to n; nothing to bound
                continue;
            }
            let r = seq.eval(n)?.to_iv().div(&den.to_iv()).mid_f64();
            inf_a = inf_a.min(r);
        }
    }
    let beta_lower = if inf_a.is_finite() { -1.0 + inf_a } else { f64::NAN };
    let alpha_upper = if seq.summable() == Tri::Yes {
        let ai = seq.am_infinity(1e-9)?;
        let mut inf_i = f64::INFINITY;
        for (_, lo, hi) in window.subwindows() {
            for n in window.probe_points(lo, hi) {
                let den = ai.eval(n)?;
                if den.is_zero() {
                    // tail already exhausted; the ratio is +infinity or 0/0
                    continue;
                }
                let r = seq.eval(n)?.to_iv().div(&den.to_iv()).mid_f64();
                inf_i = inf_i.min(r);
            }
        }
        if inf_i.is_finite() {
            -1.0 - inf_i
        } else {
            f64::NAN
        }
    } else {
        f64::NAN
    };
    Ok((alpha_upper, beta_lower))
}

// ---------------------------------------------------------------------------
// symbolic summability and the cross-check
// ---------------------------------------------------------------------------

/// Exact symbolic summability rules (never probes values).
pub fn symbolic_summability(expr: &crate::expr::SeqExpr) -> Tri {
    expr.summable()
}

/// All implemented equivalent conditions for regularity at infinity,
/// with an agreement flag.
#[derive(Clone, Debug)]
pub struct Cross412 {
    pub reports: Vec<(String, Verdict)>,
    pub details: Vec<ClassReport>,
    pub agreement: bool,
    /// the common verdict when agreement holds and nothing is inconclusive
    pub infty_regular: Option<bool>,
}

/// Evaluate conditions (ii), (iii), (iv), (v), (v'), (v''), (v'''), (vi) on a
/// summable sequence and check mutual agreement.
pub fn cross_check_412(seq: &Sequence, window: &Window) -> Result<Cross412> {
    if seq.summable() != Tri::Yes {
        return Err(Error::NotSummable("equivalence cross-check"));
    }
    let mut details = Vec::new();
    let mut reports: Vec<(String, Verdict)> = Vec::new();

    // (ii) xi_ainf = O(xi)
    let r2 = check_infty_regular(seq, window)?;
    reports.push(("(ii) mean-at-infinity bounded by xi".into(), r2.verdict));
    details.push(r2);

    // (iii) alpha < -1
    let idx = matuszewska_indices(seq, window)?;
    let v3 = if idx.alpha_diverging || idx.alpha <= -1.12 {
        Verdict::Holds
    } else if idx.alpha >= -1.08 {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    reports.push((format!("(iii) alpha = {:.4} < -1", idx.alpha), v3));

    // (iv) xi_ainf itself regular at infinity (one recursion level)
    let v4 = {
        let ai = seq.am_infinity(1e-9)?;
        match ai.summable() {
            Tri::No => Verdict::Fails, // not summable, so not infinity-regular
            Tri::Unknown => Verdict::Inconclusive,
            Tri::Yes => {
                let r = check_infty_regular(&ai, window)?;
                let v = r.verdict;
                details.push(r);
                v
            }
        }
    };
    reports.push(("(iv) mean-at-infinity is itself infinity-regular".into(), v4));

    // (v)/(v') strict ratio conditions for k in {2,3,4}
    let mut per_k = Vec::new();
    for k in [2u32, 3, 4] {
        let r = varga_check(seq, k, window)?;
        per_k.push(r.verdict);
        details.push(r);
    }
    let v5_some = if per_k.iter().any(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else if per_k.iter().all(|v| *v == Verdict::Fails) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let v5_all = if per_k.iter().all(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else if per_k.iter().any(|v| *v == Verdict::Fails) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    reports.push(("(v) lower ratio beats k for some k".into(), v5_some));
    reports.push(("(v') lower ratio beats k for all k".into(), v5_all));

    // (v'')/(v''') positivity variants
    let mut pos_k = Vec::new();
    for k in [2u32, 3, 4] {
        let r = varga_positivity(seq, k, window)?;
        pos_k.push(r.verdict);
        details.push(r);
    }
    let v5pp = if pos_k.iter().all(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else if pos_k.iter().any(|v| *v == Verdict::Fails) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    let v5ppp = if pos_k.iter().any(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else if pos_k.iter().all(|v| *v == Verdict::Fails) {
        Verdict::Fails
    } else {
        Verdict::Inconclusive
    };
    reports.push(("(v'') positivity for all k".into(), v5pp));
    reports.push(("(v''') positivity for some k".into(), v5ppp));

    // (vi) sup_k inf_n ratio/k diverges over k
    let v6 = {
        let ai = seq.am_infinity(1e-9)?;
        let mut gs = Vec::new();
        for e in 1..=6u32 {
            let k = 1u64 << e;
            let mut inf: Option<Iv> = None;
            for (_, lo, hi) in window.subwindows() {
                for n in window.probe_points(lo, hi) {
                    let num = ai.eval(n)?;
                    let den = ai.eval(k * n)?;
                    if den.is_zero() {
                        continue;
                    }
                    let v = num.to_iv().div(&den.to_iv()).div(&Iv::from_u64(k));
                    inf = Some(match inf {
                        None => v,
                        Some(i) => i.min_iv(&v),
                    });
                }
            }
            if let Some(i) = inf {
                gs.push(i.mid_f64());
            }
        }
        let growing = gs.windows(2).all(|w| w[1] > w[0] * 1.3);
        let big = gs.last().copied().unwrap_or(0.0) > 4.0;
        if growing && big {
            Verdict::Holds
        } else if gs.last().copied().unwrap_or(0.0) < 2.0 {
            Verdict::Fails
        } else {
            Verdict::Inconclusive
        }
    };
    reports.push(("(vi) sup over k of scaled lower ratios diverges".into(), v6));

    let verdicts: Vec<Verdict> = reports.iter().map(|(_, v)| *v).collect();
    let definite: Vec<bool> = verdicts
        .iter()
        .filter(|v| **v != Verdict::Inconclusive)
        .map(|v| *v == Verdict::Holds)
        .collect();
    let agreement = !definite.is_empty()
        && definite.iter().all(|b| *b == definite[0])
        && verdicts.iter().all(|v| *v != Verdict::Inconclusive);
    let infty_regular = if agreement { Some(definite[0]) } else { None };
    Ok(Cross412 { reports, details, agreement, infty_regular })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::value::q;

    fn w_for(seq: &Sequence) -> Window {
        Window::default_for(seq)
    }

    #[test]
    fn delta_half_catalog() {
        // omega^p holds with constant ~ 2^p
        let s = Sequence::omega_pow(1.5);
        let r = check_delta_half(&s, &w_for(&s)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let c = r.constant.unwrap();
        assert!((c - 2f64.powf(1.5)).abs() < 0.01, "constant {c}");

        // geometric fails with a diverging ratio
        let g = Sequence::geometric(q(1, 2)).unwrap();
        let r = check_delta_half(&g, &Window::new(4, 1 << 14)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
        assert!(r.witness.is_some());

        // constant-then-zero prefix: inconclusive with a note
        let f = Sequence::from_values(vec![q(1, 1); 40]).unwrap();
        let r = check_delta_half(&f, &Window::new(1, 1 << 10)).unwrap();
        assert_eq!(r.verdict, Verdict::Inconclusive);
        assert!(!r.notes.is_empty());

        // all-zero window rejected
        let z = Sequence::zero();
        assert!(check_delta_half(&z, &Window::new(1, 1024)).is_err());
    }

    #[test]
    fn regularity_catalog() {
        // omega^{1/2} regular with constant -> 2
        let s = Sequence::omega_pow(0.5);
        let r = check_regular(&s, &w_for(&s)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let c = r.constant.unwrap();
        assert!((c - 2.0).abs() < 0.05, "constant {c}");

        // omega fails: ratio ~ ln n
        let w = Sequence::omega();
        let r = check_regular(&w, &w_for(&w)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);

        // <1,0,0,...>: mean is omega, ratio infinite at n = 2
        let e1 = Sequence::from_values(vec![q(1, 1)]).unwrap();
        let r = check_regular(&e1, &Window::new(1, 1024)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);
    }

    #[test]
    fn infty_regularity_catalog() {
        // omega^2 holds with ratio -> 1
        let s = Sequence::omega_pow(2.0);
        let r = check_infty_regular(&s, &Window::new(4, 1 << 16)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!((r.constant.unwrap() - 1.0).abs() < 0.05);

        // geometric holds (ratio -> 0 side: bounded trivially)
        let g = Sequence::geometric(q(1, 2)).unwrap();
        let r = check_infty_regular(&g, &Window::new(2, 1 << 12)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);

        // omega log^-2 fails: ratio ~ ln n diverges
        let s = Sequence::omega_log(1.0, -2.0);
        let r = check_infty_regular(&s, &Window::new(4, 1 << 18)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);

        // non-summable rejected
        assert!(check_infty_regular(&Sequence::omega(), &Window::new(4, 1024)).is_err());
    }

    #[test]
    fn matuszewska_power_family() {
        for p in [0.5f64, 1.0, 2.0] {
            let s = Sequence::omega_pow(p);
            let idx = matuszewska_indices(&s, &Window::new(4, 1 << 18)).unwrap();
            assert!((idx.alpha + p).abs() < 0.05, "alpha {} for p={p}", idx.alpha);
            assert!((idx.beta + p).abs() < 0.05, "beta {} for p={p}", idx.beta);
            assert!(idx.beta <= idx.alpha + 0.05);
        }
    }

    #[test]
    fn matuszewska_log_corrected() {
        let s = Sequence::omega_log(1.0, -2.0);
        let idx = matuszewska_indices(&s, &Window::new(4, 1 << 20)).unwrap();
        assert!((idx.alpha + 1.0).abs() < 0.05, "alpha {}", idx.alpha);
        assert!((idx.beta + 1.0).abs() < 0.05, "beta {}", idx.beta);
    }

    #[test]
    fn matuszewska_geometric_diverges() {
        let g = Sequence::geometric(q(1, 2)).unwrap();
        let idx = matuszewska_indices(&g, &Window::new(4, 1 << 14)).unwrap();
        assert!(idx.alpha_diverging || idx.alpha < -8.0);
    }

    #[test]
    fn potter_catalog() {
        let w2 = Sequence::omega_pow(2.0);
        let r = potter_fit(&w2, 1.5, &Window::new(4, 1 << 16)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        assert!(r.constant.unwrap() <= 1.1);

        let r = potter_fit(&w2, 2.5, &Window::new(4, 1 << 16)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);

        let w = Sequence::omega();
        let r = potter_fit(&w, 1.0, &Window::new(4, 1 << 16)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);
        let c = r.constant.unwrap();
        assert!((c - 1.0).abs() < 1e-6, "constant {c}");
    }

    #[test]
    fn varga_catalog() {
        // omega^2, k=2: inf -> 4 > 2
        let s = Sequence::omega_pow(2.0);
        let r = varga_check(&s, 2, &Window::new(4, 1 << 16)).unwrap();
        assert_eq!(r.verdict, Verdict::Holds);

        // omega log^-2, k=2: inf -> 2, fails strict
        let s = Sequence::omega_log(1.0, -2.0);
        let r = varga_check(&s, 2, &Window::new(4, 1 << 18)).unwrap();
        assert_eq!(r.verdict, Verdict::Fails);

        // lower bound: the ratio never drops below 1 (paper identity)
        for seq in [Sequence::omega_pow(1.5), Sequence::omega_log(1.0, -3.0)] {
            let ai = seq.am_infinity(1e-9).unwrap();
            for n in [4u64, 64, 4096] {
                let num = ai.eval(n).unwrap().to_iv();
                let den = ai.eval(2 * n).unwrap().to_iv();
                assert!(num.div(&den).hi_f64() >= 1.0);
            }
        }
    }

    #[test]
    fn analytic_bounds_catalog() {
        // omega^2: alpha_upper <= -2 + small
        let s = Sequence::omega_pow(2.0);
        let (au, _) = analytic_bounds(&s, &Window::new(4, 1 << 16)).unwrap();
        assert!(au <= -1.9, "alpha_upper {au}");

        // omega^{1/2}: beta_lower -> -1/2
        let s = Sequence::omega_pow(0.5);
        let (_, bl) = analytic_bounds(&s, &Window::new(4, 1 << 16)).unwrap();
        assert!((bl + 0.5).abs() < 0.05, "beta_lower {bl}");

        // <1,0,...>: inf xi/xi_a = 0 at n = 2 -> beta_lower = -1
        let e1 = Sequence::from_values(vec![q(1, 1)]).unwrap();
        let (_, bl) = analytic_bounds(&e1, &Window::new(1, 1 << 8)).unwrap();
        assert!((bl + 1.0).abs() < 1e-9, "beta_lower {bl}");
    }

    #[test]
    fn cross_check_on_infty_regular_and_not() {
        let s = Sequence::omega_pow(2.0);
        let c = cross_check_412(&s, &Window::new(4, 1 << 16)).unwrap();
        assert!(c.agreement, "reports: {:?}", c.reports);
        assert_eq!(c.infty_regular, Some(true));

        let s = Sequence::omega_log(1.0, -2.0);
        let c = cross_check_412(&s, &Window::new(4, 1 << 18)).unwrap();
        assert!(c.agreement, "reports: {:?}", c.reports);
        assert_eq!(c.infty_regular, Some(false));

        assert!(cross_check_412(&Sequence::omega(), &Window::new(4, 1024)).is_err());
    }
}
