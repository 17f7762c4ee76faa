//! Proximity densities, ergodic averages and finite-horizon DC2 verdicts,
//! plus verification of constructed trees.
//!
//! Upper and lower densities are approximated by the maximum and minimum
//! over a finite checkpoint set, which every report discloses.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::builder::{separation_count, Kappa, ScrambledTree};
use crate::error::{Error, Result};
use crate::shift::{SymbolicPoint, DEFAULT_DEPTH};

/// Distances `d_0, ..., d_{N-1}` along a pair of orbits, bounded by the
/// diameter `D`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceSeries {
    values: Vec<f64>,
    diameter: f64,
}

impl DistanceSeries {
    pub fn new(values: Vec<f64>, diameter: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::EmptySeries);
        }
        if !(diameter >= 0.0) || !diameter.is_finite() {
            return Err(Error::DomainError(format!("diameter {diameter} must be finite and >= 0")));
        }
        if let Some(i) = values.iter().position(|&d| !(d >= 0.0 && d <= diameter)) {
            return Err(Error::Invalid(format!(
                "distance {} at index {i} outside [0, {diameter}]",
                values[i]
            )));
        }
        Ok(Self { values, diameter })
    }

    /// `|u_i - v_i|`, with diameter the largest observed distance unless
    /// one is supplied.
    pub fn from_trajectories(u: &[f64], v: &[f64], diameter: Option<f64>) -> Result<Self> {
        if u.len() != v.len() {
            return Err(Error::LengthMismatch { left: u.len(), right: v.len() });
        }
        if let Some(i) = u.iter().chain(v).position(|x| !x.is_finite()) {
            return Err(Error::DomainError(format!("non-finite value at position {i}")));
        }
        let values: Vec<f64> = u.iter().zip(v).map(|(a, b)| libm::fabs(a - b)).collect();
        let observed = values.iter().copied().fold(0.0, f64::max);
        Self::new(values, diameter.unwrap_or(observed))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn sorted_checkpoints(checkpoints: &[usize], len: usize) -> Result<Vec<usize>> {
    let set: BTreeSet<usize> = checkpoints.iter().copied().collect();
    if set.is_empty() {
        return Err(Error::DomainError("no checkpoints given".into()));
    }
    for &n in &set {
        if n == 0 || n > len {
            return Err(Error::IndexOutOfRange { index: n, len });
        }
    }
    Ok(set.into_iter().collect())
}

/// `(n, #{i < n : d_i < t})` at every checkpoint, in increasing order.
fn close_counts(d: &DistanceSeries, t: f64, checkpoints: &[usize]) -> Result<Vec<(usize, usize)>> {
    let cps = sorted_checkpoints(checkpoints, d.len())?;
    let mut out = Vec::with_capacity(cps.len());
    let mut count = 0;
    let mut i = 0;
    for n in cps {
        while i < n {
            if d.values[i] < t {
                count += 1;
            }
            i += 1;
        }
        out.push((n, count));
    }
    Ok(out)
}

/// `F_n(t)` at a set of horizons.
#[derive(Debug, Clone, PartialEq)]
pub struct ProximityProfile {
    pub t: f64,
    /// `(n, F_n(t))` in increasing `n`.
    pub points: Vec<(usize, f64)>,
}

/// `F_n(t) = #{i < n : d_i < t} / n` at each checkpoint.
pub fn profile(d: &DistanceSeries, t: f64, checkpoints: &[usize]) -> Result<ProximityProfile> {
    let points = close_counts(d, t, checkpoints)?
        .into_iter()
        .map(|(n, c)| (n, c as f64 / n as f64))
        .collect();
    Ok(ProximityProfile { t, points })
}

/// Running means `(1/n) Σ_{i<n} d_i` at each checkpoint.
pub fn ergodic_average(d: &DistanceSeries, checkpoints: &[usize]) -> Result<Vec<(usize, f64)>> {
    let cps = sorted_checkpoints(checkpoints, d.len())?;
    let mut out = Vec::with_capacity(cps.len());
    let mut sum = 0.0;
    let mut i = 0;
    for n in cps {
        while i < n {
            sum += d.values[i];
            i += 1;
        }
        out.push((n, sum / n as f64));
    }
    Ok(out)
}

/// `(max_n F_n(t), min_n F_n(t0))` over the checkpoints.
pub fn density_bracket(d: &DistanceSeries, t: f64, t0: f64, checkpoints: &[usize]) -> Result<(f64, f64)> {
    if !(t > 0.0) || !(t0 > 0.0) {
        return Err(Error::DomainError(format!("thresholds must be positive (t = {t}, t0 = {t0})")));
    }
    let sup = profile(d, t, checkpoints)?.points.iter().map(|p| p.1).fold(0.0, f64::max);
    let inf = profile(d, t0, checkpoints)?.points.iter().map(|p| p.1).fold(1.0, f64::min);
    Ok((sup, inf))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dc2Verdict {
    pub t_grid: Vec<f64>,
    /// `(t, max_n F_n(t))` for each grid threshold.
    pub sup_estimates: Vec<(f64, f64)>,
    pub inf_estimate_at_t0: f64,
    pub t0: f64,
    pub gap: f64,
    pub eta: f64,
    pub checkpoints: Vec<usize>,
    pub consistent: bool,
}

/// Consistent when every `sup_n F_n(t) ≥ 1 - η` and `inf_n F_n(t0) ≤ 1 - gap`.
pub fn dc2_verdict(
    d: &DistanceSeries,
    t_grid: &[f64],
    t0: f64,
    gap: f64,
    eta: f64,
    checkpoints: &[usize],
) -> Result<Dc2Verdict> {
    if t_grid.is_empty() {
        return Err(Error::DomainError("empty threshold grid".into()));
    }
    if !(eta > 0.0 && eta < gap) {
        return Err(Error::DomainError(format!("need 0 < eta < gap, got eta = {eta}, gap = {gap}")));
    }
    if t_grid.iter().any(|&t| !(t > 0.0)) || !(t0 > 0.0) {
        return Err(Error::DomainError("thresholds must be positive".into()));
    }
    let cps = sorted_checkpoints(checkpoints, d.len())?;
    let mut sup_estimates = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let sup = profile(d, t, &cps)?.points.iter().map(|p| p.1).fold(0.0, f64::max);
        sup_estimates.push((t, sup));
    }
    let inf = profile(d, t0, &cps)?.points.iter().map(|p| p.1).fold(1.0, f64::min);
    let consistent = sup_estimates.iter().all(|&(_, s)| s >= 1.0 - eta) && inf <= 1.0 - gap;
    Ok(Dc2Verdict {
        t_grid: t_grid.to_vec(),
        sup_estimates,
        inf_estimate_at_t0: inf,
        t0,
        gap,
        eta,
        checkpoints: cps,
        consistent,
    })
}

/// The symbolic distance at coordinates `0..n` with the default depth cap.
pub fn symbolic_distance_series(x: &SymbolicPoint, y: &SymbolicPoint, n: usize) -> Result<DistanceSeries> {
    symbolic_distance_series_with_depth(x, y, n, DEFAULT_DEPTH)
}

/// `d_i = 2^{-j}` for the first disagreement `j < depth` after `i`, else 0.
/// Computed with one backward scan for the next disagreement.
pub fn symbolic_distance_series_with_depth(
    x: &SymbolicPoint,
    y: &SymbolicPoint,
    n: usize,
    depth: usize,
) -> Result<DistanceSeries> {
    if n == 0 {
        return Err(Error::EmptySeries);
    }
    let h = x.horizon().min(y.horizon());
    let (xs, ys) = (x.symbols(), y.symbols());
    let mut next: Option<usize> = None;
    for j in (n..h.min(n + depth)).rev() {
        if xs[j] != ys[j] {
            next = Some(j);
        }
    }
    let mut values = alloc::vec![0.0; n];
    for i in (0..n).rev() {
        if i >= h {
            return Err(Error::HorizonExceeded { requested: i, horizon: h });
        }
        if xs[i] != ys[i] {
            next = Some(i);
        }
        values[i] = match next {
            Some(j) if j - i < depth => libm::exp2(-((j - i) as f64)),
            _ if i + depth <= h => 0.0,
            _ => return Err(Error::HorizonExceeded { requested: i + depth - 1, horizon: h }),
        };
    }
    DistanceSeries::new(values, 1.0)
}

/// Outcome of checking both bridging inequalities
/// `t(1 - F) ≤ avg ≤ tF + D(1 - F)` at a set of `(n, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BridgeCheck {
    pub checked: usize,
    pub violations: usize,
}

impl BridgeCheck {
    pub fn holds(&self) -> bool {
        self.violations == 0
    }

    pub fn merge(&mut self, other: BridgeCheck) {
        self.checked += other.checked;
        self.violations += other.violations;
    }
}

/// Checks the bridging inequalities at every checkpoint for every `t`.
///
/// Sums are compared in count form (`Σd ≤ t·close + D·far`,
/// `Σd ≥ t·far`) with slack `(n + 2)·ε_mach·(t + D)·n` for the rounding of
/// the running sum.
pub fn check_bridging(d: &DistanceSeries, ts: &[f64], checkpoints: &[usize]) -> Result<BridgeCheck> {
    let cps = sorted_checkpoints(checkpoints, d.len())?;
    let mut sums = Vec::with_capacity(cps.len());
    let mut sum = 0.0;
    let mut i = 0;
    for &n in &cps {
        while i < n {
            sum += d.values[i];
            i += 1;
        }
        sums.push(sum);
    }
    let dmax = d.diameter;
    let mut report = BridgeCheck::default();
    for &t in ts {
        for ((n, close), &s) in close_counts(d, t, &cps)?.into_iter().zip(&sums) {
            let far = (n - close) as f64;
            let close = close as f64;
            let slack = (n as f64 + 2.0) * f64::EPSILON * (t + dmax) * n as f64;
            let upper = t * close + dmax * far;
            let lower = t * far;
            report.checked += 1;
            if s > upper + slack || s < lower - slack {
                report.violations += 1;
            }
        }
    }
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyOptions {
    pub t: f64,
    pub eta: f64,
    pub depth: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self { t: libm::exp2(-8.0), eta: 0.01, depth: DEFAULT_DEPTH }
    }
}

/// Closeness at an even checkpoint: `#{n < b : d_n < t}` against
/// `b - a - d` where `2^{-d}` is the largest power of two at or above `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosenessCheck {
    pub window: usize,
    pub checkpoint: usize,
    pub observed: usize,
    pub required: usize,
    pub passed: bool,
}

/// Disagreements in one odd window of a level at which the two leaves'
/// blocks differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationCheck {
    pub window: usize,
    pub level: usize,
    pub length: usize,
    /// Coordinates with `d_n = 1`.
    pub mismatches: usize,
    /// Mismatches where neither symbol lies in `P₀`.
    pub counted: usize,
    pub p0_visits: usize,
    /// `⌈3δn⌉`.
    pub required: usize,
    /// `⌈3δn⌉` less the `P₀` visits of both points.
    pub required_after_p0: usize,
    /// `⌈δn⌉`.
    pub delta_bound: usize,
    pub meets_delta_bound: bool,
    /// `#{n < b : d_n ≥ 1}` over the whole prefix.
    pub prefix_mismatches: usize,
    pub checkpoint: usize,
    /// `F_b(1)`, the fraction of `n < b` with `d_n < 1`.
    pub density_at_t0: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairReport {
    pub a: Kappa,
    pub b: Kappa,
    /// First address position where the leaves differ.
    pub first_difference: usize,
    pub closeness: Vec<ClosenessCheck>,
    pub separation: Vec<SeparationCheck>,
    /// Largest `prefix_mismatches / b` over the separation windows.
    pub delta_achieved: f64,
    pub verdict: Dc2Verdict,
    pub bridging: BridgeCheck,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct UniformSummary {
    pub pairs: usize,
    pub passed: usize,
    pub t0: f64,
    /// Smallest per-pair `delta_achieved`; `None` without pairs.
    pub delta_achieved: Option<f64>,
    /// `3δ(1 - 1/r_min)` over the odd windows of levels ≥ 1.
    pub delta_floor: Option<f64>,
    pub valid: bool,
    pub vacuous: bool,
    pub consistent_verdicts: usize,
    pub checkpoints: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TreeReport {
    pub pairs: Vec<PairReport>,
    pub summary: UniformSummary,
}

impl TreeReport {
    pub fn all_passed(&self) -> bool {
        self.pairs.iter().all(|p| p.passed) && self.summary.valid
    }
}

/// Smallest `d` with `2^{-d} < t`, capped at `depth`: the number of
/// agreeing coordinates that makes the distance fall below `t`.
fn agreement_needed(t: f64, depth: usize) -> usize {
    let mut d = 0;
    while d < depth && libm::exp2(-(d as f64)) >= t {
        d += 1;
    }
    d
}

/// Materializes every leaf of `tree` on its full horizon, in address order.
pub fn leaf_points(tree: &ScrambledTree) -> Result<Vec<(Kappa, SymbolicPoint)>> {
    tree.leaves()
        .into_iter()
        .map(|k| {
            let p = tree.assemble_point(&k, tree.horizon())?;
            Ok((k, p))
        })
        .collect()
}

/// All unordered leaf pairs `(i, j)`, `i < j`, in address order.
pub fn leaf_pairs(count: usize) -> Vec<(usize, usize)> {
    (0..count).flat_map(|i| (i + 1..count).map(move |j| (i, j))).collect()
}

/// Checks closeness at every even checkpoint and separation in every odd
/// window at levels past the first address difference, and computes the
/// pair's DC2 verdict on `0..H - depth`.
pub fn verify_pair(
    tree: &ScrambledTree,
    a: (&Kappa, &SymbolicPoint),
    b: (&Kappa, &SymbolicPoint),
    options: &VerifyOptions,
) -> Result<PairReport> {
    let (ka, x) = a;
    let (kb, y) = b;
    let first = ka
        .first_difference(kb)
        .ok_or_else(|| Error::Invalid(format!("{ka} and {kb} are not a pair")))?;
    let schedule = tree.schedule();
    let horizon = tree.horizon();
    if x.horizon() < horizon || y.horizon() < horizon {
        return Err(Error::HorizonExceeded { requested: horizon, horizon: x.horizon().min(y.horizon()) });
    }
    let (xs, ys) = (&x.symbols()[..horizon], &y.symbols()[..horizon]);
    let depth = options.depth.max(1);
    let need = agreement_needed(options.t, depth);

    // run[n] = agreeing coordinates starting at n, capped at `depth`;
    // tail = first n from which the points agree up to the horizon
    let mut run = alloc::vec![0u16; horizon + 1];
    let cap = depth.min(u16::MAX as usize) as u16;
    let mut tail = horizon;
    for n in (0..horizon).rev() {
        if xs[n] == ys[n] {
            run[n] = (run[n + 1] + 1).min(cap);
            if tail == n + 1 {
                tail = n;
            }
        }
    }
    let is_close = |n: usize| -> Result<bool> {
        if run[n] as usize >= need {
            Ok(true)
        } else if n >= tail && horizon - n < need {
            Err(Error::HorizonExceeded { requested: n + need - 1, horizon })
        } else {
            Ok(false)
        }
    };

    let mut closeness = Vec::new();
    let mut close = 0usize;
    let mut scanned = 0usize;
    for k in 1..=tree.levels() {
        let w = schedule.window(2 * k);
        while scanned < w.end {
            if is_close(scanned)? {
                close += 1;
            }
            scanned += 1;
        }
        let required = (w.len() + 1).saturating_sub(need.max(1));
        closeness.push(ClosenessCheck {
            window: 2 * k,
            checkpoint: w.end,
            observed: close,
            required,
            passed: close >= required,
        });
    }

    let alphabet = tree.alphabet();
    let delta = tree.delta();
    let mut separation = Vec::new();
    let mut delta_achieved: f64 = 0.0;
    for level in first + 1..=tree.levels() {
        let w = schedule.level_window(level);
        let n = w.len();
        let mut mismatches = 0;
        let mut counted = 0;
        let mut p0_visits = 0;
        for i in w.start..w.end {
            let (p, q) = (alphabet.in_p0(xs[i]), alphabet.in_p0(ys[i]));
            p0_visits += p as usize + q as usize;
            if xs[i] != ys[i] {
                mismatches += 1;
                if !p && !q {
                    counted += 1;
                }
            }
        }
        let prefix_mismatches = xs[..w.end].iter().zip(&ys[..w.end]).filter(|(u, v)| u != v).count();
        let required = separation_count(n, delta);
        let required_after_p0 = required.saturating_sub(p0_visits);
        let delta_bound = libm::ceil(delta * n as f64) as usize;
        let density_at_t0 = (w.end - prefix_mismatches) as f64 / w.end as f64;
        delta_achieved = delta_achieved.max(prefix_mismatches as f64 / w.end as f64);
        separation.push(SeparationCheck {
            window: 2 * level + 1,
            level,
            length: n,
            mismatches,
            counted,
            p0_visits,
            required,
            required_after_p0,
            delta_bound,
            meets_delta_bound: counted >= delta_bound,
            prefix_mismatches,
            checkpoint: w.end,
            density_at_t0,
            passed: counted >= required_after_p0 && prefix_mismatches >= required_after_p0,
        });
    }

    // the root window is shared by every leaf, so b_1 is left out of the
    // checkpoints: it would make the upper-density estimate trivially 1
    let n = horizon.saturating_sub(depth);
    if n == 0 {
        return Err(Error::HorizonExceeded { requested: depth, horizon });
    }
    let series = symbolic_distance_series_with_depth(x, y, n, depth)?;
    let mut cps: Vec<usize> = schedule.endpoints().into_iter().skip(1).filter(|&e| e <= n).collect();
    cps.push(n);
    let verdict = dc2_verdict(&series, &[options.t], 1.0, delta, options.eta, &cps)?;
    let bridging = check_bridging(&series, &[options.t, 1.0], &cps)?;

    let passed = closeness.iter().all(|c| c.passed) && separation.iter().all(|s| s.passed) && bridging.holds();
    Ok(PairReport {
        a: ka.clone(),
        b: kb.clone(),
        first_difference: first,
        closeness,
        separation,
        delta_achieved,
        verdict,
        bridging,
        passed,
    })
}

/// Combines per-pair reports into the uniform `(t0, δ_achieved)` summary.
pub fn summarize(tree: &ScrambledTree, pairs: Vec<PairReport>) -> TreeReport {
    let schedule = tree.schedule();
    let r_min = (1..=tree.levels())
        .filter_map(|level| schedule.ratio(2 * level + 1))
        .fold(None, |acc: Option<f64>, r| Some(acc.map_or(r, |m| m.min(r))));
    let delta_floor = r_min.map(|r| 3.0 * tree.delta() * (1.0 - 1.0 / r));
    let delta_achieved = pairs.iter().map(|p| p.delta_achieved).reduce(f64::min);
    let passed = pairs.iter().filter(|p| p.passed).count();
    let vacuous = pairs.is_empty();
    let floor_ok = match (delta_achieved, delta_floor) {
        (Some(a), Some(f)) => a >= f - 1e-12,
        _ => true,
    };
    let checkpoints = pairs.first().map(|p| p.verdict.checkpoints.clone()).unwrap_or_default();
    let summary = UniformSummary {
        pairs: pairs.len(),
        passed,
        t0: 1.0,
        delta_achieved,
        delta_floor,
        valid: passed == pairs.len() && floor_ok,
        vacuous,
        consistent_verdicts: pairs.iter().filter(|p| p.verdict.consistent).count(),
        checkpoints,
    };
    TreeReport { pairs, summary }
}

/// Verifies every unordered leaf pair sequentially.
pub fn verify_tree(tree: &ScrambledTree, options: &VerifyOptions) -> Result<TreeReport> {
    let points = leaf_points(tree)?;
    let mut pairs = Vec::new();
    for (i, j) in leaf_pairs(points.len()) {
        let (ka, x) = &points[i];
        let (kb, y) = &points[j];
        pairs.push(verify_pair(tree, (ka, x), (kb, y), options)?);
    }
    Ok(summarize(tree, pairs))
}
