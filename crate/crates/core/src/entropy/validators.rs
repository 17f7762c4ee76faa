//! Randomized validators for the three finite statements behind the
//! construction:
//!
//! * conditioning a roughly-equal vector on a set of mass `μ(X')` keeps it
//!   roughly equal once `ε' > ε/μ(X')` and `n` is past an explicit threshold;
//! * δ-independence forces most fibers to be ℓ¹-close to the marginal;
//! * the join of a roughly-equal `P` with a longer, nearly independent,
//!   roughly-equal `Q` is roughly equal, and `Q` stays roughly equal on most
//!   atoms of `P`.
//!
//! Every trial draws from its own ChaCha stream derived from `(seed, trial)`,
//! so trials can run in any order or in parallel and still reproduce.

use alloc::vec::Vec;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{
    is_delta_independent, mutual_information, rough_equality_of, RoughEqualParams,
};
use crate::measure::{JointDistribution, ProbVector};

const STREAM_CONDITIONING: u64 = 1 << 48;
const STREAM_FIBER_CAL: u64 = 2 << 48;
const STREAM_FIBER: u64 = 3 << 48;
const STREAM_JOIN: u64 = 4 << 48;

/// Independent RNG for one trial.
pub fn trial_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Aggregated pass/skip/fail counts for one validated statement.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TrialCounts {
    pub trials: usize,
    /// Trials whose sample met the hypotheses.
    pub satisfied: usize,
    pub skipped: usize,
    pub failures: usize,
}

impl TrialCounts {
    pub fn record(&mut self, outcome: Option<bool>) {
        self.trials += 1;
        match outcome {
            None => self.skipped += 1,
            Some(ok) => {
                self.satisfied += 1;
                if !ok {
                    self.failures += 1;
                }
            }
        }
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.gen::<f64>()
}

fn dirichlet(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..dim)
        .map(|_| -libm::log(1.0 - rng.gen::<f64>()) + 1e-12)
        .collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// Draws a vector with `2^log_dim` atoms whose masses scatter around
/// `2^{-log_dim}` within a factor `2^{±0.49·nε}`, optionally followed by a
/// few junk atoms carrying at most `0.6ε` of the mass. The result is
/// usually, not always, roughly equal with `(ε, n, log_dim/n)`; callers
/// re-check.
pub fn sample_rough_vector(rng: &mut ChaCha8Rng, epsilon: f64, n: usize, log_dim: u32) -> Vec<f64> {
    let dim = 1usize << log_dim;
    let spread = 0.49 * n as f64 * epsilon;
    let good: Vec<f64> = (0..dim)
        .map(|_| libm::exp2(uniform(rng, -spread, spread)))
        .collect();
    let good_total: f64 = good.iter().sum();
    let junk_mass = if rng.gen::<bool>() { uniform(rng, 0.0, 0.6 * epsilon) } else { 0.0 };
    let mut out: Vec<f64> = good.iter().map(|w| (1.0 - junk_mass) * w / good_total).collect();
    if junk_mass > 0.0 {
        let parts = rng.gen_range(1..=3usize);
        let split = dirichlet(rng, parts);
        out.extend(split.into_iter().map(|s| s * junk_mass));
    }
    out
}

// ---------------------------------------------------------------------------
// Conditioning on a subset

/// Smallest `n` for which conditioning on a set of mass `mass` turns
/// `(ε, n, h)` rough equality into `(ε', n, h)` rough equality.
///
/// Two losses must fit in the gap `ε' - ε`: the top endpoint moves up by
/// `log2(1/μ)`, and atoms pushed below the bottom endpoint carry at most
/// `2^{-n(ε'-ε)}` of the conditional mass.
pub fn conditioning_threshold(epsilon: f64, epsilon_prime: f64, mass: f64) -> Option<usize> {
    let margin = epsilon_prime - epsilon / mass;
    if !(mass > 0.0) || !(margin > 0.0) {
        return None;
    }
    let gap = epsilon_prime - epsilon;
    let need = libm::fmax(libm::log2(1.0 / mass), libm::log2(1.0 / margin));
    Some(libm::fmax(1.0, libm::ceil(need / gap)) as usize)
}

/// Checks the conditioning statement for one vector. `membership[i]` is the
/// fraction of atom `i` inside `X'`. Returns `None` when the hypotheses fail.
pub fn check_conditioning(
    p: &[f64],
    membership: &[f64],
    epsilon: f64,
    epsilon_prime: f64,
    n: usize,
    h: f64,
) -> Option<bool> {
    let params = RoughEqualParams::new(epsilon, n, h).ok()?;
    if !rough_equality_of(p, params).holds {
        return None;
    }
    let mass: f64 = p.iter().zip(membership).map(|(a, f)| a * f).sum();
    if !(mass > 0.0) || !(epsilon_prime > epsilon / mass) {
        return None;
    }
    if n < conditioning_threshold(epsilon, epsilon_prime, mass)? {
        return None;
    }
    let conditioned: Vec<f64> = p.iter().zip(membership).map(|(a, f)| a * f / mass).collect();
    let params_prime = RoughEqualParams { epsilon: epsilon_prime, n, h };
    Some(rough_equality_of(&conditioned, params_prime).holds)
}

pub fn conditioning_trial(seed: u64, trial: u64) -> Option<bool> {
    let mut rng = trial_rng(seed, STREAM_CONDITIONING | trial);
    let epsilon = uniform(&mut rng, 0.05, 0.2);
    let rho = uniform(&mut rng, 0.2, 1.0);
    let log_dim = rng.gen_range(1..=4u32);
    // n is sized for the worst mass in [0.25, 1]; trials whose realized
    // mass needs more are skipped by the check.
    let n = (5..=20)
        .filter_map(|i| {
            let mass = i as f64 * 0.05;
            conditioning_threshold(epsilon, epsilon * (1.0 + rho) / mass, mass)
        })
        .max()
        .unwrap_or(1);
    let h = log_dim as f64 / n as f64;
    let p = sample_rough_vector(&mut rng, epsilon, n, log_dim);
    let keep = uniform(&mut rng, 0.3, 0.9);
    let membership: Vec<f64> = p
        .iter()
        .map(|_| {
            let u = rng.gen::<f64>();
            if u < keep {
                1.0
            } else if u < keep + (1.0 - keep) / 2.0 {
                0.0
            } else {
                rng.gen::<f64>()
            }
        })
        .collect();
    let mass: f64 = p.iter().zip(&membership).map(|(a, f)| a * f).sum();
    if mass < 0.25 {
        return None;
    }
    check_conditioning(&p, &membership, epsilon, epsilon * (1.0 + rho) / mass, n, h)
}

pub fn validate_conditioning(trials: usize, seed: u64) -> TrialCounts {
    let mut counts = TrialCounts::default();
    for t in 0..trials as u64 {
        counts.record(conditioning_trial(seed, t));
    }
    counts
}

// ---------------------------------------------------------------------------
// Fiber closeness under δ-independence

/// Total weight of fibers whose conditional is ℓ¹-closer than `epsilon` to
/// the row marginal.
pub fn close_fiber_weight(j: &JointDistribution, epsilon: f64) -> f64 {
    let (marginal, _) = j.marginals();
    j.disintegrate()
        .iter()
        .filter_map(|f| {
            let c = f.conditional.as_ref()?;
            let d = c.ell1_distance(&marginal).ok()?;
            (d < epsilon).then_some(f.weight)
        })
        .sum()
}

/// `None` if `j` is not δ-independent, otherwise whether fibers of total
/// weight at least `1 - ε` are ℓ¹-close to the marginal.
pub fn check_fiber_closeness(j: &JointDistribution, delta: f64, epsilon: f64) -> Option<bool> {
    if !is_delta_independent(j, delta) {
        return None;
    }
    Some(close_fiber_weight(j, epsilon) >= 1.0 - epsilon)
}

/// δ below which fiber closeness is guaranteed: Pinsker bounds each far
/// fiber's divergence below by `ε²/(2 ln 2)` bits, and the far weight is at
/// most `I/(ε²/(2 ln 2)) < ε` once `I < ε³/(2 ln 2)`.
pub fn certified_fiber_delta(epsilon: f64) -> f64 {
    epsilon * epsilon * epsilon / (2.0 * core::f64::consts::LN_2)
}

/// Random joint over `rows × cols` (both at most `max_dim`) whose fibers
/// are mixtures of a common base vector and per-column noise.
pub fn sample_fibered_joint(rng: &mut ChaCha8Rng, max_dim: usize) -> JointDistribution {
    let rows = rng.gen_range(2..=max_dim);
    let cols = rng.gen_range(2..=max_dim);
    let nu = dirichlet(rng, cols);
    let base = dirichlet(rng, rows);
    let scale = libm::pow(10.0, uniform(rng, -3.0, 0.0));
    let mut cells = alloc::vec![0.0; rows * cols];
    for (c, &w) in nu.iter().enumerate() {
        let lambda = scale * libm::pow(10.0, uniform(rng, -1.0, 0.0));
        let noise = dirichlet(rng, rows);
        for r in 0..rows {
            cells[r * cols + c] = w * ((1.0 - lambda) * base[r] + lambda * noise[r]);
        }
    }
    JointDistribution::from_weights(rows, cols, cells).expect("positive weights")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberReport {
    pub epsilon: f64,
    pub max_dim: usize,
    pub delta_certified: f64,
    /// Largest δ with no failure on the calibration sample.
    pub delta_searched: f64,
    /// δ used on the validation sample.
    pub delta_used: f64,
    pub counts: TrialCounts,
}

/// Bisects for the largest δ in `[lo, hi]` with `admissible(δ)` true,
/// assuming admissibility is monotone decreasing in δ.
pub fn bisect_delta(lo: f64, hi: f64, mut admissible: impl FnMut(f64) -> bool) -> f64 {
    if admissible(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if admissible(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Searches δ on a calibration sample of `4·trials` joints, then validates
/// half of it on `trials` fresh joints.
pub fn validate_fiber_closeness(trials: usize, seed: u64, epsilon: f64, max_dim: usize) -> FiberReport {
    let calibration: Vec<(JointDistribution, bool)> = (0..4 * trials as u64)
        .map(|t| {
            let mut rng = trial_rng(seed, STREAM_FIBER_CAL | t);
            let j = sample_fibered_joint(&mut rng, max_dim);
            let fails = close_fiber_weight(&j, epsilon) < 1.0 - epsilon;
            (j, fails)
        })
        .collect();
    let certified = certified_fiber_delta(epsilon);
    let hi = libm::log2(max_dim as f64) + 1.0;
    let searched = bisect_delta(certified, hi, |delta| {
        !calibration
            .iter()
            .any(|(j, fails)| *fails && is_delta_independent(j, delta))
    });
    let used = libm::fmax(certified, 0.5 * searched);
    let mut counts = TrialCounts::default();
    for t in 0..trials as u64 {
        counts.record(fiber_trial(seed, t, used, epsilon, max_dim));
    }
    FiberReport {
        epsilon,
        max_dim,
        delta_certified: certified,
        delta_searched: searched,
        delta_used: used,
        counts,
    }
}

pub fn fiber_trial(seed: u64, trial: u64, delta: f64, epsilon: f64, max_dim: usize) -> Option<bool> {
    let mut rng = trial_rng(seed, STREAM_FIBER | trial);
    let j = sample_fibered_joint(&mut rng, max_dim);
    check_fiber_closeness(&j, delta, epsilon)
}

/// Mutual information of every calibration joint, for diagnostics.
pub fn calibration_information(seed: u64, count: usize, max_dim: usize) -> Vec<f64> {
    (0..count as u64)
        .map(|t| {
            let mut rng = trial_rng(seed, STREAM_FIBER_CAL | t);
            mutual_information(&sample_fibered_joint(&mut rng, max_dim))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Join of roughly-equal partitions

/// How the length `m` of the second partition is tied to the first.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Threshold {
    /// `m ≥ n(h+α)/γ`, checked as a hypothesis.
    Enforced,
    /// `m = 1` regardless of the other parameters; a negative control.
    Broken,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub n: usize,
    pub h: f64,
    pub m: usize,
    pub h_prime: f64,
    pub threshold: Threshold,
}

impl JoinParams {
    pub fn min_m(&self) -> f64 {
        self.n as f64 * (self.h + self.alpha) / self.gamma
    }
}

/// Which hypothesis rejected a sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinSkip {
    Parameters,
    FirstNotRough,
    SecondNotRough,
    NotIndependent,
    LengthBelowThreshold,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinVerdict {
    /// The join is roughly equal with `(α+β+γ, m, h')`.
    pub join_rough: bool,
    pub join_good_mass: f64,
    /// Mass of rows on which the conditioned second partition is roughly
    /// equal with `(β, m, h')`; must reach `1 - α - β`.
    pub conditional_mass: f64,
    pub conditional_ok: bool,
    /// Good rows ⊇ rows where the conditional is rough ⊇ rows holding good
    /// join cells. Reported only.
    pub nested: bool,
}

impl JoinVerdict {
    pub fn passed(&self) -> bool {
        self.join_rough && self.conditional_ok
    }
}

pub fn check_join(j: &JointDistribution, params: &JoinParams) -> Result<JoinVerdict, JoinSkip> {
    let p = &params;
    if !(0.0 < p.gamma && p.gamma < p.beta && p.beta < p.alpha) {
        return Err(JoinSkip::Parameters);
    }
    let first = RoughEqualParams::new(p.alpha, p.n, p.h).map_err(|_| JoinSkip::Parameters)?;
    let second = RoughEqualParams::new(p.gamma, p.m, p.h_prime).map_err(|_| JoinSkip::Parameters)?;
    let rows = j.row_sums();
    let cols = j.col_sums();
    let first_report = rough_equality_of(&rows, first);
    if !first_report.holds {
        return Err(JoinSkip::FirstNotRough);
    }
    if !rough_equality_of(&cols, second).holds {
        return Err(JoinSkip::SecondNotRough);
    }
    if !is_delta_independent(j, p.gamma) {
        return Err(JoinSkip::NotIndependent);
    }
    if p.threshold == Threshold::Enforced && (p.m as f64) < p.min_m() {
        return Err(JoinSkip::LengthBelowThreshold);
    }

    let join_params = RoughEqualParams { epsilon: p.alpha + p.beta + p.gamma, n: p.m, h: p.h_prime };
    let join_report = rough_equality_of(j.cells(), join_params);

    let cond_params = RoughEqualParams { epsilon: p.beta, n: p.m, h: p.h_prime };
    let mut rough_rows = alloc::vec![false; j.rows()];
    let mut conditional_mass = 0.0;
    for (r, &mass) in rows.iter().enumerate() {
        if mass > 0.0 {
            let cond: Vec<f64> = j.row(r).iter().map(|c| c / mass).collect();
            if rough_equality_of(&cond, cond_params).holds {
                rough_rows[r] = true;
                conditional_mass += mass;
            }
        }
    }

    let mut good_rows = alloc::vec![false; j.rows()];
    for &r in &first_report.good_indices {
        good_rows[r] = true;
    }
    let rows_nested = rough_rows.iter().zip(&good_rows).all(|(v1, v0)| !v1 || *v0);
    let cells_nested = join_report
        .good_indices
        .iter()
        .all(|&cell| rough_rows[cell / j.cols()]);

    Ok(JoinVerdict {
        join_rough: join_report.holds,
        join_good_mass: join_report.good_mass,
        conditional_mass,
        conditional_ok: conditional_mass >= 1.0 - p.alpha - p.beta,
        nested: rows_nested && cells_nested,
    })
}

/// Draws lemma parameters and a nearly independent joint satisfying them
/// (usually): an exact product of two roughly-equal vectors with every cell
/// perturbed by a factor in `2^{±γ/2}` and renormalized.
pub fn sample_join(rng: &mut ChaCha8Rng, threshold: Threshold) -> (JointDistribution, JoinParams) {
    let alpha = uniform(rng, 0.2, 0.4);
    let beta = alpha * uniform(rng, 0.5, 0.9);
    let gamma = beta * uniform(rng, 0.2, 0.5);
    let n = rng.gen_range(2..=4usize);
    let log_dim_p = rng.gen_range(1..=3u32);
    let h = log_dim_p as f64 / n as f64;
    let m = match threshold {
        Threshold::Enforced => {
            libm::ceil(n as f64 * (h + alpha) / gamma) as usize + rng.gen_range(0..=3usize)
        }
        Threshold::Broken => 1,
    };
    let log_dim_q = rng.gen_range(1..=3u32);
    let h_prime = log_dim_q as f64 / m as f64;
    let p = sample_rough_vector(rng, alpha, n, log_dim_p);
    let q = sample_rough_vector(rng, gamma, m, log_dim_q);
    let mut cells = Vec::with_capacity(p.len() * q.len());
    for &a in &p {
        for &b in &q {
            cells.push(a * b * libm::exp2(uniform(rng, -0.5 * gamma, 0.5 * gamma)));
        }
    }
    let j = JointDistribution::from_weights(p.len(), q.len(), cells).expect("positive weights");
    (j, JoinParams { alpha, beta, gamma, n, h, m, h_prime, threshold })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct JoinReport {
    pub counts: TrialCounts,
    pub join_failures: usize,
    pub conditional_failures: usize,
    pub nesting_violations: usize,
}

impl JoinReport {
    pub fn record(&mut self, outcome: &Result<JoinVerdict, JoinSkip>) {
        match outcome {
            Err(_) => self.counts.record(None),
            Ok(v) => {
                self.counts.record(Some(v.passed()));
                self.join_failures += usize::from(!v.join_rough);
                self.conditional_failures += usize::from(!v.conditional_ok);
                self.nesting_violations += usize::from(!v.nested);
            }
        }
    }
}

pub fn join_trial(seed: u64, trial: u64, threshold: Threshold) -> Result<JoinVerdict, JoinSkip> {
    let mut rng = trial_rng(seed, STREAM_JOIN | trial);
    let (j, params) = sample_join(&mut rng, threshold);
    check_join(&j, &params)
}

pub fn validate_join(trials: usize, seed: u64, threshold: Threshold) -> JoinReport {
    let mut report = JoinReport::default();
    for t in 0..trials as u64 {
        report.record(&join_trial(seed, t, threshold));
    }
    report
}

/// Exact product of two uniform vectors, the extreme independent case.
pub fn uniform_product(log_dim_p: u32, log_dim_q: u32) -> JointDistribution {
    let p = ProbVector::uniform(1 << log_dim_p).expect("nonempty");
    let q = ProbVector::uniform(1 << log_dim_q).expect("nonempty");
    JointDistribution::product(&p, &q)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_uniform_product_satisfies_join_statement() {
        // P uniform over 2^{nh} = 4 atoms, Q uniform over 2^{mh'} = 8 atoms.
        let j = uniform_product(2, 3);
        let (n, h, gamma) = (2usize, 1.0, 0.1);
        let alpha = 0.3;
        let m = libm::ceil(n as f64 * (h + alpha) / gamma) as usize;
        let params = JoinParams {
            alpha,
            beta: 0.2,
            gamma,
            n,
            h,
            m,
            h_prime: 3.0 / m as f64,
            threshold: Threshold::Enforced,
        };
        let v = check_join(&j, &params).unwrap();
        assert!(v.join_rough && v.conditional_ok && v.nested);
        assert_eq!(v.join_good_mass, 1.0);
    }

    #[test]
    fn diagonal_coupling_is_skipped() {
        let j = JointDistribution::new(alloc::vec![
            alloc::vec![0.5, 0.0],
            alloc::vec![0.0, 0.5]
        ])
        .unwrap();
        let params = JoinParams {
            alpha: 0.3,
            beta: 0.2,
            gamma: 0.1,
            n: 1,
            h: 1.0,
            m: 13,
            h_prime: 1.0 / 13.0,
            threshold: Threshold::Enforced,
        };
        assert_eq!(check_join(&j, &params), Err(JoinSkip::NotIndependent));
    }

    #[test]
    fn threshold_is_a_hypothesis_when_enforced() {
        let j = uniform_product(1, 1);
        let params = JoinParams {
            alpha: 0.3,
            beta: 0.2,
            gamma: 0.1,
            n: 1,
            h: 1.0,
            m: 2,
            h_prime: 0.5,
            threshold: Threshold::Enforced,
        };
        assert_eq!(check_join(&j, &params), Err(JoinSkip::LengthBelowThreshold));
    }

    #[test]
    fn certified_delta_value() {
        assert!((certified_fiber_delta(0.1) - 0.001 / (2.0 * core::f64::consts::LN_2)).abs() < 1e-15);
    }

    #[test]
    fn bisect_finds_boundary() {
        let d = bisect_delta(0.0, 10.0, |x| x <= 2.5);
        assert!((d - 2.5).abs() < 1e-9);
        assert_eq!(bisect_delta(0.0, 1.0, |_| true), 1.0);
    }

    #[test]
    fn conditioning_threshold_behaviour() {
        assert_eq!(conditioning_threshold(0.1, 0.1, 0.5), None);
        let n = conditioning_threshold(0.1, 0.3, 0.5).unwrap();
        // gap 0.2, log2(1/0.5) = 1, margin 0.1 -> log2(10) = 3.32 -> 17
        assert_eq!(n, 17);
    }

    #[test]
    fn trials_are_order_independent() {
        let a = conditioning_trial(9, 17);
        let _ = conditioning_trial(9, 3);
        assert_eq!(a, conditioning_trial(9, 17));
    }
}
