//! Shannon and conditional entropy, the roughly-equal predicate,
//! δ-independence, and the Hamming-ball entropy constants.
//!
//! All logarithms are base 2; entropies are in bits.

use alloc::format;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::measure::{JointDistribution, ProbVector};

pub mod validators;

/// Relative slack applied at the endpoints of the good-mass window.
pub const WINDOW_SLACK: f64 = 1e-12;

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        -p * libm::log2(p)
    } else {
        0.0
    }
}

/// Entropy of raw nonnegative values summed in the given order.
pub fn entropy_of(values: &[f64]) -> f64 {
    values.iter().map(|&p| plogp(p)).sum()
}

/// Entropy with terms summed in ascending order, so that any permutation of
/// the same values gives a bit-identical result.
pub(crate) fn canonical_entropy(values: &[f64]) -> f64 {
    let mut terms: Vec<f64> = values.iter().map(|&p| plogp(p)).collect();
    terms.sort_unstable_by(f64::total_cmp);
    terms.iter().sum()
}

pub fn shannon_entropy(p: &ProbVector) -> f64 {
    entropy_of(p.entries())
}

/// Binary entropy `H(x, 1 - x)`.
pub fn binary_entropy(x: f64) -> f64 {
    plogp(x) + plogp(1.0 - x)
}

/// `H(P | Q)` where P indexes rows and Q columns.
pub fn conditional_entropy(j: &JointDistribution) -> f64 {
    canonical_entropy(j.cells()) - entropy_of(&j.col_sums())
}

/// Mutual information `H(P) + H(Q) - H(P ∨ Q)`.
pub fn mutual_information(j: &JointDistribution) -> f64 {
    entropy_of(&j.row_sums()) + entropy_of(&j.col_sums()) - canonical_entropy(j.cells())
}

/// `P ⊥^δ Q`, i.e. `H(P|Q) > H(P) - δ`.
///
/// Evaluated in the rearranged form `H(P ∨ Q) + δ > H(P) + H(Q)`, which is
/// bit-for-bit invariant under transposition.
pub fn is_delta_independent(j: &JointDistribution, delta: f64) -> bool {
    let h_join = canonical_entropy(j.cells());
    let h_p = entropy_of(&j.row_sums());
    let h_q = entropy_of(&j.col_sums());
    h_join + delta > h_p + h_q
}

/// Parameters `(ε, n, h)` of the roughly-equal predicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoughEqualParams {
    pub epsilon: f64,
    pub n: usize,
    pub h: f64,
}

impl RoughEqualParams {
    pub fn new(epsilon: f64, n: usize, h: f64) -> Result<Self> {
        if !(epsilon > 0.0) || n == 0 || !(h > 0.0) || !h.is_finite() || !epsilon.is_finite() {
            return Err(Error::DomainError(format!(
                "rough-equality parameters need epsilon > 0, n >= 1, h > 0 (got {epsilon}, {n}, {h})"
            )));
        }
        Ok(Self { epsilon, n, h })
    }

    /// True when `log2_mass` lies strictly inside `(-n(h+ε), -n(h-ε))`.
    pub fn is_good_log2(&self, log2_mass: f64) -> bool {
        in_good_window(log2_mass, self.n, self.h, self.epsilon)
    }
}

/// Whether a mass with base-2 logarithm `log2_mass` lies strictly inside
/// `(2^{-n(h+ε)}, 2^{-n(h-ε)})`. Endpoint ties within a relative
/// [`WINDOW_SLACK`] count as outside.
pub fn in_good_window(log2_mass: f64, n: usize, h: f64, epsilon: f64) -> bool {
    let n = n as f64;
    let lo = -n * (h + epsilon);
    let hi = -n * (h - epsilon);
    let slack = WINDOW_SLACK * libm::fmax(1.0, libm::fmax(libm::fabs(lo), libm::fabs(hi)));
    log2_mass > lo + slack && log2_mass < hi - slack
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoughEqualReport {
    pub good_indices: Vec<usize>,
    pub good_mass: f64,
    pub holds: bool,
}

pub fn is_roughly_equal(p: &ProbVector, params: RoughEqualParams) -> RoughEqualReport {
    rough_equality_of(p.entries(), params)
}

/// Same predicate on raw masses that need not sum to one.
pub(crate) fn rough_equality_of(masses: &[f64], params: RoughEqualParams) -> RoughEqualReport {
    let mut good_indices = Vec::new();
    let mut good_mass = 0.0;
    for (i, &p) in masses.iter().enumerate() {
        if p > 0.0 && params.is_good_log2(libm::log2(p)) {
            good_indices.push(i);
            good_mass += p;
        }
    }
    RoughEqualReport { good_indices, holds: good_mass > 1.0 - params.epsilon, good_mass }
}

/// `β(δ) = H(3δ, 1-3δ) + 3δ·log2 l`: the exponent of the size of a
/// Hamming ball of normalized radius 3δ.
pub fn beta_constant(delta: f64, l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::DomainError(format!("alphabet size {l} < 2")));
    }
    if !(delta >= 0.0) || !(3.0 * delta <= 0.5) {
        return Err(Error::DomainError(format!(
            "3δ = {} must lie in [0, 1/2]",
            3.0 * delta
        )));
    }
    let r = 3.0 * delta;
    Ok(binary_entropy(r) + r * libm::log2(l as f64))
}

/// Base-2 logarithm of [`ball_size_bound`].
pub fn log2_ball_size_bound(n: usize, delta: f64, l: usize) -> Result<f64> {
    if l < 2 {
        return Err(Error::DomainError(format!("alphabet size {l} < 2")));
    }
    if n == 0 {
        return Err(Error::DomainError("block length must be >= 1".into()));
    }
    if !(delta >= 0.0) || !(delta <= 0.5) {
        return Err(Error::DomainError(format!("radius δ = {delta} must lie in [0, 1/2]")));
    }
    Ok(n as f64 * (binary_entropy(delta) + delta * libm::log2(l as f64)))
}

/// Upper bound `2^{n(H(δ,1-δ) + δ log2 l)}` on the number of blocks of
/// length `n` within normalized Hamming distance δ of a fixed block.
pub fn ball_size_bound(n: usize, delta: f64, l: usize) -> Result<f64> {
    Ok(libm::exp2(log2_ball_size_bound(n, delta, l)?))
}
